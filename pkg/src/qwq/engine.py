"""
Exact evolution of one and two noninteracting coined walkers on a line.

A two-walker state is kept as a short sum of product terms
``sum_j c_j |L_j>|R_j>`` (walker 1 in ``L``, walker 2 in ``R``). Each factor
evolves under its own walk operator, so memory stays linear in the window
size; dense ``4 L^2`` vectors are only built for position-resolved outputs
and for the dense cross-check.

Reduced-state purities are computed from spin-resolved Gram matrices

    M[j, k, s, s'] = sum_x L_j(s, x) conj(L_k(s', x))

which is all that ``Tr(rho_part^2)`` needs for any split of the four
subsystems S1, S2, X1, X2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import LatticeWindow, WalkerState, ket_to_dm

__all__ = [
    "HADAMARD",
    "WindowOverflowError",
    "DimensionCapError",
    "CoinOperator",
    "ProductSumState",
    "SUBSYSTEMS",
    "CANONICAL_BIPARTITIONS",
    "canonical_part",
    "step",
    "evolve",
    "evolve_two",
    "walk_unitary",
    "evolve_dense_two",
    "position_distribution",
    "joint_distribution",
    "conditional_spin_distribution",
    "reduced_state",
    "purity_of_part",
    "cm_relative_factorization_check",
    "conditional_spin_on_sign",
    "DENSE_DIM_CAP",
]

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
DENSE_DIM_CAP = 4096


class WindowOverflowError(ValueError):
    """Amplitude would be shifted past the edge of the lattice window."""


class DimensionCapError(ValueError):
    """Reduced state too large to materialize; use purity_of_part instead."""


@dataclass(frozen=True, eq=False)
class CoinOperator:
    matrix: NDArray[np.complex128] = field(default_factory=lambda: HADAMARD.copy())

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError("coin must be a 2x2 matrix")
        if np.max(np.abs(m.conj().T @ m - np.eye(2))) > 1e-14:
            raise ValueError("coin is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


_DEFAULT_COIN = CoinOperator()


def step(state: WalkerState, coin: CoinOperator = _DEFAULT_COIN) -> WalkerState:
    """One application of ``D (C x 1)``: coin the spin, then shift up by +1 and down by -1."""
    c = coin.matrix
    a, b = state.amp_up, state.amp_down
    up = c[0, 0] * a + c[0, 1] * b
    down = c[1, 0] * a + c[1, 1] * b
    if up[-1] != 0 or down[0] != 0:
        raise WindowOverflowError(
            f"window [{state.window.x_min}, {state.window.x_max}] exhausted"
        )
    new_up = np.empty_like(up)
    new_down = np.empty_like(down)
    new_up[0] = 0
    new_up[1:] = up[:-1]
    new_down[-1] = 0
    new_down[:-1] = down[1:]
    return WalkerState(state.window, new_up, new_down)


def evolve(initial: WalkerState, t: int, coin: CoinOperator = _DEFAULT_COIN) -> WalkerState:
    """Apply ``t`` walk steps."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    state = initial
    for _ in range(int(t)):
        state = step(state, coin)
    return state


@dataclass(frozen=True, eq=False)
class ProductSumState:
    """Two-walker ket ``sum_j c_j |L_j> (x) |R_j>`` with at most four terms.

    Subsystem order for dense representations is (S1, S2, X1, X2).
    """

    coefficients: tuple
    left: tuple
    right: tuple

    def __post_init__(self):
        coefs = tuple(complex(c) for c in self.coefficients)
        left, right = tuple(self.left), tuple(self.right)
        if not (len(coefs) == len(left) == len(right)):
            raise ValueError("coefficient and factor lists differ in length")
        if not 1 <= len(coefs) <= 4:
            raise ValueError(f"rank must be between 1 and 4, got {len(coefs)}")
        if len({w.window for w in left}) != 1 or len({w.window for w in right}) != 1:
            raise ValueError("all factors of one walker must share a window")
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple]) -> "ProductSumState":
        coefs, left, right = zip(*terms)
        return cls(coefs, left, right)

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def terms(self):
        return list(zip(self.coefficients, self.left, self.right))

    @property
    def window_left(self) -> LatticeWindow:
        return self.left[0].window

    @property
    def window_right(self) -> LatticeWindow:
        return self.right[0].window

    def _c(self) -> NDArray[np.complex128]:
        return np.array(self.coefficients)

    def spin_gram(self, side: int) -> NDArray[np.complex128]:
        """``M[j, k, s, s'] = sum_x F_j(s, x) conj(F_k(s', x))`` for walker ``side`` (1 or 2)."""
        factors = self.left if side == 1 else self.right
        F = np.stack([w.spinor for w in factors])
        return np.einsum("jsx,ktx->jkst", F, F.conj())

    def inner(self, other: "ProductSumState") -> complex:
        """``<self|other>`` from factor overlaps."""
        total = 0j
        for c, l, r in self.terms:
            for d, l2, r2 in other.terms:
                total += np.conj(c) * d * l.inner(l2) * r.inner(r2)
        return complex(total)

    def norm_squared(self) -> float:
        return self.inner(self).real

    def normalized(self) -> "ProductSumState":
        n = np.sqrt(self.norm_squared())
        return ProductSumState(tuple(c / n for c in self.coefficients), self.left, self.right)

    def amplitudes(self) -> NDArray[np.complex128]:
        """Dense amplitude tensor ``psi[s1, s2, x1, x2]``."""
        L = np.stack([w.spinor for w in self.left])
        R = np.stack([w.spinor for w in self.right])
        return np.einsum("j,jax,jby->abxy", self._c(), L, R)

    def to_vector(self) -> NDArray[np.complex128]:
        return self.amplitudes().reshape(-1)


def _evolve_cached(w: WalkerState, t: int, coin: CoinOperator, cache: dict) -> WalkerState:
    key = id(w)
    if key not in cache:
        cache[key] = (w, evolve(w, t, coin))
    return cache[key][1]


def evolve_two(
    initial: ProductSumState, t: int, coin: CoinOperator = _DEFAULT_COIN
) -> ProductSumState:
    """Evolve with ``U_1^t U_2^t``; shared factors are evolved once."""
    cache: dict = {}
    left = tuple(_evolve_cached(w, t, coin, cache) for w in initial.left)
    right = tuple(_evolve_cached(w, t, coin, cache) for w in initial.right)
    return ProductSumState(initial.coefficients, left, right)


def walk_unitary(window: LatticeWindow, coin: CoinOperator = _DEFAULT_COIN) -> NDArray[np.complex128]:
    """Dense single-walker step matrix on ``C^2 (x) C^L`` built from ``D`` and ``C``.

    The edge sites wrap around, which is harmless as long as the state keeps
    one empty site of headroom on each side.
    """
    n = window.size
    shift_up = np.roll(np.eye(n), 1, axis=0)
    shift_down = np.roll(np.eye(n), -1, axis=0)
    proj_up = np.diag([1.0, 0.0])
    proj_down = np.diag([0.0, 1.0])
    D = np.kron(proj_up, shift_up) + np.kron(proj_down, shift_down)
    return D @ np.kron(coin.matrix, np.eye(n))


def evolve_dense_two(initial: ProductSumState, t: int, coin: CoinOperator = _DEFAULT_COIN):
    """Reference evolution of the full ``4 L^2`` amplitude tensor.

    Returns ``psi[s1, s2, x1, x2]``. Meant for cross-checking on small windows.
    """
    U1 = walk_unitary(initial.window_left, coin)
    U2 = walk_unitary(initial.window_right, coin)
    n1, n2 = initial.window_left.size, initial.window_right.size
    psi = initial.amplitudes()
    # reorder to (s1, x1, s2, x2) so each walker is one contiguous axis
    m = psi.transpose(0, 2, 1, 3).reshape(2 * n1, 2 * n2)
    for _ in range(int(t)):
        m = U1 @ m @ U2.T
    return m.reshape(2, n1, 2, n2).transpose(0, 2, 1, 3)


def position_distribution(state: WalkerState) -> NDArray[np.float64]:
    """``p(x) = |a(x)|^2 + |b(x)|^2``."""
    return np.abs(state.amp_up) ** 2 + np.abs(state.amp_down) ** 2


def joint_distribution(state: ProductSumState) -> NDArray[np.float64]:
    """``p(x1, x2)`` as a ``(L1, L2)`` array."""
    psi = state.amplitudes()
    return np.sum(np.abs(psi) ** 2, axis=(0, 1))


_SPIN_INDEX = {"up": 0, "down": 1, 0: 0, 1: 1}


def conditional_spin_distribution(state: ProductSumState, walker: int, spin) -> NDArray[np.float64]:
    """Probability of finding ``walker`` at ``x`` with the given spin."""
    mu = _SPIN_INDEX[spin]
    c = state._c()
    if walker == 1:
        mine, other = state.left, state.right
    elif walker == 2:
        mine, other = state.right, state.left
    else:
        raise ValueError("walker must be 1 or 2")
    F = np.stack([w.spinor[mu] for w in mine])
    # overlaps <O_k|O_j>
    G = np.array([[ok.inner(oj) for oj in other] for ok in other])
    weights = np.outer(c, c.conj()) * G.T
    p = np.einsum("jk,jx,kx->x", weights, F, F.conj())
    return p.real


SUBSYSTEMS = ("S1", "S2", "X1", "X2")
CANONICAL_BIPARTITIONS = tuple(
    frozenset(p)
    for p in (("S1",), ("S2",), ("X1",), ("X2",), ("S1", "S2"), ("S1", "X1"), ("S1", "X2"))
)


def _parse_part(part) -> frozenset:
    if isinstance(part, str):
        names = [part[i : i + 2] for i in range(0, len(part), 2)]
    else:
        names = list(part)
    s = frozenset(names)
    if not s or not s <= set(SUBSYSTEMS) or len(s) == 4 or len(names) != len(s):
        raise ValueError(f"{part!r} is not a nonempty proper subset of {SUBSYSTEMS}")
    return s


def canonical_part(part) -> frozenset:
    """Map a part, or its complement, onto one of the seven canonical parts."""
    s = _parse_part(part)
    if s in CANONICAL_BIPARTITIONS:
        return s
    comp = frozenset(SUBSYSTEMS) - s
    if comp in CANONICAL_BIPARTITIONS:
        return comp
    raise ValueError(f"{part!r} has no canonical form")  # unreachable for 4 subsystems


def _kept(part: frozenset, walker: int) -> str:
    s, x = f"S{walker}" in part, f"X{walker}" in part
    return {(False, False): "none", (True, False): "S", (False, True): "X", (True, True): "SX"}[(s, x)]


def _pair_traces(M: NDArray[np.complex128], kept: str) -> NDArray[np.complex128]:
    """``W[j,k,l,m] = Tr(A_jk A_lm)`` with ``A_jk`` the reduced operator of ``|F_j><F_k|``."""
    tr = np.einsum("jkss->jk", M)  # <F_k|F_j>
    if kept == "none":
        return np.einsum("jk,lm->jklm", tr, tr)
    if kept == "SX":
        return np.einsum("lk,jm->jklm", tr, tr)
    if kept == "S":
        return np.einsum("jkst,lmts->jklm", M, M)
    return np.einsum("jmst,lkts->jklm", M, M)


def purity_of_part(state: ProductSumState, part) -> float:
    """``Tr(rho_part^2)`` from factor Gram matrices; no position-space matrices are formed."""
    p = _parse_part(part)
    c = state._c()
    WL = _pair_traces(state.spin_gram(1), _kept(p, 1))
    WR = _pair_traces(state.spin_gram(2), _kept(p, 2))
    val = np.einsum("j,k,l,m,jklm,jklm->", c, c.conj(), c, c.conj(), WL, WR)
    return float(val.real / state.norm_squared() ** 2)


def _kept_dim(kept: str, n: int) -> int:
    return {"none": 1, "S": 2, "X": n, "SX": 2 * n}[kept]


def _factor_operator(Fj: NDArray, Fk: NDArray, kept: str):
    """Reduced operator of ``|F_j><F_k|`` on the kept subsystems of one walker."""
    if kept == "none":
        return np.array([[np.vdot(Fk, Fj)]])
    if kept == "S":
        return Fj @ Fk.conj().T
    if kept == "X":
        return Fj.T @ Fk.conj()
    v, w = Fj.reshape(-1), Fk.reshape(-1)
    return np.outer(v, w.conj())


def reduced_state(state: ProductSumState, part, dim_cap: int = DENSE_DIM_CAP) -> NDArray[np.complex128]:
    """Density matrix of ``part``, factors ordered as in (S1, S2, X1, X2).

    Raises
    ------
    DimensionCapError
        If the reduced matrix would exceed ``dim_cap`` rows.
    """
    p = _parse_part(part)
    kl, kr = _kept(p, 1), _kept(p, 2)
    dl = _kept_dim(kl, state.window_left.size)
    dr = _kept_dim(kr, state.window_right.size)
    if dl * dr > dim_cap:
        raise DimensionCapError(f"reduced state of {sorted(p)} has dimension {dl * dr} > {dim_cap}")
    rho = np.zeros((dl * dr, dl * dr), dtype=np.complex128)
    for cj, Lj, Rj in state.terms:
        for ck, Lk, Rk in state.terms:
            A = _factor_operator(Lj.spinor, Lk.spinor, kl)
            B = _factor_operator(Rj.spinor, Rk.spinor, kr)
            rho += cj * np.conj(ck) * np.kron(A, B)
    rho /= state.norm_squared()
    # walker-major order -> canonical (S1, S2, X1, X2) order
    names, dims = [], []
    for walker, kept, n in ((1, kl, state.window_left.size), (2, kr, state.window_right.size)):
        if "S" in kept:
            names.append(f"S{walker}")
            dims.append(2)
        if "X" in kept:
            names.append(f"X{walker}")
            dims.append(n)
    perm = sorted(range(len(names)), key=lambda i: SUBSYSTEMS.index(names[i]))
    if perm != list(range(len(names))):
        d = len(names)
        rho = rho.reshape(dims + dims).transpose(perm + [d + i for i in perm]).reshape(rho.shape)
    return rho


def _relative_cm_matrix(state: ProductSumState):
    """Amplitudes regrouped as rows ``(s1, s2, x_r)`` and columns ``2 x_cm``.

    Returns one matrix per parity sector of ``x1 + x2`` (``x_r`` and ``2 x_cm``
    always share parity, so the lattice image splits into two sectors).
    """
    psi = state.amplitudes()
    x1 = state.window_left.sites
    x2 = state.window_right.sites
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    r = (X2 - X1).ravel()
    c2 = (X1 + X2).ravel()
    amps = psi.reshape(4, -1)
    sectors = []
    for parity in (0, 1):
        sel = (c2 % 2) == parity
        r_s, c_s = r[sel], c2[sel]
        r_idx = (r_s - r_s.min()) // 2
        c_idx = (c_s - c_s.min()) // 2
        M = np.zeros((4, r_idx.max() + 1, c_idx.max() + 1), dtype=np.complex128)
        M[:, r_idx, c_idx] = amps[:, sel]
        sectors.append(M.reshape(-1, c_idx.max() + 1))
    return sectors


def cm_relative_factorization_check(state: ProductSumState) -> float:
    """Purity of the centre-of-mass state, resolved by lattice parity sector.

    Under ``|x1, x2> -> |x2 - x1>_r |(x1 + x2)/2>_cm`` the relative coordinate
    and ``2 x_cm`` share parity, so the image is a direct sum of two sectors.
    Returns ``sum_p w_p Tr(rho_cm,p^2)`` where ``rho_cm,p`` is the normalized
    cm state of sector ``p`` and ``w_p`` its weight; this is 1 exactly when
    the state factorizes into cm and relative parts within each sector.
    """
    total = 0.0
    norm = 0.0
    for M in _relative_cm_matrix(state):
        s = np.linalg.svd(M, compute_uv=False) ** 2
        w = s.sum()
        if w > 0:
            total += w * np.sum((s / w) ** 2)
            norm += w
    return float(total / norm)


def cm_purity_unresolved(state: ProductSumState) -> float:
    """Plain ``Tr(rho_cm^2)`` over the full half-integer cm lattice."""
    sectors = _relative_cm_matrix(state)
    rho_blocks = [M.conj().T @ M for M in sectors]
    # sectors have disjoint cm support: rho_cm is block diagonal
    total = sum(np.trace(b).real for b in rho_blocks)
    return float(sum(np.sum(np.abs(b) ** 2) for b in rho_blocks) / total**2)


def conditional_spin_on_sign(state: ProductSumState, sign) -> NDArray[np.complex128]:
    """Two-spin state after finding ``x_r = x2 - x1`` positive (``+``) or negative (``-``)."""
    if sign in ("+", 1, +1):
        keep = lambda r: r > 0  # noqa: E731
    elif sign in ("-", -1):
        keep = lambda r: r < 0  # noqa: E731
    else:
        raise ValueError("sign must be '+' or '-'")
    psi = state.amplitudes()
    X1, X2 = np.meshgrid(state.window_left.sites, state.window_right.sites, indexing="ij")
    mask = keep(X2 - X1)
    v = psi.reshape(4, *mask.shape)[:, mask]
    rho = v @ v.conj().T
    p = np.trace(rho).real
    if p <= 0:
        raise ValueError(f"sign {sign!r} branch has zero probability")
    return rho / p


def spin_state(state: ProductSumState) -> NDArray[np.complex128]:
    """Reduced two-spin state ``rho_{S1 S2}`` (shortcut for ``reduced_state(state, 'S1S2')``)."""
    return reduced_state(state, ("S1", "S2"))


def dense_reduced_state(psi: NDArray, part) -> NDArray[np.complex128]:
    """Reduced state of a dense ``psi[s1, s2, x1, x2]`` tensor (reference path)."""
    from .core import partial_trace

    p = _parse_part(part)
    keep = [i for i, name in enumerate(SUBSYSTEMS) if name in p]
    return partial_trace(psi.reshape(-1), keep, psi.shape)


def product_state(left: WalkerState, right: WalkerState) -> ProductSumState:
    return ProductSumState((1.0,), (left,), (right,))


def singlet_state(up_left: WalkerState, down_left: WalkerState, up_right: WalkerState, down_right: WalkerState) -> ProductSumState:
    """``(|up>|down> - |down>|up>)/sqrt2`` built from given spin-up/spin-down walker factors."""
    s = 1 / np.sqrt(2.0)
    return ProductSumState((s, -s), (up_left, down_left), (down_right, up_right))


def density_from_state(state: ProductSumState) -> NDArray[np.complex128]:
    return ket_to_dm(state.to_vector())
