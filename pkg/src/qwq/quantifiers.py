"""
Quantumness quantifiers for density matrices and two-walker states.

Entropies are natural-log. Measurement-based quantities use rank-one
projective measurements ``P_+- = (1 +- v.sigma)/2`` on a qubit.

The discord and realism-based-nonlocality optimizers evaluate their
objectives through closed Bloch-vector formulas for two-qubit states, which
makes a dense angle grid cheap; ``measure_map`` together with
``von_neumann_entropy`` is the generic matrix route and is what the
single-context functions (``irreality``, ``contextual_rbn``) use.

Optimization runs a grid scan, then Brent coordinate descent from the best
grid points, then a Nelder-Mead polish for multi-angle problems or starts
that did not converge.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize, minimize_scalar

from .core import (
    IDENTITY2,
    SIGMA_Y,
    ObservableDirection,
    TwoQubitState,
    as_unit_vector,
    bloch_decompose,
    partial_trace,
    pauli_observable,
)
from .engine import CANONICAL_BIPARTITIONS, ProductSumState, purity_of_part

__all__ = [
    "EIG_CLIP",
    "OptimizationConfig",
    "OptimizationResult",
    "OptimizationWarning",
    "MeasurementContext",
    "linear_entropy",
    "von_neumann_entropy",
    "mutual_information",
    "concurrence",
    "gme_concurrence",
    "chsh_value",
    "bell_nonlocality",
    "epr_steering",
    "measure_map",
    "quantum_discord",
    "optimize_discord",
    "symmetric_discord",
    "optimize_symmetric_discord",
    "irreality",
    "scaled_irreality",
    "contextual_rbn",
    "rbn",
    "optimize_rbn",
    "SCALED_IRREALITY_DELTA",
]

EIG_CLIP = 1e-12
SCALED_IRREALITY_DELTA = 0.05


class OptimizationWarning(RuntimeWarning):
    """A direction optimization stopped before meeting its tolerance."""


@dataclass(frozen=True)
class OptimizationConfig:
    n_theta: int = 64
    n_phi: int = 32
    refine_iterations: int = 40
    tol: float = 1e-9
    n_starts: int = 4

    def __post_init__(self):
        if self.n_theta < 16 or self.n_phi < 8:
            raise ValueError("grid resolution must be at least 16 x 8")
        if self.refine_iterations < 1 or self.n_starts < 1:
            raise ValueError("refine_iterations and n_starts must be positive")


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    directions: tuple
    converged: bool
    iterations: int


@dataclass(frozen=True)
class MeasurementContext:
    dir_a: ObservableDirection
    dir_b: ObservableDirection


# ---------------------------------------------------------------- entropies


def _eigvals(rho) -> NDArray[np.float64]:
    lam = np.linalg.eigvalsh(np.asarray(rho, dtype=np.complex128))
    return np.where(lam < EIG_CLIP, 0.0, lam)


def _entropy_of_probs(p, axis=-1):
    p = np.asarray(p, dtype=float)
    p = np.where(p < EIG_CLIP, 0.0, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=axis)


def linear_entropy(rho) -> float:
    """``1 - Tr(rho^2)``."""
    rho = np.asarray(rho, dtype=np.complex128)
    return float(1.0 - np.sum(np.abs(rho) ** 2))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho ln rho)`` with eigenvalues below 1e-12 treated as zero."""
    return float(_entropy_of_probs(_eigvals(rho)))


def mutual_information(rho, dims: Sequence[int] = (2, 2)) -> float:
    rho_a = partial_trace(rho, [0], dims)
    rho_b = partial_trace(rho, [1], dims)
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho)


# ----------------------------------------------------- entanglement & Bell

_SYSY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 density matrix")
    R = rho @ _SYSY @ rho.conj() @ _SYSY
    lam = np.sort(np.linalg.eigvals(R).real)[::-1]
    lam = np.sqrt(np.where(lam < EIG_CLIP, 0.0, lam))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def gme_concurrence(state: ProductSumState) -> float:
    """Minimum of ``sqrt(2 L(rho_part))`` over the seven bipartitions of S1 S2 X1 X2."""
    vals = [2.0 * (1.0 - purity_of_part(state, part)) for part in CANONICAL_BIPARTITIONS]
    return float(np.sqrt(max(0.0, min(vals))))


def _expect_pair(rho, da, db) -> float:
    op = np.kron(pauli_observable(da), pauli_observable(db))
    return float(np.trace(rho @ op).real)


def chsh_value(rho, a_plus, a_minus, b_plus, b_minus) -> float:
    """``|<A+B+> + <A-B+> + <A+B-> - <A-B->|``."""
    rho = np.asarray(rho, dtype=np.complex128)
    return abs(
        _expect_pair(rho, a_plus, b_plus)
        + _expect_pair(rho, a_minus, b_plus)
        + _expect_pair(rho, a_plus, b_minus)
        - _expect_pair(rho, a_minus, b_minus)
    )


def _as_two_qubit(rho) -> TwoQubitState:
    return rho if isinstance(rho, TwoQubitState) else bloch_decompose(rho)


def bell_nonlocality(rho) -> float:
    """``max{0, (sqrt(c.c - c_min^2) - 1)/(sqrt2 - 1)}`` with ``c`` the singular values of T."""
    c = _as_two_qubit(rho).correlation_singular_values
    cc = float(c @ c)
    val = (np.sqrt(max(0.0, cc - c.min() ** 2)) - 1) / (np.sqrt(2.0) - 1)
    return float(max(0.0, val))


def epr_steering(rho) -> float:
    """``max{0, (|T|_F - 1)/(sqrt3 - 1)}``."""
    c = _as_two_qubit(rho).correlation_singular_values
    return float(max(0.0, (np.sqrt(c @ c) - 1) / (np.sqrt(3.0) - 1)))


# ------------------------------------------------------------ measurements


def _projectors(direction):
    obs = pauli_observable(direction)
    return (IDENTITY2 + obs) / 2, (IDENTITY2 - obs) / 2


def _side_index(side) -> int:
    if side in ("A", 0):
        return 0
    if side in ("B", 1):
        return 1
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def _measure_one(rho, direction, which: int, dims) -> NDArray[np.complex128]:
    if dims[which] != 2:
        raise ValueError("the measured subsystem must be a qubit")
    other = np.eye(dims[1 - which])
    out = np.zeros_like(rho)
    for P in _projectors(direction):
        K = np.kron(P, other) if which == 0 else np.kron(other, P)
        out += K @ rho @ K
    return out


def measure_map(rho, side, dirs, dims: Sequence[int] = (2, 2)) -> NDArray[np.complex128]:
    """Unread projective measurement of ``v.sigma`` on side ``A``, ``B`` or both (``AB``).

    For ``side='AB'`` pass ``dirs=(dir_a, dir_b)``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    dims = tuple(dims)
    if rho.shape != (dims[0] * dims[1],) * 2:
        raise ValueError(f"state shape {rho.shape} does not match dims {dims}")
    if side == "AB":
        da, db = dirs
        return _measure_one(_measure_one(rho, da, 0, dims), db, 1, dims)
    return _measure_one(rho, dirs, _side_index(side), dims)


# ------------------------------------------- vectorized two-qubit objectives


def _bloch_parts(state: TwoQubitState, measured: int):
    """``(r_unmeasured, r_measured, T)`` with T acting as ``T @ n_measured``."""
    if measured == 1:
        return state.bloch_a, state.bloch_b, state.corr_T
    return state.bloch_b, state.bloch_a, state.corr_T.T


def _h_pm(x):
    """Entropy of the two-outcome distribution ``(1 +- x)/2``."""
    return _entropy_of_probs(np.stack([(1 + x) / 2, (1 - x) / 2], axis=-1))


def _entropy_after_one(state: TwoQubitState, n: NDArray, measured: int):
    """``S(Phi(rho))`` for a batch of directions ``n`` (shape ``(N, 3)``) on one side."""
    r_other, r_meas, T = _bloch_parts(state, measured)
    beta = n @ r_meas
    Tn = n @ T.T  # rows T @ n_i
    lams = []
    for b in (1.0, -1.0):
        length = np.linalg.norm(r_other[None, :] + b * Tn, axis=1)
        base = 1 + b * beta
        lams += [(base + length) / 4, (base - length) / 4]
    return _entropy_of_probs(np.stack(lams, axis=-1))


def _joint_probs(state: TwoQubitState, nA: NDArray, nB: NDArray):
    """Outcome probabilities ``p(a, b)`` for every direction pair, shape ``(NA, NB, 4)``."""
    alpha = nA @ state.bloch_a
    beta = nB @ state.bloch_b
    gamma = nA @ state.corr_T @ nB.T
    ps = []
    for a in (1.0, -1.0):
        for b in (1.0, -1.0):
            ps.append((1 + a * alpha[:, None] + b * beta[None, :] + a * b * gamma) / 4)
    return np.stack(ps, axis=-1)


def _sphere_grid(cfg: OptimizationConfig):
    theta = np.arange(cfg.n_theta) * (2 * np.pi / cfg.n_theta)
    phi = (np.arange(cfg.n_phi) + 0.5) * (np.pi / cfg.n_phi)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    angles = np.stack([TH.ravel(), PH.ravel()], axis=1)
    return angles, _angles_to_vectors(angles)


def _angles_to_vectors(angles):
    angles = np.atleast_2d(angles)
    th, ph = angles[:, 0], angles[:, 1]
    return np.stack([np.cos(th) * np.sin(ph), np.sin(th) * np.sin(ph), np.cos(ph)], axis=1)


def _coordinate_descent(f, x0, cfg: OptimizationConfig):
    """Cyclic Brent line searches over each angle.

    The search bracket follows the last round's largest step: it stays wide
    while the iterate is still travelling and narrows once steps shrink.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    half = np.pi / max(cfg.n_theta, cfg.n_phi)
    converged = False
    it = 0
    for it in range(1, cfg.refine_iterations + 1):
        f_start = fx
        largest = 0.0
        for k in range(len(x)):
            def line(v, k=k):
                y = x.copy()
                y[k] = v
                return f(y)

            res = minimize_scalar(
                line, bounds=(x[k] - half, x[k] + half), method="bounded", options={"xatol": 1e-12}
            )
            if res.fun < fx:
                largest = max(largest, abs(res.x - x[k]))
                x[k], fx = res.x, res.fun
        if f_start - fx < cfg.tol:
            converged = True
            break
        half = min(np.pi / 2, max(4 * largest, 1e-7))
    return x, fx, converged, it


def _top_starts(values: NDArray, n: int):
    order = np.argsort(values, axis=None, kind="stable")
    return [np.unravel_index(i, values.shape) for i in order[:n]]


def _polish(objective, x, fx, cfg: OptimizationConfig):
    """Nelder-Mead from the coordinate-descent result; helps along curved valleys."""
    res = minimize(
        objective,
        x,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": cfg.tol * 1e-3, "maxiter": 400 * len(x)},
    )
    if res.fun < fx:
        return res.x, float(res.fun), bool(res.success)
    return x, fx, bool(res.success)


def _optimize(objective, start_points, cfg: OptimizationConfig):
    best = None
    for x0 in start_points:
        x, fx, conv, it = _coordinate_descent(objective, x0, cfg)
        if not conv or len(x) > 2:
            x, fx, polished = _polish(objective, x, fx, cfg)
            conv = conv or polished
        if best is None or fx < best[1] - 1e-15:
            best = (x, fx, conv, it)
    return best


def _report(name: str, result: OptimizationResult) -> OptimizationResult:
    if not result.converged:
        warnings.warn(
            f"{name}: tolerance not met after {result.iterations} rounds; best value {result.value!r}",
            OptimizationWarning,
            stacklevel=3,
        )
    return result


def _directions_from(x, count: int):
    return tuple(ObservableDirection(float(x[2 * i]), float(x[2 * i + 1])).canonical() for i in range(count))


# ----------------------------------------------------------------- discord


def optimize_discord(rho, measured_side="B", cfg: OptimizationConfig | None = None) -> OptimizationResult:
    """One-sided discord ``min_n [I(rho) - I(Phi_n(rho))]`` with the optimal direction."""
    cfg = cfg or OptimizationConfig()
    st = _as_two_qubit(rho)
    m = _side_index(measured_side)
    r_meas = st.bloch_b if m == 1 else st.bloch_a
    S_rho = von_neumann_entropy(st.rho)

    def d_of(n):
        # I(rho) - I(Phi(rho)) = S(rho_m) - S(Phi(rho_m)) - S(rho) + S(Phi(rho))
        return (
            _h_pm(np.linalg.norm(r_meas))
            - _h_pm(n @ r_meas)
            - S_rho
            + _entropy_after_one(st, n, m)
        )

    angles, vecs = _sphere_grid(cfg)
    vals = d_of(vecs)
    starts = [angles[i] for (i,) in _top_starts(vals, cfg.n_starts)]
    f = lambda x: float(d_of(_angles_to_vectors(x))[0])  # noqa: E731
    x, fx, conv, it = _optimize(f, starts, cfg)
    return _report(
        "quantum_discord",
        OptimizationResult(max(0.0, fx), _directions_from(x, 1), conv, it),
    )


def quantum_discord(rho, measured_side="B", cfg: OptimizationConfig | None = None) -> float:
    """Discord with a projective measurement on ``measured_side``."""
    return optimize_discord(rho, measured_side, cfg).value


def _pair_grid_eval(st: TwoQubitState, vecs, fn, chunk: int = 256):
    n = len(vecs)
    out = np.empty((n, n))
    for i in range(0, n, chunk):
        out[i : i + chunk] = fn(vecs[i : i + chunk], vecs)
    return out


def _joint_entropy(st, nA, nB):
    return _entropy_of_probs(_joint_probs(st, nA, nB))


def optimize_symmetric_discord(rho, cfg: OptimizationConfig | None = None) -> OptimizationResult:
    """``min_{A,B} [I(rho) - I(Phi_AB(rho))]`` with both optimal directions."""
    cfg = cfg or OptimizationConfig()
    st = _as_two_qubit(rho)
    I_rho = (
        _h_pm(np.linalg.norm(st.bloch_a))
        + _h_pm(np.linalg.norm(st.bloch_b))
        - von_neumann_entropy(st.rho)
    )

    def obj(nA, nB):
        hA = _h_pm(nA @ st.bloch_a)[:, None]
        hB = _h_pm(nB @ st.bloch_b)[None, :]
        return I_rho - (hA + hB - _joint_entropy(st, nA, nB))

    angles, vecs = _sphere_grid(cfg)
    vals = _pair_grid_eval(st, vecs, obj)
    starts = [np.concatenate([angles[i], angles[j]]) for i, j in _top_starts(vals, cfg.n_starts)]
    f = lambda x: float(obj(_angles_to_vectors(x[:2]), _angles_to_vectors(x[2:]))[0, 0])  # noqa: E731
    x, fx, conv, it = _optimize(f, starts, cfg)
    return _report(
        "symmetric_discord",
        OptimizationResult(max(0.0, fx), _directions_from(x, 2), conv, it),
    )


def symmetric_discord(rho, cfg: OptimizationConfig | None = None) -> float:
    return optimize_symmetric_discord(rho, cfg).value


# ------------------------------------------------- irreality and realism


def irreality(rho, direction, measured_subsystem="A", dims: Sequence[int] = (2, 2)) -> float:
    """``S(Phi_A(rho)) - S(rho)`` for ``A = v.sigma`` on the given qubit subsystem."""
    rho = np.asarray(rho, dtype=np.complex128)
    return von_neumann_entropy(measure_map(rho, measured_subsystem, direction, dims)) - von_neumann_entropy(rho)


def scaled_irreality(rho_t, rho_0, rho_inf, direction, delta: float = SCALED_IRREALITY_DELTA) -> float:
    """``(I(rho_t) - I(rho_inf)) / (I(rho_0) - I(rho_inf))`` for spin-1 irreality.

    Raises
    ------
    ValueError
        If the denominator is below ``delta`` (directions whose irreality
        barely changes between the initial and asymptotic states).
    """
    i_inf = irreality(rho_inf, direction)
    den = irreality(rho_0, direction) - i_inf
    if abs(den) < delta:
        raise ValueError(f"direction excluded: irreality span {den:.3g} below {delta}")
    return (irreality(rho_t, direction) - i_inf) / den


def contextual_rbn(rho, ctx: MeasurementContext) -> float:
    """``eta_AB = S(Phi_A) + S(Phi_B) - S(Phi_AB) - S(rho)``."""
    rho = np.asarray(rho, dtype=np.complex128)
    s_a = von_neumann_entropy(measure_map(rho, "A", ctx.dir_a))
    s_b = von_neumann_entropy(measure_map(rho, "B", ctx.dir_b))
    s_ab = von_neumann_entropy(measure_map(rho, "AB", (ctx.dir_a, ctx.dir_b)))
    return s_a + s_b - s_ab - von_neumann_entropy(rho)


def _rbn_seed_angles():
    """Parallel pairs on the circle orthogonal to (x+z)/sqrt2, plus the axis pairs."""
    seeds = []
    u = np.array([1.0, 0.0, -1.0]) / np.sqrt(2)
    w = np.array([0.0, 1.0, 0.0])
    for psi in np.linspace(0, np.pi, 8, endpoint=False):
        d = ObservableDirection.from_vector(np.cos(psi) * u + np.sin(psi) * w)
        seeds.append([d.theta, d.phi, d.theta, d.phi])
    axes = [ObservableDirection.from_vector(v) for v in np.eye(3)]
    for da in axes:
        for db in axes:
            seeds.append([da.theta, da.phi, db.theta, db.phi])
    return [np.array(s) for s in seeds]


def optimize_rbn(rho, cfg: OptimizationConfig | None = None) -> OptimizationResult:
    """Realism-based nonlocality ``max_{A,B} eta_AB`` with the optimal context."""
    cfg = cfg or OptimizationConfig()
    st = _as_two_qubit(rho)
    S_rho = von_neumann_entropy(st.rho)

    def neg_eta(nA, nB):
        sA = _entropy_after_one(st, nA, 0)[:, None]
        sB = _entropy_after_one(st, nB, 1)[None, :]
        return -(sA + sB - _joint_entropy(st, nA, nB) - S_rho)

    angles, vecs = _sphere_grid(cfg)
    vals = _pair_grid_eval(st, vecs, neg_eta)
    starts = [np.concatenate([angles[i], angles[j]]) for i, j in _top_starts(vals, cfg.n_starts)]
    seeds = _rbn_seed_angles()
    seed_vals = [float(neg_eta(_angles_to_vectors(s[:2]), _angles_to_vectors(s[2:]))[0, 0]) for s in seeds]
    starts += [seeds[i] for i in np.argsort(seed_vals, kind="stable")[: cfg.n_starts]]
    f = lambda x: float(neg_eta(_angles_to_vectors(x[:2]), _angles_to_vectors(x[2:]))[0, 0])  # noqa: E731
    x, fx, conv, it = _optimize(f, starts, cfg)
    return _report("rbn", OptimizationResult(max(0.0, -fx), _directions_from(x, 2), conv, it))


def rbn(rho, cfg: OptimizationConfig | None = None) -> float:
    return optimize_rbn(rho, cfg).value
