"""
State and operator algebra shared by the walk engine and the quantifiers.

Conventions
-----------
- Spin basis index 0 is ``|up>`` (sigma_z = +1), index 1 is ``|down>``.
- Two-spin kets are ordered ``|s1 s2>`` with index ``2*s1 + s2``.
- Pauli vectors are ordered (sigma_x, sigma_y, sigma_z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY2",
    "PAULIS",
    "BELL",
    "BETA23",
    "LatticeWindow",
    "WalkerState",
    "ObservableDirection",
    "TwoQubitState",
    "as_unit_vector",
    "pauli_observable",
    "validate_density_matrix",
    "bloch_decompose",
    "partial_trace",
    "fidelity",
    "ket_to_dm",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY2 = np.eye(2, dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

_R2 = np.sqrt(2.0)
BELL = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=np.complex128,
) / _R2
BELL.setflags(write=False)
BETA23 = (BELL[1] - BELL[2]) / _R2
BETA23.setflags(write=False)


@dataclass(frozen=True)
class LatticeWindow:
    """Inclusive range of integer lattice sites ``x_min..x_max``."""

    x_min: int
    x_max: int

    def __post_init__(self):
        if int(self.x_min) != self.x_min or int(self.x_max) != self.x_max:
            raise TypeError("window bounds must be integers")
        if self.x_min > self.x_max:
            raise ValueError(f"x_min={self.x_min} exceeds x_max={self.x_max}")

    @classmethod
    def symmetric(cls, half_width: int) -> "LatticeWindow":
        return cls(-int(half_width), int(half_width))

    @classmethod
    def for_gaussian(cls, sigma0: float, horizon: int) -> "LatticeWindow":
        """Window holding a Gaussian of width ``sigma0`` evolved for ``horizon`` steps."""
        return cls.symmetric(gaussian_support_radius(sigma0) + int(horizon))

    @property
    def size(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def sites(self) -> NDArray[np.int64]:
        return np.arange(self.x_min, self.x_max + 1)

    def index(self, x: int) -> int:
        if not self.x_min <= x <= self.x_max:
            raise IndexError(f"site {x} outside window [{self.x_min}, {self.x_max}]")
        return x - self.x_min


def gaussian_support_radius(sigma0: float) -> int:
    # 8 sigma keeps the discarded tail mass below 1e-14
    return int(np.ceil(8.0 * sigma0)) + 1


@dataclass(frozen=True, eq=False)
class WalkerState:
    """Spinor amplitudes ``a(x)`` (spin up) and ``b(x)`` (spin down) over a window."""

    window: LatticeWindow
    amp_up: NDArray[np.complex128]
    amp_down: NDArray[np.complex128]

    def __post_init__(self):
        up = np.asarray(self.amp_up, dtype=np.complex128)
        down = np.asarray(self.amp_down, dtype=np.complex128)
        if up.shape != (self.window.size,) or down.shape != (self.window.size,):
            raise ValueError(
                f"amplitude arrays must have shape ({self.window.size},), "
                f"got {up.shape} and {down.shape}"
            )
        up.setflags(write=False)
        down.setflags(write=False)
        object.__setattr__(self, "amp_up", up)
        object.__setattr__(self, "amp_down", down)

    @classmethod
    def from_spinor(cls, window: LatticeWindow, spin, profile) -> "WalkerState":
        """Product state ``(spin[0]|up> + spin[1]|down>) (x) sum_x profile(x)|x>``."""
        profile = np.asarray(profile, dtype=np.complex128)
        return cls(window, spin[0] * profile, spin[1] * profile)

    @classmethod
    def localized(cls, window: LatticeWindow, spin, x0: int = 0) -> "WalkerState":
        profile = np.zeros(window.size, dtype=np.complex128)
        profile[window.index(x0)] = 1.0
        return cls.from_spinor(window, spin, profile)

    @property
    def spinor(self) -> NDArray[np.complex128]:
        """Amplitudes as a ``(2, L)`` array, row 0 spin up."""
        return np.stack([self.amp_up, self.amp_down])

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amp_up) ** 2 + np.abs(self.amp_down) ** 2))

    def normalized(self) -> "WalkerState":
        n = np.sqrt(self.norm_squared())
        return WalkerState(self.window, self.amp_up / n, self.amp_down / n)

    def inner(self, other: "WalkerState") -> complex:
        """``<self|other>``."""
        if self.window != other.window:
            raise ValueError("states live on different windows")
        return complex(np.vdot(self.amp_up, other.amp_up) + np.vdot(self.amp_down, other.amp_down))

    def to_vector(self) -> NDArray[np.complex128]:
        """Dense ket ordered spin-major: index ``s * L + (x - x_min)``."""
        return self.spinor.reshape(-1)


@dataclass(frozen=True)
class ObservableDirection:
    """Bloch direction ``(cos t sin p, sin t sin p, cos p)`` for azimuth t and polar p."""

    theta: float
    phi: float

    @property
    def vector(self) -> NDArray[np.float64]:
        st, ct = np.sin(self.theta), np.cos(self.theta)
        sp, cp = np.sin(self.phi), np.cos(self.phi)
        return np.array([ct * sp, st * sp, cp])

    @classmethod
    def from_vector(cls, v) -> "ObservableDirection":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector has no direction")
        v = v / n
        phi = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))
        theta = float(np.arctan2(v[1], v[0]) % (2 * np.pi))
        return cls(theta, phi)

    def canonical(self) -> "ObservableDirection":
        """Same direction with theta in [0, 2pi) and phi in [0, pi]."""
        return ObservableDirection.from_vector(self.vector)


def as_unit_vector(direction) -> NDArray[np.float64]:
    """Accept an ObservableDirection, a ``(theta, phi)`` pair or a 3-vector."""
    if isinstance(direction, ObservableDirection):
        return direction.vector
    v = np.asarray(direction, dtype=float)
    if v.shape == (2,):
        return ObservableDirection(v[0], v[1]).vector
    if v.shape != (3,):
        raise ValueError(f"cannot interpret {direction!r} as a direction")
    n = np.linalg.norm(v)
    if not np.isclose(n, 1.0, atol=1e-10):
        raise ValueError(f"direction vector has norm {n}, expected 1")
    return v / n


def pauli_observable(direction) -> NDArray[np.complex128]:
    """Return ``v . sigma`` for a Bloch direction."""
    v = as_unit_vector(direction)
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def ket_to_dm(psi) -> NDArray[np.complex128]:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(psi, psi.conj())


def validate_density_matrix(rho, dim: int | None = None, atol: float = 1e-10) -> NDArray[np.complex128]:
    """Check hermiticity, unit trace and positivity; return ``rho`` as a complex array.

    Raises
    ------
    ValueError
        If any density-matrix property fails at tolerance ``atol``
        (hermiticity is checked at ``min(atol, 1e-12)``).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {rho.shape[0]}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > min(atol, 1e-12) * max(1.0, np.max(np.abs(rho))):
        raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -atol:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3g})")
    return rho


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Two-qubit density matrix together with its Bloch data ``a``, ``b`` and ``T``."""

    rho: NDArray[np.complex128]
    bloch_a: NDArray[np.float64]
    bloch_b: NDArray[np.float64]
    corr_T: NDArray[np.float64] = field(repr=False)

    def reconstruct(self) -> NDArray[np.complex128]:
        return bloch_compose(self.bloch_a, self.bloch_b, self.corr_T)

    @property
    def correlation_singular_values(self) -> NDArray[np.float64]:
        return np.linalg.svd(self.corr_T, compute_uv=False)


def bloch_compose(a, b, T) -> NDArray[np.complex128]:
    """Build ``1/4 (1 + a.sigma x 1 + 1 x b.sigma + sum T_ij sigma_i x sigma_j)``."""
    rho = np.kron(IDENTITY2, IDENTITY2).astype(np.complex128)
    for i in range(3):
        rho = rho + a[i] * np.kron(PAULIS[i], IDENTITY2) + b[i] * np.kron(IDENTITY2, PAULIS[i])
        for j in range(3):
            rho = rho + T[i, j] * np.kron(PAULIS[i], PAULIS[j])
    return rho / 4


def bloch_decompose(rho) -> TwoQubitState:
    """Local Bloch vectors and correlation matrix of a two-qubit state."""
    rho = validate_density_matrix(rho, dim=4)
    a = np.array([np.trace(rho @ np.kron(s, IDENTITY2)).real for s in PAULIS])
    b = np.array([np.trace(rho @ np.kron(IDENTITY2, s)).real for s in PAULIS])
    T = np.array([[np.trace(rho @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS])
    return TwoQubitState(rho, a, b, T)


def _check_dims(total: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != total:
        raise ValueError(f"factor dimensions {dims} do not multiply to {total}")
    return dims


def partial_trace(rho_or_state, keep: Iterable[int], dims: Sequence[int]) -> NDArray[np.complex128]:
    """Reduced density matrix on the tensor factors listed in ``keep``.

    ``rho_or_state`` is either a ket (1-D) or a density matrix (2-D). Kept
    factors appear in the output in ascending factor order.
    """
    arr = np.asarray(rho_or_state, dtype=np.complex128)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or len(keep) == n:
        raise ValueError("keep must be a nonempty proper subset of the factors")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"factor indices {keep} out of range for {n} factors")
    traced = [i for i in range(n) if i not in keep]
    d_keep = int(np.prod([dims[i] for i in keep]))

    if arr.ndim == 1:
        dims = _check_dims(arr.size, dims)
        psi = arr.reshape(dims).transpose(keep + traced).reshape(d_keep, -1)
        return psi @ psi.conj().T

    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a ket or a square matrix, got shape {arr.shape}")
    dims = _check_dims(arr.shape[0], dims)
    t = arr.reshape(dims + dims)
    row = keep + traced
    col = [n + i for i in keep] + [n + i for i in traced]
    t = t.transpose(row + col)
    d_tr = arr.shape[0] // d_keep
    t = t.reshape(d_keep, d_tr, d_keep, d_tr)
    return np.einsum("ajbj->ab", t)


def _inner(psi, chi) -> complex:
    if hasattr(psi, "inner"):
        return complex(psi.inner(chi))
    return complex(np.vdot(np.asarray(psi).reshape(-1), np.asarray(chi).reshape(-1)))


def _norm2(psi) -> float:
    return _inner(psi, psi).real


def fidelity(psi, chi, norm_tol: float = 1e-8) -> float:
    """``|<chi|psi>|^2`` for normalized kets.

    Accepts dense vectors or any objects exposing ``inner`` (WalkerState,
    ProductSumState), so two-walker states never need to be densified.
    """
    for name, s in (("psi", psi), ("chi", chi)):
        dev = abs(_norm2(s) - 1.0)
        if dev > norm_tol:
            raise ValueError(f"{name} is not normalized (|norm^2 - 1| = {dev:.3g})")
    if not hasattr(psi, "inner") and np.size(psi) != np.size(chi):
        raise ValueError("states have different dimensions")
    return float(min(1.0, abs(_inner(chi, psi)) ** 2))
