"""
Gaussian two-lobe model of the Hadamard walk.

A walker starting as ``(cos(a/2)|up> + sin(a/2)|down>) (x) f`` with a broad
Gaussian ``f`` is approximated after ``t`` steps by two rigid Gaussian lobes
moving at speed ``1/sqrt2``:

    a_t(x) = q_a^+ g_t^+(x) + q_a^- g_t^-(x)
    b_t(x) = q_b^+ g_t^+(x) + q_b^- g_t^-(x)

The lobe widths stay at ``sigma0``; no spreading is modelled.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .closed_forms import decay_factor
from .core import BELL, BETA23, LatticeWindow, WalkerState, gaussian_support_radius
from .engine import ProductSumState

__all__ = [
    "GaussianWalkParams",
    "ModelValidityWarning",
    "ANSATZ_COEFFICIENTS",
    "theta_normalization",
    "gaussian_profile",
    "gaussian_walker",
    "singlet_gaussian_state",
    "updown_gaussian_state",
    "ansatz_weights",
    "model_amplitudes",
    "model_state",
    "two_walker_model_state",
    "st_spin_vector",
    "spin_density_closed",
    "werner_spin_state",
    "esx_closed",
]

log = logging.getLogger(__name__)

_R2 = np.sqrt(2.0)

# (c^+, c^-, s^+, s^-) for the up (a) and down (b) amplitudes
ANSATZ_COEFFICIENTS = {
    "a": (2 + _R2, 2 - _R2, _R2, -_R2),
    "b": (_R2, -_R2, 2 - _R2, 2 + _R2),
}

MODEL_VALID_SIGMA0 = 3.0
MODEL_BREAKDOWN_SIGMA0 = 1.0


class ModelValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GaussianWalkParams:
    sigma0: float
    alpha: float = 0.0
    t: int = 0

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if not 0.0 <= self.alpha <= np.pi:
            raise ValueError("alpha must lie in [0, pi]")
        if int(self.t) != self.t or self.t < 0:
            raise ValueError("t must be a nonnegative integer")
        if self.sigma0 < MODEL_BREAKDOWN_SIGMA0:
            warnings.warn(
                f"sigma0={self.sigma0} < 1: the Gaussian model does not apply",
                ModelValidityWarning,
                stacklevel=3,
            )

    @property
    def model_valid(self) -> bool:
        return self.sigma0 >= MODEL_VALID_SIGMA0

    def window(self) -> LatticeWindow:
        return LatticeWindow.for_gaussian(self.sigma0, self.t)


def theta_normalization(sigma0: float) -> float:
    """Exact ``K = sum_x exp(-x^2 / 2 sigma0^2)`` over all integers."""
    n = int(np.ceil(12 * sigma0)) + 2
    x = np.arange(-n, n + 1)
    return float(np.sum(np.exp(-(x**2) / (2.0 * sigma0**2))))


def gaussian_profile(sigma0: float, x) -> NDArray[np.float64]:
    """``f(x) = K^{-1/2} exp(-x^2 / 4 sigma0^2)`` with the exact lattice ``K``."""
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2) / (4.0 * sigma0**2)) / np.sqrt(theta_normalization(sigma0))


def gaussian_walker(sigma0: float, spin, window: LatticeWindow) -> WalkerState:
    """Spinor ``spin`` times a Gaussian profile cut at ``|x| <= 8 sigma0``.

    The cut keeps exact zeros at the window edges so the walk can be evolved
    over the window's headroom; the profile is renormalized after the cut.
    """
    x = window.sites
    f = gaussian_profile(sigma0, x)
    f[np.abs(x) > gaussian_support_radius(sigma0)] = 0.0
    f /= np.linalg.norm(f)
    return WalkerState.from_spinor(window, np.asarray(spin, dtype=complex), f)


def _up_down(sigma0: float, window: LatticeWindow):
    return gaussian_walker(sigma0, (1, 0), window), gaussian_walker(sigma0, (0, 1), window)


def singlet_gaussian_state(sigma0: float, horizon: int) -> ProductSumState:
    """Spin singlet times independent Gaussians, windowed for ``horizon`` steps."""
    w = LatticeWindow.for_gaussian(sigma0, horizon)
    up, down = _up_down(sigma0, w)
    s = 1 / _R2
    return ProductSumState((s, -s), (up, down), (down, up))


def updown_gaussian_state(sigma0: float, horizon: int) -> ProductSumState:
    """Uncorrelated ``|up>|down>`` spins times independent Gaussians."""
    w = LatticeWindow.for_gaussian(sigma0, horizon)
    up, down = _up_down(sigma0, w)
    return ProductSumState((1.0,), (up,), (down,))


def ansatz_weights(alpha: float):
    """Lobe weights ``((q_a^+, q_a^-), (q_b^+, q_b^-))`` for spin angle ``alpha``."""
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    out = []
    for u in ("a", "b"):
        cp, cm, sp, sm = ANSATZ_COEFFICIENTS[u]
        out.append(((cp * c + sp * s) / 4, (cm * c + sm * s) / 4))
    return tuple(out)


def _lobes(sigma0: float, t: int, x):
    x = np.asarray(x, dtype=float)
    pref = (2 * np.pi * sigma0**2) ** -0.25
    shift = t / _R2
    g_plus = pref * np.exp(-((x - shift) ** 2) / (4 * sigma0**2))
    g_minus = (-1.0) ** t * pref * np.exp(-((x + shift) ** 2) / (4 * sigma0**2))
    return g_plus, g_minus


def model_amplitudes(params: GaussianWalkParams, x):
    """Raw (unnormalized) model amplitudes ``(a_t(x), b_t(x))``."""
    (qap, qam), (qbp, qbm) = ansatz_weights(params.alpha)
    gp, gm = _lobes(params.sigma0, int(params.t), x)
    return qap * gp + qam * gm, qbp * gp + qbm * gm


def model_state(params: GaussianWalkParams, window: LatticeWindow | None = None, renormalize: bool = True) -> WalkerState:
    """Model walker state on ``window`` (default: the window for ``params``)."""
    window = window or params.window()
    a, b = model_amplitudes(params, window.sites)
    state = WalkerState(window, a, b)
    norm2 = state.norm_squared()
    log.debug("raw model norm deviation %.3e (sigma0=%g, t=%d)", norm2 - 1, params.sigma0, params.t)
    return state.normalized() if renormalize else state


def two_walker_model_state(sigma0: float, t: int, window: LatticeWindow | None = None, renormalize: bool = True) -> ProductSumState:
    """``(|psi_t^up>|psi_t^down> - |psi_t^down>|psi_t^up>)/sqrt2`` from the model."""
    window = window or LatticeWindow.for_gaussian(sigma0, t)
    up = model_state(GaussianWalkParams(sigma0, 0.0, t), window, renormalize)
    down = model_state(GaussianWalkParams(sigma0, np.pi, t), window, renormalize)
    s = 1 / _R2
    state = ProductSumState((s, -s), (up, down), (down, up))
    return state.normalized() if renormalize else state


def st_spin_vector(sigma0: float, t, x_r) -> NDArray[np.complex128]:
    """Unnormalized two-spin ket ``sinh(k)|beta23> + cosh(k)|B4>``, ``k = t x_r / (2 sqrt2 sigma0^2)``."""
    k = t * x_r / (2 * _R2 * sigma0**2)
    return np.sinh(k) * BETA23 + np.cosh(k) * BELL[3]


def spin_density_closed(sigma0: float, t) -> NDArray[np.complex128]:
    """``(1-E_t)/2 |beta23><beta23| + (1+E_t)/2 |B4><B4|``."""
    E = float(decay_factor(sigma0, t))
    return (1 - E) / 2 * np.outer(BETA23, BETA23.conj()) + (1 + E) / 2 * np.outer(BELL[3], BELL[3].conj())


def werner_spin_state(epsilon: float, rho_s) -> NDArray[np.complex128]:
    """Noisy two-spin state ``(1-eps) 1/4 + eps rho_s``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    return (1 - epsilon) * np.eye(4) / 4 + epsilon * np.asarray(rho_s)


def esx_closed(alpha: float, sigma0: float, t) -> float:
    """Spin-position linear entropy of one walker, ``(1 - sin 2a)/4 (1 - E_t)``."""
    return (1 - np.sin(2 * alpha)) / 4 * (1 - decay_factor(sigma0, t))
