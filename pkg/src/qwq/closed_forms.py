"""
Analytical results for the noisy two-spin state of the Gaussian model,

    rho_t^eps = (1 - eps) 1/4 + eps rho_S(t),

all as functions of the decay factor ``E_t = exp(-t^2 / 2 sigma0^2)``.
Entropies are in nats. Functions broadcast over array ``t`` unless noted.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

__all__ = [
    "decay_factor",
    "shannon_entropy",
    "purity_closed",
    "chsh_fixed_directions_closed",
    "chsh_crossing_time",
    "bell_closed",
    "steering_closed",
    "concurrence_closed",
    "gme_closed",
    "SuddenDeathTimes",
    "sudden_death_times",
    "discord_closed",
    "entropy_closed",
    "nu",
    "irreality_asymptotic",
    "eta_asymptotic",
    "rbn_closed",
    "rbn_asymptotic",
    "BELL_THRESHOLD",
    "STEERING_THRESHOLD",
    "ENTANGLEMENT_THRESHOLD",
]

LN2 = np.log(2.0)
_R2 = np.sqrt(2.0)
_R3 = np.sqrt(3.0)

BELL_THRESHOLD = 1 / _R2
STEERING_THRESHOLD = 1 / _R3
ENTANGLEMENT_THRESHOLD = 1 / 3


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _check_eps(eps):
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {eps}")


def decay_factor(sigma0: float, t):
    """``E_t = exp(-t^2 / (2 sigma0^2))``."""
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    return _scalar(np.exp(-np.asarray(t, dtype=float) ** 2 / (2.0 * sigma0**2)))


def shannon_entropy(u):
    """Binary entropy ``H(u) = -u ln u - (1-u) ln(1-u)``, ``H(0) = H(1) = 0``."""
    u = np.asarray(u, dtype=float)
    if np.any(u < -1e-12) or np.any(u > 1 + 1e-12):
        raise ValueError("shannon_entropy needs u in [0, 1]")
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(u > 0, u * np.log(u), 0.0) - np.where(u < 1, (1 - u) * np.log1p(-u), 0.0)
    return _scalar(h)


def purity_closed(eps: float, sigma0: float, t):
    """``Tr (rho_t^eps)^2 = [1 + eps^2 (1 + 2 E_t^2)] / 4``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar((1 + eps**2 * (1 + 2 * E**2)) / 4)


def chsh_fixed_directions_closed(sigma0: float, t):
    """CHSH value ``(1 + 3 E_t)/sqrt2`` of the noiseless state for the fixed directions."""
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar((1 + 3 * E) / _R2)


def chsh_crossing_time(sigma0: float) -> float:
    """Time at which ``(1 + 3 E_t)/sqrt2`` drops to the local bound 2."""
    return float(sigma0 * np.sqrt(2 * np.log(3 / (2 * _R2 - 1))))


def bell_closed(eps: float, sigma0: float, t):
    """``(1 + sqrt2) max{0, eps sqrt(1 + E_t^2) - 1}``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar((1 + _R2) * np.maximum(0.0, eps * np.sqrt(1 + E**2) - 1))


def steering_closed(eps: float, sigma0: float, t):
    """``(1 + sqrt3)/2 max{0, eps sqrt(1 + 2 E_t^2) - 1}``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar((1 + _R3) / 2 * np.maximum(0.0, eps * np.sqrt(1 + 2 * E**2) - 1))


def concurrence_closed(eps: float, sigma0: float, t):
    """``max{0, eps (1 + 2 E_t) - 1} / 2``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar(0.5 * np.maximum(0.0, eps * (1 + 2 * E) - 1))


def gme_closed(sigma0: float, t):
    """GME concurrence ``sqrt(1 - E_t)`` of the noiseless two-walker state."""
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar(np.sqrt(1 - E))


class SuddenDeathTimes(NamedTuple):
    bell: Optional[float]
    steering: Optional[float]
    entanglement: Optional[float]


def sudden_death_times(eps: float, sigma0: float) -> SuddenDeathTimes:
    """Finite death times of Bell nonlocality, steering and entanglement.

    A component is ``None`` when it never dies at finite time: for
    ``eps = 1`` (asymptotic decay only) or when ``eps`` is at or below the
    component's threshold (1/sqrt2, 1/sqrt3, 1/3), where it never appears.
    """
    _check_eps(eps)
    if eps >= 1.0:
        return SuddenDeathTimes(None, None, None)
    t_b = sigma0 * np.sqrt(np.log(eps**2 / (1 - eps**2))) if eps > BELL_THRESHOLD else None
    t_s = sigma0 * np.sqrt(np.log(2 * eps**2 / (1 - eps**2))) if eps > STEERING_THRESHOLD else None
    t_e = sigma0 * np.sqrt(2 * np.log(2 * eps / (1 - eps))) if eps > ENTANGLEMENT_THRESHOLD else None
    return SuddenDeathTimes(*(None if v is None else float(v) for v in (t_b, t_s, t_e)))


def _half_shift(eps, E):
    return 0.5 + eps * E / (1 + eps)


def discord_closed(eps: float, sigma0: float, t):
    """``(1+eps)/2 [ln2 - H(1/2 + eps E_t/(1+eps))]``; equal for either side and symmetric discord."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar((1 + eps) / 2 * (LN2 - np.asarray(shannon_entropy(_half_shift(eps, E)))))


def entropy_closed(eps: float, sigma0: float, t):
    """Von Neumann entropy of ``rho_t^eps``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar(
        (1 - eps) / 2 * LN2
        + (1 + eps) / 2 * np.asarray(shannon_entropy(_half_shift(eps, E)))
        + shannon_entropy((1 + eps) / 2)
    )


def nu(theta, phi):
    """``(cos phi + cos theta sin phi)/sqrt2``: projection on the coin axis (x + z)/sqrt2."""
    return _scalar((np.cos(phi) + np.cos(theta) * np.sin(phi)) / _R2)


def irreality_asymptotic(theta, phi):
    """Long-time irreality ``H((1 + nu)/2)`` of ``v.sigma`` on spin 1, noiseless case."""
    return shannon_entropy((1 + np.asarray(nu(theta, phi))) / 2)


def eta_asymptotic(theta1, phi1, theta2, phi2):
    """Long-time contextual realism-based nonlocality, noiseless case."""
    n1 = np.asarray(nu(theta1, phi1))
    n2 = np.asarray(nu(theta2, phi2))
    return _scalar(
        np.asarray(shannon_entropy((1 + n1) / 2))
        + np.asarray(shannon_entropy((1 + n2) / 2))
        - np.asarray(shannon_entropy((1 + n1 * n2) / 2))
    )


def rbn_closed(eps: float, sigma0: float, t):
    """``N = D + H((1 + eps E_t)/2) - H((1 + eps)/2)``."""
    _check_eps(eps)
    E = np.asarray(decay_factor(sigma0, t))
    return _scalar(
        np.asarray(discord_closed(eps, sigma0, t))
        + np.asarray(shannon_entropy((1 + eps * E) / 2))
        - shannon_entropy((1 + eps) / 2)
    )


def rbn_asymptotic(eps: float) -> float:
    """``ln2 - H((1 + eps)/2)``."""
    _check_eps(eps)
    return float(LN2 - shannon_entropy((1 + eps) / 2))
