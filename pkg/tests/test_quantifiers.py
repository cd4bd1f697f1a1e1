import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwq import closed_forms as cf
from qwq import model
from qwq import quantifiers as q
from qwq.core import BELL, ObservableDirection, ket_to_dm, partial_trace

from conftest import random_density, random_unit, werner

LN2 = np.log(2)
R2 = np.sqrt(2)
SINGLET = ket_to_dm(BELL[3])
UPDOWN = np.diag([0, 1.0, 0, 0]).astype(complex)
X, Y, Z = np.eye(3)
CHSH_DIRS = (X, Y, -(X + Y) / R2, (-X + Y) / R2)
GRID = [(e, tau) for e in (0.0, 0.5, 0.8, 1.0) for tau in (0.0, 0.5, 1.0, 2.0, 5.0)]


def matrix_discord(rho, direction, side="B"):
    return q.mutual_information(rho) - q.mutual_information(q.measure_map(rho, side, direction))


def matrix_eta(rho, a, b):
    return q.contextual_rbn(rho, q.MeasurementContext(ObservableDirection.from_vector(a), ObservableDirection.from_vector(b)))


# ------------------------------------------------------------- entropies


def test_linear_entropy():
    assert q.linear_entropy(SINGLET) == pytest.approx(0, abs=1e-15)
    assert q.linear_entropy(np.eye(2) / 2) == pytest.approx(0.5)
    for t in (0, 3, 8):
        E = np.exp(-(t**2) / 50)
        assert q.linear_entropy(model.spin_density_closed(5, t)) == pytest.approx((1 - E**2) / 2)


def test_von_neumann_entropy():
    assert q.von_neumann_entropy(SINGLET) == pytest.approx(0, abs=1e-12)
    assert q.von_neumann_entropy(np.eye(4) / 4) == pytest.approx(np.log(4))


def test_mutual_information_singlet():
    assert q.mutual_information(SINGLET) == pytest.approx(2 * LN2)


# ------------------------------------------------- entanglement and Bell


def test_concurrence_examples():
    assert q.concurrence(SINGLET) == pytest.approx(1.0)
    assert q.concurrence(UPDOWN) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        q.concurrence(np.eye(2) / 2)


def test_gme_concurrence():
    assert q.gme_concurrence(model.singlet_gaussian_state(5, 0)) == pytest.approx(0, abs=1e-7)
    assert q.gme_concurrence(model.updown_gaussian_state(5, 0)) == pytest.approx(0, abs=1e-7)
    assert q.gme_concurrence(model.two_walker_model_state(5, 5)) == pytest.approx(np.sqrt(1 - np.exp(-0.5)), abs=1e-9)


def test_complementarity_model_states():
    for t in (0, 2, 5, 10, 20):
        st_ = model.two_walker_model_state(5, t)
        rho_s = model.spin_density_closed(5, t)
        assert abs(q.gme_concurrence(st_) ** 2 + q.concurrence(rho_s) - 1) < 1e-6


def test_chsh_fixed_directions():
    assert q.chsh_value(SINGLET, *CHSH_DIRS) == pytest.approx(2 * R2)
    for t in (0, 3, 5, 8):
        assert q.chsh_value(werner(1, 5, t), *CHSH_DIRS) == pytest.approx(cf.chsh_fixed_directions_closed(5, t), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_tsirelson_and_local_bound(seed):
    rng = np.random.default_rng(seed)
    dirs = [random_unit(rng) for _ in range(4)]
    assert q.chsh_value(random_density(rng, rank=int(rng.integers(1, 5))), *dirs) <= 2 * R2 + 1e-9
    a, b = random_density(rng, 2), random_density(rng, 2)
    assert q.chsh_value(np.kron(a, b), *dirs) <= 2 + 1e-9


def test_bell_and_steering_singlet():
    assert q.bell_nonlocality(SINGLET) == pytest.approx(1.0)
    assert q.epr_steering(SINGLET) == pytest.approx(1.0)
    for t in (0, 4, 10):
        assert q.bell_nonlocality(werner(1 / R2, 5, t)) == 0
        assert q.epr_steering(werner(0.57, 5, t)) == 0


def test_correlation_singular_values():
    from qwq.core import bloch_decompose

    for eps, t in ((1, 0), (0.8, 5), (0.4, 2)):
        E = np.exp(-(t**2) / 50)
        s = bloch_decompose(werner(eps, 5, t))
        assert np.allclose(s.bloch_a, 0) and np.allclose(s.bloch_b, 0)
        assert np.allclose(sorted(s.correlation_singular_values), sorted([eps, eps * E, eps * E]))


# ---------------------------------------------------------- measurement


def test_measure_map_examples():
    plus = ket_to_dm(np.array([1, 1]) / R2)
    out = q.measure_map(plus, "A", Z, dims=(2, 1))
    assert np.allclose(out, np.eye(2) / 2)
    both = q.measure_map(SINGLET, "AB", (Z, Z))
    assert np.allclose(both, 0.5 * (np.diag([0, 1, 0, 0]) + np.diag([0, 0, 1, 0])))
    with pytest.raises(ValueError):
        q.measure_map(SINGLET, "C", Z)
    with pytest.raises(ValueError):
        q.measure_map(np.eye(3) / 3, "A", Z)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_measure_map_idempotent_and_commuting(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    a, b = random_unit(rng), random_unit(rng)
    pa = q.measure_map(rho, "A", a)
    pb = q.measure_map(rho, "B", b)
    assert np.abs(q.measure_map(pa, "A", a) - pa).max() < 1e-12
    assert np.abs(q.measure_map(pa, "B", b) - q.measure_map(pb, "A", a)).max() < 1e-12
    assert abs(np.trace(pa) - 1) < 1e-12 and np.linalg.eigvalsh(pa).min() > -1e-12


# -------------------------------------------------------------- discord


def test_discord_examples():
    assert q.quantum_discord(SINGLET) == pytest.approx(LN2, abs=1e-9)
    assert q.quantum_discord(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)
    assert q.symmetric_discord(SINGLET) == pytest.approx(LN2, abs=1e-9)
    assert q.symmetric_discord(UPDOWN) == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("eps, tau", [(0.5, 0.5), (0.8, 1.0), (1.0, 0.5), (1.0, 2.0)])
def test_discord_closed_form_and_symmetry(eps, tau):
    rho = werner(eps, 5, 5 * tau)
    expected = cf.discord_closed(eps, 5, 5 * tau)
    assert abs(q.quantum_discord(rho, "A") - expected) < 1e-6
    assert abs(q.quantum_discord(rho, "B") - expected) < 1e-6
    assert abs(q.symmetric_discord(rho) - expected) < 1e-6


def test_discord_fast_route_matches_matrix_route(rng):
    for _ in range(5):
        rho = random_density(rng)
        for side in ("A", "B"):
            res = q.optimize_discord(rho, side)
            direct = matrix_discord(rho, res.directions[0], side)
            assert abs(res.value - max(0.0, direct)) < 1e-10
            # no coarse-grid direction beats the optimizer
            for th in np.linspace(0, 2 * np.pi, 13):
                for ph in np.linspace(0, np.pi, 7):
                    assert matrix_discord(rho, (th, ph), side) >= res.value - 1e-9


def test_discord_optimal_direction():
    h = (X + Z) / R2
    for tau in (0.1, 0.5, 1.0, 2.0):
        res = q.optimize_discord(werner(1.0, 5, 5 * tau))
        v = res.directions[0].vector
        assert np.degrees(np.arccos(min(1.0, abs(v @ h)))) < 1.0


def test_optimization_config_validation():
    with pytest.raises(ValueError):
        q.OptimizationConfig(n_theta=8)
    with pytest.raises(ValueError):
        q.OptimizationConfig(refine_iterations=0)


def test_non_convergence_is_reported():
    res = q.OptimizationResult(0.1, (), converged=False, iterations=40)
    with pytest.warns(q.OptimizationWarning, match="best value 0.1"):
        assert q._report("quantum_discord", res) is res


def test_coarse_config_still_converges(rng):
    cfg = q.OptimizationConfig(n_theta=16, n_phi=8, refine_iterations=5)
    rho = werner(0.8, 5, 5.0)
    assert abs(q.quantum_discord(rho, "B", cfg) - cf.discord_closed(0.8, 5, 5.0)) < 1e-8


# ------------------------------------------------------- irreality & realism


def test_irreality_examples(rng):
    for _ in range(5):
        rho = random_density(rng)
        a = random_unit(rng)
        assert abs(q.irreality(q.measure_map(rho, "A", a), a)) < 1e-12
    for d in (X, Y, Z, random_unit(rng)):
        assert q.irreality(SINGLET, d) == pytest.approx(LN2)
    rho_inf = werner(1, 5, np.inf)
    assert q.irreality(rho_inf, Z) == pytest.approx(cf.irreality_asymptotic(0, 0), abs=1e-12)
    assert q.irreality(rho_inf, Z) == pytest.approx(0.4165, abs=5e-5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_irreality_decomposition(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    a = random_unit(rng)
    rho_a = partial_trace(rho, [0], (2, 2))
    lhs = q.irreality(rho, a)
    rhs = q.irreality(rho_a, a, "A", dims=(2, 1)) + matrix_discord(rho, a, "A")
    assert abs(lhs - rhs) < 1e-9


def test_irreality_bounded_below_by_discord(rng):
    for eps, tau in GRID[::3]:
        rho = werner(eps, 5, 5 * tau)
        d = cf.discord_closed(eps, 5, 5 * tau)
        for _ in range(10):
            assert q.irreality(rho, random_unit(rng)) >= d - 1e-6


def test_irreality_asymptotic_matches_numeric(rng):
    rho_inf = werner(1, 5, np.inf)
    for _ in range(10):
        d = ObservableDirection(rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi))
        assert q.irreality(rho_inf, d) == pytest.approx(cf.irreality_asymptotic(d.theta, d.phi), abs=1e-10)


def test_scaled_irreality():
    rho0, rho_inf = werner(1, 5, 0), werner(1, 5, np.inf)
    assert q.scaled_irreality(rho0, rho0, rho_inf, Z) == pytest.approx(1.0)
    assert q.scaled_irreality(rho_inf, rho0, rho_inf, Z) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        q.scaled_irreality(werner(1, 5, 3), rho0, rho_inf, Y)


def test_contextual_rbn_examples(rng):
    for t in (0, 3, 9):
        for a, b in ((Y, Y), (Z, X)):
            assert matrix_eta(werner(0, 5, t), a, b) == pytest.approx(0, abs=1e-12)
    assert matrix_eta(SINGLET, Y, Y) == pytest.approx(LN2)
    rho_inf = werner(1, 5, np.inf)
    for _ in range(5):
        d1 = ObservableDirection(rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi))
        d2 = ObservableDirection(rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi))
        expected = cf.eta_asymptotic(d1.theta, d1.phi, d2.theta, d2.phi)
        assert q.contextual_rbn(rho_inf, q.MeasurementContext(d1, d2)) == pytest.approx(expected, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_eta_vanishes_on_measured_states(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    a, b = random_unit(rng), random_unit(rng)
    assert abs(matrix_eta(q.measure_map(rho, "A", a), a, b)) < 1e-10
    assert abs(matrix_eta(q.measure_map(rho, "B", b), a, b)) < 1e-10


@pytest.mark.parametrize("eps, tau", [(0.0, 1.0), (0.5, 1.0), (1.0, 0.0), (1.0, 2.0), (0.8, 0.5)])
def test_rbn_closed_form(eps, tau):
    rho = werner(eps, 5, 5 * tau)
    res = q.optimize_rbn(rho)
    assert abs(res.value - cf.rbn_closed(eps, 5, 5 * tau)) < 1e-6
    assert res.value >= q.quantum_discord(rho) - 1e-6
    if eps > 0 and tau > 0:
        a, b = (d.vector for d in res.directions)
        h = (X + Z) / R2
        # parallel directions on the circle orthogonal to the coin axis
        assert abs(abs(a @ b) - 1) < 1e-3
        assert abs(a @ h) < 1e-3


def test_rbn_fast_route_matches_matrix_route(rng):
    rho = random_density(rng)
    res = q.optimize_rbn(rho)
    a, b = (d.vector for d in res.directions)
    assert abs(res.value - matrix_eta(rho, a, b)) < 1e-10


def test_rbn_asymptote():
    assert q.rbn(werner(1, 5, np.inf)) == pytest.approx(LN2, abs=1e-6)
    assert q.rbn(werner(0.6, 5, np.inf)) == pytest.approx(cf.rbn_asymptotic(0.6), abs=1e-6)


def test_hierarchy_chain():
    for eps in (0.0, 0.3, 0.45, 0.65, 0.75, 1.0):
        for tau in (0.0, 1.0, 2.5):
            rho = werner(eps, 5, 5 * tau)
            chain = [
                q.bell_nonlocality(rho) > 0,
                q.epr_steering(rho) > 0,
                q.concurrence(rho) > 0,
                q.quantum_discord(rho) > 1e-9,
                q.rbn(rho) > 1e-9,
            ]
            for stronger, weaker in zip(chain, chain[1:]):
                assert weaker or not stronger
