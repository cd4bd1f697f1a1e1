import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwq import engine, model
from qwq.core import BELL, BETA23, LatticeWindow, WalkerState, fidelity
from qwq.engine import (
    CANONICAL_BIPARTITIONS,
    CoinOperator,
    DimensionCapError,
    ProductSumState,
    WindowOverflowError,
)

R2 = np.sqrt(2)


def localized(spin, half=5):
    return WalkerState.localized(LatticeWindow.symmetric(half), spin, 0)


def amp(state, x):
    i = state.window.index(x)
    return state.amp_up[i], state.amp_down[i]


def test_coin_must_be_unitary():
    with pytest.raises(ValueError):
        CoinOperator(np.array([[1, 1], [0, 1]]))
    assert np.allclose(CoinOperator().matrix, engine.HADAMARD)


def test_single_step_from_up_and_down():
    s = engine.step(localized((1, 0)))
    assert np.allclose(amp(s, 1), (1 / R2, 0))
    assert np.allclose(amp(s, -1), (0, 1 / R2))
    s = engine.step(localized((0, 1)))
    assert np.allclose(amp(s, 1), (1 / R2, 0))
    assert np.allclose(amp(s, -1), (0, -1 / R2))


def test_two_steps_by_hand():
    s = engine.evolve(localized((1, 0)), 2)
    assert np.allclose(amp(s, 2), (0.5, 0))
    assert np.allclose(amp(s, 0), (0.5, 0.5))
    assert np.allclose(amp(s, -2), (0, -0.5))
    assert np.isclose(s.norm_squared(), 1.0)


def test_zero_steps_is_identity():
    s = localized((0.6, 0.8))
    assert engine.evolve(s, 0) is s


def test_window_overflow_raises():
    with pytest.raises(WindowOverflowError):
        engine.evolve(localized((1, 0), half=3), 4)


def test_position_distribution_after_one_step():
    p = engine.position_distribution(engine.step(localized((1, 0))))
    w = LatticeWindow.symmetric(5)
    assert np.isclose(p[w.index(1)], 0.5) and np.isclose(p[w.index(-1)], 0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, np.pi), st.integers(0, 30))
def test_unitarity_and_support(alpha, t):
    w = LatticeWindow.for_gaussian(1.5, 30)
    s0 = model.gaussian_walker(1.5, (np.cos(alpha / 2), np.sin(alpha / 2)), w)
    s = engine.evolve(s0, t)
    assert abs(s.norm_squared() - 1) < 1e-12
    r = model.gaussian_support_radius(1.5)
    outside = np.abs(w.sites) > r + t
    assert np.all(s.amp_up[outside] == 0) and np.all(s.amp_down[outside] == 0)


def test_two_lobes_for_broad_gaussian():
    a = 3 * np.pi / 4
    w = LatticeWindow.for_gaussian(5, 100)
    s = engine.evolve(model.gaussian_walker(5, (np.cos(a / 2), np.sin(a / 2)), w), 100)
    p = engine.position_distribution(s)
    x = w.sites
    right, left = p[x > 0], p[x < 0]
    assert abs(right.sum() - 0.5) < 0.02 and abs(left.sum() - 0.5) < 0.02
    assert abs(x[x > 0][np.argmax(right)] - 100 / R2) <= 3
    assert abs(x[x < 0][np.argmax(left)] + 100 / R2) <= 3


def test_local_start_is_oscillatory():
    a = 3 * np.pi / 4
    w = LatticeWindow.for_gaussian(0.2, 100)
    s = engine.evolve(model.gaussian_walker(0.2, (np.cos(a / 2), np.sin(a / 2)), w), 100)
    p = engine.position_distribution(s)
    x = w.sites
    # nearly a single-site start, so odd sites stay almost empty at even t
    assert p[np.abs(x) % 2 == 1].sum() < 1e-4
    peak = x[np.argmax(p)]
    assert 60 <= abs(peak) <= 75


# ------------------------------------------------------------------ two walkers


@pytest.fixture(scope="module")
def singlet_s2():
    return model.singlet_gaussian_state(2.0, 20)


def test_product_sum_validation():
    w = localized((1, 0))
    with pytest.raises(ValueError):
        ProductSumState((1, 1), (w,), (w,))
    with pytest.raises(ValueError):
        ProductSumState((1,) * 5, (w,) * 5, (w,) * 5)
    other = localized((1, 0), half=6)
    with pytest.raises(ValueError):
        ProductSumState((1, 1), (w, other), (w, w))


def test_initial_singlet_is_normalized_and_antisymmetric(singlet_s2):
    assert abs(singlet_s2.norm_squared() - 1) < 1e-12
    psi = singlet_s2.amplitudes()
    swapped = psi.transpose(1, 0, 3, 2)
    assert np.allclose(swapped, -psi, atol=1e-15)


@pytest.mark.parametrize("t", [0, 1, 5, 12, 20])
def test_lowrank_matches_dense(singlet_s2, t):
    dense = engine.evolve_dense_two(singlet_s2, t)
    low = engine.evolve_two(singlet_s2, t).amplitudes()
    assert np.max(np.abs(dense - low)) < 1e-12


def test_lowrank_matches_dense_updown():
    init = model.updown_gaussian_state(2.0, 10)
    assert np.max(np.abs(engine.evolve_dense_two(init, 10) - engine.evolve_two(init, 10).amplitudes())) < 1e-12


def test_two_walker_norm_preserved(singlet_s2):
    for t in (3, 11, 20):
        assert abs(engine.evolve_two(singlet_s2, t).norm_squared() - 1) < 1e-12


def test_joint_distribution_anticorrelated():
    st_ = engine.evolve_two(model.singlet_gaussian_state(5, 20), 20)
    P = engine.joint_distribution(st_)
    x = st_.window_left.sites
    i, j = np.unravel_index(np.argmax(P), P.shape)
    assert x[i] * x[j] < 0
    assert abs(abs(x[i]) - 20 / R2) <= 3 and abs(abs(x[j]) - 20 / R2) <= 3
    assert np.isclose(P.sum(), 1.0)


def test_joint_distribution_updown_has_no_ridge():
    st_ = engine.evolve_two(model.updown_gaussian_state(5, 20), 20)
    P = engine.joint_distribution(st_)
    x = st_.window_left.sites
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    quadrants = [P[(s1 * X1 > 0) & (s2 * X2 > 0)].sum() for s1 in (1, -1) for s2 in (1, -1)]
    assert min(quadrants) > 0.01
    singlet = engine.joint_distribution(engine.evolve_two(model.singlet_gaussian_state(5, 20), 20))
    assert singlet[X1 * X2 < 0].sum() > P[X1 * X2 < 0].sum() + 0.1


def test_conditional_distributions(exact_trajectory_s5):
    st0 = exact_trajectory_s5[0]
    up = engine.conditional_spin_distribution(st0, 1, "up")
    down = engine.conditional_spin_distribution(st0, 1, "down")
    assert np.allclose(up, down, atol=1e-15)
    st_ = engine.evolve_two(model.singlet_gaussian_state(5, 25), 25)
    x = st_.window_left.sites
    up = engine.conditional_spin_distribution(st_, 1, "up")
    down = engine.conditional_spin_distribution(st_, 1, "down")
    total = np.sum(np.abs(st_.amplitudes()) ** 2, axis=(0, 1, 3))
    assert np.allclose(up + down, total, atol=1e-12)
    assert up[x > 0].sum() > 0.8 * up.sum() and down[x < 0].sum() > 0.8 * down.sum()
    with pytest.raises(ValueError):
        engine.conditional_spin_distribution(st_, 3, "up")


# ---------------------------------------------------------- reduced states


def test_parse_part():
    assert engine.canonical_part("S2X1X2") == frozenset({"S1"})
    assert engine.canonical_part(("X1", "S1")) == frozenset({"S1", "X1"})
    for bad in ("", "S1S2X1X2", "S3", "S1S1"):
        with pytest.raises(ValueError):
            engine.canonical_part(bad)


def test_purity_matches_dense_partial_trace(singlet_s2):
    st_ = engine.evolve_two(singlet_s2, 7)
    psi = st_.amplitudes()
    for part in CANONICAL_BIPARTITIONS:
        rho = engine.dense_reduced_state(psi, part)
        assert abs(engine.purity_of_part(st_, part) - np.sum(np.abs(rho) ** 2)) < 1e-12


def test_reduced_state_matches_dense(singlet_s2):
    st_ = engine.evolve_two(singlet_s2, 6)
    psi = st_.amplitudes()
    for part in ("S1", "S2", "S1S2", "S1X1", "X2", "S2X1", "S1X2"):
        assert np.allclose(engine.reduced_state(st_, part), engine.dense_reduced_state(psi, part), atol=1e-13)


def test_complementary_purities_equal(singlet_s2):
    st_ = engine.evolve_two(singlet_s2, 9)
    comps = {"S1": "S2X1X2", "X1": "S1S2X2", "S1S2": "X1X2", "S1X1": "S2X2"}
    for a, b in comps.items():
        assert abs(engine.purity_of_part(st_, a) - engine.purity_of_part(st_, b)) < 1e-12


def test_reduced_state_dimension_cap():
    st_ = model.singlet_gaussian_state(5, 100)
    with pytest.raises(DimensionCapError):
        engine.reduced_state(st_, "X1X2")


def test_single_spin_is_maximally_mixed(exact_trajectory_s5):
    for t in (0, 3, 10):
        assert np.allclose(engine.reduced_state(exact_trajectory_s5[t], "S1"), np.eye(2) / 2, atol=1e-12)


def test_initial_position_factor_pure(exact_trajectory_s5):
    st0 = exact_trajectory_s5[0]
    assert abs(engine.purity_of_part(st0, "X1") - 1) < 1e-12
    rho = engine.reduced_state(st0, "X1")
    f = st0.left[0].amp_up
    assert np.allclose(rho, np.outer(f, f.conj()), atol=1e-14)


def test_spin_purity_closed_form_model():
    for t in (0, 3, 5, 10):
        st_ = model.two_walker_model_state(5, t)
        E = np.exp(-(t**2) / 50)
        assert abs(engine.purity_of_part(st_, "S1S2") - (1 + E**2) / 2) < 1e-10
        assert abs(engine.purity_of_part(st_, "S1X1") - 0.5) < 1e-10


def test_spin_state_close_to_closed_form_even_steps(exact_trajectory_s5):
    for t in range(0, 11, 2):
        d = engine.spin_state(exact_trajectory_s5[t]) - model.spin_density_closed(5, t)
        assert np.abs(d).max() < 1e-2


@pytest.mark.xfail(strict=True, reason="odd steps of the exact walk deviate by ~0.02 from the two-spin closed form")
def test_spin_state_close_to_closed_form_all_steps(exact_trajectory_s5):
    for t in range(11):
        d = engine.spin_state(exact_trajectory_s5[t]) - model.spin_density_closed(5, t)
        assert np.abs(d).max() < 1e-2


# ----------------------------------------------------- centre of mass


def test_cm_factorization_model_and_initial(exact_trajectory_s5):
    assert abs(engine.cm_relative_factorization_check(exact_trajectory_s5[0]) - 1) < 1e-12
    for t in (0, 10, 40):
        assert abs(engine.cm_relative_factorization_check(model.two_walker_model_state(5, t)) - 1) < 1e-12


def test_cm_factorization_exact_t50():
    st_ = engine.evolve_two(model.singlet_gaussian_state(5, 50), 50)
    assert engine.cm_relative_factorization_check(st_) >= 0.99
    # without parity resolution the two sectors look like a mixture
    assert abs(engine.cm_purity_unresolved(st_) - 0.5) < 0.01


def test_conditional_spin_on_sign():
    m0 = model.two_walker_model_state(5, 0)
    for sign in "+-":
        r = engine.conditional_spin_on_sign(m0, sign)
        assert abs(BELL[3] @ r @ BELL[3] - 1) < 1e-12
    m = model.two_walker_model_state(5, 50)
    for sign, s in (("+", 1), ("-", -1)):
        S = (BETA23 + s * BELL[3]) / R2
        assert (S.conj() @ engine.conditional_spin_on_sign(m, sign) @ S).real >= 0.999
    with pytest.raises(ValueError):
        engine.conditional_spin_on_sign(m, "0")


def test_fidelity_of_product_sum_states(singlet_s2):
    assert abs(fidelity(singlet_s2, singlet_s2) - 1) < 1e-12
    dense = singlet_s2.to_vector()
    assert abs(fidelity(dense, dense) - 1) < 1e-12
