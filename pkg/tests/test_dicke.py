import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavsqueeze import dicke
from cavsqueeze.errors import CapacityError, DegeneratePolarizationError, ParameterError
from cavsqueeze.gaussian import xi2_oat_ideal
from cavsqueeze.squeezing import quadrature_variance

criterion = pytest.mark.criterion


def test_css_moments():
    N = 40
    mom = dicke.moments(dicke.css_state(N))
    assert mom.mean == pytest.approx([N / 2, 0, 0], abs=1e-12)
    assert mom.cov[1, 1] == pytest.approx(N / 4)
    assert mom.cov[2, 2] == pytest.approx(N / 4)
    assert dicke.wineland_xi2(dicke.css_state(N)).xi2 == pytest.approx(1.0, abs=1e-12)


def test_css_capacity():
    with pytest.raises(CapacityError):
        dicke.css_state(20_000)
    assert dicke.css_state(20_000, max_atoms=20_000).norm == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        dicke.css_state(0)


def test_single_atom_css():
    psi = dicke.css_state(1)
    assert np.allclose(psi.amplitudes, [2 ** -0.5, 2 ** -0.5])


def test_ideal_oat_minimum_small_n():
    # frozen from computation: N = 100 ideal OAT optimum
    res, alpha = dicke.optimal_squeezing(100, "OAT")
    assert res.xi2 == pytest.approx(0.062946, rel=1e-4)
    assert 1 < alpha < 10


def test_oat_alpha_one_matches_gaussian():
    N = 1000
    psi = dicke.evolve(dicke.css_state(N), dicke.HamiltonianSpec.oat(1.0, linear=False), 1.0 / N)
    assert dicke.wineland_xi2(psi).xi2 == pytest.approx(xi2_oat_ideal(1.0).xi2, rel=0.005)


def test_fully_twisted_state_is_unpolarized():
    # OAT for mu = pi gives a cat-like state with <S> = 0 for even N
    N = 10
    psi = dicke.evolve(dicke.css_state(N), dicke.HamiltonianSpec.oat(1.0, linear=False), math.pi / 2)
    with pytest.raises(DegeneratePolarizationError):
        dicke.wineland_xi2(psi)


def test_state_json_round_trip():
    psi = dicke.evolve(dicke.css_state(7), dicke.HamiltonianSpec.tat(0.3, 3.5), 0.4)
    back = dicke.DickeState.from_json(psi.to_json())
    assert back.N == 7
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=0, rtol=0)


def test_rotation_about_x_keeps_css():
    psi = dicke.rotate_x(dicke.css_state(20), 0.7)
    assert dicke.moments(psi).mean == pytest.approx([10, 0, 0], abs=1e-10)


def test_operator_lookup():
    with pytest.raises(ParameterError):
        dicke.collective_operator(4, "Sq")


def test_tat_squeezes_at_quarter_angle():
    N = 400
    S = N / 2
    psi = dicke.evolve(dicke.css_state(N), dicke.HamiltonianSpec.tat(1.0, S, linear=False), 1.0 / N)
    res = dicke.wineland_xi2(psi)
    assert res.xi2 == pytest.approx(math.exp(-1.0), rel=0.01)
    assert res.theta == pytest.approx(math.pi / 4, abs=0.02)


# --- properties ---------------------------------------------------------------

hamiltonians = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1))


@criterion("8", "property suites: symplectic floor, norm and <S^2> conservation, Sz conservation, theta-argmin, CLI determinism")
@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 60), coeffs=hamiltonians, t=st.floats(0, 2))
def test_norm_and_total_spin_conserved(N, coeffs, t):
    h = dicke.HamiltonianSpec("custom", *coeffs)
    psi = dicke.evolve(dicke.css_state(N), h, t)
    S = N / 2
    assert abs(psi.norm - 1) < 1e-9
    assert abs(dicke.moments(psi).total_spin_sq - S * (S + 1)) < 1e-9 * max(1.0, S * (S + 1))


@criterion("8", "property suites: symplectic floor, norm and <S^2> conservation, Sz conservation, theta-argmin, CLI determinism")
@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 200), c_z=st.floats(-5, 5), c_zz=st.floats(-2, 2), t=st.floats(0, 5),
       tilt=st.floats(0, math.pi))
def test_oat_conserves_sz_distribution(N, c_z, c_zz, t, tilt):
    psi0 = dicke.rotate_x(dicke.css_state(N), tilt)
    psi = dicke.evolve(psi0, dicke.HamiltonianSpec("OAT", 0.0, c_z, c_zz), t)
    sz = dicke.collective_operator(N, "Sz")
    assert abs(psi.expect(sz).real - psi0.expect(sz).real) < 1e-10 * max(1.0, N)
    assert np.allclose(np.abs(psi.amplitudes), np.abs(psi0.amplitudes), atol=1e-12)


@criterion("8", "property suites: symplectic floor, norm and <S^2> conservation, Sz conservation, theta-argmin, CLI determinism")
@settings(max_examples=25, deadline=None)
@given(N=st.integers(20, 200), alpha=st.floats(0.1, 3), delta=st.sampled_from([-1e-3, 1e-3]))
def test_reported_angle_is_argmin(N, alpha, delta):
    psi = dicke.evolve(dicke.css_state(N), dicke.HamiltonianSpec.oat(1.0, linear=False), alpha / N)
    res = dicke.wineland_xi2(psi)
    mom = dicke.moments(psi)
    block = mom.cov[1:, 1:]
    assert quadrature_variance(block, res.theta) == pytest.approx(res.variance, rel=1e-9, abs=1e-12)
    assert quadrature_variance(block, res.theta + delta) >= res.variance - 1e-12


def test_uncertainty_bound_for_twisted_states():
    # Var(Sy) Var(Sz) >= |<Sx>|^2 / 4 for any state
    for alpha in (0.3, 1.0, 3.0):
        psi = dicke.evolve(dicke.css_state(100), dicke.HamiltonianSpec.oat(1.0, linear=False), alpha / 100)
        mom = dicke.moments(psi)
        det = np.linalg.det(mom.cov[1:, 1:])
        assert det >= mom.mean[0] ** 2 / 4 - 1e-9
