import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikewave.errors import NoDecayingBranch
from spikewave.ground_state import (
    decay_plateau,
    evaluate_derivative,
    evaluate_profile,
    kernel_check,
    profile_from_csv,
    profile_mass,
    profile_to_csv,
    solve_ground_state,
    solve_radial_potential,
)

# solve_bvp collocation on [0, 30], 1e4 nodes (oracles/collocation_ground_state.py)
COLLOCATION_U0_N2 = 2.2062008646498006
COLLOCATION_UPSILON0 = 2.3632869888800463


@pytest.fixture(scope="module")
def soliton1():
    return solve_ground_state(1, 1.0, 1.0, tol=1e-8)


@pytest.fixture(scope="module")
def soliton2():
    return solve_ground_state(2, 1.0, 1.0)


@pytest.fixture(scope="module")
def soliton3():
    return solve_ground_state(3, 1.0, 1.0)


def test_one_dimensional_sech(soliton1):
    r = np.linspace(0.0, 15.0, 3001)
    assert np.max(np.abs(soliton1(r) - math.sqrt(2) / np.cosh(r))) < 1e-8
    assert evaluate_profile(soliton1, 0.0) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_collocation_height(soliton2):
    assert soliton2.height == pytest.approx(COLLOCATION_U0_N2, rel=1e-6)


def test_scaling_example():
    base = solve_ground_state(2, 1.0, 1.0)
    p = solve_ground_state(2, 4.0, 1.0)
    r = np.linspace(0.0, 5.0, 400)
    np.testing.assert_allclose(p(r), 2.0 * base(2.0 * r), rtol=1e-6)


@pytest.mark.parametrize("fixture", ["soliton1", "soliton2", "soliton3"])
def test_invariants(fixture, request):
    p = request.getfixturevalue(fixture)
    assert np.all(p.u > 0)
    assert np.all(np.diff(p.u) < 0)
    assert abs(p.du[0]) <= p.resid_tol
    assert p.resid_tol < 1e-7
    rr = np.linspace(p.r_tail, p.r_tail + 10.0, 50)
    ratio = p(rr) * np.exp(p.rate * rr) * rr ** ((p.dim - 1) / 2.0)
    assert np.max(np.abs(ratio - p.c0)) / p.c0 <= 0.02


@pytest.mark.parametrize("fixture", ["soliton1", "soliton2", "soliton3"])
def test_tail_continuity(fixture, request):
    p = request.getfixturevalue(fixture)
    inside = float(p._spline(p.r_tail))
    assert inside == pytest.approx(p.tail(p.r_tail), rel=0.01)


def test_tail_value_at_15(soliton2):
    # r = 15 lies beyond the switch radius; cross-check against an outward
    # integration carried on to r = 15 from the tabulated state at r_tail
    from scipy.integrate import solve_ivp

    p = soliton2
    assert p.r_tail < 15.0
    val = evaluate_profile(p, 15.0)
    assert val == pytest.approx(p.c0 * math.exp(-15.0) / math.sqrt(15.0), rel=1e-12)
    r0 = 0.8 * p.r_tail
    y0 = [float(p(r0)), float(p.derivative(r0))]
    # backward-stable check: integrate the linear tail equation inward from 15
    sol = solve_ivp(
        lambda r, y: [y[1], -y[1] / r + y[0] - y[0] ** 3],
        (15.0, r0),
        [val, float(p.derivative(15.0))],
        method="DOP853",
        rtol=1e-12,
        atol=1e-30,
    )
    assert sol.y[0, -1] == pytest.approx(y0[0], rel=0.01)


@pytest.mark.parametrize("fixture", ["soliton2", "soliton3"])
def test_decay_plateau(fixture, request):
    p = request.getfixturevalue(fixture)
    _, plateau = decay_plateau(p)
    assert plateau.size > 50
    assert (plateau.max() - plateau.min()) / plateau.mean() <= 0.02


@pytest.mark.parametrize("fixture", ["soliton1", "soliton2", "soliton3"])
def test_log_derivative_limit(fixture, request):
    # U'/U -> -sqrt(lam); the N-1 power correction is O(1/r)
    p = request.getfixturevalue(fixture)
    r = 0.95 * p.r_tail
    slope = p.derivative(r) / p(r)
    assert slope == pytest.approx(-p.rate - (p.dim - 1) / (2 * r), rel=0.01)


def test_log_derivative_scales_with_frequency():
    p = solve_ground_state(2, 4.0, 1.0)
    r = 0.95 * p.r_tail
    assert p.derivative(r) / p(r) == pytest.approx(-2.0 - 1 / (2 * r), rel=0.01)


def test_kernel_two_dimensional(soliton2):
    rep = kernel_check(soliton2)
    assert rep.mode1 <= 1e-4
    assert rep.mode0 >= 0.1
    # regression baseline for the converged even-space value (box edge of the continuum)
    assert rep.mode0 == pytest.approx(1.00331, abs=1e-4)


def test_kernel_one_dimensional_eigenfunction(soliton1):
    rep = kernel_check(soliton1)
    assert rep.cosine >= 0.999
    assert rep.mode1 <= 1e-4


def test_mass_positive(soliton2):
    m = profile_mass(soliton2)
    assert 0 < m < np.inf
    # 2-D cubic ground state mass
    assert m == pytest.approx(11.7009, rel=1e-4)


def test_csv_round_trip(soliton2):
    text = profile_to_csv(soliton2)
    assert text.startswith("# N=2 ")
    q = profile_from_csv(text)
    r = np.linspace(0, 20, 77)
    np.testing.assert_array_equal(q(r), soliton2(r))


def test_derivative_matches_finite_difference(soliton2):
    r = np.linspace(0.3, 14.0, 40)
    h = 1e-5
    fd = (soliton2(r + h) - soliton2(r - h)) / (2 * h)
    np.testing.assert_allclose(evaluate_derivative(soliton2, r), fd, rtol=1e-5, atol=1e-12)


def test_bad_arguments():
    with pytest.raises(ValueError):
        solve_ground_state(4, 1, 1)
    with pytest.raises(ValueError):
        solve_ground_state(2, -1, 1)
    with pytest.raises(ValueError):
        solve_ground_state(2, 1, 1, tol=1e-3)


def test_no_decaying_branch_for_bad_bracket(monkeypatch):
    import spikewave.ground_state as gs

    monkeypatch.setattr(gs, "_classify", lambda *a: -1)
    with pytest.raises(NoDecayingBranch):
        gs.solve_ground_state(2, 1.0, 1.0)


def test_upsilon_collocation_height():
    p = solve_radial_potential(2, (1.0, 0.1), 1.0)
    assert p.height == pytest.approx(COLLOCATION_UPSILON0, rel=1e-6)


@settings(max_examples=4, deadline=None)
@given(
    lam=st.floats(0.3, 4.0),
    mu=st.floats(0.3, 4.0),
    dim=st.sampled_from([2, 3]),
)
def test_scaling_covariance_property(lam, mu, dim):
    base = _base(dim)
    p = solve_ground_state(dim, lam, mu)
    r = np.linspace(0.0, 10.0 / math.sqrt(lam), 200)
    expect = math.sqrt(lam / mu) * base(math.sqrt(lam) * r)
    np.testing.assert_allclose(p(r), expect, rtol=1e-6)


_BASES = {}


def _base(dim):
    if dim not in _BASES:
        _BASES[dim] = solve_ground_state(dim, 1.0, 1.0)
    return _BASES[dim]
