import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikewave.ansatz import (
    b_planar,
    b_radial,
    build_ansatz,
    build_corrections,
    component_profile,
    error_field,
    error_terms,
    fit_c,
    limit_profile,
    make_grids,
    tabulate_bumps,
    tau_epsilon,
)
from spikewave.errors import GridMismatch, HypothesisViolation, PeaksTooClose
from spikewave.grid import Grid, GridField, cross_scale_maps, interpolation_matrix
from spikewave.interaction import soliton
from spikewave.presets import two_eq_spec
from spikewave.problem import ModifiedPotential, PeakConfiguration, ProblemSpec


@pytest.fixture(scope="module")
def small_run():
    spec = two_eq_spec(eps=0.05)
    c = 2.0 * abs(math.log(spec.eps))
    peaks = PeakConfiguration(c * spec.eps, 0.0, spec.eps)
    return build_corrections(spec, peaks, n=128, nx=128)


# ---------------------------------------------------------------- grids


def test_laplacian_exact_on_even_quadratic():
    g = Grid.box(4.0, 16)
    y1, y2 = g.mesh()
    lap = (g.laplacian @ (y1**2 + y2**2).ravel()).reshape(16, 16)
    # interior rows (away from the Dirichlet edge) see exactly 4
    assert np.allclose(lap[:-1, :-1], 4.0, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3), d=st.floats(-3, 3))
def test_interpolation_reproduces_bilinear(a, b, c, d):
    g = Grid.box(5.0, 20)
    y1, y2 = g.mesh()
    f = (a + b * y1 + c * y2 + d * y1 * y2).ravel()
    pts = np.random.default_rng(0).uniform(0, g.length - 2 * g.h, size=(2, 50))
    m = interpolation_matrix(g, pts[0], pts[1])
    exact = a + b * pts[0] + c * pts[1] + d * pts[0] * pts[1]
    assert np.allclose(m @ f, exact, atol=1e-10)


def test_interpolation_outside_box():
    g = Grid.box(1.0, 8)
    assert (interpolation_matrix(g, [2.0], [0.0]) @ np.ones(g.size))[0] == 0.0
    with pytest.raises(GridMismatch):
        interpolation_matrix(g, [2.0], [0.0], outside="error")


def test_cross_scale_box_check():
    with pytest.raises(GridMismatch):
        cross_scale_maps(Grid.box(1.0, 8, "x"), Grid.box(100.0, 8), 0.02)


def test_grid_field_round_trips():
    g = Grid.box(3.0, 6)
    vals = np.random.default_rng(1).normal(size=(6, 6))
    f = GridField(g, vals, 2, "u2")
    back = GridField.from_bytes(f.to_bytes(), 2)
    assert np.array_equal(back.values, f.values) and back.grid == g
    rows = f.to_csv().splitlines()
    assert rows[0].startswith("# component=2 name=u2") and rows[1] == "x1,x2,value"
    parsed = np.array([[float(t) for t in r.split(",")] for r in rows[2:]])
    assert np.array_equal(parsed[:, 2].reshape(6, 6), vals)


def test_grid_field_rejects_nan_and_is_read_only():
    g = Grid.box(1.0, 4)
    with pytest.raises(ValueError):
        GridField(g, np.full((4, 4), np.nan))
    f = GridField(g, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_full_reflection_is_even():
    g = Grid.box(2.0, 5)
    f = GridField(g, np.arange(25.0).reshape(5, 5))
    full = f.full()
    assert full.shape == (9, 9)
    assert np.array_equal(full, full[::-1]) and np.array_equal(full, full[:, ::-1])


# ---------------------------------------------------------------- problem data


def test_curvature_closed_form_matches_finite_difference():
    spec = two_eq_spec()
    pot = ModifiedPotential(spec, limit_profile(spec))
    assert pot.curvature(2, 0) == pytest.approx(pot.curvature_fd(2, 0), rel=1e-4)
    assert pot.curvature(2, 1) == pytest.approx(pot.curvature_fd(2, 1), rel=1e-4)


def test_nonpositive_w0_rejected():
    spec = ProblemSpec(components=2, omega=("1/100", "1"), coupling={"21": -1.0})
    with pytest.raises(HypothesisViolation):
        ModifiedPotential(spec, limit_profile(spec))


def test_lv_sign_hypothesis():
    with pytest.raises(HypothesisViolation):
        ProblemSpec(components=2, coupling={"21": 0.1})


def test_peaks_too_close():
    with pytest.raises(PeaksTooClose):
        PeakConfiguration(0.05, 0.0, 0.02)


def test_exact_omega_input():
    spec = ProblemSpec(components=2, omega=("0.1", "1/3"), coupling={"21": -0.01})
    assert spec.omega[0].denominator == 10 and spec.omega[1].denominator == 3


# ---------------------------------------------------------------- limit profile and bumps


def test_constant_potential_limit_profile_is_soliton():
    spec = ProblemSpec(components=2, v=(1.0,), coupling={"21": -0.01})
    p, s = limit_profile(spec), soliton(2, 1.0, 1.0)
    r = np.linspace(0, 8, 41)
    assert np.max(np.abs(p(r) - s(r))) <= 1e-7


def test_bumps_axis_swap():
    g = Grid.box(20.0, 40)
    prof = soliton(2, 1.0)
    a = tabulate_bumps(prof, g, 4.0, 0, 2)
    b = tabulate_bumps(prof, g, 4.0, 1, 3)
    assert np.allclose(a.total, b.total.T, atol=1e-14)
    assert np.allclose(a.kernel, b.kernel.T, atol=1e-14)


def test_kernel_is_derivative_of_bumps():
    prof = soliton(2, 1.0)
    errs = []
    for n in (240, 480):
        g = Grid.box(24.0, n)
        bm = tabulate_bumps(prof, g, 5.0, 0, 2)
        diff = np.gradient(bm.plus - bm.minus, g.h, axis=0)
        errs.append(np.max(np.abs(diff - bm.kernel)[2:-2]))
    # central differences converge at second order
    assert 3.5 <= errs[0] / errs[1] <= 4.5


# ---------------------------------------------------------------- projection constants


@pytest.mark.parametrize("omega", [0.25, 1.0, 2.0])
def test_b_two_quadratures(omega):
    prof = soliton(2, omega)
    assert b_radial(prof) == pytest.approx(b_planar(prof), rel=1e-5)


def test_b_is_half_mass():
    from scipy.integrate import quad

    from spikewave.interaction import SmoothRadial

    prof = soliton(2, 0.25)
    rad = SmoothRadial(prof)
    mass, _ = quad(lambda r: 2 * math.pi * r * rad(r) ** 2, 0, np.inf, limit=400, epsrel=1e-12)
    assert b_radial(prof) == pytest.approx(0.5 * mass, rel=1e-7)


def test_fitted_c_settles():
    prof = soliton(2, 1.0)
    vals = [fit_c(prof, 1.0, c) for c in (8.0, 12.0, 16.0)]
    assert max(vals) / min(vals) - 1 <= 0.05


def test_tau_positive_and_decreasing():
    spec = two_eq_spec()
    taus = [tau_epsilon(spec, PeakConfiguration(c * spec.eps, 0.0, spec.eps)) for c in (6.0, 8.0, 10.0)]
    assert all(t > 0 for t in taus) and taus[0] > taus[1] > taus[2]


# ---------------------------------------------------------------- corrections and error


def test_two_eq_grid_needs_n2():
    spec = ProblemSpec(dim=3, components=2, coupling={"21": -0.01})
    with pytest.raises(HypothesisViolation):
        make_grids(spec, PeakConfiguration(0.2, 0.0, 0.02))


def test_decoupled_first_density_has_no_correction():
    spec = two_eq_spec(eps=0.05).replace(coupling={"21": -0.0025, "12": 0.0})
    peaks = PeakConfiguration(0.3, 0.0, 0.05)
    corr = build_corrections(spec, peaks, n=64, nx=64)
    assert corr.phi1.max_abs() == 0.0 and corr.phi[2].max_abs() == 0.0


def test_eta_nontrivial(small_run):
    assert small_run.eta[2].max_abs() > 0


def test_phi1_is_coupled_eta(small_run):
    a12 = small_run.spec.a(1, 2)
    assert np.allclose(small_run.phi1.values, a12 * small_run.eta[2].values)


def test_first_component_error_is_exact(small_run):
    res = small_run.system.residual(small_run.state())
    err = error_field(small_run)
    assert np.max(np.abs(res[0] + err[0])) <= 1e-10 * max(1.0, np.max(np.abs(err[0])))


def test_error_term_names(small_run):
    terms = error_terms(small_run)
    assert set(terms[1]) == {"cubic", "source2", "correction2"}
    assert {"self", "self_phi", "phi_quadratic", "potential", "first_shift", "first_phi"} <= set(terms[2])


def test_state_is_positive(small_run):
    assert all(np.min(v) > -1e-12 for v in small_run.state())


def test_ansatz_component_profile():
    spec = two_eq_spec()
    p = component_profile(spec, 2)
    assert p.height == pytest.approx(0.5 * soliton(2, 1.0).height, rel=1e-8)
    g = Grid.box(60.0, 60)
    a = build_ansatz(spec, PeakConfiguration(0.16, 0.0, 0.02), g)
    assert a.field(2).name == "U2eps" and a.kernel(2).name == "Z"
