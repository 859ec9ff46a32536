import math

import numpy as np
import pytest

from spikewave.ansatz import build_corrections, error_field
from spikewave.errors import MaxIterations, NoInteriorPeak, PositivityLost
from spikewave.presets import SWEEP_REL_DELTA, grid_spec, two_eq_spec
from spikewave.problem import PeakConfiguration
from spikewave.reduced import admissible_domains, classify_regime, reduced_constants, solve_reduced
from spikewave.verifier import (
    _axis_peak,
    assemble_residual,
    extract_peaks,
    locate,
    newton_solve,
    projected_multipliers,
)


def _two_eq(eps=0.05, n=64, **kw):
    spec = two_eq_spec(eps).replace(**kw) if kw else two_eq_spec(eps)
    peaks = PeakConfiguration(2.0 * abs(math.log(eps)) * eps, 0.0, eps)
    return build_corrections(spec, peaks, n=n, nx=n)


def _gp_symmetric(n=96):
    spec, _ = grid_spec("GPEqual", eps=0.05)
    rho = 2.0 * abs(math.log(0.05)) * 0.05
    return build_corrections(spec, PeakConfiguration(rho, rho, 0.05), n=n, nx=n)


# ---------------------------------------------------------------- residual and Jacobian


def test_residual_matches_error_decomposition():
    diffs = []
    for n in (64, 128):
        corr = _two_eq(n=n)
        res = assemble_residual(corr.system, corr.state())
        err = error_field(corr)
        assert [f.name for f in res] == ["F1", "F2"]
        assert np.max(np.abs(res[0].flat + err[0])) <= 1e-10
        diffs.append(np.max(np.abs(res[1].flat + err[1])))
    # what is left is the truncation error of the Laplacian on the bumps
    assert 3.0 <= diffs[0] / diffs[1] <= 5.0


@pytest.mark.parametrize("which", ["lv", "gp"])
def test_jacobian_matches_directional_difference(which):
    corr = _two_eq(n=32) if which == "lv" else _gp_symmetric(n=24)
    sysm = corr.system
    u = sysm.join(corr.state())
    v = np.random.default_rng(3).normal(size=u.size)
    jv = sysm.jacobian(sysm.split(u)) @ v
    h = 1e-6
    fp = sysm.join(sysm.residual(sysm.split(u + h * v)))
    fm = sysm.join(sysm.residual(sysm.split(u - h * v)))
    fd = (fp - fm) / (2 * h)
    assert np.max(np.abs(fd - jv)) <= 1e-6 * np.max(np.abs(jv))


def test_symmetric_residual_is_transposed():
    corr = _gp_symmetric()
    res = assemble_residual(corr.system, corr.state())
    assert np.allclose(res[2].values, res[1].values.T, atol=1e-13)


# ---------------------------------------------------------------- Newton


def test_decoupled_first_density_is_left_alone():
    corr = _two_eq(n=48, coupling={"21": -0.0025, "12": 0.0})
    kernels = {2: corr.ansatz.bumps[2].kernel}
    st = newton_solve(corr.system, corr.state(), kernels=kernels)
    assert st.converged and st.residual <= 1e-9
    assert np.max(np.abs(st.fields[0].flat - corr.state()[0])) <= 1e-10


def test_projected_solve_keeps_symmetry():
    corr = _gp_symmetric()
    kernels = {i: corr.ansatz.bumps[i].kernel for i in (2, 3)}
    st = newton_solve(corr.system, corr.state(), kernels=kernels)
    c2, c3 = st.multipliers
    assert abs(c2 - c3) <= 1e-9 * max(abs(c2), 1e-12)
    assert np.allclose(st.fields[2].values, st.fields[1].values.T, atol=1e-10)


def test_max_iterations():
    corr = _two_eq(n=32)
    with pytest.raises(MaxIterations):
        newton_solve(corr.system, corr.state(), max_iter=0)


def test_negative_branch_is_rejected():
    # Gross-Pitaevskii residuals are odd, so Newton from -u finds -u*
    corr = _gp_symmetric()
    kernels = {i: corr.ansatz.bumps[i].kernel for i in (2, 3)}
    with pytest.raises(PositivityLost):
        newton_solve(corr.system, [-p for p in corr.state()], kernels=kernels)


# ---------------------------------------------------------------- peaks


def test_axis_peak_subgrid():
    h = 0.1
    x = np.arange(40) * h
    loc, height = _axis_peak(2.0 - (x - 1.234) ** 2, h, "u")
    assert loc == pytest.approx(1.234, abs=1e-12) and height == pytest.approx(2.0, abs=1e-12)


def test_no_interior_peak():
    with pytest.raises(NoInteriorPeak):
        _axis_peak(np.exp(-np.arange(10.0)), 0.1, "u2")
    with pytest.raises(NoInteriorPeak):
        _axis_peak(np.arange(10.0), 0.1, "u2")


# ---------------------------------------------------------------- peak location


@pytest.fixture(scope="module")
def located():
    eps = 0.05
    spec = two_eq_spec(eps)
    reg = classify_regime(*spec.omega, "two-eq")
    k = reduced_constants(spec, reg)
    guess = PeakConfiguration(2.4 * abs(math.log(eps)) * eps, 0.0, eps)
    corr, st, hist = locate(spec, guess, n=128, nx=128)
    return spec, reg, k, corr, st, hist


def test_locate_drives_multiplier_to_zero(located):
    spec, reg, k, corr, st, hist = located
    assert hist[-1][-1] <= 1e-9 and hist[0][-1] > 1e-6
    rep = extract_peaks(st)
    # the located peaks sit where the bumps were placed
    assert rep.peaks[2].rho_measured == pytest.approx(corr.peaks.rho2, rel=0.01)
    assert rep.peaks[2].on_axis


def test_multiplier_changes_sign_across_domain(located):
    spec, reg, k, corr, st, hist = located
    (d2,) = admissible_domains(reg, 0.0, spec.eps, rel_delta=SWEEP_REL_DELTA)[:1]
    # the lower end of the wide interval puts the mirrored bumps on top of each other
    lo = projected_multipliers(spec, PeakConfiguration(d2.center, 0.0, spec.eps), n=128, nx=128)[0]
    hi = projected_multipliers(spec, PeakConfiguration(d2.hi, 0.0, spec.eps), n=128, nx=128)[0]
    assert lo * hi < 0
    assert d2.center < corr.peaks.rho2 < d2.hi


def test_corrected_potential_term_predicts_located_peak(located):
    spec, reg, k, corr, st, hist = located
    plain = solve_reduced(reg, k, spec.eps, rel_delta=SWEEP_REL_DELTA).rho2
    doubled = solve_reduced(reg, k.scaled(potential_scale=2.0), spec.eps, rel_delta=SWEEP_REL_DELTA).rho2
    found = corr.peaks.rho2
    assert abs(doubled - found) < abs(plain - found)
    assert abs(doubled - found) / found < 0.05
