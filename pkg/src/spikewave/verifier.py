"""Damped Newton on the full two-scale system, peak extraction and eps sweeps."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .ansatz import Corrections, build_corrections
from .errors import JacobianSingular, MaxIterations, NoInteriorPeak, PositivityLost
from .grid import GridField, interpolation_matrix
from .problem import PeakConfiguration, ProblemSpec
from .reduced import ReducedConstants, classify_regime, solve_reduced
from .system import DiscreteSystem

ARMIJO = 1e-4
MIN_STEP = 2.0**-10
COARSE = 256  # peak search resolution for finer solves
ORDERING = "MMD_AT_PLUS_A"  # about half the fill of COLAMD on these Jacobians


def _block_grids(system: DiscreteSystem) -> list:
    return [system.xgrid] + [system.egrid] * (system.blocks - 1)


def assemble_residual(system: DiscreteSystem, state) -> list:
    """Residual fields of every equation at ``state`` = (u1, u2[, u3])."""
    return [GridField(g, r, k + 1, f"F{k + 1}") for k, (g, r) in enumerate(zip(_block_grids(system), system.residual(state)))]


@dataclass(frozen=True, eq=False)
class SolveState:
    spec: ProblemSpec
    fields: tuple
    iterations: int
    history: tuple
    converged: bool
    multipliers: tuple = ()
    peaks: PeakConfiguration | None = None

    @property
    def residual(self) -> float:
        return self.history[-1]

    def flat(self) -> list:
        return [f.flat for f in self.fields]


def _kernel_columns(system: DiscreteSystem, kernels: dict):
    """Kernel fields normalized in the quadrature norm, as sparse columns of the
    stacked unknown vector, plus their weighted transposes."""
    nx, ne = system.xgrid.size, system.egrid.size
    w = system.egrid.weights.ravel()
    cols, rows = [], []
    total = nx + ne * (system.blocks - 1)
    for pos, i in enumerate(system.spec.singular):
        k = np.ravel(kernels[i])
        k = k / math.sqrt(float(np.sum(w * k * k)))
        off = nx + pos * ne
        v = np.zeros(total)
        v[off : off + ne] = k
        cols.append(v)
        r = np.zeros(total)
        r[off : off + ne] = w * k
        rows.append(r)
    return np.column_stack(cols), np.vstack(rows)


def newton_solve(
    system: DiscreteSystem,
    initial,
    tol: float = 1e-9,
    max_iter: int = 40,
    kernels: dict | None = None,
    check_positive: bool = True,
) -> SolveState:
    """Damped Newton with Armijo backtracking (factor 1/2, minimum step 2^-10).

    With ``kernels`` the solve is projected: it looks for u and multipliers
    (c2, c3) with F(u) = sum_i c_i K_i and <K_i, u_i - u_i^0> = 0, where the
    K_i are the normalized kernel fields and u^0 = ``initial``.
    """
    u = system.join(initial)
    u0 = u.copy()
    proj = kernels is not None
    if proj:
        kcols, krows = _kernel_columns(system, kernels)
        mult = np.zeros(kcols.shape[1])

    def full_residual(vec, c):
        f = system.join(system.residual(system.split(vec)))
        if not proj:
            return f
        return np.concatenate([f - kcols @ c, krows @ (vec - u0)])

    c = mult if proj else None
    f = full_residual(u, c)
    history = [float(np.max(np.abs(f)))]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise MaxIterations(f"Newton stopped at residual {history[-1]:.3e} after {it} iterations")
        jac = system.jacobian(system.split(u))
        try:
            lu = spla.splu(sp.csc_matrix(jac), permc_spec=ORDERING)
        except RuntimeError as exc:
            raise JacobianSingular(f"sparse factorization failed: {exc}") from exc
        if proj:
            # bordered step by the Schur complement (the kernel columns are dense)
            n_u = u.size
            y = lu.solve(f[:n_u])
            z = lu.solve(np.asarray(kcols))
            schur = krows @ z
            try:
                dc = np.linalg.solve(schur, f[n_u:] - krows @ y)
            except np.linalg.LinAlgError as exc:
                raise JacobianSingular(f"bordered system is singular: {exc}") from exc
            step = np.concatenate([y + z @ dc, dc])
        else:
            step = lu.solve(f)
        if not np.all(np.isfinite(step)):
            raise JacobianSingular("Newton step is not finite")
        t = 1.0
        while True:
            if proj:
                nu, nc = u - t * step[: u.size], c - t * step[u.size :]
            else:
                nu, nc = u - t * step, None
            nf = full_residual(nu, nc)
            norm = float(np.max(np.abs(nf)))
            if norm <= (1.0 - ARMIJO * t) * history[-1] or t <= MIN_STEP:
                break
            t *= 0.5
        u, c, f = nu, nc, nf
        history.append(norm)
        it += 1

    parts = system.split(u)
    if check_positive:
        for k, p in enumerate(parts):
            top = float(np.max(np.abs(p)))
            if float(np.min(p)) < -1e-12 * top:
                node = int(np.argmin(p))
                raise PositivityLost(f"component {k + 1} is negative ({float(np.min(p)):.3e}) at node {node}")
    fields = tuple(GridField(g, p, k + 1, f"u{k + 1}") for k, (g, p) in enumerate(zip(_block_grids(system), parts)))
    return SolveState(system.spec, fields, it, tuple(history), True, tuple(c) if proj else ())


# ---------------------------------------------------------------- peaks


@dataclass(frozen=True)
class ComponentPeak:
    component: int
    location: float  # y-scale distance from the origin along the component's axis
    height: float
    rho_measured: float
    rho_predicted: float | None
    ratio: float
    on_axis: bool


@dataclass(frozen=True)
class PeakReport:
    eps: float
    peaks: dict = field(default_factory=dict)


def _axis_peak(line: np.ndarray, h: float, what: str):
    i = int(np.argmax(line))
    if i == 0 or i >= line.size - 1:
        raise NoInteriorPeak(f"{what} has its maximum at node {i} (no interior peak)")
    fm, f0, fp = line[i - 1], line[i], line[i + 1]
    curv = fm - 2.0 * f0 + fp
    off = 0.5 * (fm - fp) / curv
    return (i + off) * h, f0 - 0.25 * (fm - fp) * off


def extract_peaks(state: SolveState, predicted: dict | None = None) -> PeakReport:
    """Sub-grid peak of each concentrating component along its axis (3-point quadratic fit)."""
    eps = state.spec.eps
    scale = eps * abs(math.log(eps))
    out = {}
    for i in state.spec.singular:
        f = state.fields[i - 1]
        vals = f.values
        line = vals[:, 0] if i == 2 else vals[0, :]
        loc, height = _axis_peak(line, f.grid.h, f"u{i}")
        j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        on_axis = (j[1] if i == 2 else j[0]) == 0
        rho = eps * loc
        pred = None if predicted is None else predicted.get(i)
        out[i] = ComponentPeak(i, loc, float(height), rho, pred, rho / scale, bool(on_axis))
    return PeakReport(eps, out)


# ---------------------------------------------------------------- drivers


def predicted_peaks(spec: ProblemSpec, constants: ReducedConstants, mode: str, b: float | None = None, rel_delta: float = 0.4, beta0: float = 0.0) -> PeakConfiguration:
    reg = classify_regime(*spec.omega, mode)
    beta = spec.beta if mode == "lv" else 0.0
    roots = solve_reduced(reg, constants, spec.eps, beta, b, rel_delta, spec.kind)
    return PeakConfiguration(roots.rho2, roots.rho3, spec.eps)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    state: SolveState
    report: PeakReport
    corrections: Corrections
    outer: tuple = ()  # (rho2, rho3, |multipliers|) per outer iteration
    seconds: float = 0.0


def _projected(spec, peaks, grids, start=None, tol=1e-9):
    corr = build_corrections(spec, peaks, grids=grids)
    kernels = {i: corr.ansatz.bumps[i].kernel for i in spec.singular}
    init = corr.state() if start is None else start
    return corr, newton_solve(corr.system, init, tol, kernels=kernels, check_positive=False)


def _prolong(state: SolveState, grids) -> list:
    """Bilinear transfer of a solved state onto finer grids with the same boxes."""
    out = []
    for f in state.fields:
        g = grids[0] if f.component == 1 else grids[1]
        y1, y2 = g.mesh()
        out.append(interpolation_matrix(f.grid, y1.ravel(), y2.ravel()) @ f.flat)
    return out


def locate(
    spec: ProblemSpec,
    peaks: PeakConfiguration,
    n: int = 256,
    nx: int = 256,
    tol: float = 1e-9,
    max_outer: int = 30,
    box_margin: float = 1.5,
    coarse: int = COARSE,
):
    """Move the peaks until the multipliers of the projected solve vanish.

    The grids are built once (box enlarged by ``box_margin`` in rho) so that the
    multipliers vary smoothly with the peak positions; the peak positions are
    updated by a secant (one singular component) or Broyden (two) iteration.
    Above ``coarse`` nodes per side the search runs on the coarse grids and the
    located state is carried over by interpolation; the remaining O(h^2) shift
    is left to the unprojected polish.
    Returns (corrections, state, outer history).
    """
    from .ansatz import make_grids

    wide = PeakConfiguration(peaks.rho2 * box_margin, peaks.rho3 * box_margin, spec.eps, min_ratio=0.0)
    grids = make_grids(spec, wide, n, nx)
    if n > coarse:
        cnx = max(nx * coarse // n, 16)
        ccorr, cst, history = locate(spec, peaks, coarse, cnx, tol, max_outer, box_margin, coarse)
        corr = build_corrections(spec, ccorr.peaks, grids=grids)
        start = _prolong(cst, grids)
        res = float(np.max(np.abs(corr.system.join(corr.system.residual(start)))))
        fields = tuple(GridField(g, p, k + 1, f"u{k + 1}") for k, (g, p) in enumerate(zip(_block_grids(corr.system), start)))
        return corr, SolveState(spec, fields, 0, (res,), False, cst.multipliers, ccorr.peaks), history

    k = len(spec.singular)
    x = np.array([peaks.rho2, peaks.rho3][:k])

    def evaluate(xv):
        pk = PeakConfiguration(*(list(xv) + [0.0] * (2 - k)), spec.eps)
        corr, st = _projected(spec, pk, grids, tol=tol)
        return corr, st, np.array(st.multipliers)

    corr, st, m = evaluate(x)
    history = [(*x, float(np.max(np.abs(m))))]
    jac = None
    dx = 0.02 * spec.eps * np.ones(k)
    for _ in range(max_outer):
        if np.max(np.abs(m)) <= tol:
            break
        if jac is None:
            # finite-difference start, one column per component
            jac = np.zeros((k, k))
            for col in range(k):
                xp = x.copy()
                xp[col] += dx[col]
                jac[:, col] = (evaluate(xp)[2] - m) / dx[col]
        step = -np.linalg.solve(jac, m)
        limit = 0.5 * spec.eps  # at most half a bump width per update
        step *= min(1.0, limit / max(np.max(np.abs(step)), 1e-300))
        xn = x + step
        corr, st, mn = evaluate(xn)
        dm = mn - m
        jac = jac + np.outer(dm - jac @ step, step) / float(step @ step)
        x, m = xn, mn
        history.append((*x, float(np.max(np.abs(m)))))
        if np.max(np.abs(step)) <= 1e-13 * np.max(x):
            break
    else:
        raise MaxIterations(f"peak location did not settle (multiplier {np.max(np.abs(m)):.3e})")
    return corr, st, tuple(history)


def verify(spec: ProblemSpec, peaks: PeakConfiguration, n: int = 256, nx: int = 256, tol: float = 1e-9, max_iter: int = 40, predicted: dict | None = None) -> SweepPoint:
    """Solve the full system starting from the approximate solution at ``peaks``.

    The peaks are first moved to where the projected multipliers vanish
    (``locate``); an unprojected Newton solve then polishes that state to
    ``tol``.  Unprojected Newton straight from the approximate solution tends
    to stall: the step along the near-kernel translation is far outside the
    range where the linearization holds.
    """
    start = time.perf_counter()
    corr, st, outer = locate(spec, peaks, n, nx, tol)
    state = newton_solve(corr.system, st.flat(), tol, max_iter)
    state = SolveState(state.spec, state.fields, state.iterations + st.iterations, st.history + state.history[1:], True, (), corr.peaks)
    pred = predicted or {2: peaks.rho2, **({3: peaks.rho3} if 3 in spec.singular else {})}
    return SweepPoint(state, extract_peaks(state, pred), corr, outer, time.perf_counter() - start)


def sweep(spec: ProblemSpec, constants: ReducedConstants, eps_list, mode: str = "two-eq", n: int = 256, nx: int = 256, rel_delta: float = 0.4, warm_start: bool = True, tol: float = 1e-9) -> list:
    """eps continuation.  Each point starts from the reduced prediction or, with
    ``warm_start``, from the previous located peaks rescaled by eps|ln eps|."""
    out = []
    prev = None
    for e in eps_list:
        s = spec.replace(eps=e)
        pred = peaks = predicted_peaks(s, constants, mode, rel_delta=rel_delta)
        if warm_start and prev is not None:
            # start from the previous located peaks rescaled to the new eps
            scale = e * abs(math.log(e)) / (prev.report.eps * abs(math.log(prev.report.eps)))
            p = prev.corrections.peaks
            peaks = PeakConfiguration(p.rho2 * scale, p.rho3 * scale, e)
        point = verify(s, peaks, n, nx, tol, predicted={2: pred.rho2, **({3: pred.rho3} if pred.rho3 else {})})
        out.append(point)
        prev = point
    return out


def projected_multipliers(spec: ProblemSpec, peaks: PeakConfiguration, n: int = 256, nx: int = 256, tol: float = 1e-9) -> tuple:
    """(c2[, c3]) of the projected solve with the peaks held at ``peaks``."""
    corr = build_corrections(spec, peaks, n, nx)
    kernels = {i: corr.ansatz.bumps[i].kernel for i in spec.singular}
    state = newton_solve(corr.system, corr.state(), tol, kernels=kernels)
    return state.multipliers
