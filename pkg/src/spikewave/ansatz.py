"""Approximate solution, its correction terms and the projected error.

The approximate solution is (Y + phi1, U2eps + phi2, U3eps + phi3), where Y is
the limit profile of the first density, Ukeps are mirrored bumps on the
y-scale grid, and the phi are the linear corrections produced by the
coupling.  Everything is stored on even quadrant grids (see ``grid``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateUpsilon,
    EigensolverFailure,
    HypothesisViolation,
    NoDecayingBranch,
    NoGroundState,
    SingularLinearization,
    ToleranceNotReached,
)
from .grid import Grid, GridField
from .ground_state import RadialProfile, _smallest, solve_radial_potential
from .interaction import SmoothRadial, soliton, theta_axial, theta_integral
from .problem import ModifiedPotential, PeakConfiguration, ProblemSpec
from .system import DiscreteSystem, _poly_r2

DEGENERACY_FLOOR = 1e-3
EVEN_MODES = (0, 2, 4)
X_BOX = 10.0


# ---------------------------------------------------------------- grids


def eps_box(spec: ProblemSpec, peaks: PeakConfiguration) -> float:
    wmin = min(spec.omega_of(i) for i in spec.singular)
    return max(30.0 / math.sqrt(wmin) + peaks.rho_norm / spec.eps, 40.0)


def make_grids(spec: ProblemSpec, peaks: PeakConfiguration, n: int = 256, nx: int = 256, x_length: float | None = None):
    """(x-grid, y-grid) for a configuration."""
    if spec.dim != 2:
        raise HypothesisViolation("grid solves are implemented for N = 2 only")
    egrid = Grid.box(eps_box(spec, peaks), n, "eps")
    lx = x_length if x_length is not None else X_BOX / math.sqrt(spec.v[0])
    return Grid.box(lx, nx, "x"), egrid


# ---------------------------------------------------------------- limit profile


@lru_cache(maxsize=None)
def _upsilon_profile(dim, v, mu1):
    try:
        return solve_radial_potential(dim, v, mu1)
    except (NoDecayingBranch, ToleranceNotReached) as exc:
        raise NoGroundState(str(exc)) from exc


def even_spectrum(profile: RadialProfile, modes=EVEN_MODES, cells: int = 4000) -> dict:
    """Smallest-magnitude eigenvalue of the radial linearization per angular mode."""
    r_max = max(profile.r_tail, 20.0 / profile.rate)
    return {m: float(_smallest(profile, m, cells, r_max)[0]) for m in modes}


def limit_profile(spec: ProblemSpec, check: bool = True) -> RadialProfile:
    p = _upsilon_profile(spec.dim, spec.v, spec.mu[0])
    if check:
        spec_vals = even_spectrum(p)
        worst = min(abs(v) for v in spec_vals.values())
        if worst < DEGENERACY_FLOOR:
            raise DegenerateUpsilon(f"even-space eigenvalue {worst:.3g} below {DEGENERACY_FLOOR}")
    return p


def upsilon_operator(spec: ProblemSpec, xgrid: Grid, y: np.ndarray) -> sp.csc_matrix:
    x1, x2 = xgrid.mesh()
    v = _poly_r2(spec.v, (x1 * x1 + x2 * x2).ravel())
    return (-xgrid.laplacian + sp.diags(v - 3.0 * spec.mu[0] * np.ravel(y) ** 2)).tocsc()


def _factor(mat, what):
    try:
        lu = spla.splu(sp.csc_matrix(mat), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SingularLinearization(f"{what}: {exc}") from exc
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-13 * diag.max():
        raise SingularLinearization(f"{what}: pivot ratio {diag.min() / diag.max():.2e}")
    return lu


@dataclass(frozen=True, eq=False)
class UpsilonSolution:
    profile: RadialProfile
    field: GridField
    residual: float
    spectrum: dict


def solve_limit_profile_upsilon(spec: ProblemSpec, xgrid: Grid, tol: float = 1e-11) -> UpsilonSolution:
    """Radial ground state of -Lap Y + V Y = mu1 Y^3, tabulated and polished on the grid.

    The tabulated profile is refined by Newton on the discrete equation so the
    grid field solves the discrete problem to ``tol``; the radial solution
    itself carries its own ODE residual (``profile.resid_tol``).
    """
    p = limit_profile(spec)
    x1, x2 = xgrid.mesh()
    y = p(np.hypot(x1, x2)).ravel()
    v = _poly_r2(spec.v, (x1 * x1 + x2 * x2).ravel())
    mu = spec.mu[0]
    lap = xgrid.laplacian
    res = np.inf
    for _ in range(12):
        f = -(lap @ y) + v * y - mu * y**3
        res = float(np.max(np.abs(f)))
        if res <= tol * p.height:
            break
        y = y - _factor(upsilon_operator(spec, xgrid, y), "limit profile").solve(f)
    else:
        raise NoGroundState(f"discrete limit profile did not converge (residual {res:.2e})")
    return UpsilonSolution(p, GridField(xgrid, y, 1, "upsilon"), res, even_spectrum(p))


# ---------------------------------------------------------------- ansatz


@dataclass(frozen=True, eq=False)
class Bumps:
    """U(y + c e) (``plus``) and U(y - c e) (``minus``) with their axis derivatives."""

    component: int
    c: float
    axis: int
    radial: SmoothRadial
    plus: np.ndarray
    minus: np.ndarray
    dplus: np.ndarray
    dminus: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.plus + self.minus

    @property
    def kernel(self) -> np.ndarray:
        return self.dplus - self.dminus


def tabulate_bumps(profile: RadialProfile, grid: Grid, c: float, axis: int, component: int) -> Bumps:
    rad = SmoothRadial(profile)
    y1, y2 = grid.mesh()
    along, across = (y1, y2) if axis == 0 else (y2, y1)
    out = []
    for shift in (c, -c):
        a = along + shift
        r = np.hypot(a, across)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosine = np.where(r > 0, a / r, 0.0)
        out.append((rad(r), rad.d(r) * cosine))
    return Bumps(component, c, axis, rad, out[0][0], out[1][0], out[0][1], out[1][1])


@dataclass(frozen=True, eq=False)
class Ansatz:
    spec: ProblemSpec
    peaks: PeakConfiguration
    grid: Grid
    bumps: dict

    def field(self, i: int) -> GridField:
        return GridField(self.grid, self.bumps[i].total, i, f"U{i}eps")

    def kernel(self, i: int) -> GridField:
        return GridField(self.grid, self.bumps[i].kernel, i, "Z" if i == 2 else "Y")


def component_profile(spec: ProblemSpec, i: int) -> RadialProfile:
    return soliton(spec.dim, spec.omega_of(i), spec.mu[i - 1])


def build_ansatz(spec: ProblemSpec, peaks: PeakConfiguration, grid: Grid, profiles: dict | None = None) -> Ansatz:
    """Mirrored bumps U_i(y -+ P_i/eps) and the kernel fields Z (d/dy1) and Y (d/dy2)."""
    profiles = profiles or {i: component_profile(spec, i) for i in spec.singular}
    bumps = {2: tabulate_bumps(profiles[2], grid, peaks.c2, 0, 2)}
    if 3 in spec.singular:
        if peaks.rho3 <= 0:
            raise ValueError("three-component mode needs rho3 > 0")
        bumps[3] = tabulate_bumps(profiles[3], grid, peaks.c3, 1, 3)
    return Ansatz(spec, peaks, grid, bumps)


# ---------------------------------------------------------------- corrections


def _coupled(spec, arr):
    return arr if spec.kind == "lv" else arr * arr


def solve_eta(spec: ProblemSpec, upsilon: GridField, sampled: np.ndarray, i: int, lu=None) -> GridField:
    """-Lap eta + (V - 3 mu1 Y^2) eta = Y * U_ieps(x/eps)  (squared bump in GP mode).

    ``sampled`` is the bump already read onto the x-grid.
    """
    rhs = upsilon.flat * _coupled(spec, np.ravel(sampled))
    if not np.any(rhs):
        return GridField(upsilon.grid, np.zeros(upsilon.grid.size), 1, f"eta{i}")
    lu = lu or _factor(upsilon_operator(spec, upsilon.grid, upsilon.flat), "eta operator")
    return GridField(upsilon.grid, lu.solve(rhs), 1, f"eta{i}")


def assemble_phi1(spec: ProblemSpec, eta2: GridField, eta3: GridField | None) -> GridField:
    vals = spec.a(1, 2) * eta2.values
    if eta3 is not None:
        vals = vals + spec.a(1, 3) * eta3.values
    return GridField(eta2.grid, vals, 1, "phi1")


def phi_operator(spec: ProblemSpec, bumps: Bumps, grid: Grid):
    i = bumps.component
    pot = spec.omega_of(i) - 3.0 * spec.mu[i - 1] * (bumps.plus**2 + bumps.minus**2)
    return (-grid.laplacian + sp.diags(pot.ravel())).tocsc()


def solve_phi_i(spec: ProblemSpec, ansatz: Ansatz, phi1_0: float, i: int, upsilon0: float) -> GridField:
    """-Lap phi + (omega_i - 3 mu_i (U_+^2 + U_-^2)) phi = a_i1 phi1(0) U_ieps
    (right side 2 beta_i1 Y(0) phi1(0) U_ieps in GP mode)."""
    b = ansatz.bumps[i]
    scale = spec.a(i, 1) * phi1_0 * (1.0 if spec.kind == "lv" else 2.0 * upsilon0)
    if scale == 0.0:
        return GridField(ansatz.grid, np.zeros(ansatz.grid.size), i, f"phi{i}")
    lu = _factor(phi_operator(spec, b, ansatz.grid), f"phi{i} operator")
    return GridField(ansatz.grid, lu.solve(scale * b.total.ravel()), i, f"phi{i}")


@dataclass(frozen=True, eq=False)
class Corrections:
    spec: ProblemSpec
    peaks: PeakConfiguration
    potential: ModifiedPotential
    system: DiscreteSystem
    upsilon: UpsilonSolution
    ansatz: Ansatz
    eta: dict
    phi1: GridField
    phi: dict
    extra: dict = field(default_factory=dict)

    @property
    def xgrid(self) -> Grid:
        return self.system.xgrid

    @property
    def egrid(self) -> Grid:
        return self.system.egrid

    def state(self) -> list:
        """The approximate solution as flat arrays (u1, u2[, u3])."""
        out = [self.upsilon.field.flat + self.phi1.flat]
        for i in self.spec.singular:
            out.append(self.ansatz.bumps[i].total.ravel() + self.phi[i].flat)
        return out


def build_corrections(
    spec: ProblemSpec,
    peaks: PeakConfiguration,
    n: int = 256,
    nx: int = 256,
    x_length: float | None = None,
    grids=None,
) -> Corrections:
    xgrid, egrid = grids or make_grids(spec, peaks, n, nx, x_length)
    ups = solve_limit_profile_upsilon(spec, xgrid)
    potential = ModifiedPotential(spec, ups.profile)
    system = DiscreteSystem(spec, potential, xgrid, egrid)
    ansatz = build_ansatz(spec, peaks, egrid)
    lu = _factor(upsilon_operator(spec, xgrid, ups.field.flat), "eta operator")
    eta = {i: solve_eta(spec, ups.field, system.to_x @ ansatz.bumps[i].total.ravel(), i, lu) for i in spec.singular}
    phi1 = assemble_phi1(spec, eta[2], eta.get(3))
    phi = {i: solve_phi_i(spec, ansatz, phi1.origin, i, ups.field.origin) for i in spec.singular}
    return Corrections(spec, peaks, potential, system, ups, ansatz, eta, phi1, phi)


# ---------------------------------------------------------------- error terms


def error_terms(corr: Corrections) -> dict:
    """Every term of the error E = -(residual at the approximate solution), by name.

    Component 1 is exact at the discrete level; components 2 and 3 leave out
    only the truncation error of the Laplacian applied to the bumps.
    """
    s, sysm = corr.spec, corr.system
    gp = s.kind == "gp"
    y = corr.upsilon.field.flat
    p1 = corr.phi1.flat
    bumps = {i: corr.ansatz.bumps[i] for i in s.singular}
    U = {i: bumps[i].total.ravel() for i in s.singular}
    ph = {i: corr.phi[i].flat for i in s.singular}
    out = {}

    t1 = {"cubic": 3.0 * s.mu[0] * y * p1**2 + s.mu[0] * p1**3}
    for j in s.singular:
        Sj, Pj = sysm.to_x @ U[j], sysm.to_x @ ph[j]
        a = s.a(1, j)
        if gp:
            t1[f"source{j}"] = a * p1 * Sj**2
            t1[f"correction{j}"] = a * (y + p1) * (2.0 * Sj * Pj + Pj**2)
        else:
            t1[f"source{j}"] = a * p1 * Sj
            t1[f"correction{j}"] = a * (y + p1) * Pj
    out[1] = t1

    ye, p1e = sysm.to_eps @ y, sysm.to_eps @ p1
    y0, p10 = corr.upsilon.field.origin, corr.phi1.origin
    for i in s.singular:
        b = bumps[i]
        up, um = b.plus.ravel(), b.minus.ravel()
        Ui, Pi, mu = U[i], ph[i], s.mu[i - 1]
        a = s.a(i, 1)
        omega_field = sysm.W[i] - a * _coupled(s, ye)
        t = {
            "self": 3.0 * mu * (up**2 * um + up * um**2),
            "self_phi": 6.0 * mu * up * um * Pi,
            "phi_quadratic": 3.0 * mu * Ui * Pi**2 + mu * Pi**3,
            "potential": (s.omega_of(i) - omega_field) * (Ui + Pi),
        }
        if gp:
            t["first_shift"] = 2.0 * a * Ui * (ye * p1e - y0 * p10)
            t["first_phi"] = 2.0 * a * ye * p1e * Pi + a * p1e**2 * (Ui + Pi)
        else:
            t["first_shift"] = a * Ui * (p1e - p10)
            t["first_phi"] = a * p1e * Pi
        for j in s.singular:
            if j == i:
                continue
            if gp:
                t["cross"] = s.a(i, j) * (Ui + Pi) * (U[j] + ph[j]) ** 2
            else:
                t["cross"] = s.beta * s.a(i, j) * (Ui + Pi) * (U[j] + ph[j])
        out[i] = t
    return out


def error_field(corr: Corrections, terms: dict | None = None) -> list:
    terms = terms or error_terms(corr)
    return [sum(terms[k].values()) for k in sorted(terms)]


def tau_epsilon(spec: ProblemSpec, peaks: PeakConfiguration, eta_eps: float = 0.0) -> float:
    e = spec.eps
    val = e * e * math.log(e) ** 2
    for i, c in ((2, peaks.c2), (3, peaks.c3)):
        if i in spec.singular:
            val += math.exp(-2.0 * math.sqrt(spec.omega_of(i)) * c) * c ** (-(spec.dim - 1) / 2.0)
    return val + abs(spec.beta) * eta_eps


# ---------------------------------------------------------------- projections


def b_radial(profile: RadialProfile) -> float:
    """-int y1^2 U U'/|y| dy by radial quadrature (exact tail beyond the table)."""
    import warnings

    from scipy.integrate import IntegrationWarning, quad

    n = profile.dim
    sphere = {2: 2.0 * math.pi, 3: 4.0 * math.pi}[n]
    rad = SmoothRadial(profile)
    f = lambda r: r**n * rad(r) * rad.d(r)
    with warnings.catch_warnings():
        # epsrel=1e-12 sits at roundoff level; quad says so but the value is fine
        warnings.simplefilter("ignore", IntegrationWarning)
        inner, _ = quad(f, 0.0, profile.r_tail, limit=400, epsabs=0.0, epsrel=1e-12)
        outer, _ = quad(f, profile.r_tail, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
    return -sphere / n * (inner + outer)


def b_planar(profile: RadialProfile, half_width: float | None = None, panels: int = 48, order: int = 24) -> float:
    """The same constant by a Cartesian tensor Gauss rule over a square (N = 2)."""
    if profile.dim != 2:
        raise ValueError("planar quadrature is for N = 2")
    half_width = half_width or 40.0 / profile.rate
    rad = SmoothRadial(profile)
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, half_width, panels + 1)
    mid, hw = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    x = (mid[:, None] + hw[:, None] * g[None, :]).ravel()
    wx = (hw[:, None] * w[None, :]).ravel()
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    r = np.hypot(X1, X2)
    vals = -X1**2 * rad(r) * rad.d(r) / r
    return float(4.0 * wx @ vals @ wx)


def self_projection(profile: RadialProfile, mu: float, c: float) -> float:
    """3 mu int (U_+^2 U_- + U_+ U_-^2) Z for bumps at +-c, via two-body integrals."""
    d = 2.0 * c
    return -2.0 * mu * (theta_axial(1, 3, profile, profile, d) + 1.5 * theta_axial(2, 2, profile, profile, d))


def fit_c(profile: RadialProfile, mu: float, c: float) -> float:
    lead = math.exp(-2.0 * profile.rate * c) * c ** (-(profile.dim - 1) / 2.0)
    return -self_projection(profile, mu, c) / (2.0 * mu * lead)


def cross_projection(spec: ProblemSpec, peaks: PeakConfiguration, i: int) -> float:
    """Two-body value of int U_ieps U_jeps^p K_i (p = 1 LV, 2 GP), K the kernel field of i."""
    j = 5 - i
    ui, uj = component_profile(spec, i), component_profile(spec, j)
    power = 1 if spec.kind == "lv" else 2
    zeta, xi = peaks.zeta, peaks.xi
    ell = i - 2
    th = lambda v: theta_integral(power, 2, uj, ui, v, ell)
    if i == 2:
        return 0.5 * (th(zeta) + th(-xi) - th(xi) - th(-zeta))
    return 0.5 * (th(-zeta) + th(-xi) - th(xi) - th(zeta))


@dataclass(frozen=True)
class ProjectionReport:
    component: int
    numeric: float
    terms: dict
    leading: dict
    predicted: float
    b: float
    c: float

    @property
    def gap(self) -> float:
        return abs(self.numeric - self.predicted) / abs(self.predicted)


def project_error(corr: Corrections, potential_scale: float = 1.0, terms: dict | None = None) -> dict:
    """Projections of E_i on the kernel fields with a term-by-term breakdown.

    The leading expansion is -d^2 omega_i(0) b eps rho_i * potential_scale
    - 2 mu_i c e^{-2 sqrt(omega_i) rho_i/eps} (rho_i/eps)^{-(N-1)/2}
    (+ the cross term when beta a_ij != 0).
    """
    s = corr.spec
    terms = terms or error_terms(corr)
    g = corr.egrid
    out = {}
    for i in s.singular:
        k = corr.ansatz.bumps[i].kernel.ravel()
        parts = {name: g.inner(val, k) for name, val in terms[i].items()}
        prof = component_profile(s, i)
        rho = corr.peaks.rho2 if i == 2 else corr.peaks.rho3
        c = rho / s.eps
        b = b_radial(prof)
        cfit = fit_c(prof, s.mu[i - 1], c)
        curv = corr.potential.curvature(i, i - 2)
        lead = {
            "potential": -curv * b * s.eps * rho * potential_scale,
            "self": -2.0 * s.mu[i - 1] * cfit * math.exp(-2.0 * prof.rate * c) * c ** (-(s.dim - 1) / 2.0),
        }
        if len(s.singular) == 2:
            j = 5 - i
            coef = s.a(i, j) if s.kind == "gp" else s.beta * s.a(i, j)
            if coef != 0.0:
                lead["cross"] = coef * cross_projection(s, corr.peaks, i)
        out[i] = ProjectionReport(i, sum(parts.values()), parts, lead, sum(lead.values()), b, cfit)
    return out


# ---------------------------------------------------------------- coercivity


@dataclass(frozen=True)
class CoercivityReport:
    projected: float
    baseline: float
    block_unprojected: float

    @property
    def ratio(self) -> float:
        return self.projected / self.baseline


class _ProjectedInverse:
    """Solves with B = P A P + shift Q Q^T, A = S J S^{-1}, from one LU of J (Woodbury)."""

    def __init__(self, jac, scale, q, shift=10.0):
        self.jac = sp.csc_matrix(jac)
        self.jt = self.jac.T.tocsc()
        self.n = self.jac.shape[0]
        self.lu = _factor(self.jac, "linearization")
        self.s = scale
        self.q = q
        k = q.shape[1]
        if k:
            aq = self.s[:, None] * (self.jac @ (q / self.s[:, None]))
            qta = (self.jt @ (q * self.s[:, None])) / self.s[:, None]
            core = q.T @ aq + shift * np.eye(k)
            self.u = np.hstack([q, aq])
            self.vt = np.vstack([-qta.T + core @ q.T, -q.T])
            self.ainv_u = self._ainv(self.u)
            self.ainvt_v = self._ainv(self.vt.T, trans=True)
            self.cap = np.eye(2 * k) + self.vt @ self.ainv_u
            self.cap_t = np.eye(2 * k) + self.u.T @ self.ainvt_v

    def _ainv(self, v, trans=False):
        s = self.s if v.ndim == 1 else self.s[:, None]
        if trans:
            return self.lu.solve(v * s, trans="T") / s
        return s * self.lu.solve(v / s)

    def solve(self, v, trans=False):
        x = self._ainv(v, trans)
        if not self.q.shape[1]:
            return x
        if trans:
            return x - self.ainvt_v @ np.linalg.solve(self.cap_t, self.u.T @ x)
        return x - self.ainv_u @ np.linalg.solve(self.cap, self.vt @ x)


def _smallest_singular(jac, scale, q) -> float:
    inv = _ProjectedInverse(jac, scale, q)
    op = spla.LinearOperator((inv.n, inv.n), matvec=lambda v: inv.solve(inv.solve(v), trans=True), dtype=float)
    try:
        lam = spla.eigsh(op, k=1, which="LA", tol=1e-6, maxiter=5000, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise EigensolverFailure(str(exc)) from exc
    return 1.0 / math.sqrt(float(lam[0]))


def _weights(corr: Corrections, blocks) -> np.ndarray:
    parts = []
    for b in blocks:
        g = corr.xgrid if b == 1 else corr.egrid
        parts.append(np.sqrt(g.weights.ravel()))
    return np.concatenate(parts)


def _kernel_basis(corr: Corrections, blocks, scale) -> np.ndarray:
    cols = []
    sizes = [corr.xgrid.size if b == 1 else corr.egrid.size for b in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    for pos, b in enumerate(blocks):
        if b == 1:
            continue
        v = np.zeros(offsets[-1])
        v[offsets[pos] : offsets[pos + 1]] = corr.ansatz.bumps[b].kernel.ravel()
        v *= scale
        cols.append(v / np.linalg.norm(v))
    return np.column_stack(cols) if cols else np.zeros((offsets[-1], 0))


def coercivity_estimate(corr: Corrections, state=None) -> CoercivityReport:
    """Smallest singular value of the linearization at the approximate solution,
    restricted to the complement of the kernel fields, in the L2 norm of the
    even quadrant quadrature.

    ``baseline`` is the same quantity for the block-diagonal part (every
    cross-density coupling block dropped); ``block_unprojected`` is the
    (2,2) block without the projection, which must see the near-kernel.
    """
    s = corr.spec
    state = corr.state() if state is None else state
    jac = corr.system.jacobian(state)
    blocks = [1, *s.singular]
    scale = _weights(corr, blocks)
    projected = _smallest_singular(jac, scale, _kernel_basis(corr, blocks, scale))

    diag = corr.system.jacobian(state, couple=False)
    sizes = [corr.xgrid.size if b == 1 else corr.egrid.size for b in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    per_block = []
    unproj = None
    for pos, b in enumerate(blocks):
        sl = slice(offsets[pos], offsets[pos + 1])
        sub = diag[sl, sl]
        sc = scale[sl]
        q = _kernel_basis(corr, [b], sc)
        per_block.append(_smallest_singular(sub, sc, q))
        if b == 2:
            unproj = _smallest_singular(sub, sc, np.zeros((sub.shape[0], 0)))
    return CoercivityReport(projected, min(per_block), unproj)
