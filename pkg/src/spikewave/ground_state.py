"""Radial ground states of -U'' - ((N-1)/r) U' + V(r) U = mu U^3.

The constant-potential case V = lam gives the scalar soliton U_{lam,mu};
a radial polynomial V is used for the limit profile of the first
component.  Both are computed by shooting on U(0) with bisection and an
adaptive embedded Runge-Kutta integrator (Dormand-Prince 8(5,3)).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import ode, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh_tridiagonal

from .errors import DegenerateGroundState, NoDecayingBranch, ToleranceNotReached

R_START = 1e-6
TAIL_LEVEL = 1e-6
DEFAULT_K = 4000


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Tabulated positive radial ground state with an analytic tail.

    For ``r > r_tail`` the profile is ``c0 * exp(-sqrt(lam) r) * r**(-(N-1)/2)``.
    When ``potential`` is set (radial polynomial coefficients of V in r**2),
    ``lam`` is the local value V(r_tail) used only to extrapolate the tail.
    """

    dim: int
    lam: float
    mu: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    r_tail: float
    c0: float
    resid_tol: float
    potential: tuple | None = None
    _spline: CubicHermiteSpline = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicHermiteSpline(self.r, self.u, self.du))

    @property
    def height(self):
        return float(self.u[0])

    @property
    def rate(self):
        return math.sqrt(self.lam)

    def __call__(self, r):
        return evaluate_profile(self, r)

    def derivative(self, r):
        return evaluate_derivative(self, r)

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        return self.c0 * np.exp(-self.rate * r) * r ** (-(self.dim - 1) / 2.0)

    def potential_at(self, r):
        if self.potential is None:
            return np.full_like(np.asarray(r, dtype=float), self.lam)
        return _poly_potential(self.potential, r)


def _poly_potential(coeffs, r):
    r2 = np.asarray(r, dtype=float) ** 2
    out = np.zeros_like(r2)
    for k, c in enumerate(coeffs):
        out = out + c * r2**k
    return out


def evaluate_profile(p: RadialProfile, r):
    """Profile value at radius ``r`` (scalar or array)."""
    r = np.abs(np.asarray(r, dtype=float))
    inside = r <= p.r_tail
    out = np.empty_like(r)
    out[inside] = p._spline(r[inside])
    rt = r[~inside]
    out[~inside] = p.tail(rt)
    return out if out.ndim else float(out)


def evaluate_derivative(p: RadialProfile, r):
    """Radial derivative U'(r); the tail branch is differentiated analytically."""
    r = np.abs(np.asarray(r, dtype=float))
    inside = r <= p.r_tail
    out = np.empty_like(r)
    out[inside] = p._spline(r[inside], 1)
    rt = r[~inside]
    out[~inside] = -(p.rate + (p.dim - 1) / (2.0 * rt)) * p.tail(rt)
    return out if out.ndim else float(out)


def _start(dim, v0, mu, u0):
    # series U(r) = U(0) + (V(0) U(0) - mu U(0)^3) r^2 / (2N) + O(r^4)
    c = (v0 * u0 - mu * u0**3) / (2.0 * dim)
    return [u0 + c * R_START**2, 2.0 * c * R_START]


def _make_integrator(dim, pot, mu, rtol, atol):
    nm1 = dim - 1.0

    def rhs(r, y):
        return [y[1], -nm1 / r * y[1] + pot(r) * y[0] - mu * y[0] ** 3]

    return ode(rhs).set_integrator("dop853", rtol=rtol, atol=atol, nsteps=10**6)


def _classify(dim, pot, mu, u0, r_max, rtol):
    """+1 if the trajectory crosses zero (overshoot), -1 if it turns back up."""
    solver = _make_integrator(dim, pot, mu, rtol, 1e-15 * u0)
    solver.set_initial_value(_start(dim, pot(0.0), mu, u0), R_START)
    verdict = [0]

    def watch(r, y):
        if y[0] < 0.0:
            verdict[0] = 1
            return -1
        if y[1] > 0.0 or y[0] > 10.0 * u0:
            verdict[0] = -1
            return -1
        return 0

    solver.set_solout(watch)
    solver.integrate(r_max)
    return verdict[0]


def _shoot(dim, pot, mu, scale, r_max, rtol):
    lo, hi = 0.1 * scale, 20.0 * scale
    if _classify(dim, pot, mu, lo, r_max, rtol) != -1 or _classify(dim, pot, mu, hi, r_max, rtol) != 1:
        raise NoDecayingBranch(
            f"initial heights [{lo:g}, {hi:g}] do not bracket a decaying solution"
        )
    while hi - lo > 4 * np.spacing(hi):
        mid = 0.5 * (lo + hi)
        v = _classify(dim, pot, mu, mid, r_max, rtol)
        if v == 1:
            hi = mid
        elif v == -1:
            lo = mid
        else:
            # neither event before r_max: the trajectory is the decaying one
            lo = hi = mid
            break
    return 0.5 * (lo + hi)


def _rhs_factory(dim, pot, mu):
    nm1 = dim - 1.0

    def rhs(r, y):
        return [y[1], -nm1 / r * y[1] + pot(r) * y[0] - mu * y[0] ** 3]

    return rhs


def _forward_to_level(dim, pot, mu, u0, level, r_max, rtol):
    """Integrate outward from the origin until U drops below ``level``; dense output."""
    rhs = _rhs_factory(dim, pot, mu)

    def hit(r, y):
        return y[0] - level

    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(
        rhs,
        (R_START, r_max),
        _start(dim, pot(0.0), mu, u0),
        method="DOP853",
        rtol=rtol,
        atol=1e-15 * u0,
        events=hit,
        dense_output=True,
    )
    if not sol.t_events[0].size:
        raise NoDecayingBranch("trajectory left the decaying branch before the matching level")
    return sol, float(sol.t_events[0][0])


def _inward(dim, pot, mu, r_match, u_match, r_far, rtol):
    """Integrate the decaying tail inward from r_far (stable direction).

    Starts from the linear asymptotics with a 1/r correction and rescales so
    that U(r_match) equals the value of the outward solution; repeated so the
    cubic term sees the final amplitude.
    """
    rhs = _rhs_factory(dim, pot, mu)
    kap = math.sqrt(pot(r_far))
    nu = (dim - 1) / 2.0
    corr = (4 * nu * nu - 1) / (8.0 * kap) if dim == 2 else 0.0
    g = 1.0 + (-corr / r_far if dim == 2 else 0.0)
    dg = corr / r_far**2 if dim == 2 else 0.0
    base = math.exp(-kap * r_far) * r_far**-nu
    amp = 1.0
    for it in range(4):
        y0 = [amp * base * g, amp * base * (dg - (kap + nu / r_far) * g)]
        sol = solve_ivp(rhs, (r_far, r_match), y0, method="DOP853", rtol=rtol, atol=1e-30, dense_output=True)
        if it == 3:
            return sol
        amp *= u_match / sol.y[0, -1]


def _tabulate(outer_sol, inner_sol, r_match, grid, u0, dim, pot, mu):
    u = np.empty_like(grid)
    du = np.empty_like(grid)
    u[0], du[0] = u0, 0.0
    c = (pot(0.0) * u0 - mu * u0**3) / (2.0 * dim)
    tiny = (grid > 0) & (grid <= R_START)
    u[tiny], du[tiny] = u0 + c * grid[tiny] ** 2, 2 * c * grid[tiny]
    a = (grid > R_START) & (grid <= r_match)
    u[a], du[a] = outer_sol.sol(grid[a])
    b = grid > r_match
    u[b], du[b] = inner_sol.sol(grid[b])
    return u, du


def _radial_grid(length_scale, r_end, k):
    k_geo = max(k // 100, 10)
    h = r_end / (k - k_geo)
    inner = np.geomspace(1e-4 * length_scale, h, k_geo, endpoint=False)
    outer = np.linspace(h, r_end, k - k_geo)
    return np.concatenate(([0.0], inner, outer))


def _ode_residual_fast(dim, r, u, du, v, mu):
    # vectorized 5-point derivative of U'; weights computed per node
    k = np.arange(2, r.size - 2)
    idx = k[:, None] + np.arange(-2, 3)[None, :]
    x = r[idx] - r[k][:, None]
    # solve the small Vandermonde systems for the first-derivative weights
    V = np.stack([x**p for p in range(5)], axis=1)  # (n, 5 powers, 5 points)
    rhs = np.zeros((k.size, 5))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0]
    d2 = np.einsum("ij,ij->i", w, du[idx])
    res = np.zeros_like(r)
    res[k] = -d2 - (dim - 1) / r[k] * du[k] + v[k] * u[k] - mu * u[k] ** 3
    return res


def _build(dim, pot, mu, scale, length_scale, tol, k, potential=None, lam=None):
    r_max = 60.0 * length_scale
    rtol = 1e-13
    u0 = _shoot(dim, pot, mu, scale, r_max, rtol)
    # the outward trajectory is trusted down to 1e-3 U(0); the rest of the tail
    # comes from the inward integration, where the decaying mode is stable
    outer, r_match = _forward_to_level(dim, pot, mu, u0, 1e-3 * u0, r_max, rtol)
    u_match = float(outer.sol(r_match)[0])
    kap = math.sqrt(pot(r_match))
    r_far = r_match + 12.0 / kap
    inner = _inward(dim, pot, mu, r_match, u_match, r_far, rtol)
    probe = np.linspace(r_match, r_far, 4001)
    vals = inner.sol(probe)[0]
    below = np.nonzero(vals < TAIL_LEVEL * u0)[0]
    if not below.size:
        raise NoDecayingBranch("tail never reaches the switch level")
    j = below[0]
    r_tail = float(np.interp(TAIL_LEVEL * u0, [vals[j], vals[j - 1]], [probe[j], probe[j - 1]]))
    target = tol * max(1.0, abs(pot(0.0)) * u0)
    resid = math.inf
    for _ in range(3):
        grid = _radial_grid(length_scale, r_tail, k)
        u, du = _tabulate(outer, inner, r_match, grid, u0, dim, pot, mu)
        v = np.array([pot(x) for x in grid]) if potential is not None else np.full_like(grid, lam)
        resid = float(np.max(np.abs(_ode_residual_fast(dim, grid, u, du, v, mu))))
        if resid <= target:
            break
        k *= 2
    else:
        raise ToleranceNotReached(f"ODE residual {resid:.3e} above target {target:.3e}")
    if np.any(u <= 0) or np.any(np.diff(u) >= 0):
        raise NoDecayingBranch("tabulated profile is not positive and strictly decreasing")
    tail_lam = lam if potential is None else float(pot(r_tail))
    rate = math.sqrt(tail_lam)
    sel = grid >= 0.7 * r_tail
    logs = np.log(u[sel] * grid[sel] ** ((dim - 1) / 2.0)) + rate * grid[sel]
    if potential is None:
        c0 = float(np.exp(np.mean(logs)))
    else:
        # match the exponential extrapolation to the last tabulated value
        c0 = float(np.exp(logs[-1]))
    return RadialProfile(
        dim=dim,
        lam=tail_lam,
        mu=mu,
        r=grid,
        u=u,
        du=du,
        r_tail=r_tail,
        c0=c0,
        resid_tol=max(resid, abs(du[0])),
        potential=None if potential is None else tuple(potential),
    )


def solve_ground_state(dim: int, lam: float, mu: float, tol: float = 1e-8, k: int = DEFAULT_K) -> RadialProfile:
    """Positive decaying radial solution of -U'' - (N-1)/r U' + lam U = mu U^3.

    Parameters
    ----------
    dim : int
        Space dimension N in {1, 2, 3}.
    lam, mu : float
        Positive frequency and nonlinearity coefficient.
    tol : float
        Target ODE residual, in (0, 1e-4].
    k : int
        Number of grid nodes of the tabulation.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    if not (lam > 0 and mu > 0):
        raise ValueError("lam and mu must be positive")
    if not (0 < tol <= 1e-4):
        raise ValueError("tol must lie in (0, 1e-4]")
    lam, mu = float(lam), float(mu)
    return _build(
        dim,
        lambda r: lam,
        mu,
        math.sqrt(lam / mu),
        1.0 / math.sqrt(lam),
        tol,
        k,
        lam=lam,
    )


def solve_radial_potential(dim, coeffs, mu, tol=1e-8, k=DEFAULT_K) -> RadialProfile:
    """Ground state for the radial potential V(r) = sum_k coeffs[k] r^(2k)."""
    coeffs = tuple(float(c) for c in coeffs)
    v0 = coeffs[0]
    if v0 <= 0 or any(c < 0 for c in coeffs[1:]):
        raise ValueError("potential must satisfy V(0) > 0 and be nondecreasing")

    def pot(r):
        r2 = r * r
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * r2 + c
        return acc

    return _build(dim, pot, float(mu), math.sqrt(v0 / mu), 1.0 / math.sqrt(v0), tol, k, potential=coeffs)


def profile_mass(p: RadialProfile) -> float:
    """Integral of U^2 over R^N (radial quadrature plus the analytic tail)."""
    from scipy.integrate import quad

    area = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[p.dim]
    inner = np.trapezoid(p.u**2 * p.r ** (p.dim - 1), p.r)
    outer, _ = quad(lambda s: p.tail(s) ** 2 * s ** (p.dim - 1), p.r_tail, np.inf)
    return area * (inner + outer)


def decay_plateau(p: RadialProfile, decades: float = 1.0):
    """Return (r, U e^{sqrt(lam) r} r^{(N-1)/2}) over the last decade of decay before r_tail."""
    level = p.u[0] * TAIL_LEVEL * 10.0**decades
    sel = (p.u <= level) & (p.r > 0)
    r = p.r[sel]
    return r, p.u[sel] * np.exp(p.rate * r) * r ** ((p.dim - 1) / 2.0)


def _radial_operator(p: RadialProfile, mode: int, m: int, r_max: float):
    """Symmetric tridiagonal finite-volume discretization of the linearized operator."""
    n = p.dim
    h = r_max / m
    rc = (np.arange(m) + 0.5) * h
    rf = np.arange(m + 1) * h
    wf = rf ** (n - 1) if n > 1 else np.ones_like(rf)
    wc = rc ** (n - 1) if n > 1 else np.ones_like(rc)
    if n == 1 and mode == 1:
        # odd functions: Dirichlet at the origin through a ghost cell
        left = np.zeros(m)
        left[0] = wf[0] / h**2
    else:
        left = np.zeros(m)
        wf = wf.copy()
        wf[0] = 0.0
    ang = mode * (mode + n - 2) / rc**2 if n > 1 else 0.0
    pot = p.potential_at(rc) - 3.0 * p.mu * evaluate_profile(p, rc) ** 2 + ang
    diag = (wf[:-1] + wf[1:]) / h**2 / wc + pot + (left / wc if n == 1 and mode == 1 else 0.0)
    off = -wf[1:-1] / h**2 / np.sqrt(wc[:-1] * wc[1:])
    return rc, diag, off


def _smallest(p, mode, m, r_max):
    rc, d, e = _radial_operator(p, mode, m, r_max)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 3))
    j = int(np.argmin(np.abs(vals)))
    w = rc ** ((p.dim - 1) / 2.0) if p.dim > 1 else np.ones_like(rc)
    return vals[j], rc, vecs[:, j] / w


@dataclass(frozen=True)
class SpectralReport:
    mode0: float
    mode1: float
    mode0_raw: tuple
    mode1_raw: tuple
    cosine: float


def kernel_check(p: RadialProfile, cells: int = 4000, r_max: float | None = None) -> SpectralReport:
    """Smallest-magnitude eigenvalues of the radial linearization in modes 0 and 1.

    Eigenvalues are computed at two resolutions and Richardson-extrapolated
    (the discretization is second order).  ``cosine`` compares the mode-1
    eigenfunction with U'.
    """
    if r_max is None:
        r_max = max(p.r_tail, 20.0 / p.rate)
    out = {}
    for mode in (0, 1):
        coarse, _, _ = _smallest(p, mode, cells, r_max)
        fine, rc, vec = _smallest(p, mode, 2 * cells, r_max)
        out[mode] = ((4.0 * fine - coarse) / 3.0, (coarse, fine), rc, vec)
    rc, vec = out[1][2], out[1][3]
    du = evaluate_derivative(p, rc)
    wt = rc ** (p.dim - 1) if p.dim > 1 else np.ones_like(rc)
    cos = abs(np.sum(wt * vec * du)) / math.sqrt(np.sum(wt * vec**2) * np.sum(wt * du**2))
    rep = SpectralReport(
        mode0=float(abs(out[0][0])),
        mode1=float(abs(out[1][0])),
        mode0_raw=out[0][1],
        mode1_raw=out[1][1],
        cosine=float(cos),
    )
    if rep.mode0 < 10.0 * rep.mode1:
        raise DegenerateGroundState(
            f"even-mode eigenvalue {rep.mode0:.3e} not separated from kernel {rep.mode1:.3e}"
        )
    return rep


def profile_to_csv(p: RadialProfile) -> str:
    buf = io.StringIO()
    buf.write(f"# N={p.dim} lambda={p.lam!r} mu={p.mu!r} C0={p.c0!r} R_tail={p.r_tail!r}\n")
    buf.write("r,U,dU\n")
    for a, b, c in zip(p.r, p.u, p.du):
        buf.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")
    return buf.getvalue()


def profile_from_csv(text: str) -> RadialProfile:
    lines = text.splitlines()
    meta = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    return RadialProfile(
        dim=int(meta["N"]),
        lam=float(meta["lambda"]),
        mu=float(meta["mu"]),
        r=data[:, 0],
        u=data[:, 1],
        du=data[:, 2],
        r_tail=float(meta["R_tail"]),
        c0=float(meta["C0"]),
        resid_tol=float("nan"),
    )
