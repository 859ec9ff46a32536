"""Cross-peak interaction integrals and their leading-order asymptotic laws.

Integrals of two radial profiles centred at distance d apart are reduced to
the half plane {(z, s): s >= 0} about the separation axis (the exact
rotational reduction; weight 2 in the plane, 2 pi s in space) and computed
with composite Gauss-Legendre panels refined until two levels agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import k0, k1

from .errors import InvalidCase, InvalidDecayClass, QuadratureStall
from .ground_state import RadialProfile, evaluate_derivative, evaluate_profile, solve_ground_state

EQ_TOL = 1e-12


@dataclass(frozen=True)
class DecayClass:
    """u(x) ~ |x|^a exp(-b |x|)."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise InvalidDecayClass(f"decay rate must be positive, got {self.b}")


@dataclass(frozen=True)
class InteractionEstimate:
    value: float
    leading: float
    case: str
    separation: float
    prefactor: float | None = None

    @property
    def ratio(self):
        return self.value / self.leading


class SmoothRadial:
    """Radial function U**power with a C^1 Bessel tail, for quadrature.

    Inside r_tail the Hermite table of the profile is used.  Beyond it the
    exact decaying solution of the linearised equation, r^{-(N-2)/2}
    K_{(N-2)/2}(sqrt(lam) r), is matched to the table value at r_tail, so the
    integrand has no jump where the table stops.
    """

    def __init__(self, profile: RadialProfile, power: int = 1):
        if power < 1:
            raise InvalidCase("powers must be >= 1")
        self.p = profile
        self.power = int(power)
        self.dim = profile.dim
        self.rate = power * profile.rate
        kap = profile.rate
        rt = profile.r_tail
        self._amp = float(profile._spline(rt)) / self._linear(rt)
        self._kap = kap

    def _linear(self, r):
        kap = self.p.rate
        if self.dim == 2:
            return k0(kap * r)
        if self.dim == 3:
            return np.exp(-kap * r) / r
        return np.exp(-kap * r)

    def _linear_d(self, r):
        kap = self.p.rate
        if self.dim == 2:
            return -kap * k1(kap * r)
        if self.dim == 3:
            return -np.exp(-kap * r) * (kap / r + 1.0 / r**2)
        return -kap * np.exp(-kap * r)

    def base(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        m = r <= self.p.r_tail
        out[m] = self.p._spline(r[m])
        out[~m] = self._amp * self._linear(r[~m])
        return out

    def base_d(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        m = r <= self.p.r_tail
        out[m] = self.p._spline(r[m], 1)
        out[~m] = self._amp * self._linear_d(r[~m])
        return out

    def __call__(self, r):
        return self.base(r) ** self.power

    def d(self, r):
        """Radial derivative of U**power."""
        b = self.base(r)
        return self.power * b ** (self.power - 1) * self.base_d(r)

    def decay_class(self):
        return DecayClass(a=-self.power * (self.dim - 1) / 2.0, b=self.rate)


def _as_radial(u):
    if isinstance(u, SmoothRadial):
        return u
    if isinstance(u, RadialProfile):
        return SmoothRadial(u, 1)
    raise TypeError("expected a RadialProfile or SmoothRadial")


@lru_cache(maxsize=None)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _panels(a, b, width, n):
    m = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, m + 1)
    x, w = _gauss(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _half_plane(integrand, dim, z_lo, z_hi, s_hi, width, n, chunk=400_000):
    z, wz = _panels(z_lo, z_hi, width, n)
    s, ws = _panels(0.0, s_hi, width, n)
    ws = ws * (2.0 if dim == 2 else 2.0 * math.pi * s)
    total = 0.0
    rows = max(1, chunk // s.size)
    for i in range(0, z.size, rows):
        zz = z[i : i + rows, None]
        vals = integrand(zz, s[None, :])
        total += float(wz[i : i + rows] @ (vals @ ws))
    return total


def _adaptive(integrand, dim, d, rate_min, rtol=1e-7, n=8, width=None, max_level=5):
    pad = 25.0 / rate_min
    z_lo, z_hi, s_hi = -pad, d + pad, pad
    if width is None:
        width = 0.5
    prev = _half_plane(integrand, dim, z_lo, z_hi, s_hi, width, n)
    for _ in range(max_level):
        width *= 0.5
        cur = _half_plane(integrand, dim, z_lo, z_hi, s_hi, width, n)
        err = abs(cur - prev)
        if err <= rtol * abs(cur) or err < 1e-300:
            return cur, err
        prev = cur
    raise QuadratureStall(f"quadrature did not settle: last change {err:.3e} vs value {cur:.3e}")


def overlap_integral(u, v, xi, rtol: float = 1e-7) -> float:
    """Integral over R^N of u(x - xi) v(x) for radial u, v (N = 2 or 3)."""
    u, v = _as_radial(u), _as_radial(v)
    if u.dim != v.dim or u.dim not in (2, 3):
        raise ValueError("profiles must share dimension 2 or 3")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = float(np.linalg.norm(xi))

    def f(z, s):
        return u(np.hypot(z - d, s)) * v(np.hypot(z, s))

    val, _ = _adaptive(f, u.dim, d, min(u.rate, v.rate), rtol=rtol)
    return val


def theta_axial(s: int, t: int, uj, ui, d: float, rtol: float = 1e-7) -> float:
    """Component of int U_j^s(x + zeta) grad U_i^t(x) dx along zeta, with |zeta| = d."""
    if s < 1 or t < 1:
        raise InvalidCase("powers must be >= 1")
    fj = SmoothRadial(uj.p if isinstance(uj, SmoothRadial) else uj, s)
    gi = SmoothRadial(ui.p if isinstance(ui, SmoothRadial) else ui, t)
    if d == 0.0:
        return 0.0

    def f(z, r):
        # x = y + zeta: F centred at the origin, G at distance d along the axis;
        # chain rule d/dz G(|x - d e|) = G'(.) (z - d)/|x - d e|
        zz = z - d
        rad = np.hypot(zz, r)
        with np.errstate(invalid="ignore", divide="ignore"):
            dir_z = np.where(rad > 0, zz / rad, 0.0)
        return fj(np.hypot(z, r)) * gi.d(rad) * dir_z

    val, _ = _adaptive(f, fj.dim, d, min(fj.rate, gi.rate), rtol=rtol)
    return val


def theta_integral(s: int, t: int, uj, ui, zeta, ell: int = 0, rtol: float = 1e-7) -> float:
    """int U_j^s(x + zeta) d/dx_ell U_i^t(x) dx.

    By rotation invariance the vector integral is parallel to zeta, so the
    ell-component is (zeta_ell/|zeta|) times the axial value.
    """
    zeta = np.asarray(zeta, dtype=float)
    d = float(np.linalg.norm(zeta))
    if d == 0.0:
        if s < 1 or t < 1:
            raise InvalidCase("powers must be >= 1")
        return 0.0
    # the axial value places the centre of U_j at -zeta along the axis
    return float(zeta[ell] / d) * theta_axial(s, t, uj, ui, d, rtol=rtol)


def acr_leading(a: float, b: float, a2: float, b2: float, dim: int, dist: float):
    """Leading form of int u(x - xi) v(x) dx, u ~ |x|^a e^{-b|x|}, v ~ |x|^a2 e^{-b2|x|}.

    Returns (value, case tag).
    """
    DecayClass(a, b)
    DecayClass(a2, b2)
    if abs(b - b2) > EQ_TOL * max(b, b2):
        if b > b2:
            a, b = a2, b2
        return math.exp(-b * dist) * dist**a, "acr-i"
    if a < a2:
        a, a2 = a2, a
    crit = -(dim + 1) / 2.0
    e = math.exp(-b * dist)
    if abs(a2 - crit) <= EQ_TOL:
        return e * dist**a * math.log(dist), "acr-ii-log"
    if a2 > crit:
        return e * dist ** (a + a2 + (dim + 1) / 2.0), "acr-ii-power"
    return e * dist**a, "acr-ii-lower"


def theta_case(s, t, lam_i, lam_j):
    if s < 1 or t < 1:
        raise InvalidCase("powers must be >= 1")
    lhs, rhs = s * math.sqrt(lam_j), t * math.sqrt(lam_i)
    if abs(lhs - rhs) <= EQ_TOL * max(lhs, rhs):
        return "ii"
    return "i" if lhs < rhs else "iii"


def theta_leading(s: int, t: int, lam_i: float, lam_j: float, dim: int, zeta, ell: int = 0):
    """Signed leading form of int U_j^s(x + zeta) d_ell U_i^t(x) dx, up to a constant.

    Returns (value, case tag).
    """
    case = theta_case(s, t, lam_i, lam_j)
    zeta = np.asarray(zeta, dtype=float)
    rr = float(np.linalg.norm(zeta))
    direction = float(zeta[ell]) / rr
    h = (dim - 1) / 2.0
    if case == "i":
        return s * direction * math.exp(-s * math.sqrt(lam_j) * rr) * rr ** (-s * h), "ossdecay-i"
    if case == "iii":
        return t * direction * math.exp(-t * math.sqrt(lam_i) * rr) * rr ** (-t * h), "ossdecay-iii"
    lo, hi = min(s, t), max(s, t)
    e = math.exp(-s * math.sqrt(lam_j) * rr)
    if dim == 1:
        return direction * e * rr, "ossdecay-ii-power"
    crit = (dim + 1) / (dim - 1)
    if abs(hi - crit) <= EQ_TOL:
        return direction * e * rr ** (-lo * h) * math.log(rr), "ossdecay-ii-log"
    if hi < crit:
        return direction * e * rr ** (-h * (s + t) + (dim + 1) / 2.0), "ossdecay-ii-power"
    return direction * e * rr ** (-lo * h), "ossdecay-ii-lower"


def eta_epsilon(omega2: float, omega3: float, dim: int, ratio: float) -> float:
    """Cross-peak interaction scale with m0 = min(omega2, omega3) and R = |rho|/eps."""
    if not (omega2 > 0 and omega3 > 0):
        raise ValueError("frequencies must be positive")
    if not ratio > 1:
        raise ValueError("ratio must exceed 1")
    m0 = min(omega2, omega3)
    e = math.exp(-math.sqrt(m0) * ratio)
    if omega2 != omega3:
        return e * ratio ** (-(dim - 1) / 2.0)
    if dim == 2:
        return e * ratio ** (-0.25)
    if dim == 3:
        return e / ratio * math.sqrt(math.log(ratio))
    raise ValueError("dimension must be 2 or 3")


# ---------------------------------------------------------------------------
# ratio-convergence sweeps on soliton decay classes

SEPARATIONS = (8.0, 10.0, 12.0, 14.0, 16.0)

ACR_CASES = ("acr-i", "acr-ii-power", "acr-ii-log", "acr-ii-lower")
THETA_CASES = ("pv-1-2", "pv-2-2", "pv-2-1")


@lru_cache(maxsize=None)
def soliton(dim, lam, mu=1.0):
    return solve_ground_state(dim, lam, mu)


def acr_pair(case: str, dim: int):
    """Two soliton-built radial functions realising the requested case."""
    if case == "acr-i":
        return SmoothRadial(soliton(dim, 1.0)), SmoothRadial(soliton(dim, 4.0))
    if case == "acr-ii-power":
        u = SmoothRadial(soliton(dim, 1.0))
        return u, u
    if case == "acr-ii-log":
        # v = U^k with exponent -k(N-1)/2 = -(N+1)/2 and a plain soliton of equal rate
        k = {2: 3, 3: 2}[dim]
        return SmoothRadial(soliton(dim, float(k * k))), SmoothRadial(soliton(dim, 1.0), k)
    if case == "acr-ii-lower":
        k = {2: 4, 3: 3}[dim]
        return SmoothRadial(soliton(dim, float(k * k))), SmoothRadial(soliton(dim, 1.0), k)
    raise InvalidCase(case)


def ratio_sweep(case: str, dim: int, separations=SEPARATIONS):
    """Quadrature / leading-form ratios over the separations.

    Returns a list of InteractionEstimate with the prefactor fitted as the
    mean ratio over the last three separations.
    """
    rows = []
    if case in ACR_CASES:
        u, v = acr_pair(case, dim)
        cu, cv = u.decay_class(), v.decay_class()
        for d in separations:
            q = overlap_integral(u, v, [d] + [0.0] * (dim - 1))
            lead, tag = acr_leading(cu.a, cu.b, cv.a, cv.b, dim, d)
            rows.append((q, lead, tag, d))
    elif case in THETA_CASES:
        s, t = int(case[3]), int(case[5])
        p = soliton(dim, 1.0)
        for d in separations:
            zeta = [d] + [0.0] * (dim - 1)
            q = theta_integral(s, t, p, p, zeta, 0)
            lead, tag = theta_leading(s, t, 1.0, 1.0, dim, zeta, 0)
            rows.append((q, lead, tag, d))
    else:
        raise InvalidCase(case)
    ratios = [q / lead for q, lead, _, _ in rows]
    pref = float(np.mean(ratios[-3:]))
    return [InteractionEstimate(q, lead, tag, d, pref) for q, lead, tag, d in rows]


def plateau_spread(estimates, last=3):
    r = np.array([e.ratio for e in estimates[-last:]])
    return float((r.max() - r.min()) / abs(r.mean()))
