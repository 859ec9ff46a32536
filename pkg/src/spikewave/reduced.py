"""Reduced equations for the peak distances (rho2, rho3).

The projections of the error on the kernel fields reduce, at leading order,
to explicit functions of (rho2, rho3).  Their zeros fix the peak positions;
each regime of the frequency pair (omega2, omega3) keeps a different subset
of terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .ansatz import b_radial, component_profile, cross_projection, fit_c, limit_profile, tau_epsilon
from .errors import HypothesisViolation, InvalidExponent, NoSignChange, ScheduleViolated
from .problem import ModifiedPotential, PeakConfiguration, ProblemSpec, exact

REGIMES = ("R1", "R2", "R3", "R4", "TwoEq", "GPEqual")
SCHEDULE_LIMIT = 0.1
CON443 = 2.0 - math.sqrt(5.0) / 2.0
DEFAULT_B = {"R1": 0.5, "R2": 0.5, "R3": 0.9, "R4": 0.5, "TwoEq": 0.5, "GPEqual": 0.5}
DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class Regime:
    tag: str
    omega2: Fraction
    omega3: Fraction
    mode: str


def classify_regime(omega2, omega3, mode: str = "lv") -> Regime:
    """Regime of the frequency pair, decided on exact rationals."""
    w2, w3 = exact(omega2), exact(omega3)
    if w2 <= 0 or w3 <= 0:
        raise HypothesisViolation("omega_i must be positive")
    if mode == "two-eq":
        return Regime("TwoEq", w2, w3, mode)
    if mode == "gp":
        if w2 != w3:
            raise HypothesisViolation("Gross-Pitaevskii mode is implemented for omega2 = omega3 only")
        return Regime("GPEqual", w2, w3, mode)
    if mode != "lv":
        raise ValueError(f"unknown mode {mode!r}")
    if w2 == w3:
        return Regime("R4", w2, w3, mode)
    if 4 * w2 <= w3:
        return Regime("R1", w2, w3, mode)
    if 4 * w3 <= w2:
        return Regime("R2", w2, w3, mode)
    return Regime("R3", w2, w3, mode)


def _pair_ok(curv, a):
    # either (curvature < 0 and a > 0) or (curvature > 0 and a < 0)
    return (curv < 0 and a > 0) or (curv > 0 and a < 0)


def check_signs(regime: Regime, d11: float, d22: float, a23: float, a32: float) -> None:
    """Raise HypothesisViolation unless the regime's sign conditions hold."""
    t = regime.tag
    bad = None
    if t == "R1":
        if not d11 < 0:
            bad = "R1 needs d11 omega2(0) < 0"
        elif not _pair_ok(d22, a32):
            bad = "R1 needs (d22 omega3(0) < 0, a32 > 0) or (d22 omega3(0) > 0, a32 < 0)"
    elif t == "R2":
        if not d22 < 0:
            bad = "R2 needs d22 omega3(0) < 0"
        elif not _pair_ok(d11, a23):
            bad = "R2 needs (d11 omega2(0) < 0, a23 > 0) or (d11 omega2(0) > 0, a23 < 0)"
    elif t in ("R3", "GPEqual"):
        if not (d11 < 0 and d22 < 0):
            bad = f"{t} needs d11 omega2(0) < 0 and d22 omega3(0) < 0"
    elif t == "R4":
        if not (_pair_ok(d22, a32) and _pair_ok(d11, a23)):
            bad = "R4 needs one admissible sign pair for each of (d22 omega3, a32) and (d11 omega2, a23)"
    elif t == "TwoEq":
        if not d11 < 0:
            bad = "two-equation mode needs d11 omega2(0) < 0"
    if bad:
        raise HypothesisViolation(bad)


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class AdmissibleDomain:
    lo: float
    hi: float
    center: float
    b: float
    delta: float

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise ValueError("domain needs 0 < lo < hi")

    def __contains__(self, rho) -> bool:
        return self.lo <= rho <= self.hi


def domain_centers(regime: Regime, b: float) -> tuple:
    """Limits of rho_i / (eps |ln eps|) for (rho2, rho3)."""
    t = regime.tag
    w2, w3 = float(regime.omega2), float(regime.omega3)
    if t == "R1":
        if not b < 1:
            raise InvalidExponent(f"R1 needs b < 1, got {b}")
        return 1 / math.sqrt(w2), math.sqrt((1 - b) * (3 - b)) / math.sqrt(w2)
    if t == "R2":
        if not b < 1:
            raise InvalidExponent(f"R2 needs b < 1, got {b}")
        return math.sqrt((1 - b) * (3 - b)) / math.sqrt(w3), 1 / math.sqrt(w3)
    if t == "R3":
        if not b > CON443:
            raise InvalidExponent(f"R3 needs b > 2 - sqrt(5)/2 = {CON443:.4f}, got {b}")
        return 1 / math.sqrt(w2), 1 / math.sqrt(w3)
    if t == "R4":
        if not b < 2:
            raise InvalidExponent(f"R4 needs b < 2, got {b}")
        c = (2 - b) / math.sqrt(2 * w2)
        return c, c
    return 1 / math.sqrt(w2), 1 / math.sqrt(w3)


def admissible_domains(regime: Regime, b: float, eps: float, delta: float | None = None, rel_delta: float = DEFAULT_DELTA):
    """(D2, D3) as length intervals; ``delta`` is absolute (in units of eps|ln eps|),
    otherwise ``rel_delta`` times each centre."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    scale = eps * abs(math.log(eps))
    out = []
    for c in domain_centers(regime, b):
        d = delta if delta is not None else rel_delta * c
        if not 0 < d < c:
            raise ValueError("delta must be positive and smaller than the centre")
        out.append(AdmissibleDomain((c - d) * scale, (c + d) * scale, c * scale, b, d))
    return tuple(out)


# ---------------------------------------------------------------- interaction functions


def _cross_form(rho_own, rho_norm, eps, w_own, w_other, dim):
    r = rho_norm / eps
    dirn = 2.0 * rho_own / rho_norm
    w_own, w_other = exact(w_own), exact(w_other)
    if w_other < 4 * w_own:
        return dirn * math.exp(-math.sqrt(w_other) * r) * r ** (-(dim - 1) / 2.0)
    if w_other > 4 * w_own:
        return dirn * math.exp(-2.0 * math.sqrt(w_own) * r) * r ** (-(dim - 1))
    if dim == 2:
        return dirn * math.exp(-math.sqrt(w_other) * r)
    return dirn * math.exp(-math.sqrt(w_other) * r) * math.log(r) / r


def interaction_F(rho2, rho3, eps, omega2, omega3, dim=2) -> float:
    return _cross_form(rho2, math.hypot(rho2, rho3), eps, omega2, omega3, dim)


def interaction_G(rho2, rho3, eps, omega2, omega3, dim=2) -> float:
    return _cross_form(rho3, math.hypot(rho2, rho3), eps, omega3, omega2, dim)


# ---------------------------------------------------------------- constants


@dataclass(frozen=True)
class ReducedConstants:
    b: float
    b_bar: float
    c: float
    c_bar: float
    d: float
    d_bar: float
    d11: float
    d22: float
    mu2: float
    mu3: float
    omega2: Fraction
    omega3: Fraction
    dim: int
    a23: float
    a32: float
    limit_a: float
    limit_b: float
    potential_scale: float = 1.0

    def __post_init__(self):
        if not (self.b > 0 and self.b_bar > 0):
            raise HypothesisViolation("the potential constants must be positive")

    def scaled(self, **kw) -> "ReducedConstants":
        return replace(self, **kw)


def reduced_constants(spec: ProblemSpec, regime: Regime, b: float | None = None, eps: float | None = None) -> ReducedConstants:
    """Constants of the reduced equations for ``spec``.

    The prefactors of the exponential terms are fitted from two-body
    integrals at the domain centres for ``eps`` (default ``spec.eps``) and
    then held fixed.
    """
    b = DEFAULT_B[regime.tag] if b is None else b
    eps = spec.eps if eps is None else eps
    pot = ModifiedPotential(spec, limit_profile(spec))
    three = spec.components == 3
    d11 = pot.curvature(2, 0)
    d22 = pot.curvature(3, 1) if three else 0.0
    a23 = spec.a(2, 3) if three else 0.0
    a32 = spec.a(3, 2) if three else 0.0
    check_signs(regime, d11, d22, a23, a32)
    centers = domain_centers(regime, b)
    L = abs(math.log(eps))
    p2 = component_profile(spec, 2)
    c2 = centers[0] * L
    bb, cc = b_radial(p2), fit_c(p2, spec.mu[1], c2)
    bb3 = cc3 = 1.0
    dd = dd3 = 0.0
    if three:
        p3 = component_profile(spec, 3)
        c3 = centers[1] * L
        bb3, cc3 = b_radial(p3), fit_c(p3, spec.mu[2], c3)
        peaks = PeakConfiguration(c2 * eps, c3 * eps, eps, min_ratio=0.0)
        w2, w3 = spec.omega
        if spec.kind == "gp":
            r = math.hypot(c2, c3)
            form = lambda own: 2.0 * own / r * math.exp(-2.0 * math.sqrt(float(w2)) * r) * r ** (-(spec.dim - 1) / 2.0)
            f2, f3 = form(c2), form(c3)
        else:
            f2 = interaction_F(peaks.rho2, peaks.rho3, eps, w2, w3, spec.dim)
            f3 = interaction_G(peaks.rho2, peaks.rho3, eps, w2, w3, spec.dim)
        dd = -cross_projection(spec, peaks, 2) / f2
        dd3 = -cross_projection(spec, peaks, 3) / f3
    return ReducedConstants(
        bb, bb3, cc, cc3, dd, dd3, d11, d22, spec.mu[1], spec.mu[2],
        spec.omega[0], spec.omega[1], spec.dim, a23, a32, centers[0], centers[1],
    )


# ---------------------------------------------------------------- reduced functions


def _self(mu, c, w, rho, eps, dim):
    r = rho / eps
    return -2.0 * mu * c * math.exp(-2.0 * math.sqrt(float(w)) * r) * r ** (-(dim - 1) / 2.0)


def reduced_functions(k: ReducedConstants, eps: float, beta: float, rho2: float, rho3: float, kind: str = "lv") -> dict:
    """Every term of h1 and h2 at (rho2, rho3)."""
    out = {
        "h1_potential": -k.d11 * k.b * eps * rho2 * k.potential_scale,
        "h1_self": _self(k.mu2, k.c, k.omega2, rho2, eps, k.dim),
        "h2_potential": -k.d22 * k.b_bar * eps * rho3 * k.potential_scale,
        "h2_self": _self(k.mu3, k.c_bar, k.omega3, rho3, eps, k.dim) if rho3 > 0 else 0.0,
        "h1_cross": 0.0,
        "h2_cross": 0.0,
    }
    if rho3 > 0:
        if kind == "gp":
            r = math.hypot(rho2, rho3) / eps
            base = math.exp(-2.0 * math.sqrt(float(k.omega2)) * r) * r ** (-(k.dim - 1) / 2.0)
            out["h1_cross"] = -k.a23 * k.d * 2.0 * rho2 / (r * eps) * base
            out["h2_cross"] = -k.a32 * k.d_bar * 2.0 * rho3 / (r * eps) * base
        else:
            out["h1_cross"] = -beta * k.a23 * k.d * interaction_F(rho2, rho3, eps, k.omega2, k.omega3, k.dim)
            out["h2_cross"] = -beta * k.a32 * k.d_bar * interaction_G(rho2, rho3, eps, k.omega2, k.omega3, k.dim)
    return out


_KEEP = {
    # which terms survive in the regime-simplified pair (f, g)
    "R1": (("h1_potential", "h1_self"), ("h2_potential", "h2_cross")),
    "R2": (("h1_potential", "h1_cross"), ("h2_potential", "h2_self")),
    "R3": (("h1_potential", "h1_self"), ("h2_potential", "h2_self")),
    "R4": (("h1_potential", "h1_self", "h1_cross"), ("h2_potential", "h2_self", "h2_cross")),
    "TwoEq": (("h1_potential", "h1_self"), ()),
    "GPEqual": (("h1_potential", "h1_self"), ("h2_potential", "h2_self")),
}


def simplified(regime: Regime, k: ReducedConstants, eps: float, beta: float, rho2: float, rho3: float, kind: str = "lv"):
    """(f, g) with the terms that are negligible in the regime dropped."""
    t = reduced_functions(k, eps, beta, rho2, rho3, kind)
    keep_f, keep_g = _KEEP[regime.tag]
    return sum(t[n] for n in keep_f), sum(t[n] for n in keep_g)


def full_h(k: ReducedConstants, eps: float, beta: float, rho2: float, rho3: float, kind: str = "lv"):
    t = reduced_functions(k, eps, beta, rho2, rho3, kind)
    return (
        t["h1_potential"] + t["h1_self"] + t["h1_cross"],
        t["h2_potential"] + t["h2_self"] + t["h2_cross"],
    )


# ---------------------------------------------------------------- schedule


@dataclass(frozen=True)
class ScheduleReport:
    beta: float
    ratios: dict

    @property
    def ok(self) -> bool:
        return all(v < SCHEDULE_LIMIT for v in self.ratios.values())


def _self_scale(w, rho, eps, dim):
    r = rho / eps
    return math.exp(-2.0 * math.sqrt(float(w)) * r) * r ** (-(dim - 1) / 2.0)


def _lin_cross(w, rho_own, rho_norm, eps, dim):
    r = rho_norm / eps
    return rho_own / rho_norm * math.exp(-math.sqrt(float(w)) * r) * r ** (-(dim - 1) / 2.0)


def schedule_ratios(regime: Regime, spec: ProblemSpec, beta: float, eps: float, rho2: float, rho3: float) -> dict:
    """LHS / RHS of each smallness condition the regime's proof needs."""
    dim = spec.dim
    w2, w3 = regime.omega2, regime.omega3
    peaks = PeakConfiguration(rho2, rho3, eps, min_ratio=0.0)
    tau = tau_epsilon(spec, peaks)
    rn = math.hypot(rho2, rho3)
    denom = eps * eps * abs(math.log(eps))
    t = regime.tag
    out = {}
    if t in ("R1", "R2", "R4"):
        out["conprima"] = abs(beta) * tau / denom
    if t == "R1":
        out["conseconda"] = _self_scale(w3, rho3, eps, dim) / (abs(beta * spec.a(3, 2)) * _lin_cross(w2, rho3, rn, eps, dim))
    if t == "R2":
        out["conseconda"] = _self_scale(w2, rho2, eps, dim) / (abs(beta * spec.a(2, 3)) * _lin_cross(w3, rho2, rn, eps, dim))
    if t == "R3":
        out["con444"] = abs(beta) * _lin_cross(w3, rho2, rn, eps, dim) / _self_scale(w2, rho2, eps, dim)
        out["cond3"] = abs(beta) * _lin_cross(w2, rho3, rn, eps, dim) / _self_scale(w3, rho3, eps, dim)
        out["cond4"] = abs(beta) * tau / denom
    return out


def beta_schedule(regime: Regime, spec: ProblemSpec, b: float | None = None, beta0: float = 1.0, eps: float | None = None, strict: bool = True) -> ScheduleReport:
    """beta = beta0 eps^b and the ratio checks at the domain centres."""
    b = DEFAULT_B[regime.tag] if b is None else b
    eps = spec.eps if eps is None else eps
    if beta0 < 0:
        raise ValueError("beta0 must be nonnegative")
    centers = domain_centers(regime, b)
    beta = beta0 * eps**b
    if beta == 0.0 or regime.tag in ("TwoEq", "GPEqual"):
        return ScheduleReport(beta, {})
    L = eps * abs(math.log(eps))
    ratios = schedule_ratios(regime, spec, beta, eps, centers[0] * L, centers[1] * L)
    rep = ScheduleReport(beta, ratios)
    if strict and not rep.ok:
        worst = max(ratios, key=ratios.get)
        raise ScheduleViolated(f"{worst}: ratio {ratios[worst]:.3g} >= {SCHEDULE_LIMIT}")
    return rep


# ---------------------------------------------------------------- roots


@dataclass(frozen=True)
class ReducedRoots:
    regime: str
    eps: float
    rho2: float
    rho3: float
    domains: tuple
    signs2: tuple
    signs3: tuple

    @property
    def ratio2(self) -> float:
        return self.rho2 / (self.eps * abs(math.log(self.eps)))

    @property
    def ratio3(self) -> float:
        return self.rho3 / (self.eps * abs(math.log(self.eps))) if self.rho3 else 0.0


def bisect(fn, lo: float, hi: float, rtol: float = 1e-10, what: str = "f"):
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo, (0, int(math.copysign(1, fhi)))
    if fhi == 0.0:
        return hi, (int(math.copysign(1, flo)), 0)
    signs = (int(math.copysign(1, flo)), int(math.copysign(1, fhi)))
    if signs[0] == signs[1]:
        raise NoSignChange(f"{what} has sign {signs[0]:+d} at both ends of [{lo:.6g}, {hi:.6g}]")
    a, b = lo, hi
    while b - a > rtol * abs(b):
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m, signs
        if math.copysign(1, fm) == signs[0]:
            a = m
        else:
            b = m
        if m in (a, b) and b - a <= 4 * math.ulp(b):
            break
    return 0.5 * (a + b), signs


def solve_reduced(
    regime: Regime,
    k: ReducedConstants,
    eps: float,
    beta: float = 0.0,
    b: float | None = None,
    rel_delta: float = DEFAULT_DELTA,
    kind: str = "lv",
    rtol: float = 1e-10,
) -> ReducedRoots:
    """Zeros of the regime-simplified pair inside the admissible domains.

    R1 solves f(rho2) first and then g(rho2*, rho3); R2 the mirror image;
    the other regimes decouple except R4, which is solved by alternating
    one-dimensional bisections (the cross terms are weak).
    """
    b = DEFAULT_B[regime.tag] if b is None else b
    d2, d3 = admissible_domains(regime, b, eps, rel_delta=rel_delta)
    t = regime.tag
    f = lambda r2, r3: simplified(regime, k, eps, beta, r2, r3, kind)[0]
    g = lambda r2, r3: simplified(regime, k, eps, beta, r2, r3, kind)[1]
    if t == "TwoEq":
        r2, s2 = bisect(lambda r: f(r, 0.0), d2.lo, d2.hi, rtol, "f")
        return ReducedRoots(t, eps, r2, 0.0, (d2,), s2, ())
    if t in ("R1", "R3", "GPEqual"):
        r2, s2 = bisect(lambda r: f(r, d3.center), d2.lo, d2.hi, rtol, "f")
        r3, s3 = bisect(lambda r: g(r2, r), d3.lo, d3.hi, rtol, "g")
    elif t == "R2":
        r3, s3 = bisect(lambda r: g(d2.center, r), d3.lo, d3.hi, rtol, "g")
        r2, s2 = bisect(lambda r: f(r, r3), d2.lo, d2.hi, rtol, "f")
    else:
        r2, r3 = d2.center, d3.center
        for _ in range(100):
            n2, s2 = bisect(lambda r: f(r, r3), d2.lo, d2.hi, rtol, "f")
            n3, s3 = bisect(lambda r: g(n2, r), d3.lo, d3.hi, rtol, "g")
            done = abs(n2 - r2) <= rtol * n2 and abs(n3 - r3) <= rtol * n3
            r2, r3 = n2, n3
            if done:
                break
    return ReducedRoots(t, eps, r2, r3, (d2, d3), s2, s3)


def gp_beta_independence(k: ReducedConstants, eps: float, rho2: float, rho3: float) -> float:
    """|cross term| / |self-interaction term| of the first reduced function in GP mode."""
    t = reduced_functions(k, eps, 0.0, rho2, rho3, "gp")
    return max(abs(t["h1_cross"]) / abs(t["h1_self"]), abs(t["h2_cross"]) / abs(t["h2_self"]))


def reduced_sweep(regime: Regime, k: ReducedConstants, eps_list, beta0: float = 1.0, b: float | None = None, rel_delta: float = DEFAULT_DELTA, kind: str = "lv") -> list:
    """Roots along an eps sweep with beta = beta0 eps^b."""
    b = DEFAULT_B[regime.tag] if b is None else b
    return [solve_reduced(regime, k, e, beta0 * e**b, b, rel_delta, kind) for e in eps_list]


def increment_ratios(values) -> list:
    """Ratios of successive increments of a sequence (|d_{k+1}| / |d_k|)."""
    inc = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    return [abs(inc[i + 1]) / abs(inc[i]) for i in range(len(inc) - 1)]


def prefactor_sensitivity(regime: Regime, k: ReducedConstants, eps: float, beta: float = 0.0, b: float | None = None, rel_delta: float = DEFAULT_DELTA, kind: str = "lv", factor: float = 0.5) -> dict:
    """Relative root shift when each fitted prefactor is scaled by 1 -+ ``factor``."""
    base = solve_reduced(regime, k, eps, beta, b, rel_delta, kind)
    out = {}
    names = ("c", "c_bar") if regime.tag in ("TwoEq", "GPEqual", "R3") else ("c", "c_bar", "d", "d_bar")
    for name in names:
        for sgn in (-1.0, 1.0):
            kk = k.scaled(**{name: getattr(k, name) * (1.0 + sgn * factor)})
            r = solve_reduced(regime, kk, eps, beta, b, rel_delta, kind)
            shift = max(abs(r.rho2 - base.rho2) / base.rho2, abs(r.rho3 - base.rho3) / base.rho3 if base.rho3 else 0.0)
            out[f"{name}{'-' if sgn < 0 else '+'}"] = shift
    return out


def r1_dominance(k: ReducedConstants, eps: float, rho2: float, rho3: float) -> float:
    """interaction_F / self-interaction of the first reduced function (R1 drops the former)."""
    f = interaction_F(rho2, rho3, eps, k.omega2, k.omega3, k.dim)
    return abs(f) / _self_scale(k.omega2, rho2, eps, k.dim)
