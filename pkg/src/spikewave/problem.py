"""Problem data: coefficients, modified potentials and peak placement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import HypothesisViolation, PeaksTooClose
from .ground_state import RadialProfile

KINDS = ("lv", "gp")
COUPLING_KEYS = ("12", "13", "21", "31", "23", "32")
MIN_SEPARATION = 5.0


def exact(value) -> Fraction:
    """Exact rational from a decimal string, int, Fraction or float (floats via repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = repr(value)
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients of the three-density system.

    ``omega`` holds the exact values of omega_i(0) for the two concentrating
    densities; the constant parts of W_i are derived from them once the limit
    profile of the first density is known.  ``curvature[i-2] = (c_i1, c_i2)``
    are the quadratic coefficients of W_i.  ``coupling`` maps "ij" to a_ij
    (Lotka-Volterra) or beta_ij (Gross-Pitaevskii).
    """

    eps: float = 0.02
    kind: str = "lv"
    components: int = 3
    dim: int = 2
    beta: float = 0.0
    mu: tuple = (1.0, 1.0, 1.0)
    v: tuple = (1.0, 0.1)
    omega: tuple = (Fraction(1, 4), Fraction(9, 25))
    curvature: tuple = ((0.0, 0.0), (0.0, 0.0))
    coupling: dict = field(default_factory=lambda: dict.fromkeys(COUPLING_KEYS, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(exact(w) for w in self.omega))
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))
        object.__setattr__(self, "curvature", tuple(tuple(float(c) for c in row) for row in self.curvature))
        cp = dict.fromkeys(COUPLING_KEYS, 0.0)
        for k, val in dict(self.coupling).items():
            if k not in cp:
                raise ValueError(f"unknown coupling index {k!r}")
            cp[k] = float(val)
        object.__setattr__(self, "coupling", cp)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.components not in (2, 3):
            raise ValueError("components must be 2 or 3")
        if self.dim not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be positive")
        if len(self.mu) != 3 or min(self.mu) <= 0:
            raise HypothesisViolation("mu_i must be positive")
        if not self.v or self.v[0] <= 0 or any(c < 0 for c in self.v[1:]):
            raise HypothesisViolation("V needs v0 > 0 and nonnegative higher coefficients (inf V > 0)")
        if len(self.omega) != 2 or min(self.omega) <= 0:
            raise HypothesisViolation("omega_i(0) must be positive")
        if self.kind == "lv":
            if self.a(2, 1) >= 0 or (self.components == 3 and self.a(3, 1) >= 0):
                raise HypothesisViolation("Lotka-Volterra mode needs a21 < 0 and a31 < 0")

    def a(self, i: int, j: int) -> float:
        return self.coupling[f"{i}{j}"]

    @property
    def singular(self) -> tuple:
        return (2,) if self.components == 2 else (2, 3)

    def omega_of(self, i: int) -> float:
        return float(self.omega[i - 2])

    def replace(self, **kw) -> "ProblemSpec":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class ModifiedPotential:
    """omega_i(x) = W_i(x) - a_i1 Y(x)  (Lotka-Volterra) or W_i(x) - beta_i1 Y(x)^2 (Gross-Pitaevskii)."""

    spec: ProblemSpec
    upsilon: RadialProfile

    def __post_init__(self):
        for i in self.spec.singular:
            if self.w0(i) <= 0:
                raise HypothesisViolation(f"W_{i}(0) = {self.w0(i):.6g} is not positive (inf W_{i} > 0)")

    def _coupled(self, y):
        return y if self.spec.kind == "lv" else y * y

    def w0(self, i: int) -> float:
        return self.spec.omega_of(i) + self.spec.a(i, 1) * self._coupled(self.upsilon.height)

    def W(self, i: int, x1, x2):
        c1, c2 = self.spec.curvature[i - 2]
        return self.w0(i) + c1 * np.square(x1) + c2 * np.square(x2)

    def __call__(self, i: int, x1, x2):
        y = self.upsilon(np.hypot(x1, x2))
        return self.W(i, x1, x2) - self.spec.a(i, 1) * self._coupled(y)

    def omega(self, i: int) -> float:
        return self.spec.omega_of(i)

    @property
    def upsilon_second(self) -> float:
        """Y''(0) from the equation at the origin: N Y''(0) = V(0) Y(0) - mu_1 Y(0)^3."""
        y0 = self.upsilon.height
        return (self.spec.v[0] * y0 - self.spec.mu[0] * y0**3) / self.spec.dim

    def curvature(self, i: int, axis: int) -> float:
        y0, ypp = self.upsilon.height, self.upsilon_second
        coupled = ypp if self.spec.kind == "lv" else 2.0 * y0 * ypp
        return 2.0 * self.spec.curvature[i - 2][axis] - self.spec.a(i, 1) * coupled

    def curvature_fd(self, i: int, axis: int, h: float = 1e-3) -> float:
        e = np.zeros(2)
        e[axis] = h
        plus, mid, minus = (float(self(i, *(s * e))) for s in (1.0, 0.0, -1.0))
        return (plus - 2.0 * mid + minus) / (h * h)

    @property
    def d11_omega2(self) -> float:
        return self.curvature(2, 0)

    @property
    def d22_omega3(self) -> float:
        return self.curvature(3, 1)


@dataclass(frozen=True)
class PeakConfiguration:
    """Peaks at +-P2 = +-rho2 e1 and +-P3 = +-rho3 e2 (x-scale lengths)."""

    rho2: float
    rho3: float
    eps: float
    min_ratio: float = MIN_SEPARATION

    def __post_init__(self):
        if not self.rho2 > 0 or self.rho3 < 0:
            raise ValueError("need rho2 > 0 and rho3 >= 0")
        for name, rho in (("rho2", self.rho2), ("rho3", self.rho3)):
            if rho > 0 and rho / self.eps < self.min_ratio:
                raise PeaksTooClose(f"{name}/eps = {rho / self.eps:.3g} < {self.min_ratio}")

    @property
    def c2(self) -> float:
        return self.rho2 / self.eps

    @property
    def c3(self) -> float:
        return self.rho3 / self.eps

    @property
    def rho_norm(self) -> float:
        return math.hypot(self.rho2, self.rho3)

    @property
    def zeta(self) -> np.ndarray:
        return np.array([-self.rho2, self.rho3]) / self.eps

    @property
    def xi(self) -> np.ndarray:
        return np.array([self.rho2, self.rho3]) / self.eps
