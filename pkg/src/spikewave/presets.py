"""Default problem configurations, one per regime.

The reduced-equation presets are chosen so that the roots exist in the
admissible domains for eps in [0.00625, 0.05] and the beta schedule
(beta0 = 0.1) passes its smallness checks at eps = 0.02.  The grid presets
use small frequencies so that the peaks fit a 256^2-512^2 quadrant.
"""

from __future__ import annotations

from .problem import ProblemSpec

_BASE = {"21": -0.01, "31": -0.01, "12": -0.5, "13": -0.5}
SWEEP_EPS = (0.05, 0.025, 0.0125, 0.00625)
SWEEP_REL_DELTA = 0.4
BETA0 = 0.1

REDUCED = {
    "R1": dict(omega=("1", "5"), curvature=((-0.15, 0.0), (0.0, -0.05)), coupling={**_BASE, "23": 1.0, "32": 5.0}, b=0.5),
    "R2": dict(omega=("5", "1"), curvature=((-0.05, 0.0), (0.0, -0.15)), coupling={**_BASE, "23": 5.0, "32": 1.0}, b=0.5),
    "R3": dict(omega=("1", "3/2"), curvature=((-0.4, 0.0), (0.0, -0.4)), coupling={**_BASE, "23": 1.0, "32": 1.0}, b=0.9),
    "R4": dict(omega=("1", "1"), curvature=((-0.3, 0.0), (0.0, -0.3)), coupling={**_BASE, "23": 0.05, "32": 0.05}, b=0.5),
    "GPEqual": dict(kind="gp", omega=("1", "1"), curvature=((-0.3, 0.0), (0.0, -0.3)), coupling={**_BASE, "23": 0.1, "32": 0.1}, b=0.5),
}

# two-component run: W_2 dominates the curvature of omega_2
TWO_EQ = dict(
    components=2,
    omega=("1/4", "9/25"),
    curvature=((-0.01, 0.0), (0.0, 0.0)),
    coupling={"21": -0.0025, "12": -0.5},
)

_GRID_BASE = {"21": -0.0025, "31": -0.0025, "12": -0.5, "13": -0.5}

# three-density grid runs at eps = 0.02 (the quadratic W stays positive on the box)
GRID = {
    "R3": dict(omega=("1/4", "9/25"), curvature=((-0.02, 0.0), (0.0, -0.06)), coupling={**_GRID_BASE, "23": 1.0, "32": 1.0}, b=0.9),
    "GPEqual": dict(kind="gp", omega=("1/4", "1/4"), curvature=((-0.02, 0.0), (0.0, -0.02)), coupling={**_GRID_BASE, "23": 0.1, "32": 0.1}, b=0.5),
}


def grid_spec(tag: str, eps: float = 0.02, beta0: float = BETA0) -> tuple:
    """(ProblemSpec, b) of a three-density grid preset; beta = beta0 eps^b in LV mode."""
    cfg = dict(GRID[tag])
    b = cfg.pop("b")
    beta = beta0 * eps**b if cfg.get("kind", "lv") == "lv" else 0.0
    return ProblemSpec(eps=eps, beta=beta, **cfg), b


def reduced_spec(tag: str, eps: float = 0.02) -> tuple:
    """(ProblemSpec, b) of the reduced preset for ``tag``."""
    cfg = dict(REDUCED[tag])
    b = cfg.pop("b")
    return ProblemSpec(eps=eps, **cfg), b


def two_eq_spec(eps: float = 0.02) -> ProblemSpec:
    return ProblemSpec(eps=eps, **TWO_EQ)
