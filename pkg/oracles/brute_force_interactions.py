"""Brute-force 2-D trapezoid values for the interaction integrals.

Full-plane tensor trapezoid on a 4096^2 grid over a box of side 60 centred at
the midpoint of the two centres; no rotational reduction.  The pointwise
profile evaluation is shared with the package so that only the quadrature is
being checked.  The printed values are frozen into the tests.
"""

import numpy as np

from spikewave.ground_state import solve_ground_state
from spikewave.interaction import SmoothRadial

M = 4096
SIDE = 60.0


def trapezoid_plane(f, centre):
    x = np.linspace(-SIDE / 2, SIDE / 2, M) + centre[0]
    y = np.linspace(-SIDE / 2, SIDE / 2, M) + centre[1]
    h = x[1] - x[0]
    wx = np.full(M, h)
    wx[[0, -1]] *= 0.5
    total = 0.0
    for i in range(0, M, 256):
        X, Y = np.meshgrid(x[i : i + 256], y, indexing="ij")
        total += float(wx[i : i + 256] @ (f(X, Y) @ wx))
    return total


if __name__ == "__main__":
    p = solve_ground_state(2, 1.0, 1.0)
    u = SmoothRadial(p, 1)
    u2 = SmoothRadial(p, 2)
    d = 12.0
    ov = trapezoid_plane(lambda X, Y: u(np.hypot(X - d, Y)) * u(np.hypot(X, Y)), (d / 2, 0.0))
    print("overlap |xi|=12:", repr(ov))
    z = 10.0

    def theta(X, Y):
        r = np.hypot(X, Y)
        with np.errstate(invalid="ignore", divide="ignore"):
            dx = np.where(r > 0, X / r, 0.0)
        return u(np.hypot(X + z, Y)) * u2.d(r) * dx

    th = trapezoid_plane(theta, (-z / 2, 0.0))
    print("theta_12 zeta=(10,0):", repr(th))
