"""Quadrant grids for fields that are even in each variable.

Only the quadrant [0, L)^2 is stored.  Node (i, j) sits at (i h, j h); the
symmetry axes carry a reflection (Neumann) condition and the outer edge
x = L is a homogeneous Dirichlet boundary that is not stored.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import GridMismatch

_HEADER = struct.Struct("<ddq")


@dataclass(frozen=True)
class Grid:
    n: int
    h: float
    scale: str = "eps"

    def __post_init__(self):
        if self.n < 4 or not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("grid needs n >= 4 and h > 0")

    @classmethod
    def box(cls, length: float, n: int, scale: str = "eps") -> "Grid":
        return cls(int(n), float(length) / int(n), scale)

    @property
    def length(self) -> float:
        return self.n * self.h

    @property
    def size(self) -> int:
        return self.n * self.n

    @cached_property
    def coords(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def mesh(self):
        y = self.coords
        return np.meshgrid(y, y, indexing="ij")

    @cached_property
    def weights(self) -> np.ndarray:
        """Full-plane trapezoid weights of an even function sampled on the quadrant."""
        w = np.full(self.n, self.h)
        w[0] = 0.5 * self.h
        return 4.0 * np.outer(w, w)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.reshape(values, (self.n, self.n))))

    def inner(self, a, b) -> float:
        return self.integrate(np.reshape(a, (self.n, self.n)) * np.reshape(b, (self.n, self.n)))

    def norm(self, a) -> float:
        return math.sqrt(self.inner(a, a))

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        n, h = self.n, self.h
        main = np.full(n, -2.0)
        upper = np.ones(n - 1)
        upper[0] = 2.0  # ghost node u_{-1} = u_1
        lower = np.ones(n - 1)
        d1 = sp.diags([lower, main, upper], [-1, 0, 1], format="csr") / (h * h)
        eye = sp.identity(n, format="csr")
        return (sp.kron(d1, eye) + sp.kron(eye, d1)).tocsr()


def interpolation_matrix(src: Grid, p1, p2, outside: str = "zero") -> sp.csr_matrix:
    """Bilinear sampling of a quadrant field at nonnegative points (p1, p2).

    Points beyond the stored box read the Dirichlet value 0 when
    ``outside="zero"``; with ``outside="error"`` they raise GridMismatch.
    """
    p1 = np.abs(np.ravel(np.asarray(p1, dtype=float)))
    p2 = np.abs(np.ravel(np.asarray(p2, dtype=float)))
    t1, t2 = p1 / src.h, p2 / src.h
    i1, i2 = np.floor(t1).astype(np.int64), np.floor(t2).astype(np.int64)
    s1, s2 = t1 - i1, t2 - i2
    beyond = (t1 > src.n) | (t2 > src.n)
    if outside == "error" and np.any(beyond):
        raise GridMismatch(
            f"sample point at {max(p1.max(), p2.max()):.4g} lies outside the box of side {src.length:.4g}"
        )
    rows, cols, vals = [], [], []
    idx = np.arange(p1.size)
    for di, wi in ((0, 1.0 - s1), (1, s1)):
        for dj, wj in ((0, 1.0 - s2), (1, s2)):
            a, b = i1 + di, i2 + dj
            keep = (a < src.n) & (b < src.n) & ~beyond & (wi * wj != 0.0)
            rows.append(idx[keep])
            cols.append(a[keep] * src.n + b[keep])
            vals.append((wi * wj)[keep])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(p1.size, src.size),
    )


def cross_scale_maps(xgrid: Grid, egrid: Grid, eps: float):
    """Sampling matrices between the two scales.

    ``to_eps`` reads the first component at x = eps*y on every node y of the
    fine-scale grid; ``to_x`` reads a concentrating component at y = x/eps on
    the x-scale grid (zero outside its box).
    """
    if eps * egrid.length > xgrid.length:
        raise GridMismatch(
            f"eps*L = {eps * egrid.length:.4g} exceeds the x-scale box {xgrid.length:.4g}"
        )
    y1, y2 = egrid.mesh()
    to_eps = interpolation_matrix(xgrid, eps * y1, eps * y2, outside="error")
    x1, x2 = xgrid.mesh()
    to_x = interpolation_matrix(egrid, x1 / eps, x2 / eps, outside="zero")
    return to_eps, to_x


@dataclass(frozen=True, eq=False)
class GridField:
    grid: Grid
    values: np.ndarray
    component: int = 0
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(self.grid.n, self.grid.n)
        if not np.all(np.isfinite(v)):
            raise ValueError(f"field {self.name or self.component} has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def origin(self) -> float:
        return float(self.values[0, 0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2(self) -> float:
        return self.grid.norm(self.values)

    def integrate(self, other=None) -> float:
        v = self.values if other is None else self.values * np.reshape(other, self.values.shape)
        return self.grid.integrate(v)

    def full(self) -> np.ndarray:
        """Reflect the quadrant onto [-L, L)^2 (shared axes counted once)."""
        v = self.values
        top = np.concatenate([v[:0:-1], v], axis=0)
        return np.concatenate([top[:, :0:-1], top], axis=1)

    def to_csv(self) -> str:
        out = io.StringIO()
        g = self.grid
        out.write(f"# component={self.component} name={self.name} scale={g.scale} L={g.length!r} h={g.h!r} n={g.n}\n")
        out.write("x1,x2,value\n")
        y = g.coords
        for i in range(g.n):
            for j in range(g.n):
                out.write(f"{float(y[i])!r},{float(y[j])!r},{float(self.values[i, j])!r}\n")
        return out.getvalue()

    def to_bytes(self) -> bytes:
        g = self.grid
        return _HEADER.pack(g.length, g.h, g.n) + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes, component: int = 0, scale: str = "eps", name: str = "") -> "GridField":
        length, h, n = _HEADER.unpack_from(data, 0)
        vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        if vals.size != n * n or not math.isclose(length, n * h, rel_tol=1e-12):
            raise GridMismatch("binary dump header does not match its payload")
        return cls(Grid(int(n), float(h), scale), vals.reshape(n, n), component, name)
