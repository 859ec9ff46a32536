"""Discrete residual and Jacobian of the two-scale system.

The first density lives on an x-scale grid, the concentrating densities on a
shared y-scale grid (y = x / eps).  In the y variable the system reads

    -Lap u1 + V(x) u1 = mu1 u1^3 + u1 sum_j a_1j u_j(x/eps)          (x-grid)
    -Lap u_i + W_i(eps y) u_i = mu_i u_i^3 + a_i1 u1(eps y) u_i + beta a_ij u_i u_j

with the obvious squared couplings in Gross-Pitaevskii mode.  Residuals are
LHS - RHS.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import HypothesisViolation
from .grid import Grid, cross_scale_maps
from .problem import ModifiedPotential, ProblemSpec


def _poly_r2(coeffs, r2):
    acc = np.zeros_like(r2)
    for c in reversed(coeffs):
        acc = acc * r2 + c
    return acc


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    spec: ProblemSpec
    potential: ModifiedPotential
    xgrid: Grid
    egrid: Grid

    @cached_property
    def maps(self):
        return cross_scale_maps(self.xgrid, self.egrid, self.spec.eps)

    @property
    def to_eps(self) -> sp.csr_matrix:
        return self.maps[0]

    @property
    def to_x(self) -> sp.csr_matrix:
        return self.maps[1]

    @cached_property
    def V(self) -> np.ndarray:
        x1, x2 = self.xgrid.mesh()
        return _poly_r2(self.spec.v, (x1 * x1 + x2 * x2)).ravel()

    @cached_property
    def W(self) -> dict:
        y1, y2 = self.egrid.mesh()
        e = self.spec.eps
        out = {i: np.asarray(self.potential.W(i, e * y1, e * y2)).ravel() for i in self.spec.singular}
        for i, w in out.items():
            # the quadratic W is a local model; it must stay positive where it is used
            if w.min() <= 0:
                raise HypothesisViolation(f"W_{i} reaches {w.min():.4g} <= 0 on the computational box")
        return out

    @property
    def blocks(self) -> int:
        return self.spec.components

    def split(self, vec):
        nx, ne = self.xgrid.size, self.egrid.size
        parts = [vec[:nx]]
        for k in range(self.blocks - 1):
            parts.append(vec[nx + k * ne : nx + (k + 1) * ne])
        return parts

    def join(self, parts) -> np.ndarray:
        return np.concatenate([np.ravel(p) for p in parts])

    def _partners(self, i):
        return [j for j in self.spec.singular if j != i]

    def residual(self, state) -> list:
        """Residual of every equation; ``state`` is (u1, u2[, u3]) as flat arrays."""
        s = self.spec
        u = {k + 1: np.ravel(v) for k, v in enumerate(state)}
        gp = s.kind == "gp"
        sampled = {i: self.to_x @ u[i] for i in s.singular}
        u1e = self.to_eps @ u[1]
        f1 = -(self.xgrid.laplacian @ u[1]) + self.V * u[1] - s.mu[0] * u[1] ** 3
        for i in s.singular:
            f1 -= s.a(1, i) * u[1] * (sampled[i] ** 2 if gp else sampled[i])
        out = [f1]
        for i in s.singular:
            fi = -(self.egrid.laplacian @ u[i]) + self.W[i] * u[i] - s.mu[i - 1] * u[i] ** 3
            fi -= s.a(i, 1) * u[i] * (u1e**2 if gp else u1e)
            for j in self._partners(i):
                if gp:
                    fi -= s.a(i, j) * u[i] * u[j] ** 2
                else:
                    fi -= s.beta * s.a(i, j) * u[i] * u[j]
            out.append(fi)
        return out

    def jacobian(self, state, couple: bool = True) -> sp.csc_matrix:
        """Analytic Jacobian; ``couple=False`` keeps only the diagonal blocks."""
        s = self.spec
        u = {k + 1: np.ravel(v) for k, v in enumerate(state)}
        gp = s.kind == "gp"
        sampled = {i: self.to_x @ u[i] for i in s.singular}
        u1e = self.to_eps @ u[1]
        idx = {1: 0, **{i: k + 1 for k, i in enumerate(s.singular)}}
        grid = [[None] * self.blocks for _ in range(self.blocks)]

        d1 = self.V - 3.0 * s.mu[0] * u[1] ** 2
        for i in s.singular:
            d1 = d1 - s.a(1, i) * (sampled[i] ** 2 if gp else sampled[i])
        grid[0][0] = -self.xgrid.laplacian + sp.diags(d1)
        for i in s.singular:
            di = self.W[i] - 3.0 * s.mu[i - 1] * u[i] ** 2 - s.a(i, 1) * (u1e**2 if gp else u1e)
            for j in self._partners(i):
                di = di - (s.a(i, j) * u[j] ** 2 if gp else s.beta * s.a(i, j) * u[j])
            grid[idx[i]][idx[i]] = -self.egrid.laplacian + sp.diags(di)
            if not couple:
                continue
            if gp:
                grid[0][idx[i]] = sp.diags(-2.0 * s.a(1, i) * u[1] * sampled[i]) @ self.to_x
                grid[idx[i]][0] = sp.diags(-2.0 * s.a(i, 1) * u[i] * u1e) @ self.to_eps
            else:
                grid[0][idx[i]] = sp.diags(-s.a(1, i) * u[1]) @ self.to_x
                grid[idx[i]][0] = sp.diags(-s.a(i, 1) * u[i]) @ self.to_eps
            for j in self._partners(i):
                coef = -2.0 * s.a(i, j) * u[i] * u[j] if gp else -s.beta * s.a(i, j) * u[i]
                grid[idx[i]][idx[j]] = sp.diags(coef)
        return sp.bmat(grid, format="csc")
