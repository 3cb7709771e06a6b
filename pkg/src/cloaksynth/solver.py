"""Collocation least-squares solver for the exterior problem with mixed
boundary conditions on the sphere.

The scattered field is expanded in outgoing partial waves
v = sum c_lm h_l^(1)(k r) Y_lm and the coefficients are fit to the boundary
conditions at the oversampled grid nodes, each residual row weighted by the
square root of its quadrature weight so the misfit approximates an L2(S) norm.
The SVD of the collocation matrix is cached: the matrix depends only on
(k, a, h, variant, cap, grid, l_max), so solves that differ in incident
direction or control data reuse one factorization.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy import linalg as la

from . import specfun
from .incident import BCVariant, WaveContext, plane_wave_trace
from .sphere_grid import CapRegion, SurfaceGrid, cap_mask

RANK_RCOND = 1e-12
RESID_TOL_SMOOTH = 1e-6
RESID_TOL_MIXED = 0.2
TAIL_FLAG = 1e-6


class SolverError(Exception):
    """Base class for boundary-solve failures."""


class NonConvergenceError(SolverError):
    def __init__(self, report: "SolveReport", tol: float):
        super().__init__(
            f"boundary residual {report.relative_residual:.3e} exceeds tolerance {tol:.1e}")
        self.report = report


class IllPosedError(SolverError):
    """The collocation system is rank deficient beyond the cutoff tolerance."""


@dataclass(frozen=True)
class RadiatingField:
    """Outgoing expansion v(r n) = sum c_lm h_l^(1)(k r) Y_lm(n)."""

    k: float
    a: float
    c: np.ndarray

    @property
    def l_max(self) -> int:
        return int(np.sqrt(len(self.c))) - 1

    def _radial(self, r, derivative=False):
        l = specfun.degrees_of(self.l_max)
        if derivative:
            return self.k * specfun.spherical_hankel_h1_prime(l, self.k * r)
        return specfun.spherical_hankel_h1(l, self.k * r)

    def evaluate(self, r: float, theta, phi) -> np.ndarray:
        """Field values at radius r and the given angles."""
        Y = specfun.sph_harm_table(self.l_max, theta, phi)
        return Y @ (self.c * self._radial(r))

    def boundary_trace(self, theta, phi) -> np.ndarray:
        return self.evaluate(self.a, theta, phi)

    def boundary_normal_derivative(self, theta, phi) -> np.ndarray:
        Y = specfun.sph_harm_table(self.l_max, theta, phi)
        return Y @ (self.c * self._radial(self.a, derivative=True))


@dataclass(frozen=True)
class SolveReport:
    relative_residual: float
    condition_estimate: float
    truncation_tail: float
    rank: int
    n_columns: int

    @property
    def under_resolved(self) -> bool:
        return self.truncation_tail > TAIL_FLAG

    def as_dict(self) -> dict:
        return {
            "relative_residual": self.relative_residual,
            "condition_estimate": self.condition_estimate,
            "truncation_tail": self.truncation_tail,
            "rank": self.rank,
            "n_columns": self.n_columns,
            "under_resolved": self.under_resolved,
        }


class BoundarySystem:
    """Factored collocation system for one (ctx, cap, grid, l_max) configuration.

    Only k, a, h and the boundary-condition variant of `ctx` enter the matrix;
    the incident direction appears in right-hand sides alone.
    """

    def __init__(self, ctx: WaveContext, cap: CapRegion, grid: SurfaceGrid, l_max: int):
        if grid.l_max < l_max:
            raise ValueError("grid does not resolve the requested l_max")
        self.ctx = ctx
        self.cap = cap
        self.grid = grid
        self.l_max = l_max
        self.f_mask = cap_mask(cap, grid)
        self.h_nodes = ctx.h_at_nodes(grid.n_nodes)
        self.mixed = bool(self.f_mask.any() and (~self.f_mask).any())

        l = specfun.degrees_of(l_max)
        ka = ctx.ka
        hl = specfun.spherical_hankel_h1(l, ka)
        hlp = specfun.spherical_hankel_h1_prime(l, ka)
        Y = grid.harmonics(l_max)

        # row factor per node/column: Dirichlet trace on F; variant BC on F'
        factors = np.empty((grid.n_nodes, len(l)), dtype=complex)
        factors[self.f_mask] = hl
        fp = ~self.f_mask
        if ctx.bc_variant is BCVariant.MIXED_IMPEDANCE:
            factors[fp] = ctx.k * hlp + self.h_nodes[fp, None] * hl
        else:
            factors[fp] = hl
        self.sqrt_w = np.sqrt(grid.weights)
        matrix = self.sqrt_w[:, None] * Y * factors

        # the radial factors span many orders of magnitude across l, so
        # equilibrate columns before factorizing; the least-squares solution
        # is unchanged but the rank cutoff becomes meaningful
        col_scale = np.linalg.norm(matrix, axis=0)
        col_scale[col_scale == 0] = 1.0
        try:
            u, s, vh = la.svd(matrix / col_scale, full_matrices=False)
        except np.linalg.LinAlgError:
            # gesdd occasionally fails to converge; gesvd is slower but robust
            u, s, vh = la.svd(matrix / col_scale, full_matrices=False,
                              lapack_driver="gesvd")
        keep = s > RANK_RCOND * s[0]
        self.rank = int(keep.sum())
        if self.rank < 0.5 * len(l):
            raise IllPosedError(
                f"collocation system rank {self.rank} of {len(l)}; configuration is ill posed")
        self.condition_estimate = float(s[0] / s[keep][-1])
        self._u = u[:, keep]
        self._s = s[keep]
        self._vh = vh[keep]
        self._col_scale = col_scale
        self._matrix = matrix

    def rhs(self, w_values: np.ndarray | None, include_incident: bool = True,
            incident_ctx: WaveContext | None = None) -> np.ndarray:
        """Weighted right-hand side for control data w (full-grid array, used on F).

        incident_ctx may override the incident direction; it must share the
        matrix parameters (k, a, h, variant) with the system's own context.
        """
        b = np.zeros(self.grid.n_nodes, dtype=complex)
        if w_values is not None:
            w = np.asarray(w_values, dtype=complex)
            if w.size != self.grid.n_nodes:
                raise ValueError("w must be given per grid node")
            b[self.f_mask] = w[self.f_mask]
        if include_incident:
            u0, u0n = plane_wave_trace(incident_ctx or self.ctx, self.grid)
            b[self.f_mask] -= u0[self.f_mask]
            fp = ~self.f_mask
            if self.ctx.bc_variant is BCVariant.MIXED_IMPEDANCE:
                b[fp] = -(u0n[fp] + self.h_nodes[fp] * u0[fp])
            else:
                b[fp] = -u0[fp]
        return self.sqrt_w * b

    def solve_rhs(self, b: np.ndarray):
        """Coefficients and relative residual for one weighted right-hand side."""
        c = (self._vh.conj().T @ ((self._u.conj().T @ b) / self._s)) / self._col_scale
        b_norm = np.linalg.norm(b)
        if b_norm == 0:
            return c, 0.0
        resid = np.linalg.norm(self._matrix @ c - b) / b_norm
        return c, float(resid)

    def _report(self, c: np.ndarray, resid: float) -> SolveReport:
        mags = np.abs(c)
        top = mags.max()
        tail = 0.0
        if top > 0:
            tail = float(mags[specfun.degrees_of(self.l_max) == self.l_max].max() / top)
        return SolveReport(resid, self.condition_estimate, tail, self.rank, c.size)

    def solve(self, w_values: np.ndarray | None = None, include_incident: bool = True,
              resid_tol: float | None = None, incident_ctx: WaveContext | None = None):
        """Solve for (RadiatingField, SolveReport); raises on residual failure."""
        if resid_tol is None:
            resid_tol = RESID_TOL_MIXED if self.mixed else RESID_TOL_SMOOTH
        c, resid = self.solve_rhs(self.rhs(w_values, include_incident, incident_ctx))
        report = self._report(c, resid)
        if resid > resid_tol:
            raise NonConvergenceError(report, resid_tol)
        return RadiatingField(self.ctx.k, self.ctx.a, c), report


_cache_lock = threading.Lock()
_system_cache: OrderedDict = OrderedDict()
_CACHE_SIZE = 4


def _system_key(ctx, cap, grid, l_max):
    h = np.asarray(ctx.h)
    h_key = h.tobytes() if h.ndim else complex(h)
    return (id(grid), ctx.k, ctx.a, tuple(ctx.alpha), ctx.bc_variant, h_key,
            tuple(cap.axis), cap.aperture, cap.control_inside, l_max)


def boundary_system(ctx: WaveContext, cap: CapRegion, grid: SurfaceGrid,
                    l_max: int) -> BoundarySystem:
    """Cached factorization; repeated solves with new data reuse the SVD."""
    key = _system_key(ctx, cap, grid, l_max)
    with _cache_lock:
        if key in _system_cache:
            _system_cache.move_to_end(key)
            return _system_cache[key]
    system = BoundarySystem(ctx, cap, grid, l_max)
    with _cache_lock:
        _system_cache[key] = system
        while len(_system_cache) > _CACHE_SIZE:
            _system_cache.popitem(last=False)
    return system


def clear_system_cache() -> None:
    with _cache_lock:
        _system_cache.clear()


def solve_scatter(ctx: WaveContext, cap: CapRegion, w_on_F: np.ndarray | None,
                  grid: SurfaceGrid, l_max: int, resid_tol: float | None = None):
    """Scattered field for incident wave plus control data w on F.

    w_on_F is a full-grid node array (entries off F are ignored) or None for
    w = 0.  Returns (RadiatingField, SolveReport).
    """
    return boundary_system(ctx, cap, grid, l_max).solve(w_on_F, resid_tol=resid_tol)


def default_l_max(ka: float) -> int:
    """Truncation rule: wavenumber plus a fixed accuracy margin."""
    return int(np.ceil(ka)) + 20
