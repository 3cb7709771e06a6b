"""Far-field amplitude A(beta), cross section sigma, and physics diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import specfun
from .incident import WaveContext
from .solver import RadiatingField, boundary_system
from .sphere_grid import CapRegion, SurfaceGrid, vector_to_angles

TINY = 1e-300


@dataclass(frozen=True)
class FarFieldPattern:
    """A(beta) = sum a_lm Y_lm(beta); sigma = sum |a_lm|^2 by Parseval."""

    k: float
    a_coeffs: np.ndarray

    @property
    def l_max(self) -> int:
        return int(np.sqrt(len(self.a_coeffs))) - 1

    def __add__(self, other: "FarFieldPattern") -> "FarFieldPattern":
        return FarFieldPattern(self.k, self.a_coeffs + other.a_coeffs)

    def __sub__(self, other: "FarFieldPattern") -> "FarFieldPattern":
        return FarFieldPattern(self.k, self.a_coeffs - other.a_coeffs)


def far_field(v: RadiatingField) -> FarFieldPattern:
    """Amplitude of e^{ikr}/r from h_l^(1)(kr) -> (-i)^{l+1} e^{ikr} / (kr)."""
    l = specfun.degrees_of(v.l_max)
    return FarFieldPattern(v.k, v.c * (-1j) ** (l + 1) / v.k)


def sigma(p: FarFieldPattern) -> float:
    """Cross section: the integral of |A|^2 over all directions."""
    return float(np.vdot(p.a_coeffs, p.a_coeffs).real)


def sigma_by_quadrature(p: FarFieldPattern, grid: SurfaceGrid) -> float:
    """Quadrature cross-check of sigma on an explicit grid."""
    A = grid.harmonics(p.l_max) @ p.a_coeffs
    return float(grid.weights @ np.abs(A) ** 2)


def eval_pattern(p: FarFieldPattern, beta) -> complex | np.ndarray:
    """A at one unit vector or an (n, 3) array of directions."""
    theta, phi = vector_to_angles(beta)
    values = specfun.sph_harm_table(p.l_max, theta, phi) @ p.a_coeffs
    return complex(values[0]) if np.asarray(beta).ndim == 1 else values


def optical_theorem_residual(p: FarFieldPattern, ctx: WaveContext) -> float:
    """|sigma - (4 pi / k) Im A(alpha)| / max(sigma, tiny).

    Vanishes for lossless scattering (real h); with absorption (Im h > 0) the
    forward-amplitude term strictly exceeds sigma instead.
    """
    s = sigma(p)
    forward = 4 * np.pi / ctx.k * eval_pattern(p, ctx.alpha).imag
    return abs(s - forward) / max(s, TINY)


def absorption_slack(p: FarFieldPattern, ctx: WaveContext) -> float:
    """(4 pi / k) Im A(alpha) - sigma; nonnegative when Im h >= 0."""
    return 4 * np.pi / ctx.k * eval_pattern(p, ctx.alpha).imag - sigma(p)


def reciprocity_residual(ctx: WaveContext, cap: CapRegion, grid: SurfaceGrid,
                         l_max: int, beta: np.ndarray,
                         resid_tol: float | None = None) -> float:
    """|A(beta; alpha) - A(-alpha; -beta)| / max |A| for the uncontrolled (w = 0) solve.

    Both solves share one collocation factorization since only the incident
    direction changes.
    """
    beta = np.asarray(beta, dtype=float)
    system = boundary_system(ctx, cap, grid, l_max)
    v1, _ = system.solve(resid_tol=resid_tol)
    a_fwd = eval_pattern(far_field(v1), beta)

    v2, _ = system.solve(resid_tol=resid_tol, incident_ctx=replace(ctx, alpha=-beta))
    a_rev = eval_pattern(far_field(v2), -ctx.alpha)

    scale = max(abs(a_fwd), abs(a_rev), TINY)
    return abs(a_fwd - a_rev) / scale
