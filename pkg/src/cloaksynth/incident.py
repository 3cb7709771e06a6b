"""The incident plane wave, its boundary traces and partial-wave expansion."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import specfun
from .sphere_grid import SurfaceGrid, vector_to_angles


class BCVariant(enum.Enum):
    """Homogeneous condition imposed on F': impedance u_N + h u = 0, or u = 0."""

    MIXED_IMPEDANCE = "impedance"
    MIXED_DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class WaveContext:
    """Fixed scattering configuration: wavenumber, sphere, incidence, impedance.

    h may be a complex scalar (uniform impedance) or a per-node array matching
    the grid used downstream; Im h >= 0 is required everywhere.
    """

    k: float
    a: float
    alpha: np.ndarray
    h: complex | np.ndarray = 0.0 + 0.0j
    bc_variant: BCVariant = BCVariant.MIXED_IMPEDANCE

    def __post_init__(self):
        if self.k <= 0 or self.a <= 0:
            raise ValueError("k and a must be positive")
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        if abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
            raise ValueError("alpha must be a unit vector")
        if np.any(np.imag(np.asarray(self.h)) < 0):
            raise ValueError("Im h must be >= 0 at every node")

    @property
    def ka(self) -> float:
        return self.k * self.a

    def h_at_nodes(self, n_nodes: int) -> np.ndarray:
        h = np.asarray(self.h, dtype=complex)
        if h.ndim == 0:
            return np.full(n_nodes, complex(h))
        if h.size != n_nodes:
            raise ValueError("per-node h does not match the grid size")
        return h


def plane_wave_field(ctx: WaveContext, points: np.ndarray) -> np.ndarray:
    """e^{i k alpha . x} at arbitrary points, shape (n, 3)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.exp(1j * ctx.k * pts @ ctx.alpha)


def plane_wave_trace(ctx: WaveContext, grid: SurfaceGrid):
    """(values, normal derivatives) of the incident wave on the sphere r = a.

    On the sphere the outer normal is the radial direction, so the normal
    derivative is i k (alpha . n) times the value.
    """
    cos_inc = grid.directions @ ctx.alpha
    values = np.exp(1j * ctx.ka * cos_inc)
    return values, 1j * ctx.k * cos_inc * values


def plane_wave_coefficients(ctx: WaveContext, l_max: int) -> np.ndarray:
    """Partial-wave coefficients of u0 on r = a: 4 pi i^l j_l(ka) conj(Y_lm(alpha))."""
    th_a, ph_a = vector_to_angles(ctx.alpha)
    y_alpha = specfun.sph_harm_table(l_max, th_a, ph_a)[0]
    l = specfun.degrees_of(l_max)
    return 4 * np.pi * 1j ** l * specfun.spherical_bessel_j(l, ctx.ka) * y_alpha.conj()
