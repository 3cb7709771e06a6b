"""Quadrature grids on S^2, spherical caps, and discrete harmonic transforms.

The grid is a Gauss-Legendre colatitude grid crossed with a uniform azimuth
grid, flattened theta-major.  Weights are in steradians and sum to 4*pi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import specfun


@dataclass(frozen=True)
class SurfaceGrid:
    l_max: int
    theta: np.ndarray        # (n_theta,) Gauss-Legendre colatitudes
    phi: np.ndarray          # (n_phi,) uniform azimuths
    theta_weight: np.ndarray  # (n_theta,) Gauss-Legendre weights on cos(theta)
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    @property
    def n_nodes(self) -> int:
        return self.theta.size * self.phi.size

    @property
    def theta_flat(self) -> np.ndarray:
        return np.repeat(self.theta, self.n_phi)

    @property
    def phi_flat(self) -> np.ndarray:
        return np.tile(self.phi, self.n_theta)

    @property
    def weights(self) -> np.ndarray:
        """Solid-angle weight per flattened node."""
        return np.repeat(self.theta_weight, self.n_phi) * (2 * np.pi / self.n_phi)

    @property
    def directions(self) -> np.ndarray:
        """Unit outward normals, shape (n_nodes, 3)."""
        th, ph = self.theta_flat, self.phi_flat
        st = np.sin(th)
        return np.column_stack((st * np.cos(ph), st * np.sin(ph), np.cos(th)))

    def harmonics(self, l_max: int | None = None) -> np.ndarray:
        """Cached table Y_lm at all nodes, shape (n_nodes, (l_max+1)**2)."""
        l_max = self.l_max if l_max is None else l_max
        if l_max not in self._tables:
            self._tables[l_max] = specfun.sph_harm_product_table(
                l_max, self.theta, self.phi)
        return self._tables[l_max]


def build_grid(l_max: int) -> SurfaceGrid:
    """2x-oversampled product grid resolving harmonics up to degree l_max."""
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    n_theta = 2 * (l_max + 1)
    n_phi = 2 * n_theta
    x, w = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(np.arccos(x))
    theta = np.arccos(x)[order]
    return SurfaceGrid(
        l_max=l_max,
        theta=theta,
        phi=2 * np.pi * np.arange(n_phi) / n_phi,
        theta_weight=w[order],
    )


@dataclass(frozen=True)
class CapRegion:
    """Spherical cap F: points within `aperture` of `axis` (boundary excluded).

    With control_inside=False the roles flip and F is the cap complement.
    """

    axis: np.ndarray
    aperture: float
    control_inside: bool = True

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        object.__setattr__(self, "axis", axis)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("cap axis must be a unit vector")
        if not 0.0 < self.aperture < np.pi:
            raise ValueError("cap aperture must lie strictly in (0, pi)")


def in_cap(region: CapRegion, points: np.ndarray) -> np.ndarray:
    """True where a unit vector lies in F; the boundary circle belongs to F'."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    inside = pts @ region.axis > np.cos(region.aperture)
    if not region.control_inside:
        inside = pts @ region.axis < np.cos(region.aperture)
    return inside if np.asarray(points).ndim > 1 else bool(inside[0])


def cap_mask(region: CapRegion, grid: SurfaceGrid) -> np.ndarray:
    """Boolean F-membership per flattened grid node."""
    return in_cap(region, grid.directions)


def analyze(grid: SurfaceGrid, samples: np.ndarray, l_max: int | None = None) -> np.ndarray:
    """Forward transform: f_lm = sum_nodes w * f * conj(Y_lm)."""
    Y = grid.harmonics(l_max)
    return Y.conj().T @ (grid.weights * np.asarray(samples))


def synthesize(grid: SurfaceGrid, coeffs: np.ndarray) -> np.ndarray:
    """Inverse transform: node samples of sum_lm f_lm Y_lm."""
    l_max = int(np.sqrt(len(coeffs))) - 1
    return grid.harmonics(l_max) @ np.asarray(coeffs)


def integrate(grid: SurfaceGrid, samples: np.ndarray):
    """Quadrature of a node function over S^2."""
    return grid.weights @ np.asarray(samples)


def rotation_to_pole(axis: np.ndarray) -> np.ndarray:
    """Rotation matrix R with R @ axis = +z (identity when axis is +z)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    z = np.array([0.0, 0.0, 1.0])
    c = float(axis @ z)
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return np.diag([1.0, -1.0, -1.0])
    u = np.cross(axis, z)
    s = np.linalg.norm(u)
    u = u / s
    K = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def vector_to_angles(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) of unit vectors; accepts a single vector or an (n, 3) array."""
    pts = np.atleast_2d(np.asarray(v, dtype=float))
    theta = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    if np.asarray(v).ndim == 1:
        return float(theta[0]), float(phi[0])
    return theta, phi
