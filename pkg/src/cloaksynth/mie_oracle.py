"""Closed-form partial-wave (Mie-type) series for uniform boundary conditions.

Ground truth for the collocation solver.  Shares the special-function layer
but none of the solver's linear-algebra path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import specfun
from .farfield import FarFieldPattern
from .solver import RadiatingField
from .sphere_grid import vector_to_angles

SOFT = "soft"
IMPEDANCE = "impedance"
_SERIES_CUTOFF = 1e-16


@dataclass(frozen=True)
class MieSolution:
    """Reflection ratios R_l for a sphere with one uniform boundary condition."""

    kind: str
    k: float
    a: float
    h: complex = 0.0 + 0.0j

    def __post_init__(self):
        if self.kind not in (SOFT, IMPEDANCE):
            raise ValueError(f"unknown Mie kind {self.kind!r}")
        if self.k <= 0 or self.a <= 0:
            raise ValueError("k and a must be positive")

    @property
    def ka(self) -> float:
        return self.k * self.a

    def reflection(self, l) -> np.ndarray:
        """R_l: -j_l/h_l (soft) or -(k j_l' + h j_l)/(k h_l' + h h_l) (impedance)."""
        l = np.asarray(l)
        ka = self.ka
        jl = specfun.spherical_bessel_j(l, ka)
        hl = specfun.spherical_hankel_h1(l, ka)
        if self.kind == SOFT:
            return -jl / hl
        jlp = specfun.spherical_bessel_j_prime(l, ka)
        hlp = specfun.spherical_hankel_h1_prime(l, ka)
        return -(self.k * jlp + self.h * jl) / (self.k * hlp + self.h * hl)


def soft_sphere(k: float, a: float) -> MieSolution:
    return MieSolution(SOFT, k, a)


def impedance_sphere(k: float, a: float, h: complex) -> MieSolution:
    return MieSolution(IMPEDANCE, k, a, complex(h))


def mie_coefficients(sol: MieSolution, alpha: np.ndarray, l_max: int) -> RadiatingField:
    """Scattered-field expansion c_lm = R_l 4 pi i^l conj(Y_lm(alpha))."""
    th, ph = vector_to_angles(np.asarray(alpha, dtype=float))
    y_alpha = specfun.sph_harm_table(l_max, th, ph)[0]
    l = specfun.degrees_of(l_max)
    c = sol.reflection(l) * 4 * np.pi * 1j ** l * y_alpha.conj()
    return RadiatingField(sol.k, sol.a, c)


def mie_far_field(sol: MieSolution, alpha: np.ndarray, l_max: int) -> FarFieldPattern:
    """Amplitude coefficients computed directly from the series (no solver path)."""
    th, ph = vector_to_angles(np.asarray(alpha, dtype=float))
    y_alpha = specfun.sph_harm_table(l_max, th, ph)[0]
    l = specfun.degrees_of(l_max)
    a = sol.reflection(l) * 4 * np.pi * 1j ** l * y_alpha.conj() * (-1j) ** (l + 1) / sol.k
    return FarFieldPattern(sol.k, a)


def mie_sigma(sol: MieSolution) -> float:
    """Analytic cross section (4 pi / k^2) sum (2l+1) |R_l|^2, summed to convergence."""
    total = 0.0
    l = 0
    while True:
        r = abs(complex(sol.reflection(l)))
        total += (2 * l + 1) * r * r
        if r < _SERIES_CUTOFF and l > sol.ka + 5:
            break
        l += 1
        if l > 500:
            break
    return 4 * np.pi / sol.k ** 2 * total


def mie_forward_amplitude(sol: MieSolution, alpha: np.ndarray, l_max: int = 120) -> complex:
    """A(alpha) from the series, for analytic optical-theorem checks."""
    from .farfield import eval_pattern

    return eval_pattern(mie_far_field(sol, alpha, l_max), np.asarray(alpha, dtype=float))
