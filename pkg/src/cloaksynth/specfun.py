"""Spherical Bessel/Hankel functions and fully normalized spherical harmonics.

All harmonic coefficient vectors in this package are flat arrays ordered by
the bijection (l, m) -> l*l + l + m, l = 0..l_max, -l <= m <= l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


class DomainError(ValueError):
    """Argument outside the valid domain of a special function."""


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (l, m) with the flat-index bijection l*l + l + m."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise DomainError(f"invalid harmonic index (l={self.l}, m={self.m})")

    @property
    def flat(self) -> int:
        return self.l * self.l + self.l + self.m

    @staticmethod
    def from_flat(index: int) -> "HarmonicIndex":
        if index < 0:
            raise DomainError(f"negative flat index {index}")
        l = int(np.floor(np.sqrt(index)))
        return HarmonicIndex(l, index - l * l - l)


def num_harmonics(l_max: int) -> int:
    return (l_max + 1) ** 2


def degrees_of(l_max: int) -> np.ndarray:
    """Degree l of every flat coefficient slot, shape ((l_max+1)**2,)."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])


def orders_of(l_max: int) -> np.ndarray:
    """Order m of every flat coefficient slot."""
    return np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])


def _check_bessel_args(l, x, allow_zero_l0: bool) -> None:
    larr = np.asarray(l)
    xarr = np.asarray(x, dtype=float)
    if np.any(larr < 0):
        raise DomainError("negative degree l")
    if not np.all(np.isfinite(xarr)):
        raise DomainError("non-finite argument x")
    if allow_zero_l0:
        bad = (xarr < 0) | ((xarr == 0) & (larr > 0))
    else:
        bad = xarr <= 0
    if np.any(bad):
        raise DomainError("argument x outside the valid domain")


def spherical_bessel_j(l, x):
    """j_l(x); x = 0 permitted only for l = 0 (j_0(0) = 1)."""
    _check_bessel_args(l, x, allow_zero_l0=True)
    return _sp.spherical_jn(l, x)


def spherical_bessel_y(l, x):
    """y_l(x), singular at x = 0."""
    _check_bessel_args(l, x, allow_zero_l0=False)
    return _sp.spherical_yn(l, x)


def spherical_hankel_h1(l, x):
    """Outgoing h_l^{(1)}(x) = j_l(x) + i y_l(x)."""
    _check_bessel_args(l, x, allow_zero_l0=False)
    return _sp.spherical_jn(l, x) + 1j * _sp.spherical_yn(l, x)


def spherical_bessel_j_prime(l, x):
    """j_l'(x) from j_{l-1}(x) - (l+1)/x * j_l(x), with j_{-1}(x) = cos(x)/x."""
    _check_bessel_args(l, x, allow_zero_l0=True)
    larr = np.asarray(l)
    xarr = np.asarray(x, dtype=float)
    at_zero = xarr == 0
    safe_x = np.where(at_zero, 1.0, xarr)
    below = np.where(larr > 0,
                     _sp.spherical_jn(np.maximum(larr - 1, 0), safe_x),
                     np.cos(safe_x) / safe_x)
    out = below - (larr + 1) / safe_x * _sp.spherical_jn(larr, safe_x)
    out = np.where(at_zero, 0.0, out)  # j_0'(0) = 0 by the series limit
    return out if out.shape else out[()]


def spherical_hankel_h1_prime(l, x):
    """h_l^{(1)'}(x) from h_{l-1} - (l+1)/x * h_l, with h_{-1}(x) = e^{ix}/x."""
    _check_bessel_args(l, x, allow_zero_l0=False)
    larr = np.asarray(l)
    xarr = np.asarray(x, dtype=float)
    h_l = spherical_hankel_h1(larr, xarr)
    below = np.where(larr > 0,
                     _sp.spherical_jn(np.maximum(larr - 1, 0), xarr)
                     + 1j * _sp.spherical_yn(np.maximum(larr - 1, 0), xarr),
                     np.exp(1j * xarr) / xarr)
    out = below - (larr + 1) / xarr * h_l
    return out if out.shape else out[()]


def spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal Y_lm(theta, phi) with the Condon-Shortley phase."""
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid harmonic order (l={l}, m={m})")
    return _sp.sph_harm_y(l, m, theta, phi)


def sph_harm_table(l_max: int, theta, phi) -> np.ndarray:
    """Y_lm at arbitrary points: shape (n_points, (l_max+1)**2), flat (l,m) columns."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    cols = np.empty((theta.size, num_harmonics(l_max)), dtype=complex)
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            cols[:, l * l + l + m] = _sp.sph_harm_y(l, m, theta, phi)
    return cols


def sph_harm_product_table(l_max: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Y_lm on the product grid theta x phi, flattened theta-major.

    Exploits Y_lm(theta, phi) = Y_lm(theta, 0) * e^{i m phi}; about an order of
    magnitude faster than point-wise evaluation on large grids.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n_cols = num_harmonics(l_max)
    legendre = np.empty((theta.size, n_cols))
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            legendre[:, l * l + l + m] = _sp.sph_harm_y(l, m, theta, 0.0).real
    phase = np.exp(1j * np.outer(phi, np.arange(-l_max, l_max + 1)))
    table = legendre[:, None, :] * phase[None, :, orders_of(l_max) + l_max]
    return table.reshape(theta.size * phi.size, n_cols)


def legendre_p(l: int, x):
    """Legendre polynomial P_l(x), used by addition-theorem checks."""
    return _sp.eval_legendre(l, x)
