"""Figure rendering for CLI runs: far-field maps, synthesis tradeoffs,
density decay.  All figures are written to files; nothing is shown."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .farfield import FarFieldPattern
from .specfun import sph_harm_table


def _pattern_samples(p: FarFieldPattern, n_theta: int, n_phi: int):
    x, _ = np.polynomial.legendre.leggauss(n_theta)
    theta = np.sort(np.arccos(x))
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    tt = np.repeat(theta, n_phi)
    pp = np.tile(phi, n_theta)
    A = sph_harm_table(p.l_max, tt, pp) @ p.a_coeffs
    return theta, phi, A.reshape(n_theta, n_phi)


def pattern_figure(p: FarFieldPattern, path, title="far-field intensity"):
    theta, phi, A = _pattern_samples(p, 90, 180)
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(np.degrees(phi), np.degrees(theta), np.abs(A) ** 2,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$|A(\beta)|^2$")
    ax.set_xlabel("azimuth [deg]")
    ax.set_ylabel("colatitude [deg]")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cloak_figure(before: FarFieldPattern, after: FarFieldPattern, path):
    """Polar cut of |A|^2 before/after synthesis, log scale."""
    theta = np.linspace(0, np.pi, 361)
    phi = np.zeros_like(theta)
    cut_b = np.abs(sph_harm_table(before.l_max, theta, phi) @ before.a_coeffs) ** 2
    cut_a = np.abs(sph_harm_table(after.l_max, theta, phi) @ after.a_coeffs) ** 2
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.semilogy(np.degrees(theta), cut_b, label="uncontrolled")
    ax.semilogy(np.degrees(theta), cut_a, label="with control")
    ax.set_xlabel("colatitude of observation [deg]")
    ax.set_ylabel(r"$|A|^2$ (cut at $\phi=0$)")
    ax.legend()
    ax.set_title("far-field suppression by boundary control")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(lambdas, sigma_after, control_norm, path):
    lam = np.maximum(np.asarray(lambdas, dtype=float), 1e-16)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].loglog(lam, sigma_after, "o-")
    axes[0].set_xlabel(r"$\lambda$")
    axes[0].set_ylabel(r"residual cross section $\sigma$")
    axes[1].loglog(control_norm, sigma_after, "o-")
    axes[1].set_xlabel(r"control norm $\|w\|_{L^2(F)}$")
    axes[1].set_ylabel(r"$\sigma$")
    fig.suptitle("regularization tradeoff")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def density_figure(sizes, residuals, path):
    labels = [f"({p},{m})" for p, m in sizes]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(len(residuals)), residuals, "o-")
    ax.set_xticks(range(len(residuals)), labels)
    ax.set_xlabel("basis size (radial, azimuthal)")
    ax.set_ylabel("best-approximation residual")
    ax.set_title("far-field target approximation with growing control basis")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
