import numpy as np
import pytest

from cloaksynth.farfield import far_field, sigma
from cloaksynth.incident import BCVariant, WaveContext
from cloaksynth.mie_oracle import impedance_sphere, mie_coefficients, mie_sigma, soft_sphere
from cloaksynth.solver import (
    RadiatingField,
    NonConvergenceError,
    boundary_system,
    clear_system_cache,
    default_l_max,
    solve_scatter,
)
from cloaksynth.sphere_grid import CapRegion, build_grid

Z = np.array([0.0, 0.0, 1.0])
TINY_CAP = CapRegion(Z, 1e-9)  # no grid node falls inside: uniform F' condition
MIXED_CAP = CapRegion(Z, np.pi / 6)


def uniform_solve(ctx, l_max):
    grid = build_grid(l_max)
    return solve_scatter(ctx, TINY_CAP, None, grid, l_max)


class TestAgainstOracle:
    @pytest.mark.parametrize("ka", [0.5, 1.0, 2.0, np.pi, 5.0])
    def test_dirichlet_matches_separated_solution(self, ka):
        # also probes for spurious resonances across ka
        ctx = WaveContext(ka, 1.0, Z, bc_variant=BCVariant.MIXED_DIRICHLET)
        l_max = default_l_max(ka)
        v, report = uniform_solve(ctx, l_max)
        ref = mie_coefficients(soft_sphere(ka, 1.0), Z, l_max)
        scale = np.abs(ref.c).max()
        assert np.abs(v.c - ref.c).max() / scale < 1e-8
        assert report.relative_residual < 1e-6

    @pytest.mark.parametrize("h", [0.0, 1.0, 1.0 + 1.0j, 10.0])
    def test_impedance_matches_separated_solution(self, h):
        ctx = WaveContext(2.0, 1.0, Z, h=h)
        l_max = default_l_max(2.0)
        v, _ = uniform_solve(ctx, l_max)
        ref = mie_coefficients(impedance_sphere(2.0, 1.0, h), Z, l_max)
        scale = np.abs(ref.c).max()
        assert np.abs(v.c - ref.c).max() / scale < 1e-8

    def test_sigma_against_oracle(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        v, _ = uniform_solve(ctx, default_l_max(2.0))
        assert sigma(far_field(v)) == pytest.approx(
            mie_sigma(impedance_sphere(2.0, 1.0, 1.0)), rel=1e-10)

    def test_oblique_incidence(self):
        alpha = np.array([0.6, 0.0, 0.8])
        ctx = WaveContext(2.0, 1.0, alpha, h=1.0)
        v, _ = uniform_solve(ctx, default_l_max(2.0))
        ref = mie_coefficients(impedance_sphere(2.0, 1.0, 1.0), alpha, v.l_max)
        assert np.abs(v.c - ref.c).max() / np.abs(ref.c).max() < 1e-8


class TestLinearity:
    def test_zero_data_zero_field(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        v, report = boundary_system(ctx, MIXED_CAP, grid, 22).solve(
            include_incident=False)
        assert np.abs(v.c).max() == 0.0
        assert report.relative_residual == 0.0

    def test_superposition(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        system = boundary_system(ctx, MIXED_CAP, grid, 22)
        rng = np.random.default_rng(5)
        w1 = rng.standard_normal(grid.n_nodes) + 1j * rng.standard_normal(grid.n_nodes)
        w2 = rng.standard_normal(grid.n_nodes) + 1j * rng.standard_normal(grid.n_nodes)
        c1, _ = system.solve_rhs(system.rhs(w1, include_incident=False))
        c2, _ = system.solve_rhs(system.rhs(w2, include_incident=False))
        c12, _ = system.solve_rhs(system.rhs(2 * w1 - 3 * w2, include_incident=False))
        err = np.abs(c12 - (2 * c1 - 3 * c2)).max() / np.abs(c12).max()
        assert err < 1e-10


class TestOffGridVerification:
    def test_boundary_condition_between_nodes(self):
        # evaluate the discrete solution at points the solve never saw
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        l_max = default_l_max(2.0)
        v, _ = uniform_solve(ctx, l_max)
        rng = np.random.default_rng(9)
        theta = rng.uniform(0.2, np.pi - 0.2, 40)
        phi = rng.uniform(0, 2 * np.pi, 40)
        pts = np.stack([np.sin(theta) * np.cos(phi),
                        np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
        mu = pts @ ctx.alpha
        u0 = np.exp(1j * ctx.ka * mu)
        u0n = 1j * ctx.k * mu * u0
        total = (u0n + v.boundary_normal_derivative(theta, phi)
                 + ctx.h * (u0 + v.boundary_trace(theta, phi)))
        assert np.abs(total).max() < 1e-8


class TestReportsAndErrors:
    def test_truncation_convergence(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        sigmas = []
        for l_max in (3, 5, 14):
            grid = build_grid(l_max)
            system = boundary_system(ctx, TINY_CAP, grid, l_max)
            c, _ = system.solve_rhs(system.rhs(None))
            sigmas.append(sigma(far_field(RadiatingField(ctx.k, ctx.a, c))))
        ref = mie_sigma(impedance_sphere(2.0, 1.0, 1.0))
        errs = [abs(s - ref) for s in sigmas]
        assert errs[-1] < 1e-10
        assert errs[0] > errs[1] > errs[-1]

    def test_mixed_solve_reports_larger_residual(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        _, report = boundary_system(ctx, MIXED_CAP, grid, 22).solve()
        assert 1e-4 < report.relative_residual < 0.2

    def test_residual_gate_raises(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        system = boundary_system(ctx, MIXED_CAP, grid, 22)
        with pytest.raises(NonConvergenceError) as err:
            system.solve(resid_tol=1e-12)
        assert err.value.report.relative_residual > 1e-12

    def test_grid_must_resolve_band(self):
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(10)
        with pytest.raises(ValueError):
            boundary_system(ctx, MIXED_CAP, grid, 12)

    def test_default_l_max_rule(self):
        assert default_l_max(2.0) == 22
        assert default_l_max(0.5) == 21


class TestCaching:
    def test_factorization_reused(self):
        clear_system_cache()
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        s1 = boundary_system(ctx, MIXED_CAP, grid, 22)
        s2 = boundary_system(ctx, MIXED_CAP, grid, 22)
        assert s1 is s2

    def test_distinct_physics_not_shared(self):
        clear_system_cache()
        grid = build_grid(22)
        s1 = boundary_system(WaveContext(2.0, 1.0, Z, h=1.0), MIXED_CAP, grid, 22)
        s2 = boundary_system(WaveContext(2.0, 1.0, Z, h=2.0), MIXED_CAP, grid, 22)
        assert s1 is not s2

    def test_incident_override_shares_factorization(self):
        # reversed-incidence solves reuse the SVD through incident_ctx
        from dataclasses import replace

        clear_system_cache()
        ctx = WaveContext(2.0, 1.0, Z, h=1.0)
        grid = build_grid(22)
        system = boundary_system(ctx, MIXED_CAP, grid, 22)
        alpha2 = np.array([1.0, 0.0, 0.0])
        v_direct, _ = boundary_system(
            replace(ctx, alpha=alpha2), MIXED_CAP, grid, 22).solve()
        v_shared, _ = system.solve(incident_ctx=replace(ctx, alpha=alpha2))
        np.testing.assert_allclose(v_shared.c, v_direct.c, atol=1e-12)
