import numpy as np
import pytest

from cloaksynth import farfield, specfun
from cloaksynth.mie_oracle import (
    impedance_sphere,
    mie_coefficients,
    mie_far_field,
    mie_forward_amplitude,
    mie_sigma,
    soft_sphere,
)

Z = np.array([0.0, 0.0, 1.0])


class TestReflectionCoefficients:
    def test_soft_l0_closed_form(self):
        # R_0 = -j_0/h_0 = -sin(x) / (-i e^{ix}) = sin(x) e^{-ix} / i ... check numerically
        sol = soft_sphere(1.0, 1.0)
        j0 = specfun.spherical_bessel_j(0, 1.0)
        h0 = specfun.spherical_hankel_h1(0, 1.0)
        assert sol.reflection(0) == pytest.approx(-j0 / h0, abs=1e-15)

    def test_large_h_approaches_soft(self):
        soft = soft_sphere(2.0, 1.0)
        stiff = impedance_sphere(2.0, 1.0, 1e8)
        for l in range(8):
            assert stiff.reflection(l) == pytest.approx(soft.reflection(l), abs=1e-6)

    def test_zero_h_is_hard_sphere(self):
        sol = impedance_sphere(2.0, 1.0, 0.0)
        for l in range(6):
            jp = specfun.spherical_bessel_j_prime(l, 2.0)
            hp = specfun.spherical_hankel_h1_prime(l, 2.0)
            assert sol.reflection(l) == pytest.approx(-jp / hp, abs=1e-13)

    def test_unitarity_for_real_h(self):
        # lossless scattering: |1 + 2 R_l| = 1, hence |R_l| <= 1
        for sol in (soft_sphere(2.0, 1.0), impedance_sphere(2.0, 1.0, 1.5)):
            for l in range(12):
                r = sol.reflection(l)
                assert abs(1 + 2 * r) == pytest.approx(1.0, abs=1e-12)
                assert abs(r) <= 1 + 1e-12

    def test_absorbing_h_contracts(self):
        sol = impedance_sphere(2.0, 1.0, 1.0 + 1.0j)
        for l in range(8):
            assert abs(1 + 2 * sol.reflection(l)) < 1.0


class TestCrossSection:
    def test_pinned_soft_sigma(self):
        # frozen reference: high-precision partial-wave sum at k = a = 1
        assert mie_sigma(soft_sphere(1.0, 1.0)) == pytest.approx(
            10.626241899593979, rel=1e-12)

    def test_sigma_matches_far_field_parseval(self):
        sol = impedance_sphere(2.0, 1.0, 1.0)
        p = mie_far_field(sol, Z, 40)
        assert farfield.sigma(p) == pytest.approx(mie_sigma(sol), rel=1e-12)

    def test_long_wave_limit(self):
        # soft sphere, ka -> 0: sigma -> 4 pi a^2 (scattering length a)
        k, a = 0.01, 1.0
        assert mie_sigma(soft_sphere(k, a)) == pytest.approx(
            4 * np.pi * a**2, rel=0.01)

    def test_scale_invariance(self):
        # sigma / a^2 depends only on ka and h*a
        s1 = mie_sigma(soft_sphere(2.0, 1.0))
        s2 = mie_sigma(soft_sphere(1.0, 2.0))
        assert s2 / 4.0 == pytest.approx(s1, rel=1e-12)


class TestFarField:
    def test_axisymmetry(self):
        p = mie_far_field(soft_sphere(2.0, 1.0), Z, 20)
        m = specfun.orders_of(20)
        assert np.abs(p.a_coeffs[m != 0]).max() < 1e-15

    def test_optical_theorem_analytic(self):
        sol = impedance_sphere(2.0, 1.0, 1.0)
        sigma = mie_sigma(sol)
        forward = mie_forward_amplitude(sol, Z)
        assert sigma == pytest.approx(4 * np.pi / 2.0 * forward.imag, rel=1e-10)

    def test_incidence_direction_rotates_pattern(self):
        sol = soft_sphere(2.0, 1.0)
        alpha = np.array([0.6, 0.0, 0.8])
        p1 = mie_far_field(sol, Z, 30)
        p2 = mie_far_field(sol, alpha, 30)
        # forward amplitude is rotation invariant
        a1 = farfield.eval_pattern(p1, Z)
        a2 = farfield.eval_pattern(p2, alpha)
        assert a2 == pytest.approx(a1, abs=1e-12)

    def test_coefficients_formula(self):
        sol = soft_sphere(1.0, 1.0)
        v = mie_coefficients(sol, Z, 4)
        for l in range(5):
            expected = (sol.reflection(l) * 4 * np.pi * 1j**l
                        * np.conj(specfun.spherical_harmonic(l, 0, 0.0, 0.0)))
            assert v.c[l * l + l] == pytest.approx(expected, abs=1e-14)
