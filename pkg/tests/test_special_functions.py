"""Tests for the elliptic special functions.

Oracles: adaptive quadrature of the defining integrals, scipy.special
(an independent Cephes-based implementation), classical identities, and
high-order finite differences for the Weierstrass ODE.
"""

import math

import numpy as np
import pytest
import scipy.special as ss
from scipy.integrate import quad

from lawson_bipolar.special_functions import (
    DomainError,
    EllipticModulus,
    PoleProximityError,
    WeierstrassInvariants,
    complete_E,
    complete_K,
    jacobi_am,
    jacobi_sncndn,
    weierstrass_p,
    weierstrass_real_period,
)


def mod(k):
    return EllipticModulus.from_k(k)


# (g2, g3) rows of the (n, m) = (2, 1) profile tables: covers both
# discriminant signs and a near-degenerate positive case
WP_CASES = [
    WeierstrassInvariants(73 / 12, -10 / 3 + 125 / 216),
    WeierstrassInvariants(-8 / 3, 1 + 1 / 27),
    WeierstrassInvariants(193 / 12, 14 - 343 / 216),
]


class TestModulus:
    def test_complement(self):
        m = mod(0.6)
        assert m.k_prime == pytest.approx(0.8, abs=1e-15)

    def test_rejects_bad_modulus(self):
        with pytest.raises(DomainError):
            mod(1.5)
        with pytest.raises(DomainError):
            mod(-0.1)
        with pytest.raises(DomainError):
            EllipticModulus(0.5, 0.5)


class TestCompleteIntegrals:
    def test_K_at_zero(self):
        assert complete_K(mod(0.0)) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_K_against_quadrature(self):
        k = 0.5
        oracle, _ = quad(lambda t: 1.0 / math.sqrt(1 - k * k * math.sin(t) ** 2),
                         0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        assert complete_K(mod(k)) == pytest.approx(oracle, rel=1e-12)

    def test_K_landen_identity(self):
        # (1/(m+n)) K(2 sqrt(mn)/(m+n)) = (1/n) K(m/n) at (n, m) = (2, 1)
        n, m = 2, 1
        lhs = complete_K(mod(2 * math.sqrt(m * n) / (m + n))) / (m + n)
        rhs = complete_K(mod(m / n)) / n
        assert abs(lhs - rhs) < 1e-12

    def test_K_domain_error(self):
        with pytest.raises(DomainError):
            complete_K(mod(1.0))

    def test_E_endpoints(self):
        assert complete_E(mod(0.0)) == pytest.approx(math.pi / 2, abs=1e-15)
        assert complete_E(mod(1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_E_against_quadrature(self):
        k = 2 * math.sqrt(2) / 3  # feeds the (3, 1) eigenvalue functional
        oracle, _ = quad(lambda t: math.sqrt(1 - k * k * math.sin(t) ** 2),
                         0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        assert complete_E(mod(k)) == pytest.approx(oracle, rel=1e-12)

    def test_monotonicity_on_grid(self):
        ks = np.linspace(0.0, 0.995, 100)
        Ks = [complete_K(mod(k)) for k in ks]
        Es = [complete_E(mod(k)) for k in ks]
        assert np.all(np.diff(Ks) > 0)
        assert np.all(np.diff(Es) < 0)

    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.99])
    def test_against_scipy(self, k):
        assert complete_K(mod(k)) == pytest.approx(ss.ellipk(k * k), rel=1e-14)
        assert complete_E(mod(k)) == pytest.approx(ss.ellipe(k * k), rel=1e-14)


class TestJacobi:
    def test_origin(self):
        assert jacobi_sncndn(0.0, mod(0.7)) == (0.0, 1.0, 1.0)

    def test_quarter_period(self):
        m = mod(0.7)
        K = complete_K(m)
        sn, cn, dn = jacobi_sncndn(K, m)
        assert sn == pytest.approx(1.0, abs=1e-13)
        assert cn == pytest.approx(0.0, abs=1e-13)
        assert dn == pytest.approx(m.k_prime, abs=1e-13)

    def test_landen_ascent_identity(self):
        # sn[(1+a) n z, 2 sqrt(a)/(1+a)] = (1+a) sn(nz, a)/(1 + a sn^2(nz, a))
        alpha, n, z = 0.5, 2, 0.3
        big = mod(2 * math.sqrt(alpha) / (1 + alpha))
        lhs = jacobi_sncndn((1 + alpha) * n * z, big)[0]
        sn, _, _ = jacobi_sncndn(n * z, mod(alpha))
        rhs = (1 + alpha) * sn / (1 + alpha * sn * sn)
        assert abs(lhs - rhs) < 1e-11

    def test_pythagorean_identities(self):
        rng = np.random.default_rng(7)
        for k in (0.1, 0.5, 0.77, 0.9922):
            m = mod(k)
            K = complete_K(m)
            for w in rng.uniform(-4 * K, 4 * K, 50):
                sn, cn, dn = jacobi_sncndn(w, m)
                assert abs(sn * sn + cn * cn - 1.0) < 1e-12
                assert abs(dn * dn + k * k * sn * sn - 1.0) < 1e-12

    def test_parity(self):
        m = mod(0.6)
        for w in (0.2, 0.9, 2.3):
            sn, cn, dn = jacobi_sncndn(w, m)
            sn_m, cn_m, dn_m = jacobi_sncndn(-w, m)
            assert sn_m == pytest.approx(-sn, abs=1e-14)
            assert cn_m == pytest.approx(cn, abs=1e-14)
            assert dn_m == pytest.approx(dn, abs=1e-14)

    def test_shift_identities(self):
        m = mod(0.77)
        K = complete_K(m)
        w = 0.4123
        sn, cn, dn = jacobi_sncndn(w, m)
        sn2, cn2, dn2 = jacobi_sncndn(w + K, m)
        assert sn2 == pytest.approx(cn / dn, abs=1e-13)
        assert cn2 == pytest.approx(-m.k_prime * sn / dn, abs=1e-13)
        assert dn2 == pytest.approx(m.k_prime / dn, abs=1e-13)

    def test_against_scipy_over_four_periods(self):
        rng = np.random.default_rng(11)
        for k in (0.3, 0.707, 0.95):
            m = mod(k)
            K = complete_K(m)
            for w in rng.uniform(-4 * K, 4 * K, 100):
                got = jacobi_sncndn(w, m)
                ref = ss.ellipj(w, k * k)[:3]
                np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_amplitude_matches_scipy(self):
        rng = np.random.default_rng(13)
        for k in (0.3, 0.77):
            m = mod(k)
            K = complete_K(m)
            for w in rng.uniform(-4 * K, 4 * K, 100):
                assert jacobi_am(w, m) == pytest.approx(
                    ss.ellipj(w, k * k)[3], abs=1e-13)


def _wp_band_points(inv, rng, count):
    """Sample arguments at least a quarter period from every pole."""
    period = weierstrass_real_period(inv)
    u = rng.uniform(0.25, 0.45, count)
    return period * np.where(rng.uniform(size=count) < 0.5, u, 1.0 - u)


class TestWeierstrass:
    @pytest.mark.parametrize("inv", WP_CASES)
    def test_laurent_leading_term(self, inv):
        y = 1e-4
        assert abs(y * y * weierstrass_p(y, inv) - 1.0) < 1e-6

    @pytest.mark.parametrize("inv", WP_CASES)
    def test_defining_ode_by_finite_differences(self, inv):
        rng = np.random.default_rng(17)
        h = 3e-4
        for y in _wp_band_points(inv, rng, 100):
            f = lambda t: weierstrass_p(t, inv)
            dp = (-f(y - 3 * h) + 9 * f(y - 2 * h) - 45 * f(y - h)
                  + 45 * f(y + h) - 9 * f(y + 2 * h) + f(y + 3 * h)) / (60 * h)
            p = f(y)
            assert abs(dp * dp - (4 * p ** 3 - inv.g2 * p - inv.g3)) < 1e-8

    @pytest.mark.parametrize("inv", WP_CASES)
    def test_evenness(self, inv):
        rng = np.random.default_rng(19)
        for y in _wp_band_points(inv, rng, 50):
            assert abs(weierstrass_p(y, inv) - weierstrass_p(-y, inv)) < 1e-10

    @pytest.mark.parametrize("inv", WP_CASES)
    def test_periodicity(self, inv):
        period = weierstrass_real_period(inv)
        for y in (0.31 * period, 0.44 * period):
            assert weierstrass_p(y + period, inv) == pytest.approx(
                weierstrass_p(y, inv), rel=1e-10)

    def test_pole_proximity_error(self):
        inv = WP_CASES[0]
        period = weierstrass_real_period(inv)
        with pytest.raises(PoleProximityError):
            weierstrass_p(1e-10, inv)
        with pytest.raises(PoleProximityError):
            weierstrass_p(period + 1e-10, inv)

    def test_degenerate_invariants_rejected(self):
        with pytest.raises(DomainError):
            weierstrass_p(0.5, WeierstrassInvariants(3.0, 1.0))  # disc = 0


class TestWeierstrassAgainstProfile:
    def test_phi2_formula_matches_ode_profile(self):
        # P-form of the third profile function against direct integration
        from lawson_bipolar.phi_system import (closed_form_weierstrass,
                                               integrate_system)
        from lawson_bipolar.surface_model import params_from_nm, period_a

        params = params_from_nm(2, 1)
        profile = integrate_system(params, tol=1e-10, n_points=512)
        a = period_a(params)
        poles = np.array([0.0, 0.25 * a, 0.5 * a, 0.75 * a, a])
        checked = 0
        for y, state in zip(profile.grid, profile.states):
            if np.min(np.abs(poles - y)) < 0.02 * a:
                continue
            mags = closed_form_weierstrass(y, params)
            assert abs(mags[2] - abs(state[2])) < 1e-6
            checked += 1
        assert checked >= 100
