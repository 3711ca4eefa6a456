"""Tests for the parameter map, immersions, metrics, and chart changes.

Oracles: quadrature of the defining integrals, finite-difference first
fundamental forms, scipy's incomplete elliptic integral for the H1
substitution, and the wedge-product construction for the printed
immersion columns.
"""

import io
import math

import numpy as np
import pytest
import scipy.special as ss
from scipy.integrate import quad

from lawson_bipolar.special_functions import complete_E, complete_K
from lawson_bipolar.surface_model import (
    HTransform,
    InvalidParametersError,
    ParityClass,
    Topology,
    admissible_pairs,
    area_closed_form,
    bipolar_column,
    bipolar_immersion,
    bipolar_metric,
    derive_params,
    h1_inverse,
    h_transforms,
    immersion_rows,
    klein_deck_map,
    lawson_I,
    lawson_normal,
    metric_f,
    params_from_nm,
    parambip_column,
    period_a,
    theta_of_y,
    theta_of_y_quadrature,
    v_of_z,
    write_immersion_csv,
    write_immersion_json,
    z_of_v,
)


class TestDeriveParams:
    @pytest.mark.parametrize("r,k,n,m,topo", [
        (2, 1, 3, 1, Topology.TORUS),
        (3, 1, 2, 1, Topology.KLEIN_BOTTLE),
        (5, 1, 3, 2, Topology.TORUS),
        (5, 3, 4, 1, Topology.KLEIN_BOTTLE),
        (8, 7, 15, 1, Topology.TORUS),
    ])
    def test_examples(self, r, k, n, m, topo):
        p = derive_params(r, k)
        assert (p.n, p.m, p.topology) == (n, m, topo)

    @pytest.mark.parametrize("r,k", [(4, 2), (2, 3), (1, 1), (3, 0), (6, 3)])
    def test_rejects_inadmissible(self, r, k):
        with pytest.raises(InvalidParametersError):
            derive_params(r, k)

    def test_topology_rule_exact(self):
        for r, k in admissible_pairs(8):
            p = derive_params(r, k)
            assert (p.topology is Topology.KLEIN_BOTTLE) == (r * k % 4 == 3)
            assert p.n > p.m >= 1
            assert math.gcd(p.n, p.m) == 1

    def test_parity_class_matches_nm_parities(self):
        for r, k in admissible_pairs(8):
            p = derive_params(r, k)
            assert (p.parity_class is ParityClass.RK_3_MOD_4) == (
                p.n % 2 == 0 and p.m % 2 == 1)

    def test_from_nm_round_trip(self):
        for r, k in admissible_pairs(8):
            p = derive_params(r, k)
            assert params_from_nm(p.n, p.m) == p


class TestPeriodAndTheta:
    def test_period_formula(self):
        p = params_from_nm(2, 1)
        assert period_a(p) == pytest.approx(2.0 * complete_K(p.modulus), abs=1e-15)

    def test_degenerate_modulus_formula(self):
        # the (n, m) = (1, 0) limit of a = (4/n) K(m/n) collapses to 2 pi
        from lawson_bipolar.special_functions import EllipticModulus
        assert 4.0 * complete_K(EllipticModulus.from_k(0.0)) == pytest.approx(
            2.0 * math.pi, abs=1e-14)

    def test_period_against_quadrature(self):
        p = params_from_nm(3, 1)
        oracle, _ = quad(
            lambda t: 1.0 / (3.0 * math.sqrt(1.0 - (1 / 3) ** 2 * math.cos(t) ** 2)),
            0.0, 2.0 * math.pi, epsabs=1e-13, epsrel=1e-13)
        assert period_a(p) == pytest.approx(oracle, abs=1e-12)

    def test_theta_anchors(self):
        p = params_from_nm(2, 1)
        a = period_a(p)
        assert theta_of_y(0.0, p) == pytest.approx(0.0, abs=1e-14)
        assert theta_of_y(a / 4.0, p) == pytest.approx(math.pi / 2, abs=1e-12)
        assert theta_of_y(a, p) == pytest.approx(2.0 * math.pi, abs=1e-12)

    def test_theta_quadrature_cross_residual(self):
        for nm in [(2, 1), (3, 2), (9, 7)]:
            p = params_from_nm(*nm)
            a = period_a(p)
            for y in np.linspace(-0.3 * a, 1.4 * a, 61):
                assert abs(theta_of_y(y, p) - theta_of_y_quadrature(y, p)) < 1e-10

    def test_metric_anchor_values(self):
        p = params_from_nm(2, 1)
        a = period_a(p)
        n2, m2 = 4.0, 1.0
        assert metric_f(0.0, p).f == pytest.approx((n2 - m2) / 2, abs=1e-12)
        assert metric_f(a / 4, p).f == pytest.approx((n2 + m2) / 2, abs=1e-12)

    def test_metric_symmetries(self):
        p = params_from_nm(3, 2)
        a = period_a(p)
        for y in np.linspace(0.0, a, 17):
            f = metric_f(y, p).f
            assert f > 0.0
            assert metric_f(-y, p).f == pytest.approx(f, abs=1e-12)
            assert metric_f(y + a / 2, p).f == pytest.approx(f, abs=1e-12)

    def test_area_integral_identity(self):
        # 2 pi * integral of f over one period = 4 pi (n+m) E(2 sqrt(mn)/(m+n))
        p = params_from_nm(2, 1)
        a = period_a(p)
        integral, _ = quad(lambda y: metric_f(y, p).f, 0.0, a,
                           epsabs=1e-13, epsrel=1e-13, limit=200)
        closed = 4.0 * math.pi * 3.0 * complete_E(p.h_modulus)
        assert 2.0 * math.pi * integral == pytest.approx(closed, abs=1e-10)


def _fd_partial(fun, x, h=1e-5):
    return (8.0 * (fun(x + h) - fun(x - h)) - (fun(x + 2 * h) - fun(x - 2 * h))) / (12.0 * h)


class TestLawsonImmersion:
    def test_base_point(self):
        np.testing.assert_allclose(lawson_I(0.0, 0.0, 2, 1), [1, 0, 0, 0], atol=1e-15)

    def test_unit_norm_and_normal(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            u, v = rng.uniform(0, 2 * math.pi, 2)
            I = lawson_I(u, v, 3, 2)
            N = lawson_normal(u, v, 3, 2)
            assert abs(I @ I - 1.0) < 1e-14
            assert abs(N @ N - 1.0) < 1e-13
            assert abs(I @ N) < 1e-13

    def test_induced_metric_by_finite_differences(self):
        rng = np.random.default_rng(29)
        r, k = 3, 2
        for _ in range(30):
            u, v = rng.uniform(0.1, 2.9, 2)
            du = _fd_partial(lambda t: lawson_I(t, v, r, k), u)
            dv = _fd_partial(lambda t: lawson_I(u, t, r, k), v)
            guu = r * r * math.cos(v) ** 2 + k * k * math.sin(v) ** 2
            assert abs(du @ du - guu) < 1e-6
            assert abs(dv @ dv - 1.0) < 1e-6
            assert abs(du @ dv) < 1e-6


class TestBipolarImmersion:
    def test_orthogonality_and_norm(self):
        rng = np.random.default_rng(31)
        for r, k in [(2, 1), (3, 1), (5, 2)]:
            p = derive_params(r, k)
            for _ in range(200):
                u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
                pt = bipolar_immersion(u, v, p)        # runtime-checks orthogonality
                assert abs(pt.norm() - 1.0) < 1e-13

    def test_wedge_matches_printed_column_even_rk(self):
        p = derive_params(2, 1)
        col = bipolar_column(0.0, 0.0, 2, 1)
        w = bipolar_immersion(0.0, 0.0, p)
        # coordinate slots: (12-plane, c6, c3, c5, c4)
        np.testing.assert_allclose(
            w.coords, [0.0, col[5], col[2], col[4], col[3]], atol=1e-13)

    def test_wedge_matches_parambip_odd_rk(self):
        rng = np.random.default_rng(37)
        p = derive_params(3, 1)
        kept = np.array([p.m, p.n, 0, 0, 0, 0]) / math.hypot(p.m, p.n)
        for _ in range(200):
            u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
            col = parambip_column(u, v, p)
            w = bipolar_immersion(u, v, p)
            expected = [kept @ np.pad(col[:2], (0, 4)),
                        col[5], col[2], col[4], col[3]]
            np.testing.assert_allclose(w.coords, expected, atol=1e-12)

    def test_parambip_equals_universal_column(self):
        rng = np.random.default_rng(41)
        p = derive_params(5, 3)
        for _ in range(50):
            u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
            np.testing.assert_allclose(parambip_column(u, v, p),
                                       bipolar_column(u, v, 5, 3), atol=1e-14)

    def test_group_invariance_of_column(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
            base = bipolar_column(u, v, 2, 1)
            np.testing.assert_allclose(bipolar_column(u, v + math.pi, 2, 1),
                                       base, atol=1e-12)
            np.testing.assert_allclose(bipolar_column(u + 2 * math.pi, v, 2, 1),
                                       base, atol=1e-12)


class TestBipolarMetric:
    def test_value_at_v0_odd_chart(self):
        # (n, m) = (2, 1): du^2 coefficient ((n+m)^4 + (n^2-m^2)^2)/(n+m)^2 = 10
        p = derive_params(3, 1)
        guu, gvv = bipolar_metric(0.3, 0.0, p)
        assert guu == pytest.approx(10.0, abs=1e-12)
        assert gvv == pytest.approx(10.0 / 9.0, abs=1e-12)

    def test_even_chart_carries_quarter_du_factor(self):
        # same (n, m) formula evaluates to 4x the even-rk du^2 coefficient
        p_even = derive_params(2, 1)            # n=3, m=1
        n, m = 3, 1
        for v in np.linspace(0.0, math.pi, 9):
            P = (n + m) ** 2 - 4 * m * n * math.sin(v) ** 2
            Q = (P * P + (n * n - m * m) ** 2) / P
            guu, gvv = bipolar_metric(0.0, v, p_even)
            assert guu == pytest.approx(Q / 4.0, rel=1e-13)
            assert gvv == pytest.approx(Q / P, rel=1e-13)

    def test_first_fundamental_form_oracle(self):
        rng = np.random.default_rng(47)
        p = derive_params(3, 1)
        for _ in range(100):
            u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0.05, math.pi - 0.05)
            du = _fd_partial(lambda t: bipolar_column(t, v, 3, 1), u)
            dv = _fd_partial(lambda t: bipolar_column(u, t, 3, 1), v)
            guu, gvv = bipolar_metric(u, v, p)
            assert abs(du @ du - guu) < 1e-6
            assert abs(dv @ dv - gvv) < 1e-6
            assert abs(du @ dv) < 1e-6


class TestHTransforms:
    def test_h1_at_zero(self):
        p = derive_params(3, 1)
        assert h_transforms((0.7, 0.0), HTransform.H1, p) == (0.7, 0.0)

    def test_h2_squared_advances_u_by_pi(self):
        p = derive_params(3, 1)
        pt = (0.3, 0.11)
        pt2 = h_transforms(h_transforms(pt, HTransform.H2, p), HTransform.H2, p)
        assert pt2[0] == pytest.approx(pt[0] + math.pi, abs=1e-15)
        assert pt2[1] == pytest.approx(pt[1], abs=1e-15)

    def test_h3_shift(self):
        p = derive_params(2, 1)
        K = complete_K(p.modulus)
        u, y = h_transforms((0.5, 0.2), HTransform.H3, p)
        assert (u, y) == (0.5, pytest.approx(0.4 + K / 3.0, abs=1e-15))
        u2, y2 = h_transforms((0.5, 0.2), HTransform.H3PRIME, p)
        assert (u2, y2) == (1.0, pytest.approx(y, abs=1e-15))

    def test_z_of_v_against_scipy(self):
        for nm in [(2, 1), (3, 2), (9, 7)]:
            p = params_from_nm(*nm)
            kh2 = p.h_modulus.k ** 2
            s = p.n + p.m
            for v in np.linspace(-1.0, 4.0, 41):
                oracle = ss.ellipkinc(v, kh2) / s
                assert abs(z_of_v(v, p) - oracle) < 1e-12

    def test_v_of_z_round_trip(self):
        p = params_from_nm(2, 1)
        for v in np.linspace(0.0, math.pi, 21):
            assert v_of_z(z_of_v(v, p), p) == pytest.approx(v, abs=1e-12)
        assert h1_inverse(h_transforms((0.1, 0.8), HTransform.H1, p), p)[1] == \
            pytest.approx(0.8, abs=1e-12)

    def test_h1_period_identity(self):
        # K(2 sqrt(mn)/(n+m))/(n+m) = a/4
        for nm in [(2, 1), (4, 1)]:
            p = params_from_nm(*nm)
            assert complete_K(p.h_modulus) / (p.n + p.m) == pytest.approx(
                period_a(p) / 4.0, rel=1e-14)

    def test_klein_deck_invariance(self):
        rng = np.random.default_rng(53)
        p = derive_params(3, 1)
        for _ in range(100):
            u = rng.uniform(0, 2 * math.pi)
            v = rng.uniform(0.01, math.pi - 0.01)
            u2, v2 = klein_deck_map(u, v, p)
            np.testing.assert_allclose(parambip_column(u2, v2, p),
                                       parambip_column(u, v, p), atol=1e-9)

    @pytest.mark.parametrize("r,k", [(2, 1), (3, 1)])
    def test_pullback_isometry_on_grid(self, r, k):
        from lawson_bipolar.verification import isometry_check
        assert isometry_check(r, k, grid=64).passed


class TestAreaAndExport:
    def test_klein_area_is_half(self):
        klein = derive_params(3, 1)
        full = 4.0 * math.pi * 3.0 * complete_E(klein.h_modulus)
        assert area_closed_form(klein) == full / 2.0

    def test_torus_area(self):
        torus = derive_params(2, 1)
        assert area_closed_form(torus) == pytest.approx(
            16.0 * math.pi * complete_E(torus.h_modulus), rel=1e-15)

    def test_immersion_rows_and_writers(self):
        p = derive_params(2, 1)
        rows = immersion_rows(p, 6, 5)
        assert rows.shape == (30, 7)
        norms = np.linalg.norm(rows[:, 2:], axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

        buf1, buf2 = io.StringIO(), io.StringIO()
        write_immersion_csv(buf1, p, rows)
        write_immersion_csv(buf2, p, rows)
        assert buf1.getvalue() == buf2.getvalue()
        lines = buf1.getvalue().splitlines()
        assert lines[0] == "# r=2 k=1 n=3 m=1 topology=Torus"
        assert lines[1] == "u,v,x1,x2,x3,x4,x5"
        assert len(lines) == 32

        jbuf = io.StringIO()
        write_immersion_json(jbuf, p, rows)
        import json
        doc = json.loads(jbuf.getvalue())
        assert doc["params"] == {"r": 2, "k": 1, "n": 3, "m": 1}
        assert len(doc["rows"]) == 30
