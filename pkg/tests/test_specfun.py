import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from falsetheta import specfun as sf

S3 = math.sqrt(3.0)

# Frozen oracle values: 30-digit mpmath quadrature (defining integral, tail
# integral, and a polar-coordinate evaluation of the double integral for E2).
E_AT_1 = 0.987811117815197113107611703333
GAMMA_HALF_AT_PI = 0.0216042311666875165367162903651
E2_S3_07_03 = 0.936867240249472671177883738621
M2_S3_07_03 = 0.0742068449763990981205988215036
M2_S3_05_05 = -0.0276103116700286567603090943724


class TestE:
    def test_origin(self):
        assert sf.erf_E(0.0) == 0.0

    def test_odd(self):
        assert sf.erf_E(0.5) == -sf.erf_E(-0.5)

    def test_value_at_one(self):
        assert abs(sf.erf_E(1.0) - E_AT_1) < 1e-12

    @given(st.floats(-6, 6))
    def test_bounded_and_incomplete_gamma_form(self, u):
        e = sf.erf_E(u)
        assert abs(e) < 1.0 or abs(u) > 3
        if u != 0:
            expected = math.copysign(1.0, u) * (1 - sf.gamma_half(math.pi * u * u) / math.sqrt(math.pi))
            assert abs(e - expected) < 1e-14


class TestGammaHalf:
    def test_zero(self):
        assert abs(sf.gamma_half(0.0) - math.sqrt(math.pi)) < 1e-15

    def test_functional_equation_at_one(self):
        lhs = sf.gamma_half(1.0)
        rhs = -0.5 * sf.gamma_minus_half(1.0) + math.exp(-1.0)
        assert abs(lhs - rhs) < 1e-12

    def test_at_pi(self):
        assert abs(sf.gamma_half(math.pi) - GAMMA_HALF_AT_PI) < 1e-10

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            sf.gamma_half(-1.0)

    def test_monotone(self):
        g = sf.gamma_half(np.linspace(0, 20, 200))
        assert np.all(np.diff(g) < 0)

    @pytest.mark.parametrize("u", [0.01, 0.3, 0.99, 1.0, 2.5, 10.0, 40.0])
    def test_minus_half_matches_mpmath(self, u):
        mp = pytest.importorskip("mpmath")
        assert abs(sf.gamma_minus_half(u) / float(mp.gammainc(-0.5, u)) - 1) < 1e-13


class TestM:
    def test_definition(self):
        assert abs(sf.mordell_M(1.0) - (sf.erf_E(1.0) - 1.0)) < 1e-15

    def test_zero_conventions(self):
        assert sf.mordell_M(0.0) == 0.0
        assert sf.mordell_M_star(0.0) == -1.0
        assert sf.mordell_M_star(-1e-300) == pytest.approx(1.0)

    def test_bound_at_two(self):
        assert abs(sf.mordell_M(2.0)) <= 2 * math.exp(-4 * math.pi)

    def test_bound_on_grid(self):
        u = np.linspace(-8, 8, 4001)
        assert np.all(np.abs(sf.mordell_M(u)) <= 2 * np.exp(-math.pi * u * u))


class TestE2:
    def test_oracle_value(self):
        assert abs(sf.E2(S3, (0.7, 0.3)) - E2_S3_07_03) < 1e-8

    def test_saturation(self):
        assert abs(sf.E2(1.0, (10.0, 10.0)) - 1.0) < 1e-10

    def test_small_kappa_limit(self):
        assert abs(sf.E2(0.001, (1.0, 1000.0)) - sf.erf_E(1.0)) < 1e-3

    def test_limits_decrease(self):
        # lim E2(eps k; u1, eps u2 + u3/eps) = sgn(u3) E(u1)
        errs = [abs(sf.E2(eps * 0.8, (0.4, eps * 0.3 + 0.002 / eps)) - sf.erf_E(0.4)) for eps in (1e-1, 1e-2, 1e-3)]
        assert errs[0] > errs[1] > errs[2]
        # lim E2(k; eps u1 + u3/eps, eps u2 + u4/eps) = sgn(u3) sgn(u4 + k u3)
        errs = [abs(sf.E2(1.3, (eps * 0.2 - 0.6 / eps, eps * 0.1 + 0.5 / eps)) - (-1.0) * (-1.0)) for eps in (1.0, 0.5, 0.25)]
        assert errs[0] > errs[1] > errs[2]

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3))
    def test_even(self, u1, u2, k):
        assert abs(sf.E2(k, (u1, u2)) - sf.E2(k, (-u1, -u2))) < 1e-12

    def test_product_gauss_hermite(self):
        # independent check: tensor Gauss-Hermite on sign-free pieces is not
        # possible, so use a fine midpoint rule on a large box instead
        x = np.linspace(-6, 6, 2401)
        h = x[1] - x[0]
        w1, w2 = np.meshgrid(x + 0.7, x + 0.3, indexing="ij")
        f = np.sign(w1) * np.sign(w2 + S3 * w1) * np.exp(-math.pi * ((w1 - 0.7) ** 2 + (w2 - 0.3) ** 2))
        assert abs(f.sum() * h * h - sf.E2(S3, (0.7, 0.3))) < 5e-3


class TestE2Dblquad:
    def test_oracle_value(self):
        assert abs(sf.E2_dblquad(S3, (0.7, 0.3)) - E2_S3_07_03) < 1e-10

    @pytest.mark.parametrize("u", [(0.7, 0.3), (0.0, 0.8), (-2.1, 1.3), (S3 * 0.4, 0.4)])
    def test_matches_1d_route(self, u):
        assert abs(sf.E2_dblquad(S3, u) - sf.E2(S3, u)) < 1e-10

    def test_m2_routes(self):
        assert abs(sf.M2_from_E2(S3, (0.7, 0.3), route="2d") - M2_S3_07_03) < 1e-10
        with pytest.raises(ValueError):
            sf.M2_from_E2(S3, (0.7, 0.3), route="3d")


class TestM2:
    def test_oracle_value(self):
        assert abs(sf.M2(S3, (0.7, 0.3)) - M2_S3_07_03) < 1e-12

    def test_dual_route(self):
        assert abs(sf.M2(S3, (0.7, 0.3)) - sf.M2_from_E2(S3, (0.7, 0.3))) < 1e-8

    def test_even(self):
        assert sf.M2(S3, (0.7, 0.3)) == pytest.approx(sf.M2(S3, (-0.7, -0.3)), abs=1e-15)

    def test_large_argument_asymptotic(self):
        # both routes give the opposite sign to the printed asymptotic; see notes
        ratios = []
        for lam in (2.0, 3.0, 4.0):
            printed = -math.exp(-2 * math.pi * lam**2) / (lam**2 * math.pi**2 * (1 - S3))
            ratios.append(sf.M2(S3, (lam, lam)) / printed)
        dev = [abs(abs(r) - 1) for r in ratios]
        assert dev[0] > dev[1] > dev[2]
        assert dev[2] < 0.1
        assert all(r < 0 for r in ratios)

    def test_origin_uses_e2_route(self):
        assert sf.M2(S3, (0.0, 0.0)) == pytest.approx(sf.E2(S3, (0.0, 0.0)), abs=1e-12)

    @pytest.mark.parametrize("u", [(1.5, 0.0), (S3 * 0.4, 0.4), (0.0, 0.8), (-S3 * 0.2, -0.2)])
    def test_degenerate_points_agree(self, u):
        assert abs(sf.M2(S3, u) - sf.M2_from_E2(S3, u)) < 1e-9

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(1)
        u = rng.uniform(-3, 3, size=(40, 2))
        arr = sf.M2_array(S3, u[:, 0], u[:, 1])
        for (u1, u2), a in zip(u, arr):
            s = sf.M2(S3, (u1, u2))
            assert abs(a - s) <= 1e-12 * abs(s) + 1e-300

    def test_array_relative_accuracy_far_out(self):
        u1 = np.array([4.0, 6.0, 8.0])
        u2 = np.array([3.0, -5.0, 2.0])
        arr = sf.M2_array(S3, u1, u2)
        for a, x, y in zip(arr, u1, u2):
            assert abs(a / sf.M2(S3, (x, y)) - 1) < 1e-11


class TestPartials:
    def test_closed_form_d2(self):
        c = (0.3 + S3 * 0.7) / 2
        d = (0.7 - S3 * 0.3) / 2
        expected = math.exp(-math.pi * c * c) * sf.mordell_M(d)
        assert sf.M2_partials(S3, (0.7, 0.3))[1] == pytest.approx(expected, rel=1e-14)

    def test_kappa_zero(self):
        assert sf.M2_partials(0.0, (1.0, 1.0))[0] == pytest.approx(2 * math.exp(-math.pi) * sf.mordell_M(1.0), rel=1e-14)

    @pytest.mark.parametrize("u", [(0.5, 0.5), (0.7, 0.3), (-1.1, 0.4)])
    def test_richardson(self, u):
        d1, d2 = sf.M2_partials(S3, u)
        for i, exact in ((0, d1), (1, d2)):
            def fd(h):
                e = np.zeros(2)
                e[i] = h
                return (sf.M2(S3, tuple(np.add(u, e))) - sf.M2(S3, tuple(np.subtract(u, e)))) / (2 * h)
            rich = (4 * fd(1e-3) - fd(2e-3)) / 3
            assert abs(rich - exact) < 1e-6


class TestM2Star:
    def test_matches_m2_off_degeneracy(self):
        assert sf.M2_star(S3, (0.5, 0.3)) == pytest.approx(sf.M2(S3, (S3 * 1.3, 0.3)), abs=1e-12)

    def test_limit_equation(self):
        lhs = sf.M2(S3, (S3 * 0.4, 0.4)) - sf.M2_star(S3, (1e-12, 0.4))
        assert abs(lhs - sf.mordell_M(0.8)) < 1e-9
        lhs = sf.M2(S3, (S3 * 0.4, 0.4)) - sf.M2_star(S3, (-1e-12, 0.4))
        assert abs(lhs + sf.mordell_M(0.8)) < 1e-9

    def test_sgn_star_branch_at_zero(self):
        # x1 = 0 takes the sgn*(0) = 1 branch, i.e. the right-hand limit
        assert sf.M2_star(S3, (0.0, 0.4)) == pytest.approx(sf.M2_star(S3, (1e-13, 0.4)), abs=1e-10)


class TestBernoulli:
    def test_b1(self):
        x = Fraction(2, 7)
        assert sf.bernoulli_poly(1, x) == x - Fraction(1, 2)

    def test_b2_zero(self):
        assert sf.bernoulli_poly(2, 0) == Fraction(1, 6)

    def test_reflection(self):
        x = Fraction(3, 7)
        assert sf.bernoulli_poly(5, 1 - x) == -sf.bernoulli_poly(5, x)
        for m in range(0, 33):
            assert sf.bernoulli_poly(m, 1 - x) == (-1) ** m * sf.bernoulli_poly(m, x)

    def test_overflow(self):
        with pytest.raises(ValueError):
            sf.bernoulli_poly(33, Fraction(1, 2))

    def test_known_numbers(self):
        assert sf.bernoulli_poly(12, 0) == Fraction(-691, 2730)
        assert sf.bernoulli_poly(3, Fraction(1, 2)) == 0

    def test_float_input(self):
        assert sf.bernoulli_poly(4, 0.25) == pytest.approx(float(sf.bernoulli_poly(4, Fraction(1, 4))), rel=1e-15)
