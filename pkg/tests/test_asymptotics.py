import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import integrate

from falsetheta import asymptotics as asy
from falsetheta.qseries import Cusp, eval_F1, eval_F2, radial_tau

F = Fraction
KERNELS = [asy.KERNEL_F1, asy.KERNEL_G1]


def taylor_coefficient(kernel, orders):
    """orders! * [x^orders] of P(x) exp(-Q(x)), from the exponential series."""
    total = 0
    deg = sum(orders)
    term = {(0,) * kernel.dim: F(1)}  # (-Q)^j / j!
    for j in range(deg // 2 + 1):
        prod = asy._pmul(kernel.P, term)
        total += prod.get(tuple(orders), 0)
        term = {k: v / (j + 1) for k, v in asy._pmul(term, {k: -v for k, v in kernel.Qp.items()}).items()}
    return total * math.prod(math.factorial(o) for o in orders)


def slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


class TestKernels:
    @pytest.mark.parametrize("kernel", KERNELS)
    def test_mixed_matches_taylor(self, kernel):
        for n1, n2 in product(range(7), repeat=2):
            assert kernel.mixed_at_zero(n1, n2) == taylor_coefficient(kernel, (n1, n2))

    @pytest.mark.parametrize("kernel", [asy.KERNEL_F2, asy.KERNEL_G2])
    def test_one_dim_taylor(self, kernel):
        for n in range(12):
            assert kernel.mixed_at_zero(n) == taylor_coefficient(kernel, (n,))

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_finite_differences(self, kernel):
        # derivative polynomial evaluated away from 0 against central differences
        x = np.array([0.3, 0.2])
        for orders in [(1, 0), (0, 2), (2, 1), (3, 3), (4, 2)]:
            D = kernel.derivative(orders)
            exact = float(asy._peval(D, list(x))) * math.exp(-float(asy._peval(kernel.Qp, list(x))))

            def fd(f, i, n, y, h):
                if n == 0:
                    return f(y)
                e = np.zeros(2)
                e[i] = h
                return (fd(f, i, n - 1, y + e, h) - fd(f, i, n - 1, y - e, h)) / (2 * h)

            def both(h):
                g = lambda y: fd(lambda z: float(kernel(z[0], z[1])), 1, orders[1], y, h)
                return fd(g, 0, orders[0], x, h)

            rich = (4 * both(0.01) - both(0.02)) / 3
            assert abs(rich - exact) <= 1e-4 * max(1.0, abs(exact))

    def test_mixed_at_zero_finite_difference(self):
        # orders <= 6 at the origin, relative 1e-6, using Richardson on a step sweep
        k = asy.KERNEL_F1
        for n1, n2 in [(1, 0), (0, 1), (1, 1), (2, 0), (2, 2), (3, 1)]:
            D1 = k.derivative((0, n2))
            f = lambda y: float(asy._peval(D1, [np.array(y), np.array(0.0)])) * math.exp(-3 * y * y)
            vals = []
            for h in (1e-2, 5e-3):
                # n1-th central difference from the closed form in x2
                coeffs = [(-1) ** j * math.comb(n1, j) for j in range(n1 + 1)]
                vals.append(sum(c * f((n1 / 2 - j) * h) for j, c in enumerate(coeffs)) / h**n1)
            rich = (4 * vals[1] - vals[0]) / 3
            exact = float(k.mixed_at_zero(n1, n2))
            assert abs(rich - exact) <= 1e-6 * max(1.0, abs(exact))

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_boundary_integrals_by_quadrature(self, kernel):
        for n in range(6):
            D2 = kernel.derivative((0, n))
            D1 = kernel.derivative((n, 0))
            q1 = integrate.quad(lambda x: float(asy._peval(D2, [np.array(x), np.array(0.0)])) * math.exp(-3 * x * x), 0, np.inf)[0]
            q2 = integrate.quad(lambda x: float(asy._peval(D1, [np.array(0.0), np.array(x)])) * math.exp(-x * x), 0, np.inf)[0]
            assert kernel.boundary_x1(n) == pytest.approx(q1, rel=1e-10, abs=1e-12)
            assert kernel.boundary_x2(n) == pytest.approx(q2, rel=1e-10, abs=1e-12)

    def test_full_integrals(self):
        assert asy.KERNEL_F1.full_integral() == pytest.approx(math.pi / (6 * math.sqrt(3)), rel=1e-13)
        g1 = integrate.dblquad(lambda y, x: y * math.exp(-(3 * x * x + 3 * x * y + y * y)), 0, 12, 0, 12, epsabs=1e-13)[0]
        assert asy.KERNEL_G1.full_integral() == pytest.approx(g1, rel=1e-10)
        assert asy.KERNEL_F2.full_integral() == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
        assert asy.KERNEL_G2.full_integral() == pytest.approx(0.5, rel=1e-15)

    def test_unknown_kernel(self):
        with pytest.raises(ValueError):
            asy.gaussian_kernel("H3")


class TestEulerMaclaurin:
    @pytest.mark.parametrize("M", [1, 2, 3])
    @pytest.mark.parametrize("kernel,alpha", [
        (asy.KERNEL_F1, (F(1, 3), F(1, 5))),
        (asy.KERNEL_F1, (F(1, 4), F(2, 3))),
        (asy.KERNEL_G1, (F(1, 3), F(2, 3))),
    ])
    def test_remainder_slope(self, kernel, alpha, M):
        ser = asy.em_expand_2d(kernel, alpha, M)
        Ts = [0.05, 0.025, 0.0125]
        res = [abs(asy.lattice_sum(kernel, alpha, T) - ser(T).real) for T in Ts]
        assert abs(slope(Ts, res) - (M + 1)) < 0.2

    def test_half_one_shift(self):
        # alpha = (1/2, 1): B_{n+1}(1/2) = 0 for even n, and the T^3 term vanishes,
        # so the remainder after T^2 drops straight to T^4
        alpha = (F(1, 2), F(1))
        ser = asy.em_expand_2d(asy.KERNEL_F1, alpha, 3)
        assert ser.coefficient(3) == 0.0
        Ts = [0.05, 0.025, 0.0125]
        for M, expected in ((1, 2), (2, 4), (3, 4)):
            res = [abs(asy.lattice_sum(asy.KERNEL_F1, alpha, T) - ser(T, upto=M).real) for T in Ts]
            assert abs(slope(Ts, res) - expected) < 0.2

    def test_gaussian_product_kernel(self):
        # e^{-x1^2 - x2^2} at alpha = 0 factorises into two 1-D expansions
        k2 = asy._kernel("g", {(0, 0): F(1)}, {(2, 0): F(1), (0, 2): F(1)}, 2)
        s2 = asy.em_expand_2d(k2, (0, 0), 4)
        s1 = asy.em_expand_1d(asy.KERNEL_F2, 0, 5)
        prod = np.convolve(s1.coeffs, s1.coeffs)
        for j in range(-2, 5):
            assert s2.coefficient(j) == pytest.approx(prod[j + 2], abs=1e-13)
        # constant term: B1(0)^2 F(0,0); the boundary pieces only feed T^-1
        assert s2.coefficient(0) == pytest.approx(0.25, abs=1e-13)

    def test_half_shift_kills_first_boundary_terms(self):
        s = asy.em_expand_2d(asy.KERNEL_F1, (F(1, 2), F(1, 2)), 3)
        assert s.coefficient(-1) == 0.0

    def test_one_dim_slope(self):
        # G2 has vanishing even derivatives at 0, so stop before an odd power
        ser = asy.em_expand_1d(asy.KERNEL_G2, F(1, 3), 2)
        Ts = [0.1, 0.05, 0.025]
        res = [abs(asy.lattice_sum(asy.KERNEL_G2, F(1, 3), T) - ser(T).real) for T in Ts]
        assert abs(slope(Ts, res) - 3) < 0.2

    def test_order_overflow(self):
        with pytest.raises(ValueError):
            asy.em_expand_2d(asy.KERNEL_F1, (0, 0), 31)


class TestCyclotomic:
    def test_phi(self):
        assert asy.cyclotomic_poly(1) == (-1, 1)
        assert asy.cyclotomic_poly(4) == (1, 0, 1)
        assert asy.cyclotomic_poly(12) == (1, 0, -1, 0, 1)
        assert len(asy.cyclotomic_poly(105)) - 1 == 48
        assert -2 in asy.cyclotomic_poly(105)

    def test_zero_and_nonzero(self):
        # 1 + z + z^2 = 0 in Z[zeta_3]
        assert asy.CyclotomicSum(3, [1, 1, 1]).is_zero()
        assert not asy.CyclotomicSum(3, [1, 1, 0]).is_zero()
        # z^0 + z^2 = 0 in Z[zeta_4]
        assert asy.CyclotomicSum(4, [1, 0, 1, 0]).is_zero()

    def test_exact_matches_numeric(self):
        s = asy.gauss_sum_main(Cusp(2, 3, 2), alpha_index=0)
        assert not s.is_zero()
        assert abs(s.value()) > 1e-3

    def test_numeric_fallback_flagged(self):
        s = asy.CyclotomicSum.from_terms(10, {0: F(1), 5: F(1)}, budget=5)
        assert s.numeric_only and s.is_zero()


class TestIdentities:
    @pytest.mark.parametrize("h,k,p", [(1, 1, 2), (1, 5, 3), (1, 3, 2), (2, 3, 4), (5, 7, 5), (0, 1, 3)])
    def test_main_sums(self, h, k, p):
        assert asy.gauss_sum_main(Cusp(h, k, p)).is_zero()
        assert asy.gauss_sum_main(Cusp(h, k, p), "eta").is_zero()

    def test_single_shift_is_not_zero(self):
        # with p/delta = 1 each shift gives a nonzero Gauss sum; the weights cancel them
        c = Cusp(2, 3, 2)
        assert all(not asy.gauss_sum_main(c, alpha_index=i).is_zero() for i in range(6))

    def test_single_shift_vanishes_when_p_over_delta_is_2(self):
        # at 1/3 with p = 2 the sum over l mod 2 already kills every shift
        c = Cusp(1, 3, 2)
        assert all(asy.gauss_sum_main(c, alpha_index=i).is_zero() for i in range(6))

    @pytest.mark.parametrize("h,k,p", [(1, 1, 2), (1, 1, 3), (2, 1, 2), (3, 4, 3), (2, 5, 4), (4, 3, 6)])
    def test_sumsmatch(self, h, k, p):
        assert asy.bernoulli_gauss_identity(Cusp(h, k, p), 0, "sumsmatch").is_zero()

    def test_sumsmatch_sides_nonzero(self):
        # the identity is not trivially 0 = 0 at (1,1,2)
        assert not asy.unary_gauss_sum(Cusp(1, 1, 2)).is_zero()

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_wantvanish(self, n):
        assert asy.bernoulli_gauss_identity(Cusp(3, 4, 3), n, "wantvanish").is_zero()
        assert asy.bernoulli_gauss_identity(Cusp(3, 5, 3), n, "wantvanish").is_zero()
        assert asy.bernoulli_gauss_identity(Cusp(2, 3, 2), n, "wantvanish").is_zero()

    def test_wantvanish_needs_its_branch(self):
        # 1/3 with p = 3 has p/delta = 3; the sum is then genuinely nonzero
        with pytest.raises(ValueError):
            asy.bernoulli_gauss_identity(Cusp(1, 3, 3), 1, "wantvanish")
        assert not asy.bernoulli_gauss_identity(Cusp(1, 3, 3), 1, "wantvanish", strict=False).is_zero()
        assert asy.bernoulli_gauss_identity(Cusp(1, 3, 3), 1, "oddbern").is_zero()

    @pytest.mark.parametrize("n", [1, 2])
    def test_alsowant(self, n):
        assert asy.bernoulli_gauss_identity(Cusp(2, 3, 4), n, "alsowant").is_zero()
        assert asy.bernoulli_gauss_identity(Cusp(1, 2, 2), n, "oddbern").is_zero()

    def test_alsowant_at_1_2_2(self):
        # p/delta = 2 needs h odd with p = 2; the listed cusp 1/2 has p/delta = 2
        assert asy.bernoulli_gauss_identity(Cusp(1, 2, 2), 1, "alsowant").is_zero()

    def test_branch_guards(self):
        with pytest.raises(ValueError):
            asy.bernoulli_gauss_identity(Cusp(1, 3, 2), 1, "wantvanish")
        with pytest.raises(ValueError):
            asy.bernoulli_gauss_identity(Cusp(3, 4, 3), 0, "wantvanish")
        with pytest.raises(ValueError):
            asy.bernoulli_gauss_identity(Cusp(1, 3, 3), 1, "bogus")


class TestExpansions:
    def test_F1_at_1_1_2(self):
        ser = asy.asympt_F1(Cusp(1, 1, 2), 0)
        ts = [0.04, 0.02, 0.01]
        res = [abs(eval_F1(radial_tau(1, 1, t), 2) - ser(t)) for t in ts]
        assert slope(ts, res) >= 1

    def test_F1_at_1_3_2(self):
        ser = asy.asympt_F1(Cusp(1, 3, 2), 2)
        ts = [0.04, 0.02, 0.01]
        res = [abs(eval_F1(radial_tau(1, 3, t), 2) - ser(t)) for t in ts]
        assert slope(ts, res) >= 3 - 0.2

    def test_F2_at_1_2_3(self):
        ser = asy.asympt_F2(Cusp(1, 2, 3), 0)
        ts = [0.04, 0.02, 0.01]
        res = [abs(eval_F2(radial_tau(1, 2, t), 3) - ser(t)) for t in ts]
        assert slope(ts, res) >= 1

    @pytest.mark.parametrize("h,k,p", [(1, 1, 2), (1, 3, 2), (1, 2, 3), (1, 1, 3), (2, 3, 4)])
    def test_paired_route_agrees(self, h, k, p):
        c = Cusp(h, k, p)
        for fn in (asy.asympt_F1, asy.asympt_F2):
            a = fn(c, 3).coeffs
            b = fn(c, 3, method="paired").coeffs
            assert max(abs(x - y) for x, y in zip(a, b)) < 1e-10 * max(1.0, max(abs(x) for x in a))

    def test_F2_vanishes_for_p2(self):
        ser = asy.asympt_F2(Cusp(1, 3, 2), 2)
        assert max(abs(c) for c in ser.coeffs) < 1e-12

    def test_coefficients_stable_under_order(self):
        c = Cusp(1, 2, 3)
        a = asy.asympt_F1(c, 2).coeffs
        b = asy.asympt_F1(c, 4).coeffs[:3]
        assert max(abs(x - y) for x, y in zip(a, b)) < 1e-12

    def test_alternate_branch(self):
        # p/delta = 2: cusp 2/3 with p = 4
        c = Cusp(2, 3, 4)
        ser = asy.asympt_F2(c, 2)
        ts = [0.04, 0.02, 0.01]
        res = [abs(eval_F2(radial_tau(2, 3, t), 4) - ser(t)) for t in ts]
        assert slope(ts, res) >= 2.8
