import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from falsetheta import qseries as qs

# Frozen oracle values: 32-digit mpmath direct summation with cutoff where
# the terms drop below 1e-40.
F_I_2 = 0.04305251979201087325958011740738
F_A_3 = complex(0.05115428956939692383994206250956, 0.03597256473251895318814283947809)
F1_I_2 = 0.18994726540384115162479202433803
F1_B_3 = complex(0.37311215581330848111467238588529, -0.07322704597844319059773857198040)
F2_B_3 = complex(-0.05964039133876924312003509692058, 0.01427947629068713240664026730012)
SHIMURA_1414_I = 0.45338382758386561012329808433996
RANK_ONE_12_I = (0.64610697672420543680278515689654, 0.14699152026245760739084372472570)

GRID = [complex(u, v) for u in (0.0, 0.13, 0.25, 0.5, -0.31) for v in (0.05, 0.2, 0.4, 1.0)]


def _decomposition_residual(tau, p):
    return abs(qs.eval_F(tau, p) - (2 / p) * qs.eval_F1(p * tau, p) - 2 * qs.eval_F2(p * tau, p))


class TestOracles:
    def test_F(self):
        assert abs(qs.eval_F(1j, 2) - F_I_2) < 1e-14
        assert abs(qs.eval_F(0.1 + 0.3j, 3) - F_A_3) < 1e-14

    def test_F1_F2(self):
        assert abs(qs.eval_F1(1j, 2) - F1_I_2) < 1e-14
        assert abs(qs.eval_F1(0.25 + 0.4j, 3) - F1_B_3) < 1e-14
        assert abs(qs.eval_F2(0.25 + 0.4j, 3) - F2_B_3) < 1e-14

    def test_F2_vanishes_for_p2(self):
        # for p = 2 the shift set has a repeated element with opposite eta
        # weights and the remaining lattice sums cancel the unary tail
        for tau in (1j, 0.1 + 0.6j, 0.37 + 0.2j):
            assert abs(qs.eval_F2(tau, 2)) < 1e-14

    def test_brute_force_F(self):
        tau = 0.1 + 0.3j
        p = 3
        total = 0j
        for m1 in range(1, 40):
            for m2 in range(1, 40):
                if (m1 - m2) % 3:
                    continue
                x = cmath.exp(2j * math.pi * tau * m1)
                y = cmath.exp(2j * math.pi * tau * m2)
                ex = Fraction(p * (m1 * m1 + m2 * m2 + m1 * m2), 3) - m1 - m2 + Fraction(1, p)
                total += min(m1, m2) * cmath.exp(2j * math.pi * tau * ex) * (1 - x) * (1 - y) * (1 - x * y)
        assert abs(total - qs.eval_F(tau, p)) < 1e-13


class TestIdentities:
    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_decomposition_grid(self, p):
        worst = max(_decomposition_residual(t, p) for t in GRID)
        assert worst < 1e-12

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_weyl_rewrite_grid(self, p):
        worst = max(abs(qs.eval_F(t, p) / 2 - sum(qs.eval_f123(t, p))) for t in GRID)
        assert worst < 1e-12

    def test_public_residuals(self):
        grid = qs.tau_grid()
        assert len(grid) == 20
        assert min(t.imag for t in grid) == pytest.approx(0.05)
        assert max(t.imag for t in grid) == pytest.approx(2.0)
        assert qs.decomposition_residual(grid[3], 3) == _decomposition_residual(grid[3], 3)
        assert qs.weyl_residual(0.25 + 0.4j, 5) < 1e-12

    def test_decomposition_at_anchor(self):
        assert _decomposition_residual(0.25 + 0.4j, 2) < 1e-12
        assert _decomposition_residual(0.1 + 0.3j, 3) < 1e-12

    @pytest.mark.parametrize("p,tau", [(5, 0.2j), (2, 1j), (3, 0.17 + 0.1j)])
    def test_rewritten_f123(self, p, tau):
        for a, b in zip(qs.eval_f123(tau, p), qs.eval_f123_rewritten(tau, p)):
            assert abs(a - b) < 1e-12

    def test_starred_weight_audit(self):
        # f1 = q^{1/p} sum* n2 q^{pQ(n)} (q^{-(3n1+2n2)} - q^{3n1+2n2}); giving
        # the n1 = 0 column full weight changes f1 by exactly half that column
        tau, p = 0.3j, 2
        f1 = qs.eval_f123(tau, p)[0]

        def term(n1, n2):
            lin = 3 * n1 + 2 * n2
            base = Fraction(1, p) + p * qs.Q(n1, n2)
            return n2 * (cmath.exp(2j * math.pi * tau * (base - lin)) - cmath.exp(2j * math.pi * tau * (base + lin)))

        full = sum(term(n1, n2) for n1 in range(30) for n2 in range(30))
        col = sum(term(0, n2) for n2 in range(30))
        assert abs(col) > 1e-3
        assert abs(full - f1 - col / 2) < 1e-14

    @pytest.mark.parametrize("fn", [qs.eval_F, qs.eval_F1, qs.eval_F2])
    def test_cutoff_doubling(self, fn):
        tau = 0.2 + 0.1j
        coarse = fn(tau, 3, 1e-15)
        fine = fn(tau, 3, 1e-30)
        assert abs(coarse - fine) < 1e-14


class TestShiftTable:
    def test_weights(self):
        tab = qs.ShiftTable(3)
        f = Fraction(1, 3)
        assert tab.eps((1 - f, 2 * f)) == -2
        assert tab.eps((f, 1 - 2 * f)) == -2
        assert tab.eta((f, 1 - 2 * f)) == -1
        assert tab.eta((0, 1 - f)) == 1
        assert sorted(tab.eps_list) == [-2, -2, 1, 1, 1, 1]

    def test_sets(self):
        tab = qs.ShiftTable(5)
        f = Fraction(1, 5)
        assert tab.Sstar == [(1 - f, 2 * f), (0, 1 - f), (f, 1 - f)]
        assert tab.Stilde == [(1 - a1, a2) for a1, a2 in tab.S]

    def test_quadratic_form(self):
        assert np.all(np.linalg.eigvalsh(qs.QFORM) > 0)
        for a in qs.A_VECTORS:
            assert qs.Q(*a) == 1

    def test_a_vectors_match_shifts(self):
        for p in (2, 3, 7):
            tab = qs.ShiftTable(p)
            for alpha in tab.S:
                a = tab.a_vector(alpha)
                assert all((Fraction(ai) - p * al) % p == 0 for ai, al in zip(a, alpha))


class TestCusp:
    def test_derived(self):
        c = qs.Cusp(2, 9, 4)
        assert (c.delta, c.p1, c.p2, c.period) == (2, 4, 1, 18)

    def test_reduced(self):
        with pytest.raises(ValueError):
            qs.Cusp(2, 4, 3)

    def test_radial(self):
        assert qs.radial_tau(1, 3, 0.5) == complex(1 / 3, 0.5 / (2 * math.pi))


class TestShimura:
    def test_oracle(self):
        assert abs(qs.shimura_theta(1, 4, 1, 4, 1j) - SHIMURA_1414_I) < 1e-14

    def test_direct_sum(self):
        tau = 0.3 + 0.7j
        m = np.arange(-200, 201) * 4 + 1
        direct = sum(mm * cmath.exp(2j * math.pi * tau * mm * mm / 8) for mm in m)
        assert abs(qs.shimura_theta(1, 4, 1, 4, tau) - direct) < 1e-13

    def test_periodic_in_h(self):
        tau = 0.1 + 0.5j
        assert qs.shimura_theta(1, 4, 1, 4, tau) == pytest.approx(qs.shimura_theta(1, 4, 9, 4, tau), abs=1e-14)

    @pytest.mark.parametrize("nu", [0, 1])
    def test_parity(self, nu):
        tau = 0.2 + 0.4j
        assert qs.shimura_theta(nu, 6, 2, 12, tau) == pytest.approx((-1) ** nu * qs.shimura_theta(nu, 6, -2, 12, tau), abs=1e-13)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            qs.shimura_theta(1, 3, 1, 4, 1j)
        with pytest.raises(ValueError):
            qs.shimura_theta(1, 2, 1, 4, 1j)

    @pytest.mark.parametrize("nu,A,h,N,M,tau", [
        (1, 4, 1, 4, (1, 0, 8, 1), 0.1 + 0.9j),
        (1, 4, 1, 4, (-101, -38, 8, 3), 0.05 + 0.2j),
        (0, 8, 2, 8, (-73, -32, 16, 7), 0.05 + 0.1j),
        (1, 6, 2, 12, (5, 2, 72, 29), -0.2 + 0.3j),
        (1, 4, 1, 4, (-1, 0, -8, -1), 0.1 + 0.9j),
    ])
    def test_transformation(self, nu, A, h, N, M, tau):
        scale = abs(qs.shimura_theta(nu, A, h, N, tau)) + 1.0
        assert qs.shimura_transform_residual(nu, A, h, N, M, tau) < 1e-10 * scale

    def test_kronecker(self):
        assert qs.kronecker(2, 7) == 1
        assert qs.kronecker(3, 7) == -1
        assert qs.kronecker(-1, 3) == -1
        assert qs.kronecker(5, 15) == 0
        assert qs.kronecker(8, 1) == 1


class TestRankOne:
    def test_oracle(self):
        F, f = qs.rank_one(1, 2, 1j)
        assert abs(F - RANK_ONE_12_I[0]) < 1e-14
        assert abs(f - RANK_ONE_12_I[1]) < 1e-14

    def test_sign_split(self):
        tau, p, j = 0.1 + 0.2j, 3, 2
        F, _ = qs.rank_one(j, p, tau)
        m = np.arange(-80, 81)
        a = 2 * p * m + j
        terms = np.exp(2j * math.pi * tau * a * a / (4 * p * p))
        full = terms.sum()
        neg = terms[a < 0].sum()
        assert abs((F - full) - (-2 * neg)) < 1e-13

    def test_cusp_form_symmetry(self):
        # j -> 2p - j flips the sign of f and fixes F up to sign of the
        # reflected lattice
        tau, p = 0.15 + 0.25j, 3
        F1, f1 = qs.rank_one(1, p, tau)
        F5, f5 = qs.rank_one(5, p, tau)
        assert abs(f1 + f5) < 1e-13
        assert abs(F1 + F5) < 1e-13

    def test_range(self):
        with pytest.raises(ValueError):
            qs.rank_one(0, 2, 1j)


class TestKontsevich:
    def test_q_one(self):
        assert qs.kontsevich_K(0, 1) == 1

    def test_minus_one(self):
        assert abs(qs.kontsevich_K(1, 2) - 3) < 1e-15

    def test_cube_root(self):
        z = cmath.exp(2j * math.pi / 3)
        direct = 1 + (1 - z) + (1 - z) * (1 - z * z)
        assert abs(qs.kontsevich_K(1, 3) - direct) < 1e-15
        assert abs(qs.kontsevich_K(1, 3) - complex(5.5, -0.86602540378443864676)) < 1e-14

    def test_fifth_root(self):
        assert abs(qs.kontsevich_K(2, 5) - complex(12.118033988749894848, -0.085756712576904929494)) < 1e-13

    def test_not_coprime(self):
        with pytest.raises(ValueError):
            qs.kontsevich_K(2, 4)


class TestGuards:
    @pytest.mark.parametrize("fn", [qs.eval_F, qs.eval_F1, qs.eval_F2])
    def test_divergence(self, fn):
        with pytest.raises(qs.DivergenceError):
            fn(0.3 + 0j, 2)
        with pytest.raises(qs.DivergenceError):
            fn(0.3 - 0.1j, 2)

    def test_qpow_sum_deterministic(self):
        rng = np.random.default_rng(3)
        w = rng.normal(size=300)
        e = rng.integers(0, 400, size=300)
        perm = rng.permutation(300)
        assert qs.qpow_sum(0.3j, w, e, 7) == qs.qpow_sum(0.3j, w[perm], e[perm], 7)
