"""Holomorphic q-series: the rank-two false theta function F, its pieces
f1, f2, f3, the lattice sums F1 and F2, unary false/cusp theta functions,
Shimura-type theta functions and Kontsevich's function at roots of unity.

Every evaluator takes tau rather than q. Rational powers of q are formed
as exp(2 pi i tau r) with r computed from integers, which sidesteps any
branch choice for q^(1/p).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

# 2Q as a Gram matrix, Q(x) = 3 x1^2 + 3 x1 x2 + x2^2
QFORM = np.array([[6, 3], [3, 2]])

# the six vectors a = p*alpha (mod p Z^2) of the shift set
A_VECTORS = [(-1, 2), (1, -2), (0, 1), (0, -1), (1, -1), (-1, 1)]


class DivergenceError(ValueError):
    """Raised for tau outside the upper half-plane."""


def Q(x1, x2):
    """Q(x) = 3 x1^2 + 3 x1 x2 + x2^2 (works for ints, Fractions, arrays)."""
    return 3 * x1 * x1 + 3 * x1 * x2 + x2 * x2


def radial_tau(h: int, k: int, t: float) -> complex:
    """tau = h/k + i t/(2 pi), so that q = exp(2 pi i h/k - t)."""
    return complex(h / k, t / TWO_PI)


def _check_tau(tau: complex) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise DivergenceError(f"need Im(tau) > 0, got {tau}")
    return tau


def qpow_sum(tau: complex, weights, expo_num, expo_den: int) -> complex:
    """sum_j weights[j] * exp(2 pi i tau expo_num[j]/expo_den).

    Real and imaginary parts are accumulated with math.fsum so the result
    does not depend on the order of the input arrays.
    """
    weights = np.asarray(weights, dtype=float)
    r = np.asarray(expo_num, dtype=float) / expo_den
    z = weights * np.exp(2j * math.pi * tau * r)
    return complex(math.fsum(z.real), math.fsum(z.imag))


def _radius(v: float, tol: float, growth: float, shift: float = 0.0, poly: int = 3) -> int:
    """Smallest R with R^poly * exp(-2 pi v (growth R^2 - shift R)) < tol / 1e3."""
    R = 1
    while True:
        expo = growth * R * R - shift * R
        if expo > 0 and poly * math.log(R + 1) - TWO_PI * v * expo < math.log(tol) - 7.0:
            return R
        R += 1


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    """Reduced rational h/k together with the level parameter p."""

    h: int
    k: int
    p: int = 2

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if math.gcd(self.h, self.k) != 1:
            raise ValueError(f"{self.h}/{self.k} is not reduced")
        if self.p < 2:
            raise ValueError("p must be at least 2")

    @property
    def delta(self) -> int:
        return math.gcd(self.h, self.p)

    @property
    def p1(self) -> int:
        return self.p // math.gcd(self.k, self.p)

    @property
    def p2(self) -> int:
        return math.gcd(self.k, self.p)

    @property
    def period(self) -> int:
        """kp/delta: the period of n -> exp(2 pi i (h/k) Q(n)) on alpha + Z^2."""
        return self.k * self.p // self.delta

    @classmethod
    def parse(cls, text: str, p: int = 2) -> "Cusp":
        h, k = text.split("/")
        return cls(int(h), int(k), p)


@dataclass(frozen=True)
class ShiftTable:
    """Shift sets S, S*, S~ and the weights eps, eta for a given p."""

    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")

    @cached_property
    def S(self) -> List[Tuple[Fraction, Fraction]]:
        f = Fraction(1, self.p)
        return [(1 - f, 2 * f), (f, 1 - 2 * f), (Fraction(1), f), (Fraction(0), 1 - f), (f, 1 - f), (1 - f, f)]

    @cached_property
    def Sstar(self) -> List[Tuple[Fraction, Fraction]]:
        S = self.S
        return [S[0], S[3], S[4]]

    @cached_property
    def Stilde(self) -> List[Tuple[Fraction, Fraction]]:
        return [(1 - a1, a2) for a1, a2 in self.S]

    @property
    def eps_list(self) -> List[int]:
        return [-2, -2, 1, 1, 1, 1]

    @property
    def eta_list(self) -> List[int]:
        return [1, -1, -1, 1, 1, -1]

    def _lookup(self, alpha, table: List[int]) -> int:
        # exact representatives first: for p = 2 several elements of S agree
        # mod Z^2 but carry different weights
        alpha = (Fraction(alpha[0]), Fraction(alpha[1]))
        hits = {table[i] for i, a in enumerate(self.S) if a == alpha}
        if not hits:
            red = (alpha[0] % 1, alpha[1] % 1)
            hits = {table[i] for i, a in enumerate(self.S) if (a[0] % 1, a[1] % 1) == red}
        if len(hits) != 1:
            raise KeyError(f"weight of {alpha} is not determined by its value (p = {self.p})")
        return hits.pop()

    def eps(self, alpha) -> int:
        return self._lookup(alpha, self.eps_list)

    def eta(self, alpha) -> int:
        return self._lookup(alpha, self.eta_list)

    def eps_tilde(self, alpha) -> int:
        return self.eps((1 - Fraction(alpha[0]), alpha[1]))

    def eta_tilde(self, alpha) -> int:
        return self.eta((1 - Fraction(alpha[0]), alpha[1]))

    def a_vector(self, alpha) -> Tuple[int, int]:
        return (int(alpha[0] * self.p), int(alpha[1] * self.p))


# ---------------------------------------------------------------------------
# F and its rewrites
# ---------------------------------------------------------------------------

def _F_terms(p: int, R: int):
    m1, m2 = np.meshgrid(np.arange(1, R + 1), np.arange(1, R + 1), indexing="ij")
    keep = (m1 - m2) % 3 == 0
    m1, m2 = m1[keep].astype(np.int64), m2[keep].astype(np.int64)
    mn = np.minimum(m1, m2).astype(float)
    # exponent * 3p, integer; (1-x)(1-y)(1-xy) = 1 - x - y + x^2 y + x y^2 - x^2 y^2
    base = p * p * (m1 * m1 + m2 * m2 + m1 * m2) - 3 * p * (m1 + m2) + 3
    w, e = [], []
    for s, ex in ((1, 0), (-1, m1), (-1, m2), (1, 2 * m1 + m2), (1, m1 + 2 * m2), (-1, 2 * m1 + 2 * m2)):
        w.append(s * mn)
        e.append(base + 3 * p * ex)
    return np.concatenate(w), np.concatenate(e)


def eval_F(tau: complex, p: int, tol: float = 1e-15) -> complex:
    """The rank-two false theta function F at q = e^{2 pi i tau}."""
    tau = _check_tau(tau)
    if p < 2:
        raise ValueError("p must be at least 2")
    R = _radius(tau.imag, tol, p / 3.0, 2.0)
    w, e = _F_terms(p, R)
    return qpow_sum(tau, w, e, 3 * p)


def _starred_grid(R: int):
    n1, n2 = np.meshgrid(np.arange(0, R + 1), np.arange(0, R + 1), indexing="ij")
    n1, n2 = n1.ravel().astype(np.int64), n2.ravel().astype(np.int64)
    star = np.where(n1 == 0, 0.5, 1.0)
    return n1, n2, star


def eval_f123(tau: complex, p: int, tol: float = 1e-15) -> Tuple[complex, complex, complex]:
    """(f1, f2, f3) with F/2 = f1 + f2 + f3; n1 = 0 terms carry weight 1/2."""
    tau = _check_tau(tau)
    R = _radius(tau.imag, tol, p, 3.0)
    n1, n2, star = _starred_grid(R)
    base = p * p * Q(n1, n2) + 1  # times p
    wt = star * n2
    w2 = np.concatenate([wt, -wt])

    def part(lin):
        # q^{1/p} sum* n2 q^{pQ(n)} (q^{lin} - q^{-lin})
        return qpow_sum(tau, w2, np.concatenate([base + p * lin, base - p * lin]), p)

    f1 = part(-(3 * n1 + 2 * n2))
    f2 = part(n2)
    f3 = part(3 * n1 + n2)
    return f1, f2, f3


def _lattice_piece(tau, p, R, s1: Fraction, s2: Fraction, weight2: bool, scale: Fraction):
    """scale * sum_{n >= 0} [n2 + s2 if weight2 else 1] q^{p Q(n + s)}."""
    n1, n2, _ = _starred_grid(R)
    # p Q(n+s) with s in (1/p) Z: numerator over p
    a1 = n1 * p + int(s1 * p)
    a2 = n2 * p + int(s2 * p)
    num = Q(a1, a2)  # p^2 Q(n+s); times p gives p^3 Q -> exponent p*Q = num/p
    w = (a2 / p) if weight2 else np.ones_like(a1, dtype=float)
    return float(scale) * qpow_sum(tau, w, num, p)


def _unary_piece(tau, p, R, shift: Fraction, weighted: bool, scale: Fraction, prefactor_num: int = 0, prefactor_den: int = 1, start: int = 0):
    """scale * q^{prefactor} sum_{m >= start} [m if weighted] q^{p (m + shift)^2}."""
    m = np.arange(start, R + 1, dtype=np.int64)
    den = shift.denominator
    a = m * den + shift.numerator
    # p (m+shift)^2 = p a^2 / den^2 ; add prefactor num/den' ; common denominator
    D = den * den * prefactor_den
    num = p * a * a * prefactor_den + prefactor_num * den * den
    w = m.astype(float) if weighted else np.ones(len(m))
    return float(scale) * qpow_sum(tau, w, num, D)


def eval_f123_rewritten(tau: complex, p: int, tol: float = 1e-15) -> Tuple[complex, complex, complex]:
    """f1, f2, f3 from their expansions into shifted lattice and unary sums.

    Coded independently from :func:`eval_f123`; the two must agree.
    """
    tau = _check_tau(tau)
    R = _radius(tau.imag, tol, p, 0.0) + 2
    F = Fraction
    f = F(1, p)
    L = lambda s1, s2, wt, sc: _lattice_piece(tau, p, R, F(s1), F(s2), wt, sc)
    U = lambda sh, wt, sc, pn=0, pd=1, st=0: _unary_piece(tau, p, R, F(sh), wt, sc, pn, pd, st)
    f1 = (-L(1, f, True, 1) + L(0, 1 - f, True, 1) + L(1, f, False, f) + L(0, 1 - f, False, f)
          - 0.5 * _weighted_unary(tau, p, R, f) - 0.5 * _weighted_unary(tau, p, R, 1 - f)
          + float(f / 2) * U(f, False, 1) - float(f / 2) * U(1 - f, False, 1))
    f2 = (L(1 - f, 2 * f, True, 1) - L(f, 1 - 2 * f, True, 1)
          - L(1 - f, 2 * f, False, 2 * f) - L(f, 1 - 2 * f, False, 2 * f)
          + U(-F(1, 2 * p), True, F(1, 2), 3, 4 * p, 1) + U(F(1, 2 * p), True, F(1, 2), 3, 4 * p, 1))
    f3 = (L(f, 1 - f, True, 1) - L(1 - f, f, True, 1)
          + L(f, 1 - f, False, f) + L(1 - f, f, False, f)
          - U(F(1, 2 * p), True, F(1, 2), 3, 4 * p, 1) - U(-F(1, 2 * p), True, F(1, 2), 3, 4 * p, 1))
    return f1, f2, f3


def _weighted_unary(tau, p, R, shift: Fraction) -> complex:
    """sum_{m >= 0} (m + shift) q^{p (m + shift)^2}."""
    m = np.arange(0, R + 1, dtype=np.int64)
    den = shift.denominator
    a = m * den + shift.numerator
    return qpow_sum(tau, a / den, p * a * a, den * den)


def eval_F1(tau: complex, p: int, tol: float = 1e-15) -> complex:
    """F1(q) = sum_S eps(alpha) sum_{alpha+N0^2} q^{Q(n)} + (1/2) sum_Z sgn(m+1/p) q^{(m+1/p)^2}."""
    return _F12(tau, p, tol, first=True)


def eval_F2(tau: complex, p: int, tol: float = 1e-15) -> complex:
    """F2(q) = sum_S eta(alpha) sum_{alpha+N0^2} n2 q^{Q(n)} - (1/2) sum_Z |m+1/p| q^{(m+1/p)^2}."""
    return _F12(tau, p, tol, first=False)


def tau_grid(n: int = 20, vmin: float = 0.05, vmax: float = 2.0) -> List[complex]:
    """Deterministic grid of n points: 5 real parts times n/5 log-spaced v."""
    us = (0.0, 0.13, 0.25, 0.5, -0.31)
    vs = np.geomspace(vmin, vmax, max(1, n // len(us)))
    return [complex(u, float(v)) for u in us for v in vs][:n]


def decomposition_residual(tau: complex, p: int, tol: float = 1e-15) -> float:
    """|F(tau) - (2/p) F1(p tau) - 2 F2(p tau)|."""
    return abs(eval_F(tau, p, tol) - (2 / p) * eval_F1(p * tau, p, tol) - 2 * eval_F2(p * tau, p, tol))


def weyl_residual(tau: complex, p: int, tol: float = 1e-15) -> float:
    """|F/2 - (f1 + f2 + f3)|."""
    return abs(eval_F(tau, p, tol) / 2 - sum(eval_f123(tau, p, tol)))


def lattice_part(tau: complex, p: int, alpha, weight2: bool, tol: float = 1e-15) -> complex:
    """sum_{n in alpha + N0^2} [n2] q^{Q(n)} for alpha in (1/p)Z^2."""
    tau = _check_tau(tau)
    R = _radius(tau.imag, tol, 1.0, 0.0) + 2
    n1, n2, _ = _starred_grid(R)
    a1 = n1 * p + int(Fraction(alpha[0]) * p)
    a2 = n2 * p + int(Fraction(alpha[1]) * p)
    w = a2 / p if weight2 else np.ones(len(a1))
    return qpow_sum(tau, w, Q(a1, a2), p * p)


def unary_part(tau: complex, p: int, weight: str, tol: float = 1e-15) -> complex:
    """sum_{m in Z} w(m + 1/p) q^{(m+1/p)^2}, w = sgn or abs."""
    tau = _check_tau(tau)
    R = _radius(tau.imag, tol, 1.0, 0.0) + 2
    m = np.arange(-R, R + 1, dtype=np.int64)
    a = m * p + 1
    w = np.sign(a).astype(float) if weight == "sgn" else np.abs(a) / p
    return qpow_sum(tau, w, a * a, p * p)


def _F12(tau, p, tol, first: bool) -> complex:
    tau = _check_tau(tau)
    tab = ShiftTable(p)
    parts = []
    weights = tab.eps_list if first else tab.eta_list
    for alpha, wt in zip(tab.S, weights):
        parts.append(wt * lattice_part(tau, p, alpha, not first, tol))
    if first:
        parts.append(0.5 * unary_part(tau, p, "sgn", tol))
    else:
        parts.append(-0.5 * unary_part(tau, p, "abs", tol))
    return complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))


# ---------------------------------------------------------------------------
# unary theta functions
# ---------------------------------------------------------------------------

def shimura_theta(nu: int, A: int, h: int, N: int, tau: complex, tol: float = 1e-15) -> complex:
    """Theta_nu(A, h, N; tau) = sum_{m = h mod N} m^nu q^{A m^2 / (2 N^2)}."""
    tau = _check_tau(tau)
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    if A <= 0 or N <= 0 or N % A != 0 or (h * A) % N != 0:
        raise ValueError(f"need A | N and N | hA, got A={A}, h={h}, N={N}")
    # exponent A m^2 / (2 N^2) >= (A/2) j^2 roughly with m = h + N j
    R = _radius(tau.imag, tol, A / 2.0, 0.0) + abs(h) // N + 2
    j = np.arange(-R, R + 1, dtype=np.int64)
    m = h + N * j
    w = m.astype(float) if nu == 1 else np.ones(len(m))
    return qpow_sum(tau, w, A * m * m, 2 * N * N)


def rank_one(j: int, p: int, tau: complex, tol: float = 1e-15) -> Tuple[complex, complex]:
    """(F_{j,p}(tau), f_{j,p}(tau)): false theta and weight-3/2 cusp theta,
    both over m + j/(2p), m in Z."""
    tau = _check_tau(tau)
    if not 1 <= j <= 2 * p - 1:
        raise ValueError("need 1 <= j <= 2p - 1")
    R = _radius(tau.imag, tol, 1.0, 0.0) + 2
    m = np.arange(-R, R + 1, dtype=np.int64)
    a = 2 * p * m + j
    den = 4 * p * p
    return (qpow_sum(tau, np.sign(a).astype(float), a * a, den),
            qpow_sum(tau, a / (2 * p), a * a, den))


def kontsevich_K(h: int, k: int) -> complex:
    """Kontsevich's K(q) = sum_m (q;q)_m at q = exp(2 pi i h/k); a finite sum."""
    if k <= 0 or math.gcd(h, k) != 1:
        raise ValueError("need k > 0 and gcd(h, k) = 1")
    q = cmath.exp(2j * math.pi * h / k)
    total, poch = 1.0 + 0j, 1.0 + 0j
    for m in range(1, k):
        poch *= 1 - q**m
        total += poch
    return total


# ---------------------------------------------------------------------------
# transformation of the Shimura theta functions
# ---------------------------------------------------------------------------

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def eps_d(d: int) -> complex:
    """epsilon_d = 1 for d = 1 mod 4 and i for d = 3 mod 4 (d odd)."""
    if d % 2 == 0:
        raise ValueError("d must be odd")
    return 1.0 if d % 4 == 1 else 1j


def shimura_multiplier(A: int, h: int, N: int, M: Tuple[int, int, int, int]) -> Tuple[complex, int]:
    """(mult, h') with Theta(A,h,N; M tau) = mult (c tau + d)^{1/2+nu} Theta(A,h',N; tau).

    M must lie in Gamma_0(2N) with b even. A matrix with d < 0 is replaced by
    -M, which has the same action on the upper half-plane.
    """
    a, b, c, d = M
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    if d < 0:
        a, b, c, d = -a, -b, -c, -d
    if c % (2 * N) != 0 or b % 2 != 0:
        raise ValueError("need c = 0 mod 2N and b even")
    mult = cmath.exp(2j * math.pi * float(Fraction(a * b * A * h * h, 2 * N * N) % 1))
    mult *= kronecker(2 * A * c, d) / eps_d(d)
    return mult, a * h


def shimura_transform_residual(nu: int, A: int, h: int, N: int, M: Tuple[int, int, int, int],
                               tau: complex, tol: float = 1e-15) -> float:
    """|Theta(M tau) - mult (c tau + d)^{1/2+nu} Theta(A, ah, N; tau)|."""
    a, b, c, d = M
    if d < 0:
        a, b, c, d = -a, -b, -c, -d
    mult, h2 = shimura_multiplier(A, h, N, (a, b, c, d))
    Mt = (a * tau + b) / (c * tau + d)
    lhs = shimura_theta(nu, A, h, N, Mt, tol)
    rhs = mult * (c * tau + d) ** (0.5 + nu) * shimura_theta(nu, A, h2, N, tau, tol)
    return abs(lhs - rhs)
