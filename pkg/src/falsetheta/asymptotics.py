"""Shifted Euler-Maclaurin expansions, asymptotic coefficients of F1 and F2
at roots of unity, and exact verification of the exponential sums whose
vanishing makes those expansions finite.

Kernels are polynomial times Gaussian, P(x) exp(-Q(x)), stored with exact
rational coefficients, so every Taylor coefficient at the origin is an exact
rational.  Exponential sums live in Z[zeta_N] and are tested for zero by
division by the N-th cyclotomic polynomial.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .qseries import Cusp, Q, ShiftTable
from .specfun import BERNOULLI_MAX_ORDER, bernoulli_poly

Poly = Dict[Tuple[int, ...], Fraction]

#: exponential sums with N above this are tested numerically instead
EXACT_BUDGET = 4000


class CancellationError(ArithmeticError):
    """A sum that must vanish did not; indicates a bug, not a numerical issue."""


# ---------------------------------------------------------------------------
# polynomial x Gaussian kernels
# ---------------------------------------------------------------------------

def _padd(a: Poly, b: Poly, s: Fraction = Fraction(1)) -> Poly:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + s * v
    return {k: v for k, v in out.items() if v != 0}


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v != 0}


def _pdiff(a: Poly, i: int) -> Poly:
    out: Poly = {}
    for k, v in a.items():
        if k[i]:
            kk = list(k)
            kk[i] -= 1
            out[tuple(kk)] = out.get(tuple(kk), 0) + v * k[i]
    return out


@dataclass(frozen=True)
class PolyGaussianKernel:
    """P(x) exp(-Q(x)) in one or two variables; Q a positive definite form.

    ``poly`` and ``form`` map exponent tuples to rational coefficients.
    """

    name: str
    poly: Tuple[Tuple[Tuple[int, ...], Fraction], ...]
    form: Tuple[Tuple[Tuple[int, ...], Fraction], ...]
    dim: int = 2

    @property
    def P(self) -> Poly:
        return dict(self.poly)

    @property
    def Qp(self) -> Poly:
        return dict(self.form)

    def __call__(self, *x):
        x = [np.asarray(xi, dtype=float) for xi in x]
        return _peval(self.P, x) * np.exp(-_peval(self.Qp, x))

    @lru_cache(maxsize=None)
    def derivative(self, orders: Tuple[int, ...]) -> Poly:
        """Polynomial D with d^orders (P e^-Q) = D e^-Q, via d(P e^-Q) = (dP - P dQ) e^-Q."""
        if all(o == 0 for o in orders):
            return self.P
        i = next(j for j, o in enumerate(orders) if o)
        lower = list(orders)
        lower[i] -= 1
        D = self.derivative(tuple(lower))
        return _padd(_pdiff(D, i), _pmul(D, _pdiff(self.Qp, i)), Fraction(-1))

    @lru_cache(maxsize=None)
    def mixed_at_zero(self, *orders: int) -> Fraction:
        """Exact value of the mixed partial derivative at the origin."""
        if len(orders) != self.dim:
            raise ValueError(f"need {self.dim} derivative orders")
        return self.derivative(tuple(orders)).get((0,) * self.dim, Fraction(0))

    def _diag(self, i: int) -> float:
        key = tuple(2 if j == i else 0 for j in range(self.dim))
        return float(self.Qp[key])

    @lru_cache(maxsize=None)
    def boundary_x1(self, n2: int) -> float:
        """int_0^oo d2^n2 F(x1, 0) dx1."""
        return self._boundary(n2, free=0)

    @lru_cache(maxsize=None)
    def boundary_x2(self, n1: int) -> float:
        """int_0^oo d1^n1 F(0, x2) dx2."""
        return self._boundary(n1, free=1)

    def _boundary(self, n: int, free: int) -> float:
        if self.dim != 2:
            raise ValueError("boundary integrals need a two-variable kernel")
        orders = (0, n) if free == 0 else (n, 0)
        D = self.derivative(orders)
        c = self._diag(free)
        total = 0.0
        for k, v in D.items():
            if k[1 - free] == 0:
                total += float(v) * _moment(k[free], c)
        return total

    @lru_cache(maxsize=None)
    def full_integral(self) -> float:
        """Integral over the positive quadrant (or half-line)."""
        P = self.P
        if self.dim == 1:
            c = self._diag(0)
            return math.fsum(float(v) * _moment(k[0], c) for k, v in P.items())
        Qp = self.Qp

        def integrand(th):
            cs, sn = math.cos(th), math.sin(th)
            q = float(_peval(Qp, [np.array(cs), np.array(sn)]))
            # int_0^oo r^{j+1} e^{-q r^2} dr = Gamma((j+2)/2) / (2 q^{(j+2)/2})
            return sum(float(v) * cs ** k[0] * sn ** k[1] * math.gamma((k[0] + k[1] + 2) / 2)
                       / (2 * q ** ((k[0] + k[1] + 2) / 2)) for k, v in P.items())

        val, _ = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=0, epsrel=1e-13, limit=200)
        return val


def _peval(P: Poly, x: Sequence[np.ndarray]):
    total = 0.0
    for k, v in P.items():
        term = float(v)
        for xi, e in zip(x, k):
            term = term * xi**e
        total = total + term
    return total


def _moment(j: int, c: float) -> float:
    """int_0^oo x^j exp(-c x^2) dx."""
    return math.gamma((j + 1) / 2) / (2 * c ** ((j + 1) / 2))


def _kernel(name: str, poly: Poly, form: Poly, dim: int) -> PolyGaussianKernel:
    return PolyGaussianKernel(name, tuple(sorted(poly.items())), tuple(sorted(form.items())), dim)


_F = Fraction
QUAD_FORM: Poly = {(2, 0): _F(3), (1, 1): _F(3), (0, 2): _F(1)}

#: e^{-Q(x)}
KERNEL_F1 = _kernel("F1", {(0, 0): _F(1)}, QUAD_FORM, 2)
#: x2 e^{-Q(x)}
KERNEL_G1 = _kernel("G1", {(0, 1): _F(1)}, QUAD_FORM, 2)
#: e^{-x^2}
KERNEL_F2 = _kernel("F2", {(0,): _F(1)}, {(2,): _F(1)}, 1)
#: x e^{-x^2}
KERNEL_G2 = _kernel("G2", {(1,): _F(1)}, {(2,): _F(1)}, 1)


def gaussian_kernel(name: str) -> PolyGaussianKernel:
    """One of the four kernels F1, G1, F2, G2 by name."""
    table = {"F1": KERNEL_F1, "G1": KERNEL_G1, "F2": KERNEL_F2, "G2": KERNEL_G2}
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}") from None


# ---------------------------------------------------------------------------
# series containers and the Euler-Maclaurin engine
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticSeries:
    """sum_i coeffs[i] x^{(lowest + i) / denom}; remainder O(x^{remainder_order})."""

    coeffs: List[complex]
    variable: str = "t"
    lowest: int = 0
    remainder_order: Fraction = Fraction(1)
    denom: int = 1

    def power(self, i: int) -> Fraction:
        return Fraction(self.lowest + i, self.denom)

    def coefficient(self, power) -> complex:
        j = Fraction(power) * self.denom - self.lowest
        if j.denominator != 1 or not 0 <= j < len(self.coeffs):
            return 0.0
        return self.coeffs[int(j)]

    def __call__(self, x: float, upto: Optional[Fraction] = None) -> complex:
        terms = [c * x ** float(self.power(i)) for i, c in enumerate(self.coeffs)
                 if upto is None or self.power(i) <= upto]
        return complex(math.fsum(complex(z).real for z in terms), math.fsum(complex(z).imag for z in terms))


def _order_check(n: int):
    if n > BERNOULLI_MAX_ORDER:
        raise ValueError(f"expansion needs Bernoulli order {n} > {BERNOULLI_MAX_ORDER}")


def em_expand_2d(kernel: PolyGaussianKernel, alpha, order: int) -> AsymptoticSeries:
    """sum_{n in N0^2} F((n + alpha) T) as a series in T from T^-2 to T^order."""
    a1, a2 = Fraction(alpha[0]), Fraction(alpha[1])
    _order_check(order + 2)
    c: Dict[int, float] = {j: 0.0 for j in range(-2, order + 1)}
    c[-2] = kernel.full_integral()
    fact = math.factorial
    for n in range(0, order + 2):
        c[n - 1] -= float(bernoulli_poly(n + 1, a2)) / fact(n + 1) * kernel.boundary_x1(n)
        c[n - 1] -= float(bernoulli_poly(n + 1, a1)) / fact(n + 1) * kernel.boundary_x2(n)
    for n1 in range(order + 1):
        b1 = bernoulli_poly(n1 + 1, a1) / fact(n1 + 1)
        for n2 in range(order + 1 - n1):
            b2 = bernoulli_poly(n2 + 1, a2) / fact(n2 + 1)
            c[n1 + n2] += float(b1 * b2 * kernel.mixed_at_zero(n1, n2))
    return AsymptoticSeries([c[j] for j in range(-2, order + 1)], "T", -2, Fraction(order + 1))


def em_expand_1d(kernel: PolyGaussianKernel, beta, order: int) -> AsymptoticSeries:
    """sum_{m >= 0} f((m + beta) T) as a series in T from T^-1 to T^order."""
    beta = Fraction(beta)
    _order_check(order + 1)
    c = [kernel.full_integral()]
    for n in range(order + 1):
        c.append(-float(bernoulli_poly(n + 1, beta) / math.factorial(n + 1) * kernel.mixed_at_zero(n)))
    return AsymptoticSeries(c, "T", -1, Fraction(order + 1))


def lattice_sum(kernel: PolyGaussianKernel, alpha, T: float, cutoff: float = 12.0) -> float:
    """Direct sum_{n in N0^d} F((n + alpha) T), truncated where the Gaussian is < e^{-cutoff^2}."""
    R = int(cutoff / T) + 2
    n = np.arange(R, dtype=float)
    if kernel.dim == 1:
        x = (n + float(alpha)) * T
        return math.fsum(kernel(x))
    x1, x2 = np.meshgrid((n + float(alpha[0])) * T, (n + float(alpha[1])) * T, indexing="ij")
    return math.fsum(kernel(x1, x2).ravel())


# ---------------------------------------------------------------------------
# exact exponential sums in Z[zeta_N]
# ---------------------------------------------------------------------------

def _poly_divmod(num: List[int], den: List[int]) -> Tuple[List[int], List[int]]:
    """Division of integer polynomials (low degree first) by a monic divisor."""
    num = list(num)
    dd = len(den) - 1
    if len(num) <= dd:
        return [0], num
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        coef = num[i]
        if coef:
            quot[i - dd] = coef
            for j in range(dd + 1):
                num[i - dd + j] -= coef * den[j]
    return quot, num[:dd]


@lru_cache(maxsize=None)
def cyclotomic_poly(N: int) -> Tuple[int, ...]:
    """Phi_N by exact division of x^N - 1 by Phi_d for the proper divisors d."""
    if N < 1:
        raise ValueError("N must be positive")
    num = [-1] + [0] * (N - 1) + [1]
    for d in range(1, N):
        if N % d == 0:
            num, rem = _poly_divmod(num, list(cyclotomic_poly(d)))
            if any(rem):
                raise ArithmeticError("cyclotomic division left a remainder")
    return tuple(num)


@dataclass
class CyclotomicSum:
    """scale * sum_j coeffs[j] zeta_N^j with integer coeffs."""

    N: int
    coeffs: List[int]
    scale: Fraction = Fraction(1)
    numeric_only: bool = field(default=False)

    @classmethod
    def from_terms(cls, N: int, terms: Dict[int, Fraction], budget: int = EXACT_BUDGET) -> "CyclotomicSum":
        """Build from {exponent: rational weight}; integer coefficients after scaling."""
        L = 1
        for v in terms.values():
            L = L * Fraction(v).denominator // math.gcd(L, Fraction(v).denominator)
        coeffs = [0] * N
        for j, v in terms.items():
            coeffs[j % N] += int(Fraction(v) * L)
        return cls(N, coeffs, Fraction(1, L), numeric_only=N > budget)

    def value(self) -> complex:
        z = [c * cmath.exp(2j * math.pi * j / self.N) for j, c in enumerate(self.coeffs) if c]
        return complex(math.fsum(w.real for w in z), math.fsum(w.imag for w in z)) * float(self.scale)

    def reduced(self) -> List[int]:
        """Coefficients modulo Phi_N."""
        _, rem = _poly_divmod(self.coeffs, list(cyclotomic_poly(self.N)))
        return rem

    def is_zero(self, tol: float = 1e-10) -> bool:
        if self.numeric_only:
            norm = sum(abs(c) for c in self.coeffs) * float(self.scale) + 1.0
            return abs(self.value()) < tol * norm
        return not any(self.reduced())


def _cusp_data(cusp: Cusp):
    tab = ShiftTable(cusp.p)
    return tab, cusp.period, cusp.k * cusp.p * cusp.p


def _phase_exponent(cusp: Cusp, l1: int, l2: int, alpha) -> int:
    """j with e(h Q(l + alpha)/k) = zeta_{kp^2}^j."""
    p = cusp.p
    return cusp.h * Q(p * l1 + int(alpha[0] * p), p * l2 + int(alpha[1] * p))


def _rows(cusp: Cusp, a, size: int, sign: int = 1):
    """For each l1 < size, the multiset {sign h Q(p l + a) mod kp^2 : l2 < size}.

    ``a`` = p alpha as integers.  Rows are returned as (l1, {exponent: count}).
    """
    p, N = cusp.p, cusp.k * cusp.p * cusp.p
    for l1 in range(size):
        x1 = p * l1 + a[0]
        row: Dict[int, int] = {}
        for l2 in range(size):
            j = sign * cusp.h * Q(x1, p * l2 + a[1]) % N
            row[j] = row.get(j, 0) + 1
        yield l1, row


def _accumulate(terms: Dict[int, Fraction], row: Dict[int, int], weight):
    for j, n in row.items():
        terms[j] = terms.get(j, 0) + weight * n


def gauss_sum_main(cusp: Cusp, weights: str = "eps", alpha_index: Optional[int] = None) -> CyclotomicSum:
    """sum_S w(alpha) sum_{l mod kp/delta} e(h Q(l + alpha)/k).

    ``weights`` is "eps" or "eta"; ``alpha_index`` restricts to one shift
    with weight 1 (such single sums need not vanish).
    """
    tab, period, N = _cusp_data(cusp)
    w = {"eps": tab.eps_list, "eta": tab.eta_list}[weights]
    terms: Dict[int, Fraction] = {}
    for i, (alpha, wt) in enumerate(zip(tab.S, w)):
        if alpha_index is not None:
            if i != alpha_index:
                continue
            wt = 1
        for _, row in _rows(cusp, tab.a_vector(alpha), period):
            _accumulate(terms, row, wt)
    return CyclotomicSum.from_terms(N, terms)


def unary_gauss_sum(cusp: Cusp) -> CyclotomicSum:
    """sum_{r mod kp/delta} e(h (r + 1/p)^2 / k)."""
    _, period, N = _cusp_data(cusp)
    terms: Dict[int, Fraction] = {}
    for r in range(period):
        j = cusp.h * (cusp.p * r + 1) ** 2 % N
        terms[j] = terms.get(j, 0) + 1
    return CyclotomicSum.from_terms(N, terms)


def bernoulli_gauss_identity(cusp: Cusp, n: int, variant: str, strict: bool = True) -> CyclotomicSum:
    """The exponential sums that must vanish for the expansions to be finite.

    sumsmatch:  sum_r e(h(r+1/p)^2/k) + 2 sum_{S*} sum_l B_1(beta_1) e(hQ(l+alpha)/k)
    wantvanish: sum_{0<=l<k} B_{2n+1}(l1/k) e(-hQ(l1, l2+1-1/p)/k)          (p/delta = 1, n >= 1)
    alsowant:   sum_{0<=l<2k} B_{2n+1}(l1/2k) e(-hQ(l1, l2+1-1/p)/k)       (p/delta = 2)
    oddbern:    sum_{S*} sum_l B_{2n+1}(beta_1) e(-hQ(l+alpha)/k)             (any delta, n >= 1)

    Here beta_1 = delta (l1 + alpha1)/(kp) and l runs over [0, kp/delta)^2.
    With ``strict=False`` the two branch-specific sums are evaluated even when
    p/delta is outside their branch (where they need not vanish).
    """
    tab, period, N = _cusp_data(cusp)
    h, k, p = cusp.h, cusp.k, cusp.p
    ratio = p // cusp.delta
    terms: Dict[int, Fraction] = {}

    if variant == "sumsmatch":
        for r in range(period):
            j = h * (p * r + 1) ** 2 % N
            terms[j] = terms.get(j, 0) + 1
        for alpha in tab.Sstar:
            for l1, row in _rows(cusp, tab.a_vector(alpha), period):
                _accumulate(terms, row, 2 * bernoulli_poly(1, (l1 + alpha[0]) / period))
    elif variant in ("wantvanish", "alsowant"):
        if n < 1:
            raise ValueError(f"{variant} needs n >= 1")
        need = 1 if variant == "wantvanish" else 2
        if strict and ratio != need:
            raise ValueError(f"{variant} needs p/delta = {need}, got {ratio}")
        size = need * k
        for l1, row in _rows(cusp, (0, p - 1), size, sign=-1):
            _accumulate(terms, row, bernoulli_poly(2 * n + 1, Fraction(l1, size)))
    elif variant == "oddbern":
        if n < 1:
            raise ValueError("oddbern needs n >= 1")
        for alpha in tab.Sstar:
            for l1, row in _rows(cusp, tab.a_vector(alpha), period, sign=-1):
                _accumulate(terms, row, bernoulli_poly(2 * n + 1, (l1 + alpha[0]) / period))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return CyclotomicSum.from_terms(N, terms)


# ---------------------------------------------------------------------------
# asymptotic expansions of F1 and F2 at h/k
# ---------------------------------------------------------------------------

def _phase(cusp: Cusp, j: int) -> complex:
    N = cusp.k * cusp.p * cusp.p
    return cmath.exp(2j * math.pi * (j % N) / N)


def _collect_direct(cusp: Cusp, order: int, second: bool) -> Dict[int, complex]:
    """Coefficients of t^{j/2}: every shift expanded separately, nothing paired."""
    tab, period, _ = _cusp_data(cusp)
    p = cusp.p
    K2 = KERNEL_G1 if second else KERNEL_F1
    K1 = KERNEL_G2 if second else KERNEL_F2
    weights = tab.eta_list if second else tab.eps_list
    # F2 carries an extra t^{-1/2}; index shift in half-powers
    shift = -1 if second else 0
    top = 2 * order - shift
    out: Dict[int, complex] = {}

    def add(series: AsymptoticSeries, coeff: complex):
        for i, c in enumerate(series.coeffs):
            j = series.lowest + i
            if j <= top:
                out[j + shift] = out.get(j + shift, 0) + coeff * c * float(period) ** j

    for alpha, wt in zip(tab.S, weights):
        for l1, l2 in product(range(period), repeat=2):
            beta = ((l1 + alpha[0]) / period, (l2 + alpha[1]) / period)
            ph = _phase(cusp, _phase_exponent(cusp, l1, l2, alpha))
            add(em_expand_2d(K2, beta, top), wt * ph)
    f = Fraction(1, p)
    for b0, sign in ((f, 1), (1 - f, -1)):
        wt = -0.5 if second else 0.5 * sign
        for r in range(period):
            ph = _phase(cusp, cusp.h * (p * r + int(b0 * p)) ** 2)
            add(em_expand_1d(K1, (r + b0) / period, top), wt * ph)
    return out


def _collect_paired(cusp: Cusp, order: int, second: bool) -> Dict[int, complex]:
    """Coefficients of t^m from the reduced-shift formulas, in which alpha and
    1 - alpha have been combined so only integral powers of t appear."""
    tab, N, _ = _cusp_data(cusp)
    p = cusp.p
    fact = math.factorial
    B = bernoulli_poly
    out: Dict[int, complex] = {m: 0j for m in range(order + 1)}
    for alpha in tab.Sstar:
        wt = tab.eps_list[tab.S.index(alpha)] if not second else 1
        for l1, l2 in product(range(N), repeat=2):
            b1, b2 = (l1 + alpha[0]) / N, (l2 + alpha[1]) / N
            ph = wt * _phase(cusp, _phase_exponent(cusp, l1, l2, alpha))
            acc: Dict[int, float] = {}
            if not second:
                for m in range(order + 1):
                    acc[m] = (-2 * float(B(2 * m + 2, b2)) / fact(2 * m + 2) * KERNEL_F1.boundary_x1(2 * m + 1)
                              - 2 * float(B(2 * m + 2, b1)) / fact(2 * m + 2) * KERNEL_F1.boundary_x2(2 * m + 1)) * N ** (2 * m)
                for n1 in range(2 * order + 1):
                    for n2 in range(n1 % 2, 2 * order + 1 - n1, 2):
                        v = B(n1 + 1, b1) * B(n2 + 1, b2) / (fact(n1 + 1) * fact(n2 + 1)) * KERNEL_F1.mixed_at_zero(n1, n2)
                        m = (n1 + n2) // 2
                        acc[m] = acc.get(m, 0.0) + 2 * float(v) * N ** (n1 + n2)
            else:
                for m in range(order + 1):
                    # second term: t^{n2-1} from B_{2 n2 + 1}, n2 >= 1; third term: n1 >= 1 here
                    acc[m] = (-2 * float(B(2 * m + 3, b2)) / fact(2 * m + 3) * KERNEL_G1.boundary_x1(2 * m + 2)
                              - 2 * float(B(2 * m + 3, b1)) / fact(2 * m + 3) * KERNEL_G1.boundary_x2(2 * m + 2)) * N ** (2 * m + 1)
                for n1 in range(2 * order + 2):
                    for n2 in range(1 - n1 % 2, 2 * order + 2 - n1, 2):
                        v = B(n1 + 1, b1) * B(n2 + 1, b2) / (fact(n1 + 1) * fact(n2 + 1)) * KERNEL_G1.mixed_at_zero(n1, n2)
                        m = (n1 + n2 - 1) // 2
                        acc[m] = acc.get(m, 0.0) + 2 * float(v) * N ** (n1 + n2)
            for m, v in acc.items():
                if m <= order:
                    out[m] += ph * v
    for r in range(N):
        ph = _phase(cusp, cusp.h * (p * r + 1) ** 2)
        b = Fraction(p * r + 1, p * N)
        for m in range(order + 1):
            if not second:
                v = -float(B(2 * m + 1, b)) / fact(2 * m + 1) * float(KERNEL_F2.mixed_at_zero(2 * m)) * N ** (2 * m)
            else:
                v = float(B(2 * m + 2, b)) / fact(2 * m + 2) * float(KERNEL_G2.mixed_at_zero(2 * m + 1)) * N ** (2 * m + 1)
            out[m] += ph * v
    return out


def _check_cancellations(cusp: Cusp, second: bool):
    main = gauss_sum_main(cusp, "eta" if second else "eps")
    if not main.is_zero():
        raise CancellationError(f"main-term exponential sum does not vanish at {cusp}")
    if second:
        match = bernoulli_gauss_identity(cusp, 0, "sumsmatch")
        if not match.is_zero():
            raise CancellationError(f"1/t terms of F2 do not cancel at {cusp}")


def _assemble(cusp: Cusp, order: int, second: bool, method: str, tol: float) -> AsymptoticSeries:
    _check_cancellations(cusp, second)
    if method == "paired":
        c = _collect_paired(cusp, order, second)
        return AsymptoticSeries([c[m] for m in range(order + 1)], "t", 0, Fraction(order + 1))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    c = _collect_direct(cusp, order, second)
    scale = max(1.0, max(abs(v) for v in c.values()))
    for j, v in c.items():
        if (j < 0 or j % 2) and abs(v) > tol * scale:
            raise CancellationError(f"coefficient of t^{j}/2 is {v:.3e}, expected 0 at {cusp}")
    return AsymptoticSeries([c.get(2 * m, 0j) for m in range(order + 1)], "t", 0, Fraction(order + 1))


def asympt_F1(cusp: Cusp, order: int, method: str = "direct", tol: float = 1e-9) -> AsymptoticSeries:
    """a(0..order) with F1(e^{2 pi i h/k - t}) ~ sum a(m) t^m."""
    return _assemble(cusp, order, False, method, tol)


def asympt_F2(cusp: Cusp, order: int, method: str = "direct", tol: float = 1e-9) -> AsymptoticSeries:
    """b(0..order) with F2(e^{2 pi i h/k - t}) ~ sum b(m) t^m."""
    return _assemble(cusp, order, True, method, tol)
