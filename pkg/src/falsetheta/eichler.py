"""Single and iterated Eichler integrals of theta-type kernels.

Integrals from -conj(tau) to i*oo are taken along w = -conj(tau) + i s,
s >= 0, on which -i(w + tau) = 2v + s is a positive real number. Error
integrals anchored at a cusp x0 = d/c run along w = x0 + i sigma^2; the
square-root substitution absorbs the sigma^-1 singularity of non-cuspidal
weight-1/2 kernels at the cusp.

Everything is discretised with composite Gauss-Legendre rules on
geometrically graded panels. Inner integrals of iterated integrals are
read off a per-panel spectral integration matrix at the outer nodes, so a
double integral costs the same number of kernel evaluations as a single
one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .qseries import ShiftTable, kronecker, shimura_multiplier
from .specfun import ToleranceError, gamma_scaled

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)
# exp(-LOG_CUT) is far below double precision relative to O(1) integrals
LOG_CUT = 45.0
NODES = (16, 24, 32)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mat2Z:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.as_tuple()} is not 1")

    @classmethod
    def parse(cls, text: str) -> "Mat2Z":
        a, b, c, d = (int(x) for x in text.replace(";", ",").split(","))
        return cls(a, b, c, d)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def star(self) -> "Mat2Z":
        """Conjugate by diag(-1, 1)."""
        return Mat2Z(self.a, -self.b, -self.c, self.d)

    def __neg__(self) -> "Mat2Z":
        return Mat2Z(-self.a, -self.b, -self.c, -self.d)

    def act(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def j(self, tau: complex) -> complex:
        return self.c * tau + self.d

    def in_gamma0(self, N: int) -> bool:
        return self.c % N == 0

    def in_gamma_p(self, p: int) -> bool:
        return (self.c % (12 * p) == 0 and self.b % (4 * p) == 0
                and self.d % (2 * p) in (1, 2 * p - 1))


# ---------------------------------------------------------------------------
# panel quadrature with spectral integration matrices
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    V = np.polynomial.legendre.legvander(x, n)
    # Legendre coefficients of the interpolant: exact discrete orthogonality
    to_coef = ((2 * np.arange(n) + 1) / 2.0)[:, None] * V[:, :n].T * w[None, :]
    head = np.empty((n, n))
    head[:, 0] = x + 1.0
    for m in range(1, n):
        head[:, m] = (V[:, m + 1] - V[:, m - 1]) / (2 * m + 1)
    H = head @ to_coef
    return x, w, H, w[None, :] - H


class _Grid:
    """Composite Gauss-Legendre grid on consecutive panels."""

    def __init__(self, breaks: np.ndarray, n: int):
        x, w, H, T = _legendre(n)
        a, b = breaks[:-1], breaks[1:]
        self.half = (b - a) / 2.0
        self.nodes = (a + b)[:, None] / 2.0 + self.half[:, None] * x[None, :]
        self.weights = self.half[:, None] * w[None, :]
        self._H, self._T = H, T

    def integral(self, f: np.ndarray) -> complex:
        return complex(np.sum(self.weights * f))

    def _totals(self, f):
        return np.sum(self.weights * f, axis=1)

    def head(self, f: np.ndarray) -> np.ndarray:
        """int from the first break to each node."""
        tot = self._totals(f)
        before = np.concatenate([[0.0], np.cumsum(tot)[:-1]])
        return self.half[:, None] * (f @ self._H.T) + before[:, None]

    def tail(self, f: np.ndarray) -> np.ndarray:
        """int from each node to the last break."""
        tot = self._totals(f)
        after = np.concatenate([np.cumsum(tot[::-1])[::-1][1:], [0.0]])
        return self.half[:, None] * (f @ self._T.T) + after[:, None]


def _geometric(first: float, stop: float) -> np.ndarray:
    """0, first, 2 first, 4 first, ... with the last break at stop."""
    br = [0.0]
    x = first
    while x < stop:
        br.append(x)
        x *= 2.0
    br.append(stop)
    return np.array(br)


def _towards_zero(top: float, smallest: float) -> np.ndarray:
    """Breaks on [0, top] refined geometrically towards 0."""
    br = [top]
    while br[-1] > smallest:
        br.append(br[-1] / 2.0)
    br.append(0.0)
    return np.array(br[::-1])


def _adaptive(compute: Callable[[int], complex], tol: float, what: str) -> Tuple[complex, float]:
    prev = compute(NODES[0])
    for n in NODES[1:]:
        cur = compute(n)
        err = abs(cur - prev)
        if err <= tol:
            return cur, err
        prev = cur
    raise ToleranceError(what, err)


def _power(x: np.ndarray, expo: float) -> np.ndarray:
    # principal branch; every path here keeps Re(x) >= 0 and x != 0
    return np.power(x.astype(complex), expo)


def _positive_path(x: np.ndarray) -> np.ndarray:
    if not (np.all(np.isreal(x)) and np.all(np.real(x) > 0)):
        raise AssertionError("-i(w + tau) left the positive real axis")
    return np.real(x)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

class Kernel:
    """A kernel g(w) on the upper half-plane.

    ``const`` is the limit of g at i*oo and g(w) - const is
    O(exp(-2 pi decay Im w)). ``weight`` is the k in (-i(w + tau))^(k-2).
    """

    weight: float
    const: complex
    decay: float

    def __call__(self, w):
        raise NotImplementedError

    def near(self, x0: Fraction, eps):
        """g(x0 + eps) for small eps in the upper half-plane."""
        return self(float(x0) + np.asarray(eps))

    def terms(self, im_min: float):
        """(coefficients, exponents) of a finite exponential expansion
        sum c e^{2 pi i lam w} accurate for Im w >= im_min, or None."""
        return None

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class FunctionKernel(Kernel):
    """A user-supplied callable with declared decay."""

    func: Callable
    weight: float
    decay: float
    const: complex = 0.0

    def __call__(self, w):
        return np.asarray(self.func(np.asarray(w)), dtype=complex)


ZERO = FunctionKernel(lambda w: np.zeros(np.shape(w)), 1.5, 1.0)


def _zero(g: Kernel) -> bool:
    return g is ZERO or g.is_zero


@dataclass(frozen=True, eq=False)
class UnaryTheta(Kernel):
    """coef * Theta_nu(A, h, N; scale w) = coef sum_{m = h mod N} m^nu e(kappa m^2 w)
    with kappa = scale A / (2 N^2)."""

    nu: int
    A: int
    h: int
    N: int
    scale: Fraction = Fraction(1)
    coef: complex = 1.0

    def __post_init__(self):
        if self.nu not in (0, 1) or self.A <= 0 or self.N <= 0:
            raise ValueError("need nu in {0, 1} and A, N > 0")
        object.__setattr__(self, "scale", Fraction(self.scale))

    @property
    def kappa(self) -> Fraction:
        return self.scale * Fraction(self.A, 2 * self.N * self.N)

    @property
    def weight(self) -> float:
        return 0.5 + self.nu

    @property
    def const(self) -> complex:
        return self.coef if (self.nu == 0 and self.h % self.N == 0) else 0.0

    @property
    def decay(self) -> float:
        r = self.h % self.N
        m = min(r, self.N - r) or self.N
        return float(self.kappa) * m * m

    @property
    def is_zero(self) -> bool:
        return self.coef == 0 or (self.nu == 1 and (2 * self.h) % self.N == 0)

    def _ms(self, im_min: float) -> np.ndarray:
        k = float(self.kappa)
        mmax = math.sqrt((LOG_CUT + 10.0) / (TWO_PI * k * im_min)) + 1.0
        jmax = int(mmax / self.N) + 2 + abs(self.h) // self.N
        return self.h + self.N * np.arange(-jmax, jmax + 1)

    def terms(self, im_min: float):
        m = self._ms(im_min).astype(float)
        c = self.coef * (m if self.nu else np.ones_like(m))
        return c.astype(complex), float(self.kappa) * m * m

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        if _zero(self):
            return np.zeros(w.shape, complex)
        c, lam = self.terms(float(np.min(w.imag)))
        flat = w.reshape(-1)
        vals = np.exp(2j * math.pi * np.outer(flat, lam)) @ c
        return vals.reshape(w.shape)

    # --- behaviour near a rational point -------------------------------
    def near(self, x0: Fraction, eps):
        eps = np.asarray(eps, dtype=complex)
        out = np.empty(eps.shape, complex)
        if _zero(self):
            out[...] = 0
            return out
        x0 = Fraction(x0)
        k = float(self.kappa)
        a = -2j * k * eps                 # e(kappa m^2 eps) = exp(-pi a m^2)
        kx = self.kappa * x0
        L = kx.denominator
        P = self.N * L
        direct_cost = 2.0 * np.sqrt(LOG_CUT / (math.pi * a.real)) / self.N
        inv_a = 1.0 / a
        dual_cost = 2.0 * P * np.sqrt(LOG_CUT / (math.pi * inv_a.real)) * L / P + L
        use_dual = dual_cost < direct_cost
        if np.any(~use_dual):
            out[~use_dual] = self(float(x0) + eps[~use_dual])
        if np.any(use_dual):
            out[use_dual] = self._dual(x0, kx, L, P, a[use_dual])
        return out

    def _dual(self, x0, kx, L, P, a):
        # Poisson summation over m = x_r + P j, x_r = h + N r, r mod L
        xr = self.h + self.N * np.arange(L)
        phase = np.array([cmath.exp(2j * math.pi * float((kx * int(x) * int(x)) % 1)) for x in xr])
        kmax = int(P * math.sqrt(LOG_CUT / (math.pi * float(np.min((1.0 / a).real))))) + 2
        kk = np.arange(-kmax, kmax + 1)
        # S(k) = sum_r phase_r e(k x_r / P), periodic in k mod P
        res = np.array([(phase * np.exp(2j * math.pi * ((int(k) * xr) % P) / P)).sum()
                        for k in range(P)])
        S = res[kk % P]
        xi = kk / P
        g = np.exp(-math.pi * np.outer(1.0 / a, xi * xi))
        if self.nu == 0:
            vals = (g @ S) * a ** -0.5
        else:
            vals = (g @ (-1j * xi * S)) * a ** -1.5
        return self.coef * vals / P

    # --- modular behaviour ---------------------------------------------
    def multiplier(self, M: Mat2Z) -> complex:
        """chi(M) with g(M w) = chi(M) (c w + d)^(1/2 + nu) g(w), read off the
        Shimura transformation law; requires d > 0."""
        if M.d <= 0:
            raise ValueError("multiplier needs d > 0; use -M")
        b2 = M.b * self.scale
        c2 = Fraction(M.c) / self.scale
        if b2.denominator != 1 or c2.denominator != 1:
            raise ValueError("matrix incompatible with the kernel scaling")
        mult, h2 = shimura_multiplier(self.A, self.h, self.N, (M.a, int(b2), int(c2), M.d))
        if (h2 - self.h) % self.N == 0:
            return mult
        if (h2 + self.h) % self.N == 0:
            return mult * (-1) ** self.nu
        raise ValueError("kernel is not an eigenfunction of this matrix")


def false_theta_kernel(j: int, p: int) -> UnaryTheta:
    """f_{j,p}(w) = sum (m + j/2p) q^{(m + j/2p)^2} = Theta_1(2p, j, 2p; w/p) / 2p."""
    return UnaryTheta(1, 2 * p, j, 2 * p, Fraction(1, p), 1.0 / (2 * p))


def exponential_kernel(lam: float, weight: float = 1.5) -> FunctionKernel:
    """w -> e^{2 pi i lam w}, a one-term kernel."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return FunctionKernel(lambda w: np.exp(2j * math.pi * lam * w), weight, lam)


# ---------------------------------------------------------------------------
# integrals towards i*oo
# ---------------------------------------------------------------------------

def _check_tau(tau) -> complex:
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    return tau


def _const_tail(x: np.ndarray, k: float) -> np.ndarray:
    """int_x^oo y^(k-2) dy for a constant kernel term; needs k < 1."""
    if k >= 1:
        raise ValueError("a constant term is only integrable at weight < 1")
    return x ** (k - 1) / (1 - k)


def _s_breaks(v: float, decay: float, tol: float) -> np.ndarray:
    stop = max((LOG_CUT + math.log1p(1 / tol)) / (TWO_PI * decay) - v, 8 * v)
    return _geometric(v / 64.0, stop)


def _min_decay(*gs: Kernel) -> float:
    return min(g.decay for g in gs)


def eichler_single(g: Kernel, tau, tol: float = 1e-10, full_output: bool = False):
    """I_g(tau) = int_{-conj tau}^{i oo} g(w) (-i(w + tau))^(k-2) dw."""
    tau = _check_tau(tau)
    if _zero(g):
        return (0j, 0.0) if full_output else 0j
    v = tau.imag
    w0 = -tau.conjugate()
    k = g.weight
    breaks = _s_breaks(v, g.decay, tol)

    def compute(n):
        grid = _Grid(breaks, n)
        x = _positive_path(2 * v + grid.nodes + 0j)
        G = (g(w0 + 1j * grid.nodes) - g.const) * x ** (k - 2)
        return 1j * grid.integral(G)

    val, err = _adaptive(compute, tol, "single Eichler integral")
    if g.const:
        val += 1j * g.const * _const_tail(2 * v, k)
    return (val, err) if full_output else val


def _exp_integral(lam: np.ndarray, k: float, x: np.ndarray, v: float) -> np.ndarray:
    """e^{2 pi lam v} * int_x^oo e^{-2 pi lam y} y^(k-2) dy, outer in x, inner in lam.

    Equals (2 pi lam)^(1-k) Gamma(k-1, 2 pi lam x) e^{2 pi lam v}; written with
    the scaled incomplete gamma to keep it finite. lam = 0 gives the algebraic
    tail."""
    x = np.asarray(x, float)[..., None]
    lam = np.asarray(lam, float)
    out = np.empty(np.broadcast_shapes(x.shape, lam.shape))
    pos = lam > 0
    X = TWO_PI * lam[pos] * x
    out[..., pos] = ((TWO_PI * lam[pos]) ** (1 - k) * gamma_scaled(k - 1, X)
                     * np.exp(-TWO_PI * lam[pos] * (x - v)))
    if np.any(~pos):
        out[..., ~pos] = _const_tail(x, k)
    return out


def eichler_single_series(g: Kernel, tau, tol: float = 1e-12) -> complex:
    """I_g(tau) term by term: each exponential integrates to an incomplete gamma value."""
    tau = _check_tau(tau)
    if _zero(g):
        return 0j
    terms = g.terms(tau.imag)
    if terms is None:
        raise ValueError("kernel has no exponential expansion")
    c, lam = terms
    v, u = tau.imag, tau.real
    vals = _exp_integral(lam, g.weight, np.array(2 * v), v)
    return complex(1j * np.sum(c * np.exp(-2j * math.pi * lam * u) * vals))


def eichler_double(g1: Kernel, g2: Kernel, tau, tol: float = 1e-10, full_output: bool = False):
    """I_{g1,g2}(tau) = int_{-conj tau}^{i oo} g1(w1) (-i(w1+tau))^(k1-2)
    int_{w1}^{i oo} g2(w2) (-i(w2+tau))^(k2-2) dw2 dw1."""
    tau = _check_tau(tau)
    if _zero(g1) or _zero(g2):
        return (0j, 0.0) if full_output else 0j
    v = tau.imag
    w0 = -tau.conjugate()
    k1, k2 = g1.weight, g2.weight
    c1, c2 = g1.const, g2.const
    breaks = _s_breaks(v, _min_decay(g1, g2), tol)
    S = breaks[-1]

    def compute(n):
        grid = _Grid(breaks, n)
        s = grid.nodes
        x = _positive_path(2 * v + s + 0j)
        w = w0 + 1j * s
        G2 = (g2(w) - c2) * x ** (k2 - 2)
        H2 = grid.tail(G2)
        if c2:
            H2 = H2 + c2 * _const_tail(x, k2)
        G1 = g1(w) * x ** (k1 - 2)
        val = -grid.integral(G1 * H2)
        if c1 and c2:
            # beyond S only the constant parts survive
            X = 2 * v + S
            val -= c1 * c2 / (1 - k2) * X ** (k1 + k2 - 2) / (2 - k1 - k2)
        return val

    val, err = _adaptive(compute, tol, "double Eichler integral")
    return (val, err) if full_output else val


def eichler_double_series(g1: Kernel, g2: Kernel, tau, tol: float = 1e-10) -> complex:
    """I_{g1,g2} with the inner integral done term by term in closed form
    and the outer one by quadrature. Needs an exponential expansion of g2."""
    tau = _check_tau(tau)
    if _zero(g1) or _zero(g2):
        return 0j
    t2 = g2.terms(tau.imag)
    if t2 is None:
        raise ValueError("inner kernel has no exponential expansion")
    c, lam = t2
    v, u = tau.imag, tau.real
    w0 = -tau.conjugate()
    k1, k2 = g1.weight, g2.weight
    breaks = _s_breaks(v, _min_decay(g1, g2), tol)
    phase = c * np.exp(-2j * math.pi * lam * u)

    def compute(n):
        grid = _Grid(breaks, n)
        s = grid.nodes
        x = 2 * v + s
        inner = _exp_integral(lam, k2, x, v)
        H2 = 1j * (inner @ phase)
        G1 = g1(w0 + 1j * s) * x ** (k1 - 2)
        return 1j * grid.integral(G1 * H2)

    val, _ = _adaptive(compute, tol, "double Eichler integral (series inner)")
    if g1.const and g2.const:
        raise ValueError("constant terms in both kernels need eichler_double")
    return val


# ---------------------------------------------------------------------------
# error integrals anchored at a cusp
# ---------------------------------------------------------------------------

def _cusp(x0) -> Fraction:
    if isinstance(x0, tuple):
        d, c = x0
        if c == 0:
            raise ValueError("the cusp d/c needs c != 0")
        return Fraction(d, c)
    return Fraction(x0)


def _sigma_breaks(decay: float, tol: float) -> np.ndarray:
    smax = (LOG_CUT + math.log1p(1 / tol)) / (TWO_PI * decay)
    return _towards_zero(math.sqrt(smax), 2e-3)


def _check_z(z: complex):
    if abs(z) < 1e-14:
        raise ValueError("tau must differ from -d/c")


def _const_tail_c(z: complex, S: float, k: float) -> complex:
    """int_S^oo (s - i z)^(k-2) ds for k < 1."""
    if k >= 1:
        raise ValueError("a constant term is only integrable at weight < 1")
    return -complex(S - 1j * z) ** (k - 1) / (k - 1)


def error_single(g: Kernel, cusp, tau, tol: float = 1e-10, full_output: bool = False):
    """r_{g,d/c}(tau) = int_{d/c}^{i oo} g(w) (-i(w + tau))^(k-2) dw.

    ``cusp`` is a Fraction d/c or a pair (d, c); tau may be real."""
    x0 = _cusp(cusp)
    tau = complex(tau)
    z = tau + float(x0)
    _check_z(z)
    if tau.imag < 0:
        raise ValueError("tau must lie in the closed upper half-plane")
    if _zero(g):
        return (0j, 0.0) if full_output else 0j
    k, c0 = g.weight, g.const
    breaks = _sigma_breaks(g.decay, tol)
    S = breaks[-1] ** 2

    def compute(n):
        grid = _Grid(breaks, n)
        sg = grid.nodes
        s = sg * sg
        F = (g.near(x0, 1j * s) - c0) * _power(s - 1j * z, k - 2) * 2 * sg
        return 1j * grid.integral(F)

    val, err = _adaptive(compute, tol, "single error integral")
    if c0:
        val += 1j * c0 * _const_tail_c(z, 0.0, k)
    return (val, err) if full_output else val


def _error_double_direct(g1, g2, x0, tau, tol):
    z = tau + float(x0)
    k1, k2 = g1.weight, g2.weight
    c1, c2 = g1.const, g2.const
    breaks = _sigma_breaks(_min_decay(g1, g2), tol)
    S = breaks[-1] ** 2
    base = complex(-1j * z)

    def compute(n):
        grid = _Grid(breaks, n)
        sg = grid.nodes
        s = sg * sg
        y = s - 1j * z
        F2 = (g2.near(x0, 1j * s) - c2) * _power(y, k2 - 2) * 2 * sg
        C2 = grid.head(F2)
        total2 = grid.integral(F2)
        if c2:
            C2 = C2 + c2 * (_power(y, k2 - 1) - base ** (k2 - 1)) / (k2 - 1)
        F1 = g1.near(x0, 1j * s) * _power(y, k1 - 2) * 2 * sg
        val = grid.integral(F1 * C2)
        if c1:
            # beyond S: g1 is its constant and C2 is total2 plus the constant part
            val += c1 * total2 * _const_tail_c(z, S, k1)
            if c2:
                YS = complex(S - 1j * z)
                val += c1 * c2 / (k2 - 1) * (-YS ** (k1 + k2 - 2) / (k1 + k2 - 2)
                                             - base ** (k2 - 1) * _const_tail_c(z, S, k1))
        return val

    return _adaptive(compute, tol, "double error integral")


def _segment(g1: Kernel, g2: Optional[Kernel], x0: Fraction, tau: complex, tol: float):
    """Integrals along the straight segment from -conj(tau) to x0:
    J_{g1} if g2 is None, else J_{g1,g2} (inner integral from w1 to x0)."""
    v = tau.imag
    delta = float(x0) + tau.conjugate()
    breaks = _towards_zero(1.0, 1e-4)

    def kernel_part(g, sg):
        t = 1 - sg * sg
        y = 2 * v - 1j * t * delta           # -i(w + tau), real part v (2 - t) > 0
        return g.near(x0, -(sg * sg) * delta) * _power(y, g.weight - 2) * 2 * sg

    def compute(n):
        grid = _Grid(breaks, n)
        sg = grid.nodes
        G1 = kernel_part(g1, sg)
        if g2 is None:
            return delta * grid.integral(G1)
        # t2 runs from t1 to 1, i.e. sigma2 from 0 to sigma1
        C2 = grid.head(kernel_part(g2, sg))
        return delta * delta * grid.integral(G1 * C2)

    return _adaptive(compute, tol, "segment integral")


def error_double(g1: Kernel, g2: Kernel, cusp, tau, tol: float = 1e-10,
                 method: str = "direct", full_output: bool = False):
    """r_{g1,g2,d/c}(tau) = int_{d/c}^{i oo} g1(w1)(-i(w1+tau))^(k1-2)
    int_{w1}^{d/c} g2(w2)(-i(w2+tau))^(k2-2) dw2 dw1.

    method="direct" integrates along the vertical lines above d/c;
    method="split" instead uses r = I_{g1,g2} - J_{g1,g2} - I_{g1} (I_{g2} - J_{g2})
    with J the integrals over the segment from -conj(tau) to d/c."""
    x0 = _cusp(cusp)
    tau = complex(tau)
    _check_z(tau + float(x0))
    if _zero(g1) or _zero(g2):
        return (0j, 0.0) if full_output else 0j
    if method == "direct":
        if tau.imag < 0:
            raise ValueError("tau must lie in the closed upper half-plane")
        val, err = _error_double_direct(g1, g2, x0, tau, tol)
    elif method == "split":
        tau = _check_tau(tau)
        I12, e1 = eichler_double(g1, g2, tau, tol, full_output=True)
        J12, e2 = _segment(g1, g2, x0, tau, tol)
        I1, e3 = eichler_single(g1, tau, tol, full_output=True)
        I2, e4 = eichler_single(g2, tau, tol, full_output=True)
        J2, e5 = _segment(g2, None, x0, tau, tol)
        val = I12 - J12 - I1 * (I2 - J2)
        err = e1 + e2 + abs(I1) * (e4 + e5) + e3 * abs(I2 - J2)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, err) if full_output else val


# ---------------------------------------------------------------------------
# transformation checks
# ---------------------------------------------------------------------------

def _chi_star(g: UnaryTheta, M: Mat2Z) -> complex:
    return g.multiplier(M.star)


def lquant_residual(g: UnaryTheta, M: Mat2Z, tau, tol: float = 1e-11) -> complex:
    """I_g(tau) - chi^-1(M*) (c tau + d)^(k-2) I_g(M tau) - r_{g,d/c}(tau)."""
    tau = _check_tau(tau)
    if M.c == 0:
        raise ValueError("need c != 0")
    chi = _chi_star(g, M)
    lhs = eichler_single(g, tau, tol) - M.j(tau) ** (g.weight - 2) / chi * eichler_single(g, M.act(tau), tol)
    return lhs - error_single(g, (M.d, M.c), tau, tol)


def theorem_residual(g1: UnaryTheta, g2: UnaryTheta, M: Mat2Z, tau, tol: float = 1e-10) -> complex:
    """Depth-two cocycle for a kernel pair:
    I_{g1,g2}(tau) - chi1^-1 chi2^-1(M*) (c tau + d)^(k1+k2-4) I_{g1,g2}(M tau)
    - r_{g1,g2,d/c}(tau) - I_{g1}(tau) r_{g2,d/c}(tau)."""
    tau = _check_tau(tau)
    if M.c == 0:
        raise ValueError("need c != 0")
    chi = _chi_star(g1, M) * _chi_star(g2, M)
    k = g1.weight + g2.weight
    lhs = eichler_double(g1, g2, tau, tol) - M.j(tau) ** (k - 4) / chi * eichler_double(g1, g2, M.act(tau), tol)
    cusp = (M.d, M.c)
    rhs = error_double(g1, g2, cusp, tau, tol) + eichler_single(g1, tau, tol) * error_single(g2, cusp, tau, tol)
    return lhs - rhs


def shuffle_residual(g1: Kernel, g2: Kernel, tau, tol: float = 1e-11) -> complex:
    """I_{g1,g2} + I_{g2,g1} - I_{g1} I_{g2}.

    On a common grid the discrete rule satisfies the shuffle relation
    exactly, so the three pieces are computed by different routes where the
    kernels allow it: nested quadrature, closed-form inner integrals, and
    termwise single integrals."""
    d12 = eichler_double(g1, g2, tau, tol)
    if g1.terms(1.0) is not None:
        d21 = eichler_double_series(g2, g1, tau, tol)
    else:
        d21 = eichler_double(g2, g1, tau, tol * 0.37)
    singles = []
    for g in (g1, g2):
        singles.append(eichler_single_series(g, tau) if g.terms(1.0) is not None
                       else eichler_single(g, tau, tol))
    return d12 + d21 - singles[0] * singles[1]


def _fd_dtaubar(f: Callable[[complex], complex], tau: complex, h: float) -> Tuple[complex, float]:
    # d/d(conj tau) = (d/du + i d/dv) / 2, central differences plus one Richardson step
    def central(step):
        du = (f(tau + step) - f(tau - step)) / (2 * step)
        dv = (f(tau + 1j * step) - f(tau - 1j * step)) / (2 * step)
        return 0.5 * (du + 1j * dv)

    d1, d2 = central(h), central(h / 2)
    rich = (4 * d2 - d1) / 3
    return rich, abs(rich - d2)


def lowering(g1: Kernel, g2: Kernel, tau, tol: float = 1e-12, h: float = 1e-2) -> Tuple[complex, float]:
    """L(I_{g1,g2})(tau) with L = -2 i v^2 d/d(conj tau), by finite differences.
    Returns (value, Richardson difference)."""
    tau = _check_tau(tau)
    d, diag = _fd_dtaubar(lambda t: eichler_double(g1, g2, t, tol), tau, h)
    return -2j * tau.imag ** 2 * d, 2 * tau.imag ** 2 * diag


def lowering_closed_form(g1: Kernel, g2: Kernel, tau, tol: float = 1e-12) -> complex:
    """-i 2^(k1-1) v^k1 g1(-conj tau) I_{g2}(tau): only the lower limit of the
    outer integral depends on conj(tau), and -i(w1 + tau) = 2v there."""
    tau = _check_tau(tau)
    v, k1 = tau.imag, g1.weight
    g = complex(np.asarray(g1(np.array([-tau.conjugate()])))[0])
    return -1j * 2 ** (k1 - 1) * v ** k1 * g * eichler_single(g2, tau, tol)


def lowering_residual(g1: Kernel, g2: Kernel, tau, tol: float = 1e-12, h: float = 1e-2) -> float:
    """Relative residual of the lowering identity; 0 when both sides vanish."""
    lhs, _ = lowering(g1, g2, tau, tol, h)
    rhs = lowering_closed_form(g1, g2, tau, tol)
    scale = max(abs(rhs), abs(lhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


def single_lowering_residual(g: Kernel, tau, tol: float = 1e-12, h: float = 1e-2) -> float:
    """L(I_g) against -i 2^(k-1) v^k g(-conj tau), relative."""
    tau = _check_tau(tau)
    d, _ = _fd_dtaubar(lambda t: eichler_single(g, t, tol), tau, h)
    lhs = -2j * tau.imag ** 2 * d
    gv = complex(np.asarray(g(np.array([-tau.conjugate()])))[0])
    rhs = -1j * 2 ** (g.weight - 1) * tau.imag ** g.weight * gv
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


# ---------------------------------------------------------------------------
# the two-variable theta kernels of the weight-one and weight-two companions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaKernel:
    """theta_kind(alpha; w1, w2) for kind in 1..5, a sum over n in alpha + Z^2 of
    coef(n) e^{2 pi i (lam1(n) w1 + lam2(n) w2)} with lam1 + lam2 = Q(n)."""

    kind: int
    alpha: Tuple[Fraction, Fraction]

    def __post_init__(self):
        if self.kind not in (1, 2, 3, 4, 5):
            raise ValueError("kind must be 1..5")
        object.__setattr__(self, "alpha", (Fraction(self.alpha[0]), Fraction(self.alpha[1])))

    def terms(self, qmax: float):
        """All lattice terms with Q(n) <= qmax and nonzero coefficient."""
        # smallest eigenvalue of Q is (4 - sqrt 13)/2 > 0.19
        R = int(math.sqrt(qmax / 0.19)) + 2
        j = np.arange(-R, R + 1)
        n1 = (float(self.alpha[0]) + j)[:, None] * np.ones(len(j))[None, :]
        n2 = (float(self.alpha[1]) + j)[None, :] * np.ones(len(j))[:, None]
        n1, n2 = n1.ravel(), n2.ravel()
        q = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
        if self.kind in (1, 3):
            lam1, lam2 = 0.75 * (2 * n1 + n2) ** 2, 0.25 * n2 * n2
            coef = (2 * n1 + n2) * (n2 if self.kind == 1 else 1.0)
        else:
            lam1, lam2 = 0.25 * (3 * n1 + 2 * n2) ** 2, 0.75 * n1 * n1
            coef = {2: (3 * n1 + 2 * n2) * n1, 4: 3 * n1 + 2 * n2, 5: n1}[self.kind]
        keep = (q <= qmax) & (np.abs(coef) > 1e-12)
        return coef[keep], lam1[keep], lam2[keep]

    def __call__(self, w1: complex, w2: complex) -> complex:
        im = min(complex(w1).imag, complex(w2).imag)
        c, l1, l2 = self.terms((LOG_CUT + 10) / (TWO_PI * im))
        return complex(np.sum(c * np.exp(2j * math.pi * (l1 * w1 + l2 * w2))))


def _lattice_double(kern: ThetaKernel, k1: float, k2: float, tau: complex, tol: float) -> complex:
    """Double Eichler integral of a two-variable lattice kernel: inner integral
    in closed form for every lattice term, outer one by quadrature."""
    v, u = tau.imag, tau.real
    c, l1, l2 = kern.terms((LOG_CUT + math.log1p(1 / tol)) / (TWO_PI * v))
    if len(c) == 0:
        return 0j
    q = l1 + l2
    # e(lam1 w1) e(lam2 w2) on the paths; the real parts of the phases combine
    phase = c * np.exp(-2j * math.pi * q * u)
    breaks = _s_breaks(v, float(q.min()), tol)

    order = np.argsort(q)
    q, c, l1, l2, phase = q[order], c[order], l1[order], l2[order], phase[order]
    cut = LOG_CUT + math.log1p(1 / tol)

    def compute(n):
        grid = _Grid(breaks, n)
        f = np.zeros(grid.nodes.shape, complex)
        for i, s in enumerate(grid.nodes):
            # every term is at most e^{-2 pi q (v + s)} on this panel
            m = int(np.searchsorted(q, cut / (TWO_PI * (v + s[0])), side="right"))
            if m == 0:
                break
            x = 2 * v + s
            # e(lam1 w1) times the closed-form inner integral of e(lam2 w2)
            inner = _exp_integral(l2[:m], k2, x, v)
            fac = np.exp(-TWO_PI * np.multiply.outer(v + s, l1[:m]))
            f[i] = ((inner * fac) @ phase[:m]) * x ** (k1 - 2)
        return -grid.integral(f)

    val, _ = _adaptive(compute, tol, "lattice double integral")
    return val


def _shift(alpha) -> Tuple[Fraction, Fraction]:
    return (Fraction(alpha[0]), Fraction(alpha[1]))


def _alpha_factors(kind: int, alpha, p: int) -> List[Tuple[UnaryTheta, UnaryTheta, float]]:
    """theta_kind(alpha; w1, w2) = sum pre * g1(w1) g2(w2) over the returned triples.

    The substitution nu = (2n1 + n2, n2) (kinds 1, 3) or (3n1 + 2n2, n1)
    (kinds 2, 4, 5) is a bijection onto pairs whose offsets from the shift
    share a parity rho; nu in x + 2Z with x in (1/p)Z becomes m/p with
    m = p x mod 2p."""
    a1, a2 = _shift(alpha)
    for x in (a1, a2):
        if (x * p).denominator != 1:
            raise ValueError("alpha must lie in (1/p) Z^2")
    P2 = 2 * p
    F3, F1 = Fraction(3, p), Fraction(1, p)
    if kind in (1, 3):
        r1, r2, sc1, sc2 = int((2 * a1 + a2) * p), int(a2 * p), F3, F1
    else:
        r1, r2, sc1, sc2 = int((3 * a1 + 2 * a2) * p), int(a1 * p), F1, F3
    nu1, nu2 = {1: (1, 1), 2: (1, 1), 3: (1, 0), 4: (1, 0), 5: (0, 1)}[kind]
    pre = 1.0 / p ** (nu1 + nu2)
    return [(UnaryTheta(nu1, P2, r1 + p * rho, P2, sc1), UnaryTheta(nu2, P2, r2 + p * rho, P2, sc2), pre)
            for rho in (0, 1)]


def _alpha_pairs(which: int, alpha, p: int) -> List[Tuple[float, UnaryTheta, UnaryTheta]]:
    """(coef, g1, g2) with E_{which,alpha}(tau) = sum coef * I_{g1,g2}(tau)."""
    out = []
    if which == 1:
        for kind in (1, 2):
            out += [(-SQRT3 / 4 * pre, g1, g2) for g1, g2, pre in _alpha_factors(kind, alpha, p)]
    else:
        c = SQRT3 / (8 * math.pi)
        for kind, w in ((3, 2.0), (4, -1.0), (5, 1.0)):
            out += [(c * w * pre, g1, g2) for g1, g2, pre in _alpha_factors(kind, alpha, p)]
    return out


def _pairs_value(pairs, tau, tol) -> complex:
    return sum(c * eichler_double(g1, g2, tau, tol) for c, g1, g2 in pairs)


def E1_quadrature(alpha, tau, tol: float = 1e-10, method: str = "lattice") -> complex:
    """E_{1,alpha}(tau) = -(sqrt3/4) int int (theta1 + theta2) / (sqrt(-i(w1+tau)) sqrt(-i(w2+tau)))."""
    tau = _check_tau(tau)
    if method == "lattice":
        a = _shift(alpha)
        return -SQRT3 / 4 * (_lattice_double(ThetaKernel(1, a), 1.5, 1.5, tau, tol)
                             + _lattice_double(ThetaKernel(2, a), 1.5, 1.5, tau, tol))
    if method == "shimura":
        p = math.lcm(*(Fraction(x).denominator for x in alpha))
        return _pairs_value(_alpha_pairs(1, alpha, p), tau, tol)
    raise ValueError(f"unknown method {method!r}")


def E2_quadrature(alpha, tau, tol: float = 1e-10, method: str = "lattice") -> complex:
    """E_{2,alpha}(tau): the (2 theta3 - theta4) block with exponents (1/2, 3/2)
    plus the theta5 block with exponents (3/2, 1/2)."""
    tau = _check_tau(tau)
    if method == "lattice":
        a = _shift(alpha)
        pre = SQRT3 / (8 * math.pi)
        return pre * (2 * _lattice_double(ThetaKernel(3, a), 1.5, 0.5, tau, tol)
                      - _lattice_double(ThetaKernel(4, a), 1.5, 0.5, tau, tol)
                      + _lattice_double(ThetaKernel(5, a), 0.5, 1.5, tau, tol))
    if method == "shimura":
        p = math.lcm(*(Fraction(x).denominator for x in alpha))
        return _pairs_value(_alpha_pairs(2, alpha, p), tau, tol)
    raise ValueError(f"unknown method {method!r}")


def set_A(p: int) -> List[Tuple[int, int]]:
    return [(0, 2), (p, p + 2), (p - 1, p - 1), (-1, -1), (p + 1, p - 1), (1, -1)]


def set_B(p: int) -> List[Tuple[int, int]]:
    return [(p + 1, p - 1), (1, -1), (p + 2, p), (2, 0), (1, 1), (p + 1, p + 1)]


def _eps_at(table: ShiftTable, x1: Fraction, x2: Fraction) -> int:
    return table.eps((x1 % 1, x2 % 1))


def _normalise(g: UnaryTheta) -> Tuple[int, UnaryTheta]:
    # Theta_nu(A, -h, N) = (-1)^nu Theta_nu(A, h, N): pick h in [0, N/2]
    h = g.h % g.N
    if 2 * h > g.N:
        return (-1) ** g.nu, UnaryTheta(g.nu, g.A, g.N - h, g.N, g.scale)
    return 1, UnaryTheta(g.nu, g.A, h, g.N, g.scale)


def companion_pairs(which: int, p: int) -> List[Tuple[float, UnaryTheta, UnaryTheta]]:
    """(coef, g1, g2) with E_which(tau) = sum coef * I_{g1,g2}(tau).

    Obtained by factorising every alpha-kernel into unary Shimura thetas,
    rescaling w -> p w (a factor p^(k1 + k2 - 2)) and collecting equal pairs.
    Pairs with a vanishing factor are dropped."""
    if p < 2:
        raise ValueError("p >= 2 required")
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    tab = ShiftTable(p)
    acc = {}
    for alpha in tab.Sstar:
        weight = tab.eps(alpha) if which == 1 else 1
        for coef, g1, g2 in _alpha_pairs(which, alpha, p):
            s1, n1 = _normalise(UnaryTheta(g1.nu, g1.A, g1.h, g1.N, g1.scale * p))
            s2, n2 = _normalise(UnaryTheta(g2.nu, g2.A, g2.h, g2.N, g2.scale * p))
            if _zero(n1) or _zero(n2):
                continue
            key = tuple((g.nu, g.h, g.scale) for g in (n1, n2))
            scale = p ** (g1.weight + g2.weight - 2)
            acc[key] = acc.get(key, (0.0, n1, n2))
            acc[key] = (acc[key][0] + weight * coef * scale * s1 * s2, n1, n2)
    return [(c, g1, g2) for c, g1, g2 in acc.values() if abs(c) > 1e-15]


def kernel_decomposition_residual(which: str, p: int, w1: complex, w2: complex,
                                  form: str = "derived") -> float:
    """|sum over S* of a lattice kernel - its unary product form| at (w1, w2).

    which: "theta1" and "theta2" (eps-weighted), "theta3", "theta4", "theta5".
    form="derived" uses the per-shift parity factorisation, form="printed"
    the A/B index sets with the weights eps1, eps2 as written."""
    tab = ShiftTable(p)
    kind = int(which[-1])
    weighted = kind in (1, 2)
    lhs = sum((tab.eps(a) if weighted else 1) * ThetaKernel(kind, a)(w1, w2) for a in tab.Sstar)
    W1, W2 = np.array([w1]), np.array([w2])
    rhs = 0j
    if form == "derived":
        for a in tab.Sstar:
            e = tab.eps(a) if weighted else 1
            for g1, g2, pre in _alpha_factors(kind, a, p):
                rhs += e * pre * g1(W1)[0] * g2(W2)[0]
        return abs(lhs - rhs)
    if form != "printed":
        raise ValueError(f"unknown form {form!r}")
    P2 = 2 * p
    F3, F1 = Fraction(3, p), Fraction(1, p)
    if kind in (1, 3):
        for A1, A2 in set_A(p):
            e = _eps_at(tab, Fraction(A1 - A2, P2), Fraction(A2, p)) if weighted else 1
            g2 = UnaryTheta(1 if kind == 1 else 0, P2, A2, P2, F1)
            rhs += e * UnaryTheta(1, P2, A1, P2, F3)(W1)[0] * g2(W2)[0]
        rhs /= p ** 2 if kind == 1 else p
    else:
        for B1, B2 in set_B(p):
            e = _eps_at(tab, Fraction(B2 - 3 * B1, P2), Fraction(B1, p)) if weighted else 1
            nu1, nu2 = {2: (1, 1), 4: (1, 0), 5: (0, 1)}[kind]
            rhs += e * UnaryTheta(nu1, P2, B1, P2, F1)(W1)[0] * UnaryTheta(nu2, P2, B2, P2, F3)(W2)[0]
        rhs /= p ** 2 if kind == 2 else p
    return abs(lhs - rhs)


def E1_full(p: int, tau, tol: float = 1e-10, method: str = "lattice") -> complex:
    """E_1(tau) = sum_{alpha in S*} eps(alpha) E_{1,alpha}(p tau)."""
    tau = _check_tau(tau)
    if method == "shimura":
        return _pairs_value(companion_pairs(1, p), tau, tol)
    tab = ShiftTable(p)
    return sum(tab.eps(a) * E1_quadrature(a, p * tau, tol, "lattice") for a in tab.Sstar)


def E2_full(p: int, tau, tol: float = 1e-10, method: str = "lattice") -> complex:
    """E_2(tau) = sum_{alpha in S*} E_{2,alpha}(p tau)."""
    tau = _check_tau(tau)
    if method == "shimura":
        return _pairs_value(companion_pairs(2, p), tau, tol)
    tab = ShiftTable(p)
    return sum(E2_quadrature(a, p * tau, tol, "lattice") for a in tab.Sstar)


# ---------------------------------------------------------------------------
# cocycles of the companions
# ---------------------------------------------------------------------------

def _companion_character(which: int, d: int) -> int:
    return kronecker(-3, d) if which == 1 else kronecker(3, d)


def cocycle_residual(which, M: Mat2Z, p: int, tau, tol: float = 1e-9,
                     full_output: bool = False):
    """E(tau) - chi(d) (c tau + d)^(-wt) E(M tau) minus the sum over the
    Shimura kernel pairs of r_{g1,g2,d/c}(tau) + I_{g1}(tau) r_{g2,d/c}(tau).

    which is 1 / "E1" (chi = (-3/d), wt = 1) or 2 / "E2" (chi = (3/d), wt = 2).
    The left side uses the lattice route, the right side the unary kernels."""
    which = {"E1": 1, "E2": 2, 1: 1, 2: 2}[which]
    if not isinstance(M, Mat2Z):
        M = Mat2Z(*M)
    if not M.in_gamma_p(p):
        raise ValueError(f"{M.as_tuple()} is not in Gamma_p for p = {p}")
    if M.d < 0:
        M = -M
    tau = _check_tau(tau)
    full = E1_full if which == 1 else E2_full
    wt = which
    chi = _companion_character(which, M.d)
    E_tau = full(p, tau, tol)
    if M == Mat2Z(1, 0, 0, 1):
        lhs = E_tau - chi * E_tau
        return (lhs, {"lhs": lhs, "rhs": 0j}) if full_output else lhs
    if M.c == 0:
        raise ValueError("c = 0 is only supported for the identity")
    Mt = M.act(tau)
    lhs = E_tau - chi * M.j(tau) ** (-wt) * full(p, Mt, tol)
    cusp = (M.d, M.c)
    rhs = 0j
    for coef, g1, g2 in companion_pairs(which, p):
        if _zero(g1) or _zero(g2):
            continue
        rhs += coef * (error_double(g1, g2, cusp, tau, tol)
                       + eichler_single(g1, tau, tol) * error_single(g2, cusp, tau, tol))
    res = lhs - rhs
    if full_output:
        return res, {"lhs": lhs, "rhs": rhs}
    return res


def pair_characters(which: int, p: int, M: Mat2Z) -> List[complex]:
    """chi_{g1}(M*) chi_{g2}(M*) for every kernel pair of the companion."""
    out = []
    for _, g1, g2 in companion_pairs(which, p):
        if _zero(g1) or _zero(g2):
            continue
        out.append(g1.multiplier(M.star) * g2.multiplier(M.star))
    return out


# ---------------------------------------------------------------------------
# M2 as a double Eichler integral of two exponentials
# ---------------------------------------------------------------------------

def m2_bridge(n: Tuple[float, float], tau, tol: float = 1e-11) -> float:
    """Right-hand side of the identity writing
    M2(sqrt3; sqrt(3v)(2n1 + n2), sqrt(v) n2) as two double Eichler integrals
    of single exponentials times q^{Q(n)}; real up to rounding."""
    tau = _check_tau(tau)
    n1, n2 = float(n[0]), float(n[1])
    Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
    q = cmath.exp(2j * math.pi * tau * Qn)
    total = 0j
    for coef, l1, l2 in (((2 * n1 + n2) * n2, 0.75 * (2 * n1 + n2) ** 2, 0.25 * n2 * n2),
                         ((3 * n1 + 2 * n2) * n1, 0.25 * (3 * n1 + 2 * n2) ** 2, 0.75 * n1 * n1)):
        if coef == 0:
            continue
        total += coef * eichler_double(exponential_kernel(l1), exponential_kernel(l2), tau, tol)
    return -SQRT3 / 2 * q * total
