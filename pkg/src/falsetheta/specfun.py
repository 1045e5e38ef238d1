"""Scalar special functions.

Error-function variants E and M, the incomplete gamma function at
a = 1/2 and a = -1/2, the two-dimensional generalised error functions
E2 and M2 together with their derivatives, and exact Bernoulli
polynomials.

All real-valued functions accept numpy arrays where that is cheap to
support; scalars come back as Python floats.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy import integrate, special

SQRT_PI = math.sqrt(math.pi)
BERNOULLI_MAX_ORDER = 32

Real = Union[float, np.ndarray]


class ToleranceError(RuntimeError):
    """Raised when a quadrature cannot certify the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def sgn(x):
    """Sign with sgn(0) = 0."""
    return _out(np.sign(x))


def sgn_star(x):
    """Sign with sgn*(0) = 1."""
    return _out(np.where(np.asarray(x) >= 0, 1.0, -1.0))


# ---------------------------------------------------------------------------
# one-dimensional functions
# ---------------------------------------------------------------------------

def erf_E(u: Real) -> Real:
    """E(u) = 2 * int_0^u exp(-pi w^2) dw = erf(sqrt(pi) u)."""
    return _out(special.erf(SQRT_PI * np.asarray(u, dtype=float)))


def gamma_half(u: Real) -> Real:
    """Upper incomplete gamma function Gamma(1/2, u) for u >= 0."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise ValueError("gamma_half needs u >= 0")
    return _out(SQRT_PI * special.erfc(np.sqrt(u)))


def _gamma_cf(a: float, x: np.ndarray, depth: int = 80) -> np.ndarray:
    # Continued fraction for Gamma(a, x), evaluated backwards; good for x >~ 1.
    t = x + 2 * depth + 1 - a
    for n in range(depth, 0, -1):
        t = x + 2 * n - 1 - a - n * (n - a) / t
    return np.exp(-x) * x**a / t


def gamma_minus_half(u: Real) -> Real:
    """Upper incomplete gamma function Gamma(-1/2, u) for u > 0.

    Small u uses the recurrence Gamma(1/2,u) = -Gamma(-1/2,u)/2 + e^-u/sqrt(u);
    large u uses a continued fraction to avoid cancellation.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("gamma_minus_half needs u > 0")
    small = u < 1.0
    res = np.empty_like(u)
    us = u[small]
    res[small] = 2.0 * (np.exp(-us) / np.sqrt(us) - SQRT_PI * special.erfc(np.sqrt(us)))
    res[~small] = _gamma_cf(-0.5, u[~small])
    return _out(res)


def gamma_scaled(a: float, u: Real) -> Real:
    """e^u Gamma(a, u) for a in {1/2, -1/2} and u > 0, without underflow."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("gamma_scaled needs u > 0")
    if a == 0.5:
        return _out(SQRT_PI * special.erfcx(np.sqrt(u)))
    if a != -0.5:
        raise ValueError("only a = 1/2 and a = -1/2 are supported")
    small = u < 1.0
    res = np.empty_like(u)
    us = u[small]
    res[small] = 2.0 * (1.0 / np.sqrt(us) - SQRT_PI * special.erfcx(np.sqrt(us)))
    ul = u[~small]
    res[~small] = _gamma_cf_scaled(ul)
    return _out(res)


def _gamma_cf_scaled(x: np.ndarray, a: float = -0.5, depth: int = 80) -> np.ndarray:
    t = x + 2 * depth + 1 - a
    for n in range(depth, 0, -1):
        t = x + 2 * n - 1 - a - n * (n - a) / t
    return x**a / t


def mordell_M(u: Real) -> Real:
    """M(u) = E(u) - sgn(u), computed as -sgn(u) erfc(sqrt(pi)|u|).

    M(0) = 0 since sgn(0) = 0. Use :func:`mordell_M_star` for the
    one-sided convention.
    """
    u = np.asarray(u, dtype=float)
    return _out(-np.sign(u) * special.erfc(SQRT_PI * np.abs(u)))


def mordell_M_star(u: Real) -> Real:
    """M*(u) = E(u) - sgn*(u); M*(0) = -1."""
    u = np.asarray(u, dtype=float)
    s = np.where(u >= 0, 1.0, -1.0)
    return _out(-s * special.erfc(SQRT_PI * np.abs(u)))


# ---------------------------------------------------------------------------
# E2 and M2
# ---------------------------------------------------------------------------

def E2(kappa: float, u: Tuple[float, float], tol: float = 1e-12) -> float:
    """Two-dimensional generalised error function E2(kappa; u).

    The w2-integral of the defining double integral is E(u2 + kappa*w1) in
    closed form, leaving a Gaussian-weighted integral over w1 that is split
    at the sign change w1 = 0.
    """
    u1, u2 = float(u[0]), float(u[1])
    kappa = float(kappa)

    def plus(w):
        return math.exp(-math.pi * (w - u1) ** 2) * math.erf(SQRT_PI * (u2 + kappa * w))

    def minus(w):
        return math.exp(-math.pi * (w + u1) ** 2) * math.erf(SQRT_PI * (u2 - kappa * w))

    # the Gaussian factor is below 1e-300 beyond |w - centre| = 15
    total, err = 0.0, 0.0
    for f, centre, turn in ((plus, u1, -u2), (minus, -u1, u2)):
        lo, hi = 0.0, max(centre, 0.0) + 15.0
        pts = [x for x in (centre, turn / kappa if kappa else None) if x is not None and lo < x < hi]
        val, e = integrate.quad(f, lo, hi, points=pts or None, epsabs=tol / 4, epsrel=tol, limit=200)
        total += val if f is plus else -val
        err += e
    if err > tol:
        raise ToleranceError("E2 quadrature", err)
    return total


def E2_dblquad(kappa: float, u: Tuple[float, float], tol: float = 1e-10) -> float:
    """E2 by 2-D quadrature of the defining integral in polar coordinates.

    The lines w1 = 0 and w2 = -kappa w1 cut the plane into four sectors on
    which sgn(w1) sgn(w2 + kappa w1) is constant; each sector is a
    scipy dblquad over (theta, r). Independent of :func:`E2`."""
    u1, u2 = float(u[0]), float(u[1])
    kappa = float(kappa)
    t0 = math.atan(kappa)
    cuts = sorted({-math.pi / 2, math.pi / 2, -t0, math.pi - t0})
    cuts = cuts + [cuts[0] + 2 * math.pi]
    rmax = math.hypot(u1, u2) + 9.0
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        sign = np.sign(math.cos(mid)) * np.sign(math.sin(mid) + kappa * math.cos(mid))

        def f(r, th):
            return r * math.exp(-math.pi * ((r * math.cos(th) - u1) ** 2 + (r * math.sin(th) - u2) ** 2))

        val, _ = integrate.dblquad(f, a, b, 0.0, rmax, epsabs=tol / 8, epsrel=tol)
        total += sign * val
    return float(total)


def _rotated(kappa: float, u1, u2):
    r = math.sqrt(1.0 + kappa * kappa)
    return (u2 + kappa * u1) / r, (u1 - kappa * u2) / r


def M2_from_E2(kappa: float, u: Tuple[float, float], tol: float = 1e-12, route: str = "1d") -> float:
    """M2 through E2 and the sign/M corrections (sgn(0) = 0).

    route "1d" uses :func:`E2`, route "2d" uses :func:`E2_dblquad`."""
    u1, u2 = float(u[0]), float(u[1])
    c, _ = _rotated(kappa, u1, u2)
    d_sign = np.sign(u1 - kappa * u2)
    if route not in ("1d", "2d"):
        raise ValueError(f"unknown route {route!r}")
    e2 = E2(kappa, (u1, u2), tol) if route == "1d" else E2_dblquad(kappa, (u1, u2), max(tol, 1e-11))
    return (e2
            - np.sign(u2) * mordell_M(u1)
            - d_sign * mordell_M(c)
            - np.sign(u1) * np.sign(u2 + kappa * u1))


def _m2_integrand(z, a, b, c, d):
    w = np.exp(2.0 * z)
    sw = np.exp(z)
    f = a * np.exp(-math.pi * a * a * w) * mordell_M(b * sw) + c * np.exp(-math.pi * c * c * w) * mordell_M(d * sw)
    return -2.0 * sw * f


def _zmax(norm2):
    # exp(-pi |u|^2 w) < e^-45 beyond w = e^{2 zmax}
    return 0.5 * np.log1p(45.0 / (math.pi * np.maximum(norm2, 1e-300)))


def m2_core(a, b, c, d, tol: float = 1e-13):
    """M2 from its integral over [1, oo), scalar version with error control.

    ``a, b`` are u1, u2 and ``c, d`` are the rotated coordinates
    (u2 + kappa u1)/r and (u1 - kappa u2)/r with r = sqrt(1 + kappa^2).
    Passing them separately lets callers keep exact zeros exact.
    """
    norm2 = a * a + b * b
    if norm2 == 0.0:
        raise ValueError("integral representation is degenerate at u = 0")
    zm = float(_zmax(norm2))
    val, err = integrate.quad(lambda z: float(_m2_integrand(z, a, b, c, d)), 0.0, zm,
                              epsabs=1e-300, epsrel=tol, limit=400)
    if err > max(tol * abs(val), 1e-300):
        raise ToleranceError("M2 integral", err)
    return val


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def m2_core_array(a, b, c, d, nodes: int = 24, panel: float = 0.5) -> np.ndarray:
    """Vectorised counterpart of :func:`m2_core` by composite Gauss-Legendre.

    The integral is taken in z with w = exp(2z); the integrand then has
    double-exponential decay, so a handful of panels gives relative
    accuracy close to machine precision.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in np.broadcast_arrays(a, b, c, d))
    shape = a.shape
    a, b, c, d = (x.ravel() for x in (a, b, c, d))
    norm2 = a * a + b * b
    if np.any(norm2 == 0):
        raise ValueError("integral representation is degenerate at u = 0")
    zm = _zmax(norm2)
    npan = np.maximum(1, np.ceil(zm / panel)).astype(int)
    x, w = _gl(nodes)
    out = np.empty_like(a)
    for m in np.unique(npan):
        idx = np.nonzero(npan == m)[0]
        h = zm[idx] / m
        # nodes of all panels, shape (len(idx), m*nodes)
        j = np.arange(m)[:, None]
        z = ((j + 0.5 * (x[None, :] + 1.0)).ravel())[None, :] * h[:, None]
        wt = np.tile(w, m)[None, :] * (0.5 * h[:, None])
        vals = _m2_integrand(z, a[idx, None], b[idx, None], c[idx, None], d[idx, None])
        out[idx] = np.sum(vals * wt, axis=1)
    return out.reshape(shape)


def M2(kappa: float, u: Tuple[float, float], tol: float = 1e-12) -> float:
    """Two-dimensional complementary error function M2(kappa; u).

    Primary route: the integral over w in [1, oo) of Gaussian-weighted M
    values. At u = 0 that representation degenerates and the E2-based
    definition is used instead.
    """
    u1, u2 = float(u[0]), float(u[1])
    if u1 == 0.0 and u2 == 0.0:
        return float(M2_from_E2(kappa, (u1, u2), tol))
    c, d = _rotated(kappa, u1, u2)
    # on the line u1 = kappa u2 rounding leaves |d| ~ 1e-17, where M jumps
    if abs(d) <= 8 * np.finfo(float).eps * math.hypot(u1, u2):
        d = 0.0
    return m2_core(u1, u2, c, d, tol=tol)


def M2_array(kappa: float, u1, u2) -> np.ndarray:
    """Vectorised M2 (u = 0 not allowed)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    c, d = _rotated(kappa, u1, u2)
    return m2_core_array(u1, u2, c, d)


def M2_partials(kappa: float, u: Tuple[float, float]) -> Tuple[float, float]:
    """(dM2/du1, dM2/du2) from the closed formulas."""
    u1, u2 = float(u[0]), float(u[1])
    r = math.sqrt(1.0 + kappa * kappa)
    c, d = _rotated(kappa, u1, u2)
    common = 2.0 / r * math.exp(-math.pi * c * c) * mordell_M(d)
    d1 = 2.0 * math.exp(-math.pi * u1 * u1) * mordell_M(u2) + kappa * common
    return d1, common


def M2_star(kappa: float, x: Tuple[float, float], tol: float = 1e-12) -> float:
    """M2 with every sign replaced by sgn*, in the coordinates
    u = (kappa (2 x1 + x2), x2).

    For kappa = sqrt(3) the two E-arguments become sqrt(3)(2x1 + x2) and
    3x1 + 2x2.
    """
    x1, x2 = float(x[0]), float(x[1])
    r = math.sqrt(1.0 + kappa * kappa)
    u1 = kappa * (2 * x1 + x2)
    y1 = 2 * kappa * x1
    s1 = 1.0 if x1 >= 0 else -1.0
    s2 = 1.0 if x2 >= 0 else -1.0
    return (s1 * s2 + E2(kappa, (u1, x2), tol)
            - s2 * erf_E(u1)
            - s1 * erf_E(kappa * y1 / r + r * x2))


# ---------------------------------------------------------------------------
# Bernoulli polynomials
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli_numbers(n: int) -> Tuple[Fraction, ...]:
    B = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(math.comb(m + 1, k) * B[k] for k in range(m))
        B.append(-s / (m + 1))
    return tuple(B)


@lru_cache(maxsize=None)
def bernoulli_coeffs(m: int) -> Tuple[Fraction, ...]:
    """Coefficients of B_m(x) in increasing powers of x."""
    if m < 0 or m > BERNOULLI_MAX_ORDER:
        raise ValueError(f"Bernoulli order {m} outside table 0..{BERNOULLI_MAX_ORDER}")
    B = _bernoulli_numbers(m)
    return tuple(math.comb(m, j) * B[m - j] for j in range(m + 1))


def bernoulli_poly(m: int, x):
    """B_m(x). Exact for int/Fraction x, float otherwise."""
    co = bernoulli_coeffs(m)
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        acc = Fraction(0)
    else:
        co = [float(c) for c in co]
        acc = 0.0
    for c in reversed(co):
        acc = acc * x + c
    return acc
