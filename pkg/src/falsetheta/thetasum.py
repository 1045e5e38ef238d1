"""Theta-sum representations of the weight one and two companions and the
signature (2,2) indefinite theta function that contains them.

With Q(n) = 3 n1^2 + 3 n1 n2 + n2^2 and kappa = sqrt3, the companions are

    EE1(tau) = 1/2 sum_alpha eps(alpha) sum_{n in alpha + Z^2} M2(kappa; u(n)) q^{-Q(n)}
    EE2(tau) = 1/2 sum_alpha sum_n [n2 M2(kappa; u(n)) + e^{-pi c^2} M(d) / (2 pi sqrt v)] q^{-Q(n)}

where u(n) = (sqrt(3v)(2n1 + n2), sqrt(v) n2) and (c, d) = (sqrt(v)(3n1 + 2n2),
sqrt(3v) n1) are its rotated coordinates. EE_j(tau) is the companion of
:mod:`falsetheta.eichler` at tau / p.

The indefinite part works with the quadratic form 1/2 n^T A1 n on Z^4,

    A1 = [[A0, A0], [A0, 0]],  A0 = [[6, 3], [3, 2]],

so that, writing n = (x, y) with x, y in R^2 and m = x + y,
1/2 n^T A1 n = Q(m) - Q(y). The coordinates s = 2y1 + y2, t = 3y1 + 2y2
(a unimodular change of y) make the sign conditions of the kernel P
one-dimensional; in them 1/2 n^T A1 n = Q(x) + 3 x1 s + x2 t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import specfun as sf
from .qseries import DivergenceError, ShiftTable
from .specfun import ToleranceError

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi

A0 = np.array([[6, 3], [3, 2]])
A1 = np.block([[A0, A0], [A0, np.zeros((2, 2), dtype=int)]])
# Q(x) >= LAMBDA_MIN |x|^2
LAMBDA_MIN = (4.0 - math.sqrt(13.0)) / 2.0
MAX_TERMS = 40_000_000

KERNELS = ("P", "P-", "P0", "Phat", "1")


def _check_tau(tau) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise DivergenceError(f"need Im(tau) > 0, got {tau}")
    return tau


def _fsum(z: np.ndarray) -> complex:
    z = np.asarray(z).ravel()
    return complex(math.fsum(z.real), math.fsum(z.imag))


# ---------------------------------------------------------------------------
# lattice enumeration
# ---------------------------------------------------------------------------

def _q_cut(v: float, tol: float) -> float:
    """Q0 with sum over Q(n) > Q0 of 2/(pi sqrt(Q v)) e^{-2 pi Q v} below tol / 100.

    Lattice points per unit of Q are at most 4 (the area of {Q <= X} is
    2 pi X / sqrt3 plus boundary terms), hence the tail is at most
    8/(pi sqrt(Q0 v)) e^{-2 pi Q0 v} / (2 pi v) up to the boundary layer,
    which the four extra shells of the safety margin cover."""
    target = math.log(tol / 100.0)
    Q0 = 1.0
    while True:
        tail = math.log(8.0 / (math.pi * math.sqrt(Q0 * v) * TWO_PI * v)) - TWO_PI * Q0 * v
        if tail < target:
            return Q0
        Q0 *= 1.25


def _ellipse(shift, qmax: float, shells: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """All n in shift + Z^2 with Q(n) <= qmax, after widening the radius by
    `shells` lattice shells."""
    R = math.sqrt(qmax / LAMBDA_MIN) + shells
    s1, s2 = (Fraction(x) for x in shift)
    # |n1| <= 2 sqrt(qmax / 3), |n2| <= 2 sqrt(qmax) on the ellipse
    r1 = int(math.ceil(min(R, 2.0 * math.sqrt(qmax / 3.0) + shells)))
    r2 = int(math.ceil(min(R, 2.0 * math.sqrt(qmax) + shells)))
    k1 = np.arange(-r1 - 1, r1 + 2)
    k2 = np.arange(-r2 - 1, r2 + 2)
    if len(k1) * len(k2) > MAX_TERMS:
        raise ToleranceError("lattice too large for the requested tolerance", float("inf"))
    n1 = (float(s1 - math.floor(s1)) + k1)[:, None] * np.ones(len(k2))[None, :]
    n2 = np.ones(len(k1))[:, None] * (float(s2 - math.floor(s2)) + k2)[None, :]
    n1, n2 = n1.ravel(), n2.ravel()
    Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
    keep = Qn <= qmax + shells * (shells + 2 * math.sqrt(qmax) * 2)
    return n1[keep], n2[keep]


def _m2_values(n1: np.ndarray, n2: np.ndarray, v: float) -> np.ndarray:
    """M2(sqrt3; sqrt(3v)(2n1 + n2), sqrt(v) n2) with exact rotated
    coordinates, so that n1 = 0 gives M(0) = 0 in the second slot."""
    a = math.sqrt(3 * v) * (2 * n1 + n2)
    b = math.sqrt(v) * n2
    c = math.sqrt(v) * (3 * n1 + 2 * n2)
    d = math.sqrt(3 * v) * n1
    out = np.empty_like(a)
    zero = (a == 0) & (b == 0)
    if np.any(zero):
        out[zero] = sf.M2(SQRT3, (0.0, 0.0))
    if np.any(~zero):
        out[~zero] = sf.m2_core_array(a[~zero], b[~zero], c[~zero], d[~zero])
    return out


def _rotated_tail(n1: np.ndarray, n2: np.ndarray, v: float) -> np.ndarray:
    """e^{-pi v (3n1 + 2n2)^2} M(sqrt(3v) n1) / (2 pi sqrt v)."""
    c = math.sqrt(v) * (3 * n1 + 2 * n2)
    return np.exp(-math.pi * c * c) * sf.mordell_M(math.sqrt(3 * v) * n1) / (TWO_PI * math.sqrt(v))


def m2_term_bound(n1, n2, v: float) -> np.ndarray:
    """Upper bound for |M2(sqrt3; u(n)) q^{-Q(n)}|.

    From the integral over [1, oo) and |M(x)| <= e^{-pi x^2}:
    |M2(u)| <= 2 (|u1| + |c|) e^{-pi |u|^2} / (pi |u|^2) <= 4 e^{-pi |u|^2} / (pi |u|);
    with |u|^2 = 4 Q(n) v this is 2 e^{-2 pi Q v} / (pi sqrt(Q v)) after the q-factor."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
    return 2.0 * np.exp(-TWO_PI * Qn * v) / (math.pi * np.sqrt(Qn * v))


def _theta_sum(p: int, tau, tol: float, second: bool, full_output: bool,
               qcut_scale: float = 1.0):
    tau = _check_tau(tau)
    v = tau.imag
    tab = ShiftTable(p)
    qcut = qcut_scale * _q_cut(v, tol)
    total = 0j
    count = 0
    for alpha in tab.Sstar:
        n1, n2 = _ellipse(alpha, qcut)
        count += n1.size
        M2v = _m2_values(n1, n2, v)
        vals = n2 * M2v + _rotated_tail(n1, n2, v) if second else M2v
        Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
        part = _fsum(vals * np.exp(-2j * math.pi * tau * Qn))
        total += (1 if second else tab.eps(alpha)) * part
    val = total / 2
    if full_output:
        return val, {"qcut": qcut, "terms": count, "err_est": tol}
    return val


def E1_theta_sum(p: int, tau, tol: float = 1e-12, full_output: bool = False,
                 qcut_scale: float = 1.0):
    """EE1(tau) = E1(tau / p) as the eps-weighted M2 theta sum over S*."""
    return _theta_sum(p, tau, tol, False, full_output, qcut_scale)


def E2_theta_sum(p: int, tau, tol: float = 1e-12, full_output: bool = False,
                 qcut_scale: float = 1.0):
    """EE2(tau) = E2(tau / p) as the theta sum of the z-derivative at z = 0."""
    return _theta_sum(p, tau, tol, True, full_output, qcut_scale)


def E1_theta_sum_alpha(alpha, tau, tol: float = 1e-12) -> complex:
    """sum_{n in alpha + Z^2} M2(sqrt3; u(n)) q^{-Q(n)}; twice E_{1,alpha}(tau)."""
    tau = _check_tau(tau)
    v = tau.imag
    n1, n2 = _ellipse(alpha, _q_cut(v, tol))
    Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
    return _fsum(_m2_values(n1, n2, v) * np.exp(-2j * math.pi * tau * Qn))


def summand(n, tau, second: bool = False) -> complex:
    """Single term of the theta sum for EE1 (second=False) or EE2."""
    tau = _check_tau(tau)
    v = tau.imag
    n1 = np.array([float(n[0])])
    n2 = np.array([float(n[1])])
    M2v = _m2_values(n1, n2, v)
    vals = n2 * M2v + _rotated_tail(n1, n2, v) if second else M2v
    Qn = 3 * n1 * n1 + 3 * n1 * n2 + n2 * n2
    return complex((vals * np.exp(-2j * math.pi * tau * Qn))[0])


# ---------------------------------------------------------------------------
# the z-derivative of the Jacobi form behind EE2
# ---------------------------------------------------------------------------

def _mordell_analytic(x: np.ndarray) -> np.ndarray:
    # the analytic continuation of M from the half line containing Re x
    from scipy.special import erfc
    s = np.where(np.real(x) > 0, 1.0, -1.0)
    return -s * erfc(sf.SQRT_PI * s * x)


def _m2_complex(a, b, c, d, nodes: int = 40, panels: int = 24) -> complex:
    """The integral over [1, oo) defining M2 for complex arguments near the
    real axis (complex-step use); Re d must not vanish."""
    if np.real(d) == 0 or np.real(b) == 0:
        raise ValueError("continuation across a sign change of M")
    norm2 = float(np.real(a) ** 2 + np.real(b) ** 2)
    zm = 0.5 * math.log1p(50.0 / (math.pi * norm2))
    x, w = np.polynomial.legendre.leggauss(nodes)
    h = zm / panels
    z = ((np.arange(panels)[:, None] + 0.5 * (x[None, :] + 1.0)) * h).ravel()
    wt = np.tile(w, panels) * 0.5 * h
    ww = np.exp(2 * z)
    sw = np.exp(z)
    f = a * np.exp(-math.pi * a * a * ww) * _mordell_analytic(b * sw) \
        + c * np.exp(-math.pi * c * c * ww) * _mordell_analytic(d * sw)
    return complex(np.sum(-2.0 * sw * f * wt))


def jacobi_expression(n, v: float, z: complex, u: float = 0.0) -> complex:
    """M2(sqrt3; sqrt(3v)(2n1 + n2), sqrt(v)(n2 - 2 Im(z)/v)) e^{2 pi i n2 z}."""
    n1, n2 = float(n[0]), float(n[1])
    u2 = math.sqrt(v) * (n2 - 2 * z.imag / v)
    M2v = sf.M2(SQRT3, (math.sqrt(3 * v) * (2 * n1 + n2), u2))
    return M2v * np.exp(2j * math.pi * n2 * z)


def defineH_closed(n, v: float) -> float:
    """(1/2 pi i) d/dz [jacobi_expression] at z = 0 in closed form."""
    n1, n2 = float(n[0]), float(n[1])
    M2v = _m2_values(np.array([n1]), np.array([n2]), v)[0]
    tail = _rotated_tail(np.array([n1]), np.array([n2]), v)[0]
    return n2 * M2v + tail


def defineH_audit(n, v: float, step: float = 1e-20, h: float = 1e-3) -> Dict[str, complex]:
    """Compare the closed form with a numerical Wirtinger derivative.

    The expression is G(Im z) e^{2 pi i n2 z} with G real-analytic, so
    d/dz = (1/2)(d/dx - i d/dy) needs G(0) and G'(0); G'(0) comes from a
    complex step in y (Im G(i s) / s), the x-derivative from a Richardson
    extrapolated central difference of the full expression."""
    n1, n2 = float(n[0]), float(n[1])
    if n1 == 0 or n2 == 0:
        raise ValueError("the complex step needs n1 != 0 and n2 != 0")
    a = math.sqrt(3 * v) * (2 * n1 + n2)

    def G(y):
        u2 = math.sqrt(v) * (n2 - 2 * y / v)
        return _m2_complex(a, u2, (u2 + SQRT3 * a) / 2, (a - SQRT3 * u2) / 2)

    G0 = G(0.0).real
    dG = G(1j * step).imag / step

    def dx(hh):
        return (jacobi_expression(n, v, complex(hh, 0)) - jacobi_expression(n, v, complex(-hh, 0))) / (2 * hh)

    ddx = (4 * dx(h / 2) - dx(h)) / 3
    ddy = dG - TWO_PI * n2 * G0
    numeric = 0.5 * (ddx - 1j * ddy) / (2j * math.pi)
    return {"closed": defineH_closed(n, v), "numeric": numeric, "G0": G0}


# ---------------------------------------------------------------------------
# kernels of the signature (2, 2) theta function
# ---------------------------------------------------------------------------

def _split(n) -> Tuple[np.ndarray, ...]:
    n = np.asarray(n, dtype=float)
    return n[..., 0], n[..., 1], n[..., 2], n[..., 3]


def kernel_P_minus(n) -> np.ndarray:
    """P^-(n) = M2(sqrt3; sqrt3(2 n3 + n4), n4)."""
    n1, n2, n3, n4 = _split(n)
    y1, y2 = np.atleast_1d(n3), np.atleast_1d(n4)
    # unit v: the M2 helper takes the scale separately
    return _m2_values(y1, y2, 1.0).reshape(np.shape(n3))


def kernel_P0(n) -> np.ndarray:
    """P0(n) = M2(sqrt3; sqrt3(2 n1 + n2), n2) on R^2."""
    n = np.asarray(n, dtype=float)
    return _m2_values(np.atleast_1d(n[..., 0]), np.atleast_1d(n[..., 1]), 1.0).reshape(np.shape(n[..., 0]))


def kernel_P(n) -> np.ndarray:
    """P(n): the M2 term, the pure sign term and the two sign * M terms."""
    n1, n2, n3, n4 = _split(n)
    s, t = 2 * n3 + n4, 3 * n3 + 2 * n4
    sg = np.sign
    return (kernel_P_minus(n)
            + (sg(s) + sg(n1)) * (sg(t) + sg(n2))
            + (sg(n4) + sg(n2)) * sf.mordell_M(SQRT3 * s)
            + (sg(n3) + sg(n1)) * sf.mordell_M(t))


def phat_terms(n, eps: float) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """(kappa, b, c) with P-hat_eps(n) = sum E2(kappa; b.n, c.n)."""
    k = 2 * SQRT3 - 3
    e = float(eps)
    return [
        (e / 3, np.array([0, 0, 2 * SQRT3, SQRT3]), np.array([-e, 3 / (e * k), -e, -e / SQRT3])),
        (e / 2, np.array([0, 0, 3, 2]), np.array([3 / (e * k), -e, -e * SQRT3, -e])),
        (SQRT3, np.array([0, 0, 2 * SQRT3, SQRT3]), np.array([0, 0, 0, 1.0])),
        (-SQRT3, np.array([0, 1 / (2 * e) - e / 2, 0, -e]),
         np.array([SQRT3 / e - SQRT3 * e, SQRT3 / (2 * e) - SQRT3 * e / 2, -2 * SQRT3 * e, -SQRT3 * e])),
    ]


def _gl_panels(lo: float, hi: float, panels: int, nodes: int = 32):
    x, w = np.polynomial.legendre.leggauss(nodes)
    h = (hi - lo) / panels
    z = lo + (np.arange(panels)[:, None] + 0.5 * (x[None, :] + 1.0)) * h
    return z.ravel(), np.tile(w, panels) * 0.5 * h


def e2_fixed(kappa: float, u1: float, u2: float, half_width: float = 8.0, panels: int = 8) -> float:
    """E2(kappa; u) = int sgn(w) e^{-pi (w - u1)^2} E(u2 + kappa w) dw by a
    fixed Gauss-Legendre rule on [u1 - 8, u1 + 8], split at w = 0.

    The nodes move affinely with u1, so the result is smooth in u and can be
    differentiated numerically (adaptive quadrature noise cannot)."""
    from scipy.special import erf
    lo, hi = u1 - half_width, u1 + half_width
    total = 0.0
    for a, b, sign in ((lo, min(hi, 0.0), -1.0), (max(lo, 0.0), hi, 1.0)):
        if b <= a:
            continue
        z, w = _gl_panels(a, b, panels)
        total += sign * float(np.sum(w * np.exp(-math.pi * (z - u1) ** 2) * erf(sf.SQRT_PI * (u2 + kappa * z))))
    return total


def kernel_Phat(n, eps: float) -> float:
    """P-hat_eps(n), the E2 kernel tending to P as eps -> 0."""
    if not eps > 0:
        raise ValueError("eps > 0 required")
    n = np.asarray(n, dtype=float)
    return sum(e2_fixed(k, float(b @ n), float(c @ n)) for k, b, c in phat_terms(n, eps))


# ---------------------------------------------------------------------------
# indefinite theta functions
# ---------------------------------------------------------------------------

def _as_matrix(A) -> np.ndarray:
    if isinstance(A, str):
        table = {"A0": A0, "-A0": -A0, "A1": A1}
        if A not in table:
            raise ValueError(f"unknown matrix name {A!r}")
        return table[A].copy()
    M = np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.array_equal(M, M.T):
        raise ValueError("A must be a square symmetric matrix")
    if not np.array_equal(M, np.round(M)):
        raise ValueError("A must have integer entries")
    return M.astype(int)


@dataclass(frozen=True)
class IndefThetaSpec:
    """Data of Theta_{A, kernel, a}(tau) = sum_{n in a + Z^m} kernel(sqrt(v) n) q^{n^T A n / 2}."""

    A: object
    a: Tuple
    kernel: str = "P"
    eps: Optional[float] = None
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        M = _as_matrix(self.A)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "a", tuple(Fraction(x) for x in self.a))
        if len(self.a) != M.shape[0]:
            raise ValueError("offset and matrix dimensions differ")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if self.kernel in ("P", "P-", "Phat") and not np.array_equal(M, A1):
            raise ValueError(f"kernel {self.kernel} belongs to A1")
        if self.kernel == "P0" and not np.array_equal(M, -A0):
            raise ValueError("kernel P0 belongs to -A0")
        if self.kernel == "1" and np.any(np.linalg.eigvalsh(M) <= 0):
            raise ValueError("the constant kernel needs a positive definite form")
        if self.kernel == "Phat" and not (self.eps and self.eps > 0):
            raise ValueError("Phat needs eps > 0")
        if self.kernel in ("P", "P-"):
            a1, a2, _, a4 = self.a
            if any(x.denominator == 1 for x in (a1, a2, a4)):
                raise ValueError("convergence needs a1, a2, a4 outside Z")

    @property
    def lam(self) -> int:
        """Vigneras eigenvalue of the kernel."""
        return 0

    @property
    def weight(self) -> float:
        return self.lam + self.matrix.shape[0] / 2


def _theta_const(M: np.ndarray, a, tau: complex, tol: float) -> complex:
    """Positive definite theta series by enumeration of an ellipsoid."""
    v = tau.imag
    m = M.shape[0]
    lam = float(np.linalg.eigvalsh(M).min()) / 2
    qmax = (math.log(100.0 / tol) + 2 * m) / (TWO_PI * v)
    Minv = np.linalg.inv(M)
    axes = []
    for i in range(m):
        r = math.sqrt(2 * qmax * Minv[i, i]) + 2
        base = float(a[i] - math.floor(a[i]))
        axes.append(base + np.arange(-math.ceil(r) - 1, math.ceil(r) + 2))
    if np.prod([len(x) for x in axes]) > MAX_TERMS:
        raise ToleranceError("positive definite theta box too large", float("inf"))
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    Qn = 0.5 * np.einsum("ki,ij,kj->k", grid, M, grid)
    keep = Qn <= qmax + 1.0
    del lam
    return _fsum(np.exp(2j * math.pi * tau * Qn[keep]))


def theta_A0(b, tau, tol: float = 1e-13) -> complex:
    """sum_{m in b + Z^2} q^{Q(m)}."""
    tau = _check_tau(tau)
    return _theta_const(A0, tuple(Fraction(x) for x in b), tau, tol)


class _Offsets:
    """Exact bookkeeping of a in Q^4 in the (x, s, t) coordinates."""

    def __init__(self, a):
        a1, a2, a3, a4 = a
        self.x = (a1, a2)
        self.y = (a3, a4)
        self.s = 2 * a3 + a4
        self.t = 3 * a3 + 2 * a4
        self.D = reduce(lambda u, w: u * w // math.gcd(u, w),
                        (Fraction(z).denominator for z in (a1, a2, a3, a4, self.s / 2, self.t / 2)), 1)
        self.D *= 2


def _axis(base: Fraction, R: float) -> np.ndarray:
    b = base - math.floor(base)
    r = int(math.ceil(R))
    return float(b) + np.arange(-r - 1, r + 2)


def _minus_part(a, tau: complex, tol: float):
    """Direct sum over a + Z^4 of P^-(sqrt v n) q^{n^T A1 n / 2}.

    Only y = (n3, n4) with Q(y) <= qcut carry a non-negligible M2 factor,
    and for those only x with Q(x + y) <= qcut matter; the box for x
    covers both ranges."""
    v = tau.imag
    qcut = _q_cut(v, tol)
    y1, y2 = _ellipse(a[2:], qcut)
    M2v = _m2_values(y1, y2, v)
    Ry1 = np.max(np.abs(y1)) + 2 * math.sqrt(qcut / 3) + 2
    Ry2 = np.max(np.abs(y2)) + 2 * math.sqrt(qcut) + 2
    x1 = _axis(a[0], Ry1)
    x2 = _axis(a[1], Ry2)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    X1, X2 = X1.ravel(), X2.ravel()
    total = 0j
    edge = 0.0
    on_edge = (np.abs(X1) >= x1.max() - 1) | (np.abs(X2) >= x2.max() - 1) \
        | (X1 <= x1.min() + 1) | (X2 <= x2.min() + 1)
    for j in range(y1.size):
        m1, m2 = X1 + y1[j], X2 + y2[j]
        Qm = 3 * m1 * m1 + 3 * m1 * m2 + m2 * m2
        Qy = 3 * y1[j] ** 2 + 3 * y1[j] * y2[j] + y2[j] ** 2
        expo = Qm - Qy
        # Q(m) - Q(y) is exactly n^T A1 n / 2 for n = (m - y, y)
        terms = M2v[j] * np.exp(2j * math.pi * tau * expo)
        total += _fsum(terms)
        edge = max(edge, float(np.max(np.abs(terms[on_edge]), initial=0.0)))
    return total, edge


def _sign_geometric(frac_num: np.ndarray, D: int, eps, c, tau: complex,
                    offset) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """sum over s in (frac_num / D) + Z of (sgn(s) + eps) e(c (s + offset) tau),
    with eps c > 0, as coef * exp(expo) + coef0 * exp(expo0) so callers can
    merge the exponents with decaying factors before exponentiating."""
    frac_num, eps, c, offset = np.broadcast_arrays(np.asarray(frac_num), np.asarray(eps, dtype=float),
                                                   np.asarray(c, dtype=float), np.asarray(offset, dtype=float))
    fr = np.mod(frac_num, D)
    f = fr / D
    at_zero = fr == 0
    e1 = np.exp(2j * math.pi * c * tau)
    pos = eps > 0
    start = np.where(pos, np.where(at_zero, 1.0, f), np.where(at_zero, -1.0, f - 1.0))
    coef = np.where(pos, 2 / (1 - e1), -2 / (1 - 1 / e1))
    expo = 2j * math.pi * c * (start + offset) * tau
    coef0 = np.where(at_zero, eps, 0.0)
    expo0 = 2j * math.pi * c * offset * tau
    return coef, expo, coef0, expo0


def _log_mordell(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """M(x) = sign * exp(logabs) with the Gaussian kept in the exponent."""
    from scipy.special import erfcx
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return -np.sign(x), np.log(erfcx(sf.SQRT_PI * ax)) - math.pi * ax * ax


def _p_boxes(a, v: float, tol: float):
    """Half widths of the (x, s, t) box for the sign and sign * M parts."""
    a1, a2 = (Fraction(z) for z in a[:2])
    d1 = float(min(a1 - math.floor(a1), math.ceil(a1) - a1))
    d2 = float(min(a2 - math.floor(a2), math.ceil(a2) - a2))
    L = math.log(1.0 / tol) + 8.0
    # x: Q(x) <= L / (2 pi v) inside every part (the forms in s, t are
    # positive on the supports)
    qx = L / (TWO_PI * v)
    Rx = 2 * math.sqrt(qx) + 2
    # smallest eigenvalues of the (x, s) and (x, t) forms of the sign * M parts
    lam3 = float(np.linalg.eigvalsh(np.array([[6, 3, 3], [3, 2, 1.5], [3, 1.5, 3]])).min())
    lam4 = float(np.linalg.eigvalsh(np.array([[6, 3, 1.5], [3, 2, 1], [1.5, 1, 1]])).min())
    Rm = math.sqrt(L / (math.pi * v * min(lam3, lam4))) + 2
    Rs = max(L / (6 * math.pi * v * d1), Rm) + 1.5 * Rm + 2
    Rt = max(L / (TWO_PI * v * d2), Rm) + 1.5 * Rs + 2
    return Rx, Rs, Rt, Rm, d1, d2


def _p_direct(a, tau: complex, tol: float):
    """Sign and sign * M parts of Theta_{A1,P,a} by direct summation over a
    box in the (x, s, t) coordinates of n."""
    v = tau.imag
    off = _Offsets(a)
    Rx, Rs, Rt, _, _, _ = _p_boxes(a, v, tol)
    x1 = _axis(off.x[0], Rx)
    x2 = _axis(off.x[1], Rx)
    s = _axis(off.s, Rs)
    t = _axis(off.t, Rt)
    if x1.size * x2.size * s.size * t.size > MAX_TERMS:
        raise ToleranceError("signature (2,2) box too large", float("inf"))
    sq = math.sqrt(v)
    sgn_s, log_s = _log_mordell(sq * SQRT3 * s)
    sgn_t, log_t = _log_mordell(sq * t)
    S, T = np.meshgrid(s, t, indexing="ij")
    LS = np.broadcast_to(log_s[:, None], S.shape)
    LT = np.broadcast_to(log_t[None, :], S.shape)
    # y = (2s - t, 2t - 3s) lives on (1/D) Z^2; snap so its zeros stay exact
    Y1 = np.round((2 * S - T) * off.D) / off.D
    Y2 = np.round((2 * T - 3 * S) * off.D) / off.D
    total = 0j
    edge = 0.0
    border = np.zeros(S.shape, dtype=bool)
    border[[0, -1], :] = True
    border[:, [0, -1]] = True
    for u1 in x1:
        for u2 in x2:
            g1, g2 = np.sign(u1), np.sign(u2)
            c_sign = (np.sign(S) + g1) * (np.sign(T) + g2)
            c_s = (np.sign(Y2) + g2) * sgn_s[:, None]
            c_t = (np.sign(Y1) + g1) * sgn_t[None, :]
            live = (c_sign != 0) | (c_s != 0) | (c_t != 0)
            if not np.any(live):
                continue
            expo = 2j * math.pi * tau * (3 * u1 * u1 + 3 * u1 * u2 + u2 * u2 + 3 * u1 * S[live] + u2 * T[live])
            terms = (c_sign[live] * np.exp(np.where(c_sign[live] != 0, expo, -np.inf))
                     + c_s[live] * np.exp(np.where(c_s[live] != 0, expo + LS[live], -np.inf))
                     + c_t[live] * np.exp(np.where(c_t[live] != 0, expo + LT[live], -np.inf)))
            total += _fsum(terms)
            if np.any(border[live]):
                edge = max(edge, float(np.max(np.abs(terms[border[live]]))))
    return total, edge


def _p_structured(a, tau: complex, tol: float) -> complex:
    """Same sum as :func:`_p_direct` with the geometric series in s and t
    summed in closed form."""
    v = tau.imag
    off = _Offsets(a)
    D = off.D
    Rx, _, _, Rm, _, _ = _p_boxes(a, v, tol)
    x1 = _axis(off.x[0], Rx)
    x2 = _axis(off.x[1], Rx)
    sq = math.sqrt(v)
    # exact numerators (denominator D) of the s and t lattices
    s_base = Fraction(off.s) - math.floor(off.s)
    t_base = Fraction(off.t) - math.floor(off.t)
    r = int(math.ceil(2.5 * Rm + 4))
    s_num = int(s_base * D) + D * np.arange(-r, r + 1)
    t_num = int(t_base * D) + D * np.arange(-r, r + 1)
    s = s_num / D
    t = t_num / D
    sgn_s, log_s = _log_mordell(sq * SQRT3 * s)
    sgn_t, log_t = _log_mordell(sq * t)
    num3 = int(t_base * D) * 2 - 3 * s_num
    num4 = int(s_base * D) * 2 - t_num
    total = 0j
    for u1 in x1:
        for u2 in x2:
            g1, g2 = float(np.sign(u1)), float(np.sign(u2))
            qx = 2j * math.pi * tau * (3 * u1 * u1 + 3 * u1 * u2 + u2 * u2)
            cs, es, cs0, es0 = _sign_geometric(int(s_base * D), D, g1, 3 * u1, tau, 0.0)
            ct, et, ct0, et0 = _sign_geometric(int(t_base * D), D, g2, u2, tau, 0.0)
            part = complex((cs * np.exp(qx + es) + cs0 * np.exp(qx + es0))
                           * (ct * np.exp(et) + ct0 * np.exp(et0)))
            # (sgn(t - 3s/2) + sgn x2) M(sqrt(3v) s): shift t by 3s/2
            c3, e3, c30, e30 = _sign_geometric(num3, 2 * D, g2, u2, tau, 1.5 * s)
            base3 = qx + log_s + 2j * math.pi * tau * 3 * u1 * s
            part += _fsum(sgn_s * (c3 * np.exp(base3 + e3) + c30 * np.exp(base3 + e30)))
            # (sgn(s - t/2) + sgn x1) M(sqrt(v) t): shift s by t/2
            c4, e4, c40, e40 = _sign_geometric(num4, 2 * D, g1, 3 * u1, tau, 0.5 * t)
            base4 = qx + log_t + 2j * math.pi * tau * u2 * t
            part += _fsum(sgn_t * (c4 * np.exp(base4 + e4) + c40 * np.exp(base4 + e40)))
            total += part
    return total


def indefinite_theta(spec: IndefThetaSpec, tau, tol: float = 1e-10, method: str = "direct",
                     full_output: bool = False):
    """Theta_{A, kernel, a}(tau).

    method="direct" sums over a box of a + Z^m whose outermost layer is
    reported as the error estimate; for kernel P, method="structured"
    sums the sign series in s and t in closed form."""
    tau = _check_tau(tau)
    if method not in ("direct", "structured"):
        raise ValueError(f"unknown method {method!r}")
    kern = spec.kernel
    a = spec.a
    info: Dict[str, float] = {}
    if kern == "1":
        val = _theta_const(spec.matrix, a, tau, tol)
    elif kern == "P0":
        val = E1_theta_sum_alpha(a, tau, tol)
    elif kern == "P-":
        val, edge = _minus_part(a, tau, tol)
        info["edge"] = edge
    elif kern == "P":
        mv, edge = _minus_part(a, tau, tol)
        if method == "direct":
            rest, edge2 = _p_direct(a, tau, tol)
            edge = max(edge, edge2)
        else:
            rest = _p_structured(a, tau, tol)
        val = mv + rest
        info["edge"] = edge
    else:
        raise ValueError("the E2 kernel P-hat is evaluated pointwise only (kernel_Phat); "
                         "its theta series is the eps -> 0 limit, kernel P")
    if info.get("edge", 0.0) > tol:
        raise ToleranceError("lattice box too small", info["edge"])
    return (val, info) if full_output else val


# ---------------------------------------------------------------------------
# admissible offsets and the factorisation
# ---------------------------------------------------------------------------

def is_admissible(a, p: int) -> bool:
    """a in (1/p) A1^{-1} Z^4, i.e. p A1 a in Z^4."""
    a = [Fraction(x) for x in a]
    return all((p * sum(int(A1[i, j]) * a[j] for j in range(4))).denominator == 1 for i in range(4))


def admissible_offsets(p: int, count: int = 5, seed: int = 0) -> List[Tuple[Fraction, ...]]:
    """Offsets a in (1/p) A1^{-1} Z^4 with (a3, a4) in S* and a1, a2, a4 not
    integral. (a1, a2) runs through (1/3p)(2j - 3l, -3j + 6l)."""
    rng = np.random.default_rng(seed)
    shifts = [al for al in ShiftTable(p).Sstar if al[1].denominator != 1]
    out: List[Tuple[Fraction, ...]] = []
    seen = set()
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 10000:
            raise RuntimeError("could not find enough admissible offsets")
        j, l = (int(z) for z in rng.integers(-3 * p, 3 * p + 1, size=2))
        a1 = Fraction(2 * j - 3 * l, 3 * p)
        a2 = Fraction(-3 * j + 6 * l, 3 * p)
        if a1.denominator == 1 or a2.denominator == 1:
            continue
        al = shifts[int(rng.integers(len(shifts)))]
        a = (a1 % 1, a2 % 1, al[0], al[1])
        if a in seen:
            continue
        assert is_admissible(a, p)
        seen.add(a)
        out.append(a)
    return out


def factorization_residual(a, tau, tol: float = 1e-12, form: str = "derived",
                           full_output: bool = False):
    """Theta_{A1,P-,a}(tau) - 2 E_{1,(a3,a4)}(tau) Theta_{A0,1,b}(tau).

    form="derived" takes b = (a1 + a3, a2 + a4), which is where m = x + y
    lives; form="printed" takes b = (a1 - a3, a2 - a4). E_{1,alpha} comes
    from the double Eichler integral of :mod:`falsetheta.eichler`."""
    from .eichler import E1_quadrature

    tau = _check_tau(tau)
    a = tuple(Fraction(x) for x in a)
    spec = IndefThetaSpec("A1", a, "P-")
    lhs = indefinite_theta(spec, tau, tol)
    if form == "derived":
        b = (a[0] + a[2], a[1] + a[3])
    elif form == "printed":
        b = (a[0] - a[2], a[1] - a[3])
    else:
        raise ValueError(f"unknown form {form!r}")
    E = E1_quadrature((a[2], a[3]), tau, tol=min(tol, 1e-10))
    rhs = 2 * E * theta_A0(b, tau)
    res = lhs - rhs
    return (res, {"lhs": lhs, "rhs": rhs}) if full_output else res


# ---------------------------------------------------------------------------
# convergence bounds
# ---------------------------------------------------------------------------

def m2_bound_audit(p: int, tau, qmax: float = 12.0) -> Dict[str, float]:
    """Check |M2 q^{-Q}| <= 2 e^{-2 pi Q v} / (pi sqrt(Q v)) on every lattice
    point of the theta sum with Q(n) <= qmax."""
    tau = _check_tau(tau)
    v = tau.imag
    worst = 0.0
    checked = 0
    violations = 0
    for alpha in ShiftTable(p).Sstar:
        n1, n2 = _ellipse(alpha, qmax, shells=0)
        val = np.abs(_m2_values(n1, n2, v) * np.exp(TWO_PI * v * (3 * n1 * n1 + 3 * n1 * n2 + n2 * n2)))
        bound = m2_term_bound(n1, n2, v)
        ratio = val / bound
        worst = max(worst, float(ratio.max()))
        violations += int(np.sum(ratio > 1.0))
        checked += n1.size
    return {"checked": checked, "violations": violations, "max_ratio": worst}


def sign_series_audit(a, v: float, R: int = 6) -> Dict[str, float]:
    """Termwise check for the pure sign series of kernel P.

    On the support (sgn s + sgn n1)(sgn t + sgn n2) != 0 with n1, n2 != 0
    one has n1 s >= 0 and n2 t >= 0, hence
    n^T A1 n / 2 = Q(x) + 3 n1 s + n2 t >= c (|x|^2 + |s| + |t|) with
    c = min(LAMBDA_MIN, 3 delta1, delta2), delta_j the distance of a_j to Z."""
    a = tuple(Fraction(x) for x in a)
    off = _Offsets(a)
    x1 = _axis(off.x[0], R)
    x2 = _axis(off.x[1], R)
    s = _axis(off.s, 3 * R)
    t = _axis(off.t, 3 * R)
    X1, X2, S, T = np.meshgrid(x1, x2, s, t, indexing="ij")
    coef = (np.sign(S) + np.sign(X1)) * (np.sign(T) + np.sign(X2))
    live = coef != 0
    Q1 = 3 * X1 ** 2 + 3 * X1 * X2 + X2 ** 2 + 3 * X1 * S + X2 * T
    d1 = float(min(a[0] % 1, 1 - a[0] % 1))
    d2 = float(min(a[1] % 1, 1 - a[1] % 1))
    c = min(LAMBDA_MIN, 3 * d1, d2)
    bound = c * (X1 ** 2 + X2 ** 2 + np.abs(S) + np.abs(T))
    viol = live & (Q1 < bound - 1e-12)
    # support off the cone: the sign product must vanish when n1 s < 0 and s != 0
    off_cone = live & ((X1 * S < 0) | (X2 * T < 0))
    return {"checked": int(live.sum()), "violations": int(viol.sum()), "off_cone": int(off_cone.sum()),
            "c": c, "min_excess": float(np.min((Q1 - bound)[live])) if live.any() else 0.0,
            "v": v}


# ---------------------------------------------------------------------------
# Vigneras differential equation
# ---------------------------------------------------------------------------

def _hessian_gradient(f, x: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Fourth order central differences."""
    m = x.size
    f0 = f(x)
    grad = np.zeros(m)
    hess = np.zeros((m, m))
    E = np.eye(m) * h
    for i in range(m):
        fp1, fm1 = f(x + E[i]), f(x - E[i])
        fp2, fm2 = f(x + 2 * E[i]), f(x - 2 * E[i])
        grad[i] = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
        hess[i, i] = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    for i in range(m):
        for j in range(i + 1, m):
            def mixed(k):
                return (f(x + k * (E[i] + E[j])) - f(x + k * (E[i] - E[j]))
                        - f(x - k * (E[i] - E[j])) + f(x - k * (E[i] + E[j]))) / (4 * k * k * h * h)
            # Richardson on the four-point mixed stencil
            hess[i, j] = hess[j, i] = (4 * mixed(1) - mixed(2)) / 3
    return grad, hess


def vigneras_residual(epsilon: float, sample: Sequence[float], A=None, p: int = 1,
                      h: float = 5e-4, kernel: str = "Phat", full_output: bool = False):
    """Relative residual of (D - Delta_{A^{-1}} / 4 pi) P = lam P at a point.

    kernel "Phat" is n -> P-hat_eps(sqrt(p) n) and goes with A = p A1
    (the default); kernel "1" is the constant function. The residual is
    divided by |D P| + |Delta P| / 4 pi. The eps terms have slopes of
    order 1/eps, so h has to be well below eps / 10."""
    x = np.asarray(sample, dtype=float)
    if A is None:
        A = p * A1
    A = _as_matrix(A) if not isinstance(A, np.ndarray) else A
    if kernel == "1":
        info = {"D": 0.0, "Delta": 0.0, "value": 1.0}
        return (0.0, info) if full_output else 0.0
    if kernel != "Phat":
        raise ValueError("kernel must be 'Phat' or '1'")
    if not epsilon > 0:
        raise ValueError("epsilon > 0 required")
    if x.size != 4:
        raise ValueError("sample must be a 4-vector")
    rp = math.sqrt(p)

    def f(n):
        return kernel_Phat(rp * n, epsilon)

    grad, hess = _hessian_gradient(f, x, h)
    Ainv = np.linalg.inv(A)
    Dval = float(x @ grad)
    Lap = float(np.sum(Ainv * hess))
    res = Dval - Lap / (4 * math.pi)
    scale = abs(Dval) + abs(Lap) / (4 * math.pi)
    rel = abs(res) / scale if scale > 0 else abs(res)
    info = {"D": Dval, "Delta": Lap, "value": f(x), "abs": abs(res)}
    return (rel, info) if full_output else rel


def vigneras_sweep(epsilon: float, sample, steps=(4e-3, 2e-3, 1e-3, 5e-4), **kw) -> List[float]:
    """Residuals for a decreasing sequence of finite-difference steps."""
    return [vigneras_residual(epsilon, sample, h=h, **kw) for h in steps]


def phat_limit_gap(n, eps_list=(0.1, 0.03, 0.01)) -> List[float]:
    """|P-hat_eps(n) - P(n)| along a sequence of eps."""
    n = np.asarray(n, dtype=float)
    P = float(kernel_P(n))
    return [abs(kernel_Phat(n, e) - P) for e in eps_list]
