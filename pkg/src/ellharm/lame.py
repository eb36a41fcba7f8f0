"""Lamé functions: interior E_n^p, exterior F_n^p and their solid products.

Every interior solution of order ``n`` has the form

    E(s) = s**alpha * |s^2-h^2|**(beta/2) * |s^2-k^2|**(gamma/2) * P(t),
    t = 1 - s^2/h^2,

with ``P`` a polynomial of degree ``m``. The exponents pick the class::

    K: (n%2, 0, 0)    L: (1-n%2, 1, 0)    M: (1-n%2, 0, 1)    N: (n%2, 1, 1)

and ``n = alpha + beta + gamma + 2m``. Substituting into Lamé's equation
with ``q = n(n+1)`` gives a tridiagonal recurrence for the coefficients of
``P`` whose eigenvalues are minus the separation constants.

Coefficients are scaled so the highest power of ``s`` has coefficient 1.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import eigh_tridiagonal

from .ellipsoid import EllipsoidalPoint, EllipsoidalSystem, signs_to_cartesian
from .quad import QuadOptions

__all__ = [
    "LameClass",
    "LameHarmonic",
    "HarmonicTable",
    "class_size",
    "class_matrix",
    "solve_order",
    "eval_E",
    "eval_E_deriv",
    "eval_I",
    "eval_F",
    "eval_F_deriv",
    "eval_solid_interior",
    "eval_solid_exterior",
    "ode_residual",
    "MAX_ORDER",
]

MAX_ORDER = 60
DEFAULT_QUAD = QuadOptions(tol=1e-14)


class LameClass(enum.Enum):
    K = "K"
    L = "L"
    M = "M"
    N = "N"

    def exponents(self, n: int) -> tuple[int, int, int]:
        odd = n % 2
        return {
            LameClass.K: (odd, 0, 0),
            LameClass.L: (1 - odd, 1, 0),
            LameClass.M: (1 - odd, 0, 1),
            LameClass.N: (odd, 1, 1),
        }[self]


def class_size(n: int, cls: LameClass) -> int:
    """Number of order-``n`` harmonics in ``cls`` (the matrix dimension)."""
    r = n // 2
    return {LameClass.K: r + 1, LameClass.L: n - r, LameClass.M: n - r, LameClass.N: r}[cls]


def _check_order(n: int) -> None:
    if not 0 <= n <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {n}")


def _bands(sys: EllipsoidalSystem, n: int, cls: LameClass):
    """Diagonal, super- and sub-diagonal of the class recurrence matrix."""
    _check_order(n)
    size = class_size(n, cls)
    if size == 0:
        raise ValueError(f"class {cls.value} is empty for order {n}")
    al, be, ga = cls.exponents(n)
    d = al + be + ga
    hh, kk = sys.hsq, sys.ksq
    q = n * (n + 1)
    j = np.arange(size, dtype=float)
    diag = (hh * (8 * j * j + 4 * j * (al + 2 * be + ga) + d + 2 * al * be + be * be
                  + 2 * be * ga - q)
            - kk * (2 * j + al + be) ** 2)
    # super[j-1] multiplies b_j in row j-1; sub[j] multiplies b_j in row j+1
    jj = j[1:]
    sup = 2 * jj * (kk - hh) * (2 * jj + 2 * be - 1)
    jl = j[:-1]
    sub = hh * (q - (d + 2 * jl) * (d + 2 * jl + 1))
    return diag, sup, sub


def class_matrix(sys: EllipsoidalSystem, n: int, cls: LameClass | str) -> np.ndarray:
    """Dense tridiagonal matrix ``A`` with ``A b = -sep_const * b``."""
    cls = LameClass(cls)
    diag, sup, sub = _bands(sys, n, cls)
    return np.diag(diag) + np.diag(sup, 1) + np.diag(sub, -1)


@dataclass(frozen=True, eq=False)
class LameHarmonic:
    """One interior Lamé function ``E_n^p`` of a given system."""

    sys: EllipsoidalSystem
    n: int
    p: int
    cls: LameClass
    sep_const: float
    coeffs: np.ndarray = field(repr=False)

    @property
    def exponents(self) -> tuple[int, int, int]:
        return self.cls.exponents(self.n)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def scaled(self, factor: float) -> "LameHarmonic":
        c = np.array(self.coeffs) * factor
        c.flags.writeable = False
        return replace(self, coeffs=c)


@dataclass(frozen=True)
class HarmonicTable:
    sys: EllipsoidalSystem
    n: int
    harmonics: tuple[LameHarmonic, ...]

    def __len__(self):
        return len(self.harmonics)

    def __iter__(self):
        return iter(self.harmonics)

    def __getitem__(self, p):
        return self.harmonics[p]


def _solve_class(sys: EllipsoidalSystem, n: int, cls: LameClass):
    diag, sup, sub = _bands(sys, n, cls)
    size = diag.size
    if size == 1:
        return -diag, np.ones((1, 1))
    prod = sup * sub
    if np.any(prod <= 0):
        raise np.linalg.LinAlgError(f"class {cls.value}, n={n}: recurrence not symmetrizable")
    # diagonal similarity D^-1 A D is symmetric
    ratio = np.sqrt(sub / sup)
    scale = np.concatenate([[1.0], np.cumprod(ratio)])
    try:
        evals, evecs = eigh_tridiagonal(diag, np.sqrt(prod))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed for class {cls.value}, n={n}") from exc
    vecs = evecs * scale[:, None]
    # eigenvalue of A is -sep_const; sort sep_const ascending
    order = np.argsort(-evals)
    return -evals[order], vecs[:, order]


@functools.lru_cache(maxsize=None)
def solve_order(sys: EllipsoidalSystem, n: int) -> HarmonicTable:
    """All ``2n+1`` interior harmonics of order ``n``, ordered K, L, M, N."""
    _check_order(n)
    harmonics = []
    hh = sys.hsq
    for cls in LameClass:
        if class_size(n, cls) == 0:
            continue
        seps, vecs = _solve_class(sys, n, cls)
        m = vecs.shape[0] - 1
        for sep, vec in zip(seps, vecs.T):
            # leading power of s in P(1 - s^2/h^2) is b_m (-1/h^2)^m
            lead = vec[-1] * (-1.0 / hh) ** m
            coeffs = vec / lead
            coeffs.flags.writeable = False
            harmonics.append(LameHarmonic(sys, n, len(harmonics), cls, float(sep), coeffs))
    if len(harmonics) != 2 * n + 1:
        raise RuntimeError(f"order {n}: found {len(harmonics)} harmonics, expected {2 * n + 1}")
    return HarmonicTable(sys, n, tuple(harmonics))


def _gaps(harm: LameHarmonic, s, dh, dk):
    s = np.asarray(s, dtype=float)
    if dh is None:
        dh = s * s - harm.sys.hsq
    if dk is None:
        dk = s * s - harm.sys.ksq
    return s, np.asarray(dh, dtype=float), np.asarray(dk, dtype=float)


def eval_E(harm: LameHarmonic, s, dh=None, dk=None):
    """Evaluate ``E(s)``; optional ``dh = s^2-h^2`` and ``dk = s^2-k^2`` avoid cancellation."""
    s, dh, dk = _gaps(harm, s, dh, dk)
    al, be, ga = harm.exponents
    t = -dh / harm.sys.hsq
    val = npoly.polyval(t, harm.coeffs)
    if al:
        val = val * s
    if be:
        val = val * np.sqrt(np.abs(dh))
    if ga:
        val = val * np.sqrt(np.abs(dk))
    return val[()] if val.ndim == 0 else val


def eval_E_deriv(harm: LameHarmonic, s, dh=None, dk=None):
    """Exact ``dE/ds`` by the product rule."""
    s, dh, dk = _gaps(harm, s, dh, dk)
    al, be, ga = harm.exponents
    if (be and np.any(dh == 0)) or (ga and np.any(dk == 0)):
        raise ValueError("derivative of the class factor is unbounded at |s| = h or |s| = k")
    hh = harm.sys.hsq
    t = -dh / hh
    poly = npoly.polyval(t, harm.coeffs)
    dpoly = npoly.polyval(t, npoly.polyder(harm.coeffs)) * (-2.0 * s / hh)
    gh = np.sqrt(np.abs(dh)) if be else np.ones_like(s)
    gk = np.sqrt(np.abs(dk)) if ga else np.ones_like(s)
    sa = s if al else np.ones_like(s)
    dsa = np.ones_like(s) if al else np.zeros_like(s)
    dgh = s * np.sign(dh) / gh if be else np.zeros_like(s)
    dgk = s * np.sign(dk) / gk if ga else np.zeros_like(s)
    dphi = dsa * gh * gk + sa * dgh * gk + sa * gh * dgk
    val = dphi * poly + sa * gh * gk * dpoly
    return val[()] if val.ndim == 0 else val


def ode_residual(harm: LameHarmonic, s) -> tuple[np.ndarray, np.ndarray]:
    """Residual of Lamé's equation at ``s`` and the matching term scale.

    Returns ``(residual, scale)`` with ``scale`` the sum of absolute values
    of the individual terms, so ``residual/scale`` is a relative measure.
    The second derivative is taken exactly from the polynomial form.
    """
    s = np.asarray(s, dtype=float)
    hh, kk = harm.sys.hsq, harm.sys.ksq
    n = harm.n
    al, be, ga = harm.exponents
    # E = phi(x) * u(x), x = s^2; work in x where Lame's equation reads
    # 4Q E'' + 2Q' E' + (p - q x) E = 0 with Q = x (x-h^2)(x-k^2)
    x = s * s
    t = 1.0 - x / hh
    c = harm.coeffs
    u = npoly.polyval(t, c)
    du = npoly.polyval(t, npoly.polyder(c)) * (-1.0 / hh)
    d2u = npoly.polyval(t, npoly.polyder(c, 2)) * (1.0 / hh ** 2)
    lp = al / (2 * x) + be / (2 * (x - hh)) + ga / (2 * (x - kk))
    lpp_raw = (-al / (2 * x * x) - be / (2 * (x - hh) ** 2) - ga / (2 * (x - kk) ** 2))
    Q = x * (x - hh) * (x - kk)
    dQ = (x - hh) * (x - kk) + x * (2 * x - hh - kk)
    # divide the equation by phi: all terms below are E/phi-scaled
    t1 = 4 * Q * (d2u + 2 * lp * du + (lpp_raw + lp * lp) * u)
    t2 = 2 * dQ * (du + lp * u)
    t3 = (harm.sep_const - n * (n + 1) * x) * u
    return t1 + t2 + t3, np.abs(t1) + np.abs(t2) + np.abs(t3)


def _scaled_reciprocal_sq(harm: LameHarmonic, lam: float, u: np.ndarray) -> np.ndarray:
    """``lam / (E(lam/u)^2 sqrt(lam^2-k^2u^2) sqrt(lam^2-h^2u^2))`` without overflow.

    Uses ``u^n E(lam/u)``, which is a bounded polynomial-like function of ``u``.
    """
    hh, kk = harm.sys.hsq, harm.sys.ksq
    al, be, ga = harm.exponents
    v = u * u
    rh = np.sqrt(lam * lam - hh * v)
    rk = np.sqrt(lam * lam - kk * v)
    tau = (hh * v - lam * lam) / hh
    c = harm.coeffs
    acc = np.full_like(u, c[-1])
    vp = v.copy()
    for b in c[-2::-1]:
        acc = acc * tau + b * vp
        vp = vp * v
    if al:
        acc = acc * lam
    if be:
        acc = acc * rh
    if ga:
        acc = acc * rk
    return lam * u ** (2 * harm.n) / (rh * rk * acc * acc)


def _exterior_check(harm: LameHarmonic, lam: float) -> float:
    lam = abs(float(lam))
    if not lam > harm.sys.k:
        raise ValueError(f"exterior functions need lambda > k = {harm.sys.k}, got {lam}")
    return lam


def eval_I(harm: LameHarmonic, lam: float, quad: QuadOptions = DEFAULT_QUAD) -> float:
    """``I(lam) = int_lam^inf ds / (E(s)^2 sqrt(s^2-k^2) sqrt(s^2-h^2))``.

    Computed after ``s = lam/u`` as an integral over ``u`` in (0, 1).
    """
    return _eval_I_result(harm, lam, quad).value


def _eval_I_result(harm, lam, quad):
    lam = _exterior_check(harm, lam)
    res = quad.integrate(lambda u: _scaled_reciprocal_sq(harm, lam, u), 0.0, 1.0)
    if not res.converged:
        raise ArithmeticError(
            f"I integral for n={harm.n}, p={harm.p} at lambda={lam} missed tolerance "
            f"(estimate {res.error_estimate:.3g})")
    return res


def eval_F(harm: LameHarmonic, lam: float, quad: QuadOptions = DEFAULT_QUAD) -> float:
    lam = _exterior_check(harm, lam)
    return (2 * harm.n + 1) * float(eval_E(harm, lam)) * eval_I(harm, lam, quad)


def _dI(harm: LameHarmonic, lam: float) -> float:
    e = float(eval_E(harm, lam))
    return -1.0 / (e * e * math.sqrt(lam * lam - harm.sys.ksq) * math.sqrt(lam * lam - harm.sys.hsq))


def eval_F_deriv(harm: LameHarmonic, lam: float, quad: QuadOptions = DEFAULT_QUAD) -> float:
    lam = _exterior_check(harm, lam)
    e = float(eval_E(harm, lam))
    de = float(eval_E_deriv(harm, lam))
    return (2 * harm.n + 1) * (de * eval_I(harm, lam, quad) + e * _dI(harm, lam))


def _point_factors(harm: LameHarmonic, point: EllipsoidalPoint):
    """``|E(mu)| E(nu)``-style evaluation using the stored bracket gaps."""
    sys = harm.sys
    kh = sys.ksq - sys.hsq
    e_mu = eval_E(harm, abs(point.mu), dh=point.mu2_h2, dk=-point.k2_mu2)
    e_nu = eval_E(harm, abs(point.nu), dh=-point.h2_nu2, dk=-(point.h2_nu2 + kh))
    al, be, ga = harm.exponents
    sx, sy, sz = signs_to_cartesian(*point.signs)
    sign = (sx if al else 1) * (sy if be else 1) * (sz if ga else 1)
    return float(e_mu) * float(e_nu) * sign


def eval_solid_interior(harm: LameHarmonic, point: EllipsoidalPoint) -> float:
    """``E(lambda) E(mu) E(nu)`` with the Cartesian parity of the class factors."""
    kh = harm.sys.ksq - harm.sys.hsq
    e_lam = eval_E(harm, abs(point.lam), dh=point.lam2_k2 + kh, dk=point.lam2_k2)
    return float(e_lam) * _point_factors(harm, point)


def eval_solid_exterior(harm: LameHarmonic, point: EllipsoidalPoint,
                        quad: QuadOptions = DEFAULT_QUAD) -> float:
    """``F(lambda) E(mu) E(nu)`` with the same sign rule as the interior product."""
    return eval_F(harm, abs(point.lam), quad) * _point_factors(harm, point)
