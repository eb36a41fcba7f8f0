"""Change-of-variable quadrature on finite intervals.

Three transforms map the real line onto (-1, 1): tanh-sinh (double
exponential), plain tanh and erf. Each rule is a truncated trapezoid sum in
the transformed variable with step ``h = 2**-level``. Tables are nested, so
the adaptive driver only evaluates the integrand at new abscissae when it
halves the step.

Integrands are vectorized: they receive numpy arrays. When
``endpoint_distances=True`` they are called as ``f(y, dlo, dhi)`` where
``dlo = y - lo`` and ``dhi = hi - y`` are computed without cancellation,
which matters for integrands that are singular at the endpoints.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf, erfc

__all__ = [
    "Transform",
    "QuadratureRule",
    "IntegrationResult",
    "QuadratureError",
    "build_rule",
    "integrate_fixed",
    "integrate_adaptive",
    "estimate_error",
    "QuadOptions",
    "MAX_NODES",
]

MAX_NODES = 1 << 22
_HALF_PI = 0.5 * math.pi
_EPS = np.finfo(float).eps


class QuadratureError(ArithmeticError):
    """Raised when an integrand misbehaves or a rule cannot be built."""


class Transform(enum.Enum):
    TANH_SINH = "tanh-sinh"
    TANH = "tanh"
    ERF = "erf"

    @classmethod
    def parse(cls, value: "Transform | str") -> "Transform":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown transform {value!r}; expected one of "
                         f"{[m.value for m in cls]}")


def _abscissae(transform: Transform, t: np.ndarray):
    """Return ``(x, 1 - |x|, dx/dt)`` for transform parameters ``t``."""
    if transform is Transform.ERF:
        x = erf(t)
        dist = erfc(np.abs(t))
        dxdt = (2.0 / math.sqrt(math.pi)) * np.exp(-t * t)
        return x, dist, dxdt
    if transform is Transform.TANH_SINH:
        u = _HALF_PI * np.sinh(t)
        scale = _HALF_PI * np.cosh(t)
    else:
        u = t
        scale = np.ones_like(t)
    # tanh and sech^2 through exp(-2|u|) so nothing overflows far out
    e = np.exp(-2.0 * np.abs(u))
    dist = 2.0 * e / (1.0 + e)
    x = np.sign(u) * (1.0 - e) / (1.0 + e)
    dxdt = scale * 4.0 * e / (1.0 + e) ** 2
    return x, dist, dxdt


def _own_cutoff(transform: Transform, h: float, cutoff: float, max_nodes: int) -> int:
    """Smallest k >= 0 with ``h * psi'(k h) <= cutoff``."""
    start = 0
    chunk = 256
    while True:
        k = np.arange(start, start + chunk, dtype=np.int64)
        _, dist, dxdt = _abscissae(transform, k * h)
        below = np.nonzero(h * dxdt <= cutoff)[0]
        if below.size:
            return int(k[below[0]])
        if np.any(dist == 0.0):
            raise QuadratureError(
                f"{transform.value} abscissae reach +-1 before the weight "
                f"cutoff {cutoff:g}; reduce digits")
        start += chunk
        chunk *= 2
        if 2 * start + 1 > max_nodes:
            raise QuadratureError(
                f"{transform.value} rule would exceed {max_nodes} nodes")


@functools.lru_cache(maxsize=None)
def _half_width(transform: Transform, level: int, digits: int, max_nodes: int) -> int:
    h = 2.0 ** -level
    own = _own_cutoff(transform, h, 10.0 ** (-2 * digits), max_nodes)
    if level == 0:
        return own
    # keep every coarser node so tables stay nested
    return max(own, 2 * _half_width(transform, level - 1, digits, max_nodes))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Symmetric node table for one transform at one level.

    Arrays run over ``k = -n_half .. n_half``; index ``n_half`` is the
    centre node. ``dist`` holds ``1 - |x|`` computed directly.
    """

    transform: Transform
    level: int
    digits: int
    x: np.ndarray
    dist: np.ndarray
    w: np.ndarray

    @property
    def h(self) -> float:
        return 2.0 ** -self.level

    @property
    def n_half(self) -> int:
        return (self.x.size - 1) // 2

    @property
    def size(self) -> int:
        return self.x.size

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.n_half, self.n_half + 1)


@functools.lru_cache(maxsize=256)
def _cached_rule(transform: Transform, level: int, digits: int, max_nodes: int) -> QuadratureRule:
    n = _half_width(transform, level, digits, max_nodes)
    if 2 * n + 1 > max_nodes:
        raise QuadratureError(
            f"{transform.value} level {level} needs {2 * n + 1} nodes (> {max_nodes})")
    h = 2.0 ** -level
    t = np.arange(0, n + 1, dtype=np.int64) * h
    xp, dp, dxdt = _abscissae(transform, t)
    wp = h * dxdt
    x = np.concatenate([-xp[:0:-1], xp])
    dist = np.concatenate([dp[:0:-1], dp])
    w = np.concatenate([wp[:0:-1], wp])
    for arr in (x, dist, w):
        arr.flags.writeable = False
    return QuadratureRule(transform, level, digits, x, dist, w)


def build_rule(transform: Transform | str = Transform.TANH_SINH, level: int = 6,
               digits: int = 15, max_nodes: int = MAX_NODES) -> QuadratureRule:
    """Build (or fetch from cache) the nested rule at ``level``.

    Parameters
    ----------
    transform : Transform or str
        Change of variables.
    level : int
        Step ``h = 2**-level``.
    digits : int
        Target digits ``p``; weights are truncated at ``10**(-2p)``.
    max_nodes : int
        Resource guard on the total node count.
    """
    transform = Transform.parse(transform)
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    if digits < 1:
        raise ValueError(f"digits must be >= 1, got {digits}")
    return _cached_rule(transform, int(level), int(digits), int(max_nodes))


@dataclass(frozen=True)
class QuadOptions:
    """Settings passed through to :func:`integrate_adaptive`."""

    tol: float = 1e-14
    transform: Transform = Transform.TANH_SINH
    digits: int = 15
    max_level: int = 12

    def __post_init__(self):
        object.__setattr__(self, "transform", Transform.parse(self.transform))

    def integrate(self, f: Callable, lo: float, hi: float, **kw) -> "IntegrationResult":
        return integrate_adaptive(f, lo, hi, self.tol, self.max_level, self.transform,
                                  self.digits, **kw)


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    evaluations: int
    levels_used: int
    converged: bool = True


def _map(rule_x: np.ndarray, rule_dist: np.ndarray, lo: float, hi: float):
    half = 0.5 * (hi - lo)
    y = lo + half * (1.0 + rule_x)
    # distance to the nearer endpoint is exact; the other one is well conditioned
    dlo = np.where(rule_x < 0, half * rule_dist, half * (1.0 + rule_x))
    dhi = np.where(rule_x > 0, half * rule_dist, half * (1.0 - rule_x))
    return y, dlo, dhi


def _evaluate(f, x, dist, lo, hi, endpoint_distances):
    y, dlo, dhi = _map(x, dist, lo, hi)
    with np.errstate(all="ignore"):
        vals = f(y, dlo, dhi) if endpoint_distances else f(y)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), y.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureError(
            f"integrand returned {vals[i]} at x={y[i]!r} (rule abscissa {x[i]!r})")
    return vals


def _check_interval(lo: float, hi: float) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"interval must be finite, got ({lo}, {hi})")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got ({lo}, {hi})")


def _weighted_sum(vals: np.ndarray, w: np.ndarray, lo: float, hi: float) -> float:
    return 0.5 * (hi - lo) * math.fsum((vals * w).tolist())


def integrate_fixed(f: Callable, rule: QuadratureRule, lo: float = -1.0, hi: float = 1.0,
                    *, endpoint_distances: bool = False) -> IntegrationResult:
    """Apply one rule to ``f`` on ``(lo, hi)``; no error estimate."""
    _check_interval(lo, hi)
    vals = _evaluate(f, rule.x, rule.dist, lo, hi, endpoint_distances)
    return IntegrationResult(_weighted_sum(vals, rule.w, lo, hi), 0.0, rule.size, 1)


def estimate_error(value_prev: float, value_curr: float, value_prev2: float | None = None) -> float:
    """Error estimate for the latest level from successive level sums.

    Uses the Bailey exponent ``max(d1**2/d2, 2*d1, log10(eps*|S|))`` with
    ``d1 = log10|S_j - S_{j-1}|`` and ``d2 = log10|S_j - S_{j-2}|``, floored
    at the geometric extrapolation ``D1**2 / D0`` (``D0`` the previous
    difference) and clamped to the last difference ``D1``.
    """
    d_last = abs(value_curr - value_prev)
    if d_last == 0.0:
        return 0.0
    if value_prev2 is None:
        return d_last
    d_prior = abs(value_prev - value_prev2)
    d_two = abs(value_curr - value_prev2)
    if d_prior == 0.0 or d_two == 0.0:
        return d_last
    l1 = math.log10(d_last)
    l2 = math.log10(d_two)
    floor = _EPS * abs(value_curr)
    exponent = max(2.0 * l1, math.log10(floor) if floor > 0 else -math.inf)
    if l2 < 0.0:
        exponent = max(exponent, l1 * l1 / l2)
    bailey = 10.0 ** min(0.0, exponent)
    return min(d_last, max(bailey, d_last * d_last / d_prior, floor))


def integrate_adaptive(f: Callable, lo: float = -1.0, hi: float = 1.0, tolerance: float = 1e-12,
                       max_level: int = 12, transform: Transform | str = Transform.TANH_SINH,
                       digits: int = 15, *, endpoint_distances: bool = False) -> IntegrationResult:
    """Adaptive nested integration of ``f`` over ``(lo, hi)``.

    Levels ``0, 1, ...`` are summed in turn; each new level evaluates ``f``
    only at abscissae not seen before. Iteration stops once the error
    estimate is at most ``tolerance * |value|`` (absolute when the value is
    zero), or at ``max_level``; in that case ``converged`` is False.
    """
    _check_interval(lo, hi)
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    transform = Transform.parse(transform)
    top = build_rule(transform, max_level, digits)
    # node identity: integer position on the finest grid
    cache = np.full(top.size, np.nan)
    seen = np.zeros(top.size, dtype=bool)
    centre = top.n_half
    evaluations = 0
    sums: list[float] = []
    est = math.inf
    for j in range(max_level + 1):
        rule = build_rule(transform, j, digits)
        stride = 1 << (max_level - j)
        idx = centre + rule.k * stride
        new = ~seen[idx]
        if new.any():
            vals = _evaluate(f, rule.x[new], rule.dist[new], lo, hi, endpoint_distances)
            cache[idx[new]] = vals
            seen[idx[new]] = True
            evaluations += int(new.sum())
        sums.append(_weighted_sum(cache[idx], rule.w, lo, hi))
        if j >= 1:
            est = estimate_error(sums[-2], sums[-1], sums[-3] if j >= 2 else None)
            scale = abs(sums[-1])
            target = tolerance * scale if scale > 0 else tolerance
            if est <= target:
                return IntegrationResult(sums[-1], est, evaluations, j + 1, True)
    return IntegrationResult(sums[-1], est, evaluations, max_level + 1, False)
