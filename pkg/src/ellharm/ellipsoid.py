"""Ellipsoidal coordinates relative to a reference ellipsoid a > b > c > 0.

A Cartesian point maps to the three roots ``(lambda^2, mu^2, nu^2)`` of

    x^2/t + y^2/(t - h^2) + z^2/(t - k^2) = 1,    h^2 = a^2-b^2, k^2 = a^2-c^2

lying in ``(k^2, inf)``, ``(h^2, k^2)`` and ``(0, h^2)``. Signs follow
``sgn lambda = sx*sy*sz``, ``sgn mu = sx*sy``, ``sgn nu = sx*sz``.

Besides the coordinates themselves, :class:`EllipsoidalPoint` carries the
four bracket gaps ``lambda^2-k^2``, ``mu^2-h^2``, ``k^2-mu^2`` and
``h^2-nu^2``. Near coordinate planes these are tiny and cannot be recovered
by subtraction, so they are computed from Vieta products of the cubic
shifted to the relevant focal value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipsoidalSystem",
    "EllipsoidalPoint",
    "new_system",
    "cart_to_ellipsoidal",
    "ellipsoidal_to_cart",
    "signs_to_ellipsoidal",
    "signs_to_cartesian",
    "PLANE_TOL",
]

PLANE_TOL = 1e-12


@dataclass(frozen=True)
class EllipsoidalSystem:
    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if not all(math.isfinite(v) for v in (a, b, c)):
            raise ValueError(f"semi-axes must be finite, got ({a}, {b}, {c})")
        if c <= 0:
            raise ValueError(f"semi-axis c must be positive, got c={c}")
        if a <= b or b <= c:
            kind = "sphere" if a == b == c else "spheroid" if (a == b or b == c) else "ordering"
            raise ValueError(
                f"need a > b > c > 0, got ({a}, {b}, {c}); "
                f"{kind} {'is' if kind != 'ordering' else 'violation is'} not supported")

    @property
    def hsq(self) -> float:
        return self.a * self.a - self.b * self.b

    @property
    def ksq(self) -> float:
        return self.a * self.a - self.c * self.c

    @property
    def h(self) -> float:
        return math.sqrt(self.hsq)

    @property
    def k(self) -> float:
        return math.sqrt(self.ksq)

    def contains(self, x, y, z) -> bool:
        return (x / self.a) ** 2 + (y / self.b) ** 2 + (z / self.c) ** 2 < 1.0


def new_system(a: float, b: float, c: float) -> EllipsoidalSystem:
    return EllipsoidalSystem(float(a), float(b), float(c))


@dataclass(frozen=True)
class EllipsoidalPoint:
    """Signed ellipsoidal coordinates plus their bracket gaps."""

    lam: float
    mu: float
    nu: float
    lam2_k2: float
    mu2_h2: float
    k2_mu2: float
    h2_nu2: float

    @classmethod
    def from_coords(cls, sys: EllipsoidalSystem, lam: float, mu: float, nu: float) -> "EllipsoidalPoint":
        """Build a point from signed coordinates, validating the brackets."""
        l2, m2, n2 = lam * lam, mu * mu, nu * nu
        h2, k2 = sys.hsq, sys.ksq
        if not (l2 >= k2 and h2 <= m2 <= k2 and 0.0 <= n2 <= h2):
            raise ValueError(
                f"coordinates out of bracket: lambda^2={l2} (need >= {k2}), "
                f"mu^2={m2} (need in [{h2}, {k2}]), nu^2={n2} (need in [0, {h2}])")
        return cls(float(lam), float(mu), float(nu), l2 - k2, m2 - h2, k2 - m2, h2 - n2)

    @property
    def coords(self) -> tuple[float, float, float]:
        return self.lam, self.mu, self.nu

    @property
    def signs(self) -> tuple[int, int, int]:
        # nu = 0 on the x = 0 plane still carries its sign as -0.0
        return tuple(1 if math.copysign(1.0, v) > 0 else -1 for v in self.coords)


def _sgn(v: float) -> int:
    return 1 if v >= 0 else -1


def signs_to_ellipsoidal(sx: int, sy: int, sz: int) -> tuple[int, int, int]:
    return sx * sy * sz, sx * sy, sx * sz


def signs_to_cartesian(sl: int, sm: int, sn: int) -> tuple[int, int, int]:
    # exact inverse of signs_to_ellipsoidal
    return sl * sm * sn, sl * sn, sl * sm


def _cubic_roots(h2: float, k2: float, x2: float, y2: float, z2: float) -> np.ndarray:
    """Roots of the cleared confocal cubic, descending, Newton-polished."""
    a2 = -(h2 + k2 + x2 + y2 + z2)
    a1 = h2 * k2 + x2 * (h2 + k2) + y2 * k2 + z2 * h2
    a0 = -x2 * h2 * k2

    def poly(t):
        return ((t + a2) * t + a1) * t + a0

    def dpoly(t):
        return (3.0 * t + 2.0 * a2) * t + a1

    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    shift = -a2 / 3.0
    if p < 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        roots = [shift + m * math.cos(theta - 2.0 * math.pi * i / 3.0) for i in range(3)]
    else:
        roots = [shift] * 3
    roots.sort(reverse=True)

    brackets = [(k2, -a2), (h2, k2), (0.0, h2)]
    polished = []
    for r, (lo, hi) in zip(roots, brackets):
        r = min(max(r, lo), hi)
        for _ in range(4):
            d = dpoly(r)
            if d == 0.0:
                break
            step = poly(r) / d
            nr = r - step
            if not lo <= nr <= hi:
                break
            r = nr
            if abs(step) <= 1e-17 * max(abs(r), k2):
                break
        polished.append(r)
    return np.array(polished)


def _gap(roots: np.ndarray, anchor: float, product: float) -> np.ndarray:
    """``roots - anchor`` with the smallest entry recovered from ``prod(roots - anchor)``."""
    d = roots - anchor
    i = int(np.argmin(np.abs(d)))
    others = np.prod(np.delete(d, i))
    if others != 0.0:
        d[i] = product / others
    return d


def cart_to_ellipsoidal(sys: EllipsoidalSystem, x: float, y: float, z: float) -> EllipsoidalPoint:
    """Cartesian to signed ellipsoidal coordinates.

    Coordinates smaller than ``PLANE_TOL * a`` are treated as exactly zero;
    the matching ellipsoidal coordinate then lands on its bracket endpoint
    and takes a positive sign.
    """
    tol = PLANE_TOL * sys.a
    x, y, z = (0.0 if abs(v) < tol else float(v) for v in (x, y, z))
    h2, k2 = sys.hsq, sys.ksq
    x2, y2, z2 = x * x, y * y, z * z
    if x2 + y2 + z2 == 0.0:
        return EllipsoidalPoint(sys.k, sys.h, 0.0, 0.0, 0.0, k2 - h2, h2)
    roots = _cubic_roots(h2, k2, x2, y2, z2)
    l2, m2, n2 = roots

    if not (l2 >= k2 and h2 <= m2 <= k2 and 0.0 <= n2 <= h2):
        raise ArithmeticError(f"root outside its bracket: {roots} for h^2={h2}, k^2={k2}")

    # prod(r - h^2) = -y^2 h^2 (k^2 - h^2), prod(r - k^2) = z^2 k^2 (k^2 - h^2)
    if l2 * m2 > 0:
        n2 = x2 * h2 * k2 / (l2 * m2)
    dh = _gap(roots, h2, -y2 * h2 * (k2 - h2))
    dk = _gap(roots, k2, z2 * k2 * (k2 - h2))
    lam2_k2 = max(dk[0], 0.0)
    k2_mu2 = max(-dk[1], 0.0)
    mu2_h2 = max(dh[1], 0.0)
    h2_nu2 = max(-dh[2], 0.0)

    sl, sm, sn = signs_to_ellipsoidal(_sgn(x), _sgn(y), _sgn(z))
    return EllipsoidalPoint(math.copysign(math.sqrt(l2), sl), math.copysign(math.sqrt(m2), sm),
                            math.copysign(math.sqrt(n2), sn),
                            float(lam2_k2), float(mu2_h2), float(k2_mu2), float(h2_nu2))


def ellipsoidal_to_cart(sys: EllipsoidalSystem, p: EllipsoidalPoint) -> tuple[float, float, float]:
    h2, k2 = sys.hsq, sys.ksq
    l2, m2, n2 = p.lam ** 2, p.mu ** 2, p.nu ** 2
    if min(p.lam2_k2, p.mu2_h2, p.k2_mu2, p.h2_nu2, n2) < 0:
        raise ValueError(f"point violates coordinate brackets: {p}")
    kh = k2 - h2
    ax = math.sqrt(l2 * m2 * n2 / (h2 * k2))
    ay = math.sqrt((l2 - h2) * p.mu2_h2 * p.h2_nu2 / (h2 * kh))
    az = math.sqrt(p.lam2_k2 * p.k2_mu2 * (k2 - n2) / (k2 * kh))
    sx, sy, sz = signs_to_cartesian(*p.signs)
    return sx * ax, sy * ay, sz * az
