"""Ellipsoidal cavity in a dielectric continuum, solved by harmonic expansion.

Inside the cavity the potential is the Coulomb field of the point charges
plus a reaction field ``sum B E(r)``; outside it is ``sum C F(r)``. The
Coulomb field is expanded through

    1/|r - r'| = sum_n sum_p 4 pi / ((2n+1) gamma_n^p) E_n^p(r') F_n^p(r)

valid for ``lambda(r) > lambda(r')``. Units are Gaussian: a charge ``q``
in permittivity ``eps`` produces ``q / (eps |r|)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_legendre

from .ellipsoid import EllipsoidalPoint, EllipsoidalSystem, cart_to_ellipsoidal
from .lame import (HarmonicTable, LameHarmonic, eval_E, eval_E_deriv, eval_F,
                   eval_solid_interior, solve_order, _dI, _point_factors)
from .normconst import gamma as norm_gamma
from .quad import QuadOptions

__all__ = [
    "PointCharge",
    "DielectricModel",
    "HarmonicData",
    "ExpansionSet",
    "build_expansion",
    "coulomb_coeffs",
    "reaction_coeffs",
    "exterior_coeffs",
    "solvation_energy",
    "born_energy",
    "spherical_coulomb_expansion",
    "direct_coulomb",
    "seeded_charges",
    "brillouin_radius",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 0
DEFAULT_QUAD = QuadOptions(tol=1e-14)


@dataclass(frozen=True)
class PointCharge:
    position: tuple[float, float, float]
    q: float


@dataclass(frozen=True)
class DielectricModel:
    sys: EllipsoidalSystem
    eps_in: float
    eps_out: float
    charges: tuple[PointCharge, ...]

    def __post_init__(self):
        if not (self.eps_in > 0 and self.eps_out > 0):
            raise ValueError("permittivities must be positive")
        object.__setattr__(self, "charges", tuple(self.charges))
        for ch in self.charges:
            if not self.sys.contains(*ch.position):
                raise ValueError(f"charge at {ch.position} is not strictly inside the cavity")

    @functools.cached_property
    def charge_points(self) -> tuple[EllipsoidalPoint, ...]:
        return tuple(cart_to_ellipsoidal(self.sys, *ch.position) for ch in self.charges)

    def with_eps(self, eps_in: float, eps_out: float) -> "DielectricModel":
        return DielectricModel(self.sys, eps_in, eps_out, self.charges)


@dataclass(frozen=True)
class HarmonicData:
    """Boundary quantities of one harmonic at ``lambda = a``."""

    harm: LameHarmonic
    gamma: float
    E: float
    dE: float
    F: float
    dF: float
    evaluations: int

    @property
    def log_dE(self) -> float:
        return self.dE / self.E

    @property
    def log_dF(self) -> float:
        return self.dF / self.F


@functools.lru_cache(maxsize=4096)
def _harmonic_data(harm: LameHarmonic, quad: QuadOptions) -> HarmonicData:
    a = harm.sys.a
    g = norm_gamma(harm, quad.transform, quad.tol, quad.max_level, quad.digits)
    e = float(eval_E(harm, a))
    de = float(eval_E_deriv(harm, a))
    from .lame import _eval_I_result
    ires = _eval_I_result(harm, a, quad)
    two = 2 * harm.n + 1
    f = two * e * ires.value
    df = two * (de * ires.value + e * _dI(harm, a))
    return HarmonicData(harm, g.gamma, e, de, f, df, g.evaluations + ires.evaluations)


@dataclass
class ExpansionSet:
    """Per-order coefficient arrays; index ``[n][p]``."""

    model: DielectricModel
    order_max: int
    data: list[list[HarmonicData]]
    G: list[np.ndarray]
    B: list[np.ndarray]
    C: list[np.ndarray]
    evaluations: int = 0

    @property
    def gamma(self) -> list[np.ndarray]:
        return [np.array([d.gamma for d in row]) for row in self.data]

    def _orders(self, order):
        order = self.order_max if order is None else order
        if order > self.order_max:
            raise ValueError(f"expansion only built to order {self.order_max}")
        return range(order + 1)

    def reaction_orders(self, point: EllipsoidalPoint, order: int | None = None) -> list[float]:
        """Per-order contributions ``sum_p B E(r)`` to the reaction potential."""
        return [math.fsum(b * eval_solid_interior(d.harm, point)
                          for d, b in zip(self.data[n], self.B[n]))
                for n in self._orders(order)]

    def reaction_potential(self, point: EllipsoidalPoint, order: int | None = None) -> float:
        return math.fsum(self.reaction_orders(point, order))

    def _exterior_orders(self, coeffs, point, order, quad) -> list[float]:
        lam = abs(point.lam)
        if lam < self.model.sys.a * (1 - 1e-12):
            raise ValueError(f"exterior expansion needs lambda >= a, got {lam}")
        out = []
        for n in self._orders(order):
            terms = []
            for d, c in zip(self.data[n], coeffs[n]):
                fl = d.F if lam == self.model.sys.a else eval_F(d.harm, lam, quad)
                terms.append(c * fl * _point_factors(d.harm, point))
            out.append(math.fsum(terms))
        return out

    def _exterior_sum(self, coeffs, point, order, quad):
        return math.fsum(self._exterior_orders(coeffs, point, order, quad))

    def coulomb_orders(self, point: EllipsoidalPoint, order: int | None = None,
                       quad: QuadOptions = DEFAULT_QUAD) -> list[float]:
        """Per-order contributions to :meth:`coulomb_potential`."""
        eps = self.model.eps_in
        return self._exterior_orders([g / eps for g in self.G], point, order, quad)

    def coulomb_potential(self, point: EllipsoidalPoint, order: int | None = None,
                          quad: QuadOptions = DEFAULT_QUAD) -> float:
        """``sum (G/eps_in) F(r)``; valid for ``lambda(r) >= a``."""
        eps = self.model.eps_in
        return self._exterior_sum([g / eps for g in self.G], point, order, quad)

    def exterior_potential(self, point: EllipsoidalPoint, order: int | None = None,
                           quad: QuadOptions = DEFAULT_QUAD) -> float:
        return self._exterior_sum(self.C, point, order, quad)

    def interior_potential_on_surface(self, point: EllipsoidalPoint, order: int | None = None) -> float:
        """Coulomb plus reaction potential at a point with ``lambda = a``."""
        return self.coulomb_potential(point, order) + self.reaction_potential(point, order)

    def surface_flux(self, point: EllipsoidalPoint, order: int | None = None) -> tuple[float, float]:
        """``(eps_in dPhi1/dlambda, eps_out dPhi2/dlambda)`` at ``lambda = a``."""
        inner, outer = [], []
        for n in self._orders(order):
            for d, g, b, c in zip(self.data[n], self.G[n], self.B[n], self.C[n]):
                ang = _point_factors(d.harm, point)
                inner.append((g / self.model.eps_in * d.dF + b * d.dE) * ang)
                outer.append(c * d.dF * ang)
        return self.model.eps_in * math.fsum(inner), self.model.eps_out * math.fsum(outer)

    def solvation_orders(self, order: int | None = None) -> list[float]:
        """Per-order contributions to :meth:`solvation_energy`."""
        per_charge = [self.reaction_orders(pt, order) for pt in self.model.charge_points]
        return [0.5 * math.fsum(ch.q * rows[n] for ch, rows in zip(self.model.charges, per_charge))
                for n in self._orders(order)]

    def solvation_energy(self, order: int | None = None) -> float:
        """``1/2 sum_k q_k psi_reac(r_k)``, truncated at ``order``."""
        return math.fsum(self.solvation_orders(order))

    def evaluations_to(self, order: int) -> int:
        return sum(d.evaluations for n in self._orders(order) for d in self.data[n])


def build_expansion(model: DielectricModel, order_max: int,
                    quad: QuadOptions = DEFAULT_QUAD,
                    tables: Sequence[HarmonicTable] | None = None) -> ExpansionSet:
    """Compute G, B and C for all harmonics up to ``order_max``.

    ``tables`` overrides the harmonics (e.g. rescaled eigenvectors); by
    default they come from :func:`solve_order`.
    """
    if order_max < 0:
        raise ValueError("order_max must be >= 0")
    sys = model.sys
    tables = list(tables) if tables is not None else [solve_order(sys, n) for n in range(order_max + 1)]
    e1, e2 = model.eps_in, model.eps_out
    data, G, B, C = [], [], [], []
    for n in range(order_max + 1):
        row = [_harmonic_data(h, quad) for h in tables[n]]
        g = np.array([
            math.fsum(ch.q * eval_solid_interior(d.harm, pt)
                      for ch, pt in zip(model.charges, model.charge_points))
            * 4.0 * math.pi / ((2 * n + 1) * d.gamma)
            for d in row
        ])
        b = np.empty_like(g)
        for i, d in enumerate(row):
            if d.E == 0.0 or d.log_dF == 0.0:
                raise ArithmeticError(f"degenerate boundary values for n={n}, p={d.harm.p}")
            denom = 1.0 - (e1 / e2) * d.log_dE / d.log_dF
            b[i] = (e1 - e2) / (e1 * e2) * (d.F / d.E) / denom * g[i]
        c = g / e1 + b * np.array([d.E / d.F for d in row])
        data.append(row)
        G.append(g)
        B.append(b)
        C.append(c)
    evals = sum(d.evaluations for row in data for d in row)
    return ExpansionSet(model, order_max, data, G, B, C, evals)


def coulomb_coeffs(model: DielectricModel, order_max: int,
                   quad: QuadOptions = DEFAULT_QUAD) -> list[np.ndarray]:
    return build_expansion(model, order_max, quad).G


def reaction_coeffs(model: DielectricModel, order_max: int,
                    quad: QuadOptions = DEFAULT_QUAD) -> list[np.ndarray]:
    return build_expansion(model, order_max, quad).B


def exterior_coeffs(model: DielectricModel, order_max: int,
                    quad: QuadOptions = DEFAULT_QUAD) -> list[np.ndarray]:
    return build_expansion(model, order_max, quad).C


def solvation_energy(model: DielectricModel, order_max: int,
                     quad: QuadOptions = DEFAULT_QUAD) -> float:
    return build_expansion(model, order_max, quad).solvation_energy()


def born_energy(q: float, radius: float, eps_in: float, eps_out: float) -> float:
    """Solvation energy of a charge at the centre of a spherical cavity."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return q * q / (2.0 * radius) * (1.0 / eps_out - 1.0 / eps_in)


def direct_coulomb(charges: Sequence[PointCharge], r, eps: float = 1.0) -> float:
    r = np.asarray(r, dtype=float)
    return math.fsum(ch.q / (eps * np.linalg.norm(r - np.asarray(ch.position))) for ch in charges)


def spherical_coulomb_expansion(charges: Sequence[PointCharge], center=(0.0, 0.0, 0.0),
                                order_max: int = 10) -> Callable:
    """Truncated spherical multipole expansion of ``sum q/|r - r_k|``.

    Uses the addition theorem in Legendre form, which equals the real solid
    harmonic expansion truncated at the same order.
    """
    c = np.asarray(center, dtype=float)
    rel = [(ch.q, np.asarray(ch.position, dtype=float) - c) for ch in charges]
    ns = np.arange(order_max + 1)

    def potential(r) -> float:
        v = np.asarray(r, dtype=float) - c
        rv = np.linalg.norm(v)
        terms = []
        for q, s in rel:
            rs = np.linalg.norm(s)
            if rs == 0.0:
                terms.append(q / rv)
                continue
            cos = float(np.clip(np.dot(s, v) / (rs * rv), -1.0, 1.0))
            terms.extend(q * (rs / rv) ** ns / rv * eval_legendre(ns, cos))
        return math.fsum(terms)

    return potential


def brillouin_radius(charges: Sequence[PointCharge], center=(0.0, 0.0, 0.0)) -> float:
    c = np.asarray(center, dtype=float)
    return max(float(np.linalg.norm(np.asarray(ch.position) - c)) for ch in charges)


def seeded_charges(sys: EllipsoidalSystem, count: int = 5, seed: int = DEFAULT_SEED,
                   shrink: float = 0.8) -> tuple[PointCharge, ...]:
    """Uniform positions inside the cavity scaled by ``shrink``; charges +1, -1, +1, ..."""
    rng = np.random.default_rng(seed)
    axes = shrink * np.array([sys.a, sys.b, sys.c])
    out = []
    while len(out) < count:
        u = rng.uniform(-1.0, 1.0, 3)
        if u @ u < 1.0:
            out.append(PointCharge(tuple(float(v) for v in u * axes), 1.0 if len(out) % 2 == 0 else -1.0))
    return tuple(out)
