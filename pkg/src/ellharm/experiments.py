"""Experiment runners behind the command-line subcommands.

Each runner returns a list of :class:`ExperimentRecord` rows. Work is
measured in integrand evaluations, which are exact and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ellipsoid import EllipsoidalSystem, cart_to_ellipsoidal, new_system
from .lame import solve_order
from .normconst import gamma, gamma_fixed
from .pcm import (DielectricModel, PointCharge, born_energy, brillouin_radius,
                  build_expansion, direct_coulomb, spherical_coulomb_expansion)
from .quad import QuadOptions, Transform

__all__ = [
    "ExperimentRecord",
    "gamma_rows",
    "quad_compare_rows",
    "ranking_violations",
    "convergence_slope",
    "born_limit_rows",
    "loglog_slope",
    "solvate_rows",
    "expand_compare_rows",
    "brillouin_test_points",
    "SCHEMES",
]

SCHEMES = (Transform.TANH_SINH, Transform.TANH, Transform.ERF)


@dataclass
class ExperimentRecord:
    """One CSV row; column order is the insertion order of ``values``."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def columns(self) -> list[str]:
        return list(self.values)


def gamma_rows(sys: EllipsoidalSystem, n: int, scheme: Transform | str = Transform.TANH_SINH,
               tol: float = 1e-14, digits: int = 15, max_level: int = 12) -> list[ExperimentRecord]:
    """Normalization constants of every harmonic of order ``n``."""
    scheme = Transform.parse(scheme)
    rows = []
    for harm in solve_order(sys, n):
        res = gamma(harm, scheme, tol, max_level, digits)
        rows.append(ExperimentRecord({"n": n, "p": harm.p, "gamma": res.gamma,
                                      "evaluations": res.evaluations}))
    return rows


def quad_compare_rows(sys: EllipsoidalSystem, n: int, p: int, levels: Iterable[int] = range(9),
                      digits: int = 15, reference_level: int = 12) -> list[ExperimentRecord]:
    """Work-precision table of one normalization constant.

    Every scheme is run at each fixed level; the error is measured against
    tanh-sinh at ``reference_level``.
    """
    harm = solve_order(sys, n)[p]
    ref = gamma_fixed(harm, Transform.TANH_SINH, reference_level, digits).gamma
    rows = []
    for scheme in SCHEMES:
        for level in levels:
            res = gamma_fixed(harm, scheme, level, digits)
            rows.append(ExperimentRecord({
                "scheme": scheme.value, "level": level, "evaluations": res.evaluations,
                "gamma": res.gamma, "abs_err": abs(res.gamma - ref), "reference": ref}))
    return rows


def _by_scheme(rows: Sequence[ExperimentRecord]) -> dict[str, list[tuple[int, float]]]:
    out: dict[str, list[tuple[int, float]]] = {}
    for r in rows:
        out.setdefault(r["scheme"], []).append((r["evaluations"], r["abs_err"]))
    return out


def ranking_violations(rows: Sequence[ExperimentRecord], min_budget: int = 50,
                       floor: float | None = None) -> list[int]:
    """Budgets at which tanh-sinh is beaten by another scheme.

    At budget ``B`` each scheme is credited with the smallest error it
    reached using at most ``B`` evaluations. Budgets are compared from the
    point where every scheme has at least one result. Errors below
    ``floor`` (default ``10 eps |reference|``) count as equal.
    """
    data = _by_scheme(rows)
    if floor is None:
        floor = 10.0 * np.finfo(float).eps * abs(rows[0]["reference"])
    start = max(min_budget, max(min(e for e, _ in pts) for pts in data.values()))
    budgets = sorted({e for pts in data.values() for e, _ in pts if e >= start})

    def best(scheme, budget):
        return max(floor, min(err for e, err in data[scheme] if e <= budget))

    ts = Transform.TANH_SINH.value
    return [b for b in budgets
            if any(best(ts, b) > best(s, b) for s in data if s != ts)]


def convergence_slope(rows: Sequence[ExperimentRecord], scheme: Transform | str,
                      floor: float | None = None) -> float:
    """Least-squares slope of ``log10(err)`` against evaluations, above ``floor``."""
    name = Transform.parse(scheme).value
    if floor is None:
        floor = 10.0 * np.finfo(float).eps * abs(rows[0]["reference"])
    pts = [(e, math.log10(err)) for e, err in _by_scheme(rows)[name] if err > floor]
    if len(pts) < 2:
        raise ValueError(f"fewer than two points above the noise floor for {name}")
    e, lg = np.array(pts).T
    return float(np.polyfit(e, lg, 1)[0])


def near_sphere_system(delta: float) -> EllipsoidalSystem:
    return new_system(1.0 + delta, 1.0 + delta / 5.0, 1.0 + delta / 10.0)


def born_limit_rows(deltas: Iterable[float], eps_in: float = 1.0, eps_out: float = 80.0,
                    order: int = 20, quad: QuadOptions = QuadOptions()) -> list[ExperimentRecord]:
    """Unit charge at the centre of near-spherical cavities versus the Born ion of radius 1."""
    born = born_energy(1.0, 1.0, eps_in, eps_out)
    rows = []
    for delta in deltas:
        model = DielectricModel(near_sphere_system(delta), eps_in, eps_out,
                                (PointCharge((0.0, 0.0, 0.0), 1.0),))
        dg = build_expansion(model, order, quad).solvation_energy()
        rows.append(ExperimentRecord({"delta": delta, "dg": dg, "born": born,
                                      "abs_err": abs(dg - born)}))
    return rows


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log10(x), np.log10(y), 1)[0])


def solvate_rows(model: DielectricModel, orders: Sequence[int],
                 quad: QuadOptions = QuadOptions()) -> list[ExperimentRecord]:
    """Truncated solvation energies; ``err`` is measured against the highest order."""
    top = max(orders)
    exp = build_expansion(model, top, quad)
    partial = exp.solvation_orders()
    dgs = {n: math.fsum(partial[:n + 1]) for n in orders}
    ref = dgs[top]
    return [ExperimentRecord({"order": n, "dg": dgs[n], "evaluations": exp.evaluations_to(n),
                              "err_vs_top": abs(dgs[n] - ref)})
            for n in sorted(orders)]


def expand_compare_rows(model: DielectricModel, point, orders: Sequence[int],
                        quad: QuadOptions = QuadOptions()) -> list[ExperimentRecord]:
    """Relative errors of the ellipsoidal and spherical Coulomb expansions at ``point``.

    Both expansions describe the field in a medium of permittivity
    ``eps_in``; the spherical one is centred at the origin.
    """
    top = max(orders)
    x, y, z = (float(v) for v in point)
    ep = cart_to_ellipsoidal(model.sys, x, y, z)
    if abs(ep.lam) < model.sys.a:
        raise ValueError(f"point {point} lies inside the cavity")
    exact = direct_coulomb(model.charges, (x, y, z), model.eps_in)
    ell = build_expansion(model, top, quad).coulomb_orders(ep, top, quad)
    rows = []
    for n in sorted(orders):
        sph = spherical_coulomb_expansion(model.charges, order_max=n)((x, y, z)) / model.eps_in
        rows.append(ExperimentRecord({
            "order": n, "direct": exact,
            "ell_err": abs(math.fsum(ell[:n + 1]) - exact) / abs(exact),
            "sph_err": abs(sph - exact) / abs(exact)}))
    return rows


def brillouin_test_points(model: DielectricModel) -> tuple[tuple, tuple]:
    """Two test points on the +z axis.

    The first sits halfway between the cavity surface and the Brillouin
    sphere, the second at four Brillouin radii. Raises if the Brillouin
    sphere does not reach outside the cavity along z.
    """
    rb = brillouin_radius(model.charges)
    c = model.sys.c
    if rb <= c:
        raise ValueError(f"Brillouin radius {rb} does not exceed c={c}")
    return (0.0, 0.0, 0.5 * (c + rb)), (0.0, 0.0, 4.0 * rb)
