"""Normalization constants of ellipsoidal harmonics.

``gamma = 8 (I1 I2 - I3 I4)`` where

    I1 = int_0^h E(nu)^2 / (sqrt(h^2-nu^2) sqrt(k^2-nu^2)) dnu
    I3 = same with an extra nu^2
    I2 = int_h^k mu^2 E(mu)^2 / (sqrt(mu^2-h^2) sqrt(k^2-mu^2)) dmu
    I4 = same without the mu^2

The nu integrals are singular at ``nu = h``, the mu integrals at both ends.
Integrands are evaluated from the endpoint distances handed out by the
quadrature so ``h^2 - nu^2`` and friends never suffer cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lame import LameHarmonic, eval_E
from .quad import (IntegrationResult, QuadOptions, QuadratureError, Transform, build_rule,
                   integrate_fixed)

__all__ = [
    "NormResult",
    "integrand_nu",
    "integrand_mu",
    "gamma",
    "gamma_fixed",
    "gamma_oracle_2d",
]


@dataclass(frozen=True)
class NormResult:
    gamma: float
    parts: tuple[float, float, float, float]
    evaluations: int
    scheme: Transform
    converged: bool = True

    @classmethod
    def from_parts(cls, parts, evaluations, scheme, converged=True):
        i1, i2, i3, i4 = parts
        return cls(8.0 * (i1 * i2 - i3 * i4), tuple(parts), evaluations, scheme, converged)


def integrand_nu(harm: LameHarmonic, kind: str = "plain") -> Callable:
    """Integrand of I1 (``kind="plain"``) or I3 (``"nu_squared"``) on (0, h)."""
    if kind not in ("plain", "nu_squared"):
        raise ValueError(f"kind must be 'plain' or 'nu_squared', got {kind!r}")
    h = harm.sys.h
    kh = harm.sys.ksq - harm.sys.hsq

    def f(nu, dlo, dhi):
        h2_nu2 = dhi * (h + nu)
        e = eval_E(harm, nu, dh=-h2_nu2, dk=-(h2_nu2 + kh))
        val = e * e / (np.sqrt(h2_nu2) * np.sqrt(h2_nu2 + kh))
        return val * nu * nu if kind == "nu_squared" else val

    return f


def integrand_mu(harm: LameHarmonic, kind: str = "plain") -> Callable:
    """Integrand of I4 (``kind="plain"``) or I2 (``"mu_squared"``) on (h, k)."""
    if kind not in ("plain", "mu_squared"):
        raise ValueError(f"kind must be 'plain' or 'mu_squared', got {kind!r}")
    h, k = harm.sys.h, harm.sys.k

    def f(mu, dlo, dhi):
        mu2_h2 = dlo * (mu + h)
        k2_mu2 = dhi * (k + mu)
        e = eval_E(harm, mu, dh=mu2_h2, dk=-k2_mu2)
        val = e * e / (np.sqrt(mu2_h2) * np.sqrt(k2_mu2))
        return val * mu * mu if kind == "mu_squared" else val

    return f


def _parts(harm: LameHarmonic):
    h, k = harm.sys.h, harm.sys.k
    return [
        ("I1", integrand_nu(harm, "plain"), 0.0, h),
        ("I2", integrand_mu(harm, "mu_squared"), h, k),
        ("I3", integrand_nu(harm, "nu_squared"), 0.0, h),
        ("I4", integrand_mu(harm, "plain"), h, k),
    ]


def gamma(harm: LameHarmonic, scheme: Transform | str = Transform.TANH_SINH,
          tol: float = 1e-14, max_level: int = 12, digits: int = 15,
          strict: bool = True) -> NormResult:
    """Adaptive evaluation of the four integrals and their combination.

    With ``strict=False`` a part that misses ``tol`` keeps its best value and
    the result is flagged ``converged=False`` instead of raising.
    """
    quad = QuadOptions(tol=tol, transform=scheme, digits=digits, max_level=max_level)
    values, evals, ok = [], 0, True
    for name, f, lo, hi in _parts(harm):
        res: IntegrationResult = quad.integrate(f, lo, hi, endpoint_distances=True)
        if not res.converged:
            if strict:
                raise QuadratureError(
                    f"{name} for n={harm.n}, p={harm.p} did not reach tol={tol:g} "
                    f"with {quad.transform.value} (estimate {res.error_estimate:.3g})")
            ok = False
        values.append(res.value)
        evals += res.evaluations
    return NormResult.from_parts(values, evals, quad.transform, ok)


def gamma_fixed(harm: LameHarmonic, scheme: Transform | str, level: int,
                digits: int = 15) -> NormResult:
    """Same decomposition with one fixed rule per integral (work-precision runs)."""
    rule = build_rule(scheme, level, digits)
    values, evals = [], 0
    for _, f, lo, hi in _parts(harm):
        res = integrate_fixed(f, rule, lo, hi, endpoint_distances=True)
        values.append(res.value)
        evals += res.evaluations
    return NormResult.from_parts(values, evals, rule.transform)


def gamma_oracle_2d(harm: LameHarmonic, level: int = 7, digits: int = 15,
                    max_points: int = 4_000_000) -> float:
    """Tensor-product tanh-sinh value of the full (mu, nu) surface integral.

    Integrates the undecomposed kernel ``(mu^2 - nu^2) E(mu)^2 E(nu)^2 / ...``
    over one of the eight symmetric sheets and multiplies by 8.
    """
    rule = build_rule(Transform.TANH_SINH, level, digits)
    if rule.size ** 2 > max_points:
        raise ValueError(f"2-D oracle needs {rule.size ** 2} points (> {max_points})")
    sys = harm.sys
    h, k = sys.h, sys.k
    kh = sys.ksq - sys.hsq
    half_nu = 0.5 * h
    half_mu = 0.5 * (k - h)

    x, dist = rule.x, rule.dist
    nu = half_nu * (1.0 + x)
    h2_nu2 = np.where(x > 0, half_nu * dist, half_nu * (1.0 - x)) * (h + nu)
    mu = h + half_mu * (1.0 + x)
    mu_lo = np.where(x < 0, half_mu * dist, half_mu * (1.0 + x))
    mu_hi = np.where(x > 0, half_mu * dist, half_mu * (1.0 - x))
    mu2_h2 = mu_lo * (mu + h)
    k2_mu2 = mu_hi * (k + mu)

    e_nu = eval_E(harm, nu, dh=-h2_nu2, dk=-(h2_nu2 + kh))
    e_mu = eval_E(harm, mu, dh=mu2_h2, dk=-k2_mu2)
    g_nu = e_nu ** 2 / (np.sqrt(h2_nu2) * np.sqrt(h2_nu2 + kh)) * rule.w * half_nu
    g_mu = e_mu ** 2 / (np.sqrt(mu2_h2) * np.sqrt(k2_mu2)) * rule.w * half_mu
    kernel = (mu[:, None] ** 2 - nu[None, :] ** 2) * g_mu[:, None] * g_nu[None, :]
    return 8.0 * math.fsum(kernel.ravel().tolist())
