"""Ellipsoidal harmonics, their normalization constants and the ellipsoidal
dielectric cavity problem, with double-exponential quadrature underneath."""

from .ellipsoid import (EllipsoidalPoint, EllipsoidalSystem, cart_to_ellipsoidal,
                        ellipsoidal_to_cart, new_system)
from .lame import (HarmonicTable, LameClass, LameHarmonic, eval_E, eval_E_deriv, eval_F,
                   eval_F_deriv, eval_I, eval_solid_exterior, eval_solid_interior, solve_order)
from .normconst import NormResult, gamma, gamma_fixed, gamma_oracle_2d
from .pcm import (DielectricModel, ExpansionSet, PointCharge, born_energy, build_expansion,
                  seeded_charges, solvation_energy)
from .quad import (IntegrationResult, QuadOptions, QuadratureError, QuadratureRule, Transform,
                   build_rule, integrate_adaptive, integrate_fixed)

__version__ = "0.1.0"
