import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellharm.ellipsoid import EllipsoidalPoint, cart_to_ellipsoidal, new_system
from ellharm.lame import HarmonicTable, eval_I, solve_order
from ellharm.pcm import (DielectricModel, PointCharge, born_energy, brillouin_radius,
                         build_expansion, direct_coulomb, seeded_charges,
                         spherical_coulomb_expansion)

SURFACE = [(2.3, 0.5), (2.6, -1.9), (-2.4, 1.1), (2.75, 2.0), (-2.25, -0.1)]


@pytest.fixture(scope="module")
def model(sys321):
    charges = (PointCharge((0.8, 0.4, 0.2), 1.0), PointCharge((-1.1, -0.3, 0.35), -0.6),
               PointCharge((0.2, 0.9, -0.4), 0.3))
    return DielectricModel(sys321, 2.0, 80.0, charges)


@pytest.fixture(scope="module")
def expansion15(model):
    return build_expansion(model, 15)


def test_born_energy():
    assert born_energy(1.0, 1.0, 1.0, 80.0) == pytest.approx(-0.49375, rel=1e-15)
    assert born_energy(2.0, 2.0, 4.0, 4.0) == 0.0
    with pytest.raises(ValueError):
        born_energy(1.0, 0.0, 1.0, 80.0)


def test_model_validation(sys321):
    with pytest.raises(ValueError, match="inside"):
        DielectricModel(sys321, 1.0, 80.0, (PointCharge((3.0, 0.0, 0.0), 1.0),))
    with pytest.raises(ValueError):
        DielectricModel(sys321, 0.0, 80.0, ())


def test_equal_permittivities_give_no_reaction(model):
    exp = build_expansion(model.with_eps(4.0, 4.0), 6)
    assert exp.solvation_energy() == 0.0
    assert all(np.all(b == 0.0) for b in exp.B)


def test_surface_continuity(expansion15, sys321):
    for mu, nu in SURFACE:
        p = EllipsoidalPoint.from_coords(sys321, 3.0, mu, nu)
        inner = expansion15.interior_potential_on_surface(p)
        outer = expansion15.exterior_potential(p)
        assert abs(inner - outer) <= 1e-6 * abs(outer)


def test_flux_jump(expansion15, sys321):
    for mu, nu in SURFACE:
        p = EllipsoidalPoint.from_coords(sys321, 3.0, mu, nu)
        inner, outer = expansion15.surface_flux(p)
        assert abs(inner - outer) <= 1e-6 * abs(outer)


def test_green_identity(sys321):
    """Coulomb expansion of one charge against 1/|r - r'| at N = 15."""
    src = PointCharge((0.6, -0.5, 0.3), 1.0)
    exp = build_expansion(DielectricModel(sys321, 1.0, 80.0, (src,)), 15)
    for pt in [(4.0, 3.0, 2.0), (-5.0, 1.0, 3.0), (0.5, -4.5, -2.5)]:
        p = cart_to_ellipsoidal(sys321, *pt)
        exact = 1.0 / np.linalg.norm(np.subtract(pt, src.position))
        assert abs(exp.coulomb_potential(p) - exact) <= 1e-8 * exact


def test_monopole_term(model, expansion15, sys321):
    """Order 0 of the Coulomb expansion is Q I_0(lambda) / eps_in."""
    p = cart_to_ellipsoidal(sys321, 4.0, 3.0, 2.0)
    q = sum(c.q for c in model.charges)
    (h0,) = solve_order(sys321, 0)
    expected = q * eval_I(h0, abs(p.lam)) / model.eps_in
    assert expansion15.coulomb_orders(p, 0)[0] == pytest.approx(expected, rel=1e-13)


def test_far_field(model, expansion15, sys321):
    q = sum(c.q for c in model.charges)
    r = 1e5  # dipole corrections fall off like 1/r
    p = cart_to_ellipsoidal(sys321, r * 0.6, r * 0.48, r * 0.64)
    assert expansion15.exterior_potential(p) == pytest.approx(q / (model.eps_out * r), rel=1e-4)


def test_scale_invariance(model):
    """Rescaling every eigenvector leaves the energy unchanged."""
    sys = model.sys
    factors = [0.37, 5.0, 1e3]
    tables = [HarmonicTable(sys, n, tuple(h.scaled(factors[(n + h.p) % 3])
                                          for h in solve_order(sys, n)))
              for n in range(9)]
    ref = build_expansion(model, 8).solvation_energy()
    scaled = build_expansion(model, 8, tables=tables).solvation_energy()
    assert abs(scaled - ref) <= 1e-12 * abs(ref)


def test_superposition(model, sys321):
    parts = [DielectricModel(sys321, model.eps_in, model.eps_out, (c,)) for c in model.charges]
    full = build_expansion(model, 8)
    pieces = [build_expansion(m, 8) for m in parts]
    for pt in [(0.1, 0.2, 0.3), (-1.5, 0.5, -0.2)]:
        p = cart_to_ellipsoidal(sys321, *pt)
        total = math.fsum(e.reaction_potential(p) for e in pieces)
        assert full.reaction_potential(p) == pytest.approx(total, rel=1e-12)


def test_solvation_orders_sum(expansion15):
    assert math.fsum(expansion15.solvation_orders()) == pytest.approx(
        expansion15.solvation_energy(), rel=1e-14)
    assert expansion15.evaluations == expansion15.evaluations_to(15)
    with pytest.raises(ValueError):
        expansion15.solvation_energy(16)


def test_near_sphere_born():
    sys = new_system(1.001, 1.0002, 1.0001)
    model = DielectricModel(sys, 1.0, 80.0, (PointCharge((0.0, 0.0, 0.0), 1.0),))
    dg = build_expansion(model, 8).solvation_energy()
    born = born_energy(1.0, 1.0, 1.0, 80.0)
    assert abs(dg - born) <= 1e-3 * abs(born)


def test_spherical_expansion(model):
    far = (6.0, -5.0, 4.0)
    exact = direct_coulomb(model.charges, far)
    assert spherical_coulomb_expansion(model.charges, order_max=30)(far) == pytest.approx(
        exact, rel=1e-12)
    q = sum(c.q for c in model.charges)
    mono = spherical_coulomb_expansion(model.charges, order_max=0)(far)
    assert mono == pytest.approx(q / np.linalg.norm(far), rel=1e-15)


def test_seeded_charges(sys321):
    a = seeded_charges(sys321, 7, seed=11)
    assert a == seeded_charges(sys321, 7, seed=11)
    assert a != seeded_charges(sys321, 7, seed=12)
    assert [c.q for c in a] == [1, -1, 1, -1, 1, -1, 1]
    assert all(sys321.contains(*(np.array(c.position) / 0.8)) for c in a)
    assert brillouin_radius(a) == max(np.linalg.norm(c.position) for c in a)


@settings(max_examples=15, deadline=None)
@given(st.floats(1.0, 10.0), st.floats(1.0, 100.0))
def test_energy_sign(eps_in, ratio):
    """A more polarizable exterior always lowers the energy."""
    sys = new_system(3.0, 2.0, 1.0)
    model = DielectricModel(sys, eps_in, eps_in * ratio,
                            (PointCharge((0.5, 0.3, 0.1), 1.0), PointCharge((-0.4, 0.2, 0.3), -0.5)))
    dg = build_expansion(model, 4).solvation_energy()
    if ratio == 1.0:
        assert dg == 0.0
    else:
        assert dg < 0.0
