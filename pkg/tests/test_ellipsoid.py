import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from ellharm.ellipsoid import (EllipsoidalPoint, cart_to_ellipsoidal, ellipsoidal_to_cart,
                               new_system, signs_to_cartesian, signs_to_ellipsoidal)


def bisection_roots(sys, x, y, z):
    """Roots of the confocal equation by bracketing, one per interval."""
    h2, k2 = sys.hsq, sys.ksq

    def g(t):
        return x * x / t + y * y / (t - h2) + z * z / (t - k2) - 1.0

    tiny = 1e-13
    big = k2 + x * x + y * y + z * z + 1.0
    return (brentq(g, k2 * (1 + tiny), big, xtol=1e-15, rtol=1e-15),
            brentq(g, h2 * (1 + tiny), k2 * (1 - tiny), xtol=1e-15, rtol=1e-15),
            brentq(g, h2 * tiny, h2 * (1 - tiny), xtol=1e-15, rtol=1e-15))


@pytest.mark.parametrize("abc", [(3, 3, 1), (3, 1, 1), (2, 2, 2), (1, 2, 3), (3, 2, 0),
                                 (3, 2, -1), (math.nan, 2, 1), (math.inf, 2, 1)])
def test_invalid_systems(abc):
    with pytest.raises(ValueError):
        new_system(*abc)


def test_focal_parameters(sys321):
    assert sys321.hsq == 5.0 and sys321.ksq == 8.0
    assert sys321.contains(0, 0, 0) and not sys321.contains(3, 0, 0)


@pytest.mark.parametrize("point", [(1.0, 0.7, 0.3), (-2.0, 1.5, -0.4), (5.0, -4.0, 3.0),
                                   (0.1, 0.2, 0.3), (0.01, 3.0, 0.02)])
def test_roots_match_bisection(sys321, point):
    p = cart_to_ellipsoidal(sys321, *point)
    ref = bisection_roots(sys321, *point)
    np.testing.assert_allclose([p.lam ** 2, p.mu ** 2, p.nu ** 2], ref, rtol=1e-12)


def test_gaps_match_subtraction(sys321):
    p = cart_to_ellipsoidal(sys321, 1.3, -0.8, 0.6)
    l2, m2, n2 = p.lam ** 2, p.mu ** 2, p.nu ** 2
    np.testing.assert_allclose([p.lam2_k2, p.mu2_h2, p.k2_mu2, p.h2_nu2],
                               [l2 - 8, m2 - 5, 8 - m2, 5 - n2], rtol=1e-12)


def test_gaps_near_planes_are_resolved(sys321):
    # y tiny: mu^2 - h^2 is ~1e-20 and would be lost to subtraction
    p = cart_to_ellipsoidal(sys321, 1.0, 1e-10, 0.5)
    assert 0 < p.mu2_h2 < 1e-18
    x, y, z = ellipsoidal_to_cart(sys321, p)
    assert y == pytest.approx(1e-10, rel=1e-8)


@pytest.mark.parametrize("signs", list(itertools.product((1, -1), repeat=3)))
def test_sign_tables_are_inverse(signs):
    assert signs_to_cartesian(*signs_to_ellipsoidal(*signs)) == signs
    assert signs_to_ellipsoidal(*signs_to_cartesian(*signs)) == signs


@pytest.mark.parametrize("signs", list(itertools.product((1, -1), repeat=3)))
def test_octant_roundtrip(sys321, signs):
    base = np.array([1.1, 0.9, 0.4])
    pt = base * np.array(signs)
    p = cart_to_ellipsoidal(sys321, *pt)
    sx, sy, sz = signs
    assert p.signs == (sx * sy * sz, sx * sy, sx * sz)
    np.testing.assert_allclose(ellipsoidal_to_cart(sys321, p), pt, rtol=1e-13)


def test_origin_and_axes(sys321):
    o = cart_to_ellipsoidal(sys321, 0.0, 0.0, 0.0)
    assert (o.lam, o.mu, o.nu) == (sys321.k, sys321.h, 0.0)
    assert ellipsoidal_to_cart(sys321, o) == (0.0, 0.0, 0.0)
    # on the x axis beyond the foci the roots are x^2, k^2 and h^2
    p = cart_to_ellipsoidal(sys321, 4.0, 0.0, 0.0)
    assert p.lam == pytest.approx(4.0, rel=1e-15)
    assert abs(p.mu) == pytest.approx(sys321.k, rel=1e-15)
    assert abs(p.nu) == pytest.approx(sys321.h, rel=1e-15)
    # plane snapping: a coordinate below 1e-12 a is zero with a positive sign
    q = cart_to_ellipsoidal(sys321, 1.0, -1e-14, 0.5)
    assert q.signs == cart_to_ellipsoidal(sys321, 1.0, 0.0, 0.5).signs


@pytest.mark.parametrize("pt", [(0.0, 1.0, -1.0), (0.0, -1.0, 1.0), (0.0, -0.5, -0.5)])
def test_x_plane_keeps_signs(sys321, pt):
    p = cart_to_ellipsoidal(sys321, *pt)
    assert p.nu == 0.0
    np.testing.assert_allclose(ellipsoidal_to_cart(sys321, p), pt, atol=1e-14)


def test_reference_surface(sys321):
    p = cart_to_ellipsoidal(sys321, 3.0, 0.0, 0.0)
    assert p.lam == pytest.approx(3.0, rel=1e-15)
    p = cart_to_ellipsoidal(sys321, 0.0, 0.0, 1.0)
    assert p.lam == pytest.approx(3.0, rel=1e-15)


def test_roundtrip_bulk(sys321):
    rng = np.random.default_rng(1)
    pts = rng.uniform(-6, 6, size=(10_000, 3)) * rng.choice([1e-3, 1.0], size=(10_000, 1))
    worst = 0.0
    for pt in pts:
        back = np.array(ellipsoidal_to_cart(sys321, cart_to_ellipsoidal(sys321, *pt)))
        worst = max(worst, np.linalg.norm(back - pt) / max(1.0, np.linalg.norm(pt)))
    assert worst < 1e-10


def test_from_coords_validation(sys321):
    p = EllipsoidalPoint.from_coords(sys321, 3.0, -2.5, 1.0)
    assert p.signs == (1, -1, 1)
    with pytest.raises(ValueError, match="bracket"):
        EllipsoidalPoint.from_coords(sys321, 2.0, 2.5, 1.0)
    with pytest.raises(ValueError):
        EllipsoidalPoint.from_coords(sys321, 3.0, 2.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 5), st.floats(0.05, 0.95), st.floats(0.05, 0.95),
       st.tuples(*[st.floats(-10, 10)] * 3))
def test_roundtrip_random_systems(a, rb, rc, pt):
    sys = new_system(a, a * rb, a * rb * rc)
    back = ellipsoidal_to_cart(sys, cart_to_ellipsoidal(sys, *pt))
    scale = max(1.0, float(np.linalg.norm(pt)))
    np.testing.assert_allclose(back, pt, atol=1e-10 * scale)
