import itertools
import math

import numpy as np
import pytest
import shapely

from eigenprofile import caricature as C
from eigenprofile import geometry as G

EQ = G.build_triangle((0, 0), (1, 0), (0.5, math.sqrt(3) / 2))


def rounded_square_rho(l, eps, p):
    # core square pulled in by eps/sqrt2, buffered by eps
    c = l - eps / math.sqrt(2)
    shape = shapely.box(-c, -c, c, c).buffer(eps, quad_segs=4096)
    return shape.exterior.distance(shapely.Point(p))


def test_interval_values():
    assert C.phi_interval(1, 0.5) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert C.phi_interval(1, 0.25) == pytest.approx(0.70711, abs=1e-5)
    assert C.phi_interval(1, 1e-12) < 1e-11
    with pytest.raises(ValueError):
        C.phi_interval(1, 1.0)
    with pytest.raises(ValueError):
        C.phi_interval(1, -0.1)


def test_interval_sandwich_exact():
    x = np.linspace(0.001, 0.999, 999)
    phi = math.sqrt(2) * np.sin(math.pi * x)
    Phi = C.phi_interval(1, x)
    assert np.all(Phi <= phi * (1 + 1e-12))
    assert np.all(phi <= math.pi / 2 * Phi * (1 + 1e-12))


def test_triangle_equilateral_incenter():
    s = 1.0
    r = s / (2 * math.sqrt(3))
    assert C.phi_triangle(EQ, (0.5, r)) == pytest.approx(8 * r**6 / s**7, rel=1e-12)


def test_triangle_side_and_exterior():
    T = G.build_triangle((0, 0), (2, 0), (0.3, 1.1))
    assert C.phi_triangle(T, (1.0, 0.0)) == 0.0
    with pytest.raises(ValueError):
        C.phi_triangle(T, (5.0, 5.0))


def test_triangle_relabel_invariance():
    V = [(0, 0), (2, 0), (0.3, 1.1)]
    p = np.array([[0.7, 0.3], [0.4, 0.6], [1.5, 0.1]])
    ref = C.phi_triangle(G.build_triangle(*V), p)
    for perm in itertools.permutations(V):
        assert np.allclose(C.phi_triangle(G.build_triangle(*perm), p), ref, rtol=1e-12)


def test_polygon_square_center():
    sq = G.build_rectangle(1, 1)
    assert C.phi_polygon(sq, (0.5, 0.5), r=1.0) == pytest.approx(0.0625, rel=1e-12)
    assert C.phi_polygon(sq, (0.5, 0.5), r=1.0, metric="euclidean") == pytest.approx(0.0625, rel=1e-12)
    assert C.phi_polygon(sq, (0.5, 0.0), r=1.0) == 0.0
    with pytest.raises(ValueError):
        C.phi_polygon(sq, (0.5, 0.5), metric="taxicab")


def test_polygon_triangle_matches_triangle_up_to_scale():
    # on a triangle both expressions have the same shape; only the length scale differs
    T = G.build_triangle((0, 0), (2, 0), (0.3, 1.1))
    rng = np.random.default_rng(0)
    w = rng.dirichlet([1, 1, 1], 50)
    P = w @ T.vertices
    ratio = C.phi_polygon(T, P, metric="euclidean") / C.phi_triangle(T, P)
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


def test_polygon_assumptions():
    assert C.check_polygon_assumptions(G.build_regular_polygon(6, 1.0)).ok
    thin = C.check_polygon_assumptions(G.build_rectangle(40, 1))
    assert not thin.side_ratio_ok
    assert thin.side_ratio == pytest.approx(math.sqrt(40), rel=1e-12)


def test_regular_polygon_square():
    assert C.phi_regular_polygon(4, 1.0, (0, 0)) == pytest.approx(0.25 / 64, rel=1e-12)
    assert C.phi_regular_polygon(4, 1.0, (3, 3), center=(3, 3)) == pytest.approx(0.25 / 64, rel=1e-12)
    P = G.build_regular_polygon(7, 1.0)
    assert C.phi_regular_polygon(7, 1.0, P.vertices[2]) == 0.0


def test_regular_polygon_rotation_symmetry():
    n = 7
    P = G.build_regular_polygon(n, 1.0)
    rng = np.random.default_rng(1)
    w = rng.dirichlet(np.ones(n), 20)
    X = w @ P.vertices
    a = 2 * math.pi / n
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    assert np.allclose(C.phi_regular_polygon(n, 1.0, X), C.phi_regular_polygon(n, 1.0, X @ R.T), rtol=1e-9)


def test_ellipse():
    D = G.build_disk()
    assert C.phi_ellipse(D, (0, 0)) == pytest.approx(0.25)
    assert C.phi_ellipse(D, (1, 0)) == pytest.approx(0.0, abs=1e-12)
    E = G.EllipseDomain((0.0, 0.0), (2.0, 1.0), 0.0)
    assert C.phi_ellipse(E, (0, 0)) == pytest.approx(1 / 16)


def test_rounded_square_center():
    rho = rounded_square_rho(1, 0.5, (0, 0))
    assert rho == pytest.approx(1 + 0.5 * (1 - 1 / math.sqrt(2)), rel=1e-12)
    assert C.phi_rounded_square(1, 0.5, (0, 0)) == pytest.approx(rho / (rho + 0.5), rel=1e-9)
    assert C.phi_rounded_square(1, 0.5, (0, 0)) == pytest.approx(0.69632, abs=1e-5)


def test_rounded_square_clamp_and_boundary():
    l, eps = 1.0, 0.5
    for p in [(0.3, 0.2), (0.6, -0.64), (0.9, 0.9), (-1.1, 0.0)]:
        rho = rounded_square_rho(l, eps, p)
        c = l - eps / math.sqrt(2)
        x, y = np.clip(p, -c, c)
        expect = rho / (rho + eps) * math.cos(math.pi * x / 2) * math.cos(math.pi * y / 2)
        assert C.phi_rounded_square(l, eps, p) == pytest.approx(expect, rel=1e-6, abs=1e-12)
    edge = 1 + eps * (1 - 1 / math.sqrt(2))
    assert C.phi_rounded_square(l, eps, (edge, 0.0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        C.phi_rounded_square(1, 1.5, (0, 0))
    with pytest.raises(ValueError):
        C.phi_rounded_square(1, 0.0, (0, 0))


def test_rounded_triangle():
    T = G.build_triangle((0, 0), (2, 0), (0.6, 1.4))
    p = np.array([[0.8, 0.5]])
    U = G.build_rounded_triangle(T, 0.05)
    rho = float(U.boundary_distance(p)[0])
    expect = rho / (rho + 0.05) * C.phi_triangle(T, p)[0]
    assert C.phi_rounded_triangle(T, 0.05, p)[0] == pytest.approx(expect, rel=1e-12)
    # just outside a side, on the offset boundary
    assert C.phi_rounded_triangle(T, 0.05, (1.0, -0.05)) == pytest.approx(0.0, abs=1e-12)
    vals = [C.phi_rounded_triangle(T, e, (0.8, 0.5)) for e in (1e-2, 1e-4, 1e-6)]
    target = C.phi_triangle(T, (0.8, 0.5))
    errs = [abs(v - target) for v in vals]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-5 * target
    with pytest.raises(ValueError):
        C.phi_rounded_triangle(T, 5.0, (0.8, 0.5))


def test_shrunken_triangle_distance():
    T = G.build_triangle((0, 0), (2, 0), (0.6, 1.4))
    S = C.shrunken_triangle(T, 0.1)
    assert np.allclose(np.hypot(*(S - T.vertices).T), 0.1)


def test_perturbed_triangle_branches():
    T = G.build_triangle((0, 0), (1, 0), (0.5, 0.8))
    U = G.build_perturbed_triangle(T, 0.5, 0.05)
    far = np.array([[0.3, 0.3], [0.6, 0.5]])
    val = C.phi_perturbed_triangle(U, 1.0, far)
    assert np.allclose(val, C.phi_triangle(T, far), rtol=1e-12)
    assert C.phi_perturbed_triangle(U, 1.0, (0.5, 0.8)) == 0.0
    near = (0.5, 0.0)
    assert C.phi_perturbed_triangle(U, 2.0, near) == pytest.approx(
        2.0 * C.bump_expression(U, np.array([near]))[0], rel=1e-12)
    with pytest.raises(ValueError):
        C.phi_perturbed_triangle(U, 1.0, far, branch="both")
    with pytest.raises(TypeError):
        C.phi_perturbed_triangle(T, 1.0, far)


def test_perturbed_prefactor_limit():
    T = G.build_triangle((0, 0), (1, 0), (0.5, 0.8))
    p = np.array([[0.45, 0.1]])
    vals = [C.bump_expression(G.build_perturbed_triangle(T, 0.5, e), p)[0] for e in (1e-3, 1e-5, 1e-7)]
    assert abs(vals[2] - 1) < abs(vals[0] - 1)
    assert vals[2] == pytest.approx(1.0, abs=1e-4)


def test_spec_dispatch():
    s = C.CaricatureSpec("ellipse", {"E": G.build_disk()})
    assert s.evaluate((0, 0)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        C.CaricatureSpec("hexagon")
