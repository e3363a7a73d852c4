import math

import numpy as np
import pytest
import scipy.sparse.linalg as sla

from eigenprofile import discretize as D
from eigenprofile import geometry as G
from eigenprofile import spectral as S

import oracles as O


def smallest(A, k=1):
    return np.sort(sla.eigsh(A.matrix.tocsc(), k=k, sigma=0, which="LM")[0])


def test_square_node_count():
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    assert g.n == 9
    assert g.dims == (3, 3)


def test_disk_node_count():
    # every lattice point of 0.5 Z^2 with |x| < 1, corners (0.5, 0.5) included
    g = D.rasterize(G.build_disk(), 0.5)
    expect = [(i * 0.5, j * 0.5) for i in range(-2, 3) for j in range(-2, 3) if (i * i + j * j) * 0.25 < 1]
    assert len(expect) == 9
    assert sorted(map(tuple, g.points)) == sorted(expect)


def test_resolution_error():
    with pytest.raises(D.ResolutionError):
        D.rasterize(G.build_rectangle(1, 1), 2.0)
    with pytest.raises(D.ResolutionError):
        D.rasterize_interval(1.0, 1.5)


def test_grid_invariants_slit():
    d = G.build_polygon([(0, 0), (1, 0), (1, 1), (0, 1)], slits=[((0.5, 1.0), (0.5, 0.3))])
    g = D.rasterize(d, 1 / 20 + 1e-3)
    assert np.all(d.contains_points(g.points))
    assert np.all((g.gaps > 0) & (g.gaps <= g.h))
    # no link crosses the slit
    P = g.points
    for k in (0, 1):
        i = np.flatnonzero(g.nbr[:, k] >= 0)
        a, b = P[i], P[g.nbr[i, k]]
        crosses = (np.minimum(a[:, 0], b[:, 0]) < 0.5) & (np.maximum(a[:, 0], b[:, 0]) > 0.5) & (a[:, 1] > 0.3)
        assert not crosses.any()


def test_interior_row_is_five_point():
    h = 0.1
    g = D.rasterize(G.build_rectangle(1, 1), h)
    A = D.assemble_laplacian(g).matrix.toarray()
    i = g.nearest_node((0.5, 0.5))
    row = A[i]
    assert row[i] == pytest.approx(4 / h**2)
    assert sorted(row[np.flatnonzero(row < 0)]) == pytest.approx([-1 / h**2] * 4)


def test_interval_eigenvalue_discrete():
    m = 63
    h = 1 / (m + 1)
    g = D.rasterize_interval(1.0, h)
    lam = smallest(D.assemble_laplacian(g))[0]
    assert lam == pytest.approx(4 / h**2 * math.sin(math.pi * h / 2) ** 2, rel=1e-10)


def test_square_eigenvalue_discrete():
    h = 1 / 64
    g = D.rasterize(G.build_rectangle(1, 1), h)
    lam = smallest(D.assemble_laplacian(g))[0]
    assert lam == pytest.approx(O.discrete_square_lambda(h), rel=1e-10)
    assert lam == pytest.approx(8 / h**2 * math.sin(math.pi * h / 2) ** 2, rel=1e-10)


def test_shortley_weller_is_symmetric_and_positive():
    g = D.rasterize(G.build_regular_polygon(7, 1.0), 0.05)
    A = D.assemble_laplacian(g)
    assert A.symmetric
    M = A.matrix
    assert abs(M - M.T).max() == 0
    assert np.all(M.diagonal() > 0)
    assert smallest(A)[0] > 0


def test_shortley_weller_convergence_order_disk():
    target = O.j01_bisect() ** 2
    hs = [1 / 16, 1 / 32, 1 / 64]
    err = [abs(smallest(D.assemble_laplacian(D.rasterize(G.build_disk(), h)))[0] - target) for h in hs]
    orders = [math.log2(err[i] / err[i + 1]) for i in range(2)]
    assert min(orders) >= 1.7


def test_masked_scheme_first_order_on_disk():
    target = O.j01_bisect() ** 2
    e = [abs(smallest(D.assemble_laplacian(D.rasterize(G.build_disk(), h), "masked"))[0] - target)
         for h in (1 / 32, 1 / 64)]
    assert e[1] < e[0]
    with pytest.raises(ValueError):
        D.assemble_laplacian(D.rasterize(G.build_disk(), 0.25), "spectral")


def test_divergence_identity_matches_masked():
    g = D.rasterize(G.build_regular_polygon(5, 1.0), 0.07)
    A = D.assemble_divergence_form(g, D.CoefficientField.constant(1.0)).matrix
    B = D.assemble_laplacian(g, "masked").matrix
    assert abs(A - B).max() == 0


def test_divergence_linearity():
    g = D.rasterize(G.build_disk(), 0.1)
    A = D.assemble_divergence_form(g, D.CoefficientField.constant(2.0)).matrix
    B = D.assemble_laplacian(g, "masked").matrix
    assert abs(A - 2 * B).max() <= 1e-12 * abs(B).max()


def test_divergence_cross_term_symmetric():
    g = D.rasterize(G.build_disk(), 0.1)
    a = D.CoefficientField(lambda P: (2 + P[:, 0] ** 2, 0.3 * np.ones(len(P)), 1.5 + 0 * P[:, 1]), 4.0)
    A = D.assemble_divergence_form(g, a)
    assert A.symmetric
    assert smallest(A)[0] > 0


def test_divergence_anisotropic_richardson():
    # separable limit pi^2 (4 + 1); O(h^2) errors, so Richardson on the last two levels
    lams = []
    for h in (1 / 64, 1 / 128, 1 / 256):
        g = D.rasterize(G.build_rectangle(1, 1), h)
        lams.append(smallest(D.assemble_divergence_form(g, D.CoefficientField.constant(4.0, 0.0, 1.0)))[0])
    rich = (4 * lams[2] - lams[1]) / 3
    assert rich == pytest.approx(5 * math.pi**2, rel=1e-6)
    assert abs(lams[2] - 5 * math.pi**2) < abs(lams[0] - 5 * math.pi**2)


def test_invalid_coefficients():
    g = D.rasterize(G.build_rectangle(1, 1), 0.1)
    with pytest.raises(D.InvalidCoefficientsError):
        D.assemble_divergence_form(g, D.CoefficientField(lambda P: (1.0, 2.0, 1.0), 10.0))
    with pytest.raises(D.InvalidCoefficientsError):
        D.assemble_divergence_form(g, D.CoefficientField(lambda P: (20.0, 0.0, 1.0), 4.0))


def test_integrate():
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    assert D.integrate(g, np.ones(g.n)) == pytest.approx(0.5625)
    assert D.integrate(g, np.zeros(g.n)) == 0.0
    other = D.rasterize(G.build_rectangle(1, 1), 0.2)
    with pytest.raises(ValueError):
        D.integrate(g, D.GridField(other, np.ones(other.n)))
    with pytest.raises(ValueError):
        D.integrate(g, np.ones(3))


def test_integrate_normalized_mode():
    g = D.rasterize(G.build_disk(), 0.05)
    spec = S.smallest_eigenpairs(D.assemble_laplacian(g), g, 2)
    for j in (1, 2):
        assert D.integrate(g, spec.phi(j).values ** 2) == pytest.approx(1.0, abs=1e-12)


def test_index_and_image():
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    assert list(g.index_of([[1, 1], [5, 5]])) == [0, -1]
    img = g.to_image(np.arange(g.n, dtype=float))
    assert img.shape == (3, 3)
    assert img[0, 0] == 0 and img[2, 2] == 8


def test_gridfield_shape_checked():
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    with pytest.raises(ValueError):
        D.GridField(g, np.ones(4))


def test_disconnected_rasterization_keeps_largest(caplog):
    # two squares joined by a corridor that holds no lattice node
    V = [(0, 0), (1, 0), (1, 0.52), (1.2, 0.52), (1.2, 0), (2.3, 0), (2.3, 1), (1.2, 1), (1.2, 0.58),
         (1, 0.58), (1, 1), (0, 1)]
    g = D.rasterize(G.build_polygon(V), 0.1)
    assert g.meta.get("dropped_nodes", 0) > 0
    assert "components" in caplog.text
