import math

import numpy as np
import pytest
import scipy.sparse.linalg as sla

from eigenprofile import discretize as D
from eigenprofile import geometry as G
from eigenprofile import spectral as S

import oracles as O


@pytest.fixture(scope="module")
def square32():
    g = D.rasterize(G.build_rectangle(1, 1), 1 / 32)
    A = D.assemble_laplacian(g)
    return g, A, S.smallest_eigenpairs(A, g, 3)


def test_square_matches_closed_form(square32):
    g, A, spec = square32
    expect = sorted([O.discrete_square_lambda(1 / 32, 1, 1), O.discrete_square_lambda(1 / 32, 1, 2),
                     O.discrete_square_lambda(1 / 32, 2, 1)])
    assert spec.eigenvalues == pytest.approx(expect, rel=1e-9)
    assert spec.k == 3 and spec.lambda1 == spec.eigenvalues[0]


def test_normalized_and_positive(square32):
    g, A, spec = square32
    assert S.normalization_error(spec) < 1e-12
    assert spec.phi(1).values.min() > 0
    # orthogonality in the discrete L2 inner product
    gram = spec.vectors.T @ spec.vectors * g.cell_measure
    assert np.allclose(gram, np.eye(3), atol=1e-10)


def test_residuals_small(square32):
    g, A, spec = square32
    R = A.matrix @ spec.vectors - spec.vectors * spec.eigenvalues
    rel = np.linalg.norm(R, axis=0) / np.linalg.norm(spec.vectors, axis=0) / spec.eigenvalues
    assert rel.max() < 1e-7


def test_agrees_with_arpack_on_polygon():
    g = D.rasterize(G.build_regular_polygon(7, 1.0), 0.04)
    A = D.assemble_laplacian(g)
    spec = S.smallest_eigenpairs(A, g, 4)
    ref = np.sort(sla.eigsh(A.matrix.tocsc(), k=4, sigma=0, which="LM")[0])
    assert spec.eigenvalues == pytest.approx(ref, rel=1e-9)


def test_cg_inner_matches_lu():
    g = D.rasterize(G.build_disk(), 0.1)
    A = D.assemble_laplacian(g)
    lu = S.smallest_eigenpairs(A, g, 2)
    cg = S.smallest_eigenpairs(A, g, 2, config=S.SolverConfig(inner="cg"))
    assert cg.eigenvalues == pytest.approx(lu.eigenvalues, rel=1e-8)
    assert np.allclose(cg.phi(1).values, lu.phi(1).values, atol=1e-5)
    assert cg.info["cg_steps"] > 0


def test_disk_first_eigenvalue():
    spec, _ = S.solve_domain(G.build_disk(), 1 / 64)
    assert spec.lambda1 == pytest.approx(O.j01_bisect() ** 2, rel=2e-3)


def test_interval_modes():
    g = D.rasterize_interval(1.0, 1 / 128)
    spec = S.smallest_eigenpairs(D.assemble_laplacian(g), g, 3)
    h = 1 / 128
    expect = [4 / h**2 * math.sin(j * math.pi * h / 2) ** 2 for j in (1, 2, 3)]
    assert spec.eigenvalues == pytest.approx(expect, rel=1e-9)
    x = g.points[:, 0]
    assert np.allclose(spec.phi(1).values, math.sqrt(2) * np.sin(math.pi * x), atol=1e-3)


def test_bad_arguments():
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    A = D.assemble_laplacian(g)
    with pytest.raises(ValueError):
        S.smallest_eigenpairs(A, g, 5)
    with pytest.raises(ValueError):
        S.smallest_eigenpairs(A, g, 0)
    g2 = D.rasterize(G.build_rectangle(1, 1), 0.1)
    with pytest.raises(ValueError):
        S.smallest_eigenpairs(A, g2, 1)
    with pytest.raises(ValueError):
        S.smallest_eigenpairs(D.assemble_laplacian(g2), g2, 1, config=S.SolverConfig(inner="jacobi"))


def test_outer_cap_raises():
    g = D.rasterize(G.build_disk(), 0.1)
    with pytest.raises(S.SolverError):
        S.smallest_eigenpairs(D.assemble_laplacian(g), g, 2, config=S.SolverConfig(max_outer=1))


def test_rayleigh_quotient_bounds(square32):
    g, A, spec = square32
    assert S.rayleigh_quotient(g, A, spec.phi(1)) == pytest.approx(spec.lambda1, rel=1e-10)
    rng = np.random.default_rng(3)
    assert S.rayleigh_quotient(g, A, rng.random(g.n)) >= spec.lambda1
    with pytest.raises(ValueError):
        S.rayleigh_quotient(g, A, np.zeros(g.n))
    with pytest.raises(ValueError):
        S.rayleigh_quotient(g, A, np.ones(4))


def test_domain_monotonicity():
    h = 1 / 32
    U, _ = S.solve_domain(G.build_rectangle(1, 1), h, 3)
    V, _ = S.solve_domain(G.build_rectangle(1.5, 1.25), h, 3)
    rep = S.eigen_monotonicity_check(U, V)
    assert rep.ok
    assert np.all(rep.margin > 0)
    assert not S.eigen_monotonicity_check(V, U).ok


def test_seed_determinism():
    g = D.rasterize(G.build_regular_polygon(5, 1.0), 0.05)
    A = D.assemble_laplacian(g)
    a = S.smallest_eigenpairs(A, g, 2)
    b = S.smallest_eigenpairs(A, g, 2)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
