"""Smallest Dirichlet eigenpairs by block inverse iteration.

Each outer step solves ``A Y = X`` for a block of vectors, then applies
Rayleigh-Ritz on span(Y).  Inner solves use a sparse LU factorisation by
default; ``inner='cg'`` switches to Jacobi-preconditioned conjugate gradients
vectorised over columns (much slower on fine grids).  Converged vectors stay
in the block, so the explicit orthogonalisation deflates them every step.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, qr
from scipy.sparse.linalg import splu

from .discretize import Grid, GridField, SparseOperator, integrate

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Inner or outer iteration failed to converge."""


class DegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    cg_tol: float = 1e-10
    max_outer: int = 500
    inner_factor: float = 10.0
    block_extra: int = 2
    seed: int = 0
    inner: str = "lu"


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # (n, k), columns normalised so h^ndim * sum phi^2 = 1
    residuals: np.ndarray
    grid: Grid
    tol: float
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def phi(self, j: int = 1) -> GridField:
        """Eigenfunction j (1-based)."""
        return GridField(self.grid, self.vectors[:, j - 1])

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])


def _pcg_block(A, B: np.ndarray, X0: np.ndarray, dinv: np.ndarray, tol: float, maxit: int):
    """Jacobi PCG on each column of ``A X = B``; returns (X, iterations)."""
    X = X0.copy()
    R = B - A @ X
    bnorm = np.linalg.norm(B, axis=0)
    bnorm[bnorm == 0] = 1.0
    Z = dinv[:, None] * R
    Pd = Z.copy()
    rz = np.einsum("ij,ij->j", R, Z)
    active = np.linalg.norm(R, axis=0) > tol * bnorm
    it = 0
    while active.any():
        if it >= maxit:
            worst = float(np.max(np.linalg.norm(R, axis=0) / bnorm))
            raise SolverError(f"CG did not converge in {maxit} iterations (relative residual {worst:.3e})")
        it += 1
        cols = np.flatnonzero(active)
        Pa = Pd[:, cols]
        AP = A @ Pa
        alpha = rz[cols] / np.einsum("ij,ij->j", Pa, AP)
        X[:, cols] += alpha * Pa
        R[:, cols] -= alpha * AP
        Zc = dinv[:, None] * R[:, cols]
        rz_new = np.einsum("ij,ij->j", R[:, cols], Zc)
        beta = rz_new / rz[cols]
        rz[cols] = rz_new
        Pd[:, cols] = Zc + beta * Pa
        active[cols] = np.linalg.norm(R[:, cols], axis=0) > tol * bnorm[cols]
    return X, it


def _fix_signs(V: np.ndarray, measure: float) -> np.ndarray:
    V = V.copy()
    if V[:, 0].sum() * measure < 0:
        V[:, 0] *= -1
    for j in range(1, V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if nz.size and col[nz[0]] < 0:
            V[:, j] *= -1
    return V


def smallest_eigenpairs(A: SparseOperator, g: Grid, k: int = 1, tol: float | None = None,
                        config: SolverConfig | None = None) -> Spectrum:
    """The ``k`` smallest eigenpairs of ``A`` with eigenvectors normalised on ``g``."""
    cfg = config or SolverConfig()
    tol = cfg.tol if tol is None else tol
    n = A.n
    if n != g.n:
        raise ValueError("operator and grid sizes differ")
    if k < 1 or k > n / 4:
        raise ValueError(f"k={k} must lie in [1, n/4] with n={n}")
    M = A.matrix
    dinv = 1.0 / M.diagonal()
    p = min(max(2 * k + cfg.block_extra, k + 2), max(k, n // 4))
    rng = np.random.default_rng(cfg.seed)
    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    X, _ = qr(X, mode="economic")
    theta = np.ones(p)
    maxit = int(cfg.inner_factor * n ** (1.0 / g.ndim)) + 20
    if cfg.inner == "lu":
        lu = splu(M.tocsc(), permc_spec="MMD_AT_PLUS_A")

        def inner(B, X0):
            return lu.solve(B), 0
    elif cfg.inner == "cg":
        def inner(B, X0):
            return _pcg_block(M, B, X0, dinv, cfg.cg_tol, maxit)
    else:
        raise ValueError(f"unknown inner solver {cfg.inner!r}")
    # residuals cannot drop below rounding in M @ x; tiny boundary gaps make |M| large
    floor = 10 * np.finfo(float).eps * float(abs(M).sum(axis=1).max())
    prev = None
    total_cg = 0
    res = np.full(k, np.inf)
    for outer in range(1, cfg.max_outer + 1):
        Y, its = inner(X, X / theta)
        total_cg += its
        Q, _ = qr(Y, mode="economic")
        H = Q.T @ (M @ Q)
        w, S = eigh(0.5 * (H + H.T))
        X = Q @ S
        theta = w
        R = M @ X[:, :k] - X[:, :k] * w[:k]
        res = np.linalg.norm(R, axis=0)
        if prev is not None:
            change = np.max(np.abs(w[:k] - prev) / np.abs(w[:k]))
            if change < tol and np.all(res <= np.maximum(tol * np.abs(w[:k]), floor)):
                break
        prev = w[:k].copy()
    else:
        raise SolverError(f"eigensolver did not converge in {cfg.max_outer} iterations; residuals {res}")
    lam = w[:k]
    V = X[:, :k] / math.sqrt(g.cell_measure)
    V = _fix_signs(V, g.cell_measure)
    if k > 1 and lam[1] - lam[0] < 1e-8 * lam[0]:
        warnings.warn("lambda_1 appears degenerate; the rasterization may be disconnected", DegeneracyWarning)
    if V[:, 0].min() <= 0:
        log.warning("phi_1 is not strictly positive (min %.3e)", V[:, 0].min())
    log.debug("eigensolve n=%d k=%d: %d outer, %d CG steps", n, k, outer, total_cg)
    return Spectrum(lam.copy(), V, res, g, tol, outer, {"cg_steps": total_cg, "block": p, "residual_floor": floor})


def solve_domain(d, h: float, k: int = 1, config: SolverConfig | None = None, scheme: str = "shortley_weller"):
    """Rasterize, assemble and solve in one call."""
    from .discretize import assemble_laplacian, rasterize

    g = rasterize(d, h)
    A = assemble_laplacian(g, scheme)
    return smallest_eigenpairs(A, g, k, config=config), A


def rayleigh_quotient(g: Grid, A: SparseOperator, f) -> float:
    v = f.values if isinstance(f, GridField) else np.asarray(f, dtype=float)
    if v.shape != (g.n,):
        raise ValueError("field length does not match grid")
    den = float(v @ v)
    if den == 0:
        raise ValueError("rayleigh quotient of the zero field")
    return float(v @ (A.matrix @ v)) / den


@dataclass(frozen=True)
class MonotonicityReport:
    lam_U: np.ndarray
    lam_V: np.ndarray
    margin: np.ndarray
    ok: bool


def eigen_monotonicity_check(spec_U: Spectrum, spec_V: Spectrum, tol: float | None = None) -> MonotonicityReport:
    """lambda_k(U) >= lambda_k(V) for U inside V, over the shared k."""
    k = min(spec_U.k, spec_V.k)
    lu, lv = spec_U.eigenvalues[:k], spec_V.eigenvalues[:k]
    tol = max(spec_U.tol, spec_V.tol) if tol is None else tol
    margin = lu - lv
    return MonotonicityReport(lu, lv, margin, bool(np.all(margin >= -tol * lu)))


def normalization_error(spec: Spectrum) -> float:
    return max(abs(integrate(spec.grid, spec.vectors[:, j] ** 2) - 1) for j in range(spec.k))
