"""Lattice discretisation of domains and sparse Dirichlet operators.

All grids live on the master lattice ``h * Z^2`` (anchored at the origin), so
grids of different domains with the same spacing share nodes exactly.  Nodes
are ordered row-major by ``(iy, ix)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .geometry import Domain, inner_diameter

log = logging.getLogger(__name__)

# direction order used throughout: E, W, N, S
DIRS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
OPPOSITE = np.array([1, 0, 3, 2])


class ResolutionError(ValueError):
    """The requested spacing does not resolve the domain."""


class InvalidCoefficientsError(ValueError):
    """A coefficient field failed its ellipticity check."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior lattice nodes of a domain.

    ``lattice`` holds integer coordinates (ix, iy) so that node i sits at
    ``h * lattice[i]``.  ``gaps[i, k]`` is the distance from node i to the
    boundary along direction k (capped at h); ``nbr[i, k]`` is the index of
    the linked neighbour or -1 when the link is cut by the boundary.
    """

    h: float
    lattice: np.ndarray
    gaps: np.ndarray
    nbr: np.ndarray
    ndim: int = 2
    domain: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.lattice)

    @property
    def points(self) -> np.ndarray:
        return self.h * self.lattice.astype(float)

    @property
    def origin(self) -> tuple[float, float]:
        lo = self.lattice.min(axis=0)
        return (self.h * lo[0], self.h * lo[1])

    @property
    def dims(self) -> tuple[int, int]:
        span = self.lattice.max(axis=0) - self.lattice.min(axis=0) + 1
        return (int(span[0]), int(span[1]))

    @property
    def cell_measure(self) -> float:
        return self.h**self.ndim

    @property
    def boundary_gaps(self) -> dict[int, np.ndarray]:
        """Gap rows for nodes adjacent to the boundary."""
        near = np.flatnonzero(np.any(self.gaps < self.h, axis=1) | np.any(self.nbr < 0, axis=1))
        return {int(i): self.gaps[i] for i in near}

    def index_of(self, lattice_pts) -> np.ndarray:
        """Dense index of each integer lattice point, -1 if not a node."""
        q = np.atleast_2d(np.asarray(lattice_pts, dtype=np.int64))
        key = self._keys
        k = self._key(q)
        pos = np.searchsorted(key, k)
        pos = np.clip(pos, 0, len(key) - 1)
        return np.where(key[pos] == k, pos, -1)

    def nearest_node(self, p) -> int:
        P = np.asarray(p, dtype=float)
        d = np.hypot(*(self.points - P).T)
        return int(np.argmin(d))

    def _key(self, q):
        return q[:, 1].astype(np.int64) * (1 << 32) + q[:, 0].astype(np.int64)

    @property
    def _keys(self):
        k = self.meta.get("_keys")
        if k is None:
            k = self._key(self.lattice)
            self.meta["_keys"] = k
        return k

    def to_image(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Array of shape (ny, nx), row 0 = lowest y, exterior filled."""
        lo = self.lattice.min(axis=0)
        nx, ny = self.dims
        img = np.full((ny, nx), fill, dtype=float)
        img[self.lattice[:, 1] - lo[1], self.lattice[:, 0] - lo[0]] = values
        return img


@dataclass(frozen=True, eq=False)
class GridField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"field length {v.shape} does not match grid size {self.grid.n}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Symmetric positive definite operator in CSR storage."""

    matrix: sp.csr_matrix
    symmetric: bool = True

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def indptr(self):
        return self.matrix.indptr

    @property
    def indices(self):
        return self.matrix.indices

    @property
    def data(self):
        return self.matrix.data

    def __matmul__(self, x):
        return self.matrix @ x

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric matrix field a(x) = [[a11, a12], [a12, a22]].

    ``fn`` maps an (m, 2) array of points to a tuple (a11, a12, a22) of
    length-m arrays.
    """

    fn: Callable[[np.ndarray], tuple]
    ellipticity: float = 1.0

    def __call__(self, P: np.ndarray):
        a11, a12, a22 = self.fn(P)
        m = len(P)
        return (np.broadcast_to(np.asarray(a11, float), (m,)),
                np.broadcast_to(np.asarray(a12, float), (m,)),
                np.broadcast_to(np.asarray(a22, float), (m,)))

    @classmethod
    def constant(cls, a11: float, a12: float = 0.0, a22: float | None = None, ellipticity: float | None = None):
        a22 = a11 if a22 is None else a22
        if ellipticity is None:
            ev = np.linalg.eigvalsh([[a11, a12], [a12, a22]])
            ellipticity = max(ev[1], 1.0 / ev[0]) if ev[0] > 0 else math.inf
        return cls(lambda P: (a11, a12, a22), float(ellipticity))

    def check(self, P: np.ndarray):
        a11, a12, a22 = self(P)
        tr = a11 + a22
        disc = np.sqrt(((a11 - a22) / 2) ** 2 + a12**2)
        lo, hi = tr / 2 - disc, tr / 2 + disc
        lam = self.ellipticity
        bad = (lo < 1 / lam * (1 - 1e-12)) | (hi > lam * (1 + 1e-12)) | ~np.isfinite(lo + hi)
        if bad.any():
            i = int(np.argmax(bad))
            raise InvalidCoefficientsError(
                f"ellipticity {lam} violated at {P[i]}: eigenvalues ({lo[i]:.4g}, {hi[i]:.4g})"
            )


def rasterize(d: Domain, h: float, diam: float | None = None) -> Grid:
    """Lattice nodes strictly inside ``d`` with exact boundary gaps.

    Nodes within 1e-9 h of the boundary are dropped.  Links crossing the
    boundary (including slits) are cut.  Only the largest 4-connected
    component is kept.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    diam = inner_diameter(d) if diam is None else diam
    if h > diam:
        raise ResolutionError(f"h={h} exceeds the domain diameter {diam:.4g}")
    if h > diam / 16:
        log.debug("coarse spacing h=%g > diam/16", h)
    x0, y0, x1, y1 = d.bbox
    ix = np.arange(math.ceil(x0 / h), math.floor(x1 / h) + 1)
    iy = np.arange(math.ceil(y0 / h), math.floor(y1 / h) + 1)
    IX, IY = np.meshgrid(ix, iy)  # row-major (iy, ix)
    lat = np.stack([IX.ravel(), IY.ravel()], axis=1)
    P = h * lat.astype(float)
    keep = d.contains_points(P)
    lat, P = lat[keep], P[keep]
    if len(lat):
        keep = d.boundary_distance(P) > 1e-9 * h
        lat, P = lat[keep], P[keep]
    if len(lat) == 0:
        raise ResolutionError(f"no interior nodes at h={h}")
    gaps = np.empty((len(lat), 4))
    for k, dv in enumerate(DIRS):
        gaps[:, k] = d.ray_exit(P, dv.astype(float), h)
    g = Grid(h, lat, gaps, np.full((len(lat), 4), -1, dtype=np.int64), 2, d, {})
    nbr = _link(g, gaps, h)
    g = Grid(h, lat, np.minimum(gaps, h), nbr, 2, d, {})
    return _largest_component(g)


def _link(g: Grid, gaps: np.ndarray, h: float) -> np.ndarray:
    nbr = np.full((g.n, len(DIRS)), -1, dtype=np.int64)
    for k, dv in enumerate(DIRS[: 2 * g.ndim]):
        j = g.index_of(g.lattice + dv)
        ok = (j >= 0) & (gaps[:, k] >= h * (1 - 1e-12))
        nbr[ok, k] = j[ok]
    # a link must be open from both ends
    for k in range(2 * g.ndim):
        ok = nbr[:, k] >= 0
        back = np.full(g.n, -1)
        back[ok] = nbr[nbr[ok, k], OPPOSITE[k]]
        nbr[ok & (back != np.arange(g.n)), k] = -1
    return nbr


def _largest_component(g: Grid) -> Grid:
    rows, cols = np.nonzero(g.nbr >= 0)
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, g.nbr[rows, cols])), shape=(g.n, g.n))
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(labels)
    keep = labels == int(np.argmax(sizes))
    log.warning("rasterization split into %d components; keeping %d of %d nodes", ncomp, keep.sum(), g.n)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.sum())
    nbr = g.nbr[keep]
    nbr = np.where(nbr >= 0, remap[np.maximum(nbr, 0)], -1)
    return Grid(g.h, g.lattice[keep], g.gaps[keep], nbr, g.ndim, g.domain, {"dropped_nodes": int((~keep).sum())})


def rasterize_interval(a: float, h: float) -> Grid:
    """Nodes ``h*i`` in the open interval (0, a), as a one-dimensional grid."""
    if not (a > 0 and h > 0):
        raise ValueError("a and h must be positive")
    if h >= a:
        raise ResolutionError(f"h={h} does not resolve (0, {a})")
    i = np.arange(1, math.ceil(a / h))
    i = i[(h * i < a) & (a - h * i > 1e-9 * h)]
    lat = np.stack([i, np.zeros_like(i)], axis=1)
    x = h * i
    gaps = np.full((len(i), 4), h)
    gaps[:, 0] = np.minimum(h, a - x)
    gaps[:, 1] = np.minimum(h, x)
    g = Grid(h, lat, gaps, np.full((len(i), 4), -1, dtype=np.int64), 1, None, {"interval": a})
    nbr = _link(g, gaps, h)
    return Grid(h, lat, gaps, nbr, 1, None, {"interval": a})


def assemble_laplacian(g: Grid, scheme: str = "shortley_weller") -> SparseOperator:
    """Dirichlet Laplacian in symmetric flux form.

    Each linked pair contributes ``-1/h^2`` off the diagonal and ``1/h^2`` to
    both diagonals; a cut direction with boundary gap ``s`` contributes
    ``1/(h s)`` to the diagonal.  With ``scheme='masked'`` every cut direction
    counts as a full step h (plain 5-point stencil with zero exterior values).
    """
    if scheme not in ("shortley_weller", "masked"):
        raise ValueError(f"unknown scheme {scheme!r}")
    h = g.h
    nd = 2 * g.ndim
    nbr = g.nbr[:, :nd]
    gaps = g.gaps[:, :nd] if scheme == "shortley_weller" else np.full((g.n, nd), h)
    linked = nbr >= 0
    diag = np.where(linked, 1.0 / h**2, 1.0 / (h * gaps)).sum(axis=1)
    r, k = np.nonzero(linked)
    rows = np.concatenate([np.arange(g.n), r])
    cols = np.concatenate([np.arange(g.n), nbr[r, k]])
    vals = np.concatenate([diag, np.full(len(r), -1.0 / h**2)])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    A.sort_indices()
    return SparseOperator(A, True)


def assemble_divergence_form(g: Grid, a: CoefficientField) -> SparseOperator:
    """Masked finite-volume discretisation of ``-div(a grad u)``.

    Face fluxes use a11/a22 at face midpoints; the a12 cross terms use the
    symmetric centred 9-point form with a12 sampled at the four axis
    neighbours.  Exterior values are zero.
    """
    if g.ndim != 2:
        raise ValueError("divergence-form assembly needs a 2-D grid")
    h = g.h
    P = g.points
    faces = np.vstack([P + 0.5 * h * dv for dv in DIRS])
    a.check(faces)
    rows, cols, vals = [], [], []
    diag = np.zeros(g.n)
    for k, dv in enumerate(DIRS):
        a11, _, a22 = a(P + 0.5 * h * dv)
        coef = (a11 if k < 2 else a22) / h**2
        diag += coef
        j = g.nbr[:, k]
        ok = j >= 0
        rows.append(np.flatnonzero(ok))
        cols.append(j[ok])
        vals.append(-coef[ok])
    a12 = {k: a(P + h * dv)[1] for k, dv in enumerate(DIRS)}
    if any(np.any(v != 0) for v in a12.values()):
        a.check(np.vstack([P + h * dv for dv in DIRS]))
        E, W, N, S = 0, 1, 2, 3
        for (sx, sy), c in (((1, 1), -(a12[E] + a12[N])), ((-1, -1), -(a12[W] + a12[S])),
                            ((1, -1), a12[E] + a12[S]), ((-1, 1), a12[W] + a12[N])):
            j = g.index_of(g.lattice + np.array([sx, sy]))
            ok = j >= 0
            rows.append(np.flatnonzero(ok))
            cols.append(j[ok])
            vals.append(c[ok] / (4 * h**2))
    rows.append(np.arange(g.n))
    cols.append(np.arange(g.n))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(g.n, g.n))
    A.sort_indices()
    sym = abs(A - A.T).max() <= 1e-12 * abs(A).max()
    return SparseOperator(A, bool(sym))


def integrate(g: Grid, f) -> float:
    """Node-count quadrature ``h^ndim * sum f``."""
    if isinstance(f, GridField):
        if f.grid is not g:
            raise ValueError("field belongs to a different grid")
        v = f.values
    else:
        v = np.asarray(f, dtype=float)
        if v.shape != (g.n,):
            raise ValueError("field length does not match grid")
    return float(g.cell_measure * v.sum())


def default_spacing(d: Domain, fast: bool = False) -> float:
    return inner_diameter(d) / (64 if fast else 256)
