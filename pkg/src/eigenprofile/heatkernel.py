"""Spectral heat kernels, phi^2-weighted ball volumes, envelope fits and disk Green functions."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .discretize import Grid
from .geometry import Domain, PolygonDomain, inner_diameter
from .spectral import Spectrum

# 16-neighbour stencil: axis, diagonal and knight moves
STENCIL16 = np.array([
    [1, 0], [-1, 0], [0, 1], [0, -1],
    [1, 1], [1, -1], [-1, 1], [-1, -1],
    [2, 1], [2, -1], [-2, 1], [-2, -1],
    [1, 2], [1, -2], [-1, 2], [-1, -2],
])


class ShortTimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class KernelEval:
    value: np.ndarray | float
    K: int
    t: float
    tail: float  # exp(-lambda_K t)
    tail_tol: float  # bound on the neglected part of the series
    below_floor: bool = False


def _nodes(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.int64))


def tail_tolerance(spec: Spectrum, t: float, K: int) -> float:
    """Bound on sum_{j>K} e^{-lambda_j t} |phi_j(x) phi_j(y)|.

    By Cauchy-Schwarz the neglected sum is at most
    e^{-lambda_K t/2} sqrt(p(t/2,x,x) p(t/2,y,y)), and the Dirichlet kernel is
    dominated by the free one, (2 pi t)^(-ndim/2) at time t/2.
    """
    lamK = float(spec.eigenvalues[K - 1])
    return math.exp(-lamK * t / 2) * (2 * math.pi * t) ** (-spec.grid.ndim / 2)


def dirichlet_kernel(spec: Spectrum, t: float, x, y, K: int | None = None) -> KernelEval:
    """Truncated series sum_{j<=K} e^{-lambda_j t} phi_j(x) phi_j(y) at node indices."""
    if not t > 0:
        raise ValueError("t must be positive")
    K = spec.k if K is None else K
    if not 1 <= K <= spec.k:
        raise ValueError(f"K={K} exceeds the {spec.k} computed pairs")
    xi, yi = _nodes(x), _nodes(y)
    lam = spec.eigenvalues[:K]
    w = np.exp(-lam * t)
    val = np.einsum("ij,ij,j->i", spec.vectors[xi, :K], spec.vectors[yi, :K], w)
    floor = t < 0.1 / lam[-1]
    if floor:
        warnings.warn(f"t={t} below the recommended floor 0.1/lambda_K", ShortTimeWarning)
    single = np.ndim(x) == 0 and np.ndim(y) == 0
    return KernelEval(float(val[0]) if single else val, K, t, float(w[-1]), tail_tolerance(spec, t, K), floor)


@dataclass(frozen=True)
class KernelMonotonicityReport:
    max_excess: float
    violations: int
    pairs: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def kernel_monotonicity_check(spec_U: Spectrum, spec_V: Spectrum, t: float, pairs, K: int | None = None
                              ) -> KernelMonotonicityReport:
    """p_U(t,x,y) <= p_V(t,x,y) + combined tail tolerance at node pairs of U."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    gU, gV = spec_U.grid, spec_V.grid
    if abs(gU.h - gV.h) > 1e-14 * gU.h:
        raise ValueError("lattice mismatch")
    jx = gV.index_of(gU.lattice[pairs[:, 0]])
    jy = gV.index_of(gU.lattice[pairs[:, 1]])
    if np.any(jx < 0) or np.any(jy < 0):
        raise ValueError("U nodes missing from the V grid; is U a subset of V?")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShortTimeWarning)
        pU = dirichlet_kernel(spec_U, t, pairs[:, 0], pairs[:, 1], K)
        pV = dirichlet_kernel(spec_V, t, jx, jy, K)
    tol = pU.tail_tol + pV.tail_tol
    excess = pU.value - pV.value
    return KernelMonotonicityReport(float(excess.max()), int(np.sum(excess > tol)), len(pairs), tol)


def iu_ratio(spec: Spectrum, t: float, x, y, K: int | None = None, floor_C: float = 0.5,
             diam: float | None = None):
    """p_K(t,x,y) / (e^{-lambda_1 t} phi_1(x) phi_1(y)), via the gap-weighted series."""
    K = spec.k if K is None else K
    xi, yi = _nodes(x), _nodes(y)
    V = spec.vectors
    p1 = V[xi, 0] * V[yi, 0]
    if np.any(p1 <= 0):
        raise ValueError("phi_1 must be positive at x and y")
    if diam is None and spec.grid.domain is not None:
        diam = inner_diameter(spec.grid.domain)
    if diam is not None and t < floor_C * diam**2:
        warnings.warn(f"t={t} below {floor_C}*diam^2", ShortTimeWarning)
    gaps = spec.eigenvalues[1:K] - spec.eigenvalues[0]
    corr = np.einsum("ij,ij,j->i", V[xi, 1:K], V[yi, 1:K], np.exp(-gaps * t)) / p1
    out = 1.0 + corr
    return float(out[0]) if (np.ndim(x) == 0 and np.ndim(y) == 0) else out


def grid_graph16(g: Grid, d: Domain | None = None) -> sp.csr_matrix:
    """Edges of the 16-neighbour stencil whose segment lies in the closed domain."""
    cached = g.meta.get("_graph16")
    if cached is not None:
        return cached
    d = d or g.domain
    rows, cols, w = [], [], []
    for off in STENCIL16:
        j = g.index_of(g.lattice + off)
        i = np.flatnonzero(j >= 0)
        j = j[i]
        if len(i) and d is not None and not d.is_convex:
            ok = d.segment_inside(g.points[i], g.points[j])
            i, j = i[ok], j[ok]
        rows.append(i)
        cols.append(j)
        w.append(np.full(len(i), g.h * math.hypot(*off)))
    G = sp.csr_matrix((np.concatenate(w), (np.concatenate(rows), np.concatenate(cols))), shape=(g.n, g.n))
    g.meta["_graph16"] = G
    return G


def phi2_ball_volume(spec: Spectrum, d: Domain | None, x, r) -> np.ndarray | float:
    """h^2 * sum of phi_1^2 over nodes within graph-geodesic distance r of node x.

    ``x`` and ``r`` may be arrays of equal length (one source per entry).
    """
    g = spec.grid
    xs, rs = np.broadcast_arrays(_nodes(x), np.atleast_1d(np.asarray(r, dtype=float)))
    if np.any(rs <= 0):
        raise ValueError("r must be positive")
    w = g.cell_measure * spec.vectors[:, 0] ** 2
    total = float(w.sum())
    dom = d or g.domain
    diam = inner_diameter(dom) if dom is not None else math.inf
    out = np.empty(len(xs))
    G = grid_graph16(g, dom)
    for src in np.unique(xs):
        sel = np.flatnonzero(xs == src)
        small = rs[sel][rs[sel] < diam]
        dist = None
        if small.size:
            dist = dijkstra(G, directed=False, indices=int(src), limit=float(small.max()) * (1 + 1e-12))
        for s in sel:
            if rs[s] >= diam:
                out[s] = total
            else:
                out[s] = float(w[dist <= rs[s] * (1 + 1e-12)].sum())
    return float(out[0]) if (np.ndim(x) == 0 and np.ndim(r) == 0) else out


@dataclass(frozen=True)
class EnvelopeFit:
    c1: float
    c2: float
    c3: float
    c4: float
    samples: tuple  # (t, x, y) arrays
    upper_margin: np.ndarray
    lower_margin: np.ndarray
    c1_by_c2: dict = field(default_factory=dict)
    c3_by_c4: dict = field(default_factory=dict)
    metric: str = "euclidean"
    dropped: int = 0

    @property
    def success(self) -> bool:
        return all(math.isfinite(c) and c > 0 for c in (self.c1, self.c2, self.c3, self.c4))

    @property
    def ratio(self) -> float:
        return self.c1 / self.c3


C_GRID = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


def sample_envelope_points(spec: Spectrum, n: int, rng: np.random.Generator, K: int | None = None,
                           t_range: tuple | None = None, margin: float = 2.0, resolved: bool = True,
                           max_batches: int = 50):
    """Seeded (t, x, y) samples: t log-uniform, x and y uniform over interior nodes.

    With ``resolved`` the draw is repeated until ``n`` samples have a
    truncated kernel value above its tail tolerance.
    """
    from .analysis import interior_region

    K = spec.k if K is None else K
    lo, hi = t_range or (5.0 / spec.eigenvalues[K - 1], 1.0 / spec.eigenvalues[0])
    pool = np.flatnonzero(interior_region(spec.grid, margin) & (spec.vectors[:, 0] > 0))
    ts, xs, ys = [], [], []
    have = 0
    for _ in range(max_batches):
        t = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
        x = rng.choice(pool, n)
        y = rng.choice(pool, n)
        if resolved:
            ok = _resolved(spec, t, x, y, K)
            t, x, y = t[ok], x[ok], y[ok]
        ts.append(t)
        xs.append(x)
        ys.append(y)
        have += len(t)
        if have >= n:
            break
    else:
        raise RuntimeError(f"only {have} of {n} resolvable samples found")
    return np.concatenate(ts)[:n], np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def _kernel_values(spec: Spectrum, t, x, y, K: int) -> np.ndarray:
    w = np.exp(-np.outer(t, spec.eigenvalues[:K]))
    return np.einsum("ij,ij,ij->i", spec.vectors[x, :K], spec.vectors[y, :K], w)


def _resolved(spec: Spectrum, t, x, y, K: int) -> np.ndarray:
    tol = np.array([tail_tolerance(spec, ti, K) for ti in t])
    return _kernel_values(spec, t, x, y, K) > tol


def lierl_envelope_fit(spec: Spectrum, d: Domain | None, samples, K: int | None = None,
                       metric: str = "auto", c_grid=C_GRID, slack: float = 2.0) -> EnvelopeFit:
    """Fit the two-sided Gaussian envelope constants over a sample set.

    For each c2 on the grid, c1(c2) is the least constant making the upper
    bound hold; c2 is the smallest grid value with c1(c2) <= slack*c1(max c2).
    Symmetrically, c3(c4) is the largest constant for the lower bound and c4
    is the largest grid value with c3(c4) >= c3(min c4)/slack.  Samples where
    the truncated kernel does not exceed its tail tolerance are dropped.
    """
    d = d or spec.grid.domain
    t, x, y = (np.asarray(a) for a in samples)
    if metric == "auto":
        metric = "geodesic" if isinstance(d, PolygonDomain) and d.slits else "euclidean"
    P = spec.grid.points
    if metric == "geodesic":
        dist = d.geodesic_pairs(P[x], P[y])
    elif metric == "euclidean":
        dist = np.hypot(*(P[x] - P[y]).T)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    K = spec.k if K is None else K
    p = _kernel_values(spec, t, x, y, K)
    keep = _resolved(spec, t, x, y, K)
    t, x, y, dist, p = t[keep], x[keep], y[keep], dist[keep], p[keep]
    phi = spec.vectors[:, 0]
    vx = phi2_ball_volume(spec, d, x, np.sqrt(t))
    vy = phi2_ball_volume(spec, d, y, np.sqrt(t))
    base = phi[x] * phi[y] / np.sqrt(vx * vy)
    q = p / base
    c_grid = np.sort(np.asarray(c_grid, dtype=float))
    c1 = {float(c): float(np.max(q / np.exp(-dist**2 / (c * t)))) for c in c_grid}
    c3 = {float(c): float(np.min(q / np.exp(-dist**2 / (c * t)))) for c in c_grid}
    ref_hi = c1[float(c_grid[-1])]
    c2 = next(float(c) for c in c_grid if c1[float(c)] <= slack * ref_hi)
    ref_lo = c3[float(c_grid[0])]
    c4 = next(float(c) for c in c_grid[::-1] if c3[float(c)] >= ref_lo / slack)
    up = c1[c2] * base * np.exp(-dist**2 / (c2 * t)) - p
    low = p - c3[c4] * base * np.exp(-dist**2 / (c4 * t))
    return EnvelopeFit(c1[c2], c2, c3[c4], c4, (t, x, y), up, low, c1, c3, metric, int((~keep).sum()))


def green_disk(eps: float, x, y, mode: str = "interior") -> float:
    """Dirichlet Green function of B(0, eps) (or its exterior) in the plane."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not eps > 0:
        raise ValueError("eps must be positive")
    nx, ny = float(np.hypot(*x)), float(np.hypot(*y))
    if mode == "interior":
        if nx >= eps or ny >= eps:
            raise ValueError("interior mode needs both points in the open disk")
    elif mode == "exterior":
        if nx <= eps or ny <= eps:
            raise ValueError("exterior mode needs both points outside the closed disk")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    dxy = float(np.hypot(*(x - y)))
    if dxy == 0:
        raise ZeroDivisionError("Green function is singular at x = y")
    if nx == 0:
        return -math.log(ny / eps) / (2 * math.pi)
    xs = eps**2 * x / nx**2
    return (-math.log(dxy) + math.log(nx * float(np.hypot(*(y - xs))) / eps)) / (2 * math.pi)


def green_ball_formula(eps: float, x, y, n: int) -> float:
    """Ball Green function for n >= 3 (pure formula; no domain machinery)."""
    if n < 3:
        raise ValueError("use green_disk for n = 2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    omega = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    nx = float(np.linalg.norm(x))
    dxy = float(np.linalg.norm(x - y))
    if nx == 0:
        second = eps ** (2 - n)
    else:
        xs = eps**2 * x / nx**2
        second = eps ** (n - 2) / (nx ** (n - 2) * float(np.linalg.norm(y - xs)) ** (n - 2))
    return (dxy ** (2 - n) - second) / (n * (n - 2) * omega)


@dataclass(frozen=True)
class GreenLinearReport:
    eps: float
    mode: str
    ratio_min: float
    ratio_max: float
    samples: int
    bracket: tuple

    @property
    def passed(self) -> bool:
        return self.bracket[0] <= self.ratio_min and self.ratio_max <= self.bracket[1]


def green_samples(eps: float, mode: str, n_rho: int = 24, n_theta: int = 48) -> np.ndarray:
    """Polar grid of points with boundary distance in (0, 3 eps/4]."""
    rho = eps * 0.75 * (np.arange(1, n_rho + 1) / n_rho)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    R = eps - rho if mode == "interior" else eps + rho
    RR, TT = np.meshgrid(R, th)
    return np.stack([RR.ravel() * np.cos(TT.ravel()), RR.ravel() * np.sin(TT.ravel())], axis=1)


def green_linear_check(eps: float, mode: str = "interior", samples=None, bracket=(0.05, 0.5)) -> GreenLinearReport:
    """G(pole, y) * eps / rho(y) over samples with rho <= 3 eps/4.

    The pole is the center in interior mode and 2 eps e_2 in exterior mode.
    """
    Y = green_samples(eps, mode) if samples is None else np.atleast_2d(np.asarray(samples, dtype=float))
    pole = np.zeros(2) if mode == "interior" else np.array([0.0, 2 * eps])
    rho = np.abs(eps - np.hypot(*Y.T))
    if np.any(rho > 0.75 * eps * (1 + 1e-12)) or np.any(rho <= 0):
        raise ValueError("samples must satisfy 0 < rho <= 3 eps / 4")
    ratios = []
    for y, r in zip(Y, rho):
        if np.allclose(y, pole):
            continue
        ratios.append(green_disk(eps, pole, y, mode) * eps / r)
    ratios = np.array(ratios)
    return GreenLinearReport(eps, mode, float(ratios.min()), float(ratios.max()), len(ratios), tuple(bracket))
