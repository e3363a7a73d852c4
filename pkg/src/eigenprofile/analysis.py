"""Ratio statistics and empirical checks on computed eigenfunctions.

The paper-level statements are two-sided comparisons with unspecified
constants, so each check reports the measured constant alongside a pass flag
against a configured bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discretize import Grid, GridField, ResolutionError
from .geometry import Domain, PolygonDomain, inner_diameter
from .spectral import Spectrum


def node_boundary_distance(g: Grid, d: Domain | None = None) -> np.ndarray:
    """Distance from each node to the boundary of the grid's domain."""
    if g.ndim == 1:
        a = g.meta["interval"]
        x = g.points[:, 0]
        return np.minimum(x, a - x)
    d = d or g.domain
    cache = g.meta.setdefault("_rho", {})
    key = id(d)
    if key not in cache:
        cache[key] = d.boundary_distance(g.points)
    return cache[key]


def interior_region(g: Grid, margin: float = 2.0, d: Domain | None = None) -> np.ndarray:
    """Mask of nodes at distance >= margin*h from the boundary."""
    return node_boundary_distance(g, d) >= margin * g.h * (1 - 1e-12)


@dataclass(frozen=True)
class ComparisonReport:
    region: str
    count: int
    ratio_min: float
    ratio_max: float
    q01: float
    q50: float
    q99: float
    h: float
    bracket: tuple = (0.0, math.inf)

    @property
    def spread(self) -> float:
        """ratio_max / ratio_min, the scale-free comparability constant."""
        return self.ratio_max / self.ratio_min

    @property
    def passed(self) -> bool:
        lo, hi = self.bracket
        return lo <= self.spread <= hi


def _values(g: Grid, f) -> np.ndarray:
    if isinstance(f, GridField):
        if f.grid is not g and f.values.shape != (g.n,):
            raise ValueError("field grid mismatch")
        return f.values
    if callable(f):
        return np.asarray(f(g.points), dtype=float)
    v = np.asarray(f, dtype=float)
    if v.shape != (g.n,):
        raise ValueError("field length does not match grid")
    return v


def comparability_report(f: GridField, g, region=None, margin: float = 2.0,
                         bracket: tuple = (0.0, math.inf), label: str = "interior") -> ComparisonReport:
    """Ratio statistics of f/g over region nodes at distance >= margin*h from the boundary.

    ``g`` may be a field, an array, or an evaluator taking (m, 2) points.
    ``region`` is an optional boolean mask or predicate on points.
    """
    grid = f.grid
    fv = _values(grid, f)
    mask = interior_region(grid, margin) if margin > 0 else np.ones(grid.n, dtype=bool)
    if region is not None:
        mask &= region(grid.points) if callable(region) else np.asarray(region, dtype=bool)
    if not mask.any():
        raise ValueError("comparison region is empty")
    gv = np.empty(grid.n)
    idx = np.flatnonzero(mask)
    if callable(g) and not isinstance(g, GridField):
        gv[idx] = np.asarray(g(grid.points[idx]), dtype=float)
    else:
        gv = _values(grid, g)
    if np.any(gv[idx] <= 0):
        raise ValueError("reference field must be positive on the region")
    r = fv[idx] / gv[idx]
    q = np.quantile(r, [0.01, 0.5, 0.99])
    return ComparisonReport(label, int(idx.size), float(r.min()), float(r.max()),
                            float(q[0]), float(q[1]), float(q[2]), grid.h, bracket)


def common_nodes(g1: Grid, g2: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs of nodes shared by two grids on the same lattice."""
    if abs(g1.h - g2.h) > 1e-14 * g1.h:
        raise ValueError(f"lattice mismatch: h={g1.h} vs h={g2.h}")
    j = g2.index_of(g1.lattice)
    i = np.flatnonzero(j >= 0)
    return i, j[i]


@dataclass(frozen=True)
class SandwichReport:
    sup_V_over_U: float
    sup_U_over_Vc: float
    nodes_V: int
    nodes_U: int
    h: float
    caps: tuple

    @property
    def passed(self) -> bool:
        return self.sup_V_over_U <= self.caps[0] and self.sup_U_over_Vc <= self.caps[1]


def _sup_ratio(small: Spectrum, big: Spectrum, margin: float) -> tuple[float, int]:
    gs, gb = small.grid, big.grid
    i, j = common_nodes(gs, gb)
    if len(i) < gs.n:
        raise ValueError(f"{gs.n - len(i)} nodes of the inner domain are not nodes of the outer one")
    keep = interior_region(gs, margin)[i] if margin > 0 else np.ones(len(i), dtype=bool)
    i, j = i[keep], j[keep]
    r = small.vectors[i, 0] / big.vectors[j, 0]
    return float(r.max()), int(len(i))


def sandwich_check(spec_V: Spectrum, spec_U: Spectrum, spec_Vc: Spectrum, caps=(5.0, 5.0),
                   margin: float = 2.0) -> SandwichReport:
    """sup over V of phi_V/phi_U and sup over U of phi_U/phi_Vc on the shared lattice.

    Nodes closer than ``margin*h`` to the boundary of the inner domain are
    excluded from each sup.
    """
    s1, n1 = _sup_ratio(spec_V, spec_U, margin)
    s2, n2 = _sup_ratio(spec_U, spec_Vc, margin)
    return SandwichReport(s1, s2, n1, n2, spec_V.grid.h, tuple(caps))


@dataclass(frozen=True)
class SeparationReport:
    k: int
    point: tuple
    value: float
    dist: float
    product: float


def argmax_node(values: np.ndarray) -> int:
    """Smallest index among nodes within 1e-12 (relative) of the maximum."""
    m = values.max()
    return int(np.flatnonzero(values >= m - 1e-12 * abs(m))[0])


def max_separation(spec: Spectrum, d: Domain | None = None, k: int = 1) -> SeparationReport:
    if not 1 <= k <= spec.k:
        raise ValueError(f"k={k} outside the computed range 1..{spec.k}")
    v = np.abs(spec.vectors[:, k - 1])
    i = argmax_node(v)
    rho = float(node_boundary_distance(spec.grid, d)[i])
    lam = float(spec.eigenvalues[k - 1])
    return SeparationReport(k, tuple(spec.grid.points[i]), float(v[i]), rho, rho * math.sqrt(lam))


def near_max_separation(spec: Spectrum, d: Domain | None = None, epsilon: float = 0.1) -> float:
    """Min of dist*sqrt(lambda_1) over the superlevel set phi_1 >= (1-eps) max."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    phi = spec.vectors[:, 0]
    sel = phi >= (1 - epsilon) * phi.max()
    rho = node_boundary_distance(spec.grid, d)
    return float(rho[sel].min() * math.sqrt(spec.lambda1))


def beta_hypothesis_check(spec: Spectrum, d: Domain, x) -> float:
    """beta(x) = phi_1(x) * sqrt(area), at the node nearest x."""
    i = spec.grid.nearest_node(x)
    return float(spec.vectors[i, 0] * math.sqrt(d.area))


@dataclass(frozen=True)
class SupNormReport:
    lower: float  # ||phi||^2 * mu(U), at least 1 in exact arithmetic
    upper_constant: float  # ||phi||^2 * mu(V)
    passed: bool


def sup_norm_bounds(spec_U: Spectrum, mu_U: float, mu_V: float, tol: float = 0.05) -> SupNormReport:
    m2 = float(np.max(np.abs(spec_U.vectors[:, 0]))) ** 2
    return SupNormReport(m2 * mu_U, m2 * mu_V, m2 * mu_U >= 1 - tol)


def interior_oscillation(spec: Spectrum, d: Domain, delta: float) -> float:
    """sup/inf of phi_1 over nodes at distance >= 2*delta*diam from the boundary."""
    diam = inner_diameter(d)
    rho = node_boundary_distance(spec.grid, d)
    sel = rho >= 2 * delta * diam
    if not sel.any():
        raise ValueError(f"V(delta) is empty for delta={delta}")
    phi = spec.vectors[sel, 0]
    return float(phi.max() / phi.min())


@dataclass(frozen=True)
class CarlesonReport:
    A_emp: float
    witness: tuple
    witness_dist: float
    c0_used: float
    relaxations: int
    ball_nodes: int
    C2: float
    r_ok: bool


def _distances_from(d: Domain, xi: np.ndarray, P: np.ndarray) -> np.ndarray:
    if isinstance(d, PolygonDomain) and not d.is_convex:
        return d.geodesic_pairs(np.repeat(xi[None], len(P), axis=0), P)
    return np.hypot(*(P - xi).T)


def carleson_check(spec: Spectrum, d: Domain, xi, r: float, c0: float = 0.1, C2: float = 0.25,
                   max_relax: int = 8) -> CarlesonReport:
    """Empirical boundary Harnack constant max_{B(xi,r)} phi / phi(x_r).

    The witness x_r is the node of the closed ball B(xi, r/4) farthest from
    the boundary, required to have boundary distance at least c0*r/8; c0 is
    halved until a witness node exists.  Taking the farthest node rather than
    a band around r/4 keeps the witness fixed under lattice refinement.
    """
    g = spec.grid
    xi = np.asarray(xi, dtype=float)
    diam = inner_diameter(d)
    P = g.points
    dist = _distances_from(d, xi, P)
    rho = node_boundary_distance(g, d)
    phi = spec.vectors[:, 0]
    ball = dist < r
    if not ball.any():
        raise ResolutionError(f"no nodes in B(xi, {r}) at h={g.h}")
    near = dist <= r / 4 * (1 + 1e-12)
    c = c0
    for relax in range(max_relax + 1):
        cand = np.flatnonzero(near & (rho >= c * r / 8))
        if cand.size:
            w = cand[argmax_node(rho[cand])]
            return CarlesonReport(float(phi[ball].max() / phi[w]), tuple(P[w]), float(dist[w]), c, relax,
                                  int(ball.sum()), C2, r < C2 * diam)
        c /= 2
    raise ResolutionError(f"no witness node within {r / 4} of {tuple(xi)} at h={g.h}")


def refinement_change(a: float, b: float) -> float:
    """Relative change |b - a| / |a|."""
    return abs(b - a) / abs(a)
