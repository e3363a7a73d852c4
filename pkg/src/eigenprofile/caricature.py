"""Closed-form caricature functions for principal Dirichlet eigenfunctions.

Every evaluator accepts a single point or an ``(m, 2)`` array and returns a
float or an array accordingly.  Values are the bare expressions; they are
comparable to the normalised eigenfunction only up to two-sided constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    EllipseDomain,
    PerturbedTriangle,
    PolygonDomain,
    _as_points,
    _convex_region_distance,
    build_regular_polygon,
    build_rounded_square,
    build_rounded_triangle,
    triangle_opposite_side,
)

KINDS = (
    "interval", "triangle", "perturbed_triangle", "generic_polygon",
    "regular_polygon", "ellipse", "rounded_square", "rounded_triangle",
)


@dataclass(frozen=True)
class CaricatureSpec:
    """A caricature kind plus its parameters; ``evaluate`` dispatches."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown caricature kind {self.kind!r}")

    def evaluate(self, p):
        fn = {
            "interval": phi_interval,
            "triangle": phi_triangle,
            "perturbed_triangle": phi_perturbed_triangle,
            "generic_polygon": phi_polygon,
            "regular_polygon": phi_regular_polygon,
            "ellipse": phi_ellipse,
            "rounded_square": phi_rounded_square,
            "rounded_triangle": phi_rounded_triangle,
        }[self.kind]
        return fn(p=p, **self.params)


def _ret(v: np.ndarray, single: bool):
    return float(v[0]) if single else v


def phi_interval(a: float, x):
    """``2 sqrt(2) a^(-3/2) min(x, a - x)`` on (0, a)."""
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr <= 0) | (x_arr >= a)):
        raise ValueError("x must lie in the open interval (0, a)")
    v = 2 * math.sqrt(2) * a**-1.5 * np.minimum(x_arr, a - x_arr)
    return float(v) if v.ndim == 0 else v


def _require_closure(d, P, what="point"):
    if not np.all(d.closure_contains(P)):
        raise ValueError(f"{what} outside the domain")


def triangle_exponents(T: PolygonDomain) -> np.ndarray:
    """``pi/alpha_i - 2`` for the three angles."""
    return math.pi / T.angles - 2


def _triangle_expr(T: PolygonDomain, P: np.ndarray) -> np.ndarray:
    # d[:, i] = distance to the side opposite vertex i
    d = np.stack([T.side_distance(P, triangle_opposite_side(i)) for i in range(3)], axis=1)
    e = triangle_exponents(T)
    V = T.vertices
    diam = float(np.max(np.hypot(*(V - np.roll(V, 1, axis=0)).T)))
    val = d.prod(axis=1)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        s = d[:, j] + d[:, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(s > 0, s ** e[i], 0.0)
        val = val * fac
    return val / diam ** (float(np.sum(math.pi / T.angles)) - 2)


def phi_triangle(T: PolygonDomain, p):
    P, single = _as_points(p)
    if len(T.vertices) != 3 or T.slits:
        raise ValueError("expected a triangle")
    _require_closure(T, P)
    return _ret(_triangle_expr(T, P), single)


def phi_polygon(P: PolygonDomain, p, r: float | None = None, metric: str = "geodesic"):
    """Generic polygon caricature with side distances ``d_i`` and angles ``alpha_i``.

    ``alpha_i`` is the angle between sides i and i+1; ``r`` defaults to the
    geometric mean of the side lengths.
    """
    X, single = _as_points(p)
    _require_closure(P, X)
    N = P.n_sides
    L = P.loop
    lengths = np.hypot(*(np.roll(L, -1, axis=0) - L).T)
    if r is None:
        r = float(np.exp(np.mean(np.log(lengths))))
    alpha = np.roll(P.angles, -1)  # alpha[i] between sides i and i+1
    if metric == "geodesic":
        d = np.stack([P.geodesic_to_side(X, i) for i in range(N)], axis=1)
    elif metric == "euclidean":
        d = np.stack([P.side_distance(X, i) for i in range(N)], axis=1)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    e = math.pi / alpha - 2
    val = d.prod(axis=1)
    for i in range(N):
        s = d[:, i] + d[:, (i + 1) % N]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = val * np.where(s > 0, s ** e[i], 0.0)
    val = np.where(np.isfinite(val), val, 0.0)
    return _ret(val / r ** (float(np.sum(math.pi / alpha)) - N + 1), single)


@dataclass(frozen=True)
class PolygonAssumptionReport:
    side_ratio: float
    min_angle: float
    side_ratio_ok: bool
    angle_ok: bool

    @property
    def ok(self) -> bool:
        return self.side_ratio_ok and self.angle_ok


def check_polygon_assumptions(P: PolygonDomain, r: float | None = None, C: float = 4.0,
                              alpha_min: float = math.pi / 12) -> PolygonAssumptionReport:
    """Comparable side lengths (``r/C <= l_i <= C r``) and an angle floor."""
    L = P.loop
    lengths = np.hypot(*(np.roll(L, -1, axis=0) - L).T)
    if r is None:
        r = float(np.exp(np.mean(np.log(lengths))))
    ratio = float(max(lengths.max() / r, r / lengths.min()))
    amin = float(P.angles.min())
    return PolygonAssumptionReport(ratio, amin, ratio <= C, amin > alpha_min)


def phi_regular_polygon(n: int, l: float, p, center=(0.0, 0.0)):
    """Min-based regular polygon caricature; sides as in ``build_regular_polygon``."""
    P = build_regular_polygon(n, l, center)
    X, single = _as_points(p)
    _require_closure(P, X)
    d = np.stack([P.side_distance(X, i) for i in range(n)], axis=1)
    dn = np.roll(d, -1, axis=1)
    prod = (d * dn).min(axis=1)
    s = (d + dn).min(axis=1)
    e = n / (n - 2) - 2
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(s > 0, s**e, 0.0)
    return _ret(prod * fac / (n * l) ** (n / (n - 2) + 1), single)


def phi_ellipse(E: EllipseDomain, p):
    X, single = _as_points(p)
    _require_closure(E, X)
    return _ret(E.boundary_distance(X) / (2 * E.semi_axes[0]) ** 2, single)


def square_mode(l: float) -> Callable[[np.ndarray], np.ndarray]:
    """Normalised principal eigenfunction of [-l, l]^2."""
    def f(P):
        return np.cos(math.pi * P[:, 0] / (2 * l)) * np.cos(math.pi * P[:, 1] / (2 * l)) / l
    return f


def phi_rounded_square(l: float, eps: float, p, phiV: Callable | None = None):
    """``rho/(rho + eps) * phi_V(clamped point)`` for the rounded square around [-l, l]^2."""
    if not (0 < eps <= l * math.sqrt(2) * (1 + 1e-12)):
        raise ValueError(f"eps must lie in (0, {l * math.sqrt(2)}]")
    U = build_rounded_square(l, eps)
    X, single = _as_points(p)
    _require_closure(U, X)
    c = max(l - eps / math.sqrt(2), 0.0)
    Xe = np.clip(X, -c, c)
    rho = U.boundary_distance(X)
    phiV = phiV or square_mode(l)
    return _ret(rho / (rho + eps) * phiV(Xe), single)


def shrunken_triangle(T: PolygonDomain, eps: float) -> np.ndarray:
    """Vertices moved distance eps along the interior angle bisectors."""
    V = T.vertices
    out = np.empty_like(V)
    for i in range(3):
        a = V[(i + 1) % 3] - V[i]
        b = V[(i - 1) % 3] - V[i]
        u = a / np.hypot(*a) + b / np.hypot(*b)
        out[i] = V[i] + eps * u / np.hypot(*u)
    a, b = out[1] - out[0], out[2] - out[0]
    if (a[0] * b[1] - a[1] * b[0] <= 0
            or not np.all(T.closure_contains(out))):
        raise ValueError(f"eps={eps} too large: the shrunken triangle degenerates")
    inr = 2 * T.area / T.perimeter
    # the shrunken triangle must sit inside T with matching orientation
    if eps >= inr / math.sin(float(T.angles.min()) / 2):
        raise ValueError(f"eps={eps} too large for this triangle")
    return out


def closest_in_triangle(tri: np.ndarray, P: np.ndarray) -> np.ndarray:
    dreg, _, inside = _convex_region_distance(P, tri)
    out = P.copy()
    A, B = tri, np.roll(tri, -1, axis=0)
    for j in np.flatnonzero(~inside):
        best, bd = None, np.inf
        for a, b in zip(A, B):
            ab = b - a
            t = np.clip((P[j] - a) @ ab / (ab @ ab), 0, 1)
            q = a + t * ab
            dq = np.hypot(*(P[j] - q))
            if dq < bd:
                best, bd = q, dq
        out[j] = best
    return out


def phi_rounded_triangle(T: PolygonDomain, eps: float, p, phiT: Callable | None = None):
    """``rho/(rho + eps) * Phi_T(x_eps)`` on the eps-neighbourhood of T."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    U = build_rounded_triangle(T, eps)
    X, single = _as_points(p)
    _require_closure(U, X)
    tri = shrunken_triangle(T, eps)
    Xe = closest_in_triangle(tri, X)
    rho = U.boundary_distance(X)
    core = _triangle_expr(T, Xe) if phiT is None else phiT(Xe)
    return _ret(rho / (rho + eps) * core, single)


def bump_expression(U: PerturbedTriangle, P: np.ndarray) -> np.ndarray:
    """Rational prefactor in d_1..d_4 and eps near the bump."""
    d = U.bump_distances(P)
    d1, d2, d3, d4 = d.T
    e = U.eps
    num = d1 * d2 * d3 * d4 * (d2 + d3) * (d1 + d2 + e) ** 1.25 * (d3 + d4 + e) ** 1.25
    den = (d1 + e) * (d2 + e) * (d3 + e) * (d4 + e) * (d2 + d3 + e) * (d1 + d2) ** 1.25 * (d3 + d4) ** 1.25
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out


def phi_perturbed_triangle(U: PerturbedTriangle, phiT_at_xeps: float, p, phiT: Callable | None = None,
                           branch: str = "auto"):
    """Two-branch caricature for a triangle with one small outward bump.

    ``branch='bump'`` uses the rational expression times ``phiT_at_xeps``;
    ``branch='triangle'`` uses ``phiT`` (default: the triangle caricature);
    ``'auto'`` picks the bump branch inside 2B, B the eps-ball at the bump
    centroid, and the triangle branch elsewhere.
    """
    if not isinstance(U, PerturbedTriangle):
        raise TypeError("expected a domain from build_perturbed_triangle")
    T = U.triangle
    l = U._side_length
    if not (0 < U.eps < l / 2):
        raise ValueError("eps out of range")
    X, single = _as_points(p)
    _require_closure(U, X)
    phiT = phiT or (lambda Q: _triangle_expr(T, Q))
    r = np.hypot(*(X - U.bump_centroid).T)
    if branch == "auto":
        use_bump = r < 2 * U.eps
    elif branch == "bump":
        use_bump = np.ones(len(X), dtype=bool)
    elif branch == "triangle":
        use_bump = np.zeros(len(X), dtype=bool)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    out = np.empty(len(X))
    if use_bump.any():
        out[use_bump] = bump_expression(U, X[use_bump]) * phiT_at_xeps
    tri = ~use_bump
    if tri.any():
        if not np.all(T.closure_contains(X[tri])):
            raise ValueError("triangle branch requested outside the triangle")
        out[tri] = phiT(X[tri])
    return _ret(out, single)
