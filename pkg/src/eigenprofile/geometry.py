"""Planar domains and the geometric queries the solvers and caricatures need.

Three concrete shapes are supported: polygons (optionally with slits attached
to the outer boundary), ellipses, and rounded convex polygons (an offset of a
convex core polygon).  Every domain is immutable.  The vectorised methods on
the classes take ``(m, 2)`` arrays; the module-level functions mirror the
single-point API used in the rest of the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.sparse.csgraph import shortest_path


class DegenerateDomainError(ValueError):
    """Raised for domains with (numerically) empty interior."""


class Point2(NamedTuple):
    x: float
    y: float


AREA_TOL = 1e-12


def _as_points(p) -> tuple[np.ndarray, bool]:
    arr = np.asarray(p, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != 2:
        raise ValueError(f"expected points with 2 coordinates, got shape {arr.shape}")
    return arr, single


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _point_segment_dist(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distances from points ``P`` (m,2) to segments ``A->B`` (s,2); shape (m, s)."""
    P = P[:, None, :]
    AB = (B - A)[None, :, :]
    AP = P - A[None, :, :]
    L2 = np.einsum("...i,...i->...", AB, AB)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(L2 > 0, np.einsum("...i,...i->...", AP, AB) / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    D = AP - t[..., None] * AB
    return np.sqrt(np.einsum("...i,...i->...", D, D))


def _closest_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0 else float(np.clip((p - a) @ ab / L2, 0.0, 1.0))
    return a + t * ab


def _chunked_min_dist(P: np.ndarray, A: np.ndarray, B: np.ndarray, chunk: int = 20000) -> np.ndarray:
    out = np.empty(len(P))
    for i in range(0, len(P), chunk):
        out[i : i + chunk] = _point_segment_dist(P[i : i + chunk], A, B).min(axis=1)
    return out


def _shoelace(V: np.ndarray) -> float:
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class Domain:
    """Common interface of all bounded planar domains."""

    labels: dict

    # --- vectorised primitives implemented by subclasses -------------------
    def contains_points(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, P: np.ndarray) -> np.ndarray:
        """Unsigned distance to the boundary, valid inside and outside."""
        raise NotImplementedError

    def ray_exit(self, P: np.ndarray, direction, tmax: float) -> np.ndarray:
        """First boundary hit along ``P + t*direction`` for t in (0, tmax]; tmax if none."""
        raise NotImplementedError

    def segment_inside(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Whether each closed segment A_i B_i lies in the closure of the domain."""
        raise NotImplementedError

    def scaled(self, c: float, center) -> "Domain":
        raise NotImplementedError

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    @property
    def area(self) -> float:
        raise NotImplementedError

    @property
    def is_convex(self) -> bool:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)

    def closure_contains(self, P: np.ndarray) -> np.ndarray:
        tol = 1e-10 * self.scale
        return self.contains_points(P) | (self.boundary_distance(P) <= tol)


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolygonDomain(Domain):
    """Simple polygon, counterclockwise, with optional slits.

    Each slit is a segment with one endpoint on the outer boundary and the
    other strictly inside.  For side and angle bookkeeping the slit is
    spliced into the boundary loop and traversed twice, so a square with one
    slit has 7 sides and 7 angles (the slit tip has angle 2*pi).
    """

    vertices: np.ndarray
    slits: tuple = ()
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise DegenerateDomainError("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(V)):
            raise ValueError("non-finite vertex coordinates")
        a = _shoelace(V)
        span = V.max(axis=0) - V.min(axis=0)
        if abs(a) < AREA_TOL * max(span[0] * span[1], 1e-300) or abs(a) == 0:
            raise DegenerateDomainError(f"polygon area {abs(a):.3g} below tolerance")
        if a < 0:
            V = V[::-1].copy()
        edges = np.roll(V, -1, axis=0) - V
        if np.any(np.hypot(edges[:, 0], edges[:, 1]) <= 1e-14 * np.hypot(*span)):
            raise DegenerateDomainError("polygon has a zero-length side")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        slits = tuple(np.array(s, dtype=float).reshape(2, 2) for s in self.slits)
        for s in slits:
            s.setflags(write=False)
        object.__setattr__(self, "slits", slits)
        object.__setattr__(self, "labels", dict(self.labels))
        if slits:
            self.loop  # validates slit attachment

    # --- structure --------------------------------------------------------
    @property
    def bbox(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @cached_property
    def _outer_segments(self) -> tuple[np.ndarray, np.ndarray]:
        V = self.vertices
        return V, np.roll(V, -1, axis=0)

    @cached_property
    def _all_segments(self) -> tuple[np.ndarray, np.ndarray]:
        A, B = self._outer_segments
        if self.slits:
            A = np.vstack([A] + [s[0:1] for s in self.slits])
            B = np.vstack([B] + [s[1:2] for s in self.slits])
        return A, B

    @cached_property
    def loop(self) -> np.ndarray:
        """Boundary loop with slits spliced in (each slit traversed out and back)."""
        V = [tuple(v) for v in self.vertices]
        tol = 1e-10 * self.scale
        for s in self.slits:
            e0, e1 = s[0], s[1]
            d0 = _point_segment_dist(e0[None], *self._outer_segments).min()
            d1 = _point_segment_dist(e1[None], *self._outer_segments).min()
            if d1 < d0:
                e0, e1 = e1, e0
                d0, d1 = d1, d0
            if d0 > tol or d1 <= tol:
                raise DegenerateDomainError("each slit needs exactly one endpoint on the outer boundary")
            if not self._contains_no_slit(e1[None])[0]:
                raise DegenerateDomainError("slit tip must lie inside the polygon")
            W = np.array(V)
            hit = np.flatnonzero(np.hypot(*(W - e0).T) <= tol)
            if hit.size:
                pos = int(hit[0])
            else:
                dist = _point_segment_dist(e0[None], W, np.roll(W, -1, axis=0))[0]
                k = int(np.argmin(dist))
                V.insert(k + 1, tuple(e0))
                pos = k + 1
            V[pos + 1 : pos + 1] = [tuple(e1), tuple(e0)]
        return np.array(V)

    @property
    def sides(self) -> list[tuple[int, np.ndarray]]:
        L = self.loop
        return [(i, np.array([L[i], L[(i + 1) % len(L)]])) for i in range(len(L))]

    @cached_property
    def angles(self) -> np.ndarray:
        """Interior angle at each loop vertex; angle i sits between sides i-1 and i."""
        L = self.loop
        e_in = L - np.roll(L, 1, axis=0)
        e_out = np.roll(L, -1, axis=0) - L
        cr = _cross(e_in, e_out)
        dt = np.einsum("ij,ij->i", e_in, e_out)
        turn = np.arctan2(cr, dt)
        ang = math.pi - turn
        reverse = (np.abs(cr) <= 1e-12 * np.hypot(*e_in.T) * np.hypot(*e_out.T)) & (dt < 0)
        ang[reverse] = 2 * math.pi
        return ang

    @property
    def n_sides(self) -> int:
        return len(self.loop)

    @property
    def area(self) -> float:
        return abs(_shoelace(self.vertices))

    @property
    def perimeter(self) -> float:
        A, B = self._all_segments
        return float(np.sum(np.hypot(*(B - A).T)))

    @cached_property
    def is_convex(self) -> bool:
        if self.slits:
            return False
        return bool(np.all(self.angles <= math.pi + 1e-9))

    @cached_property
    def reflex_points(self) -> np.ndarray:
        L = self.loop
        mask = self.angles > math.pi + 1e-9
        return np.unique(L[mask], axis=0) if mask.any() else np.zeros((0, 2))

    # --- membership and distances --------------------------------------------
    def _contains_no_slit(self, P: np.ndarray) -> np.ndarray:
        V = self.vertices
        x, y = P[:, 0][:, None], P[:, 1][:, None]
        x1, y1 = V[:, 0][None, :], V[:, 1][None, :]
        W = np.roll(V, -1, axis=0)
        x2, y2 = W[:, 0][None, :], W[:, 1][None, :]
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside = np.count_nonzero(cond & (x < xint), axis=1) % 2 == 1
        return inside

    def contains_points(self, P):
        P, _ = _as_points(P)
        out = np.zeros(len(P), dtype=bool)
        tol = 1e-10 * self.scale
        for i in range(0, len(P), 20000):
            chunk = P[i : i + 20000]
            inside = self._contains_no_slit(chunk)
            inside &= _point_segment_dist(chunk, *self._all_segments).min(axis=1) > tol
            out[i : i + 20000] = inside
        return out

    def boundary_distance(self, P):
        P, _ = _as_points(P)
        return _chunked_min_dist(P, *self._all_segments)

    def side_distance(self, P, side_id: int) -> np.ndarray:
        P, _ = _as_points(P)
        seg = self.side_segment(side_id)
        return _point_segment_dist(P, seg[0:1], seg[1:2])[:, 0]

    def side_segment(self, side_id: int) -> np.ndarray:
        n = self.n_sides
        if not (0 <= int(side_id) < n):
            raise IndexError(f"side_id {side_id} out of range for {n} sides")
        L = self.loop
        return np.array([L[side_id], L[(side_id + 1) % n]])

    def ray_exit(self, P, direction, tmax):
        P, _ = _as_points(P)
        d = np.asarray(direction, dtype=float)
        A, B = self._all_segments
        E = B - A
        tol = 1e-12 * self.scale
        out = np.full(len(P), float(tmax))
        for i in range(0, len(P), 20000):
            Q = P[i : i + 20000][:, None, :]
            AP = A[None] - Q
            denom = _cross(d, E)[None, :]
            num_t = _cross(AP, E[None])
            num_s = _cross(AP, d)
            par = np.abs(denom) <= 1e-14 * np.hypot(*E.T)[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = num_t / denom
                s = num_s / denom
            ok = (~par) & (s >= -1e-12) & (s <= 1 + 1e-12) & (t > tol)
            t = np.where(ok, t, np.inf)
            # collinear overlap: first segment endpoint ahead on the ray
            col = par & (np.abs(num_s) <= 1e-12 * self.scale * np.hypot(*E.T)[None, :] + 1e-300)
            if col.any():
                ta = np.einsum("ijk,k->ij", AP, d)
                tb = np.einsum("ijk,k->ij", B[None] - Q, d)
                lo = np.minimum(ta, tb)
                hi = np.maximum(ta, tb)
                tc = np.where(lo > tol, lo, np.where(hi > tol, tol, np.inf))
                t = np.where(col, np.minimum(t, tc), t)
            out[i : i + 20000] = np.minimum(t.min(axis=1), tmax)
        return out

    def _proper_crossings(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        SA, SB = self._all_segments
        tol = 1e-12 * self.scale**2
        out = np.zeros(len(A), dtype=bool)
        for i in range(0, len(A), 5000):
            a = A[i : i + 5000][:, None, :]
            b = B[i : i + 5000][:, None, :]
            o1 = _cross(b - a, SA[None] - a)
            o2 = _cross(b - a, SB[None] - a)
            o3 = _cross(SB[None] - SA[None], a - SA[None])
            o4 = _cross(SB[None] - SA[None], b - SA[None])
            cross = (o1 * o2 < 0) & (o3 * o4 < 0) & (np.abs(o1) > tol) & (np.abs(o2) > tol) & (np.abs(o3) > tol) & (np.abs(o4) > tol)
            out[i : i + 5000] = cross.any(axis=1)
        return out

    def segment_inside(self, A, B):
        A, _ = _as_points(A)
        B, _ = _as_points(B)
        ok = ~self._proper_crossings(A, B)
        if not ok.any():
            return ok
        idx = np.flatnonzero(ok)
        L = self.loop
        tol = 1e-10 * self.scale
        a, b = A[idx], B[idx]
        ab = b - a
        L2 = np.einsum("ij,ij->i", ab, ab)
        mids = 0.5 * (a + b)
        good = self.closure_contains(mids)
        # segments passing exactly through boundary vertices: check every piece
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.einsum("imk,ik->im", L[None] - a[:, None], ab) / L2[:, None]
            perp = np.abs(_cross(ab[:, None, :], L[None] - a[:, None])) / np.sqrt(L2)[:, None]
        touch = (perp <= tol) & (t > 1e-9) & (t < 1 - 1e-9)
        for j in np.flatnonzero(touch.any(axis=1) & good):
            ts = np.unique(np.concatenate([[0.0, 1.0], t[j][touch[j]]]))
            mid_t = 0.5 * (ts[:-1] + ts[1:])
            pts = a[j] + mid_t[:, None] * ab[j]
            good[j] = bool(self.closure_contains(pts).all())
        ok[idx] = good
        return ok

    # --- geodesics ---------------------------------------------------------
    @cached_property
    def _reflex_graph(self) -> np.ndarray:
        R = self.reflex_points
        n = len(R)
        if n == 0:
            return np.zeros((0, 0))
        I, J = np.triu_indices(n, 1)
        vis = self.segment_inside(R[I], R[J])
        W = np.zeros((n, n))
        d = np.hypot(*(R[I] - R[J]).T)
        W[I[vis], J[vis]] = d[vis]
        W[J[vis], I[vis]] = d[vis]
        # zero-length edges are not representable in csgraph; nudge
        W[(W == 0) & ~np.eye(n, dtype=bool) & False] = 0
        D = shortest_path(W, directed=False)
        return D

    def _to_reflex(self, P: np.ndarray) -> np.ndarray:
        """Straight-line distances from P to visible reflex points (inf if blocked)."""
        R = self.reflex_points
        if len(R) == 0:
            return np.zeros((len(P), 0))
        PP = np.repeat(P, len(R), axis=0)
        RR = np.tile(R, (len(P), 1))
        vis = self.segment_inside(PP, RR).reshape(len(P), len(R))
        d = np.hypot(*(PP - RR).T).reshape(len(P), len(R))
        return np.where(vis, d, np.inf)

    def geodesic_pairs(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """Geodesic distance between P_i and Q_i (closed domain)."""
        P, _ = _as_points(P)
        Q, _ = _as_points(Q)
        euc = np.hypot(*(P - Q).T)
        if self.is_convex:
            return euc
        vis = self.segment_inside(P, Q)
        out = np.where(vis, euc, np.inf)
        if (~vis).any() and len(self.reflex_points):
            idx = np.flatnonzero(~vis)
            dp = self._to_reflex(P[idx])
            dq = self._to_reflex(Q[idx])
            D = self._reflex_graph
            via = (dp[:, :, None] + D[None] + dq[:, None, :]).min(axis=(1, 2))
            out[idx] = via
        return out

    def geodesic_to_side(self, P, side_id: int) -> np.ndarray:
        P, _ = _as_points(P)
        seg = self.side_segment(side_id)
        if self.is_convex:
            return _point_segment_dist(P, seg[0:1], seg[1:2])[:, 0]

        n = self.n_sides
        L = self.loop

        def in_wedge(j, v):
            # direction v leaves loop vertex j into the interior angle there
            e_out = L[(j + 1) % n] - L[j]
            ang = np.mod(np.arctan2(_cross(e_out, v), v @ e_out), 2 * math.pi)
            tol = 1e-9
            return (ang >= -tol) & ((ang <= self.angles[j] + tol) | (ang >= 2 * math.pi - tol))

        def direct(X):
            # the last leg must reach the side from its interior face
            best = np.full(len(X), np.inf)
            a, b = seg
            ab = b - a
            L2 = float(ab @ ab)
            t = (X - a) @ ab / L2
            foot = a + np.clip(t, 0.0, 1.0)[:, None] * ab
            on_face = (t > 0) & (t < 1) & (_cross(ab, X - a) > 0)
            cand = [(foot, on_face),
                    (np.broadcast_to(a, X.shape), in_wedge(side_id, X - a)),
                    (np.broadcast_to(b, X.shape), in_wedge((side_id + 1) % n, X - b))]
            for target, face_ok in cand:
                target = np.ascontiguousarray(target)
                d = np.hypot(*(X - target).T)
                vis = np.ones(len(X), dtype=bool)
                nz = d > 1e-14 * self.scale
                vis[nz] = self.segment_inside(X[nz], target[nz])
                ok = vis & (face_ok | ~nz)
                best = np.minimum(best, np.where(ok, d, np.inf))
            return best

        out = direct(P)
        R = self.reflex_points
        if len(R):
            eR = direct(R)
            via_R = (self._reflex_graph + eR[None, :]).min(axis=1)
            dp = self._to_reflex(P)
            out = np.minimum(out, (dp + via_R[None, :]).min(axis=1))
        return out

    def scaled(self, c, center):
        c0 = np.asarray(center, dtype=float)
        return PolygonDomain(
            c0 + c * (self.vertices - c0),
            tuple(c0 + c * (s - c0) for s in self.slits),
            labels=self.labels,
        )


# ---------------------------------------------------------------------------
# ellipses
# ---------------------------------------------------------------------------


def _ellipse_dist_first_quadrant(a: float, b: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Distance from (x, y), x,y >= 0, to the ellipse x^2/a^2 + y^2/b^2 = 1 (a >= b)."""
    out = np.empty_like(x)
    if a == b:
        return np.abs(a - np.hypot(x, y))
    ypos = y > 0
    # generic case: root of F(t) = (a x/(t+a^2))^2 + (b y/(t+b^2))^2 - 1 on t > -b^2
    xs, ys = x[ypos], y[ypos]
    lo = -b * b + b * ys
    hi = np.sqrt(a * a * xs * xs + b * b * ys * ys)
    for _ in range(120):
        t = 0.5 * (lo + hi)
        F = (a * xs / (t + a * a)) ** 2 + (b * ys / (t + b * b)) ** 2 - 1
        pos = F > 0
        lo = np.where(pos, t, lo)
        hi = np.where(pos, hi, t)
    t = 0.5 * (lo + hi)
    px = a * a * xs / (t + a * a)
    py = b * b * ys / (t + b * b)
    out[ypos] = np.hypot(xs - px, ys - py)
    # y == 0
    xz = x[~ypos]
    thresh = (a * a - b * b) / a
    inner = xz < thresh
    px = a * a * xz / (a * a - b * b)
    py = b * np.sqrt(np.clip(1 - (px / a) ** 2, 0, None))
    d_in = np.hypot(xz - px, py)
    out[~ypos] = np.where(inner, d_in, np.abs(xz - a))
    return out


@dataclass(frozen=True, eq=False)
class EllipseDomain(Domain):
    center: tuple = (0.0, 0.0)
    semi_axes: tuple = (1.0, 1.0)
    rotation: float = 0.0
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a, b = (float(v) for v in self.semi_axes)
        if not (a >= b > 0):
            raise ValueError(f"semi-axes must satisfy a >= b > 0, got {(a, b)}")
        object.__setattr__(self, "semi_axes", (a, b))
        object.__setattr__(self, "center", Point2(*map(float, self.center)))
        object.__setattr__(self, "labels", dict(self.labels))

    def _local(self, P):
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        Q = P - np.asarray(self.center)
        return np.stack([c * Q[:, 0] + s * Q[:, 1], -s * Q[:, 0] + c * Q[:, 1]], axis=1)

    @property
    def bbox(self):
        a, b = self.semi_axes
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        hx = math.hypot(a * c, b * s)
        hy = math.hypot(a * s, b * c)
        return (self.center.x - hx, self.center.y - hy, self.center.x + hx, self.center.y + hy)

    @property
    def area(self):
        a, b = self.semi_axes
        return math.pi * a * b

    @property
    def is_convex(self):
        return True

    def contains_points(self, P):
        P, _ = _as_points(P)
        Q = self._local(P)
        a, b = self.semi_axes
        inside = (Q[:, 0] / a) ** 2 + (Q[:, 1] / b) ** 2 < 1
        return inside & (self.boundary_distance(P) > 1e-10 * self.scale)

    def boundary_distance(self, P):
        P, _ = _as_points(P)
        Q = np.abs(self._local(P))
        a, b = self.semi_axes
        return _ellipse_dist_first_quadrant(a, b, Q[:, 0], Q[:, 1])

    def ray_exit(self, P, direction, tmax):
        P, _ = _as_points(P)
        a, b = self.semi_axes
        Q = self._local(P)
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        dx, dy = direction
        ux, uy = c * dx + s * dy, -s * dx + c * dy
        A = (ux / a) ** 2 + (uy / b) ** 2
        B = 2 * (Q[:, 0] * ux / a**2 + Q[:, 1] * uy / b**2)
        C = (Q[:, 0] / a) ** 2 + (Q[:, 1] / b) ** 2 - 1
        disc = np.sqrt(np.clip(B * B - 4 * A * C, 0, None))
        t = (-B + disc) / (2 * A)
        return np.minimum(np.where(t > 0, t, tmax), tmax)

    def segment_inside(self, A, B):
        A, _ = _as_points(A)
        B, _ = _as_points(B)
        return self.closure_contains(A) & self.closure_contains(B)

    def scaled(self, c, center):
        c0 = np.asarray(center, dtype=float)
        ctr = c0 + c * (np.asarray(self.center) - c0)
        a, b = self.semi_axes
        return EllipseDomain(tuple(ctr), (c * a, c * b), self.rotation, labels=self.labels)


# ---------------------------------------------------------------------------
# rounded convex polygons
# ---------------------------------------------------------------------------


def _convex_region_distance(P: np.ndarray, core: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(distance to the filled convex core, distance to its boundary); core may be degenerate."""
    A, B = core, np.roll(core, -1, axis=0)
    dB = _chunked_min_dist(P, A, B)
    if len(core) >= 3 and abs(_shoelace(core)) > 0:
        E = B - A
        inside = np.all(_cross(E[None], P[:, None, :] - A[None]) >= 0, axis=1)
    else:
        inside = np.zeros(len(P), dtype=bool)
    return np.where(inside, 0.0, dB), dB, inside


@dataclass(frozen=True, eq=False)
class RoundedDomain(Domain):
    """Offset of a convex polygon by ``epsilon``.

    ``mode='epsilon_neighborhood'``: the epsilon-neighbourhood of ``base``.
    ``mode='corner_quarter_circles'`` (rectangles only): the core is ``base``
    with each vertex pulled in along its bisector by ``epsilon`` so that each
    rounded corner is a quarter circle of radius epsilon through the original
    vertex; the sides move out by ``epsilon*(1 - 1/sqrt 2)`` and the domain
    becomes the circumscribed disk when the core collapses.
    """

    base: PolygonDomain
    mode: str = "epsilon_neighborhood"
    epsilon: float = 0.1
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.base.is_convex:
            raise ValueError("rounded domains need a convex base polygon")
        if self.mode not in ("epsilon_neighborhood", "corner_quarter_circles"):
            raise ValueError(f"unknown rounding mode {self.mode!r}")
        if self.mode == "corner_quarter_circles":
            if not np.allclose(self.base.angles, math.pi / 2, atol=1e-9):
                raise ValueError("corner_quarter_circles mode needs a rectangle")
            half = 0.5 * min(np.hypot(*(np.roll(self.base.vertices, -1, 0) - self.base.vertices).T))
            if self.epsilon > half * math.sqrt(2) * (1 + 1e-12):
                raise ValueError(f"epsilon {self.epsilon} exceeds {half * math.sqrt(2)}")
        object.__setattr__(self, "labels", dict(self.labels))

    @cached_property
    def core(self) -> np.ndarray:
        V = self.base.vertices
        if self.mode == "epsilon_neighborhood":
            return V.copy()
        ctr = V.mean(axis=0)
        inward = np.sign(ctr - V)
        return V + inward * self.epsilon / math.sqrt(2)

    @property
    def radius(self) -> float:
        return float(self.epsilon)

    @property
    def bbox(self):
        lo = self.core.min(axis=0) - self.radius
        hi = self.core.max(axis=0) + self.radius
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def area(self):
        core = self.core
        per = float(np.sum(np.hypot(*(np.roll(core, -1, 0) - core).T)))
        return abs(_shoelace(core)) + per * self.radius + math.pi * self.radius**2

    @property
    def is_convex(self):
        return True

    def _signed(self, P):
        dreg, dB, inside = _convex_region_distance(P, self.core)
        return np.where(inside, -dB, dreg)  # signed distance to the core

    def contains_points(self, P):
        P, _ = _as_points(P)
        return self._signed(P) < self.radius - 1e-10 * self.scale

    def boundary_distance(self, P):
        P, _ = _as_points(P)
        return np.abs(self.radius - self._signed(P))

    def ray_exit(self, P, direction, tmax):
        P, _ = _as_points(P)
        d = np.asarray(direction, dtype=float)
        f_end = self._signed(P + tmax * d) - self.radius
        out = np.full(len(P), float(tmax))
        hit = f_end >= 0
        if hit.any():
            lo = np.zeros(hit.sum())
            hi = np.full(hit.sum(), float(tmax))
            Q = P[hit]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                inside = self._signed(Q + mid[:, None] * d) < self.radius
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            out[hit] = 0.5 * (lo + hi)
        return out

    def segment_inside(self, A, B):
        A, _ = _as_points(A)
        B, _ = _as_points(B)
        return self.closure_contains(A) & self.closure_contains(B)

    def scaled(self, c, center):
        c0 = np.asarray(center, dtype=float)
        base = PolygonDomain(c0 + c * (self.base.vertices - c0))
        return RoundedDomain(base, self.mode, c * self.epsilon, labels=self.labels)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def build_polygon(vertices, slits=()) -> PolygonDomain:
    return PolygonDomain(np.asarray(vertices, dtype=float), tuple(slits))


def build_triangle(v1, v2, v3) -> PolygonDomain:
    """Triangle with vertex i opposite side i (sides are loop sides i+1 mod 3).

    Vertices are reordered to counterclockwise when needed.
    """
    return PolygonDomain(np.array([v1, v2, v3], dtype=float))


def triangle_opposite_side(i: int) -> int:
    """Loop side index opposite to triangle vertex ``i``."""
    return (i + 1) % 3


def build_rectangle(width: float, height: float, origin=(0.0, 0.0)) -> PolygonDomain:
    x0, y0 = origin
    return PolygonDomain(np.array([[x0, y0], [x0 + width, y0], [x0 + width, y0 + height], [x0, y0 + height]]))


def build_regular_polygon(n: int, l: float, center=(0.0, 0.0)) -> PolygonDomain:
    """Regular n-gon with side ``l``; side 0 is the bottom horizontal side."""
    if n < 3:
        raise ValueError("a regular polygon needs n >= 3")
    if not l > 0:
        raise ValueError("side length must be positive")
    R = l / (2 * math.sin(math.pi / n))
    k = np.arange(n)
    th = -math.pi / 2 - math.pi / n + 2 * math.pi * k / n
    V = np.stack([R * np.cos(th), R * np.sin(th)], axis=1) + np.asarray(center, dtype=float)
    return PolygonDomain(V)


@dataclass(frozen=True, eq=False)
class PerturbedTriangle(PolygonDomain):
    """Triangle with a small outward equilateral bump on side A1A2.

    The bump has base C1=(p-eps/2, 0), C2=(p+eps/2, 0) and apex
    C3=(p, -eps*sqrt(3)/2), so the perturbed domain contains the triangle.
    """

    triangle: PolygonDomain | None = None
    p: float = 0.0
    eps: float = 0.0

    @property
    def c1(self):
        return np.array([self.p - self.eps / 2, 0.0])

    @property
    def c2(self):
        return np.array([self.p + self.eps / 2, 0.0])

    @property
    def c3(self):
        return np.array([self.p, -self.eps * math.sqrt(3) / 2])

    @property
    def x_eps(self) -> Point2:
        return Point2(self.p, self.eps)

    @property
    def bump_centroid(self) -> np.ndarray:
        return (self.c1 + self.c2 + self.c3) / 3

    def bump_distances(self, P) -> np.ndarray:
        """Columns d1..d4: distances to A1C1, C1C3, C2C3, C2A2."""
        P, _ = _as_points(P)
        A1 = np.array([0.0, 0.0])
        A2 = np.array([self._side_length, 0.0])
        A = np.array([A1, self.c1, self.c2, self.c2])
        B = np.array([self.c1, self.c3, self.c3, A2])
        return _point_segment_dist(P, A, B)

    @property
    def _side_length(self) -> float:
        return float(np.max(self.vertices[:, 0][np.abs(self.vertices[:, 1]) < 1e-14]))

    def scaled(self, c, center):
        return PolygonDomain.scaled(self, c, center)


def build_perturbed_triangle(T: PolygonDomain, p: float, eps: float) -> PerturbedTriangle:
    V = T.vertices
    if len(V) != 3:
        raise ValueError("expected a triangle")
    on_axis = np.abs(V[:, 1]) <= 1e-14
    A1 = np.flatnonzero(on_axis & (np.abs(V[:, 0]) <= 1e-14))
    A2 = np.flatnonzero(on_axis & (V[:, 0] > 0))
    if A1.size != 1 or A2.size != 1 or V[3 - A1[0] - A2[0], 1] <= 0:
        raise ValueError("triangle must have A1 at the origin, A2 on the positive x-axis, A3 above")
    l = float(V[A2[0], 0])
    if not (0 < eps < l / 2):
        raise ValueError(f"eps must lie in (0, {l / 2})")
    if not (eps < p < l - eps):
        raise ValueError(f"p must lie in ({eps}, {l - eps})")
    A3 = V[3 - A1[0] - A2[0]]
    h = eps * math.sqrt(3) / 2
    verts = np.array([[0.0, 0.0], [p - eps / 2, 0.0], [p, -h], [p + eps / 2, 0.0], [l, 0.0], A3])
    return PerturbedTriangle(verts, (), {}, triangle=T, p=float(p), eps=float(eps))


def build_sawtooth_side(T: PolygonDomain, side_id: int, count: int, height: float) -> PolygonDomain:
    """Replace one side by ``count`` outward isosceles bumps tiling the side."""
    if T.slits:
        raise ValueError("sawtooth construction needs a slit-free polygon")
    if count < 1:
        raise ValueError("count must be >= 1")
    if height < 0:
        raise ValueError("height must be nonnegative")
    if height == 0:
        return T
    r_in = eccentricity(T).a if T.is_convex else min(T.boundary_distance(T.vertices.mean(axis=0)[None]))
    if height >= r_in:
        raise ValueError(f"height {height} must be below the inradius {r_in:.4g}")
    V = T.vertices
    n = len(V)
    a, b = V[side_id % n], V[(side_id + 1) % n]
    e = b - a
    out = np.array([e[1], -e[0]]) / np.hypot(*e)
    pts = []
    for j in range(count):
        if j > 0:
            pts.append(a + e * j / count)
        pts.append(a + e * (j + 0.5) / count + height * out)
    new = list(V[: side_id + 1]) + pts + list(V[side_id + 1 :])
    U = PolygonDomain(np.array(new))
    if np.any(U._proper_crossings(*U._outer_segments)):
        raise ValueError("sawtooth bumps collide with the rest of the boundary")
    return U


def build_rounded_square(l: float, eps: float) -> RoundedDomain:
    """The square [-l, l]^2 with rounded corners of radius eps (see RoundedDomain)."""
    return RoundedDomain(build_rectangle(2 * l, 2 * l, (-l, -l)), "corner_quarter_circles", eps)


def build_rounded_triangle(T: PolygonDomain, eps: float) -> RoundedDomain:
    return RoundedDomain(T, "epsilon_neighborhood", eps)


def build_disk(radius: float = 1.0, center=(0.0, 0.0)) -> EllipseDomain:
    return EllipseDomain(tuple(center), (radius, radius), 0.0)


@dataclass(frozen=True)
class DilationFamily:
    """Homotheties V_c of a base domain about a fixed center."""

    base: Domain
    center: tuple = (0.0, 0.0)

    def at(self, c: float) -> Domain:
        return dilate(self.base, c, self.center)

    @staticmethod
    def growth_volume(c: float) -> float:
        return c * c

    @staticmethod
    def growth_diameter(c: float) -> float:
        return float(c)


def dilate(d: Domain, c: float, center) -> Domain:
    if c < 1:
        raise ValueError("dilation factor must be >= 1")
    if not d.closure_contains(np.asarray(center, dtype=float)[None])[0]:
        raise ValueError("dilation center must lie in the closure of the domain")
    if c == 1:
        return d
    return d.scaled(c, center)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def contains(d: Domain, p) -> bool | np.ndarray:
    P, single = _as_points(p)
    out = d.contains_points(P)
    return bool(out[0]) if single else out


def _require_inside(d: Domain, P: np.ndarray):
    if not np.all(d.contains_points(P)):
        raise ValueError("point(s) outside the open domain")


def dist_boundary(d: Domain, p):
    P, single = _as_points(p)
    _require_inside(d, P)
    out = d.boundary_distance(P)
    return float(out[0]) if single else out


def dist_side(d: PolygonDomain, side_id: int, p, metric: str = "euclidean"):
    P, single = _as_points(p)
    _require_inside(d, P)
    if metric == "euclidean":
        out = d.side_distance(P, side_id)
    elif metric == "geodesic":
        out = d.geodesic_to_side(P, side_id)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return float(out[0]) if single else out


def geodesic_dist(d: Domain, p, q) -> float:
    P, _ = _as_points(p)
    Q, _ = _as_points(q)
    _require_inside(d, np.vstack([P, Q]))
    if isinstance(d, PolygonDomain):
        out = float(d.geodesic_pairs(P, Q)[0])
    else:
        out = float(np.hypot(*(P - Q)[0]))
    if not math.isfinite(out):
        raise RuntimeError("no path found between the two points")
    return out


def _boundary_samples(d: PolygonDomain, spacing: float) -> np.ndarray:
    A, B = d._all_segments
    pts = [d.loop]
    for a, b in zip(A, B):
        m = max(1, int(math.ceil(np.hypot(*(b - a)) / spacing)))
        t = np.arange(1, m) / m
        pts.append(a + t[:, None] * (b - a))
    return np.unique(np.vstack(pts), axis=0)


def _max_geodesic_pair(d: PolygonDomain, S: np.ndarray) -> tuple[float, int, int]:
    euc = np.hypot(S[:, None, 0] - S[None, :, 0], S[:, None, 1] - S[None, :, 1])
    R = d.reflex_points
    if len(R) == 0:
        i, j = np.unravel_index(np.argmax(euc), euc.shape)
        return float(euc[i, j]), int(i), int(j)
    dS = d._to_reflex(S)
    a = (dS[:, :, None] + d._reflex_graph[None]).min(axis=1)  # (S, R)
    via = np.empty_like(euc)
    for i in range(0, len(S), 256):
        via[i : i + 256] = (a[i : i + 256, None, :] + dS[None, :, :]).min(axis=2)
    via = np.maximum(via, euc)
    iu, ju = np.triu_indices(len(S), 1)
    order = np.argsort(-via[iu, ju], kind="stable")
    best, bi, bj = 0.0, 0, 0
    for start in range(0, len(order), 4096):
        blk = order[start : start + 4096]
        I, J = iu[blk], ju[blk]
        if via[I[0], J[0]] <= best:
            break
        vis = d.segment_inside(S[I], S[J])
        geo = np.where(vis, euc[I, J], via[I, J])
        k = int(np.argmax(geo))
        if geo[k] > best:
            best, bi, bj = float(geo[k]), int(I[k]), int(J[k])
        blocked = np.flatnonzero(~vis)
        if blocked.size:
            k = blocked[0]
            if via[I[k], J[k]] >= best:
                return float(via[I[k], J[k]]), int(I[k]), int(J[k])
    return best, bi, bj


def inner_diameter(d: Domain, spacing: float | None = None) -> float:
    """Supremum of the geodesic distance over pairs of points of the domain.

    Convex polygons use vertex pairs.  Other polygons maximise over vertices
    plus boundary samples at ``diam/512``, then refine once at ``diam/2048``
    around the best pair.
    """
    if spacing is None:
        cached = d.__dict__.get("_inner_diameter")
        if cached is None:
            cached = _inner_diameter(d, None)
            d.__dict__["_inner_diameter"] = cached
        return cached
    return _inner_diameter(d, spacing)


def _inner_diameter(d: Domain, spacing: float | None) -> float:
    if isinstance(d, EllipseDomain):
        return 2 * d.semi_axes[0]
    if isinstance(d, RoundedDomain):
        C = d.core
        euc = np.hypot(C[:, None, 0] - C[None, :, 0], C[:, None, 1] - C[None, :, 1])
        return float(euc.max()) + 2 * d.radius
    V = d.loop
    euc_diam = float(np.max(np.hypot(V[:, None, 0] - V[None, :, 0], V[:, None, 1] - V[None, :, 1])))
    if d.is_convex:
        return euc_diam
    h0 = spacing or euc_diam / 512
    S = _boundary_samples(d, h0)
    best, i, j = _max_geodesic_pair(d, S)
    fine = _boundary_samples(d, h0 / 4)
    near = (np.hypot(*(fine - S[i]).T) <= 2 * h0) | (np.hypot(*(fine - S[j]).T) <= 2 * h0)
    S2 = np.unique(np.vstack([S, fine[near]]), axis=0)
    best2, _, _ = _max_geodesic_pair(d, S2)
    return max(best, best2)


def area(d: Domain) -> float:
    return d.area


def _interior_quadrature_points(d: Domain, spacing: float) -> np.ndarray:
    x0, y0, x1, y1 = d.bbox
    xs = np.arange(x0 + spacing / 2, x1, spacing)
    ys = np.arange(y0 + spacing / 2, y1, spacing)
    X, Y = np.meshgrid(xs, ys)
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    return P[d.contains_points(P)]


def _as_shapely(d: Domain, n_arc: int = 8192):
    """Shapely polygon for the domain, or None when it has slits."""
    import shapely

    if isinstance(d, PolygonDomain):
        return None if d.slits else shapely.Polygon(d.vertices)
    if isinstance(d, EllipseDomain):
        a, b = d.semi_axes
        th = np.linspace(0, 2 * math.pi, n_arc, endpoint=False)
        c, s = math.cos(d.rotation), math.sin(d.rotation)
        px, py = a * np.cos(th), b * np.sin(th)
        return shapely.Polygon(np.stack([c * px - s * py, s * px + c * py], axis=1) + np.asarray(d.center))
    if isinstance(d, RoundedDomain):
        return shapely.Polygon(d.core).buffer(d.radius, quad_segs=n_arc // 4)
    return None


def tube_ratio(d: Domain, delta: float, spacing: float | None = None) -> float:
    """Area fraction of points within ``delta*diam`` of the boundary.

    Slit-free polygons, ellipses and rounded domains use the exact inner
    parallel set (shapely negative buffer; curved boundaries are finely
    polygonised and the bias cancels in the ratio).  With an explicit
    ``spacing``, or for slit domains, midpoint quadrature at that spacing
    (default diam/1024) is used instead.
    """
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    if delta == 0:
        return 0.0
    diam = inner_diameter(d)
    shape = None if spacing is not None else _as_shapely(d)
    if shape is not None:
        inner = shape.buffer(-delta * diam, quad_segs=256)
        return float(1.0 - inner.area / shape.area)
    spacing = spacing or diam / 1024
    P = _interior_quadrature_points(d, spacing)
    rho = d.boundary_distance(P)
    return float(np.count_nonzero(rho <= delta * diam) / len(P))


class Eccentricity(NamedTuple):
    center: Point2
    a: float
    A: float
    K: float


def _chebyshev_polygon(V: np.ndarray) -> tuple[np.ndarray, float]:
    W = np.roll(V, -1, axis=0)
    E = W - V
    L = np.hypot(*E.T)
    nrm = np.stack([E[:, 1], -E[:, 0]], axis=1) / L[:, None]  # outward for ccw
    b = np.einsum("ij,ij->i", nrm, V)
    # max r s.t. n_i . c + r <= b_i
    res = linprog([0, 0, -1], A_ub=np.hstack([nrm, np.ones((len(V), 1))]), b_ub=b, bounds=[(None, None)] * 2 + [(0, None)], method="highs")
    a = float(res.x[2])
    c0 = res.x[:2]

    def f(z):
        return z[2]

    cons = [{"type": "ineq", "fun": lambda z, i=i: z[2] ** 2 - np.sum((z[:2] - V[i]) ** 2)} for i in range(len(V))]
    cons.append({"type": "ineq", "fun": lambda z: b - nrm @ z[:2] - a * (1 - 1e-9)})
    A0 = float(np.max(np.hypot(*(V - c0).T)))
    sol = minimize(f, np.r_[c0, A0], constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    c = sol.x[:2] if sol.success and np.all(b - nrm @ sol.x[:2] >= a * (1 - 1e-7)) else c0
    return c, a


def eccentricity(d: Domain) -> Eccentricity:
    """Concentric inscribed/circumscribed radii about a Chebyshev center.

    Among Chebyshev centers (maximisers of the boundary distance) the one with
    the smallest circumscribed radius is used.
    """
    if not d.is_convex:
        raise ValueError("eccentricity needs a convex domain")
    if isinstance(d, EllipseDomain):
        a, b = d.semi_axes
        return Eccentricity(d.center, b, a, a / b)
    if isinstance(d, RoundedDomain):
        core = d.core
        if abs(_shoelace(core)) > 1e-14:
            c, a0 = _chebyshev_polygon(core)
        else:
            c, a0 = core.mean(axis=0), 0.0
        A = float(np.max(np.hypot(*(core - c).T))) + d.radius
        a = a0 + d.radius
        return Eccentricity(Point2(*c), a, A, A / a)
    c, a = _chebyshev_polygon(d.vertices)
    A = float(np.max(np.hypot(*(d.vertices - c).T)))
    return Eccentricity(Point2(*c), a, A, A / a)


class TubeBoundReport(NamedTuple):
    deltas: np.ndarray
    actual: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    ok: bool


def convex_tube_bound_check(d: Domain, delta_list, spacing: float | None = None, tol: float = 1e-6
                            ) -> TubeBoundReport:
    """Check ``tube_ratio(delta) <= 1 - (1 - 2*A*delta/a)**2`` for delta < a/(2A).

    Disks attain the bound with equality, so a margin down to ``-tol``
    (the area-quadrature error) still counts as holding.
    """
    if not d.is_convex:
        raise ValueError("the tube bound needs a convex domain")
    ecc = eccentricity(d)
    deltas = np.asarray([x for x in delta_list if x < ecc.a / (2 * ecc.A)], dtype=float)
    actual = np.array([tube_ratio(d, x, spacing) for x in deltas])
    bound = 1 - (1 - 2 * ecc.A / ecc.a * deltas) ** 2
    margin = bound - actual
    return TubeBoundReport(deltas, actual, bound, margin, bool(np.all(margin >= -tol)))


def exterior_ball_alpha(d: Domain, samples, n_shift: int = 33) -> float:
    """Smallest ratio r/dist(x) over samples for balls in B(x, 2 dist(x)) \\ U.

    Candidate centers lie on rays from x through its nearest boundary point
    and through convex polygon vertices within 2 dist(x); the radius is found
    by bisection to a tolerance of 1e-4 dist(x).
    """
    P, _ = _as_points(samples)
    _require_inside(d, P)
    best = math.inf
    for x in P:
        rho = float(d.boundary_distance(x[None])[0])
        anchors = [_nearest_boundary_point(d, x)]
        if isinstance(d, PolygonDomain):
            L = d.loop
            convex = L[(d.angles < math.pi - 1e-9)]
            near = convex[np.hypot(*(convex - x).T) < 2 * rho]
            anchors.extend(near)
        dirs = []
        for q in anchors:
            v = q - x
            n = np.hypot(*v)
            if n > 0:
                dirs.append((q, v / n))

        def feasible(r):
            for q, u in dirs:
                s = np.linspace(0.0, 2 * rho, n_shift)
                C = q[None] + (r + s)[:, None] * u[None]
                fit = np.hypot(*(C - x).T) + r <= 2 * rho * (1 + 1e-12)
                if not fit.any():
                    continue
                C = C[fit]
                outside = ~d.closure_contains(C) & (d.boundary_distance(C) >= r * (1 - 1e-9))
                if outside.any():
                    return True
            return False

        lo, hi = 0.0, rho
        while hi - lo > 1e-4 * rho:
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        best = min(best, lo / rho)
    return best


def _nearest_boundary_point(d: Domain, x: np.ndarray) -> np.ndarray:
    if isinstance(d, PolygonDomain):
        A, B = d._all_segments
        dist = _point_segment_dist(x[None], A, B)[0]
        k = int(np.argmin(dist))
        return _closest_on_segment(x, A[k], B[k])
    if isinstance(d, RoundedDomain):
        core = d.core
        A, B = core, np.roll(core, -1, axis=0)
        dist = _point_segment_dist(x[None], A, B)[0]
        k = int(np.argmin(dist))
        z = _closest_on_segment(x, A[k], B[k])
        v = x - z
        n = np.hypot(*v)
        inside = d._signed(x[None])[0] < 0
        if n == 0:
            e = B[k] - A[k]
            v, n = np.array([e[1], -e[0]]), np.hypot(*e)
        u = v / n * (-1 if inside else 1)
        return z + d.radius * u
    # ellipse: coarse parametric scan, then a bounded 1-D refinement
    from scipy.optimize import minimize_scalar

    a, b = d.semi_axes
    c, s = math.cos(d.rotation), math.sin(d.rotation)
    ctr = np.asarray(d.center)

    def at(th):
        px, py = a * np.cos(th), b * np.sin(th)
        return np.stack([c * px - s * py, s * px + c * py], axis=-1) + ctr

    th = np.linspace(0, 2 * math.pi, 2049)
    k = int(np.argmin(np.hypot(*(at(th) - x).T)))
    step = th[1] - th[0]
    r = minimize_scalar(lambda t: float(np.hypot(*(at(t) - x))), bounds=(th[k] - step, th[k] + step),
                        method="bounded", options={"xatol": 1e-13})
    return at(r.x)


def random_convex_polygon(rng: np.random.Generator, n: int, scale: float = 1.0) -> PolygonDomain:
    """Convex hull of points on a jittered circle (deterministic given rng)."""
    th = np.sort(rng.uniform(0, 2 * math.pi, n))
    r = scale * rng.uniform(0.6, 1.0, n)
    P = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(P)
    return PolygonDomain(P[hull.vertices])


def triangle_from_angles(alpha1: float, alpha2: float, longest: float = 1.0) -> PolygonDomain:
    """Triangle with angles alpha1 at A1=(0,0), alpha2 at A2 on the x-axis, longest side ``longest``."""
    alpha3 = math.pi - alpha1 - alpha2
    if min(alpha1, alpha2, alpha3) <= 0:
        raise ValueError("angles must be positive and sum below pi")
    # side A1A2 is opposite alpha3; law of sines
    s = [math.sin(alpha1), math.sin(alpha2), math.sin(alpha3)]
    c = longest * s[2] / max(s)
    b = c * s[1] / s[2]  # A1A3
    A3 = (b * math.cos(alpha1), b * math.sin(alpha1))
    return build_triangle((0.0, 0.0), (c, 0.0), A3)


def interval_points(n: int, a: float) -> Sequence[float]:
    return [a * (i + 1) / (n + 1) for i in range(n)]
