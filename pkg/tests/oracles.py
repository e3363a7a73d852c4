"""Independent reference computations for the test suite.

Nothing here imports eigenprofile; each routine is a deliberately simple,
slow implementation of the quantity it checks.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

J01_SANITY = 2.404825557695773


def j0_series(x: float) -> float:
    """J0 from its power series with exact factorials."""
    return math.fsum((-1) ** m * (x / 2) ** (2 * m) / math.factorial(m) ** 2 for m in range(60))


def j0_quadrature(x: float, n: int = 256) -> float:
    """J0 from the integral (1/pi) int_0^pi cos(x sin t) dt, trapezoid rule."""
    t = np.linspace(0, math.pi, n + 1)
    f = np.cos(x * np.sin(t))
    return float((f.sum() - 0.5 * (f[0] + f[-1])) * math.pi / n / math.pi)


def j01_bisect() -> float:
    lo, hi = 2.0, 3.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if j0_series(lo) * j0_series(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def discrete_square_lambda(h: float, i: int = 1, j: int = 1) -> float:
    """Eigenvalue (i, j) of the 5-point Laplacian on the unit square, mesh h."""
    return 4 / h**2 * (math.sin(i * math.pi * h / 2) ** 2 + math.sin(j * math.pi * h / 2) ** 2)


def interval_kernel(t: float, x: float, y: float, terms: int = 50) -> float:
    """Dirichlet heat kernel of (0, 1) by its sine series."""
    return math.fsum(2 * math.exp(-(n * math.pi) ** 2 * t) * math.sin(n * math.pi * x) * math.sin(n * math.pi * y)
                     for n in range(1, terms + 1))


def green_disk_complex(eps: float, x, y) -> float:
    """(1/2 pi) log|(eps^2 - conj(x) y) / (eps (x - y))|, valid inside and outside the circle."""
    zx, zy = complex(*x), complex(*y)
    return math.log(abs(eps * eps - zx.conjugate() * zy) / (eps * abs(zx - zy))) / (2 * math.pi)


# --- polygons --------------------------------------------------------------

def point_in_polygon(V, p) -> bool:
    """Even-odd ray casting; points on the boundary count as outside."""
    x, y = p
    inside = False
    n = len(V)
    for i in range(n):
        (x1, y1), (x2, y2) = V[i], V[(i + 1) % n]
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if abs(cross) < 1e-12 and min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12 \
                and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12:
            return False
        if (y1 > y) != (y2 > y) and x < x1 + (y - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    return inside


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _crosses(a, b, c, d) -> bool:
    """Proper crossing of segments ab and cd (touching does not count)."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    eps = 1e-15
    return o1 * o2 < -eps and o3 * o4 < -eps


def visible(V, a, b, samples: int = 16) -> bool:
    """Segment ab stays inside the closed polygon: no proper edge crossing,
    and interior sample points lie inside or on the boundary."""
    n = len(V)
    for i in range(n):
        if _crosses(a, b, V[i], V[(i + 1) % n]):
            return False
    # split at polygon vertices on the segment so thin gaps get a midpoint each
    A, B = np.asarray(a, float), np.asarray(b, float)
    e = B - A
    if not np.any(e):
        return True
    ts = [0.0, 1.0]
    for v in V:
        t = float(np.dot(np.asarray(v) - A, e) / np.dot(e, e))
        if 0 < t < 1 and np.hypot(*(A + t * e - v)) < 1e-12:
            ts.append(t)
    ts = sorted(ts)
    mids = [0.5 * (s + u) for s, u in zip(ts, ts[1:])]
    for s in list(np.linspace(0, 1, samples + 2)[1:-1]) + mids:
        q = (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
        if not point_in_polygon(V, q) and not _on_boundary(V, q, 1e-12):
            return False
    return True


def _on_boundary(V, q, tol=1e-9) -> bool:
    n = len(V)
    for i in range(n):
        a, b = np.asarray(V[i], float), np.asarray(V[(i + 1) % n], float)
        e = b - a
        t = np.clip(np.dot(np.asarray(q) - a, e) / np.dot(e, e), 0, 1)
        if np.hypot(*(a + t * e - q)) < tol:
            return True
    return False


def shortest_path(V, p, q) -> float:
    """Dijkstra over the visibility graph of {p, q} and all polygon vertices."""
    nodes = [tuple(p), tuple(q)] + [tuple(v) for v in V]
    dist = {0: 0.0}
    heap = [(0.0, 0)]
    done = set()
    while heap:
        d, i = heapq.heappop(heap)
        if i in done:
            continue
        if i == 1:
            return d
        done.add(i)
        for j in range(len(nodes)):
            if j in done or j == i:
                continue
            if visible(V, nodes[i], nodes[j]):
                nd = d + math.dist(nodes[i], nodes[j])
                if nd < dist.get(j, math.inf):
                    dist[j] = nd
                    heapq.heappush(heap, (nd, j))
    raise ValueError("q not reachable")


def boundary_samples(V, per_side: int):
    pts = []
    n = len(V)
    for i in range(n):
        a, b = np.asarray(V[i], float), np.asarray(V[(i + 1) % n], float)
        for s in np.arange(per_side) / per_side:
            pts.append(tuple(a + s * (b - a)))
    return pts


def sampled_geodesic_diameter(V, per_side: int) -> float:
    pts = boundary_samples(V, per_side)
    return max(shortest_path(V, pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts)))


def shoelace(V) -> float:
    V = np.asarray(V, float)
    return 0.5 * abs(np.dot(V[:, 0], np.roll(V[:, 1], -1)) - np.dot(V[:, 1], np.roll(V[:, 0], -1)))


def inner_square_tube_ratio(delta: float) -> float:
    """Exact h_V(delta) for the unit square."""
    s = 1 - 2 * delta * math.sqrt(2)
    return 1 - max(s, 0.0) ** 2


def tube_ratio_monte_carlo(inside, dist, area, bbox, delta_abs, n, rng) -> float:
    """Fraction of area within delta_abs of the boundary, by rejection sampling."""
    x0, y0, x1, y1 = bbox
    P = np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])
    m = inside(P)
    return float(np.mean(dist(P[m]) < delta_abs))
