"""Closed-form reference values used as targets in experiment configs."""
from __future__ import annotations

import math


def bessel_j0(x: float, terms: int = 80) -> float:
    """J0 by its power series, summed with a running term."""
    q = -(x * x) / 4.0
    term, total = 1.0, 1.0
    for m in range(1, terms):
        term *= q / (m * m)
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def j0_first_zero(tol: float = 1e-14) -> float:
    """First positive zero of J0, by bisection on [2, 3]."""
    lo, hi = 2.0, 3.0
    flo = bessel_j0(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = bessel_j0(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rectangle_eigenvalues(w: float, hgt: float, k: int) -> list[float]:
    """The k smallest Dirichlet eigenvalues of a w x hgt rectangle."""
    m = k + 2
    vals = sorted((math.pi * i / w) ** 2 + (math.pi * j / hgt) ** 2 for i in range(1, m + 1) for j in range(1, m + 1))
    return vals[:k]


def disk_eigenvalue_1(radius: float = 1.0) -> float:
    return (j0_first_zero() / radius) ** 2


def interval_eigenvalue(a: float, j: int = 1) -> float:
    return (math.pi * j / a) ** 2
