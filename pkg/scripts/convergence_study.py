"""Eigenvalue error against h for the disk and square, both boundary schemes.

    python3 scripts/convergence_study.py --levels 16 32 64 128
"""
import argparse
import math

from eigenprofile import discretize, geometry, reference, spectral


def study(name, domain, exact, levels, scheme):
    print(f"\n{name} ({scheme}), exact {exact:.8f}")
    print(f"{'1/h':>6} {'nodes':>8} {'lambda_1':>14} {'error':>10} {'order':>6}")
    prev = None
    for m in levels:
        g = discretize.rasterize(domain, 1.0 / m)
        spec = spectral.smallest_eigenpairs(discretize.assemble_laplacian(g, scheme), g, 1)
        err = abs(spec.lambda1 - exact)
        order = "" if prev is None else f"{math.log2(prev / err):6.2f}"
        print(f"{m:6d} {g.n:8d} {spec.lambda1:14.8f} {err:10.3e} {order:>6}")
        prev = err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[16, 32, 64, 128])
    args = ap.parse_args()
    disk = reference.disk_eigenvalue_1(1.0)
    square = reference.rectangle_eigenvalues(1, 1, 1)[0]
    for scheme in ("shortley_weller", "masked"):
        study("unit disk", geometry.build_disk(), disk, args.levels, scheme)
    study("unit square", geometry.build_rectangle(1, 1), square, args.levels, "shortley_weller")


if __name__ == "__main__":
    main()
