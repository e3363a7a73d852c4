"""Compare the computed ground state of a triangle with its caricature.

Writes phi_1 and the ratio phi_1 / Phi_T as PGM images and prints the ratio
spread at two resolutions.

    python3 scripts/triangle_profile.py --angles 30 60 --out tri_out
"""
import argparse
import math
from pathlib import Path

import numpy as np

from eigenprofile import analysis, caricature, cli, discretize, geometry, spectral


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--angles", type=float, nargs=2, default=[30.0, 60.0], metavar=("A1", "A2"),
                    help="two angles in degrees")
    ap.add_argument("--factor", type=int, default=128, help="h = diam / factor on the coarse grid")
    ap.add_argument("--out", default="triangle_profile")
    args = ap.parse_args()

    T = geometry.triangle_from_angles(math.radians(args.angles[0]), math.radians(args.angles[1]), 1.0)
    diam = geometry.inner_diameter(T)
    out = Path(args.out)
    spreads = []
    for f in (args.factor, 2 * args.factor):
        spec, _ = spectral.solve_domain(T, diam / f)
        rep = analysis.comparability_report(spec.phi(1), lambda P: caricature.phi_triangle(T, P))
        spreads.append(rep.spread)
        print(f"h = diam/{f}: nodes {spec.grid.n}, lambda_1 {spec.lambda1:.6f}, "
              f"ratio {rep.ratio_min:.4g}..{rep.ratio_max:.4g}, spread {rep.spread:.4f}")
        if f == args.factor:
            g = spec.grid
            cli.render_field(spec.phi(1), out / "phi_1.pgm")
            inner = analysis.interior_region(g, 2.0)
            ratio = np.zeros(g.n)
            ratio[inner] = spec.vectors[inner, 0] / caricature.phi_triangle(T, g.points[inner])
            cli.render_field(discretize.GridField(g, ratio), out / "ratio.pgm")
    print(f"refinement change {analysis.refinement_change(*spreads):.4f}")
    print(f"images in {out}/")


if __name__ == "__main__":
    main()
