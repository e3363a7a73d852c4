"""Fit the two-sided Gaussian heat-kernel envelope on one domain.

    python3 scripts/heat_envelope.py --domain sawtooth --samples 200 --seed 42
"""
import argparse

import numpy as np

from eigenprofile import geometry, heatkernel, spectral


def build(name):
    square = geometry.build_rectangle(1, 1)
    if name == "square":
        return square
    if name == "heptagon":
        return geometry.build_regular_polygon(7, 1.0)
    if name == "sawtooth":
        return geometry.build_sawtooth_side(square, 0, 8, 0.02)
    raise SystemExit(f"unknown domain {name!r}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", choices=["square", "heptagon", "sawtooth"], default="square")
    ap.add_argument("--factor", type=int, default=128, help="h = diam / factor")
    ap.add_argument("--K", type=int, default=20)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    d = build(args.domain)
    spec, _ = spectral.solve_domain(d, geometry.inner_diameter(d) / args.factor, args.K)
    rng = np.random.default_rng(args.seed)
    samples = heatkernel.sample_envelope_points(spec, args.samples, rng, args.K)
    fit = heatkernel.lierl_envelope_fit(spec, d, samples, args.K)
    print(f"{args.domain}: {spec.grid.n} nodes, lambda_1 {spec.lambda1:.6f}, metric {fit.metric}")
    print(f"upper  c1 = {fit.c1:.6g}  c2 = {fit.c2:g}")
    print(f"lower  c3 = {fit.c3:.6g}  c4 = {fit.c4:g}")
    print(f"c1/c3 = {fit.ratio:.4g}")
    print("c1 by c2: " + ", ".join(f"{c:g}: {v:.4g}" for c, v in fit.c1_by_c2.items()))
    print("c3 by c4: " + ", ".join(f"{c:g}: {v:.4g}" for c, v in fit.c3_by_c4.items()))


if __name__ == "__main__":
    main()
