"""Declarative experiment runner.

A JSON config lists experiments; each one builds its domains, solves, runs
its checks and contributes rows to ``results.csv``.  Field images go to
``<out>/<experiment name>/`` as ASCII PGM files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import analysis, caricature, discretize, geometry, heatkernel, reference, spectral

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = ("name", "metric", "value", "bracket_lo", "bracket_hi", "pass", "h", "seconds")
EXPERIMENT_KINDS = ("eigensolve", "caricature_compare", "sandwich", "separation", "heatkernel_envelope",
                    "green_check", "tube_profile", "iu_ratio", "monotonicity")
FAST_FACTOR = 64

# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int1 = {"type": "integer", "minimum": 1}
_pt = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_dom = {"$ref": "#/$defs/domain"}

DOMAIN_KINDS = {
    "interval": ({"a": _pos}, ["a"]),
    "rectangle": ({"width": _pos, "height": _pos, "origin": _pt}, ["width", "height"]),
    "polygon": ({"vertices": {"type": "array", "items": _pt, "minItems": 3},
                 "slits": {"type": "array", "items": {"type": "array", "items": _pt, "minItems": 2, "maxItems": 2}}},
                ["vertices"]),
    "triangle": ({"vertices": {"type": "array", "items": _pt, "minItems": 3, "maxItems": 3}}, ["vertices"]),
    "triangle_angles": ({"alpha1_deg": _pos, "alpha2_deg": _pos, "longest": _pos}, ["alpha1_deg", "alpha2_deg"]),
    "regular_polygon": ({"n": {"type": "integer", "minimum": 3}, "l": _pos, "center": _pt}, ["n"]),
    "disk": ({"radius": _pos, "center": _pt}, []),
    "ellipse": ({"semi_axes": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
                 "center": _pt, "rotation": _num}, ["semi_axes"]),
    "rounded_square": ({"l": _pos, "eps": _pos}, ["l", "eps"]),
    "rounded_triangle": ({"triangle": _dom, "eps": _pos}, ["triangle", "eps"]),
    "perturbed_triangle": ({"triangle": _dom, "p": _pos, "eps": _pos}, ["triangle", "p", "eps"]),
    "sawtooth": ({"base": _dom, "side": {"type": "integer", "minimum": 0}, "count": _int1,
                  "height": {"type": "number", "minimum": 0}}, ["base", "side", "count", "height"]),
    "dilate": ({"base": _dom, "c": {"type": "number", "minimum": 1}, "center": _pt}, ["base", "c", "center"]),
    # generators: expand to `count` domains drawn from the experiment rng
    "random_convex": ({"count": _int1, "n_vertices": {"type": "integer", "minimum": 3}, "scale": _pos},
                      ["n_vertices"]),
    "random_triangles": ({"count": _int1, "min_angle_deg": {"type": "number", "minimum": 1, "maximum": 59},
                          "longest": _pos}, ["min_angle_deg"]),
}

_operator = {"type": "object", "properties": {"a11": _pos, "a12": _num, "a22": _pos},
             "required": ["a11", "a22"], "additionalProperties": False}
_factors = {"type": "array", "items": _pos, "minItems": 1}
_num_list = {"type": "array", "items": _num, "minItems": 1}

PARAMS = {
    "eigensolve": {"reference": {"enum": ["rectangle", "disk", "interval"]}, "targets": _num_list,
                   "rel_tol": {"oneOf": [_pos, {"type": "array", "items": _pos}]}, "maxphi_min": _num,
                   "operator": _operator, "images": {"type": "integer", "minimum": 0}},
    "caricature_compare": {"h_factors": _factors, "max_spread": _pos, "max_change": _pos, "margin": _num,
                           "slack": _pos, "branch_factor": _pos, "images": {"type": "boolean"}},
    "sandwich": {"h_list": _factors, "operator": _operator, "cap": _pos, "max_change": _pos, "margin": _num},
    "separation": {"ks": {"type": "array", "items": _int1, "minItems": 1}, "min_product": _num_list,
                   "spot_values": {"type": "array", "items": {"type": ["number", "null"]}},
                   "spot_rel_tol": _pos, "maxphi_min": _num},
    "heatkernel_envelope": {"K": _int1, "n_samples": _int1, "max_ratio": _pos},
    "green_check": {"eps": _num_list, "modes": {"type": "array", "items": {"enum": ["interior", "exterior"]}},
                    "bracket": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                    "invariance_tol": _pos},
    "tube_profile": {"deltas": _num_list},
    "iu_ratio": {"K": _int1, "t_factors": _num_list, "n_pairs": _int1, "tol": _pos},
    "monotonicity": {"pairs": {"type": "array", "minItems": 1,
                               "items": {"type": "object", "properties": {"inner": _dom, "outer": _dom},
                                         "required": ["inner", "outer"], "additionalProperties": False}},
                     "K": _int1, "n_pairs": _int1, "operator": _operator},
}


def _domain_schema() -> dict:
    branches = []
    for kind, (props, req) in DOMAIN_KINDS.items():
        branches.append({"if": {"properties": {"kind": {"const": kind}}},
                         "then": {"properties": {"kind": {}, **props}, "required": req,
                                  "additionalProperties": False}})
    return {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": list(DOMAIN_KINDS)}},
            "allOf": branches}


def _experiment_schema() -> dict:
    branches = [{"if": {"properties": {"kind": {"const": k}}},
                 "then": {"properties": {"params": {"type": "object", "properties": p,
                                                    "additionalProperties": False}}}}
                for k, p in PARAMS.items()]
    return {
        "type": "object",
        "required": ["name", "kind"],
        "additionalProperties": False,
        "properties": {
            "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
            "kind": {"enum": list(EXPERIMENT_KINDS)},
            "domain": _dom,
            "domains": {"type": "array", "items": _dom, "minItems": 1},
            "h": _pos,
            "h_factor": _pos,
            "k": _int1,
            "tol": _pos,
            "params": {"type": "object"},
        },
        "not": {"required": ["h", "h_factor"]},
        "allOf": branches,
    }


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "experiments"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "experiments": {"type": "array", "items": _experiment_schema()},
    },
    "$defs": {"domain": _domain_schema()},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    domains: tuple = ()
    h: float | None = None
    h_factor: float | None = None
    k: int = 1
    tol: float = 1e-8
    params: dict = field(default_factory=dict)
    seed: int = 42
    output: str | None = None
    fast: bool = False

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(self.name.encode())])


@dataclass(frozen=True)
class ResultRow:
    name: str
    metric: str
    value: float
    bracket_lo: float = -math.inf
    bracket_hi: float = math.inf
    passed: bool = True
    h: float | None = None
    seconds: float | None = None

    def cells(self, timings: bool) -> list[str]:
        fmt = lambda v: "" if v is None else format(float(v), ".10g")  # noqa: E731
        return [self.name, self.metric, fmt(self.value), fmt(self.bracket_lo), fmt(self.bracket_hi),
                "true" if self.passed else "false", fmt(self.h), fmt(self.seconds) if timings else ""]


def _row(name, metric, value, lo=-math.inf, hi=math.inf, h=None) -> ResultRow:
    v = float(value)
    return ResultRow(name, metric, v, float(lo), float(hi), bool(lo <= v <= hi), h)


def load_config(path, fast: bool = False) -> tuple[list[ExperimentConfig], dict]:
    """Parse and validate; raises ConfigError with line/field diagnostics."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        msgs = [f"{path}: at /{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in errors[:10]]
        raise ConfigError("\n".join(msgs))
    seed = raw.get("seed", 42)
    exps, seen = [], set()
    for i, e in enumerate(raw["experiments"]):
        if e["name"] in seen:
            raise ConfigError(f"{path}: at /experiments/{i}/name: duplicate experiment name {e['name']!r}")
        seen.add(e["name"])
        doms = tuple(e["domains"]) if "domains" in e else ((e["domain"],) if "domain" in e else ())
        needs = e["kind"] not in ("green_check", "monotonicity")
        if needs and not doms:
            raise ConfigError(f"{path}: at /experiments/{i}: experiment kind {e['kind']!r} needs a domain")
        exp = ExperimentConfig(e["name"], e["kind"], doms, e.get("h"), e.get("h_factor"), e.get("k", 1),
                               e.get("tol", 1e-8), dict(e.get("params", {})), seed, raw.get("output"), fast)
        try:  # resolve every domain now so bad geometry fails before any output
            _expand(exp, list(doms) + [d for p in exp.params.get("pairs", []) for d in (p["inner"], p["outer"])])
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{path}: at /experiments/{i}: cannot build domain: {err}") from None
        exps.append(exp)
    return exps, raw


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass
class Built:
    """A domain together with its caricature evaluator (if any)."""

    domain: object
    spec: dict
    caricature: Callable | None = None

    @property
    def diam(self) -> float:
        if isinstance(self.domain, float):
            return self.domain
        return geometry.inner_diameter(self.domain)


def build_domain(spec: dict, rng: np.random.Generator | None = None) -> list[Built]:
    """Build one domain spec; generator kinds return several."""
    kind = spec["kind"]
    if kind == "interval":
        a = float(spec["a"])
        return [Built(a, spec, lambda x: caricature.phi_interval(a, x))]
    if kind == "rectangle":
        d = geometry.build_rectangle(spec["width"], spec["height"], tuple(spec.get("origin", (0.0, 0.0))))
        return [Built(d, spec, lambda P: caricature.phi_polygon(d, P, metric="euclidean"))]
    if kind == "polygon":
        d = geometry.build_polygon(spec["vertices"], [np.array(s) for s in spec.get("slits", [])])
        return [Built(d, spec, lambda P: caricature.phi_polygon(d, P))]
    if kind == "triangle":
        d = geometry.build_triangle(*spec["vertices"])
        return [Built(d, spec, lambda P: caricature.phi_triangle(d, P))]
    if kind == "triangle_angles":
        d = geometry.triangle_from_angles(math.radians(spec["alpha1_deg"]), math.radians(spec["alpha2_deg"]),
                                          spec.get("longest", 1.0))
        return [Built(d, spec, lambda P: caricature.phi_triangle(d, P))]
    if kind == "regular_polygon":
        n, l, c = spec["n"], spec.get("l", 1.0), tuple(spec.get("center", (0.0, 0.0)))
        d = geometry.build_regular_polygon(n, l, c)
        return [Built(d, spec, lambda P: caricature.phi_regular_polygon(n, l, P, c))]
    if kind in ("disk", "ellipse"):
        if kind == "disk":
            d = geometry.build_disk(spec.get("radius", 1.0), tuple(spec.get("center", (0.0, 0.0))))
        else:
            d = geometry.EllipseDomain(tuple(spec.get("center", (0.0, 0.0))), tuple(spec["semi_axes"]),
                                       spec.get("rotation", 0.0))
        return [Built(d, spec, lambda P: caricature.phi_ellipse(d, P))]
    if kind == "rounded_square":
        l, eps = spec["l"], spec["eps"]
        d = geometry.build_rounded_square(l, eps)
        return [Built(d, spec, lambda P: caricature.phi_rounded_square(l, eps, P))]
    if kind == "rounded_triangle":
        T = _single(spec["triangle"], rng).domain
        eps = spec["eps"]
        d = geometry.build_rounded_triangle(T, eps)
        return [Built(d, spec, lambda P: caricature.phi_rounded_triangle(T, eps, P))]
    if kind == "perturbed_triangle":
        T = _single(spec["triangle"], rng).domain
        d = geometry.build_perturbed_triangle(T, spec["p"], spec["eps"])
        at_x = caricature.phi_triangle(T, d.x_eps)
        return [Built(d, spec, lambda P: caricature.phi_perturbed_triangle(d, at_x, P))]
    if kind == "sawtooth":
        base = _single(spec["base"], rng).domain
        d = geometry.build_sawtooth_side(base, spec["side"], spec["count"], spec["height"])
        return [Built(d, spec, lambda P: caricature.phi_polygon(d, P))]
    if kind == "dilate":
        b = _single(spec["base"], rng)
        d = geometry.dilate(b.domain, spec["c"], tuple(spec["center"]))
        return [Built(d, spec, None)]
    if rng is None:
        raise ValueError(f"generator {kind!r} needs an rng")
    out = []
    if kind == "random_convex":
        for _ in range(spec.get("count", 1)):
            d = geometry.random_convex_polygon(rng, spec["n_vertices"], spec.get("scale", 1.0))
            out.append(Built(d, spec, (lambda dd: lambda P: caricature.phi_polygon(dd, P, metric="euclidean"))(d)))
        return out
    if kind == "random_triangles":
        lo = math.radians(spec["min_angle_deg"])
        while len(out) < spec.get("count", 1):
            a1, a2 = rng.uniform(lo, math.pi - 2 * lo, 2)
            if math.pi - a1 - a2 >= lo:
                d = geometry.triangle_from_angles(a1, a2, spec.get("longest", 1.0))
                out.append(Built(d, spec, (lambda dd: lambda P: caricature.phi_triangle(dd, P))(d)))
        return out
    raise ValueError(f"unknown domain kind {kind!r}")


def _single(spec, rng) -> Built:
    b = build_domain(spec, rng)
    if len(b) != 1:
        raise ValueError("a nested domain must expand to exactly one domain")
    return b[0]


def _expand(exp: ExperimentConfig, specs=None) -> list[Built]:
    rng = exp.rng
    return [b for s in (exp.domains if specs is None else specs) for b in build_domain(s, rng)]


# ---------------------------------------------------------------------------
# spacing and solves
# ---------------------------------------------------------------------------

def _spacing(exp: ExperimentConfig, diam: float) -> float:
    if exp.h is not None:
        h = exp.h
    elif exp.h_factor is not None:
        h = diam / exp.h_factor
    else:
        h = diam / 256
    return max(h, diam / FAST_FACTOR) if exp.fast else h


def _spacings(exp: ExperimentConfig, diam: float, hs: list[float]) -> list[float]:
    """A refinement ladder; --fast rescales it so the finest step is diam/64."""
    if exp.fast:
        s = max(1.0, (diam / FAST_FACTOR) / min(hs))
        hs = [h * s for h in hs]
    return hs


def _grid(dom, h: float) -> discretize.Grid:
    if isinstance(dom, float):
        return discretize.rasterize_interval(dom, h)
    return discretize.rasterize(dom, h)


def _solve(dom, h: float, k: int, tol: float, operator: dict | None = None) -> spectral.Spectrum:
    g = _grid(dom, h)
    if operator:
        coef = discretize.CoefficientField.constant(operator["a11"], operator.get("a12", 0.0), operator["a22"])
        A = discretize.assemble_divergence_form(g, coef)
    else:
        A = discretize.assemble_laplacian(g)
    return spectral.smallest_eigenpairs(A, g, k, config=spectral.SolverConfig(tol=tol))


def _maxphi(spec: spectral.Spectrum, dom) -> float:
    mu = dom if isinstance(dom, float) else geometry.area(dom)
    return analysis.sup_norm_bounds(spec, mu, mu).lower


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def render_field(f: discretize.GridField, path) -> Path:
    """Write f as an ASCII PGM: [0, max f] maps linearly onto [0, 255], exterior 0."""
    v = np.asarray(f.values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("field has non-finite values")
    g = f.grid
    top = float(v.max()) if v.size else 0.0
    scaled = np.round(np.clip(v, 0, None) / top, 9) if top > 0 else np.zeros_like(v)
    px = np.rint(255 * scaled).astype(int)
    if g.ndim == 1:
        img = px[None, :]
    else:
        img = g.to_image(px, 0).astype(int)[::-1]  # top row = largest y
    rows, cols = img.shape
    buf = io.StringIO()
    buf.write(f"P2\n# h={g.h:.10g} scale={top:.10g}\n{cols} {rows}\n255\n")
    for r in img:
        buf.write(" ".join(map(str, r)) + "\n")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    return path


# ---------------------------------------------------------------------------
# experiment kinds
# ---------------------------------------------------------------------------

def _eigensolve(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    (b,) = _expand(exp)
    h = _spacing(exp, b.diam)
    spec = _solve(b.domain, h, exp.k, exp.tol, p.get("operator"))
    targets = p.get("targets")
    ref = p.get("reference")
    if ref == "rectangle":
        s = b.spec
        targets = reference.rectangle_eigenvalues(s["width"], s["height"], exp.k)
    elif ref == "disk":
        targets = [reference.disk_eigenvalue_1(b.spec.get("radius", 1.0))]
    elif ref == "interval":
        targets = [reference.interval_eigenvalue(b.spec["a"], j) for j in range(1, exp.k + 1)]
    tol = p.get("rel_tol", 1e-3)
    rows = []
    for j, lam in enumerate(spec.eigenvalues, 1):
        if targets is not None and j <= len(targets):
            rt = tol[j - 1] if isinstance(tol, list) else tol
            t = targets[j - 1]
            rows.append(_row(exp.name, f"lambda_{j}", lam, t * (1 - rt), t * (1 + rt), h))
        else:
            rows.append(_row(exp.name, f"lambda_{j}", lam, h=h))
    rows.append(_row(exp.name, "residual_max", spec.residuals.max(), h=h))
    rows.append(_row(exp.name, "maxphi_lower", _maxphi(spec, b.domain), p.get("maxphi_min", 0.95), h=h))
    for j in range(1, min(exp.k, p.get("images", 1)) + 1):
        render_field(spec.phi(j), out / exp.name / f"phi_{j}.pgm")
    return rows


def _coarse_region(spec_fine, dom, h_coarse, margin):
    return analysis.node_boundary_distance(spec_fine.grid, None if isinstance(dom, float) else dom) \
        >= margin * h_coarse * (1 - 1e-12)


def _caricature_compare(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    """Spread of phi/Phi over the 2h-interior, and its change under refinement.

    The refined spread is measured on the coarse grid's 2h-interior so that
    both numbers describe the same region.
    """
    p = exp.params
    margin = p.get("margin", 2.0)
    rows, spreads, changes = [], [], []
    for i, b in enumerate(_expand(exp)):
        tag = f"[{i}]"
        if isinstance(b.domain, float):  # pointwise sandwich on the 1-D reduction
            h = _spacing(exp, b.diam)
            spec = _solve(b.domain, h, 1, exp.tol)
            x = spec.grid.points[:, 0]
            phi, Phi = spec.vectors[:, 0], b.caricature(x)
            slack = p.get("slack", 0.005)
            rows.append(_row(exp.name, f"lower_ratio_min{tag}", (phi / Phi).min(), 1 - slack, h=h))
            rows.append(_row(exp.name, f"upper_ratio_max{tag}", (phi / (math.pi / 2 * Phi)).max(),
                             hi=1 + slack, h=h))
            continue
        factors = p.get("h_factors", [128, 256])
        hs = _spacings(exp, b.diam, [b.diam / f for f in factors])
        base = None
        for j, h in enumerate(hs):
            spec = _solve(b.domain, h, 1, exp.tol)
            if j == 0:
                r = analysis.comparability_report(spec.phi(1), b.caricature, margin=margin)
                base = r.spread
                spreads.append(base)
                rows.append(_row(exp.name, f"spread{tag}", base, 1.0, p.get("max_spread", math.inf), h))
                if i == 0 and p.get("images", True):
                    render_field(spec.phi(1), out / exp.name / "phi_1.pgm")
            else:
                reg = _coarse_region(spec, b.domain, hs[0], margin)
                r = analysis.comparability_report(spec.phi(1), b.caricature, region=reg, margin=0)
                ch = analysis.refinement_change(base, r.spread)
                changes.append(ch)
                rows.append(_row(exp.name, f"spread_refined{tag}", r.spread, h=h))
                rows.append(_row(exp.name, f"change{tag}", ch, 0.0, p.get("max_change", math.inf), h))
        if isinstance(b.domain, geometry.PerturbedTriangle) and "branch_factor" in p:
            rows.append(_row(exp.name, f"branch_factor{tag}", _branch_factor(b.domain), 1.0, p["branch_factor"]))
    if spreads:
        rows.append(_row(exp.name, "spread_max", max(spreads), 1.0, p.get("max_spread", math.inf)))
    if changes:
        rows.append(_row(exp.name, "change_max", max(changes), 0.0, p.get("max_change", math.inf)))
    return rows


def _branch_factor(U: geometry.PerturbedTriangle) -> float:
    """Pointwise disagreement max(q, 1/q), q = bump branch / triangle branch, over 2B minus B inside T."""
    T = U.triangle
    at_x = caricature.phi_triangle(T, U.x_eps)
    th = np.linspace(0, 2 * math.pi, 721)
    rr = np.linspace(U.eps, 2 * U.eps, 41)
    R, TH = np.meshgrid(rr, th)
    P = U.bump_centroid + np.stack([R.ravel() * np.cos(TH.ravel()), R.ravel() * np.sin(TH.ravel())], axis=1)
    P = P[T.contains_points(P)]
    q = caricature.phi_perturbed_triangle(U, at_x, P, branch="bump") / \
        caricature.phi_perturbed_triangle(U, at_x, P, branch="triangle")
    return float(max(q.max(), 1 / q.min()))


def _sandwich(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    V, U, Vc = (b.domain for b in _expand(exp))
    diam = geometry.inner_diameter(V)
    hs = _spacings(exp, diam, p.get("h_list", [1 / 64, 1 / 128]))
    cap, margin = p.get("cap", 5.0), p.get("margin", 2.0)
    rows, prev = [], None
    for i, h in enumerate(hs):
        sp = [_solve(d, h, 1, exp.tol, p.get("operator")) for d in (V, U, Vc)]
        r = analysis.sandwich_check(*sp, caps=(cap, cap), margin=margin)
        rows.append(_row(exp.name, f"sup_V_over_U[{i}]", r.sup_V_over_U, 0.0, cap, h))
        rows.append(_row(exp.name, f"sup_U_over_Vc[{i}]", r.sup_U_over_Vc, 0.0, cap, h))
        if prev is not None:
            mc = p.get("max_change", math.inf)
            rows.append(_row(exp.name, "change_V_over_U",
                             analysis.refinement_change(prev.sup_V_over_U, r.sup_V_over_U), 0.0, mc, h))
            rows.append(_row(exp.name, "change_U_over_Vc",
                             analysis.refinement_change(prev.sup_U_over_Vc, r.sup_U_over_Vc), 0.0, mc, h))
        prev = r
    return rows


def _separation(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    ks = p.get("ks", [1])
    mins = p.get("min_product", [1.0] * len(ks))
    spots = p.get("spot_values", [])
    rows, worst = [], {k: math.inf for k in ks}
    for i, b in enumerate(_expand(exp)):
        h = _spacing(exp, b.diam)
        spec = _solve(b.domain, h, max(ks), exp.tol)
        for k, lo in zip(ks, mins):
            s = analysis.max_separation(spec, b.domain, k)
            worst[k] = min(worst[k], s.product)
            rows.append(_row(exp.name, f"separation_k{k}[{i}]", s.product, lo, h=h))
        if i < len(spots) and spots[i] is not None:
            rt = p.get("spot_rel_tol", 0.01)
            s1 = analysis.max_separation(spec, b.domain, 1).product
            rows.append(_row(exp.name, f"spot_k1[{i}]", s1, spots[i] * (1 - rt), spots[i] * (1 + rt), h))
        rows.append(_row(exp.name, f"maxphi_lower[{i}]", _maxphi(spec, b.domain), p.get("maxphi_min", 0.95), h=h))
    for k, lo in zip(ks, mins):
        rows.append(_row(exp.name, f"separation_k{k}_min", worst[k], lo))
    return rows


def _tube_profile(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    deltas = exp.params.get("deltas", [0.01, 0.02, 0.05])
    rows, bad = [], 0
    for i, b in enumerate(_expand(exp)):
        rep = geometry.convex_tube_bound_check(b.domain, deltas)
        for dl, a, m in zip(rep.deltas, rep.actual, rep.margin):
            rows.append(_row(exp.name, f"tube_margin[{i}]@{dl:g}", m, 0.0))
            bad += int(m < 0)
        if len(rep.deltas) < len(deltas):
            rows.append(_row(exp.name, f"deltas_out_of_range[{i}]", len(deltas) - len(rep.deltas)))
    rows.append(_row(exp.name, "violations", bad, 0, 0))
    return rows


def _monotonicity(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    K = p.get("K", 20)
    k = exp.k if exp.k > 1 else 3
    n_pairs = p.get("n_pairs", 100)
    pairs = p["pairs"]
    rng = exp.rng
    per = [n_pairs // len(pairs) + (1 if i < n_pairs % len(pairs) else 0) for i in range(len(pairs))]
    rows, total_bad = [], 0
    for i, pr in enumerate(pairs):
        U = _single(pr["inner"], rng).domain
        V = _single(pr["outer"], rng).domain
        h = _spacing(exp, geometry.inner_diameter(U))
        sU = _solve(U, h, max(K, k), exp.tol, p.get("operator"))
        sV = _solve(V, h, max(K, k), exp.tol, p.get("operator"))
        m = spectral.eigen_monotonicity_check(sU, sV)
        for j in range(k):
            rel = m.margin[j] / m.lam_U[j]
            rows.append(_row(exp.name, f"lambda_{j + 1}_margin[{i}]", rel, -max(sU.tol, sV.tol), h=h))
        nodes = rng.choice(sU.grid.n, (per[i], 2))
        rep = heatkernel.kernel_monotonicity_check(sU, sV, 1.0 / sU.lambda1, nodes, K)
        total_bad += rep.violations
        rows.append(_row(exp.name, f"kernel_max_excess[{i}]", rep.max_excess, hi=rep.tolerance, h=h))
        rows.append(_row(exp.name, f"kernel_violations[{i}]", rep.violations, 0, 0, h))
    rows.append(_row(exp.name, "kernel_violations", total_bad, 0, 0))
    return rows


def _iu_ratio(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    (b,) = _expand(exp)
    K = p.get("K", 20)
    h = _spacing(exp, b.diam)
    spec = _solve(b.domain, h, K, exp.tol)
    pool = np.flatnonzero(analysis.interior_region(spec.grid))
    pairs = exp.rng.choice(pool, (p.get("n_pairs", 50), 2))
    fs = p.get("t_factors", [0.5, 1.0, 2.0])
    devs = []
    rows = []
    for j, f in enumerate(fs):
        r = heatkernel.iu_ratio(spec, f * b.diam**2, pairs[:, 0], pairs[:, 1], K, diam=b.diam)
        devs.append(float(np.abs(r - 1).max()))
        hi = p.get("tol", math.inf) if j == len(fs) - 1 else math.inf
        rows.append(_row(exp.name, f"iu_deviation@{f:g}diam2", devs[-1], 0.0, hi, h))
    mono = all(b2 <= a2 * (1 + 1e-12) for a2, b2 in zip(devs, devs[1:]))
    rows.append(_row(exp.name, "iu_nonincreasing", float(mono), 1, 1, h))
    return rows


def _heatkernel_envelope(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    K = p.get("K", 20)
    rng = exp.rng
    rows = []
    for i, b in enumerate(_expand(exp)):
        h = _spacing(exp, b.diam)
        spec = _solve(b.domain, h, K, exp.tol)
        smp = heatkernel.sample_envelope_points(spec, p.get("n_samples", 200), rng, K)
        fit = heatkernel.lierl_envelope_fit(spec, b.domain, smp, K)
        for c in ("c1", "c2", "c3", "c4"):
            rows.append(_row(exp.name, f"{c}[{i}]", getattr(fit, c), 0.0, sys.float_info.max, h))
        rows.append(_row(exp.name, f"c1_over_c3[{i}]", fit.ratio, 0.0, p.get("max_ratio", 1e3), h))
    return rows


def _green_check(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    p = exp.params
    lo, hi = p.get("bracket", [0.05, 0.5])
    tol = p.get("invariance_tol", 1e-10)
    rows = []
    for mode in p.get("modes", ["interior", "exterior"]):
        reps = [heatkernel.green_linear_check(e, mode, bracket=(lo, hi)) for e in p.get("eps", [0.1, 1.0, 10.0])]
        for r in reps:
            rows.append(_row(exp.name, f"{mode}_ratio_min@eps={r.eps:g}", r.ratio_min, lo, hi))
            rows.append(_row(exp.name, f"{mode}_ratio_max@eps={r.eps:g}", r.ratio_max, lo, hi))
        spread = max(max(abs(r.ratio_min - reps[0].ratio_min), abs(r.ratio_max - reps[0].ratio_max)) for r in reps)
        rows.append(_row(exp.name, f"{mode}_eps_invariance", spread, 0.0, tol))
    return rows


RUNNERS = {
    "eigensolve": _eigensolve,
    "caricature_compare": _caricature_compare,
    "sandwich": _sandwich,
    "separation": _separation,
    "heatkernel_envelope": _heatkernel_envelope,
    "green_check": _green_check,
    "tube_profile": _tube_profile,
    "iu_ratio": _iu_ratio,
    "monotonicity": _monotonicity,
}


def run_experiment(exp: ExperimentConfig, out: Path) -> list[ResultRow]:
    """Run one experiment; failures become a single failing ``error`` row."""
    t0 = time.perf_counter()
    try:
        rows = RUNNERS[exp.kind](exp, Path(out))
    except Exception as e:  # noqa: BLE001 - report and keep going
        log.error("experiment %s failed: %s: %s", exp.name, type(e).__name__, e)
        rows = [ResultRow(exp.name, "error", math.nan, math.nan, math.nan, False)]
    dt = time.perf_counter() - t0
    return [ResultRow(r.name, r.metric, r.value, r.bracket_lo, r.bracket_hi, r.passed, r.h, dt) for r in rows]


def write_csv(rows: list[ResultRow], path, timings: bool = False) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells(timings))
    Path(path).write_text(buf.getvalue())


def run(config_path, out=None, jobs: int = 1, fast: bool = False, timings: bool = False) -> int:
    """Run every experiment of a config; return the process exit status."""
    try:
        exps, raw = load_config(config_path, fast)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = Path(out or os.environ.get("EIGENPROFILE_OUT") or raw.get("output") or "out")
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(exps) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_experiment, exps, [out] * len(exps)))
    else:
        results = [run_experiment(e, out) for e in exps]
    rows = [r for rs in results for r in rs]
    write_csv(rows, out / "results.csv", timings)
    failed = [f"{r.name}:{r.metric}" for r in rows if not r.passed]
    for f in failed:
        log.warning("failed: %s", f)
    return 0 if not failed else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="eigenprofile", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments of a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (env EIGENPROFILE_OUT also works)")
    r.add_argument("--jobs", type=int, default=1, help="experiments run in parallel")
    r.add_argument("--fast", action="store_true", help="coarsen every grid to diam/64")
    r.add_argument("--timings", action="store_true", help="fill the seconds column")
    r.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return run(args.config, args.out, max(1, args.jobs), args.fast, args.timings)


if __name__ == "__main__":
    sys.exit(main())
