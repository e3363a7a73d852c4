import csv
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from eigenprofile import cli
from eigenprofile import discretize as D
from eigenprofile import geometry as G
from eigenprofile import spectral as S

SQUARE = {"kind": "rectangle", "width": 1, "height": 1}


def write(tmp_path, experiments, **top):
    cfg = {"version": 1, "seed": 7, "experiments": experiments, **top}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg, indent=1))
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_pgm(path):
    tok = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    assert tok[0] == "P2"
    cols, nrows = map(int, tok[1].split())
    assert tok[2] == "255"
    return np.array([list(map(int, ln.split())) for ln in tok[3:]]).reshape(nrows, cols)


def test_square_eigensolve(tmp_path):
    cfg = write(tmp_path, [{"name": "sq", "kind": "eigensolve", "domain": SQUARE, "h": 1 / 64,
                            "params": {"targets": [19.739], "rel_tol": 2e-3}}])
    assert cli.run(cfg, tmp_path / "out") == 0
    r = rows(tmp_path / "out" / "results.csv")
    lam = [x for x in r if x["metric"] == "lambda_1"][0]
    assert float(lam["value"]) == pytest.approx(19.739, rel=2e-3)
    assert lam["pass"] == "true" and lam["seconds"] == ""
    assert float(lam["h"]) == 1 / 64
    assert (tmp_path / "out" / "sq" / "phi_1.pgm").exists()


def test_empty_experiment_list(tmp_path):
    cfg = write(tmp_path, [])
    assert cli.run(cfg, tmp_path / "out") == 0
    assert (tmp_path / "out" / "results.csv").read_text() == ",".join(cli.CSV_HEADER) + "\n"


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"version": 1,\n "experiments": [\n')
    assert cli.run(p, tmp_path / "out") != 0
    assert not (tmp_path / "out").exists()
    assert "bad.json:3:" in capsys.readouterr().err


@pytest.mark.parametrize("exp, needle", [
    ({"name": "a", "kind": "eigensolve", "domain": SQUARE, "h": 0.1, "colour": 1}, "colour"),
    ({"name": "a", "kind": "eigensolve", "domain": {"kind": "disk", "radius": 1, "edge": 2}, "h": 0.1}, "edge"),
    ({"name": "a", "kind": "eigensolve", "domain": SQUARE, "h": 0.1, "h_factor": 10}, "/experiments/0"),
    ({"name": "a", "kind": "dance", "domain": SQUARE}, "dance"),
    ({"name": "a b", "kind": "eigensolve", "domain": SQUARE}, "/experiments/0/name"),
    ({"name": "a", "kind": "eigensolve"}, "needs a domain"),
    ({"name": "a", "kind": "eigensolve", "domain": {"kind": "rectangle", "width": -1, "height": 1}}, "/experiments/0"),
    ({"name": "a", "kind": "separation", "domain": SQUARE, "params": {"spot": 1}}, "spot"),
])
def test_schema_errors(tmp_path, capsys, exp, needle):
    cfg = write(tmp_path, [exp])
    assert cli.run(cfg, tmp_path / "out") == 2
    assert needle in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_duplicate_names(tmp_path):
    e = {"name": "a", "kind": "eigensolve", "domain": SQUARE, "h": 0.1}
    with pytest.raises(cli.ConfigError, match="duplicate"):
        cli.load_config(write(tmp_path, [e, e]))


def test_wrong_version(tmp_path):
    p = tmp_path / "v.json"
    p.write_text(json.dumps({"version": 2, "experiments": []}))
    with pytest.raises(cli.ConfigError):
        cli.load_config(p)


def test_solver_failure_is_isolated(tmp_path):
    cfg = write(tmp_path, [
        {"name": "coarse", "kind": "eigensolve", "domain": SQUARE, "h": 5.0},
        {"name": "fine", "kind": "eigensolve", "domain": SQUARE, "h": 0.1},
    ])
    assert cli.run(cfg, tmp_path / "out") == 1
    r = rows(tmp_path / "out" / "results.csv")
    assert r[0]["name"] == "coarse" and r[0]["metric"] == "error" and r[0]["pass"] == "false"
    assert any(x["name"] == "fine" and x["metric"] == "lambda_1" for x in r)


def test_exit_status_is_and_of_flags(tmp_path):
    cfg = write(tmp_path, [{"name": "sq", "kind": "eigensolve", "domain": SQUARE, "h": 1 / 16,
                            "params": {"targets": [1.0], "rel_tol": 0.01}}])
    assert cli.run(cfg, tmp_path / "out") == 1


SMOKE = [
    {"name": "eig", "kind": "eigensolve", "domain": {"kind": "interval", "a": 1}, "h": 1 / 64, "k": 2,
     "params": {"reference": "interval"}},
    {"name": "car", "kind": "caricature_compare", "domain": {"kind": "regular_polygon", "n": 5, "l": 1},
     "params": {"h_factors": [24, 48], "max_spread": 50, "max_change": 0.5}},
    {"name": "sand", "kind": "sandwich", "domains": [SQUARE, {"kind": "dilate", "base": SQUARE, "c": 1.1,
                                                               "center": [0.5, 0.5]}, {"kind": "dilate", "base": SQUARE, "c": 1.2, "center": [0.5, 0.5]}],
     "params": {"h_list": [1 / 16, 1 / 32], "cap": 5, "max_change": 0.5}},
    {"name": "sep", "kind": "separation", "domains": [SQUARE, {"kind": "disk", "radius": 1}], "h_factor": 32},
    {"name": "env", "kind": "heatkernel_envelope", "domain": SQUARE, "h_factor": 24,
     "params": {"K": 10, "n_samples": 30, "max_ratio": 1e4}},
    {"name": "green", "kind": "green_check", "params": {"eps": [1], "modes": ["interior"]}},
    {"name": "tube", "kind": "tube_profile", "domains": [{"kind": "random_convex", "count": 2, "n_vertices": 6}],
     "params": {"deltas": [0.02, 0.05]}},
    {"name": "iu", "kind": "iu_ratio", "domain": SQUARE, "h_factor": 24,
     "params": {"K": 10, "t_factors": [0.5, 1], "n_pairs": 10, "tol": 1e-6}},
    {"name": "mono", "kind": "monotonicity", "h": 0.05, "k": 2,
     "params": {"pairs": [{"inner": SQUARE, "outer": {"kind": "rectangle", "width": 1.5, "height": 1.5,
                                                      "origin": [-0.25, -0.25]}}], "K": 8, "n_pairs": 20}},
]


@pytest.fixture(scope="module")
def smoke(tmp_path_factory):
    d = tmp_path_factory.mktemp("smoke")
    cfg = write(d, SMOKE)
    status = cli.run(cfg, d / "a")
    return d, cfg, status


def test_every_kind_runs(smoke):
    d, cfg, status = smoke
    r = rows(d / "a" / "results.csv")
    assert [x["name"] for x in r if x["metric"] == "error"] == []
    assert {x["name"] for x in r} == {e["name"] for e in SMOKE}
    # rows follow config order
    order = [e["name"] for e in SMOKE]
    seen = list(dict.fromkeys(x["name"] for x in r))
    assert seen == order
    assert status == (0 if all(x["pass"] == "true" for x in r) else 1)


def test_rerun_byte_identical_and_parallel(smoke):
    d, cfg, _ = smoke
    cli.run(cfg, d / "b", jobs=3)
    assert (d / "a" / "results.csv").read_bytes() == (d / "b" / "results.csv").read_bytes()


def test_timings_column(tmp_path):
    cfg = write(tmp_path, [{"name": "sq", "kind": "eigensolve", "domain": SQUARE, "h": 0.1}])
    cli.run(cfg, tmp_path / "o", timings=True)
    assert all(float(x["seconds"]) >= 0 for x in rows(tmp_path / "o" / "results.csv"))


def test_fast_mode_coarsens(tmp_path):
    cfg = write(tmp_path, [{"name": "sq", "kind": "eigensolve", "domain": SQUARE, "h": 1 / 256}])
    cli.run(cfg, tmp_path / "o", fast=True)
    h = float(rows(tmp_path / "o" / "results.csv")[0]["h"])
    assert h == pytest.approx(math.sqrt(2) / 64)


def test_env_output_override(tmp_path, monkeypatch):
    cfg = write(tmp_path, [], output=str(tmp_path / "from_config"))
    monkeypatch.setenv("EIGENPROFILE_OUT", str(tmp_path / "from_env"))
    cli.run(cfg)
    assert (tmp_path / "from_env" / "results.csv").exists()
    assert not (tmp_path / "from_config").exists()


def test_console_script(tmp_path):
    cfg = write(tmp_path, [])
    env = {**os.environ, "PYTHONPATH": str(Path(cli.__file__).parents[1])}
    res = subprocess.run([sys.executable, "-m", "eigenprofile", "run", str(cfg), "--out", str(tmp_path / "o")],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "o" / "results.csv").exists()


def test_render_constant_and_zero(tmp_path):
    g = D.rasterize(G.build_disk(), 0.25)
    img = read_pgm(cli.render_field(D.GridField(g, np.full(g.n, 3.0)), tmp_path / "c.pgm"))
    mask = g.to_image(np.ones(g.n), 0)[::-1] > 0
    assert np.all(img[mask] == 255) and np.all(img[~mask] == 0)
    img0 = read_pgm(cli.render_field(D.GridField(g, np.zeros(g.n)), tmp_path / "z.pgm"))
    assert not img0.any()
    text = (tmp_path / "c.pgm").read_text()
    assert "# h=0.25 scale=3" in text
    with pytest.raises(ValueError):
        cli.render_field(D.GridField(g, np.full(g.n, np.nan)), tmp_path / "n.pgm")


def test_render_square_symmetry(tmp_path):
    spec = S.solve_domain(G.build_rectangle(1, 1), 1 / 32)[0]
    img = read_pgm(cli.render_field(spec.phi(1), tmp_path / "p.pgm"))
    assert img.shape == (31, 31)
    assert img.max() == 255 and img[15, 15] == 255
    for t in (img[::-1], img[:, ::-1], img.T):
        assert np.array_equal(img, t)


def test_render_orientation(tmp_path):
    g = D.rasterize(G.build_rectangle(1, 1), 0.25)
    img = read_pgm(cli.render_field(D.GridField(g, g.points[:, 1]), tmp_path / "y.pgm"))
    assert img[0, 0] == 255 and img[-1, 0] == 85  # top row is largest y


def test_experiment_rng_stable():
    a = cli.ExperimentConfig("x", "eigensolve", seed=42).rng.random(3)
    b = cli.ExperimentConfig("x", "eigensolve", seed=42).rng.random(3)
    c = cli.ExperimentConfig("y", "eigensolve", seed=42).rng.random(3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
