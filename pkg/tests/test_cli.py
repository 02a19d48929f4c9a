import json

import numpy as np
import pytest

from uqgeom import load_point_set
from uqgeom.cli import main
from uqgeom.sip import read_pgm


@pytest.fixture
def indecisive_file(tmp_path):
    doc = {
        "dimension": 2,
        "model": "indecisive",
        "points": [
            {"locations": [[0, 0], [1, 0], [0, 1]], "weights": ["1/2", "1/4", "1/4"]},
            {"locations": [[2, 0], [2, 1]], "weights": ["1/3", "2/3"]},
            {"locations": [[0.5, 1.5], [1.5, 1.5]], "weights": ["0.5", "0.5"]},
        ],
    }
    path = tmp_path / "set.json"
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def continuous_file(tmp_path):
    doc = {
        "dimension": 2,
        "model": "continuous",
        "points": [
            {"kind": "gaussian", "mean": [0, 0], "cov": [[0.3, 0.05], [0.05, 0.2]]},
            {"kind": "point_mass", "at": [1, 2]},
        ],
    }
    path = tmp_path / "cont.json"
    path.write_text(json.dumps(doc))
    return path


def test_quantize_deterministic_output(indecisive_file, tmp_path):
    out1 = tmp_path / "q1.csv"
    out2 = tmp_path / "q2.csv"
    args = ["quantize", "--input", str(indecisive_file), "--measure", "seb2",
            "--eps", "0.1", "--delta", "0.05", "--seed", "4"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().splitlines()) == 201  # header + m=200 rows


def test_exact_and_oracle_agree(indecisive_file, tmp_path):
    a = tmp_path / "e.csv"
    b = tmp_path / "o.csv"
    assert main(["exact", "--input", str(indecisive_file), "--measure", "aabb-perimeter",
                 "--out", str(a)]) == 0
    assert main(["oracle", "--input", str(indecisive_file), "--measure", "aabb-perimeter",
                 "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_exact_diameter_exit_code(indecisive_file, tmp_path):
    rc = main(["exact", "--input", str(indecisive_file), "--measure", "diameter",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_oracle_cap_exit_code(indecisive_file, tmp_path):
    rc = main(["oracle", "--input", str(indecisive_file), "--measure", "seb2",
               "--cap", "2", "--out", str(tmp_path / "x.csv")])
    assert rc == 3


def test_validation_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "dimension": 2, "model": "indecisive",
        "points": [{"locations": [[0, 0]], "weights": ["0.99"]}],
    }))
    rc = main(["exact", "--input", str(bad), "--measure", "seb2",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_sip_exact_raster_and_isolines(indecisive_file, tmp_path):
    pgm = tmp_path / "f.pgm"
    svg = tmp_path / "f.svg"
    rc = main(["sip-exact", "--input", str(indecisive_file), "--measure", "seb2",
               "--grid", "24,24", "--bounds=-1,-1,3,3",
               "--out", str(pgm), "--isolines", str(svg)])
    assert rc == 0
    raster = read_pgm(pgm)
    assert raster.values.shape == (24, 24)
    assert raster.bounds == (-1.0, -1.0, 3.0, 3.0)
    assert svg.read_text().startswith("<svg")


def test_sip_random_seeded_identical(indecisive_file, tmp_path):
    args = ["sip-random", "--input", str(indecisive_file), "--measure", "seb2",
            "--eps", "0.2", "--delta", "0.1", "--nu", "3", "--seed", "9",
            "--grid", "16,16", "--bounds=-1,-1,3,3"]
    a = tmp_path / "a.pgm"
    b = tmp_path / "b.pgm"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_kvariate_and_kernel(indecisive_file, tmp_path):
    rc = main(["kvariate", "--input", str(indecisive_file),
               "--measures", "dwid:1,0;dwid:0,1", "--eps", "0.2", "--delta", "0.1",
               "--m", "100", "--seed", "2", "--out", str(tmp_path / "kv.csv")])
    assert rc == 0
    lines = (tmp_path / "kv.csv").read_text().splitlines()
    assert lines[0] == "v0,v1,weight" and len(lines) == 101
    rc = main(["kernel", "--input", str(indecisive_file), "--alpha", "0.2",
               "--eps", "0.2", "--delta", "0.1", "--m", "50", "--direction", "1,0",
               "--seed", "2", "--out", str(tmp_path / "w.csv")])
    assert rc == 0


def test_discretize_emits_model_schema(continuous_file, tmp_path):
    out = tmp_path / "disc.json"
    rc = main(["discretize", "--input", str(continuous_file), "--measure", "aabb-perimeter",
               "--eps", "0.3", "--points-per-point", "25", "--out", str(out)])
    assert rc == 0
    back = load_point_set(out.read_text())
    assert back.dimension == 2
    assert back.points[1].k == 1  # the point mass


def test_experiment_and_fit_round_trip(tmp_path):
    outdir = tmp_path / "exp"
    rc = main(["experiment", "--n", "5", "--sigma", "0.5", "--measures", "diameter",
               "--m-values", "8,16", "--eta", "300", "--tau", "8", "--seed", "3",
               "--out", str(outdir)])
    assert rc == 0
    tables = sorted(outdir.glob("deviation_diameter_m*.csv"))
    assert len(tables) == 2
    rc = main(["fit", "--tables"] + [str(t) for t in tables] + ["--out", str(tmp_path / "fit.csv")])
    assert rc == 0
    assert (tmp_path / "fit.csv").exists()
