import csv
import json

import pytest

from czic import fixtures
from czic.cli import main

FAST = ["--v-cap", "2", "--u-cap", "2", "--restarts", "2"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    assert main(["fixtures", "--out", str(out)]) == 0
    return out


def test_region_capacity_xor(tmp_path, fixture_dir):
    code = main(["region", "--channel", str(fixture_dir / "xor.json"), "--kind", "capacity",
                 "--r2-grid", "5", "--out", str(tmp_path), *FAST])
    assert code == 0
    rows = read_csv(tmp_path / "region_capacity.csv")
    assert len(rows) == 5
    assert all(abs(float(r["best_r1"]) - 1.0) <= 0.02 for r in rows)
    m = manifest(tmp_path)
    assert m["error"] is None and m["seed"] == 0
    assert str(tmp_path / "region_capacity.csv") in m["outputs"]


def test_region_all_writes_coincidence_and_hull(tmp_path):
    code = main(["region", "--channel", "fixture:xor", "--kind", "all", "--r2-grid", "3",
                 "--convex-hull", "--out", str(tmp_path), *FAST])
    assert code == 0
    report = json.loads((tmp_path / "coincidence.json").read_text())
    assert report["max_inner_outer_gap"] <= 0.02
    assert (tmp_path / "hull_inner.csv").exists()


def test_missing_channel_file(tmp_path):
    assert main(["region", "--channel", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
    assert "ParseError" in manifest(tmp_path)["error"]


def test_gp_command(tmp_path):
    assert main(["gp", "--channel", "fixture:xor", "--r2-grid", "3", "--out", str(tmp_path), *FAST]) == 0
    rows = read_csv(tmp_path / "gp_curve.csv")
    assert [abs(float(r["c_r2"]) - 1.0) <= 0.02 for r in rows] == [True] * 3
    assert json.loads((tmp_path / "gp_reduction.json").read_text())["pass"] is True


def test_gp_errors(tmp_path):
    assert main(["gp", "--channel", "fixture:xor", "--r2-max", "5", "--r2-grid", "2",
                 "--out", str(tmp_path / "a"), *FAST]) == 2
    assert main(["gp", "--channel", "fixture:noisy_xor", "--out", str(tmp_path / "b"), *FAST]) == 1
    assert "NotNoiseless" in manifest(tmp_path / "b")["error"]


def test_simulate_command(tmp_path, fixture_dir):
    args = ["simulate", "--channel", "fixture:xor", "--scheme", str(fixture_dir / "xor_precoding_scheme.json"),
            "--n-list", "8,10", "--trials", "50"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "simulation.csv")
    assert [r["n"] for r in rows] == ["8", "10"]
    assert main([*args[:-1], "0", "--out", str(tmp_path / "z")]) == 1
    assert main([*args[:5], "--n-list", "40", "--out", str(tmp_path / "b")]) == 2


def test_simulate_default_scheme(tmp_path):
    code = main(["simulate", "--channel", "fixture:interference_free", "--n-list", "8",
                 "--trials", "20", "--out", str(tmp_path), *FAST])
    assert code == 0
    assert (tmp_path / "scheme.json").exists()


def test_usage_error_is_input_error():
    assert main(["simulate", "--n-list"]) == 1


def test_verify_rejects_corrupted_channel(tmp_path):
    doc = fixtures.xor_channel().to_dict()
    doc["chan1"][0][0] = [0.7, 0.7]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", "--channel", str(bad), "--out", str(tmp_path)]) == 1
    assert manifest(tmp_path)["error"].startswith("RowNotNormalized")


def test_verify_stock_suite(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    results = json.loads((tmp_path / "verify.json").read_text())
    assert any("expected failure" in r["name"] and r["passed"] for r in results)
