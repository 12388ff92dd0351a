import csv
import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from ballscatter import certify, cli
from ballscatter.resonance import ResonanceBracket
from make_fixtures import GOLDEN

SCHEMA_FOR = {
    "coeffs": "coeffs",
    "field": "field",
    "norms": "norms",
    "resonances": "resonances",
    "excluded-set": "excluded-set",
    "certify": "certify",
}


def schema(name):
    text = resources.files("ballscatter").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden(name, fixtures_dir, tmp_path):
    code, text = run(GOLDEN[name], tmp_path)
    assert code == 0
    assert text == (fixtures_dir / "golden" / name).read_text()


@pytest.mark.parametrize("name", sorted(n for n in GOLDEN if n.endswith(".json")))
def test_golden_schema(name, fixtures_dir):
    doc = json.loads((fixtures_dir / "golden" / name).read_text())
    jsonschema.validate(doc, schema(SCHEMA_FOR[GOLDEN[name][0]]))


def test_schemas_are_valid():
    for name in SCHEMA_FOR.values():
        jsonschema.Draft202012Validator.check_schema(schema(name))


def test_coeffs_header_and_oracle(tmp_path, oracle_coeffs):
    code, text = run(["coeffs", "--lambda", "2", "--omega-eps", "0.3", "--n-max", "5"], tmp_path)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "n,re_r,im_r,abs_r,re_t,im_t"
    rows = list(csv.DictReader(io.StringIO(text)))
    ref = [r for r in oracle_coeffs if r["lambda"] == 2.0 and r["omega_eps"] == 0.3]
    for row in rows:
        o = next(r for r in ref if r["n"] == int(row["n"]))
        assert float(row["im_r"]) == pytest.approx(float(o["im_r"]), rel=1e-12)
        assert float(row["re_t"]) == pytest.approx(float(o["re_t"]), rel=1e-12)


def test_identity_contrast(tmp_path):
    code, text = run(["coeffs", "--lambda", "1", "--omega-eps", "4", "--n-max", "8"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert all(float(r["abs_r"]) == 0.0 for r in rows)


def test_physical_reduction_echoed(fixtures_dir):
    doc = json.loads((fixtures_dir / "golden" / "coeffs_physical.json").read_text())
    red = doc["meta"]["reduction"]
    assert red["lambda"] == 2.0 and red["omega_eps"] == pytest.approx(0.3)


def test_field_origin_unit_and_error_row(fixtures_dir):
    rows = list(csv.DictReader(io.StringIO((fixtures_dir / "golden" / "field_l2_w03.csv").read_text())))
    origin = [r for r in rows if float(r["R"]) == 0.0]
    inc = next(r for r in origin if r["kind"] == "incident")
    assert float(inc["re"]) == pytest.approx(1.0, abs=1e-14) and float(inc["im"]) == 0.0
    sca = next(r for r in origin if r["kind"] == "scattered")
    assert sca["error"].startswith("error:")


def test_field_continuity_rows(tmp_path):
    code, text = run(["field", "--lambda", "2.5", "--omega-eps", "1.7", "--format", "json",
                      "--at", "0.999999999999999,0.4,0.3;1,0.4,0.3"], tmp_path)
    assert code == 0
    rows = json.loads(text)["rows"]
    get = {(r["kind"], r["R"]): complex(r["re"], r["im"]) for r in rows if "error" not in r}
    ut = get[("transmitted", 0.999999999999999)]
    total = get[("incident", 1.0)] + get[("scattered", 1.0)]
    assert abs(ut - total) < 1e-9


def test_empty_broadband(fixtures_dir):
    doc = json.loads((fixtures_dir / "golden" / "excluded_empty.json").read_text())
    assert doc["intervals"] == [] and doc["regime"] == "moderate-contrast"


def test_resonance_round_trip(fixtures_dir):
    doc = json.loads((fixtures_dir / "golden" / "resonances_t15_l10.json").read_text())
    parsed = [ResonanceBracket.from_json(b) for b in doc["brackets"]]
    assert [b.to_json() for b in parsed] == doc["brackets"]
    assert json.loads((fixtures_dir / "golden" / "resonances_below.json").read_text())["brackets"] == []


def test_precondition_exit(tmp_path, capsys):
    code, _ = run(["excluded-set", "--lambda", "5", "--mode", "1", "--tau", "0.1"], tmp_path)
    assert code == cli.EXIT_PRECONDITION
    assert "lambda > 7" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["coeffs", "--omega-eps", "0.3"],
        ["coeffs", "--lambda", "2", "--omega-eps", "0.3", "--bogus"],
        ["resonances", "--lambda", "10"],
        ["field", "--lambda", "2", "--omega-eps", "1"],
    ],
)
def test_usage_exit(args, tmp_path):
    assert run(args, tmp_path)[0] == cli.EXIT_USAGE


def test_domain_exit(tmp_path):
    assert run(["coeffs", "--lambda", "-2", "--omega-eps", "0.3"], tmp_path)[0] == cli.EXIT_PRECONDITION


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 2, "omega_eps": 0.3, "n_max": 3}))
    code, text = run(["coeffs", "--config", str(cfg)], tmp_path)
    assert code == 0 and len(text.splitlines()) == 5
    cfg.write_text(json.dumps({"lambda": 2, "omega_eps": 0.3, "colour": "red"}))
    assert run(["coeffs", "--config", str(cfg)], tmp_path)[0] == cli.EXIT_USAGE


def test_incident_file(tmp_path):
    src = tmp_path / "inc.json"
    src.write_text(json.dumps({"kind": "modal", "coeffs": [{"n": 0, "m": 0, "re": 2.0, "im": 0.0}]}))
    code, text = run(["norms", "--lambda", "2", "--omega-eps", "0.3", "--kind", "incident", "--incident", str(src)], tmp_path)
    assert code == 0
    assert json.loads(text)["n_sigma"]["value"] == pytest.approx(2.0)


def test_divergent_norm_reported(tmp_path):
    code, text = run(["norms", "--lambda", "2", "--omega-eps", "0.3", "--kind", "incident"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert doc["n_sigma"]["value"] == "inf"
    jsonschema.validate(doc, schema("norms"))


def test_certify_failure_exit(tmp_path, monkeypatch):
    def failing(grid, tol):
        col = certify._Collector("forced", "upper")
        col.add(np.array([1.0]), np.array([0.0]))
        return col.report()

    monkeypatch.setattr(certify, "certify_hankel_lemma", failing)
    code, text = run(["certify", "--suite", "hankel"], tmp_path)
    assert code == cli.EXIT_CERT
    doc = json.loads(text)
    assert doc["passed"] is False
    jsonschema.validate(doc, schema("certify"))


def test_certify_grid_file(tmp_path):
    g = certify.SweepGrid(lambdas=(0.5, 2.0), points_per_decade=5, decades=2.0, n_max=5)
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(g.to_json()))
    code, text = run(["certify", "--suite", "small_freq", "--grid", str(path)], tmp_path)
    assert code == 0
    doc = json.loads(text)
    jsonschema.validate(doc, schema("certify"))
    assert doc["reports"][0]["grid"]["lambdas"] == [0.5, 2.0]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ballscatter.cli", "coeffs", "--lambda", "2", "--omega-eps", "0.3", "--n-max", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "n,re_r,im_r,abs_r,re_t,im_t"
