import json

import pytest

from reebkit.cli import RunConfig, main, parse_field, resolve_p
from reebkit.field import FieldError
from reebkit.generators import gen_sphere
from reebkit.mesh import save_off
from reebkit.reeb import ReebGraph


@pytest.fixture(scope="module")
def sphere_off(tmp_path_factory):
    d = tmp_path_factory.mktemp("mesh")
    save_off(gen_sphere(1.0, 2), d / "s.off")
    return d / "s.off"


def run(argv, tmp_path):
    out = tmp_path / "out"
    code = main(argv + ["--out", str(out), "--no-timestamp"])
    return code, out


def test_config_round_trip():
    cfg = RunConfig(command="bound", mesh="m.off", seed=3, pairs="16")
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(ValueError, match="unknown config keys"):
        RunConfig.from_dict({"colour": "red"})


def test_field_specs(sphere3):
    assert parse_field(sphere3, "height:z").values.max() == pytest.approx(1.0)
    assert parse_field(sphere3, "height:1,0,0").values.max() == pytest.approx(1.0, abs=0.01)
    assert parse_field(sphere3, "distance:0").values[0] == 0.0
    for bad in ("height:1,2", "distance:-1", "distance:x", "curvature"):
        with pytest.raises(FieldError):
            parse_field(sphere3, bad)


def test_base_point(sphere3_height):
    assert resolve_p(sphere3_height, "south") == int(sphere3_height.values.argmin())
    assert resolve_p(sphere3_height, "north") == int(sphere3_height.values.argmax())
    assert resolve_p(sphere3_height, "7") == 7
    with pytest.raises(FieldError):
        resolve_p(sphere3_height, "east")


@pytest.mark.parametrize("cmd, artifact", [
    ("stats", "stats.json"), ("betti", "betti.json"), ("field", "field.json"), ("reeb", "reeb.json"),
    ("thickness", "thickness.json"), ("distortion", "distortion.json"), ("bound", "report.json"),
    ("audit", "audit.json"),
])
def test_subcommands(cmd, artifact, sphere_off, tmp_path):
    code, out = run([cmd, "--mesh", str(sphere_off), "--levels-per-interval", "2", "--trials", "20",
                     "--csv"], tmp_path)
    assert code == 0
    doc = json.loads((out / artifact).read_text())
    assert doc["schema"] == "reebkit-report-v1"
    assert doc["config"]["command"] == cmd
    assert "created" not in doc


def test_reeb_outputs(sphere_off, tmp_path):
    code, out = run(["reeb", "--mesh", str(sphere_off)], tmp_path)
    assert code == 0
    doc = json.loads((out / "reeb.json").read_text())["result"]
    assert len(doc["nodes"]) == 2 and len(doc["edges"]) == 1
    assert (out / "reeb.dot").read_text().startswith("graph reeb {")


def test_thickness_csv(sphere_off, tmp_path):
    code, out = run(["thickness", "--mesh", str(sphere_off), "--levels-per-interval", "2", "--csv"], tmp_path)
    assert code == 0
    assert (out / "thickness.csv").read_text().startswith("t,component,")


def test_generate(tmp_path):
    code, out = run(["generate", "--kind", "torus"], tmp_path)
    assert code == 0
    assert json.loads((out / "torus.json").read_text())["b1"] == 2
    spec = tmp_path / "y.spec"
    spec.write_text("segments = 12\nslices = 6\nlayer = cap_bottom\nlayer = fork(2)\nlayer = cap_top, cap_top\n")
    code, out = run(["generate", "--spec", str(spec)], tmp_path)
    assert code == 0
    meta = json.loads((out / "y.json").read_text())
    assert meta["K"] == 2 and meta["graph_bound"] == 1.0
    code, _ = run(["field", "--mesh", str(out / "y.off"), "--field", f"sidecar:{out / 'y.field'}"], tmp_path)
    assert code == 0


def test_invalid_inputs_exit_1(tmp_path, sphere_off):
    assert run(["bound", "--mesh", str(tmp_path / "missing.off")], tmp_path)[0] == 1
    assert run(["bound"], tmp_path)[0] == 1
    assert run(["bound", "--mesh", str(sphere_off), "--field", "bogus"], tmp_path)[0] == 1
    assert run(["distortion", "--mesh", str(sphere_off), "--pairs", "0"], tmp_path)[0] == 1
    bad = tmp_path / "bad.spec"
    bad.write_text("layer = cap_bottom\n")
    assert run(["generate", "--spec", str(bad)], tmp_path)[0] == 1


def test_audit_violation_exit_2(sphere_off, tmp_path, monkeypatch):
    monkeypatch.setattr(ReebGraph, "distance", lambda self, a, b: 0.0)
    code, out = run(["audit", "--mesh", str(sphere_off), "--trials", "30"], tmp_path)
    assert code == 2
    assert json.loads((out / "audit.json").read_text())["result"]["violations"] > 0


def test_bound_violation_exit_2(sphere_off, tmp_path, monkeypatch):
    import reebkit.bounds as bounds

    monkeypatch.setattr(bounds, "theorem_bound_value", lambda *args: 0.0)
    code, _ = run(["bound", "--mesh", str(sphere_off), "--levels-per-interval", "2"], tmp_path)
    assert code == 2


def test_reports_are_deterministic(sphere_off, tmp_path):
    argv = ["bound", "--mesh", str(sphere_off), "--levels-per-interval", "2"]
    _, out = run(argv, tmp_path)
    first = (out / "report.json").read_bytes()
    _, out = run(argv, tmp_path)
    assert (out / "report.json").read_bytes() == first


def test_timestamp_is_optional(sphere_off, tmp_path):
    out = tmp_path / "o"
    assert main(["betti", "--mesh", str(sphere_off), "--out", str(out)]) == 0
    assert "created" in json.loads((out / "betti.json").read_text())
