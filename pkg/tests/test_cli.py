import csv
import io
import json
import math

import pytest

from jamswarm.cli import compare, main
from jamswarm.config import parse_config
from jamswarm.errors import ConfigurationError

TINY_GA = {"population_size": 6, "max_generations": 3, "inner_population_size": 6,
           "inner_max_generations": 3}


def write_config(tmp_path, kind="fixed_area", name="cfg.json", **extra):
    data = {"kind": kind, "ga": dict(TINY_GA), **extra}
    if kind == "moving":
        data.setdefault("motion", {"n_windows": 2})
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def outputs(run_dir):
    return {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())
            if p.name == "convergence.csv" or (p.name.startswith("topology_") and p.suffix == ".json")}


@pytest.mark.parametrize("kind", ["static", "fixed_area", "moving"])
def test_same_seed_is_byte_identical(tmp_path, kind):
    cfg = write_config(tmp_path, kind)
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--seed", "42", "--out", str(tmp_path / d)]) == 0
    a, b = outputs(tmp_path / "a"), outputs(tmp_path / "b")
    assert a and a == b


def test_output_files(tmp_path):
    cfg = write_config(tmp_path, "moving")
    out = tmp_path / "run"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"convergence.csv", "timing.csv", "convergence.svg", "manifest.json",
            "topology_0.json", "topology_1.json", "topology_0.svg", "topology_1.svg"} <= names
    assert (out / "topology_0.svg").read_text().lstrip().startswith("<?xml")

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["rng_seed"] == 0 and manifest["config"]["kind"] == "moving"
    topo = json.loads((out / "topology_1.json").read_text())
    assert topo["area_origin"] == [15.0, 0.0]
    assert len(topo["uavs"]) == 4 and len(topo["capacity_bps"]) == 4
    assert topo["jammer"]["power_dbm"] == 100.0

    with open(out / "convergence.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["window", "generation", "best_of", "avg_of"]
    for w, window in enumerate(manifest["windows"]):
        gens = [int(r["generation"]) for r in rows if int(r["window"]) == w]
        assert gens == list(range(window["generations_run"] + 1))


def test_outputs_rederive_from_manifest(tmp_path):
    cfg = write_config(tmp_path)
    first = tmp_path / "first"
    assert main(["run", str(cfg), "--seed", "3", "--out", str(first)]) == 0
    manifest = json.loads((first / "manifest.json").read_text())
    replay = tmp_path / "replay.json"
    replay.write_text(json.dumps(manifest["config"]))
    second = tmp_path / "second"
    assert main(["run", str(replay), "--out", str(second)]) == 0
    assert outputs(first) == outputs(second)


def test_omni_flag(tmp_path):
    cfg = write_config(tmp_path, "static")
    assert main(["run", str(cfg), "--omni", "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["omni"] is True
    assert all(r["gain_dbi"] == 0.0 for r in manifest["config"]["pattern"])
    topo = json.loads((tmp_path / "o" / "topology_0.json").read_text())
    assert topo["objective"] == topo["baseline_of"]


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("JAMSWARM_OUT", str(tmp_path / "from_env"))
    assert main(["run", str(write_config(tmp_path, "static"))]) == 0
    assert (tmp_path / "from_env" / "manifest.json").exists()


def test_time_budget_override(tmp_path):
    cfg = tmp_path / "long.json"
    cfg.write_text(json.dumps({"kind": "fixed_area", "ga": {
        "population_size": 10, "max_generations": 10000, "inner_population_size": 8,
        "inner_max_generations": 5}}))
    out = tmp_path / "tb"
    assert main(["run", str(cfg), "--time-budget", "0.5", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    window = manifest["windows"][0]
    assert manifest["config"]["ga"]["time_budget"] == 0.5
    assert window["generations_run"] < 10000
    with open(out / "timing.csv", newline="") as fh:
        stamps = [float(r["elapsed_s"]) for r in csv.DictReader(fh)]
    per_gen = max(b - a for a, b in zip(stamps, stamps[1:]))
    assert window["elapsed_s"] <= 0.5 + per_gen


class TestCompare:
    def run(self, tmp_path, name, *flags, kind="static"):
        cfg = write_config(tmp_path, kind, name=f"{name}.json")
        assert main(["run", str(cfg), "--out", str(tmp_path / name), *flags]) == 0
        return tmp_path / name

    def test_identical_runs(self, tmp_path):
        a = self.run(tmp_path, "a")
        stream = io.StringIO()
        summary = compare(a, a, stream)
        assert summary["of_ratio"] == 1.0
        assert all(d == 0.0 for _, _, d in summary["deltas"])
        assert "OF ratio        1" in stream.getvalue()

    def test_beam_vs_omni(self, tmp_path):
        beam, omni = self.run(tmp_path, "beam"), self.run(tmp_path, "omni", "--omni")
        assert compare(beam, omni, io.StringIO())["of_ratio"] > 1.0

    def test_zero_denominator_is_infinite(self, tmp_path):
        a = self.run(tmp_path, "a")
        b = self.run(tmp_path, "b")
        topo = b / "topology_0.json"
        doc = json.loads(topo.read_text())
        doc["objective"] = 0.0
        topo.write_text(json.dumps(doc))
        assert compare(a, b, io.StringIO())["of_ratio"] == math.inf
        assert compare(b, b, io.StringIO())["of_ratio"] == 1.0

    def test_mismatched_kinds(self, tmp_path):
        a = self.run(tmp_path, "a")
        b = self.run(tmp_path, "b", kind="fixed_area")
        with pytest.raises(ConfigurationError, match="cannot compare"):
            compare(a, b, io.StringIO())
        assert main(["compare", str(a), str(b)]) == 2


def test_validate_prints_resolved_config(tmp_path, capsys):
    cfg = write_config(tmp_path, "static")
    assert main(["validate", str(cfg)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["ga"]["population_size"] == 6
    assert printed["grid"]["spacing"] == 5.0
    again = tmp_path / "again.json"
    again.write_text(json.dumps(printed))
    assert parse_config(again) == parse_config(cfg)


@pytest.mark.parametrize(
    "content, code",
    [('{"kind": "moving"}', 2), ("not json", 2), ('{"kind": "static", "extra": 1}', 2)],
)
def test_bad_config_exit_code(tmp_path, capsys, content, code):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    assert main(["run", str(cfg), "--out", str(tmp_path / "x")]) == code
    assert capsys.readouterr().err.startswith("error:")


def test_missing_config_exit_code(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_unwritable_output_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path, "static")
    assert main(["run", str(cfg), "--out", str(blocker / "sub")]) == 3
    assert "cannot create output directory" in capsys.readouterr().err
