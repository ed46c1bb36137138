import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jamswarm.config import config_from_dict, config_to_dict, parse_config
from jamswarm.errors import ConfigurationError
from jamswarm.scenarios import DEFAULT_FIXED_POSITIONS, FIXED_AREA, MOVING, STATIC


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_fixed_area_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {"kind": "FixedArea"}))
    assert cfg.kind == FIXED_AREA and cfg.n_uav == 4
    assert (cfg.grid.width, cfg.grid.height, cfg.grid.spacing) == (50, 40, 5)
    ga = cfg.ga
    assert (ga.population_size, ga.max_generations, ga.mutation_rate, ga.crossover_rate) == (
        100, 50, 0.15, 0.9,
    )
    ch = cfg.channel
    assert (ch.tx_power_dbm, ch.path_loss_exponent, ch.ref_distance_m, ch.ref_loss_db) == (20, 2, 1, 30)
    assert ch.bandwidth_hz == 2.4e9 and cfg.jammer.power_dbm == 100


def test_static_defaults_to_shipped_layout():
    cfg = config_from_dict({"kind": "static"})
    assert cfg.kind == STATIC and cfg.fixed_positions == DEFAULT_FIXED_POSITIONS


@pytest.mark.parametrize(
    "data, field",
    [
        ({"kind": "fixed_area", "grid": {"spacing": 0}}, "grid"),
        ({"kind": "Moving"}, "motion"),
        ({"kind": "fixed_area", "bogus": 1}, "bogus"),
        ({"kind": "fixed_area", "ga": {"populaton_size": 5}}, "populaton_size"),
        ({"kind": "fixed_area", "ga": {"mutation_rate": 2}}, "mutation_rate"),
        ({"kind": "fixed_area", "jammer": {"position": [1]}}, "jammer"),
        ({"kind": "teleport"}, "kind"),
        ({}, "kind"),
        ({"kind": "static", "fixed_positions": [[0, 0], [0, 0]]}, "duplicate"),
        ({"kind": "fixed_area", "n_uav": 2.5}, "n_uav"),
        ({"kind": "fixed_area", "pattern": "missing.json"}, "missing.json"),
    ],
)
def test_validation_names_the_field(tmp_path, data, field):
    with pytest.raises(ConfigurationError, match=field):
        parse_config(write(tmp_path, data))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        parse_config(tmp_path / "nope.json")


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{kind: static")
    with pytest.raises(ConfigurationError, match="malformed"):
        parse_config(path)


def test_jammer_off_and_pattern_file(tmp_path):
    records = [{"angle_deg": 0, "gain_dbi": 6}, {"angle_deg": 180, "gain_dbi": -6}]
    (tmp_path / "pat.json").write_text(json.dumps(records))
    cfg = parse_config(write(tmp_path, {
        "kind": "fixed_area", "pattern": "pat.json", "jammer": {"power_dbm": "off"},
    }))
    assert cfg.jammer.is_off and cfg.jammer.power_dbm == -math.inf
    assert cfg.pattern.gain(90.0) == 0.0


def test_shipped_configs_parse():
    root = Path(__file__).resolve().parents[1] / "configs"
    kinds = {parse_config(p).kind for p in root.glob("*.json")}
    assert kinds == {STATIC, FIXED_AREA, MOVING}


@settings(max_examples=50, deadline=None)
@given(
    kind=st.sampled_from(["static", "fixed_area", "moving"]),
    spacing=st.sampled_from([1.0, 2.5, 5.0, 10.0]),
    power=st.one_of(st.just("off"), st.floats(-50, 150)),
    jx=st.floats(-100, 100),
    pop=st.integers(2, 200),
    rate=st.floats(0, 1),
    seed=st.integers(0, 2**64 - 1),
    budget=st.one_of(st.none(), st.floats(0.01, 100)),
    alpha=st.floats(0.1, 3),
    speed=st.floats(0, 10),
    pattern=st.sampled_from(["default", "omni"]),
)
def test_round_trip(kind, spacing, power, jx, pop, rate, seed, budget, alpha, speed, pattern):
    data = {
        "kind": kind,
        "grid": {"spacing": spacing},
        "jammer": {"position": [jx, 50], "power_dbm": power},
        "ga": {"population_size": pop, "mutation_rate": rate, "rng_seed": seed, "time_budget": budget},
        "objective": {"alpha": alpha},
        "pattern": pattern,
    }
    if kind == "moving":
        data["motion"] = {"speed": speed}
    cfg = config_from_dict(data)
    dumped = config_to_dict(cfg)
    assert config_from_dict(json.loads(json.dumps(dumped))) == cfg
