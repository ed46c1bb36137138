"""JSON scenario files.

Example (every key optional except ``kind``)::

    {
      "kind": "fixed_area",
      "n_uav": 4,
      "grid": {"origin": [0, 0], "width": 50, "height": 40, "spacing": 5},
      "jammer": {"position": [25, 50], "power_dbm": 100, "pattern": "omni"},
      "channel": {"bandwidth_hz": 2.4e9, "tx_power_dbm": 20, ...},
      "pattern": "default",
      "objective": {"alpha": 1, "beta": 1},
      "ga": {"population_size": 100, "max_generations": 50, ...},
      "fixed_positions": [[10, 10], [20, 30], [35, 15], [45, 30]],
      "motion": {"speed": 2, "heading": 0, "window": 7.5, "n_windows": 5}
    }

Patterns are ``"default"``, ``"omni"``, an inline list of
``{"angle_deg", "gain_dbi"}`` records, or a path to such a list
(relative paths resolve against the config file's directory).
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

from .channel import ChannelParams, GridSpec, Jammer, Position, RadiationPattern, load_pattern
from .errors import ConfigurationError
from .optimizer import GaConfig
from .routing import ObjectiveWeights
from .scenarios import (
    DEFAULT_FIXED_POSITIONS,
    DEFAULT_JAMMER_POSITION,
    FIXED_AREA,
    KINDS,
    MOVING,
    STATIC,
    Motion,
    ScenarioConfig,
)

_KIND_ALIASES = {
    "static": STATIC,
    "fixedarea": FIXED_AREA,
    "fixed_area": FIXED_AREA,
    "moving": MOVING,
}

TOP_LEVEL_KEYS = {
    "kind", "n_uav", "grid", "jammer", "channel", "pattern", "objective", "ga",
    "fixed_positions", "motion",
}


def _check_keys(block: dict, allowed, where: str):
    if not isinstance(block, dict):
        raise ConfigurationError(f"{where}: expected an object")
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigurationError(f"{where}: unknown key(s) {sorted(unknown)}")


def _build(cls, block, where, **convert):
    names = [f.name for f in dataclasses.fields(cls)]
    block = block or {}
    _check_keys(block, names, where)
    kwargs = {}
    for k, v in block.items():
        try:
            kwargs[k] = convert[k](v) if k in convert else v
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{where}.{k}: {exc}") from exc
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc


def _position(value) -> Position:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValueError("expected [x, y]")
    return Position(float(value[0]), float(value[1]))


def _power(value) -> float:
    if value is None or value == "off":
        return -math.inf
    return float(value)


def _pattern(value, base: Path | None) -> RadiationPattern:
    if isinstance(value, str) and value not in ("default", "omni", "omnidirectional"):
        path = Path(value)
        if base is not None and not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigurationError(f"pattern file not found: {path}")
        value = path
    return load_pattern(value)


def config_from_dict(data: dict, base: Path | None = None) -> ScenarioConfig:
    """Strictly parse a config mapping, applying defaults and validating invariants."""
    _check_keys(data, TOP_LEVEL_KEYS, "config")
    if "kind" not in data:
        raise ConfigurationError("config: missing required key 'kind'")
    kind = _KIND_ALIASES.get(str(data["kind"]).replace("-", "_").lower())
    if kind is None:
        raise ConfigurationError(f"config.kind: expected one of {KINDS}, got {data['kind']!r}")

    grid = _build(GridSpec, data.get("grid"), "grid", origin=_position)

    jam_block = dict(data.get("jammer") or {})
    _check_keys(jam_block, {"position", "power_dbm", "pattern"}, "jammer")
    try:
        jammer = Jammer(
            position=_position(jam_block.get("position", DEFAULT_JAMMER_POSITION.as_tuple())),
            power_dbm=_power(jam_block.get("power_dbm", 100.0)),
            pattern=_pattern(jam_block.get("pattern", "omni"), base),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"jammer: {exc}") from exc

    channel = _build(ChannelParams, data.get("channel"), "channel")
    pattern = _pattern(data.get("pattern", "default"), base)
    weights = _build(ObjectiveWeights, data.get("objective"), "objective")
    ga = _build(GaConfig, data.get("ga"), "ga")

    fixed = data.get("fixed_positions")
    if fixed is None and kind == STATIC:
        fixed = DEFAULT_FIXED_POSITIONS
    if fixed is not None:
        try:
            fixed = tuple(_position(p).as_tuple() for p in fixed)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"fixed_positions: {exc}") from exc

    motion = data.get("motion")
    if motion is not None:
        motion = _build(Motion, motion, "motion")

    n_uav = data.get("n_uav", len(fixed) if fixed is not None else 4)
    if not isinstance(n_uav, int) or isinstance(n_uav, bool):
        raise ConfigurationError("n_uav must be an integer")
    return ScenarioConfig(
        kind=kind,
        n_uav=n_uav,
        grid=grid,
        jammer=jammer,
        channel=channel,
        pattern=pattern,
        weights=weights,
        ga=ga,
        fixed_positions=fixed,
        motion=motion,
    )


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: malformed JSON ({exc})") from exc
    return config_from_dict(data, base=path.parent)


def _pattern_out(p: RadiationPattern):
    return p.to_records()


def config_to_dict(config: ScenarioConfig) -> dict:
    """Fully resolved mapping; ``config_from_dict`` inverts it exactly."""
    g = config.grid
    j = config.jammer
    out = {
        "kind": config.kind,
        "n_uav": config.n_uav,
        "grid": {
            "origin": [g.origin.x, g.origin.y],
            "width": g.width,
            "height": g.height,
            "spacing": g.spacing,
        },
        "jammer": {
            "position": [j.position.x, j.position.y],
            "power_dbm": "off" if j.is_off else j.power_dbm,
            "pattern": _pattern_out(j.pattern),
        },
        "channel": dataclasses.asdict(config.channel),
        "pattern": _pattern_out(config.pattern),
        "objective": dataclasses.asdict(config.weights),
        "ga": dataclasses.asdict(config.ga),
    }
    if config.fixed_positions is not None:
        out["fixed_positions"] = [list(p) for p in config.fixed_positions]
    if config.motion is not None:
        out["motion"] = dataclasses.asdict(config.motion)
    return out
