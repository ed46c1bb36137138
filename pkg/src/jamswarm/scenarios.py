"""The three experiments: static swarm, fixed deployment area, moving area."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelParams, GridSpec, Jammer, Position, RadiationPattern
from .errors import ConfigurationError
from .optimizer import Chromosome, Environment, GaConfig, GaReport, beam_ga, outer_ga
from .routing import ObjectiveWeights, objective, shortest_paths

log = logging.getLogger(__name__)

STATIC, FIXED_AREA, MOVING = "static", "fixed_area", "moving"
KINDS = (STATIC, FIXED_AREA, MOVING)

# Jammer 10 m north of the default 50 x 40 m area, centered on it.
DEFAULT_JAMMER_POSITION = Position(25.0, 50.0)
# Scenario 1 layout: four UAVs spread over the default area.
DEFAULT_FIXED_POSITIONS = ((10.0, 10.0), (20.0, 30.0), (35.0, 15.0), (45.0, 30.0))


@dataclass(frozen=True)
class Motion:
    speed: float = 2.0
    heading: float = 0.0
    window: float = 7.5
    n_windows: int = 5
    guard: float = 0.1

    def __post_init__(self):
        if not self.speed >= 0:
            raise ConfigurationError("motion.speed must be >= 0")
        if not self.window > 0:
            raise ConfigurationError("motion.window must be > 0")
        if self.n_windows < 1:
            raise ConfigurationError("motion.n_windows must be >= 1")
        if not 0 <= self.guard < 1:
            raise ConfigurationError("motion.guard must lie in [0, 1)")

    def origin_offset(self, w: int) -> tuple[float, float]:
        step = self.speed * self.window
        h = math.radians(self.heading)
        return (w * step * math.cos(h), w * step * math.sin(h))

    @property
    def budget(self) -> float:
        return self.window * (1.0 - self.guard)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = FIXED_AREA
    n_uav: int = 4
    grid: GridSpec = GridSpec()
    jammer: Jammer = Jammer(DEFAULT_JAMMER_POSITION)
    channel: ChannelParams = ChannelParams()
    pattern: RadiationPattern = field(default_factory=RadiationPattern.default)
    weights: ObjectiveWeights = ObjectiveWeights()
    ga: GaConfig = GaConfig()
    fixed_positions: tuple[tuple[float, float], ...] | None = None
    motion: Motion | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_uav < 2:
            raise ConfigurationError("n_uav must be >= 2")
        if self.kind == STATIC:
            fp = self.fixed_positions
            if fp is None or len(fp) != self.n_uav:
                raise ConfigurationError("static scenarios need one fixed position per UAV")
            if len(set(map(tuple, fp))) != len(fp):
                raise ConfigurationError("fixed_positions contains duplicate points")
        if self.kind == MOVING and self.motion is None:
            raise ConfigurationError("moving scenarios need a motion block")

    def environment(self, grid: GridSpec | None = None, pattern=None) -> Environment:
        return Environment(
            grid=grid or self.grid,
            jammer=self.jammer,
            pattern=pattern or self.pattern,
            channel=self.channel,
            weights=self.weights,
            n_uav=self.n_uav,
        )

    def with_omni(self) -> "ScenarioConfig":
        return replace(self, pattern=RadiationPattern.omnidirectional())


def snapshot(env: Environment, positions, beams) -> dict:
    """Decoded swarm state with its capacity matrix and routes."""
    positions = np.asarray(positions, dtype=float)
    beams = np.asarray(beams, dtype=float)
    cap = env.capacities(positions, beams)
    routing = shortest_paths(cap)
    return {
        "positions": positions,
        "beams": beams,
        "capacity": cap,
        "routing": routing,
        "objective": objective(routing, env.weights),
    }


@dataclass
class WindowRecord:
    window_index: int
    area_origin: Position
    report: GaReport
    snapshot: dict
    grid: GridSpec


def omni_baseline(config: ScenarioConfig, positions) -> float:
    env = config.environment(pattern=RadiationPattern.omnidirectional())
    positions = np.asarray(positions, dtype=float)
    return float(env.evaluate(positions, np.zeros(len(positions))))


def run_static(config: ScenarioConfig) -> GaReport:
    if config.kind != STATIC:
        raise ConfigurationError("run_static needs a static scenario")
    env = config.environment()
    positions = np.array(config.fixed_positions, dtype=float)
    report = beam_ga(positions, env, config.ga)
    report.baseline_of = omni_baseline(config, positions)
    return report


def run_fixed_area(config: ScenarioConfig, workers: int = 1) -> GaReport:
    if config.kind != FIXED_AREA:
        raise ConfigurationError("run_fixed_area needs a fixed_area scenario")
    return outer_ga(config.environment(), config.ga, workers=workers)


def window_seed(seed: int, w: int) -> int:
    return int(np.random.SeedSequence([seed, 7, w]).generate_state(1, np.uint64)[0])


def run_moving(config: ScenarioConfig, workers: int = 1) -> list[WindowRecord]:
    """Re-optimize once per time window while the deployment area slides.

    The previous best formation (same grid cells, so translated with the
    area) and its beams seed the next window's population.
    """
    if config.kind != MOVING:
        raise ConfigurationError("run_moving needs a moving scenario")
    motion = config.motion
    budget = motion.budget
    if config.ga.time_budget is not None:
        budget = min(budget, config.ga.time_budget)
    records = []
    previous: Chromosome | None = None
    for w in range(motion.n_windows):
        dx, dy = motion.origin_offset(w)
        grid = config.grid.shifted(dx, dy)
        env = config.environment(grid=grid)
        ga = replace(config.ga, time_budget=budget, rng_seed=window_seed(config.ga.rng_seed, w))
        report = outer_ga(env, ga, seeds=() if previous is None else (previous,), workers=workers)
        if report.elapsed > motion.window:
            log.warning("window %d took %.2fs, longer than the %.2fs window", w, report.elapsed, motion.window)
        previous = report.best_chromosome
        records.append(
            WindowRecord(w, grid.origin, report, snapshot(env, report.positions, report.beams), grid)
        )
    return records


def run_scenario(config: ScenarioConfig, workers: int = 1) -> list[WindowRecord]:
    """Run any scenario kind; static and fixed-area runs yield a single window."""
    if config.kind == MOVING:
        return run_moving(config, workers)
    env = config.environment()
    if config.kind == STATIC:
        report = run_static(config)
    else:
        report = run_fixed_area(config, workers)
    snap = snapshot(env, report.positions, report.beams)
    return [WindowRecord(0, config.grid.origin, report, snap, config.grid)]
