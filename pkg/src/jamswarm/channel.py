"""Link budget and capacity model for a UAV swarm under jamming.

All angles are in degrees, counterclockwise from the +x axis. Powers are
in dBm, gains in dBi, losses in dB and capacities in bit/s.

The scalar helpers (``path_loss``, ``bearing``, ...) mirror the batched
kernel :func:`capacity_batch`, which is what the optimizer calls: it
evaluates many swarm configurations at once with numpy broadcasting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

LN2 = math.log(2.0)

# numpy's SIMD kernels for log/pow/atan2 can round array tails differently
# from the vector body, so an element's value would depend on its position
# in the batch. Padding to a whole number of vectors removes the tail.
_LANES = 16


def lanewise(func, *args) -> np.ndarray:
    """Apply an elementwise ufunc with results independent of array layout."""
    arrays = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    shape = arrays[0].shape
    size = arrays[0].size
    pad = -size % _LANES
    flat = [np.concatenate([a.ravel(), np.ones(pad)]) for a in arrays]
    return func(*flat)[:size].reshape(shape)


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigurationError(f"non-finite position ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular deployment area discretized with a square lattice.

    Grid point ``(i, j)`` sits at ``origin + (i, j) * spacing``; both edges
    are included, so a 50 x 40 m area at 5 m spacing has 11 x 9 points.
    """

    origin: Position = Position(0.0, 0.0)
    width: float = 50.0
    height: float = 40.0
    spacing: float = 5.0

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigurationError("grid.spacing must be > 0")
        for name in ("width", "height"):
            value = getattr(self, name)
            steps = value / self.spacing
            if value <= 0 or abs(steps - round(steps)) > 1e-9:
                raise ConfigurationError(
                    f"grid.{name}={value} is not a positive multiple of spacing {self.spacing}"
                )

    @property
    def shape(self) -> tuple[int, int]:
        """Number of grid points along x and y."""
        return (round(self.width / self.spacing) + 1, round(self.height / self.spacing) + 1)

    @property
    def n_points(self) -> int:
        nx, ny = self.shape
        return nx * ny

    def contains(self, i: int, j: int) -> bool:
        nx, ny = self.shape
        return 0 <= i < nx and 0 <= j < ny

    def to_xy(self, cells) -> np.ndarray:
        """Map integer cell indices (..., 2) to coordinates in meters."""
        cells = np.asarray(cells, dtype=float)
        return np.array([self.origin.x, self.origin.y]) + cells * self.spacing

    def nearest_cell(self, pos: Position) -> tuple[int, int]:
        i = round((pos.x - self.origin.x) / self.spacing)
        j = round((pos.y - self.origin.y) / self.spacing)
        return (i, j)

    def shifted(self, dx: float, dy: float) -> "GridSpec":
        origin = Position(self.origin.x + dx, self.origin.y + dy)
        return GridSpec(origin, self.width, self.height, self.spacing)


@dataclass(frozen=True)
class RadiationPattern:
    """Azimuth gain table, linearly interpolated in dB with 360-degree wrap."""

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        samples = tuple((float(a), float(g)) for a, g in self.samples)
        object.__setattr__(self, "samples", samples)
        if not samples:
            raise ConfigurationError("radiation pattern needs at least one sample")
        angles = [a for a, _ in samples]
        if angles[0] != 0.0:
            raise ConfigurationError("radiation pattern must start at 0 degrees")
        if any(not (0.0 <= a < 360.0) for a in angles):
            raise ConfigurationError("radiation pattern angles must lie in [0, 360)")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ConfigurationError("radiation pattern angles must be strictly increasing")
        if any(not math.isfinite(g) for _, g in samples):
            raise ConfigurationError("radiation pattern gains must be finite")

    @classmethod
    def omnidirectional(cls, gain_dbi: float = 0.0) -> "RadiationPattern":
        return cls(((0.0, gain_dbi),))

    @classmethod
    def default(cls) -> "RadiationPattern":
        """The shipped directional pattern (+9 dBi boresight, -10 dBi at 180)."""
        text = resources.files("jamswarm").joinpath("data/default_pattern.json").read_text()
        return cls.from_records(json.loads(text))

    @classmethod
    def from_records(cls, records) -> "RadiationPattern":
        try:
            samples = [(rec["angle_deg"], rec["gain_dbi"]) for rec in records]
        except (TypeError, KeyError) as exc:
            raise ConfigurationError(
                "pattern entries must be objects with angle_deg and gain_dbi"
            ) from exc
        return cls(tuple(samples))

    @classmethod
    def load(cls, path) -> "RadiationPattern":
        with open(path) as fh:
            return cls.from_records(json.load(fh))

    def to_records(self) -> list[dict]:
        return [{"angle_deg": a, "gain_dbi": g} for a, g in self.samples]

    @property
    def is_omnidirectional(self) -> bool:
        return len(set(g for _, g in self.samples)) == 1

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        angles = np.array([a for a, _ in self.samples] + [360.0])
        gains = np.array([g for _, g in self.samples] + [self.samples[0][1]])
        return angles, gains

    def gain(self, relative_angle):
        """Gain at ``relative_angle`` (degrees, any real value; arrays allowed)."""
        angles, gains = self._table
        rel = np.mod(relative_angle, 360.0)
        out = np.interp(rel, angles, gains)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ChannelParams:
    bandwidth_hz: float = 2.4e9
    tx_power_dbm: float = 20.0
    path_loss_exponent: float = 2.0
    ref_distance_m: float = 1.0
    ref_loss_db: float = 30.0
    noise_floor_dbm: float = -100.0
    shadowing_sigma_db: float = 0.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ConfigurationError("channel.bandwidth_hz must be > 0")
        if not self.ref_distance_m > 0:
            raise ConfigurationError("channel.ref_distance_m must be > 0")
        if not self.path_loss_exponent >= 0:
            raise ConfigurationError("channel.path_loss_exponent must be >= 0")
        if not self.shadowing_sigma_db >= 0:
            raise ConfigurationError("channel.shadowing_sigma_db must be >= 0")
        if not math.isfinite(self.noise_floor_dbm):
            raise ConfigurationError("channel.noise_floor_dbm must be finite")


@dataclass(frozen=True)
class UavState:
    position: Position
    beam_direction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "beam_direction", float(self.beam_direction) % 360.0)


@dataclass(frozen=True)
class Jammer:
    """Jammer transmitter; ``power_dbm = -inf`` switches it off.

    The jammer's own pattern is oriented with boresight along +x.
    """

    position: Position
    power_dbm: float = 100.0
    pattern: RadiationPattern = field(default_factory=RadiationPattern.omnidirectional)

    def __post_init__(self):
        if math.isnan(self.power_dbm) or self.power_dbm == math.inf:
            raise ConfigurationError("jammer power must be finite or -inf (off)")

    @property
    def is_off(self) -> bool:
        return self.power_dbm == -math.inf


def path_loss(d: float, params: ChannelParams, shadow_draw: float = 0.0) -> float:
    """Log-distance path loss in dB."""
    if not d > 0:
        raise ValueError(f"path loss needs a positive distance, got {d}")
    return (
        params.ref_loss_db
        + 10.0 * params.path_loss_exponent * math.log10(d / params.ref_distance_m)
        + shadow_draw
    )


def bearing(src: Position, dst: Position) -> float:
    dx, dy = dst.x - src.x, dst.y - src.y
    if dx == 0 and dy == 0:
        raise ValueError("bearing between coincident points is undefined")
    return math.degrees(math.atan2(dy, dx)) % 360.0


def antenna_gain(pattern: RadiationPattern, beam_direction: float, target_bearing: float) -> float:
    return pattern.gain((target_bearing - beam_direction) % 360.0)


def received_power(tx_dbm: float, gain_tx: float, gain_rx: float, pl: float) -> float:
    return tx_dbm + gain_tx + gain_rx - pl


def dbm_to_mw(p):
    return np.power(10.0, np.asarray(p, dtype=float) / 10.0)


def sinr_linear(signal: float, interference: Sequence[float], noise_floor: float) -> float:
    denom = float(dbm_to_mw(noise_floor)) + sum(float(dbm_to_mw(i)) for i in interference)
    return float(dbm_to_mw(signal)) / denom


def link_capacity(bandwidth: float, sinr):
    """Shannon capacity ``B log2(1 + sinr)``; log1p keeps low-SINR links accurate."""
    out = bandwidth * np.log1p(sinr) / LN2
    return float(out) if np.ndim(out) == 0 else out


def _bearing_deg(dx, dy):
    return np.mod(np.degrees(lanewise(np.arctan2, dy, dx)), 360.0)


def _log10(x):
    return lanewise(np.log10, x)


def _mw(dbm):
    return lanewise(np.power, 10.0, np.asarray(dbm, dtype=float) / 10.0)


def capacity_batch(
    positions,
    beams,
    jammer: Jammer,
    pattern: RadiationPattern,
    params: ChannelParams,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Capacity matrices for a batch of swarm configurations.

    positions: (..., N, 2) meters; beams: (..., N) degrees.
    Returns (..., N, N) with entry [i, j] the capacity of link i -> j.
    Co-location is not checked here; see :func:`capacity_matrix`.
    """
    pos = np.asarray(positions, dtype=float)
    beams = np.asarray(beams, dtype=float)
    n = pos.shape[-2]

    delta = pos[..., None, :, :] - pos[..., :, None, :]  # [i, j] = p_j - p_i
    dist = np.sqrt(delta[..., 0] * delta[..., 0] + delta[..., 1] * delta[..., 1])
    dist = np.maximum(dist, params.ref_distance_m)
    brg = _bearing_deg(delta[..., 0], delta[..., 1])  # bearing i -> j

    g = pattern.gain(brg - beams[..., :, None])  # gain of i's beam toward j
    gain_tx = g
    gain_rx = np.swapaxes(g, -1, -2)  # [i, j] = gain of j's beam toward i

    pl = params.ref_loss_db + 10.0 * params.path_loss_exponent * _log10(dist / params.ref_distance_m)
    if rng is not None and params.shadowing_sigma_db > 0:
        pl = pl + rng.normal(0.0, params.shadowing_sigma_db, size=pl.shape)
    signal = params.tx_power_dbm + gain_tx + gain_rx - pl

    noise_mw = 10.0 ** (params.noise_floor_dbm / 10.0)
    if jammer.is_off:
        denom = noise_mw
    else:
        jdelta = pos - np.array(jammer.position.as_tuple())  # jammer -> uav
        jdist = np.sqrt(jdelta[..., 0] * jdelta[..., 0] + jdelta[..., 1] * jdelta[..., 1])
        jdist = np.maximum(jdist, params.ref_distance_m)
        jbrg = _bearing_deg(jdelta[..., 0], jdelta[..., 1])
        jgain_tx = jammer.pattern.gain(jbrg)
        jgain_rx = pattern.gain(jbrg + 180.0 - beams)  # uav beam toward jammer
        jpl = params.ref_loss_db + 10.0 * params.path_loss_exponent * _log10(
            jdist / params.ref_distance_m
        )
        if rng is not None and params.shadowing_sigma_db > 0:
            jpl = jpl + rng.normal(0.0, params.shadowing_sigma_db, size=jpl.shape)
        interference = jammer.power_dbm + jgain_tx + jgain_rx - jpl
        denom = noise_mw + _mw(interference)
        denom = denom[..., None, :]  # interference is felt at receiver j

    sinr = _mw(signal) / denom
    cap = params.bandwidth_hz * lanewise(np.log1p, sinr) / LN2
    idx = np.arange(n)
    cap[..., idx, idx] = 0.0
    return cap


def capacity_matrix(
    swarm: Sequence[UavState],
    jammer: Jammer,
    pattern: RadiationPattern,
    params: ChannelParams,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """N x N link capacity matrix (bit/s) for one swarm state."""
    if len(swarm) < 2:
        raise ConfigurationError("a swarm needs at least two UAVs")
    pos = np.array([u.position.as_tuple() for u in swarm])
    for i in range(len(swarm)):
        for j in range(i + 1, len(swarm)):
            if pos[i, 0] == pos[j, 0] and pos[i, 1] == pos[j, 1]:
                raise ConfigurationError(f"UAV {i} and UAV {j} are co-located at {tuple(pos[i])}")
    beams = np.array([u.beam_direction for u in swarm])
    return capacity_batch(pos, beams, jammer, pattern, params, rng)


def load_pattern(source) -> RadiationPattern:
    """Resolve a pattern given as "default", "omni", a record list or a file path."""
    if source is None or source == "default":
        return RadiationPattern.default()
    if source in ("omni", "omnidirectional"):
        return RadiationPattern.omnidirectional()
    if isinstance(source, (str, Path)):
        return RadiationPattern.load(source)
    return RadiationPattern.from_records(source)
