"""Encapsulated (two-level) genetic algorithm.

The outer GA searches UAV grid positions; the fitness of a position set is
the best objective an inner GA finds over the beam directions for those
positions. Both levels use tournament selection, single-point crossover
and single-individual elitism, so the per-generation best never drops.

Randomness is split into independent substreams keyed by
``(rng_seed, generation, index)``: one per outer generation for the
selection/variation step, one per individual for its inner GA. An
individual's result therefore does not depend on which process evaluates
it or in which order, and sequential and parallel runs are identical.

The inner GAs of one outer generation run in lockstep as a single
vectorized batch (each still drawing from its own substream).
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import (
    ChannelParams,
    GridSpec,
    Jammer,
    Position,
    RadiationPattern,
    UavState,
    capacity_batch,
    capacity_matrix,
)
from .errors import ConfigurationError
from .routing import ObjectiveWeights, e2e_batch, objective, objective_from_e2e, shortest_paths

log = logging.getLogger(__name__)

BEAM_DEVIATION_DEG = 20.0

# Substream tags, so outer and inner draws never share a stream.
_INIT, _OUTER, _INNER, _SHADOW = 0, 1, 2, 3

MOORE = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    max_generations: int = 50
    mutation_rate: float = 0.15
    crossover_rate: float = 0.9
    tournament_size: int = 3
    inner_population_size: int = 20
    inner_max_generations: int = 15
    time_budget: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2 or self.inner_population_size < 2:
            raise ConfigurationError("ga population sizes must be >= 2")
        if self.max_generations < 0 or self.inner_max_generations < 0:
            raise ConfigurationError("ga generation counts must be >= 0")
        for name in ("mutation_rate", "crossover_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"ga.{name} must lie in [0, 1]")
        if self.tournament_size < 2:
            raise ConfigurationError("ga.tournament_size must be >= 2")
        if self.time_budget is not None and not self.time_budget > 0:
            raise ConfigurationError("ga.time_budget must be > 0")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigurationError("ga.rng_seed must be a 64-bit unsigned integer")


@dataclass
class Chromosome:
    """One gene per UAV: an integer grid cell and a beam direction."""

    cells: np.ndarray
    beams: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, 2)
        if self.beams is None:
            self.beams = np.zeros(len(self.cells))
        self.beams = np.mod(np.asarray(self.beams, dtype=float), 360.0)
        if self.beams.shape != (len(self.cells),):
            raise ValueError("one beam direction per gene is required")

    def __len__(self):
        return len(self.cells)

    def copy(self) -> "Chromosome":
        return Chromosome(self.cells.copy(), self.beams.copy())

    def cell_list(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.cells]

    def is_valid(self, grid: GridSpec) -> bool:
        cells = self.cell_list()
        return len(set(cells)) == len(cells) and all(grid.contains(i, j) for i, j in cells)

    def __eq__(self, other):
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.cells, other.cells) and np.array_equal(self.beams, other.beams)


@dataclass(frozen=True)
class Environment:
    """Everything a fitness evaluation needs; read-only during a run."""

    grid: GridSpec
    jammer: Jammer
    pattern: RadiationPattern
    channel: ChannelParams = ChannelParams()
    weights: ObjectiveWeights = ObjectiveWeights()
    n_uav: int = 4

    @property
    def beams_matter(self) -> bool:
        return not self.pattern.is_omnidirectional

    def positions(self, cells) -> np.ndarray:
        return self.grid.to_xy(cells)

    def decode(self, chromosome: Chromosome) -> list[UavState]:
        xy = self.positions(chromosome.cells)
        return [UavState(Position(*p), b) for p, b in zip(xy.tolist(), chromosome.beams)]

    def capacities(self, positions, beams, rng=None) -> np.ndarray:
        return capacity_batch(positions, beams, self.jammer, self.pattern, self.channel, rng)

    def evaluate(self, positions, beams, rng=None) -> np.ndarray:
        """Objective for a batch of configurations: positions (..., N, 2), beams (..., N)."""
        cap = self.capacities(positions, beams, rng)
        shape = cap.shape
        e2e = e2e_batch(cap.reshape(-1, shape[-2], shape[-1]))
        return objective_from_e2e(e2e, self.weights).reshape(shape[:-2])


@dataclass
class GaReport:
    best_of: float
    positions: np.ndarray
    beams: np.ndarray
    of_history: list[float]
    avg_history: list[float]
    generations_run: int
    elapsed: float
    best_chromosome: Chromosome | None = None
    baseline_of: float | None = None
    evaluations: int = 0
    # wall-clock seconds since the start of the run, one entry per generation
    time_history: list[float] = field(default_factory=list)


def fitness(chromosome: Chromosome, env: Environment, rng=None) -> float:
    """Objective of a full chromosome via the reference channel/routing chain."""
    swarm = env.decode(chromosome)
    cap = capacity_matrix(swarm, env.jammer, env.pattern, env.channel, rng)
    return objective(shortest_paths(cap), env.weights)


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def _tournament_index(fitnesses, tournament_size: int, rng) -> int:
    drawn = rng.integers(0, len(fitnesses), size=tournament_size)
    f = np.asarray(fitnesses)[drawn]
    return int(drawn[f == f.max()].min())


def tournament_select(population, fitnesses, tournament_size: int, rng):
    """Best of ``tournament_size`` uniform draws with replacement (ties: lowest index)."""
    if len(population) == 0:
        raise ValueError("tournament over an empty population")
    return population[_tournament_index(fitnesses, tournament_size, rng)]


def _cut_point(n: int, rng, cut: int | None) -> int:
    if cut is not None:
        if not 1 <= cut <= n - 1:
            raise ValueError(f"cut point {cut} outside 1..{n - 1}")
        return cut
    return int(rng.integers(1, n))


def _free_neighbors(cell, taken, grid: GridSpec):
    i, j = cell
    return [
        (i + di, j + dj)
        for di, dj in MOORE
        if grid.contains(i + di, j + dj) and (i + di, j + dj) not in taken
    ]


def _nearest_free(cell, taken, grid: GridSpec):
    nx, ny = grid.shape
    best, best_d = None, math.inf
    for i in range(nx):
        for j in range(ny):
            if (i, j) in taken:
                continue
            d = (i - cell[0]) ** 2 + (j - cell[1]) ** 2
            if d < best_d:
                best, best_d = (i, j), d
    if best is None:
        raise ConfigurationError("grid has no free point left")
    return best


def repair(child: Chromosome, fallback: Chromosome, grid: GridSpec, rng) -> Chromosome:
    """Move later duplicates of an occupied cell to a free neighbor.

    Falls back to the primary parent's gene, then to the nearest free cell.
    """
    cells = child.cell_list()
    if len(set(cells)) == len(cells):
        return child
    seen: set = set()
    for i, cell in enumerate(cells):
        if cell not in seen:
            seen.add(cell)
            continue
        taken = seen | set(cells[i + 1 :])
        options = _free_neighbors(cell, taken, grid)
        if options:
            cell = options[int(rng.integers(len(options)))]
        else:
            parent_cell = tuple(int(v) for v in fallback.cells[i])
            cell = parent_cell if parent_cell not in taken else _nearest_free(cell, taken, grid)
        cells[i] = cell
        seen.add(cell)
    return Chromosome(np.array(cells), child.beams)


def crossover_positions(parent_a, parent_b, rng, grid: GridSpec | None = None, cut=None):
    """Single-point crossover of whole genes (cell and beam travel together)."""
    n = len(parent_a)
    if n != len(parent_b):
        raise ValueError("parents differ in gene count")
    if n < 2:
        return parent_a.copy(), parent_b.copy()
    k = _cut_point(n, rng, cut)
    child_a = Chromosome(
        np.concatenate([parent_a.cells[:k], parent_b.cells[k:]]),
        np.concatenate([parent_a.beams[:k], parent_b.beams[k:]]),
    )
    child_b = Chromosome(
        np.concatenate([parent_b.cells[:k], parent_a.cells[k:]]),
        np.concatenate([parent_b.beams[:k], parent_a.beams[k:]]),
    )
    if grid is not None:
        child_a = repair(child_a, parent_a, grid, rng)
        child_b = repair(child_b, parent_b, grid, rng)
    return child_a, child_b


def crossover_beams(parent_a, parent_b, rng, cut=None):
    """Single-point crossover of beam genes only; each child keeps its primary parent's cells."""
    n = len(parent_a)
    if n != len(parent_b):
        raise ValueError("parents differ in gene count")
    if n < 2:
        return parent_a.copy(), parent_b.copy()
    k = _cut_point(n, rng, cut)
    child_a = Chromosome(
        parent_a.cells.copy(), np.concatenate([parent_a.beams[:k], parent_b.beams[k:]])
    )
    child_b = Chromosome(
        parent_b.cells.copy(), np.concatenate([parent_b.beams[:k], parent_a.beams[k:]])
    )
    return child_a, child_b


def mutate_position(chromosome: Chromosome, grid: GridSpec, mutation_rate: float, rng) -> Chromosome:
    """Hop each selected gene to a random free in-bounds Moore neighbor."""
    cells = chromosome.cell_list()
    for i in range(len(cells)):
        if rng.random() >= mutation_rate:
            continue
        taken = set(cells[:i] + cells[i + 1 :])
        options = _free_neighbors(cells[i], taken, grid)
        if options:
            cells[i] = options[int(rng.integers(len(options)))]
    return Chromosome(np.array(cells), chromosome.beams.copy())


def mutate_beam(chromosome: Chromosome, mutation_rate: float, rng) -> Chromosome:
    """Shift each selected beam by a uniform deviation in [-20, 20] degrees."""
    n = len(chromosome)
    selected = rng.random(n) < mutation_rate
    deviation = rng.uniform(-BEAM_DEVIATION_DEG, BEAM_DEVIATION_DEG, n)
    beams = np.where(selected, chromosome.beams + deviation, chromosome.beams)
    return Chromosome(chromosome.cells.copy(), np.mod(beams, 360.0))


# ---------------------------------------------------------------------------
# Inner GA (beam directions)
# ---------------------------------------------------------------------------


@dataclass
class InnerResult:
    beams: np.ndarray  # (G, N)
    best_of: np.ndarray  # (G,)
    best_history: np.ndarray  # (G, generations + 1)
    avg_history: np.ndarray
    evaluations: int
    stamps: list[float] = field(default_factory=list)


def _tournament_winners(fit, draws, k):
    """fit (G, P); draws (G, M, k) uniforms -> winner indices (G, M)."""
    pop = fit.shape[1]
    idx = np.minimum((draws * pop).astype(np.int64), pop - 1)
    f = np.take_along_axis(fit[:, None, :], idx, axis=-1)
    best = f.max(axis=-1, keepdims=True)
    return np.where(f == best, idx, pop).min(axis=-1)


def inner_ga_batch(
    positions,
    env: Environment,
    config: GaConfig,
    rngs: Sequence[np.random.Generator],
    seed_beams: Sequence[np.ndarray | None] | None = None,
    deadline: float | None = None,
) -> InnerResult:
    """Run one beam GA per position set, all in lockstep.

    positions: (G, N, 2) meters. Each GA g draws only from ``rngs[g]``, so
    its result is independent of the rest of the batch. ``seed_beams[g]``,
    if given, replaces the first random individual of GA g.
    """
    positions = np.asarray(positions, dtype=float)
    n_ga, n = positions.shape[:2]
    pop = config.inner_population_size
    shadow = env.channel.shadowing_sigma_db > 0

    def shadow_rng(g):
        # one extra stream per GA so shadowing draws do not perturb GA draws
        return rngs[g].spawn(1)[0] if shadow else None

    beams = np.stack([r.random((pop, n)) * 360.0 for r in rngs])
    if seed_beams is not None:
        for g, sb in enumerate(seed_beams):
            if sb is not None:
                beams[g, 0] = np.mod(sb, 360.0)

    if not env.beams_matter:
        # beams cannot change the objective; score one vector per GA
        of = _evaluate_rows(env, positions, beams[:, 0], shadow_rng, n_ga)
        hist = np.repeat(of[:, None], config.inner_max_generations + 1, axis=1)
        stamps = [time.monotonic()] * hist.shape[1]
        return InnerResult(beams[:, 0].copy(), of, hist, hist.copy(), n_ga, stamps)

    pos_rep = np.repeat(positions[:, None], pop, axis=1)
    fit = _evaluate_pop(env, pos_rep, beams, shadow_rng, n_ga)
    evaluations = n_ga * pop
    best_hist = [fit.max(axis=1)]
    avg_hist = [fit.mean(axis=1)]
    stamps = [time.monotonic()]

    n_children = pop - 1
    n_pairs = (n_children + 1) // 2
    k = config.tournament_size
    layout = [2 * n_pairs * k, n_pairs, n_pairs, 2 * n_pairs * n, 2 * n_pairs * n]
    offsets = np.cumsum([0] + layout)
    rows = np.arange(n_ga)[:, None]

    for _ in range(config.inner_max_generations):
        if deadline is not None and time.monotonic() > deadline:
            break
        u = np.stack([r.random(offsets[-1]) for r in rngs])
        part = [u[:, offsets[i] : offsets[i + 1]] for i in range(len(layout))]

        elite = fit.argmax(axis=1)
        winners = _tournament_winners(fit, part[0].reshape(n_ga, 2 * n_pairs, k), k)
        pa = beams[rows, winners[:, 0::2]]
        pb = beams[rows, winners[:, 1::2]]
        if n >= 2:
            cut = 1 + np.minimum((part[2] * (n - 1)).astype(np.int64), n - 2)
            swap = (part[1] < config.crossover_rate)[..., None] & (
                np.arange(n) >= cut[..., None]
            )
            ca = np.where(swap, pb, pa)
            cb = np.where(swap, pa, pb)
        else:
            ca, cb = pa, pb
        children = np.stack([ca, cb], axis=2).reshape(n_ga, 2 * n_pairs, n)
        selected = part[3].reshape(n_ga, 2 * n_pairs, n) < config.mutation_rate
        deviation = -BEAM_DEVIATION_DEG + 2 * BEAM_DEVIATION_DEG * part[4].reshape(
            n_ga, 2 * n_pairs, n
        )
        children = np.where(selected, np.mod(children + deviation, 360.0), children)
        children = children[:, :n_children]

        child_fit = _evaluate_pop(env, pos_rep[:, 1:], children, shadow_rng, n_ga)
        evaluations += n_ga * n_children
        beams = np.concatenate([beams[rows, elite[:, None]], children], axis=1)
        fit = np.concatenate([fit[rows, elite[:, None]], child_fit], axis=1)
        best_hist.append(fit.max(axis=1))
        avg_hist.append(fit.mean(axis=1))
        stamps.append(time.monotonic())

    best = fit.argmax(axis=1)
    return InnerResult(
        beams=beams[np.arange(n_ga), best].copy(),
        best_of=fit[np.arange(n_ga), best].copy(),
        best_history=np.stack(best_hist, axis=1),
        avg_history=np.stack(avg_hist, axis=1),
        evaluations=evaluations,
        stamps=stamps,
    )


def _evaluate_pop(env, positions, beams, shadow_rng, n_ga):
    if env.channel.shadowing_sigma_db > 0:
        return np.stack([env.evaluate(positions[g], beams[g], shadow_rng(g)) for g in range(n_ga)])
    return env.evaluate(positions, beams)


def _evaluate_rows(env, positions, beams, shadow_rng, n_ga):
    if env.channel.shadowing_sigma_db > 0:
        return np.array([env.evaluate(positions[g], beams[g], shadow_rng(g)) for g in range(n_ga)])
    return env.evaluate(positions, beams)


def inner_ga(positions, env: Environment, config: GaConfig, rng, seed_beams=None):
    """Best beam vector for fixed positions (N, 2) and its objective."""
    res = inner_ga_batch(
        np.asarray(positions, dtype=float)[None], env, config, [rng],
        None if seed_beams is None else [seed_beams],
    )
    return res.beams[0], float(res.best_of[0])


# ---------------------------------------------------------------------------
# Outer GA (positions)
# ---------------------------------------------------------------------------


def _inner_job(args):
    positions, env, config, keys, seed_beams, deadline = args
    rngs = [substream(*key) for key in keys]
    res = inner_ga_batch(positions, env, config, rngs, seed_beams, deadline)
    return res.beams, res.best_of, res.evaluations


class _Evaluator:
    """Scores position chromosomes with inner GAs, sequentially or in a process pool."""

    def __init__(self, env: Environment, config: GaConfig, workers: int = 1):
        self.env = env
        self.config = config
        self.workers = workers
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None
        self.evaluations = 0

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def __call__(self, chromosomes, generation, indices, deadline=None, seed_beams=None):
        seed = self.config.rng_seed
        positions = np.stack([self.env.positions(c.cells) for c in chromosomes])
        keys = [(seed, generation, int(i), _INNER) for i in indices]
        if seed_beams is None:
            seed_beams = [None] * len(chromosomes)
        if self.pool is None:
            jobs = [(positions, self.env, self.config, keys, seed_beams, deadline)]
            results = [_inner_job(jobs[0])]
        else:
            chunks = np.array_split(np.arange(len(chromosomes)), self.workers)
            jobs = [
                (positions[ch], self.env, self.config, [keys[i] for i in ch],
                 [seed_beams[i] for i in ch], deadline)
                for ch in chunks if len(ch)
            ]
            results = list(self.pool.map(_inner_job, jobs))
        beams = np.concatenate([r[0] for r in results])
        of = np.concatenate([r[1] for r in results])
        self.evaluations += sum(r[2] for r in results)
        for c, b in zip(chromosomes, beams):
            c.beams = b
        return of


def random_chromosome(grid: GridSpec, n_uav: int, rng) -> Chromosome:
    nx, ny = grid.shape
    flat = rng.choice(nx * ny, size=n_uav, replace=False)
    cells = np.stack([flat // ny, flat % ny], axis=1)
    return Chromosome(cells, np.zeros(n_uav))


def outer_ga(
    env: Environment,
    config: GaConfig,
    seeds: Sequence[Chromosome] = (),
    workers: int = 1,
) -> GaReport:
    """Optimize positions and beams jointly; returns the best full chromosome.

    ``seeds`` are placed at the start of the initial population, keeping
    their beams as warm starts for their inner GAs.
    """
    grid, n = env.grid, env.n_uav
    if grid.n_points < n:
        raise ConfigurationError(
            f"grid has {grid.n_points} points, fewer than the {n} UAVs to place"
        )
    start = time.monotonic()
    budget = config.time_budget
    deadline = start + budget if budget is not None else None

    rng0 = substream(config.rng_seed, 0, _INIT)
    population = []
    warm = []
    for s in list(seeds)[: config.population_size]:
        if len(s) != n or not s.is_valid(grid):
            raise ConfigurationError("seed chromosome does not fit the deployment grid")
        population.append(s.copy())
        warm.append(s.beams.copy())
    while len(population) < config.population_size:
        population.append(random_chromosome(grid, n, rng0))
        warm.append(None)

    evaluate = _Evaluator(env, config, workers)
    try:
        fit = evaluate(population, 0, range(len(population)), deadline, warm)
        of_history = [float(fit.max())]
        avg_history = [float(fit.mean())]
        time_history = [time.monotonic() - start]
        gen_time = time_history[0]
        if budget is not None and gen_time > budget:
            log.warning("time budget %.2fs is shorter than one generation (%.2fs)", budget, gen_time)

        generations = 0
        for gen in range(1, config.max_generations + 1):
            if budget is not None and time.monotonic() - start + gen_time > budget:
                break
            t0 = time.monotonic()
            rng = substream(config.rng_seed, gen, _OUTER)
            elite = int(fit.argmax())
            children = []
            while len(children) < config.population_size - 1:
                a = population[_tournament_index(fit, config.tournament_size, rng)]
                b = population[_tournament_index(fit, config.tournament_size, rng)]
                if rng.random() < config.crossover_rate:
                    ca, cb = crossover_positions(a, b, rng, grid)
                else:
                    ca, cb = a.copy(), b.copy()
                children.append(mutate_position(ca, grid, config.mutation_rate, rng))
                children.append(mutate_position(cb, grid, config.mutation_rate, rng))
            children = children[: config.population_size - 1]
            child_fit = evaluate(children, gen, range(1, config.population_size), deadline)
            population = [population[elite]] + children
            fit = np.concatenate([[fit[elite]], child_fit])
            of_history.append(float(fit.max()))
            avg_history.append(float(fit.mean()))
            time_history.append(time.monotonic() - start)
            generations = gen
            gen_time = time.monotonic() - t0
    finally:
        evaluate.close()

    best = int(fit.argmax())
    chrom = population[best].copy()
    return GaReport(
        best_of=float(fit[best]),
        positions=env.positions(chrom.cells),
        beams=chrom.beams.copy(),
        of_history=of_history,
        avg_history=avg_history,
        generations_run=generations,
        elapsed=time.monotonic() - start,
        best_chromosome=chrom,
        evaluations=evaluate.evaluations,
        time_history=time_history,
    )


def beam_ga(positions, env: Environment, config: GaConfig, seed_beams=None) -> GaReport:
    """Beam-only optimization for fixed positions, sized by the outer GA settings."""
    start = time.monotonic()
    cfg = replace(
        config,
        inner_population_size=config.population_size,
        inner_max_generations=config.max_generations,
    )
    deadline = start + config.time_budget if config.time_budget is not None else None
    rng = substream(config.rng_seed, 0, _INNER)
    res = inner_ga_batch(
        np.asarray(positions, dtype=float)[None], env, cfg, [rng],
        None if seed_beams is None else [seed_beams], deadline,
    )
    return GaReport(
        best_of=float(res.best_of[0]),
        positions=np.asarray(positions, dtype=float),
        beams=res.beams[0],
        of_history=res.best_history[0].tolist(),
        avg_history=res.avg_history[0].tolist(),
        generations_run=res.best_history.shape[1] - 1,
        elapsed=time.monotonic() - start,
        evaluations=res.evaluations,
        time_history=[t - start for t in res.stamps],
    )
