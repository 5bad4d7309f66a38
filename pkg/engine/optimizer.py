"""
engine/optimizer.py

NSGA-II over box-bounded real genes.

Default problem: genes (beta_c, beta_tau), objectives (rer_congestion,
avg_congestion_other), both minimized, each the mean over a fixed set of
replication seeds shared by every genome of every generation. Any other
objective callable over a gene vector can be plugged in.

Loop: uniform initial population; binary tournament on (rank, crowding);
simulated binary crossover; polynomial mutation; mu + mu elitist selection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field

from domains.transit.models.front_point import FrontPoint
from engine.config import (
    DEFAULT_BETA_BOUNDS,
    DEFAULT_CROSSOVER_PROBABILITY,
    DEFAULT_ETA_C,
    DEFAULT_ETA_M,
    DEFAULT_MUTATION_PROBABILITY,
)
from engine.indicators import format_csv
from engine.models import ConfigValidationError, SimulationConfig, validate_config
from engine.output import write_text_atomic
from engine.rng import Rng, mix_seed
from engine.simulation import run

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, ...]]

# Child streams of the master seed
EVALUATION_STREAM = 0
SEARCH_STREAM = 1

FRONT_COLUMNS = ["beta_c", "beta_tau", "rer_congestion", "other_congestion", "rank", "crowding"]
CONVERGENCE_COLUMNS = [
    "generation",
    "front_size",
    "min_rer_congestion",
    "min_other_congestion",
    "evaluations",
]


def congested_scenario() -> SimulationConfig:
    """Rer demand 100 users/min against C = 500 every I = 5 minutes."""
    return SimulationConfig().with_scenario(train_capacity=500, train_interval=5)


class OptimizeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base: SimulationConfig = Field(default_factory=congested_scenario)
    population: int = Field(200, description="mu, even and >= 4")
    generations: int = Field(2000, description="0 returns the initial front")
    replications: int = Field(5, description="Common seeds per evaluation")
    bounds: List[Tuple[float, float]] = Field(
        default_factory=lambda: [DEFAULT_BETA_BOUNDS, DEFAULT_BETA_BOUNDS],
        description="Box bounds per gene; (beta_c, beta_tau) for the simulator objective",
    )
    crossover_probability: float = DEFAULT_CROSSOVER_PROBABILITY
    eta_c: float = DEFAULT_ETA_C
    mutation_probability: float = Field(DEFAULT_MUTATION_PROBABILITY, description="Per gene")
    eta_m: float = DEFAULT_ETA_M
    master_seed: int = 0
    convergence_log: bool = False


def optimize_violations(spec: OptimizeSpec, custom_objective: bool = False) -> List[str]:
    violations = []
    if spec.population < 4 or spec.population % 2:
        violations.append(f"optimize.population: must be even and >= 4, got {spec.population}")
    if spec.generations < 0:
        violations.append(f"optimize.generations: must be >= 0, got {spec.generations}")
    if spec.replications < 1:
        violations.append(f"optimize.replications: must be >= 1, got {spec.replications}")
    if not spec.bounds:
        violations.append("optimize.bounds: at least one gene is required")
    elif not custom_objective and len(spec.bounds) != 2:
        violations.append(f"optimize.bounds: the simulator objective takes 2 genes, got {len(spec.bounds)}")
    for i, (low, high) in enumerate(spec.bounds):
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            violations.append(f"optimize.bounds[{i}]: need finite low < high, got ({low}, {high})")
    for name in ("crossover_probability", "mutation_probability"):
        value = getattr(spec, name)
        if not 0.0 <= value <= 1.0:
            violations.append(f"optimize.{name}: must be in [0, 1], got {value}")
    for name in ("eta_c", "eta_m"):
        if getattr(spec, name) < 0:
            violations.append(f"optimize.{name}: must be >= 0")
    if spec.master_seed < 0:
        violations.append(f"optimize.master_seed: must be >= 0, got {spec.master_seed}")
    return violations


# ============================================================================
# Individuals and results
# ============================================================================

@dataclass
class Individual:
    genes: np.ndarray
    objectives: Tuple[float, ...] = ()
    rank: int = -1
    crowding: float = 0.0


@dataclass
class GenerationRecord:
    generation: int
    front_size: int
    min_objectives: Tuple[float, ...]
    evaluations: int
    population_objectives: np.ndarray
    front_objectives: np.ndarray


@dataclass
class ParetoFront:
    """Final rank-0 individuals, sorted by first objective, plus per-generation history."""
    individuals: List[Individual]
    history: List[GenerationRecord] = field(default_factory=list)
    evaluations: int = 0

    def objectives(self) -> np.ndarray:
        return np.array([ind.objectives for ind in self.individuals], dtype=float)

    def genes(self) -> np.ndarray:
        return np.array([ind.genes for ind in self.individuals], dtype=float)

    def points(self) -> List[FrontPoint]:
        return [
            FrontPoint(
                beta_c=float(ind.genes[0]),
                beta_tau=float(ind.genes[1]),
                rer_congestion=float(ind.objectives[0]),
                other_congestion=float(ind.objectives[1]),
                rank=ind.rank,
                crowding=float(ind.crowding),
            )
            for ind in self.individuals
        ]


# ============================================================================
# Evaluation
# ============================================================================

def common_seeds(spec: OptimizeSpec) -> List[int]:
    return [mix_seed(spec.master_seed, EVALUATION_STREAM, r) for r in range(spec.replications)]


def evaluate(genes: Sequence[float], spec: OptimizeSpec, seeds: Optional[List[int]] = None) -> Tuple[float, float]:
    """Mean (rer_congestion, avg_congestion_other) over the common seeds."""
    seeds = common_seeds(spec) if seeds is None else seeds
    rer, other = 0.0, 0.0
    for seed in seeds:
        config = spec.base.with_scenario(beta_c=float(genes[0]), beta_tau=float(genes[1]), seed=seed)
        result, _ = run(config)
        rer += result.rer_congestion
        other += result.avg_congestion_other
    return rer / len(seeds), other / len(seeds)


class SimulationObjective:
    """Picklable simulator objective bound to one spec and its seed set."""

    def __init__(self, spec: OptimizeSpec):
        self.spec = spec
        self.seeds = common_seeds(spec)

    def __call__(self, genes: np.ndarray) -> Tuple[float, float]:
        return evaluate(genes, self.spec, self.seeds)


def evaluate_population(population: List[Individual], objective: Objective, parallelism: int) -> int:
    """Fill objectives of unevaluated individuals; returns the number of calls."""
    todo = [ind for ind in population if not ind.objectives]
    if parallelism > 1:
        values = Parallel(n_jobs=parallelism)(delayed(objective)(ind.genes) for ind in todo)
    else:
        values = [objective(ind.genes) for ind in todo]
    for ind, value in zip(todo, values):
        ind.objectives = tuple(float(v) for v in value)
    return len(todo)


# ============================================================================
# Sorting
# ============================================================================

def dominance_matrix(points: np.ndarray) -> np.ndarray:
    """[i, j] is True when point i dominates point j (minimization)."""
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
    return le & lt


def fast_non_dominated_sort(points: Sequence[Sequence[float]]) -> List[List[int]]:
    """Fronts of indices, rank 0 first; indices ascending within a front."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return []
    if pts.ndim == 1:
        pts = pts[:, None]
    dominates = dominance_matrix(pts)
    dominated_count = dominates.sum(axis=0)
    fronts: List[List[int]] = []
    current = np.flatnonzero(dominated_count == 0)
    while current.size:
        fronts.append([int(i) for i in current])
        dominated_count[current] = -1
        dominated_count -= dominates[current].sum(axis=0)
        current = np.flatnonzero(dominated_count == 0)
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> np.ndarray:
    """Normalized neighbour-gap sums; boundary points and fronts of <= 2 get inf."""
    pts = np.asarray(front, dtype=float)
    n = pts.shape[0]
    if n <= 2:
        return np.full(n, np.inf)
    distance = np.zeros(n)
    for m in range(pts.shape[1]):
        values = pts[:, m]
        order = np.argsort(values, kind="stable")
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        span = values[order[-1]] - values[order[0]]
        if span > 0:
            distance[order[1:-1]] += (values[order[2:]] - values[order[:-2]]) / span
    return distance


def assign_rank_and_crowding(population: List[Individual]) -> List[List[int]]:
    fronts = fast_non_dominated_sort([ind.objectives for ind in population])
    for rank, front in enumerate(fronts):
        distances = crowding_distance([population[i].objectives for i in front])
        for i, d in zip(front, distances):
            population[i].rank = rank
            population[i].crowding = float(d)
    return fronts


# ============================================================================
# Variation
# ============================================================================

def tournament(population: List[Individual], rng: Rng) -> Individual:
    """Binary tournament: lower rank wins, then larger crowding, then the first pick."""
    i, j = (int(k) for k in rng.integers(len(population), 2))
    a, b = population[i], population[j]
    if (b.rank, -b.crowding) < (a.rank, -a.crowding):
        return b
    return a


def sbx_crossover(
    a: np.ndarray,
    b: np.ndarray,
    eta_c: float,
    rng: Rng,
    bounds: Sequence[Tuple[float, float]],
    probability: float = DEFAULT_CROSSOVER_PROBABILITY,
) -> Tuple[np.ndarray, np.ndarray]:
    """Bounded simulated binary crossover; each gene recombined with probability 0.5."""
    c1 = np.array(a, dtype=float)
    c2 = np.array(b, dtype=float)
    if rng.uniform() >= probability:
        return c1, c2
    for k, (low, high) in enumerate(bounds):
        if rng.uniform() > 0.5 or abs(a[k] - b[k]) <= 1e-14:
            continue
        y1, y2 = min(a[k], b[k]), max(a[k], b[k])
        u = rng.uniform()
        exponent = 1.0 / (eta_c + 1.0)

        beta = 1.0 + 2.0 * (y1 - low) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta_c + 1.0)
        betaq = (u * alpha) ** exponent if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** exponent
        child1 = 0.5 * ((y1 + y2) - betaq * (y2 - y1))

        beta = 1.0 + 2.0 * (high - y2) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta_c + 1.0)
        betaq = (u * alpha) ** exponent if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** exponent
        child2 = 0.5 * ((y1 + y2) + betaq * (y2 - y1))

        child1 = min(max(child1, low), high)
        child2 = min(max(child2, low), high)
        if rng.uniform() <= 0.5:
            child1, child2 = child2, child1
        c1[k], c2[k] = child1, child2
    return c1, c2


def poly_mutate(
    genes: np.ndarray,
    eta_m: float,
    rng: Rng,
    bounds: Sequence[Tuple[float, float]],
    probability: float = DEFAULT_MUTATION_PROBABILITY,
) -> np.ndarray:
    """Bounded polynomial mutation, each gene independently with the given probability."""
    out = np.array(genes, dtype=float)
    exponent = 1.0 / (eta_m + 1.0)
    for k, (low, high) in enumerate(bounds):
        if rng.uniform() >= probability:
            continue
        y = out[k]
        span = high - low
        delta1 = (y - low) / span
        delta2 = (high - y) / span
        u = rng.uniform()
        if u < 0.5:
            value = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1) ** (eta_m + 1.0)
            deltaq = value ** exponent - 1.0
        else:
            value = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2) ** (eta_m + 1.0)
            deltaq = 1.0 - value ** exponent
        out[k] = min(max(y + deltaq * span, low), high)
    return out


def make_offspring(population: List[Individual], spec: OptimizeSpec, rng: Rng) -> List[Individual]:
    offspring: List[Individual] = []
    while len(offspring) < spec.population:
        p1 = tournament(population, rng)
        p2 = tournament(population, rng)
        c1, c2 = sbx_crossover(p1.genes, p2.genes, spec.eta_c, rng, spec.bounds, spec.crossover_probability)
        offspring.append(Individual(poly_mutate(c1, spec.eta_m, rng, spec.bounds, spec.mutation_probability)))
        offspring.append(Individual(poly_mutate(c2, spec.eta_m, rng, spec.bounds, spec.mutation_probability)))
    return offspring


def environmental_selection(combined: List[Individual], size: int) -> List[Individual]:
    """Fill by fronts; the split front keeps its least crowded members."""
    fronts = assign_rank_and_crowding(combined)
    selected: List[Individual] = []
    for front in fronts:
        if len(selected) + len(front) <= size:
            selected.extend(combined[i] for i in front)
            continue
        crowding = np.array([combined[i].crowding for i in front])
        order = np.argsort(-crowding, kind="stable")
        selected.extend(combined[front[i]] for i in order[: size - len(selected)])
        break
    return selected


# ============================================================================
# Main loop
# ============================================================================

def _record(generation: int, population: List[Individual], evaluations: int) -> GenerationRecord:
    objectives = np.array([ind.objectives for ind in population], dtype=float)
    front = np.array([ind.objectives for ind in population if ind.rank == 0], dtype=float)
    return GenerationRecord(
        generation=generation,
        front_size=len(front),
        min_objectives=tuple(float(v) for v in front.min(axis=0)),
        evaluations=evaluations,
        population_objectives=objectives,
        front_objectives=front,
    )


def nsga2(spec: OptimizeSpec, objective: Optional[Objective] = None, parallelism: int = 1) -> ParetoFront:
    """
    Run the generational loop and return the final rank-0 set.

    Raises:
        ConfigValidationError: invalid spec or base configuration
    """
    violations = optimize_violations(spec, custom_objective=objective is not None)
    if violations:
        raise ConfigValidationError(violations)
    if objective is None:
        validate_config(spec.base)
        objective = SimulationObjective(spec)

    rng = Rng.child(spec.master_seed, SEARCH_STREAM)
    lows = np.array([b[0] for b in spec.bounds])
    highs = np.array([b[1] for b in spec.bounds])
    population = [
        Individual(lows + rng.uniforms(len(spec.bounds)) * (highs - lows))
        for _ in range(spec.population)
    ]
    evaluations = evaluate_population(population, objective, parallelism)
    assign_rank_and_crowding(population)
    history = [_record(0, population, evaluations)]
    logger.info(
        "[NSGA2] mu=%d generations=%d genes=%d parallelism=%d",
        spec.population, spec.generations, len(spec.bounds), parallelism,
    )

    for generation in range(1, spec.generations + 1):
        offspring = make_offspring(population, spec, rng)
        evaluations += evaluate_population(offspring, objective, parallelism)
        population = environmental_selection(population + offspring, spec.population)
        history.append(_record(generation, population, evaluations))
        if generation % 100 == 0 or generation == spec.generations:
            logger.info("[NSGA2] generation %d: front=%d evaluations=%d",
                        generation, history[-1].front_size, evaluations)

    # Ranks and crowding of the surviving population itself
    fronts = assign_rank_and_crowding(population)
    individuals = sorted((population[i] for i in fronts[0]), key=lambda ind: ind.objectives)
    return ParetoFront(individuals=individuals, history=history, evaluations=evaluations)


# ---------------------------------------------------------
# CSV
# ---------------------------------------------------------

def front_frame(front: ParetoFront) -> pd.DataFrame:
    return pd.DataFrame([p.model_dump() for p in front.points()], columns=FRONT_COLUMNS)


def convergence_frame(front: ParetoFront) -> pd.DataFrame:
    rows = [
        {
            "generation": rec.generation,
            "front_size": rec.front_size,
            "min_rer_congestion": rec.min_objectives[0],
            "min_other_congestion": rec.min_objectives[1],
            "evaluations": rec.evaluations,
        }
        for rec in front.history
    ]
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)


def convergence_path(out: Union[str, Path]) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}_convergence.csv")


def write_front_csv(front: ParetoFront, path: Union[str, Path]) -> Path:
    return write_text_atomic(path, format_csv(front_frame(front)))


def write_convergence_csv(front: ParetoFront, path: Union[str, Path]) -> Path:
    return write_text_atomic(path, format_csv(convergence_frame(front)))
