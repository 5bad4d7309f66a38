"""
engine/test_optimizer.py

Tests for the NSGA-II components and loop.

Tests verify:
1. Non-dominated sorting against a brute-force dominance oracle
2. Crowding distance boundary rule and hand-computed values
3. Crossover and mutation stay in bounds; gates and symmetry
4. Schaffer benchmark converges onto its Pareto set
5. Elitism across generations and determinism
6. Simulator objective: common seeds and saturated extremes

Run:
    pytest engine/test_optimizer.py -v
"""

import math

import numpy as np
import pytest

from engine.models import ConfigValidationError, ModeId, default_config
from engine.optimizer import (
    FRONT_COLUMNS,
    OptimizeSpec,
    convergence_frame,
    convergence_path,
    crowding_distance,
    dominance_matrix,
    evaluate,
    fast_non_dominated_sort,
    front_frame,
    nsga2,
    poly_mutate,
    sbx_crossover,
    write_front_csv,
)
from engine.rng import Rng


def schaffer(genes):
    x = float(genes[0])
    return x * x, (x - 2.0) ** 2


def brute_force_fronts(points):
    """Peel fronts by pairwise dominance checks."""
    remaining = list(range(len(points)))
    fronts = []
    while remaining:
        front = []
        for i in remaining:
            dominated = False
            for j in remaining:
                if i == j:
                    continue
                a, b = points[j], points[i]
                if all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b)):
                    dominated = True
                    break
            if not dominated:
                front.append(i)
        fronts.append(sorted(front))
        remaining = [i for i in remaining if i not in front]
    return fronts


@pytest.fixture
def schaffer_spec():
    return OptimizeSpec(population=40, generations=50, bounds=[(-10.0, 10.0)], master_seed=3)


# ============================================================================
# Sorting
# ============================================================================

def test_sort_small_examples():
    assert fast_non_dominated_sort([(1, 2), (2, 1), (3, 3)]) == [[0, 1], [2]]
    assert fast_non_dominated_sort([(1, 1)] * 4) == [[0, 1, 2, 3]]
    assert fast_non_dominated_sort([(1, 1), (2, 2), (3, 3)]) == [[0], [1], [2]]


def test_sort_matches_brute_force_oracle():
    rng = np.random.default_rng(123)
    for _ in range(200):
        n = int(rng.integers(1, 51))
        points = rng.integers(0, 8, size=(n, 2)).astype(float).tolist()
        assert fast_non_dominated_sort(points) == brute_force_fronts(points)


def test_dominance_is_strict():
    d = dominance_matrix(np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 1.0]]))
    assert not d[0, 1] and not d[1, 0]
    assert d[2, 0] and d[2, 1]


# ============================================================================
# Crowding
# ============================================================================

def test_crowding_small_fronts_infinite():
    assert np.all(np.isinf(crowding_distance([(0.0, 1.0), (1.0, 0.0)])))
    assert np.all(np.isinf(crowding_distance([(0.5, 0.5)])))


def test_crowding_hand_computed():
    distance = crowding_distance([(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)])
    assert math.isinf(distance[0]) and math.isinf(distance[2])
    assert distance[1] == pytest.approx(2.0)


def test_crowding_degenerate_objective():
    """All-equal first objective contributes nothing to interior points."""
    distance = crowding_distance([(1.0, 0.0), (1.0, 1.0), (1.0, 3.0), (1.0, 4.0)])
    finite = distance[np.isfinite(distance)]
    assert finite.size >= 1
    assert np.all(finite >= 0)
    assert distance[1] == pytest.approx(3.0 / 4.0)


# ============================================================================
# Variation
# ============================================================================

def test_crossover_probability_zero_keeps_parents():
    a, b = np.array([-1.0, 2.0]), np.array([3.0, -4.0])
    c1, c2 = sbx_crossover(a, b, 15.0, Rng(0), [(-5.0, 5.0)] * 2, probability=0.0)
    assert np.array_equal(c1, a) and np.array_equal(c2, b)


def test_crossover_children_in_bounds():
    rng = Rng(1)
    bounds = [(-5.0, 5.0), (0.0, 1.0)]
    for _ in range(2000):
        a = np.array([rng.uniform() * 10 - 5, rng.uniform()])
        b = np.array([rng.uniform() * 10 - 5, rng.uniform()])
        for child in sbx_crossover(a, b, 15.0, rng, bounds, probability=1.0):
            assert -5.0 <= child[0] <= 5.0 and 0.0 <= child[1] <= 1.0


def test_mutation_at_bound_stays_in_bounds():
    rng = Rng(2)
    for _ in range(2000):
        child = poly_mutate(np.array([-5.0, 5.0]), 20.0, rng, [(-5.0, 5.0)] * 2, probability=1.0)
        assert -5.0 <= child[0] <= 5.0 and -5.0 <= child[1] <= 5.0


def test_mutation_probability_zero_is_identity():
    genes = np.array([0.3, -0.7])
    assert np.array_equal(poly_mutate(genes, 20.0, Rng(4), [(-1.0, 1.0)] * 2, probability=0.0), genes)


def test_mutation_of_centered_gene_symmetric():
    """10^4 mutations of a centered gene: mean shift within 3 sigma of 0."""
    rng = Rng(5)
    shifts = np.array([poly_mutate(np.array([0.0]), 20.0, rng, [(-1.0, 1.0)], probability=1.0)[0]
                       for _ in range(10_000)])
    assert abs(shifts.mean()) < 3 * shifts.std(ddof=1) / math.sqrt(shifts.size)


# ============================================================================
# Loop
# ============================================================================

def test_schaffer_converges(schaffer_spec):
    front = nsga2(schaffer_spec, objective=schaffer)
    genes = front.genes()[:, 0]
    assert np.mean((genes >= -0.05) & (genes <= 2.05)) >= 0.95
    objectives = front.objectives()
    order = np.argsort(objectives[:, 0], kind="stable")
    assert np.all(np.diff(objectives[order, 1]) <= 1e-12)


def test_generations_zero_returns_initial_front(schaffer_spec):
    front = nsga2(schaffer_spec.model_copy(update={"generations": 0}), objective=schaffer)
    assert len(front.history) == 1
    assert front.evaluations == schaffer_spec.population
    assert len(front.individuals) == front.history[0].front_size


def test_elitism_never_dominated_by_previous_generation():
    spec = OptimizeSpec(population=12, generations=15, bounds=[(-10.0, 10.0)], master_seed=8)
    front = nsga2(spec, objective=schaffer)
    for prev, nxt in zip(front.history, front.history[1:]):
        for point in nxt.front_objectives:
            dominated = np.all(prev.population_objectives <= point, axis=1) & np.any(
                prev.population_objectives < point, axis=1
            )
            assert not dominated.any()


def test_genes_stay_in_bounds(schaffer_spec):
    front = nsga2(schaffer_spec.model_copy(update={"generations": 10}), objective=schaffer)
    genes = front.genes()
    assert np.all((genes >= -10.0) & (genes <= 10.0))


def test_deterministic_given_master_seed(schaffer_spec):
    spec = schaffer_spec.model_copy(update={"generations": 10})
    a = nsga2(spec, objective=schaffer)
    b = nsga2(spec, objective=schaffer)
    assert np.array_equal(a.genes(), b.genes())
    assert np.array_equal(a.objectives(), b.objectives())


@pytest.mark.parametrize("population", [3, 5, 0])
def test_population_must_be_even_and_at_least_four(schaffer_spec, population):
    with pytest.raises(ConfigValidationError):
        nsga2(schaffer_spec.model_copy(update={"population": population}), objective=schaffer)


def test_simulator_objective_needs_two_genes(schaffer_spec):
    with pytest.raises(ConfigValidationError):
        nsga2(schaffer_spec)


# ============================================================================
# Simulator objective
# ============================================================================

@pytest.fixture
def short_scenario():
    base = default_config(train_capacity=500, train_interval=5).model_copy(update={"horizon": 40})
    return OptimizeSpec(base=base, population=4, generations=1, replications=2, master_seed=1)


def test_same_genome_same_objectives(short_scenario):
    assert evaluate([0.3, -0.2], short_scenario) == evaluate([0.3, -0.2], short_scenario)


def test_saturated_extremes(short_scenario):
    """Negative saturation: no shift, other modes at their direct-demand baseline."""
    low = evaluate([-1000.0, -1000.0], short_scenario)
    high = evaluate([1000.0, 1000.0], short_scenario)
    modes = dict(short_scenario.base.modes)
    no_rer = short_scenario.base.model_copy(update={
        "modes": {**modes, ModeId.rer: modes[ModeId.rer].model_copy(update={"arrival_rate": 0.0})}
    })
    baseline = evaluate([-1000.0, -1000.0], short_scenario.model_copy(update={"base": no_rer}))
    assert low[1] == pytest.approx(baseline[1], abs=1e-12)
    assert high[0] < low[0]
    assert high[1] > baseline[1]


def test_simulator_parallelism_same_front(short_scenario):
    a = nsga2(short_scenario, parallelism=1)
    b = nsga2(short_scenario, parallelism=2)
    assert np.array_equal(a.objectives(), b.objectives())


def test_front_csv_and_convergence(short_scenario, tmp_path):
    front = nsga2(short_scenario)
    path = write_front_csv(front, tmp_path / "front.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(FRONT_COLUMNS)
    assert len(lines) == len(front.individuals) + 1
    assert list(front_frame(front).columns) == FRONT_COLUMNS
    log = convergence_frame(front)
    assert log["generation"].tolist() == [0, 1]
    assert convergence_path(tmp_path / "front.csv").name == "front_convergence.csv"
