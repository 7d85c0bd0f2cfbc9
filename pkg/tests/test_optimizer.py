import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force_ranks, random_spec
from iotdefense.metrics import FitnessTriple
from iotdefense.network import build_network
from iotdefense.optimizer import (
    DeploymentProblem,
    FrontMember,
    GAParams,
    Individual,
    ParetoFront,
    SpaceLimitError,
    accuracy_ratio,
    crowding_distance,
    dominates,
    exhaustive_search,
    fast_nondominated_sort,
    nsga2,
    pareto_filter,
)
from iotdefense.scenarios import PACS_DEPLOYMENTS, scaled_network


class BitToy:
    """Maximize a single bit in every objective."""

    width = 1

    def decode(self, bits, rng):
        return (int(bits[0]),)

    def evaluate_many(self, dvs):
        x = np.asarray(dvs, dtype=float)[:, :1]
        return np.hstack([x, x, x])


def test_dominates_examples():
    assert not dominates((0.5, 0.9, 0.4), (0.5, 0.9, 0.4))
    assert dominates((0.6, 0.9, 0.4), (0.5, 0.9, 0.4))
    assert not dominates((0.6, 0.8, 0.4), (0.5, 0.9, 0.4))


def test_sort_examples():
    F = np.array([[1.0, 1.0, 1.0], [0.5, 0.2, 0.1], [0.9, 0.0, 0.3]])
    assert fast_nondominated_sort(F)[0] == [0]
    assert fast_nondominated_sort(np.ones((5, 3))) == [[0, 1, 2, 3, 4]]


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.integers(1, 60))
def test_sort_matches_oracle(seed, n):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 4, size=(n, 3)).astype(float)  # coarse grid forces ties
    fronts = fast_nondominated_sort(F)
    ranks = np.empty(n, dtype=int)
    for r, members in enumerate(fronts):
        ranks[members] = r
    assert np.array_equal(ranks, brute_force_ranks(F))
    assert np.array_equal(pareto_filter(F), ranks == 0)


def test_crowding_examples():
    assert np.isinf(crowding_distance(np.array([[0, 1, 0], [1, 0, 0]]))).all()
    d = crowding_distance(np.array([[0.0, 2.0, 1.0], [1.0, 1.0, 1.0], [2.0, 0.0, 1.0]]))
    assert np.isinf(d[0]) and np.isinf(d[2]) and d[1] == pytest.approx(2.0)
    flat = crowding_distance(np.full((4, 3), 0.5))
    assert np.isinf(flat).sum() >= 2 and (flat[np.isfinite(flat)] == 0).all()


def test_params_validation():
    with pytest.raises(ValueError):
        GAParams(population_size=1)
    with pytest.raises(ValueError):
        GAParams(mutation_rate=1.5)


def test_toy_problem():
    res = nsga2(BitToy(), GAParams(10, 2, seed=1))
    assert res.front.dvs == {(1,)}
    assert res.evaluations == 10 + 2 * 10


def test_width_zero_rejected():
    toy = BitToy()
    toy.width = 0
    with pytest.raises(ValueError):
        nsga2(toy, GAParams(4, 1))


def test_nsga2_deterministic(pacs):
    a = nsga2(DeploymentProblem(pacs), GAParams(30, 15, seed=5))
    b = nsga2(DeploymentProblem(pacs, jobs=2), GAParams(30, 15, seed=5))
    assert [i.dv for i in a.population] == [i.dv for i in b.population]
    assert [i.fitness for i in a.population] == [i.fitness for i in b.population]
    assert len(a.history) == 15


def test_nsga2_pacs_reaches_extremes(pacs, pacs_front):
    res = nsga2(DeploymentProblem(pacs), GAParams(100, 100, 0.8, 0.2, seed=0))
    for k in range(3):
        best = max(m.fitness[k] for m in pacs_front)
        assert max(m.fitness[k] for m in res.front) == best
    assert res.evaluations == 100 + 100 * 100
    for ga in res.front:
        assert not any(dominates(ga.fitness, m.fitness) for m in pacs_front)


def test_exhaustive_counts(pacs, pacs_front):
    problem = DeploymentProblem(build_network(scaled_network(50)))
    front = exhaustive_search(problem)
    assert problem.evaluations == 128
    assert len(front) > 0
    for name in ("A*", "B*", "C*", "D*"):
        assert PACS_DEPLOYMENTS[name] in pacs_front


def test_space_limit():
    problem = DeploymentProblem(build_network(scaled_network(200)))
    with pytest.raises(SpaceLimitError):
        exhaustive_search(problem, limit=1000)
    assert problem.evaluations == 0


def test_exhaustive_frontier_is_exact(pacs, pacs_front):
    problem = DeploymentProblem(pacs)
    space = problem.valid_space()
    F = problem.evaluate_many(space)
    triples = np.array([m.fitness for m in pacs_front])
    for a in triples:
        assert not any(dominates(b, a) for b in triples)
    # every evaluated vector is dominated or equalled by a frontier member
    for f in F[::7]:
        assert any(np.all(t >= f) for t in triples)
    assert np.allclose(F.max(axis=0), triples.max(axis=0), rtol=0, atol=0)


def _member(dv, *fit):
    return FrontMember(dv, FitnessTriple(*fit))


def _ind(dv, *fit):
    return Individual(np.zeros(1), dv, FitnessTriple(*fit))


def test_accuracy_ratio_examples():
    esa = ParetoFront([_member((1,), 1, 0, 0), _member((2,), 0, 1, 0), _member((3,), 0, 0, 1), _member((4,), 1, 0, 0)])
    full = accuracy_ratio([_ind(m.dv, *m.fitness) for m in esa], esa)
    assert (full.dnf, full.nip, full.rcf, full.headline) == (1.0, 1.0, 1.0, 1.0)
    half = accuracy_ratio([_ind((1,), 1, 0, 0), _ind((2,), 0, 1, 0), _ind((3,), 0, 0, 1)], esa)
    assert half.dnf == 0.5 and half.headline == 0.5
    none = accuracy_ratio([_ind((2,), 0, 1, 0), _ind((3,), 0, 0, 1)], esa)
    assert none.dnf == 0.0
    with pytest.raises(ValueError):
        accuracy_ratio([], ParetoFront([]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ga_never_beats_exhaustive(seed):
    rng = np.random.default_rng(seed)
    net = build_network(random_spec(rng))
    front = exhaustive_search(DeploymentProblem(net))
    res = nsga2(DeploymentProblem(net), GAParams(12, 6, seed=seed))
    for ga in res.front:
        assert not any(dominates(ga.fitness, m.fitness) for m in front)
