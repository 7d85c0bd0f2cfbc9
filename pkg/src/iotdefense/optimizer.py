"""NSGA-II over bit-encoded deployment vectors, plus the exhaustive-search oracle.

All objectives are maximized. A problem object supplies ``width``,
``decode(bits, rng) -> tuple`` (decode and repair) and
``evaluate_many(matrix) -> (n, 3) array``; :class:`DeploymentProblem` is the
network-backed implementation.
"""
from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from iotdefense import kernels
from iotdefense.metrics import Evaluator, FitnessTriple
from iotdefense.network import (
    DeploymentVector,
    IoTNetwork,
    decode,
    decoy_types,
    encode,
    genome_width,
    patch_types,
    random_deployment,
    repair,
    valid_space,
    valid_space_size,
)

log = logging.getLogger(__name__)

DEFAULT_SPACE_LIMIT = 2**24


class SpaceLimitError(RuntimeError):
    """The valid deployment space is larger than the configured limit."""


@dataclass(frozen=True)
class GAParams:
    population_size: int = 100
    max_generations: int = 100
    crossover_rate: float = 0.8
    mutation_rate: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population size must be at least 2")
        if self.max_generations < 1:
            raise ValueError("max generations must be positive")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class Individual:
    genome: np.ndarray
    dv: tuple[int, ...]
    fitness: FitnessTriple
    rank: int = 0
    crowding: float = 0.0


@dataclass(frozen=True)
class FrontMember:
    dv: tuple[int, ...]
    fitness: FitnessTriple


@dataclass
class ParetoFront:
    """Strongly nondominated deployments; one member per distinct deployment vector."""

    members: list[FrontMember] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def dvs(self) -> set[tuple[int, ...]]:
        return {m.dv for m in self.members}

    @property
    def triples(self) -> list[FitnessTriple]:
        return sorted({m.fitness for m in self.members})

    def __contains__(self, dv) -> bool:
        return tuple(dv) in self.dvs

    def fitness_of(self, dv) -> FitnessTriple:
        dv = tuple(dv)
        for m in self.members:
            if m.dv == dv:
                return m.fitness
        raise KeyError(dv)


class DeploymentProblem:
    """Deployment search space of one network."""

    def __init__(self, network: IoTNetwork, jobs: int = 1):
        self.network = network
        self.Y_d = decoy_types(network)
        self.Y_p = patch_types(network)
        self.n_decoy = len(self.Y_d)
        self.width = genome_width(self.Y_d, self.Y_p)
        self.evaluator = Evaluator(network, jobs=jobs)

    @property
    def evaluations(self) -> int:
        return self.evaluator.evaluations

    def random_genome(self, rng: np.random.Generator) -> np.ndarray:
        dv = random_deployment(self.Y_d, self.Y_p, rng)
        return np.array([int(c) for c in encode(dv, self.Y_d, self.Y_p)], dtype=np.uint8)

    def decode(self, bits: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
        return repair(decode(bits, self.Y_d, self.Y_p), self.Y_d, rng).values

    def evaluate_many(self, dvs: np.ndarray) -> np.ndarray:
        return self.evaluator.objectives(dvs)

    def space_size(self) -> int:
        return valid_space_size(self.Y_d, self.Y_p)

    def valid_space(self) -> np.ndarray:
        return valid_space(self.Y_d, self.Y_p)

    def to_deployment(self, dv: Sequence[int]) -> DeploymentVector:
        return DeploymentVector.from_values(dv, self.n_decoy)

    def bits(self, dv: Sequence[int]) -> str:
        return encode(self.to_deployment(dv), self.Y_d, self.Y_p)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is at least as good as ``b`` everywhere and strictly better somewhere."""
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))


def fast_nondominated_sort(objectives: np.ndarray) -> list[list[int]]:
    """Partition row indices into fronts F0, F1, ... (maximization)."""
    F = np.asarray(objectives, dtype=np.float64)
    if len(F) == 0:
        return []
    ranks = kernels.nondominated_ranks(np.atleast_2d(F))
    return [np.flatnonzero(ranks == r).tolist() for r in range(int(ranks.max()) + 1)]


def _ranks(F: np.ndarray) -> np.ndarray:
    return np.asarray(kernels.nondominated_ranks(F), dtype=np.int64)


def crowding_distance(objectives: np.ndarray) -> np.ndarray:
    F = np.atleast_2d(np.asarray(objectives, dtype=np.float64))
    n, m = F.shape
    dist = np.zeros(n)
    if n == 0:
        return dist
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        col = F[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def _crowding_by_front(F: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    crowd = np.zeros(len(F))
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(F[idx])
    return crowd


def _tournament(rng: np.random.Generator, ranks: np.ndarray, crowd: np.ndarray) -> int:
    i, j = (int(x) for x in rng.integers(len(ranks), size=2))
    if ranks[i] != ranks[j]:
        return i if ranks[i] < ranks[j] else j
    if crowd[i] != crowd[j]:
        return i if crowd[i] > crowd[j] else j
    return i


@dataclass
class GAResult:
    population: list[Individual]
    front: ParetoFront
    evaluations: int
    history: list[dict]


def nsga2(problem, params: GAParams, on_generation: Callable[[dict], None] | None = None) -> GAResult:
    """Run NSGA-II for ``params.max_generations`` generations.

    Every stochastic decision of a generation is drawn from one seeded stream
    before the offspring are evaluated, so batched or threaded evaluation
    cannot change the outcome. Exactly ``N + G*N`` evaluations are made.
    """
    width = int(problem.width)
    if width < 1:
        raise ValueError("genome width must be positive")
    N, G = params.population_size, params.max_generations
    rng = np.random.default_rng(params.seed)
    evaluations = 0

    if hasattr(problem, "random_genome"):
        genomes = np.array([problem.random_genome(rng) for _ in range(N)], dtype=np.uint8)
    else:
        genomes = rng.integers(0, 2, size=(N, width), dtype=np.uint8)
    dvs = np.array([problem.decode(g, rng) for g in genomes], dtype=np.int8)
    F = np.asarray(problem.evaluate_many(dvs), dtype=np.float64)
    evaluations += N
    ranks = _ranks(F)
    crowd = _crowding_by_front(F, ranks)
    history = []

    for gen in range(1, G + 1):
        children = []
        while len(children) < N:
            a = genomes[_tournament(rng, ranks, crowd)].copy()
            b = genomes[_tournament(rng, ranks, crowd)].copy()
            if width > 1 and rng.random() < params.crossover_rate:
                cut = int(rng.integers(1, width))
                a[cut:], b[cut:] = b[cut:].copy(), a[cut:].copy()
            for child in (a, b):
                if rng.random() < params.mutation_rate:
                    child[int(rng.integers(width))] ^= 1
                children.append(child)
        child_genomes = np.array(children[:N], dtype=np.uint8)
        child_dvs = np.array([problem.decode(g, rng) for g in child_genomes], dtype=np.int8)
        child_F = np.asarray(problem.evaluate_many(child_dvs), dtype=np.float64)
        evaluations += N

        all_genomes = np.concatenate([genomes, child_genomes])
        all_dvs = np.concatenate([dvs, child_dvs])
        all_F = np.concatenate([F, child_F])
        all_ranks = _ranks(all_F)
        all_crowd = _crowding_by_front(all_F, all_ranks)
        # rank ascending, then crowding descending; lexsort keys are minor-first
        keep = np.lexsort((-all_crowd, all_ranks))[:N]
        genomes, dvs, F = all_genomes[keep], all_dvs[keep], all_F[keep]
        ranks = _ranks(F)
        crowd = _crowding_by_front(F, ranks)

        front0 = F[ranks == 0]
        record = {
            "generation": gen,
            "front_size": int(len(front0)),
            "best_dnf": float(F[:, 0].max()),
            "best_nip": float(F[:, 1].max()),
            "best_rcf": float(F[:, 2].max()),
        }
        history.append(record)
        log.info(
            "gen %d front0=%d best_dnf=%.6f best_nip=%.6f best_rcf=%.6f",
            gen, record["front_size"], record["best_dnf"], record["best_nip"], record["best_rcf"],
        )
        if on_generation is not None:
            on_generation(record)

    population = [
        Individual(genomes[k].copy(), tuple(int(x) for x in dvs[k]), FitnessTriple(*map(float, F[k])), int(ranks[k]), float(crowd[k]))
        for k in range(N)
    ]
    seen: dict[tuple[int, ...], FrontMember] = {}
    for ind in population:
        if ind.rank == 0 and ind.dv not in seen:
            seen[ind.dv] = FrontMember(ind.dv, ind.fitness)
    front = ParetoFront(sorted(seen.values(), key=lambda m: m.dv))
    return GAResult(population, front, evaluations, history)


def pareto_filter(F: np.ndarray) -> np.ndarray:
    """Boolean mask of rows whose objective triple is not dominated by any other row.

    Sweeps distinct triples in descending lexicographic order while keeping a
    2-D staircase of (objective 1, objective 2) maxima seen so far.
    """
    F = np.asarray(F, dtype=np.float64)
    if len(F) == 0:
        return np.zeros(0, dtype=bool)
    uniq, inverse = np.unique(F, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    order = np.lexsort((-uniq[:, 2], -uniq[:, 1], -uniq[:, 0]))
    keys: list[float] = []  # objective 1 ascending
    vals: list[float] = []  # objective 2, descending along keys
    keep_uniq = np.zeros(len(uniq), dtype=bool)
    for u in order:
        y, z = uniq[u, 1], uniq[u, 2]
        pos = bisect_left(keys, y)
        if pos < len(keys) and vals[pos] >= z:
            continue  # an earlier triple is >= in all objectives and distinct
        keep_uniq[u] = True
        lo = pos
        while lo > 0 and vals[lo - 1] <= z:
            lo -= 1
        hi = pos + 1 if pos < len(keys) and keys[pos] == y else pos
        keys[lo:hi] = [y]
        vals[lo:hi] = [z]
    return keep_uniq[inverse]


def exhaustive_search(problem: DeploymentProblem, limit: int = DEFAULT_SPACE_LIMIT, chunk: int = 1 << 16) -> ParetoFront:
    """Exact frontier over every valid deployment vector."""
    size = problem.space_size()
    if size > limit:
        raise SpaceLimitError(f"valid space has {size} deployments, limit is {limit}")
    space = problem.valid_space()
    F = np.concatenate([problem.evaluate_many(space[i : i + chunk]) for i in range(0, len(space), chunk)])
    mask = pareto_filter(F)
    members = [
        FrontMember(tuple(int(x) for x in space[k]), FitnessTriple(*map(float, F[k])))
        for k in np.flatnonzero(mask)
    ]
    return ParetoFront(members)


METRICS = ("dnf", "nip", "rcf")


@dataclass(frozen=True)
class AccuracyRatio:
    dnf: float
    nip: float
    rcf: float

    @property
    def headline(self) -> float:
        return min(1.0, max(0.0, min(self.dnf, self.nip, self.rcf)))


def accuracy_ratio(ga_final: Iterable[Individual] | GAResult, esa_front: ParetoFront) -> AccuracyRatio:
    """Per metric: distinct GA deployments attaining the exact maximum over distinct frontier deployments attaining it.

    Per-metric ratios may exceed 1 when the GA holds dominated deployments that
    tie on one metric; the headline clamps to [0, 1].
    """
    if isinstance(ga_final, GAResult):
        ga_final = ga_final.population
    if len(esa_front) == 0:
        raise ValueError("empty exhaustive-search front")
    ga_final = list(ga_final)
    ratios = []
    for k in range(3):
        best = max(m.fitness[k] for m in esa_front)
        n_esa = len({m.dv for m in esa_front if m.fitness[k] == best})
        n_ga = len({ind.dv for ind in ga_final if ind.fitness[k] == best})
        ratios.append(n_ga / n_esa)
    return AccuracyRatio(*ratios)
