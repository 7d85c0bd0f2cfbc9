"""Built-in scenarios and post-optimization decision analysis.

Scenarios: the PACS hospital network and the ``2-50-N`` scaling family
(2 servers, 50 clients of two OS types, N IoT devices in types of 25).
Analysis: budget filtering, weighted scalarization of DNF/NIP, and the
defense-comparison table.
"""
from __future__ import annotations

import csv
import io
import math
import re
import time
from dataclasses import asdict, dataclass
from importlib.resources import files
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from iotdefense.metrics import AnalysisMetrics, analysis_metrics
from iotdefense.network import (
    IoTNetwork,
    NetworkSpec,
    SpecError,
    build_network,
    decoy_types,
    patch_types,
)
from iotdefense.optimizer import (
    DeploymentProblem,
    FrontMember,
    GAParams,
    accuracy_ratio,
    exhaustive_search,
    nsga2,
)

SCALED_IOT_GRID = tuple(range(50, 201, 25))
IOT_TYPE_SIZE = 25

# case-study deployments named in the PACS analysis
PACS_DEPLOYMENTS = {
    "dv1": (2, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1),
    "A*": (2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1),
    "B*": (1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1),
    "C*": (2, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1),
    "D*": (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "P1": (1, 1, 1, 0, 1, 1, 0, 1, 0, 1, 0),
    "P2": (2, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0),
    "P3": (2, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0),
    "P4": (2, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0),
    "P5": (2, 1, 1, 1, 1, 1, 1, 0, 0, 1, 0),
}

NO_DEFENSE = "no defense"
ONLY_PATCH = "only patch"
ONLY_DECEPTION = "only deception"
SPECIAL_DEPLOYMENTS = (NO_DEFENSE, ONLY_PATCH, ONLY_DECEPTION)

PACS_COMPARISON = (NO_DEFENSE, ONLY_PATCH, ONLY_DECEPTION, "P1", "P4", "P5")

# (population, generations) per IoT count; larger networks get the tuned settings
TUNED_GA_PARAMS = {50: (100, 100), 75: (100, 100), 100: (100, 100), 125: (100, 100),
                 150: (100, 150), 175: (150, 150), 200: (150, 200)}


def pacs_case_study() -> NetworkSpec:
    return NetworkSpec.loads(files("iotdefense").joinpath("data/pacs.spec").read_text(encoding="utf-8"))


def scaled_network(n_iot: int) -> NetworkSpec:
    if n_iot not in SCALED_IOT_GRID:
        raise SpecError(f"n_iot must be one of {SCALED_IOT_GRID}, got {n_iot}")
    n_types = n_iot // IOT_TYPE_SIZE
    subnets = [{"id": "server", "entry": False}, {"id": "client", "entry": True}]
    edges = [["client", "server"]]
    types = [
        {"name": "Server (Linux)", "category": "server", "count": 2, "subnet": "server",
         "decoy_price_emulated": 400, "decoy_price_full_os": 1500},
        {"name": "Client (Win8)", "category": "client", "count": 25, "subnet": "client",
         "decoy_price_emulated": 300},
        {"name": "Client (Win10)", "category": "client", "count": 25, "subnet": "client",
         "decoy_price_emulated": 300},
    ]
    for k in range(n_types):
        vlan = f"iot{k + 1}"
        subnets.append({"id": vlan, "entry": True})
        edges += [[vlan, "client"], [vlan, "server"]]
        types.append(
            {"name": f"IoT type {k + 1}", "category": "iot", "count": IOT_TYPE_SIZE, "subnet": vlan,
             "decoy_price_emulated": 200, "patch_price": 1000 + 500 * k}
        )
    return NetworkSpec.from_dict(
        {
            "name": f"2-50-{n_iot}",
            "subnets": subnets,
            "subnet_edges": edges,
            "device_types": types,
            "probabilities": {"emulated": 0.5, "full_os": 0.9},
            "intelligence_cost": 20_000,
        }
    )


def scenario(name: str) -> NetworkSpec:
    """Look up a built-in scenario: ``pacs`` or ``2-50-N``."""
    if name == "pacs":
        return pacs_case_study()
    m = re.fullmatch(r"2-50-(\d+)", name)
    if m:
        return scaled_network(int(m.group(1)))
    raise SpecError(f"unknown scenario {name!r}")


# --- decision analysis ----------------------------------------------------------


def min_rcf(budget: float, tc: float) -> float:
    return (tc - budget) / tc


def budget_filter(front: Iterable[FrontMember], budget: float, tc: float) -> list[FrontMember]:
    threshold = min_rcf(budget, tc)
    return [m for m in front if m.fitness.rcf >= threshold]


@dataclass(frozen=True)
class ScalarChoice:
    beta: float
    members: tuple[FrontMember, ...]
    score: float


DEFAULT_BETAS = tuple(round(0.1 * k, 1) for k in range(11))


def scalarize_sweep(points: Sequence[FrontMember], betas: Sequence[float] = DEFAULT_BETAS) -> list[ScalarChoice]:
    """For each beta, the points maximizing ``beta*DNF + (1-beta)*NIP`` (all ties kept)."""
    points = list(points)
    if not points:
        raise ValueError("no points to scalarize")
    dnf = np.array([p.fitness.dnf for p in points])
    nip = np.array([p.fitness.nip for p in points])
    out = []
    for beta in betas:
        score = beta * dnf + (1.0 - beta) * nip
        best = score.max()
        tied = np.flatnonzero(np.isclose(score, best, rtol=1e-12, atol=1e-15))
        out.append(ScalarChoice(float(beta), tuple(points[k] for k in tied), float(best)))
    return out


def special_deployment(name: str, network: IoTNetwork) -> tuple[int, ...]:
    Y_d, Y_p = decoy_types(network), patch_types(network)
    if name == NO_DEFENSE:
        return (0,) * (len(Y_d) + len(Y_p))
    if name == ONLY_PATCH:
        return (0,) * len(Y_d) + (1,) * len(Y_p)
    if name == ONLY_DECEPTION:
        return tuple(t.max_level for t in Y_d) + (0,) * len(Y_p)
    raise KeyError(name)


def comparison_report(
    network: IoTNetwork, named_deployments: Mapping[str, Sequence[int] | None] | Sequence[str]
) -> list[tuple[str, AnalysisMetrics]]:
    """Analysis metrics per named deployment.

    A name mapping to ``None`` (or a bare name in a list) must be one of the
    baselines ``no defense``, ``only patch``, ``only deception``.
    """
    if not isinstance(named_deployments, Mapping):
        named_deployments = {name: None for name in named_deployments}
    rows = []
    for name, dv in named_deployments.items():
        if dv is None:
            if name not in SPECIAL_DEPLOYMENTS:
                raise KeyError(f"unknown deployment {name!r}")
            rows.append((name, analysis_metrics(network, special_deployment(name, network), check=False)))
        else:
            rows.append((name, analysis_metrics(network, dv)))
    return rows


def pacs_comparison(network: IoTNetwork | None = None) -> list[tuple[str, AnalysisMetrics]]:
    network = network or build_network(pacs_case_study())
    named = {n: PACS_DEPLOYMENTS.get(n) for n in PACS_COMPARISON}
    return comparison_report(network, named)


def percent(x: float) -> str:
    """Percentage to one decimal, halves rounded up (0.3125 -> '31.3%')."""
    return f"{math.floor(1000 * x + 0.5) / 10:.1f}%"


def format_comparison(rows: Sequence[tuple[str, AnalysisMetrics]]) -> str:
    lines = [f"{'deployment':<16}{'PD':>8}{'PPD':>8}{'NAPRT':>8}{'NAPDT':>8}{'DCDM':>8}"]
    for name, m in rows:
        lines.append(f"{name:<16}{percent(m.pd):>8}{percent(m.ppd):>8}{m.naprt:>8}{m.napdt:>8}{m.dcdm:>8}")
    return "\n".join(lines)


def comparison_csv(rows: Sequence[tuple[str, AnalysisMetrics]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["deployment", "pd", "ppd", "naprt", "napdt", "dcdm"])
    for name, m in rows:
        w.writerow([name, repr(m.pd), repr(m.ppd), m.naprt, m.napdt, m.dcdm])
    return buf.getvalue()


# --- GA vs exhaustive search ----------------------------------------------------

BENCHMARK_COLUMNS = [
    "network_label", "bits", "pop", "gens", "ga_seconds", "esa_seconds", "valid_space",
    "ratio_dnf", "ratio_nip", "ratio_rcf", "ratio_headline",
]


@dataclass
class BenchmarkRecord:
    network_label: str
    bits: int
    pop: int
    gens: int
    ga_seconds: float
    esa_seconds: float
    valid_space: int
    ratio_dnf: float
    ratio_nip: float
    ratio_rcf: float
    ratio_headline: float
    ga_evaluations: int
    esa_evaluations: int


def benchmark(
    n_iot_values: Sequence[int],
    params_list: Sequence[GAParams] | GAParams | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> list[BenchmarkRecord]:
    """Time GA and exhaustive search on each scaled network and score the GA's accuracy.

    ``params_list`` may give one GAParams per network, a single GAParams for all,
    or None for the tuned per-size settings in ``TUNED_GA_PARAMS``.
    """
    n_iot_values = list(n_iot_values)
    if not n_iot_values:
        raise ValueError("empty network grid")
    if params_list is None:
        params_list = [GAParams(*TUNED_GA_PARAMS[n], seed=seed) for n in n_iot_values]
    elif isinstance(params_list, GAParams):
        params_list = [params_list] * len(n_iot_values)
    if len(params_list) != len(n_iot_values):
        raise ValueError("one GAParams per network required")

    records = []
    for n_iot, params in zip(n_iot_values, params_list):
        network = build_network(scaled_network(n_iot))
        esa_problem = DeploymentProblem(network, jobs=jobs)
        t0 = time.perf_counter()
        front = exhaustive_search(esa_problem)
        esa_seconds = time.perf_counter() - t0

        ga_problem = DeploymentProblem(network, jobs=jobs)
        t0 = time.perf_counter()
        result = nsga2(ga_problem, params)
        ga_seconds = time.perf_counter() - t0

        ratio = accuracy_ratio(result, front)
        records.append(
            BenchmarkRecord(
                network_label=f"2-50-{n_iot}",
                bits=ga_problem.width,
                pop=params.population_size,
                gens=params.max_generations,
                ga_seconds=ga_seconds,
                esa_seconds=esa_seconds,
                valid_space=esa_problem.space_size(),
                ratio_dnf=ratio.dnf,
                ratio_nip=ratio.nip,
                ratio_rcf=ratio.rcf,
                ratio_headline=ratio.headline,
                ga_evaluations=result.evaluations,
                esa_evaluations=esa_problem.evaluations,
            )
        )
    return records


def benchmark_csv(records: Sequence[BenchmarkRecord], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCHMARK_COLUMNS, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in records:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
