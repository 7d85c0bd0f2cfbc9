"""Objective metrics (DNF, NIP, RCF), cost breakdown and analysis metrics.

Metric values produced by :class:`Evaluator` depend only on integer path-class
counts and integer money, so two deployments with the same path structure get
bitwise-identical objective values regardless of batch size or thread count.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from iotdefense.harm import GroupedPathSet, PathCounter, PathSet, attack_paths
from iotdefense.network import (
    DeploymentVector,
    IoTNetwork,
    as_deployment,
    check_deployment,
    decoy_types,
    encode,
    patch_types,
)

METRIC_COLUMNS = ["dv_bits", "dnf", "nip", "rcf", "pd", "ppd", "naprt", "napdt", "dcdm"]


class DegenerateDeploymentWarning(RuntimeWarning):
    """No attack path reaches a decoy target; DNF and NIP are reported as 0."""


class FitnessTriple(NamedTuple):
    dnf: float
    nip: float
    rcf: float


@dataclass(frozen=True)
class CostBreakdown:
    ic: int
    dc: int
    pmc: int
    tc: int
    dcdm: int


@dataclass(frozen=True)
class AnalysisMetrics:
    pd: float
    ppd: float
    naprt: int
    napdt: int
    dcdm: int


def _classes(path_set: PathSet | GroupedPathSet):
    if isinstance(path_set, GroupedPathSet):
        return [(c.length, c.decoy_count, c.prob_product, c.multiplicity) for c in path_set.decoy_classes]
    return [(p.length, p.decoy_count, p.prob_product, 1) for p in path_set.decoy_paths]


def dnf(path_set: PathSet | GroupedPathSet) -> float:
    """Mean fraction of decoys along decoy-target paths."""
    classes = _classes(path_set)
    total = sum(m for *_, m in classes)
    if total == 0:
        warnings.warn("no decoy-target paths", DegenerateDeploymentWarning, stacklevel=2)
        return 0.0
    return sum(m * d / l for l, d, _, m in classes) / total


def nip(path_set: PathSet | GroupedPathSet) -> float:
    """Mean product of interaction probabilities along decoy-target paths."""
    classes = _classes(path_set)
    total = sum(m for *_, m in classes)
    if total == 0:
        warnings.warn("no decoy-target paths", DegenerateDeploymentWarning, stacklevel=2)
        return 0.0
    return sum(m * p for _, _, p, m in classes) / total


def total_cost(network: IoTNetwork) -> int:
    return network.price_model.total_cost


def costs(network: IoTNetwork, dv: DeploymentVector | Sequence[int]) -> CostBreakdown:
    dv = as_deployment(dv, network)
    Y_d, Y_p = decoy_types(network), patch_types(network)
    check_deployment(dv, Y_d, Y_p, require_server=False)
    dc = sum(t.decoy_price(v) for t, v in zip(Y_d, dv.decoy_part))
    pmc = sum(t.patch_price for t, q in zip(Y_p, dv.patch_part) if q)
    ic = network.intelligence_cost
    any_decoy = any(v > 0 for v in dv.decoy_part)
    dcdm = pmc + (ic + dc if any_decoy else 0)
    return CostBreakdown(ic, dc, pmc, total_cost(network), dcdm)


def rcf(cb: CostBreakdown) -> float:
    if cb.tc <= 0:
        raise ValueError("total cost must be positive")
    return (cb.tc - (cb.ic + cb.dc + cb.pmc)) / cb.tc


def evaluate(
    network: IoTNetwork, dv: DeploymentVector | Sequence[int], method: str = "counting"
) -> FitnessTriple:
    """Objective triple for one deployment.

    ``method="explicit"`` enumerates every path through the HARM; ``"counting"``
    uses the class-counting kernel (falls back to explicit on cyclic topologies).
    """
    dv = as_deployment(dv, network)
    if method == "explicit" or not PathCounter(network).acyclic:
        ps = attack_paths(network, dv)
        return FitnessTriple(dnf(ps), nip(ps), rcf(costs(network, dv)))
    if method != "counting":
        raise ValueError(f"unknown method {method!r}")
    return Evaluator(network).fitness(dv)


def analysis_metrics(
    network: IoTNetwork, dv: DeploymentVector | Sequence[int], check: bool = True
) -> AnalysisMetrics:
    """PD, PPD, NAPRT, NAPDT and DCDM; ``check=False`` admits baselines without a server decoy."""
    dv = as_deployment(dv, network)
    check_deployment(dv, decoy_types(network), patch_types(network), require_server=check)
    b = Evaluator(network).batch(np.array([dv.values], dtype=np.int8))
    return AnalysisMetrics(float(b.pd[0]), float(b.ppd[0]), int(b.naprt[0]), int(b.napdt[0]), int(b.dcdm[0]))


@dataclass
class MetricBatch:
    dvs: np.ndarray
    dnf: np.ndarray
    nip: np.ndarray
    rcf: np.ndarray
    pd: np.ndarray
    ppd: np.ndarray
    naprt: np.ndarray
    napdt: np.ndarray
    dcdm: np.ndarray

    @property
    def objectives(self) -> np.ndarray:
        return np.column_stack([self.dnf, self.nip, self.rcf])


class Evaluator:
    """Batch metric evaluation for one network via path-class counting."""

    def __init__(self, network: IoTNetwork, jobs: int = 1):
        self.network = network
        self.counter = PathCounter(network, jobs=jobs)
        if not self.counter.acyclic:
            raise ValueError("Evaluator needs an acyclic subnet graph; use evaluate(..., method='explicit')")
        self.Y_d = decoy_types(network)
        self.Y_p = patch_types(network)
        self.n_decoy = len(self.Y_d)
        self.tc = total_cost(network)
        self.n_real = sum(t.count for t in self.Y_d)
        self.level_price = np.array(
            [[t.decoy_price(v) if v <= t.max_level else 0 for v in range(3)] for t in self.Y_d], dtype=np.int64
        )
        self.patch_price = np.array([t.patch_price for t in self.Y_p], dtype=np.int64)
        self.patch_count = np.array([t.count for t in self.Y_p], dtype=np.int64)
        K = self.counter.max_len + 1
        self.lcm = math.lcm(*range(1, K))
        self.dnf_weight = np.array(
            [[d * (self.lcm // l) if l else 0 for d in range(K)] for l in range(K)], dtype=np.int64
        )
        p_emu, p_full = network.p_emulated, network.p_full_os
        self.nip_cells = [(d, a, p_emu**a * p_full ** (d - a)) for d in range(1, K) for a in range(d + 1)]
        self.evaluations = 0

    def batch(self, dvs: np.ndarray) -> MetricBatch:
        dvs = np.ascontiguousarray(np.atleast_2d(np.asarray(dvs, dtype=np.int8)))
        self.evaluations += len(dvs)
        pc = self.counter.count(dvs)
        tab = pc.decoy
        napdt = tab.sum(axis=(1, 2, 3))
        by_len_d = tab.sum(axis=3)
        dnf_num = np.einsum("bld,ld->b", by_len_d, self.dnf_weight)
        by_d_a = tab.sum(axis=1)
        nip_num = np.zeros(len(dvs))
        for d, a, w in self.nip_cells:
            nip_num += by_d_a[:, d, a] * w
        safe = np.where(napdt > 0, napdt, 1)
        dnf_v = np.where(napdt > 0, dnf_num / (self.lcm * safe), 0.0)
        nip_v = np.where(napdt > 0, nip_num / safe, 0.0)

        dec = dvs[:, : self.n_decoy].astype(np.int64)
        pat = dvs[:, self.n_decoy :].astype(np.int64)
        dc = self.level_price[np.arange(self.n_decoy), dec].sum(axis=1)
        pmc = pat @ self.patch_price if len(self.patch_price) else np.zeros(len(dvs), dtype=np.int64)
        ic = self.network.intelligence_cost
        spend = ic + dc + pmc
        rcf_v = (self.tc - spend) / self.tc
        any_decoy = (dec > 0).any(axis=1)
        dcdm = pmc + np.where(any_decoy, ic + dc, 0)
        n_decoys = (dec > 0).sum(axis=1)
        patched = pat @ self.patch_count if len(self.patch_count) else np.zeros(len(dvs), dtype=np.int64)
        return MetricBatch(
            dvs=dvs,
            dnf=dnf_v,
            nip=nip_v,
            rcf=rcf_v,
            pd=n_decoys / self.n_real,
            ppd=patched / self.n_real,
            naprt=pc.real,
            napdt=napdt,
            dcdm=dcdm,
        )

    def objectives(self, dvs: np.ndarray) -> np.ndarray:
        return self.batch(dvs).objectives

    def fitness(self, dv: DeploymentVector | Sequence[int]) -> FitnessTriple:
        dv = as_deployment(dv, self.network)
        check_deployment(dv, self.Y_d, self.Y_p)
        b = self.batch(np.array([dv.values], dtype=np.int8))
        if b.napdt[0] == 0:
            warnings.warn("no decoy-target paths", DegenerateDeploymentWarning, stacklevel=2)
        return FitnessTriple(float(b.dnf[0]), float(b.nip[0]), float(b.rcf[0]))

    def rows(self, dvs: np.ndarray) -> list[dict]:
        """Metric-report rows at full precision."""
        b = self.batch(dvs)
        out = []
        for k, values in enumerate(b.dvs):
            dv = DeploymentVector.from_values(values, self.n_decoy)
            out.append(
                {
                    "dv_bits": encode(dv, self.Y_d, self.Y_p),
                    "dnf": float(b.dnf[k]),
                    "nip": float(b.nip[k]),
                    "rcf": float(b.rcf[k]),
                    "pd": float(b.pd[k]),
                    "ppd": float(b.ppd[k]),
                    "naprt": int(b.naprt[k]),
                    "napdt": int(b.napdt[k]),
                    "dcdm": int(b.dcdm[k]),
                }
            )
        return out


def write_metric_csv(rows: Iterable[dict], path: str | Path | None = None) -> str:
    """Write metric rows (floats via ``repr`` so they round-trip exactly); returns the CSV text."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=METRIC_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items() if k in METRIC_COLUMNS})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_metric_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            rows.append(
                {
                    "dv_bits": r["dv_bits"],
                    **{k: float(r[k]) for k in ("dnf", "nip", "rcf", "pd", "ppd")},
                    **{k: int(r[k]) for k in ("naprt", "napdt", "dcdm")},
                }
            )
    return rows
