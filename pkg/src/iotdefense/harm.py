"""Three-layer attack model and attack-path enumeration.

Upper layer: subnet reachability. Middle layer: node connectivity under the
deception semantics (an attacker who touches a decoy either stops or is
funneled to the decoy target, so no path returns to a real node). Lower layer:
one abstract vulnerability per unpatched node.

Two routes compute the same path statistics. ``enumerate_attack_paths`` walks
every simple path explicitly; ``PathCounter`` counts path classes on the
type-level DAG without materializing paths (compiled kernel when available).
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from iotdefense import kernels
from iotdefense.network import (
    DeploymentVector,
    IoTNetwork,
    Node,
    apply_deployment,
    as_deployment,
    decoy_types,
    patch_types,
)


@dataclass(frozen=True)
class Harm:
    network: IoTNetwork
    upper: nx.DiGraph
    middle: nx.DiGraph
    lower: dict[str, tuple[str, ...]]

    def node(self, node_id: str) -> Node:
        return self.middle.nodes[node_id]["node"]

    @property
    def entries(self) -> list[str]:
        net = self.network
        return [n.id for n in net.nodes if n.subnet in net.entry_subnets and not n.patched]

    @property
    def real_targets(self) -> list[str]:
        net = self.network
        return [n.id for n in net.nodes if not n.decoy and not n.patched and n.category == net.target_category]

    @property
    def decoy_targets(self) -> list[str]:
        net = self.network
        return [n.id for n in net.nodes if n.decoy and n.category == net.target_category]


def build_harm(deployed: IoTNetwork) -> Harm:
    upper = nx.DiGraph()
    upper.add_nodes_from(deployed.subnets)
    upper.add_edges_from(deployed.subnet_edges)

    middle = nx.DiGraph()
    live = [n for n in deployed.nodes if not n.patched]
    for n in deployed.nodes:
        middle.add_node(n.id, node=n)
    target = deployed.target_category
    for u in live:
        for v in live:
            if not upper.has_edge(u.subnet, v.subnet):
                continue
            if u.decoy and not (v.decoy and v.category == target):
                continue
            middle.add_edge(u.id, v.id)

    lower = {n.id: (() if n.patched else (f"v:{n.id}",)) for n in deployed.nodes}
    return Harm(deployed, upper, middle, lower)


@dataclass(frozen=True)
class AttackPath:
    nodes: tuple[Node, ...]

    @property
    def length(self) -> int:
        return len(self.nodes)

    @property
    def decoy_count(self) -> int:
        return sum(n.decoy for n in self.nodes)

    @property
    def prob_product(self) -> float:
        return math.prod(n.interaction_prob for n in self.nodes)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def __str__(self) -> str:
        return "->".join(self.ids)


@dataclass(frozen=True)
class PathSet:
    real_paths: tuple[AttackPath, ...]
    decoy_paths: tuple[AttackPath, ...]

    @property
    def naprt(self) -> int:
        return len(self.real_paths)

    @property
    def napdt(self) -> int:
        return len(self.decoy_paths)


@dataclass(frozen=True)
class PathClass:
    length: int
    decoy_count: int
    prob_product: float
    multiplicity: int


@dataclass(frozen=True)
class GroupedPathSet:
    real_count: int
    decoy_classes: tuple[PathClass, ...]

    @property
    def naprt(self) -> int:
        return self.real_count

    @property
    def napdt(self) -> int:
        return sum(c.multiplicity for c in self.decoy_classes)


def enumerate_attack_paths(
    harm: Harm,
    entries: Iterable[str] | None = None,
    targets: Iterable[str] | None = None,
    max_length: int | None = None,
) -> PathSet:
    """Every simple path from an entry to a target, split by target kind.

    Paths are recorded whenever they reach a target and keep extending past it.
    ``max_length`` caps the node count for cyclic topologies.
    """
    entries = harm.entries if entries is None else list(entries)
    if targets is None:
        targets = harm.real_targets + harm.decoy_targets
    target_set = set(targets)
    succ = {u: list(harm.middle.successors(u)) for u in harm.middle.nodes}
    real: list[AttackPath] = []
    decoy: list[AttackPath] = []

    def record(stack: list[str]) -> None:
        path = AttackPath(tuple(harm.node(x) for x in stack))
        (decoy if path.nodes[-1].decoy else real).append(path)

    for start in entries:
        stack = [start]
        on_path = {start}
        if start in target_set:
            record(stack)
        iters = [iter(succ[start])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                iters.pop()
                on_path.discard(stack.pop())
                continue
            if nxt in on_path or (max_length is not None and len(stack) >= max_length):
                continue
            stack.append(nxt)
            on_path.add(nxt)
            if nxt in target_set:
                record(stack)
            iters.append(iter(succ[nxt]))
    return PathSet(tuple(real), tuple(decoy))


def group_paths(path_set: PathSet) -> GroupedPathSet:
    keys = Counter((p.length, p.decoy_count, p.prob_product) for p in path_set.decoy_paths)
    classes = tuple(PathClass(l, d, pr, m) for (l, d, pr), m in sorted(keys.items()))
    return GroupedPathSet(path_set.naprt, classes)


def write_path_dump(path_set: PathSet, path: str | Path) -> None:
    lines = ["#AP_r"]
    lines.extend(str(p) for p in path_set.real_paths)
    lines.append("#AP_d")
    lines.extend(str(p) for p in path_set.decoy_paths)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_path_dump(path: str | Path) -> dict[str, list[list[str]]]:
    sections: dict[str, list[list[str]]] = {"AP_r": [], "AP_d": []}
    current = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            current = line[1:]
            continue
        sections[current].append(line.split("->"))
    return sections


# --- class counting on the type-level DAG ---------------------------------------


@dataclass
class PathCounts:
    """Batch output of ``PathCounter``: ``decoy[b, l, d, a]`` as in the kernel."""

    real: np.ndarray
    decoy: np.ndarray


class PathCounter:
    """Counts attack-path classes for many deployment vectors on one network.

    Requires an acyclic subnet graph; ``acyclic`` is False otherwise and callers
    fall back to explicit enumeration.
    """

    def __init__(self, network: IoTNetwork, jobs: int = 1):
        self.network = network
        self.jobs = max(1, int(jobs))
        self.Y_d = decoy_types(network)
        self.Y_p = patch_types(network)
        n = len(self.Y_d)
        upper = nx.DiGraph()
        upper.add_nodes_from(network.subnets)
        upper.add_edges_from(network.subnet_edges)
        self.acyclic = nx.is_directed_acyclic_graph(upper)
        self.max_len = nx.dag_longest_path_length(upper) + 1 if self.acyclic else 0

        self.counts = np.array([t.count for t in self.Y_d], dtype=np.int64)
        self.adj = np.array(
            [[upper.has_edge(u.subnet, v.subnet) for v in self.Y_d] for u in self.Y_d], dtype=np.uint8
        ).reshape(n, n)
        self.is_target = np.array([t.category == network.target_category for t in self.Y_d], dtype=np.uint8)
        self.is_entry = np.array([t.subnet in network.entry_subnets for t in self.Y_d], dtype=np.uint8)
        patch_index = {t.name: n + k for k, t in enumerate(self.Y_p)}
        self.patch_col = np.array([patch_index.get(t.name, -1) for t in self.Y_d], dtype=np.int64)
        if self.acyclic:
            topo = {s: k for k, s in enumerate(nx.topological_sort(upper))}
            self.order = np.array(sorted(range(n), key=lambda i: -topo[self.Y_d[i].subnet]), dtype=np.int64)
        else:
            self.order = np.arange(n, dtype=np.int64)

    def count(self, dvs: np.ndarray) -> PathCounts:
        if not self.acyclic:
            raise ValueError("class counting needs an acyclic subnet graph")
        dvs = np.ascontiguousarray(np.atleast_2d(np.asarray(dvs, dtype=np.int8)))
        args = (self.counts, self.adj, self.is_target, self.is_entry, self.patch_col, self.order)
        if self.jobs == 1 or len(dvs) < 2 * self.jobs:
            real, decoy = kernels.count_paths(*args, dvs, self.max_len)
            return PathCounts(real, decoy)
        chunks = np.array_split(dvs, self.jobs)
        with ThreadPoolExecutor(self.jobs) as pool:
            parts = list(pool.map(lambda c: kernels.count_paths(*args, c, self.max_len), chunks))
        return PathCounts(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))

    def grouped(self, dv: DeploymentVector | Sequence[int]) -> GroupedPathSet:
        dv = as_deployment(dv, self.network)
        pc = self.count(np.array([dv.values], dtype=np.int8))
        p_emu, p_full = self.network.p_emulated, self.network.p_full_os
        classes = []
        for l, d, a in zip(*np.nonzero(pc.decoy[0])):
            prob = p_emu ** int(a) * p_full ** int(d - a)
            classes.append(PathClass(int(l), int(d), prob, int(pc.decoy[0, l, d, a])))
        return GroupedPathSet(int(pc.real[0]), tuple(classes))


def attack_paths(network: IoTNetwork, dv: DeploymentVector | Sequence[int], check: bool = True) -> PathSet:
    """Deploy, build the model, and enumerate paths explicitly."""
    deployed = apply_deployment(network, dv, check=check)
    return enumerate_attack_paths(build_harm(deployed))
