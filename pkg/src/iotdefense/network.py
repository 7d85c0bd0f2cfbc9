"""Network model: device catalogs, network specs, deployment vectors and their bit encoding.

A network is a set of subnets with directed reachability between them, populated by
real devices grouped into device types. A deployment vector selects, per device type,
a decoy level (0 = none, 1 = emulated, 2 = full OS for servers) and, per IoT type,
whether a patch contract is bought.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

CATEGORIES = ("server", "client", "iot")


class SpecError(ValueError):
    """Malformed network spec or deployment vector."""


@dataclass(frozen=True)
class DeviceType:
    name: str
    category: str
    count: int
    subnet: str
    decoy_price_emulated: int
    decoy_price_full_os: int | None = None
    patch_price: int | None = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise SpecError(f"{self.name!r}: unknown category {self.category!r}")
        if int(self.count) != self.count or self.count < 1:
            raise SpecError(f"{self.name!r}: count must be a positive integer, got {self.count!r}")
        if self.decoy_price_emulated is None or self.decoy_price_emulated < 0:
            raise SpecError(f"{self.name!r}: missing or negative emulated decoy price")
        if self.category == "server":
            if self.decoy_price_full_os is None or self.decoy_price_full_os < 0:
                raise SpecError(f"{self.name!r}: server types need a full-OS decoy price")
        elif self.decoy_price_full_os is not None:
            raise SpecError(f"{self.name!r}: full-OS decoy price is only defined for servers")
        if self.category == "iot":
            if self.patch_price is None or self.patch_price < 0:
                raise SpecError(f"{self.name!r}: iot types need a patch price")
        elif self.patch_price is not None:
            raise SpecError(f"{self.name!r}: patch price is only defined for iot types")

    @property
    def max_level(self) -> int:
        """Largest legal decoy value for this type."""
        return 2 if self.category == "server" else 1

    def decoy_price(self, level: int) -> int:
        if level == 0:
            return 0
        if level == 1:
            return self.decoy_price_emulated
        if level == 2 and self.category == "server":
            return self.decoy_price_full_os
        raise SpecError(f"{self.name!r}: illegal decoy level {level}")

    @property
    def max_decoy_price(self) -> int:
        return self.decoy_price(self.max_level)


@dataclass(frozen=True)
class Subnet:
    id: str
    entry: bool = False


@dataclass(frozen=True)
class NetworkSpec:
    """Declarative description of a network; the on-disk form is a JSON document."""

    subnets: tuple[Subnet, ...]
    subnet_edges: tuple[tuple[str, str], ...]
    device_types: tuple[DeviceType, ...]
    p_emulated: float = 0.5
    p_full_os: float = 0.9
    intelligence_cost: int = 20_000
    target_category: str = "server"
    name: str = ""

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> NetworkSpec:
        try:
            subnets = tuple(Subnet(str(s["id"]), bool(s.get("entry", False))) for s in data["subnets"])
            edges = tuple((str(a), str(b)) for a, b in data.get("subnet_edges", ()))
            types = []
            for d in data["device_types"]:
                types.append(
                    DeviceType(
                        name=str(d["name"]),
                        category=str(d["category"]),
                        count=d["count"],
                        subnet=str(d["subnet"]),
                        decoy_price_emulated=d.get("decoy_price_emulated"),
                        decoy_price_full_os=d.get("decoy_price_full_os"),
                        patch_price=d.get("patch_price"),
                    )
                )
            probs = data.get("probabilities", {})
            return cls(
                subnets=subnets,
                subnet_edges=edges,
                device_types=tuple(types),
                p_emulated=float(probs.get("emulated", 0.5)),
                p_full_os=float(probs.get("full_os", 0.9)),
                intelligence_cost=data.get("intelligence_cost", 20_000),
                target_category=str(data.get("target_category", "server")),
                name=str(data.get("name", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed network spec: {exc!r}") from exc

    def to_dict(self) -> dict[str, Any]:
        types = []
        for t in self.device_types:
            d: dict[str, Any] = {
                "name": t.name,
                "category": t.category,
                "count": t.count,
                "subnet": t.subnet,
                "decoy_price_emulated": t.decoy_price_emulated,
            }
            if t.decoy_price_full_os is not None:
                d["decoy_price_full_os"] = t.decoy_price_full_os
            if t.patch_price is not None:
                d["patch_price"] = t.patch_price
            types.append(d)
        return {
            "name": self.name,
            "subnets": [{"id": s.id, "entry": s.entry} for s in self.subnets],
            "subnet_edges": [list(e) for e in self.subnet_edges],
            "device_types": types,
            "probabilities": {"emulated": self.p_emulated, "full_os": self.p_full_os},
            "intelligence_cost": self.intelligence_cost,
            "target_category": self.target_category,
        }

    @classmethod
    def loads(cls, text: str) -> NetworkSpec:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"network spec is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> NetworkSpec:
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class Node:
    id: str
    type: DeviceType
    decoy: bool = False
    interaction_prob: float = 1.0
    cost: int = 0
    patched: bool = False

    def __post_init__(self) -> None:
        if self.decoy:
            if not 0.0 < self.interaction_prob < 1.0:
                raise SpecError(f"decoy {self.id}: interaction probability must lie in (0, 1)")
            if self.cost <= 0:
                raise SpecError(f"decoy {self.id}: cost must be positive")
            if self.patched:
                raise SpecError(f"decoy {self.id}: decoys are never patched")
        elif self.interaction_prob != 1.0 or self.cost != 0:
            raise SpecError(f"real node {self.id}: interaction probability 1 and zero cost required")

    @property
    def subnet(self) -> str:
        return self.type.subnet

    @property
    def category(self) -> str:
        return self.type.category


@dataclass(frozen=True)
class PriceModel:
    intelligence_cost: int
    device_types: tuple[DeviceType, ...]

    @property
    def total_cost(self) -> int:
        """Cost of buying every defense at its most expensive option."""
        tc = self.intelligence_cost
        for t in self.device_types:
            tc += t.max_decoy_price
            if t.category == "iot":
                tc += t.patch_price
        return tc


@dataclass(frozen=True)
class IoTNetwork:
    subnets: tuple[str, ...]
    entry_subnets: frozenset[str]
    subnet_edges: tuple[tuple[str, str], ...]
    device_types: tuple[DeviceType, ...]
    nodes: tuple[Node, ...]
    p_emulated: float = 0.5
    p_full_os: float = 0.9
    intelligence_cost: int = 20_000
    target_category: str = "server"
    name: str = ""

    @property
    def real_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if not n.decoy)

    @property
    def decoy_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.decoy)

    @property
    def vulnerabilities(self) -> tuple[str, ...]:
        # one abstract vulnerability per node
        return tuple(f"v:{n.id}" for n in self.nodes)

    @property
    def price_model(self) -> PriceModel:
        return PriceModel(self.intelligence_cost, self.device_types)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def type_named(self, name: str) -> DeviceType:
        for t in self.device_types:
            if t.name == name:
                return t
        raise KeyError(name)


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def build_network(spec: NetworkSpec | Mapping[str, Any]) -> IoTNetwork:
    """Instantiate the real devices of a spec. No decoys are placed and nothing is patched."""
    if not isinstance(spec, NetworkSpec):
        spec = NetworkSpec.from_dict(spec)
    subnet_ids = [s.id for s in spec.subnets]
    if len(set(subnet_ids)) != len(subnet_ids):
        raise SpecError("duplicate subnet ids")
    entries = frozenset(s.id for s in spec.subnets if s.entry)
    if not entries:
        raise SpecError("at least one entry subnet is required")
    edges = []
    for a, b in spec.subnet_edges:
        if a not in subnet_ids or b not in subnet_ids:
            raise SpecError(f"subnet edge {a}->{b} references an undeclared subnet")
        if a == b:
            raise SpecError(f"subnet edge {a}->{b} is a self-loop")
        if (a, b) not in edges:
            edges.append((a, b))
    names = [t.name for t in spec.device_types]
    if len(set(names)) != len(names):
        raise SpecError("duplicate device type names")
    for t in spec.device_types:
        if t.subnet not in subnet_ids:
            raise SpecError(f"{t.name!r} lives in undeclared subnet {t.subnet!r}")
    if spec.target_category not in CATEGORIES:
        raise SpecError(f"unknown target category {spec.target_category!r}")
    if not any(t.category == spec.target_category for t in spec.device_types):
        raise SpecError(f"no device of target category {spec.target_category!r}")
    for p in (spec.p_emulated, spec.p_full_os):
        if not 0.0 < p < 1.0:
            raise SpecError(f"decoy interaction probability {p} outside (0, 1)")
    if spec.intelligence_cost < 0:
        raise SpecError("negative intelligence cost")

    nodes = []
    for t in spec.device_types:
        slug = _slug(t.name)
        nodes.extend(Node(f"{slug}-{k}", t) for k in range(1, t.count + 1))
    return IoTNetwork(
        subnets=tuple(subnet_ids),
        entry_subnets=entries,
        subnet_edges=tuple(edges),
        device_types=tuple(spec.device_types),
        nodes=tuple(nodes),
        p_emulated=spec.p_emulated,
        p_full_os=spec.p_full_os,
        intelligence_cost=spec.intelligence_cost,
        target_category=spec.target_category,
        name=spec.name,
    )


def decoy_types(network: IoTNetwork) -> tuple[DeviceType, ...]:
    return tuple(network.device_types)


def patch_types(network: IoTNetwork) -> tuple[DeviceType, ...]:
    return tuple(t for t in network.device_types if t.category == "iot")


# --- deployment vectors ---------------------------------------------------------


@dataclass(frozen=True)
class DeploymentVector:
    decoy_part: tuple[int, ...]
    patch_part: tuple[int, ...]
    valid: bool = field(default=True, compare=False)

    @classmethod
    def from_values(cls, values: Iterable[int], n_decoy: int, valid: bool = True) -> DeploymentVector:
        values = tuple(int(v) for v in values)
        return cls(values[:n_decoy], values[n_decoy:], valid)

    @property
    def values(self) -> tuple[int, ...]:
        return self.decoy_part + self.patch_part

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.decoy_part) + len(self.patch_part)

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.values)) + ")"


def server_positions(Y_d: Sequence[DeviceType]) -> list[int]:
    return [i for i, t in enumerate(Y_d) if t.category == "server"]


def satisfies_server_rule(dv: DeploymentVector, Y_d: Sequence[DeviceType]) -> bool:
    return any(dv.decoy_part[i] > 0 for i in server_positions(Y_d))


def check_deployment(
    dv: DeploymentVector,
    Y_d: Sequence[DeviceType],
    Y_p: Sequence[DeviceType],
    require_server: bool = True,
) -> None:
    """Raise SpecError unless dv has the right arity and legal values."""
    if len(dv.decoy_part) != len(Y_d) or len(dv.patch_part) != len(Y_p):
        raise SpecError(
            f"deployment vector has arity {len(dv.decoy_part)}+{len(dv.patch_part)}, "
            f"expected {len(Y_d)}+{len(Y_p)}"
        )
    for v, t in zip(dv.decoy_part, Y_d):
        if not 0 <= v <= t.max_level:
            raise SpecError(f"decoy value {v} illegal for {t.name!r}")
    for v in dv.patch_part:
        if v not in (0, 1):
            raise SpecError(f"patch value {v} must be 0 or 1")
    if require_server and not satisfies_server_rule(dv, Y_d):
        raise SpecError("at least one server decoy must be deployed")


def genome_width(Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType]) -> int:
    return sum(2 if t.category == "server" else 1 for t in Y_d) + len(Y_p)


_SERVER_CODE = {0: "00", 1: "01", 2: "10"}


def encode(dv: DeploymentVector, Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType]) -> str:
    check_deployment(dv, Y_d, Y_p, require_server=False)
    parts = []
    for v, t in zip(dv.decoy_part, Y_d):
        parts.append(_SERVER_CODE[v] if t.category == "server" else str(v))
    parts.extend(str(v) for v in dv.patch_part)
    return "".join(parts)


def decode(bits: str | Sequence[int], Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType]) -> DeploymentVector:
    """Decode any bitstring of the right width; server code 11 clamps to 2.

    The result carries ``valid=False`` when no server decoy is selected.
    """
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise SpecError(f"not a bitstring: {bits!r}")
        b = [int(c) for c in bits]
    else:
        b = [int(x) for x in bits]
    width = genome_width(Y_d, Y_p)
    if len(b) != width:
        raise SpecError(f"bitstring has width {len(b)}, expected {width}")
    pos = 0
    decoy = []
    for t in Y_d:
        if t.category == "server":
            decoy.append(min(2 * b[pos] + b[pos + 1], 2))
            pos += 2
        else:
            decoy.append(b[pos])
            pos += 1
    patch = tuple(b[pos:])
    dv = DeploymentVector(tuple(decoy), patch)
    return DeploymentVector(dv.decoy_part, dv.patch_part, satisfies_server_rule(dv, Y_d))


def repair(dv: DeploymentVector, Y_d: Sequence[DeviceType], rng: np.random.Generator) -> DeploymentVector:
    """Force the server-decoy rule by turning on one emulated server decoy chosen at random."""
    servers = server_positions(Y_d)
    if not servers:
        raise SpecError("catalog has no server type")
    if any(dv.decoy_part[i] > 0 for i in servers):
        return DeploymentVector(dv.decoy_part, dv.patch_part, True)
    decoy = list(dv.decoy_part)
    decoy[servers[int(rng.integers(len(servers)))]] = 1
    return DeploymentVector(tuple(decoy), dv.patch_part, True)


def random_deployment(
    Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType], rng: np.random.Generator
) -> DeploymentVector:
    decoy = tuple(int(rng.integers(t.max_level + 1)) for t in Y_d)
    patch = tuple(int(rng.integers(2)) for _ in Y_p)
    return repair(DeploymentVector(decoy, patch), Y_d, rng)


def as_deployment(dv: DeploymentVector | Sequence[int], network: IoTNetwork) -> DeploymentVector:
    if isinstance(dv, DeploymentVector):
        return dv
    return DeploymentVector.from_values(dv, len(network.device_types))


def apply_deployment(
    network: IoTNetwork, dv: DeploymentVector | Sequence[int], check: bool = True
) -> IoTNetwork:
    """Return a copy of ``network`` with one decoy per selected type and the selected iot types patched.

    ``check=False`` admits vectors without a server decoy (used for baseline
    comparisons such as "no defense").
    """
    Y_d, Y_p = decoy_types(network), patch_types(network)
    dv = as_deployment(dv, network)
    check_deployment(dv, Y_d, Y_p, require_server=check)
    patched_types = {t.name for t, q in zip(Y_p, dv.patch_part) if q}
    nodes = []
    for n in network.nodes:
        if not n.decoy and n.type.name in patched_types:
            nodes.append(Node(n.id, n.type, patched=True))
        else:
            nodes.append(n)
    for t, level in zip(Y_d, dv.decoy_part):
        if level == 0:
            continue
        prob = network.p_full_os if level == 2 else network.p_emulated
        nodes.append(Node(f"decoy-{_slug(t.name)}", t, True, prob, t.decoy_price(level)))
    return IoTNetwork(
        subnets=network.subnets,
        entry_subnets=network.entry_subnets,
        subnet_edges=network.subnet_edges,
        device_types=network.device_types,
        nodes=tuple(nodes),
        p_emulated=network.p_emulated,
        p_full_os=network.p_full_os,
        intelligence_cost=network.intelligence_cost,
        target_category=network.target_category,
        name=network.name,
    )


def valid_space_size(Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType]) -> int:
    n_servers = len(server_positions(Y_d))
    return (3**n_servers - 1) * 2 ** (len(Y_d) - n_servers + len(Y_p))


def valid_space(Y_d: Sequence[DeviceType], Y_p: Sequence[DeviceType]) -> np.ndarray:
    """Every valid deployment vector as rows of an int8 matrix (lexicographic order)."""
    radices = [t.max_level + 1 for t in Y_d] + [2] * len(Y_p)
    grids = np.indices(radices, dtype=np.int8).reshape(len(radices), -1).T
    servers = server_positions(Y_d)
    keep = grids[:, servers].any(axis=1)
    return np.ascontiguousarray(grids[keep])
