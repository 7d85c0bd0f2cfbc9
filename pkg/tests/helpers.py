"""Random small networks and brute-force oracles shared by the test modules."""
from __future__ import annotations

import numpy as np

from iotdefense.network import NetworkSpec

BITS = {"server": 2, "client": 1, "iot": 2}  # decoy bits, plus the patch bit for iot


def random_spec(rng: np.random.Generator, max_nodes: int = 12, max_bits: int = 8, acyclic: bool = True) -> NetworkSpec:
    """A random valid spec with at most ``max_nodes`` real devices and ``max_bits`` genome bits.

    Subnet edges only point from lower to higher index unless ``acyclic`` is False,
    in which case one back edge may close a cycle.
    """
    n_sub = int(rng.integers(2, 5))
    subnets = [f"s{i}" for i in range(n_sub)]
    edges = [[subnets[i], subnets[j]] for i in range(n_sub) for j in range(i + 1, n_sub) if rng.random() < 0.6]
    if not acyclic and edges and rng.random() < 0.5:
        a, b = edges[int(rng.integers(len(edges)))]
        edges.append([b, a])
    entry = rng.random(n_sub) < 0.5
    entry[int(rng.integers(n_sub - 1))] = True  # never only the last subnet
    types = []
    bits = nodes = 0
    categories = ["server"] + [str(c) for c in rng.choice(["server", "client", "iot"], size=6)]
    for k, cat in enumerate(categories):
        count = int(rng.integers(1, 4))
        if bits + BITS[cat] > max_bits or nodes + count > max_nodes:
            continue
        t = {
            "name": f"{cat}{k}",
            "category": cat,
            "count": count,
            "subnet": subnets[int(rng.integers(n_sub))],
            "decoy_price_emulated": int(rng.integers(1, 20)) * 100,
        }
        if cat == "server":
            t["decoy_price_full_os"] = t["decoy_price_emulated"] + int(rng.integers(1, 20)) * 100
        if cat == "iot":
            t["patch_price"] = int(rng.integers(1, 60)) * 100
        types.append(t)
        bits += BITS[cat]
        nodes += count
    return NetworkSpec.from_dict(
        {
            "subnets": [{"id": s, "entry": bool(e)} for s, e in zip(subnets, entry)],
            "subnet_edges": edges,
            "device_types": types,
            "probabilities": {"emulated": float(rng.uniform(0.1, 0.6)), "full_os": float(rng.uniform(0.6, 0.99))},
            "intelligence_cost": int(rng.integers(0, 50)) * 100,
        }
    )


def brute_force_ranks(F: np.ndarray) -> np.ndarray:
    """Front index from the full pairwise domination matrix, peeled layer by layer (maximization)."""
    F = np.asarray(F, dtype=float)
    ge = (F[:, None, :] >= F[None, :, :]).all(axis=2)
    gt = (F[:, None, :] > F[None, :, :]).any(axis=2)
    dom = ge & gt  # dom[i, j]: row i dominates row j
    ranks = np.full(len(F), -1)
    remaining = np.ones(len(F), dtype=bool)
    r = 0
    while remaining.any():
        layer = remaining & ~dom[remaining].any(axis=0)
        ranks[layer] = r
        remaining &= ~layer
        r += 1
    return ranks
