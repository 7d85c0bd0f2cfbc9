"""Pure-Python kernels. Same contracts as the compiled ``_kernels`` module."""
from __future__ import annotations

from collections import defaultdict

import numpy as np


def count_paths(counts, adj, is_target, is_entry, patch_col, order, dvs, max_len):
    """Count attack paths per deployment row on the type-level DAG.

    Each device type contributes a real group (``counts[i]`` interchangeable
    nodes, absent when patched) and a decoy group (one node when its decoy
    level is nonzero). Edge rules: real->real and real->decoy along ``adj``;
    decoy->decoy only into decoy targets; never decoy->real.

    ``order`` lists type indices sinks-first. Returns ``(real, decoy)`` where
    ``real[b]`` is the number of real-target paths and ``decoy[b, l, d, a]``
    counts decoy-target paths of ``l`` nodes holding ``d`` decoys, ``a`` of
    them emulated.
    """
    n = len(counts)
    dvs = np.asarray(dvs)
    B = dvs.shape[0]
    K = max_len + 1
    succ = [[j for j in range(n) if adj[i][j]] for i in range(n)]
    counts = [int(c) for c in counts]
    real_out = np.zeros(B, dtype=np.int64)
    decoy_out = np.zeros((B, K, K, K), dtype=np.int64)
    for b in range(B):
        row = [int(x) for x in dvs[b]]
        real_total, tab = _count_row(counts, succ, is_target, is_entry, patch_col, order, row, n)
        real_out[b] = real_total
        for (l, d, a), c in tab.items():
            decoy_out[b, l, d, a] += c
    return real_out, decoy_out


def _count_row(counts, succ, is_target, is_entry, patch_col, order, row, n):
    level = row[:n]
    real_on = [counts[i] > 0 and (patch_col[i] < 0 or row[patch_col[i]] == 0) for i in range(n)]
    R = [0] * n
    Dr: list[dict] = [{} for _ in range(n)]
    Dd: list[dict] = [{} for _ in range(n)]
    for i in order:
        if real_on[i]:
            r = 1 if is_target[i] else 0
            acc: dict = defaultdict(int)
            for j in succ[i]:
                if real_on[j]:
                    m = counts[j]
                    r += m * R[j]
                    for (l, d, a), c in Dr[j].items():
                        acc[(l + 1, d, a)] += m * c
                if level[j]:
                    for (l, d, a), c in Dd[j].items():
                        acc[(l + 1, d, a)] += c
            R[i] = r
            Dr[i] = acc
        if level[i]:
            e = 1 if level[i] == 1 else 0
            acc = defaultdict(int)
            if is_target[i]:
                acc[(1, 1, e)] = 1
            for j in succ[i]:
                if level[j] and is_target[j]:
                    for (l, d, a), c in Dd[j].items():
                        acc[(l + 1, d + 1, a + e)] += c
            Dd[i] = acc

    real_total = 0
    tab: dict = defaultdict(int)
    for i in range(n):
        if not is_entry[i]:
            continue
        if real_on[i]:
            real_total += counts[i] * R[i]
            for key, c in Dr[i].items():
                tab[key] += counts[i] * c
        if level[i]:
            for key, c in Dd[i].items():
                tab[key] += c
    return real_total, tab


def nondominated_ranks(F):
    """Front index of every row of ``F`` under maximization (0 = nondominated)."""
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ranks
    ge = (F[:, None, :] >= F[None, :, :]).all(axis=2)
    gt = (F[:, None, :] > F[None, :, :]).any(axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    remaining = np.ones(n, dtype=bool)
    rank = 0
    while remaining.any():
        dominated = dom[remaining][:, remaining].any(axis=0)
        idx = np.flatnonzero(remaining)[~dominated]
        ranks[idx] = rank
        remaining[idx] = False
        rank += 1
    return ranks
