# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels: attack-path class counting and nondominated ranking.

Contracts mirror ``iotdefense._pykernels``. Inner loops run without the GIL so
several threads can count disjoint batches.
"""
import numpy as np
cimport numpy as cnp

ctypedef long long i64

cnp.import_array()


def count_paths(counts, adj, is_target, is_entry, patch_col, order, dvs, int max_len):
    cdef i64[::1] c_counts = np.ascontiguousarray(counts, dtype=np.int64)
    cdef unsigned char[:, ::1] c_adj = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef unsigned char[::1] c_target = np.ascontiguousarray(is_target, dtype=np.uint8)
    cdef unsigned char[::1] c_entry = np.ascontiguousarray(is_entry, dtype=np.uint8)
    cdef i64[::1] c_patch = np.ascontiguousarray(patch_col, dtype=np.int64)
    cdef i64[::1] c_order = np.ascontiguousarray(order, dtype=np.int64)
    cdef signed char[:, ::1] c_dvs = np.ascontiguousarray(dvs, dtype=np.int8)

    cdef Py_ssize_t n = c_counts.shape[0]
    cdef Py_ssize_t B = c_dvs.shape[0]
    cdef Py_ssize_t K = max_len + 1

    real_arr = np.zeros(B, dtype=np.int64)
    decoy_arr = np.zeros((B, K, K, K), dtype=np.int64)
    cdef i64[::1] real_out = real_arr
    cdef i64[:, :, :, ::1] decoy_out = decoy_arr

    cdef i64[::1] R = np.zeros(n, dtype=np.int64)
    cdef i64[:, :, :, ::1] Dr = np.zeros((n, K, K, K), dtype=np.int64)
    cdef i64[:, :, :, ::1] Dd = np.zeros((n, K, K, K), dtype=np.int64)
    cdef unsigned char[::1] real_on = np.zeros(n, dtype=np.uint8)

    cdef Py_ssize_t b, i, j, oi, l, d, a, e
    cdef i64 m, r, tot
    cdef signed char lvl_i, lvl_j

    with nogil:
        for b in range(B):
            for i in range(n):
                real_on[i] = c_counts[i] > 0 and (c_patch[i] < 0 or c_dvs[b, c_patch[i]] == 0)
                R[i] = 0
                for l in range(K):
                    for d in range(K):
                        for a in range(K):
                            Dr[i, l, d, a] = 0
                            Dd[i, l, d, a] = 0

            for oi in range(n):
                i = c_order[oi]
                lvl_i = c_dvs[b, i]
                if real_on[i]:
                    r = 1 if c_target[i] else 0
                    for j in range(n):
                        if not c_adj[i, j]:
                            continue
                        lvl_j = c_dvs[b, j]
                        if real_on[j]:
                            m = c_counts[j]
                            r += m * R[j]
                            for l in range(1, K - 1):
                                for d in range(l + 1):
                                    for a in range(d + 1):
                                        Dr[i, l + 1, d, a] += m * Dr[j, l, d, a]
                        if lvl_j:
                            for l in range(1, K - 1):
                                for d in range(l + 1):
                                    for a in range(d + 1):
                                        Dr[i, l + 1, d, a] += Dd[j, l, d, a]
                    R[i] = r
                if lvl_i:
                    e = 1 if lvl_i == 1 else 0
                    if c_target[i]:
                        Dd[i, 1, 1, e] = 1
                    for j in range(n):
                        if not c_adj[i, j] or not c_target[j] or not c_dvs[b, j]:
                            continue
                        for l in range(1, K - 1):
                            for d in range(l + 1):
                                for a in range(d + 1):
                                    Dd[i, l + 1, d + 1, a + e] += Dd[j, l, d, a]

            tot = 0
            for i in range(n):
                if not c_entry[i]:
                    continue
                if real_on[i]:
                    m = c_counts[i]
                    tot += m * R[i]
                    for l in range(1, K):
                        for d in range(l + 1):
                            for a in range(d + 1):
                                decoy_out[b, l, d, a] += m * Dr[i, l, d, a]
                if c_dvs[b, i]:
                    for l in range(1, K):
                        for d in range(l + 1):
                            for a in range(d + 1):
                                decoy_out[b, l, d, a] += Dd[i, l, d, a]
            real_out[b] = tot

    return real_arr, decoy_arr


def nondominated_ranks(F):
    """Front index of every row of ``F`` under maximization (0 = nondominated)."""
    cdef double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = f.shape[1]
    ranks_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] ranks = ranks_arr
    cdef i64[::1] n_dom = np.zeros(n, dtype=np.int64)
    cdef unsigned char[:, ::1] dom = np.zeros((n, n), dtype=np.uint8)
    cdef i64[::1] cur = np.zeros(n, dtype=np.int64)
    cdef i64[::1] nxt = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t i, j, k, n_cur, n_nxt, p
    cdef bint ge_ij, gt_ij, ge_ji, gt_ji
    cdef i64 rank = 0

    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                ge_ij = True
                gt_ij = False
                ge_ji = True
                gt_ji = False
                for k in range(m):
                    if f[i, k] < f[j, k]:
                        ge_ij = False
                        gt_ji = True
                    elif f[i, k] > f[j, k]:
                        ge_ji = False
                        gt_ij = True
                if ge_ij and gt_ij:
                    dom[i, j] = 1
                    n_dom[j] += 1
                elif ge_ji and gt_ji:
                    dom[j, i] = 1
                    n_dom[i] += 1
        n_cur = 0
        for i in range(n):
            if n_dom[i] == 0:
                cur[n_cur] = i
                n_cur += 1
        while n_cur > 0:
            n_nxt = 0
            for p in range(n_cur):
                i = cur[p]
                ranks[i] = rank
                for j in range(n):
                    if dom[i, j]:
                        n_dom[j] -= 1
                        if n_dom[j] == 0:
                            nxt[n_nxt] = j
                            n_nxt += 1
            for p in range(n_nxt):
                cur[p] = nxt[p]
            n_cur = n_nxt
            rank += 1
    return ranks_arr
