"""Compiled inner loops for longest-chain and realiser computations.

All kernels work on matrices permuted into topological order, so every edge
``(i, j)`` has ``i < j``.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def longest_chain_rows(edge, weight):
    """Row ``j`` of the result holds ``tau(i, j)`` for all ``i``; ``-inf`` where ``j`` is unreachable.

    ``edge[k, j]`` marks an edge ``k -> j`` with weight ``weight[k, j]``.
    Work is proportional to the number of (i, k, j) triples with ``k -> j``.
    """
    n = edge.shape[0]
    best = np.full((n, n), -np.inf)
    for j in range(n):
        row = best[j]
        row[j] = 0.0
        for k in range(j):
            if edge[k, j]:
                w = weight[k, j]
                src = best[k]
                for i in range(k + 1):
                    v = src[i] + w
                    if v > row[i]:
                        row[i] = v
    return best


@numba.njit(cache=True)
def greedy_realiser(edge, weight, tau, reach, p, q, rtol):
    """Lexicographically smallest optimal chain from ``p`` to ``q`` (topological indices).

    Returns an array of vertex positions, or an empty array if ``q`` is not
    reachable from ``p``.
    """
    out = np.empty(tau.shape[0], dtype=np.int64)
    if not reach[p, q]:
        return out[:0]
    out[0] = p
    m = 1
    cur = p
    while cur != q:
        target = tau[cur, q]
        tol = rtol * max(1.0, target)
        nxt = -1
        for k in range(cur + 1, q + 1):
            if edge[cur, k] and (k == q or reach[k, q]):
                if weight[cur, k] + tau[k, q] >= target - tol:
                    nxt = k
                    break
        if nxt < 0:
            # numerical dead end: fall back to the best continuation
            best = -np.inf
            for k in range(cur + 1, q + 1):
                if edge[cur, k] and (k == q or reach[k, q]):
                    v = weight[cur, k] + tau[k, q]
                    if v > best:
                        best = v
                        nxt = k
        if nxt < 0:
            return out[:0]
        out[m] = nxt
        m += 1
        cur = nxt
    return out[:m]


@numba.njit(cache=True)
def selected_realiser_null_pairs(edge, weight, tau, reach, rtol):
    """Mask of pairs ``p << q`` whose selected (greedy) realiser uses a zero-weight edge."""
    n = tau.shape[0]
    bad = np.zeros((n, n), dtype=np.bool_)
    for p in range(n):
        for q in range(p + 1, n):
            if tau[p, q] <= 0.0:
                continue
            chain = greedy_realiser(edge, weight, tau, reach, p, q, rtol)
            for a in range(chain.shape[0] - 1):
                if weight[chain[a], chain[a + 1]] <= 0.0:
                    bad[p, q] = True
                    break
    return bad


@numba.njit(cache=True)
def bounded_hop_chain(edge, weight, members, hop):
    """Longest chain through ``members`` (sorted topological positions) using edges of weight <= hop.

    Returns the predecessor array over ``members`` and the best value at
    each member; chains start at ``members[0]``.
    """
    m = members.shape[0]
    best = np.full(m, -np.inf)
    pred = np.full(m, -1, dtype=np.int64)
    best[0] = 0.0
    for b in range(1, m):
        j = members[b]
        for a in range(b):
            if best[a] == -np.inf:
                continue
            i = members[a]
            if edge[i, j] and weight[i, j] <= hop:
                v = best[a] + weight[i, j]
                if v > best[b]:
                    best[b] = v
                    pred[b] = a
    return pred, best
