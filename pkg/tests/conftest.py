"""Independent oracles shared by the test modules.

Nothing here calls into the law-of-cosines code or the longest-chain kernels:
angles come from explicit embeddings (Minkowski plane, anti-de Sitter and de
Sitter hyperboloids in R^3), chain lengths from exhaustive enumeration, null
distances from simple-path enumeration and correspondences from brute force.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest


# ---------------------------------------------------------------------------
# model-space embeddings


def minkowski_tau(a, b) -> float:
    dt, dx = b[0] - a[0], b[1] - a[1]
    s = dt * dt - dx * dx
    return math.sqrt(s) if dt > 0 and s > 0 else 0.0


def rapidity_angle(v, a, b) -> float:
    """Unsigned hyperbolic angle at ``v`` between the straight segments to ``a`` and ``b`` (flat plane)."""
    def rap(w):
        dt, dx = w[0] - v[0], w[1] - v[1]
        if dt < 0:
            dt, dx = -dt, -dx
        return math.atanh(dx / dt)

    return abs(rap(a) - rap(b))


class Hyperboloid:
    """Model space of curvature ``K = -1`` (anti-de Sitter) or ``K = +1`` (de Sitter) embedded in R^3.

    AdS: signature (-, -, +), <X, X> = -1, cos tau = -<X, Y>.
    dS:  signature (-, +, +), <X, X> = +1, cosh tau = <X, Y>.
    Points on a geodesic from the base point ``V`` with unit timelike initial
    velocity of rapidity ``theta`` are given in closed form, so a hinge with
    sides ``a``, ``b`` and rapidity gap ``omega`` is placed without any
    trigonometric identity of the model.
    """

    def __init__(self, K: int):
        assert K in (-1, 1)
        self.K = K
        self.eta = np.diag([-1.0, -1.0, 1.0]) if K < 0 else np.diag([-1.0, 1.0, 1.0])
        self.V = np.array([1.0, 0.0, 0.0]) if K < 0 else np.array([0.0, 0.0, 1.0])

    def dot(self, X, Y) -> float:
        return float(X @ self.eta @ Y)

    def velocity(self, theta: float) -> np.ndarray:
        if self.K < 0:
            return np.array([0.0, math.cosh(theta), math.sinh(theta)])
        return np.array([math.cosh(theta), math.sinh(theta), 0.0])

    def geodesic(self, theta: float, s: float) -> np.ndarray:
        """Point at signed proper time ``s`` along the geodesic from V with rapidity ``theta``."""
        U = self.velocity(theta)
        if self.K < 0:
            return math.cos(s) * self.V + math.sin(s) * U
        return math.cosh(s) * self.V + math.sinh(s) * U

    def tau(self, X, Y) -> float:
        """Separation of two timelike related points (orientation not checked)."""
        if self.K < 0:
            return math.acos(max(-1.0, min(1.0, -self.dot(X, Y))))
        return math.acosh(max(1.0, self.dot(X, Y)))


def hinge_oracle(K: int, a: float, b: float, omega: float, sigma: int) -> float | None:
    """Length of the side closing a hinge, from an explicit embedding; ``None`` if not timelike.

    sigma = +1: the vertex lies between the ends (one side runs to the past).
    sigma = -1: both sides run to the future.
    """
    sa = -a if sigma == 1 else a
    if K == 0:
        P = (sa * math.cosh(0.0), sa * math.sinh(0.0))
        Q = (b * math.cosh(omega), b * math.sinh(omega))
        lo, hi = (P, Q) if P[0] <= Q[0] else (Q, P)
        dt, dx = hi[0] - lo[0], hi[1] - lo[1]
        s = dt * dt - dx * dx
        return math.sqrt(s) if s > 0 else None
    H = Hyperboloid(K)
    X, Y = H.geodesic(0.0, sa), H.geodesic(omega, b)
    g = -H.dot(X, Y) if K < 0 else H.dot(X, Y)
    if K < 0:
        return math.acos(g) if -1.0 < g <= 1.0 else None
    return math.acosh(g) if g >= 1.0 else None


# ---------------------------------------------------------------------------
# discrete oracles


def brute_tau(n: int, weight: dict) -> np.ndarray:
    """Longest chain by enumerating every simple directed path (tiny DAGs only)."""
    succ = {i: [j for (a, j) in weight if a == i] for i in range(n)}
    best = np.zeros((n, n))

    def walk(start, cur, length):
        for j in succ[cur]:
            L = length + weight[(cur, j)]
            best[start, j] = max(best[start, j], L)
            walk(start, j, L)

    for s in range(n):
        walk(s, s, 0.0)
    return best


def brute_optimal_chains(n: int, weight: dict, p: int, q: int, tol: float = 1e-12) -> list[tuple]:
    succ = {i: [j for (a, j) in weight if a == i] for i in range(n)}
    chains = []

    def walk(path, length):
        cur = path[-1]
        if cur == q:
            chains.append((tuple(path), length))
            return
        for j in succ[cur]:
            walk(path + [j], length + weight[(cur, j)])

    walk([p], 0.0)
    if not chains:
        return []
    top = max(L for _, L in chains)
    return sorted(c for c, L in chains if L >= top - tol)


def random_dag(rng: np.random.Generator, n: int, density: float = 0.5, zero_prob: float = 0.0):
    """Random DAG on 0..n-1 (edges i < j) with weights; returns an edge list."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                w = 0.0 if rng.random() < zero_prob else float(rng.integers(1, 5)) / 2
                edges.append((i, j, w))
    return edges


def brute_null_distance(space, T) -> np.ndarray:
    """Minimum over simple paths of summed |T| increments along causal pairs."""
    n = space.n
    adj = {i: [j for j in range(n) if j != i and (space.causal[i, j] or space.causal[j, i])] for i in range(n)}
    D = np.full((n, n), math.inf)

    def walk(start, cur, seen, length):
        D[start, cur] = min(D[start, cur], length)
        for j in adj[cur]:
            if j not in seen:
                walk(start, j, seen | {j}, length + abs(T[j] - T[cur]))

    for s in range(n):
        walk(s, s, {s}, 0.0)
    return D


def brute_gh(TX: np.ndarray, TY: np.ndarray) -> float:
    """Half the least distortion over every correspondence (all relations total on both sides)."""
    nx_, ny_ = len(TX), len(TY)
    cells = [(x, y) for x in range(nx_) for y in range(ny_)]
    best = math.inf
    for mask in range(1, 1 << len(cells)):
        R = [cells[k] for k in range(len(cells)) if mask >> k & 1]
        if {x for x, _ in R} != set(range(nx_)) or {y for _, y in R} != set(range(ny_)):
            continue
        d = max(abs(TX[x1, x2] - TY[y1, y2]) for (x1, y1), (x2, y2) in itertools.product(R, R))
        best = min(best, d)
    return 0.5 * best


def random_tau_space(rng: np.random.Generator, k: int) -> np.ndarray:
    """Random finite tau matrix: a random order with positive weights, closed under longest chains."""
    edges = {(i, j): float(rng.uniform(0.1, 1.0)) for i in range(k) for j in range(i + 1, k) if rng.random() < 0.6}
    return brute_tau(k, edges)


# ---------------------------------------------------------------------------
# fixtures


@pytest.fixture(scope="session")
def flat():
    from lorlab import AnalyticSpace

    return AnalyticSpace.flat(lo=(0.0, 0.0), hi=(4.0, 0.0))


@pytest.fixture(scope="session")
def flat_sprinkle():
    from lorlab import Region, sprinkle

    return sprinkle(Region.flat_diamond(hi=(4.0, 0.0)), 400, seed=11, include_tips=True)


def random_flat_triangle(space, rng, min_side: float = 0.0):
    """Three chronologically ordered points of the analytic flat diamond."""
    while True:
        pts = sorted(space.sample_points(3, rng))
        p, q, r = pts
        if space.timelike(p, q) and space.timelike(q, r) and \
                min(space.tau(p, q), space.tau(q, r)) > min_side:
            return p, q, r


# ---------------------------------------------------------------------------
# acceptance summary

#: (line, sub-lines) recorded by the acceptance suite, printed after the run
ACCEPTANCE: list[tuple[str, list[str]]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line, subs in sorted(ACCEPTANCE, key=lambda e: int(e[0].split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
        for s in subs:
            terminalreporter.write_line(f"      {s}")
