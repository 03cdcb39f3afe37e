"""Lorentzian pre-length spaces: analytic chart regions and finite sprinkled spaces.

Two backends share one query protocol (``tau``, ``leq``, ``time``,
``null_distance``, ``point_along``, ``point_at_null_distance``,
``first_in_future_along``) so that the comparison and globalisation code runs
unchanged on either:

* :class:`AnalyticSpace` exposes a chart region of a constant-curvature
  spacetime functionally; points are ``(t, x)`` tuples and everything is exact.
* :class:`DiscreteSpace` is a finite point set with a causal relation, edge
  weights equal to the exact ambient time separation, and ``tau`` filled by a
  longest-chain dynamic programme.  Points are integer indices.

The RNG stream layout of :func:`sprinkle` is a single ``Generator.random((m, 2))``
call on ``numpy.random.default_rng(seed)``, where ``m`` is the number of
random points.  Row ``i`` is mapped to point ``i`` before sorting by time, so a
larger ``n`` with the same seed yields a superset of the smaller sprinkle.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .ambient import Ambient, FlatAmbient, ambient_for
from .errors import ConsistencyError, NoPath, ParseError

FORMAT_VERSION = 1
#: Relative tolerance when recognising optimal chains.
CHAIN_RTOL = 1e-12
REGION_KINDS = ("flat-diamond", "flat-slab", "model-patch")


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Region:
    """A chart region to sprinkle into.

    ``flat-diamond``: the causal diamond between ``lo`` and ``hi``.
    ``flat-slab``: the box ``lo[0] <= t <= hi[0]``, ``lo[1] <= x <= hi[1]``.
    ``model-patch``: the chart diamond of height ``hi[0] - lo[0]`` centred on
    ``x = 0`` (K < 0) or ``t = 0`` (K > 0) in the curvature-``K`` spacetime.
    """

    kind: str
    lo: tuple[float, float] = (0.0, 0.0)
    hi: tuple[float, float] = (1.0, 0.0)
    K: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "K", float(self.K))
        self.validate()

    @classmethod
    def flat_diamond(cls, lo=(0.0, 0.0), hi=(1.0, 0.0)) -> "Region":
        return cls("flat-diamond", lo, hi, 0.0)

    @classmethod
    def flat_slab(cls, t0=0.0, t1=1.0, x0=0.0, x1=1.0) -> "Region":
        return cls("flat-slab", (t0, x0), (t1, x1), 0.0)

    @classmethod
    def model_patch(cls, K: float, height: float) -> "Region":
        """Chart diamond of chart height ``height`` (must be below pi) in the spacetime of curvature ``K``."""
        if K == 0:
            return cls.flat_diamond((0.0, 0.0), (height, 0.0))
        return cls("model-patch", (-height / 2, 0.0), (height / 2, 0.0), K)

    def validate(self) -> None:
        if self.kind not in REGION_KINDS:
            raise ValueError(f"region kind must be one of {REGION_KINDS}, got {self.kind!r}")
        dt = self.hi[0] - self.lo[0]
        dx = self.hi[1] - self.lo[1]
        if self.kind == "flat-diamond":
            if self.K != 0:
                raise ValueError("flat regions have K = 0")
            if not dt > abs(dx):
                raise ValueError("diamond tips must be timelike related (hi in the future of lo)")
        elif self.kind == "flat-slab":
            if self.K != 0:
                raise ValueError("flat regions have K = 0")
            if not (dt > 0 and dx > 0):
                raise ValueError("slab extents must be positive")
        else:
            if self.K == 0:
                raise ValueError("model patches need K != 0; use flat-diamond for K = 0")
            if dx != 0 or self.lo[0] != -self.hi[0]:
                raise ValueError("model patches are centred chart diamonds")
            if not 0 < dt < math.pi:
                raise ValueError(f"model patch chart height must lie in (0, pi), got {dt}")

    @property
    def ambient(self) -> Ambient:
        return FlatAmbient() if self.K == 0 else ambient_for(self.K)

    def map_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniform variates of shape (m, 2) to volume-uniform chart points."""
        if self.kind == "flat-slab":
            lo = np.array(self.lo)
            hi = np.array(self.hi)
            return lo + u * (hi - lo)
        return self.ambient.sample_diamond(u, self.lo, self.hi)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "flat-slab":
            return np.all((pts >= np.array(self.lo)) & (pts <= np.array(self.hi)), axis=1)
        A = self.ambient
        return A.causal(np.array(self.lo), pts) & A.causal(pts, np.array(self.hi))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi), "K": self.K}

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        try:
            return cls(d["kind"], tuple(d["lo"]), tuple(d["hi"]), d.get("K", 0.0))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed region: {exc}") from exc


# ---------------------------------------------------------------------------
# realiser chains


@dataclass(frozen=True)
class RealiserChain:
    """Vertex sequence ``x_0 <= x_1 <= ... <= x_k`` with its summed edge weight."""

    vertices: tuple[int, ...]
    length: float
    edge_weights: tuple[float, ...] = field(default=())

    @property
    def timelike(self) -> bool:
        return all(w > 0 for w in self.edge_weights)

    def __len__(self):
        return len(self.vertices)


# ---------------------------------------------------------------------------
# analytic backend


class AnalyticSpace:
    """Chart region of a constant-curvature spacetime with exact queries.

    Points are ``(t, x)`` tuples.  The time function is the chart time.
    """

    exact = True

    def __init__(self, region: Region):
        self.region = region
        self.ambient = region.ambient
        self.K = region.K

    @classmethod
    def flat(cls, lo=(0.0, 0.0), hi=(4.0, 0.0)) -> "AnalyticSpace":
        return cls(Region.flat_diamond(lo, hi))

    def sample_points(self, n: int, rng: np.random.Generator) -> list[tuple[float, float]]:
        pts = self.region.map_uniform(rng.random((n, 2)))
        return [tuple(map(float, p)) for p in pts]

    def tau(self, x, y) -> float:
        return float(self.ambient.tau(np.asarray(x), np.asarray(y)))

    def leq(self, x, y) -> bool:
        return bool(self.ambient.causal(np.asarray(x), np.asarray(y)))

    def timelike(self, x, y) -> bool:
        return bool(self.ambient.timelike(np.asarray(x), np.asarray(y)))

    def time(self, x) -> float:
        return float(x[0])

    def null_distance(self, x, y) -> float:
        return float(self.ambient.null_distance(np.asarray(x), np.asarray(y)))

    def same(self, x, y) -> bool:
        return tuple(x) == tuple(y)

    def point_along(self, x, y, f: float):
        """Point at tau-fraction ``f`` of the realiser from ``x`` to ``y``."""
        if f <= 0.0:
            return tuple(x)
        if f >= 1.0:
            return tuple(y)
        p = self.ambient.point_along(np.asarray(x, float), np.asarray(y, float), f)
        return (float(p[0]), float(p[1]))

    def fraction_of(self, x, y, z) -> float:
        total = self.tau(x, y)
        return 0.0 if total <= 0 else min(1.0, max(0.0, self.tau(x, z) / total))

    def point_at_null_distance(self, x, y, target: float, from_end: str = "start"):
        """Point ``z`` on the realiser ``[x, y]`` with ``d_T(x, z) = target`` (or ``d_T(z, y)``)."""
        t0, t1 = self.time(x), self.time(y)
        if from_end == "end":
            goal = t1 - target
        else:
            goal = t0 + target
        if goal <= t0:
            return tuple(x)
        if goal >= t1:
            return tuple(y)
        f = brentq(lambda s: self.time(self.point_along(x, y, s)) - goal, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
        return self.point_along(x, y, f)

    def first_in_future_along(self, x, y, q, beyond: float = 0.0):
        """First point of the realiser ``[x, y]`` in ``J+(q)``, pushed ``beyond`` further in tau-fraction."""
        if self.leq(q, x):
            return tuple(x)
        if not self.leq(q, y):
            return None
        f = brentq(
            lambda s: self._boundary_gap(q, self.point_along(x, y, s)), 0.0, 1.0, xtol=1e-15, rtol=1e-15
        )
        return self.point_along(x, y, min(1.0, f + beyond))

    def last_in_past_along(self, x, y, q, beyond: float = 0.0):
        """Last point of the realiser ``[x, y]`` in ``J-(q)``, pulled ``beyond`` back in tau-fraction."""
        if self.leq(y, q):
            return tuple(y)
        if not self.leq(x, q):
            return None
        f = brentq(
            lambda s: self._boundary_gap(self.point_along(x, y, s), q), 0.0, 1.0, xtol=1e-15, rtol=1e-15
        )
        return self.point_along(x, y, max(0.0, f - beyond))

    def _boundary_gap(self, q, z) -> float:
        dt = z[0] - q[0]
        dx = abs(z[1] - q[1])
        return dt - dx

    def angle(self, v, a, b) -> float:
        return float(self.ambient.angle(np.asarray(v, float), np.asarray(a, float), np.asarray(b, float)))


# ---------------------------------------------------------------------------
# discrete backend


def _topological_order(edge: np.ndarray) -> np.ndarray:
    """Kahn's algorithm, smallest index first; raises on cycles."""
    n = edge.shape[0]
    indeg = edge.sum(axis=0).astype(np.int64)
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in np.flatnonzero(edge[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, int(j))
    if len(order) != n:
        stuck = sorted(set(range(n)) - set(order))
        raise ConsistencyError(f"causal relation has a cycle through points {stuck[:10]}")
    return np.asarray(order, dtype=np.int64)


def _is_identity(order) -> bool:
    return bool(np.all(order == np.arange(order.shape[0])))


class DiscreteSpace:
    """Finite Lorentzian pre-length space with exact edge weights and longest-chain ``tau``.

    Parameters
    ----------
    edge : (n, n) bool array
        ``edge[i, j]`` marks a causal edge ``i <= j`` (``i != j``).
    weight : (n, n) float array
        Edge weights ``w(i, j) >= 0``; ignored where there is no edge.
    coords : optional (n, 2) array of chart coordinates ``(t, x)``.
    """

    exact = False

    def __init__(self, edge, weight, coords=None, region: Region | None = None, seed=None,
                 time_function=None, K: float | None = None):
        edge = np.asarray(edge, dtype=bool).copy()
        weight = np.asarray(weight, dtype=float)
        n = edge.shape[0]
        if edge.shape != (n, n) or weight.shape != (n, n):
            raise ConsistencyError("edge and weight matrices must be square and of equal size")
        if np.any(np.diag(edge)):
            raise ConsistencyError("self-loops are not allowed in the causal relation")
        if np.any(weight[edge] < 0) or not np.all(np.isfinite(weight[edge])):
            raise ConsistencyError("edge weights must be finite and non-negative")
        self.n = n
        self.edge = edge
        self.weight = np.where(edge, weight, 0.0)
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self.region = region
        self.seed = seed
        self.K = region.K if region is not None else (0.0 if K is None else float(K))
        self._time = None if time_function is None else np.asarray(time_function, dtype=float)
        self._nulldist = None
        self._chains: dict = {}
        self._compute_tau()

    # construction ---------------------------------------------------------
    def _compute_tau(self):
        order = _topological_order(self.edge)
        ident = _is_identity(order)
        if ident:
            e, w = self.edge, self.weight
        else:
            e = self.edge[np.ix_(order, order)]
            w = self.weight[np.ix_(order, order)]
        best = _kernels.longest_chain_rows(e, w).T
        reach = np.isfinite(best)
        tau = np.where(reach, best, 0.0)
        np.fill_diagonal(reach, False)
        if not ident:
            rank = np.empty_like(order)
            rank[order] = np.arange(self.n)
            tau = tau[np.ix_(rank, rank)]
            reach = reach[np.ix_(rank, rank)]
        self.order = order
        self.rank = np.empty_like(order)
        self.rank[order] = np.arange(self.n)
        self.tau_matrix = np.ascontiguousarray(tau)
        self.causal = np.ascontiguousarray(reach)
        self._topo = None if ident else (e, w)

    @classmethod
    def from_edges(cls, n: int, edges, coords=None, K: float | None = None, time_function=None) -> "DiscreteSpace":
        """Build from an edge list ``[(i, j, w), ...]``; the relation is the transitive closure."""
        edge = np.zeros((n, n), dtype=bool)
        weight = np.zeros((n, n))
        for i, j, w in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ConsistencyError(f"edge ({i}, {j}) refers to a point outside 0..{n - 1}")
            edge[i, j] = True
            weight[i, j] = float(w)
        return cls(edge, weight, coords=coords, K=K, time_function=time_function)

    @classmethod
    def from_coords(cls, coords, ambient: Ambient | None = None, region: Region | None = None,
                    seed=None) -> "DiscreteSpace":
        """All ambient-causal pairs become edges weighted by the exact ambient ``tau``."""
        coords = np.asarray(coords, dtype=float)
        A = ambient if ambient is not None else (region.ambient if region is not None else FlatAmbient())
        a, b = coords[:, None, :], coords[None, :, :]
        edge = A.causal(a, b)
        np.fill_diagonal(edge, False)
        weight = np.where(edge, A.tau(a, b), 0.0)
        return cls(edge, weight, coords=coords, region=region, seed=seed, K=A.K)

    # basic queries --------------------------------------------------------
    @property
    def points(self) -> range:
        return range(self.n)

    def tau(self, p, q) -> float:
        return float(self.tau_matrix[p, q])

    def leq(self, p, q) -> bool:
        return p == q or bool(self.causal[p, q])

    def timelike(self, p, q) -> bool:
        return self.tau_matrix[p, q] > 0

    def same(self, p, q) -> bool:
        return p == q

    def time_values(self) -> np.ndarray:
        if self._time is not None:
            return self._time
        if self.coords is None:
            raise ValueError("space has neither coordinates nor an explicit time function")
        return self.coords[:, 0]

    def set_time_function(self, values) -> None:
        self._time = np.asarray(values, dtype=float)
        self._nulldist = None

    def time(self, p) -> float:
        return float(self.time_values()[p])

    @property
    def nulldist(self):
        if self._nulldist is None:
            from .null_distance import NullDistance

            self._nulldist = NullDistance(self, self.time_values())
        return self._nulldist

    def null_distance(self, p, q) -> float:
        return self.nulldist.distance(p, q)

    def causal_sets(self, p):
        """Index arrays ``(J+(p), J-(p), I+(p), I-(p))``; the causal sets contain ``p``."""
        jp = self.causal[p].copy()
        jm = self.causal[:, p].copy()
        jp[p] = True
        jm[p] = True
        ip = self.tau_matrix[p] > 0
        im = self.tau_matrix[:, p] > 0
        return tuple(np.flatnonzero(s) for s in (jp, jm, ip, im))

    def diamond(self, p, q) -> np.ndarray:
        """Indices of ``J(p, q)``; empty unless ``p <= q``."""
        if not self.leq(p, q):
            return np.empty(0, dtype=np.int64)
        jp = self.causal[p].copy()
        jm = self.causal[:, q].copy()
        jp[p] = True
        jm[q] = True
        return np.flatnonzero(jp & jm)

    def timelike_diamond(self, p, q) -> np.ndarray:
        return np.flatnonzero((self.tau_matrix[p] > 0) & (self.tau_matrix[:, q] > 0))

    # realisers ------------------------------------------------------------
    def _topo_arrays(self):
        if self._topo is None:
            return self.edge, self.weight, self.tau_matrix, self.causal, None
        e, w = self._topo
        order = self.order
        return e, w, self.tau_matrix[np.ix_(order, order)], self.causal[np.ix_(order, order)], order

    def realiser(self, p, q) -> RealiserChain:
        """Chain attaining ``tau(p, q)``, lexicographically smallest among optimal chains.

        Raises
        ------
        NoPath
            If ``p <= q`` fails.
        """
        if p == q:
            return RealiserChain((p,), 0.0, ())
        if not self.causal[p, q]:
            raise NoPath(f"point {q} is not in the causal future of {p}")
        if self._topo is None:
            chain = _kernels.greedy_realiser(self.edge, self.weight, self.tau_matrix, self.causal,
                                             p, q, CHAIN_RTOL)
            verts = tuple(int(v) for v in chain)
        else:
            verts = self._realiser_python(p, q)
        return self._chain(verts)

    def _realiser_python(self, p, q):
        # general path for spaces whose indices are not in topological order
        verts = [p]
        cur = p
        while cur != q:
            target = self.tau_matrix[cur, q]
            tol = CHAIN_RTOL * max(1.0, target)
            cand = np.flatnonzero(self.edge[cur] & (self.causal[:, q] | (np.arange(self.n) == q)))
            vals = self.weight[cur, cand] + np.where(cand == q, 0.0, self.tau_matrix[cand, q])
            ok = cand[vals >= target - tol]
            nxt = int(ok[0]) if ok.size else int(cand[np.argmax(vals)])
            verts.append(nxt)
            cur = nxt
        return tuple(verts)

    def _chain(self, verts) -> RealiserChain:
        ws = tuple(float(self.weight[a, b]) for a, b in zip(verts, verts[1:]))
        return RealiserChain(tuple(int(v) for v in verts), float(sum(ws)), ws)

    def all_realisers(self, p, q, limit: int = 10_000) -> list[RealiserChain]:
        """Every optimal chain from ``p`` to ``q`` (exhaustive; meant for small spaces)."""
        if p == q:
            return [RealiserChain((p,), 0.0, ())]
        if not self.causal[p, q]:
            raise NoPath(f"point {q} is not in the causal future of {p}")
        out = []

        def extend(prefix, cur):
            if len(out) >= limit:
                return
            if cur == q:
                out.append(self._chain(prefix))
                return
            target = self.tau_matrix[cur, q]
            tol = CHAIN_RTOL * max(1.0, target)
            for k in np.flatnonzero(self.edge[cur]):
                k = int(k)
                if k != q and not self.causal[k, q]:
                    continue
                rest = 0.0 if k == q else self.tau_matrix[k, q]
                if self.weight[cur, k] + rest >= target - tol:
                    extend(prefix + [k], k)

        extend([p], p)
        return out

    def geodesic_chain(self, p, q, hop: float | None = None) -> RealiserChain:
        """Longest chain from ``p`` to ``q`` whose edges each have weight at most ``hop``.

        Exact ambient weights make the single edge ``(p, q)`` an optimal
        realiser, which carries no interior points.  Limiting the hop length
        yields a near-optimal chain that tracks the ambient geodesic and so
        supplies interior points for splitting sides and probing angles.
        The default hop is ``3 tau(p, q) / sqrt(|J(p, q)|)``; it is doubled until
        a chain exists.
        """
        key = (p, q, hop)
        if key in self._chains:
            return self._chains[key]
        if p == q:
            chain = RealiserChain((p,), 0.0, ())
        elif not self.causal[p, q]:
            raise NoPath(f"point {q} is not in the causal future of {p}")
        else:
            members = self.diamond(p, q)
            members = members[np.argsort(self.rank[members], kind="stable")]
            members = np.concatenate([[p], members[(members != p) & (members != q)], [q]]).astype(np.int64)
            total = self.tau_matrix[p, q]
            h = hop if hop is not None else 3.0 * total / math.sqrt(max(len(members), 1))
            h = max(h, 1e-300)
            while True:
                pred, best = _kernels.bounded_hop_chain(self.edge, self.weight, members, h)
                if np.isfinite(best[-1]):
                    break
                h *= 2.0
            verts = []
            b = len(members) - 1
            while b >= 0:
                verts.append(int(members[b]))
                b = pred[b]
            chain = self._chain(tuple(reversed(verts)))
        self._chains[key] = chain
        return chain

    def check_regularity(self, exhaustive: bool = False) -> list[tuple]:
        """Pairs ``p << q`` whose realiser contains a zero-weight (null) edge.

        By default only the selected (lexicographic) realiser of each pair is
        inspected.  ``exhaustive=True`` enumerates every optimal chain, which
        matches the full definition but is only feasible for small spaces.
        Each entry is ``(p, q, chain)``.
        """
        out = []
        if exhaustive:
            for p, q in zip(*np.nonzero(self.tau_matrix > 0)):
                for chain in self.all_realisers(int(p), int(q)):
                    if not chain.timelike:
                        out.append((int(p), int(q), chain))
                        break
            return out
        if self._topo is None:
            bad = _kernels.selected_realiser_null_pairs(self.edge, self.weight, self.tau_matrix,
                                                        self.causal, CHAIN_RTOL)
            pairs = list(zip(*np.nonzero(bad)))
        else:
            pairs = [(int(p), int(q)) for p, q in zip(*np.nonzero(self.tau_matrix > 0))
                     if not self.realiser(int(p), int(q)).timelike]
        for p, q in pairs:
            out.append((int(p), int(q), self.realiser(int(p), int(q))))
        return out

    # points on sides --------------------------------------------------------
    def side_points(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Vertices of the geodesic chain ``[x, y]`` and their tau-fractions from ``x``."""
        chain = self.geodesic_chain(x, y)
        verts = np.array(chain.vertices, dtype=np.int64)
        total = self.tau_matrix[x, y]
        if total <= 0:
            return verts, np.linspace(0.0, 1.0, len(verts))
        frac = self.tau_matrix[x, verts] / total
        frac[0] = 0.0
        frac[-1] = 1.0
        return verts, np.clip(frac, 0.0, 1.0)

    def point_along(self, x, y, f: float):
        """Chain vertex of ``[x, y]`` whose tau-fraction is closest to ``f``; ties break toward ``x``."""
        verts, frac = self.side_points(x, y)
        return int(verts[int(np.argmin(np.abs(frac - f)))])

    def fraction_of(self, x, y, z) -> float:
        total = self.tau_matrix[x, y]
        return 0.0 if total <= 0 else float(min(1.0, max(0.0, self.tau_matrix[x, z] / total)))

    def point_at_null_distance(self, x, y, target: float, from_end: str = "start"):
        """Chain vertex of ``[x, y]`` whose null distance from one end is closest to ``target``.

        Ties break toward the past endpoint ``x``.
        """
        chain = self.geodesic_chain(x, y)
        T = self.time_values()
        verts = np.array(chain.vertices)
        if from_end == "end":
            d = T[y] - T[verts]
        else:
            d = T[verts] - T[x]
        return int(verts[int(np.argmin(np.abs(d - target)))])

    def first_in_future_along(self, x, y, q, beyond: float = 0.0):
        """First vertex of the chain ``[x, y]`` lying strictly in ``I+(q)``; ``None`` if there is none."""
        for v in self.geodesic_chain(x, y).vertices:
            if self.tau_matrix[q, v] > 0:
                return int(v)
        return None

    def last_in_past_along(self, x, y, q, beyond: float = 0.0):
        """Last vertex of the chain ``[x, y]`` lying strictly in ``I-(q)``; ``None`` if there is none."""
        for v in reversed(self.geodesic_chain(x, y).vertices):
            if self.tau_matrix[v, q] > 0:
                return int(v)
        return None

    # persistence ------------------------------------------------------------
    def to_json_dict(self, include_tau: bool = True) -> dict:
        doc = {
            "version": FORMAT_VERSION,
            "region": None if self.region is None else self.region.to_dict(),
            "seed": self.seed,
            "K": self.K,
            "points": [
                {"id": i, "coords": None if self.coords is None else [float(c) for c in self.coords[i]]}
                for i in range(self.n)
            ],
            "edges": [[int(i), int(j), float(self.weight[i, j])] for i, j in zip(*np.nonzero(self.edge))],
        }
        if self._time is not None:
            doc["time_function"] = [float(v) for v in self._time]
        if include_tau:
            doc["tau"] = [[int(i), int(j), float(self.tau_matrix[i, j])]
                          for i, j in zip(*np.nonzero(self.tau_matrix > 0))]
        return doc

    def same_as(self, other: "DiscreteSpace") -> bool:
        if self.n != other.n or not np.array_equal(self.edge, other.edge):
            return False
        if not np.array_equal(self.weight, other.weight):
            return False
        if (self.coords is None) != (other.coords is None):
            return False
        if self.coords is not None and not np.array_equal(self.coords, other.coords):
            return False
        return np.array_equal(self.tau_matrix, other.tau_matrix)


def save_space(space: DiscreteSpace, path, include_tau: bool = True) -> None:
    """Write ``space`` as a single JSON document (floats in shortest round-trip form)."""
    text = json.dumps(space.to_json_dict(include_tau), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n")


def space_from_json_dict(doc: dict, tol: float = 1e-9) -> DiscreteSpace:
    try:
        if doc.get("version") != FORMAT_VERSION:
            raise ParseError(f"unsupported space format version {doc.get('version')!r}")
        pts = doc["points"]
        n = len(pts)
        ids = [int(p["id"]) for p in pts]
        if ids != list(range(n)):
            raise ParseError("point ids must be 0..n-1 in order")
        coords = None
        if n and pts[0].get("coords") is not None:
            coords = np.array([p["coords"] for p in pts], dtype=float)
            if coords.shape != (n, 2):
                raise ParseError("coords must be (t, x) pairs")
        region = Region.from_dict(doc["region"]) if doc.get("region") else None
        edges = doc["edges"]
        stored_tau = doc.get("tau")
        tf = doc.get("time_function")
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed space document: {exc}") from exc

    edge = np.zeros((n, n), dtype=bool)
    weight = np.zeros((n, n))
    for item in edges:
        if len(item) != 3:
            raise ParseError(f"edge entries must be [i, j, w], got {item!r}")
        i, j, w = int(item[0]), int(item[1]), float(item[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edge ({i}, {j}) refers to a point outside 0..{n - 1}")
        edge[i, j] = True
        weight[i, j] = w
    space = DiscreteSpace(edge, weight, coords=coords, region=region, seed=doc.get("seed"),
                          time_function=tf, K=doc.get("K"))
    if stored_tau is not None:
        expected = np.zeros((n, n))
        for i, j, v in stored_tau:
            expected[int(i), int(j)] = float(v)
        diff = np.abs(expected - space.tau_matrix)
        if diff.size and diff.max() > tol:
            i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
            raise ConsistencyError(
                f"stored tau({i},{j})={expected[i, j]!r} disagrees with recomputed {space.tau_matrix[i, j]!r}"
            )
    return space


def load_space(path) -> DiscreteSpace:
    """Read a space written by :func:`save_space`, recomputing and cross-checking ``tau``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    return space_from_json_dict(doc)


# ---------------------------------------------------------------------------
# sprinkling


def sprinkle(region: Region, n: int, seed: int, include_tips: bool = False) -> DiscreteSpace:
    """Poisson-free uniform sprinkle of ``n`` points into ``region``.

    With ``include_tips`` the two tips of a diamond region are added as
    points and ``n - 2`` points are random.  Points are re-indexed by
    increasing chart time, so for diamonds the past tip is point 0 and the
    future tip is point ``n - 1``.
    """
    if n < 2:
        raise ValueError(f"a sprinkle needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    m = n - 2 if include_tips else n
    if include_tips and region.kind == "flat-slab":
        raise ValueError("a slab has no tips")
    pts = region.map_uniform(rng.random((m, 2)))
    if include_tips:
        pts = np.vstack([np.array(region.lo), pts, np.array(region.hi)])
    order = np.argsort(pts[:, 0], kind="stable")
    pts = pts[order]
    return DiscreteSpace.from_coords(pts, region=region, seed=seed)


# ---------------------------------------------------------------------------
# time reversal


class TimeReversed:
    """View of a space with the time orientation flipped.

    ``tau'(x, y) = tau(y, x)`` and ``T' = -T``; realisers are traversed
    backwards.  Angles are unchanged.  Used to run constructions stated for
    one end of a triangle at the other end.
    """

    def __init__(self, base):
        self.base = base
        self.exact = base.exact
        self.K = base.K

    def tau(self, x, y) -> float:
        return self.base.tau(y, x)

    def leq(self, x, y) -> bool:
        return self.base.leq(y, x)

    def timelike(self, x, y) -> bool:
        return self.base.timelike(y, x)

    def time(self, x) -> float:
        return -self.base.time(x)

    def null_distance(self, x, y) -> float:
        return self.base.null_distance(x, y)

    def same(self, x, y) -> bool:
        return self.base.same(x, y)

    def point_along(self, x, y, f: float):
        return self.base.point_along(y, x, 1.0 - f)

    def fraction_of(self, x, y, z) -> float:
        total = self.base.tau(y, x)
        return 0.0 if total <= 0 else min(1.0, max(0.0, self.base.tau(z, x) / total))

    def point_at_null_distance(self, x, y, target: float, from_end: str = "start"):
        return self.base.point_at_null_distance(y, x, target, "end" if from_end == "start" else "start")

    def first_in_future_along(self, x, y, q, beyond: float = 0.0):
        return self.base.last_in_past_along(y, x, q, beyond)

    def last_in_past_along(self, x, y, q, beyond: float = 0.0):
        return self.base.first_in_future_along(y, x, q, beyond)

    def angle(self, v, a, b) -> float:
        return self.base.angle(v, a, b)


def unwrap(space):
    """The underlying space and whether time is reversed."""
    flipped = False
    while isinstance(space, TimeReversed):
        space = space.base
        flipped = not flipped
    return space, flipped
