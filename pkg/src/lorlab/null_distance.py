"""Time functions and the null distance ``d_T`` on finite spaces.

``d_T(p, q)`` is the least null length ``sum |T(x_{i+1}) - T(x_i)|`` over
vertex sequences whose consecutive entries are causally related in either
direction.  Along a causal chain the increments telescope, so an edge
``p <= q`` with an intermediate point ``p <= k <= q`` is never shorter than
the two-step path through ``k``.  Shortest paths are therefore computed on
the covering (link) graph, which gives identical values with far fewer
edges than the full relation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import NotMonotone


@dataclass(frozen=True)
class TimeFunctionAssignment:
    """Per-point values ``T`` that must increase strictly along the causal relation."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __getitem__(self, p):
        return self.values[p]

    def validate(self, space) -> None:
        """Raise :class:`NotMonotone` unless ``T(p) < T(q)`` for every causal pair ``p != q``."""
        T = self.values
        if T.shape != (space.n,):
            raise NotMonotone(f"time function has {T.shape} values for {space.n} points")
        ps, qs = np.nonzero(space.causal)
        bad = T[qs] <= T[ps]
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            p, q = int(ps[k]), int(qs[k])
            raise NotMonotone(f"T({p})={T[p]!r} is not below T({q})={T[q]!r} although {p} <= {q}")


def coordinate_time(space) -> TimeFunctionAssignment:
    """The ambient chart time as a time function, validated against every causal pair."""
    if space.coords is None:
        raise NotMonotone("space has no coordinates to take a time function from")
    T = TimeFunctionAssignment(space.coords[:, 0].copy())
    T.validate(space)
    return T


@dataclass(frozen=True)
class PiecewiseCausalCurve:
    """Vertex sequence whose consecutive entries are equal or causally related."""

    vertices: tuple[int, ...]

    def validate(self, space) -> None:
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not (space.leq(a, b) or space.leq(b, a)):
                raise ValueError(f"consecutive vertices {a}, {b} are not causally related")

    def null_length(self, T) -> float:
        vals = np.asarray(T.values if isinstance(T, TimeFunctionAssignment) else T)[list(self.vertices)]
        return float(np.abs(np.diff(vals)).sum())


def link_matrix(space) -> np.ndarray:
    """Covering relation: causal pairs with no third point causally between them."""
    C = space.causal.astype(np.float32)
    between = (C @ C) > 0
    return space.causal & ~between


def _as_values(T) -> np.ndarray:
    return np.asarray(T.values if isinstance(T, TimeFunctionAssignment) else T, dtype=float)


class NullDistance:
    """All-pairs null distance for one ``(space, T)``, computed once on first use.

    Unreachable pairs (different piecewise-causal components) have distance
    ``math.inf``; :meth:`reachable` reports them explicitly.
    """

    def __init__(self, space, T):
        self.space = space
        self.T = _as_values(T)
        self._matrix = None
        self._graph = None

    @property
    def graph(self) -> csr_matrix:
        if self._graph is None:
            L = link_matrix(self.space)
            ps, qs = np.nonzero(L)
            w = self.T[qs] - self.T[ps]
            self._graph = csr_matrix((w, (ps, qs)), shape=(self.space.n, self.space.n))
        return self._graph

    def _finish(self, D: np.ndarray, rows: np.ndarray) -> np.ndarray:
        T = self.T
        lower = np.abs(T[None, :] - T[rows][:, None])
        D = np.maximum(D, lower)
        # causal pairs: exact difference, not a telescoped float sum
        C = self.space.causal[rows] | self.space.causal[:, rows].T
        D = np.where(C, lower, D)
        D[np.arange(len(rows)), rows] = 0.0
        return D

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            rows = np.arange(self.space.n)
            D = self._finish(dijkstra(self.graph, directed=False), rows)
            # path sums depend on the source by a few ulps; keep the lower-index source's value
            upper = np.triu(D, 1)
            self._matrix = upper + upper.T
        return self._matrix

    def from_source(self, p) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[p]
        D = dijkstra(self.graph, directed=False, indices=[p])
        return self._finish(D, np.array([p]))[0]

    def distance(self, p, q) -> float:
        if p == q:
            return 0.0
        a, b = (p, q) if p < q else (q, p)
        return float(self.from_source(a)[b])

    def reachable(self, p, q) -> bool:
        return math.isfinite(self.distance(p, q))


def null_distance(space, T, p, q) -> float:
    """``d_T(p, q)`` on a finite space; ``math.inf`` when no piecewise causal path exists."""
    values = _as_values(T)
    cached = getattr(space, "_nulldist", None)
    if cached is not None and np.array_equal(cached.T, values):
        return cached.distance(p, q)
    return NullDistance(space, values).distance(p, q)


def diamond_diameter(space, T, p, q) -> float:
    """Largest null distance between two points of ``J(p, q)``; equals ``T(q) - T(p)``."""
    if not space.leq(p, q):
        raise ValueError(f"diamond J({p},{q}) needs {p} <= {q}")
    members = space.diamond(p, q)
    if members.size <= 1:
        return 0.0
    nd = space.nulldist if np.array_equal(_as_values(T), space.time_values()) else NullDistance(space, T)
    D = nd.matrix[np.ix_(members, members)]
    return float(D.max())


def check_piecewise_connectivity(space) -> list[list[int]]:
    """Components of the undirected causal graph, each sorted, ordered by smallest member."""
    if space.n == 0:
        return []
    k, labels = connected_components(csr_matrix(space.causal), directed=False)
    comps: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(i)
    return sorted(comps.values(), key=lambda c: c[0])


def export_csv(matrix: np.ndarray, path, ids=None) -> None:
    """Write a null-distance matrix: header of point ids, then one row per point; ``inf`` if unreachable."""
    n = matrix.shape[0]
    ids = list(range(n)) if ids is None else list(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ids)
        for row in matrix:
            w.writerow(["inf" if not math.isfinite(v) else repr(float(v)) for v in row])
