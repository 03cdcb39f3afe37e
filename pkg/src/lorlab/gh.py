"""Bounded Lorentzian metric spaces and the time-separation Gromov-Hausdorff semi-distance.

The semi-distance between finite ``tau``-spaces X and Y is

    gh(X, Y) = 1/2 * min over correspondences R of dis(R),
    dis(R)   = max over (x, y), (x', y') in R of |tau_X(x, x') - tau_Y(y, y')|,

i.e. the metric correspondence formula with ``tau`` in place of the metric.
The factor 1/2 is the metric convention; :data:`NORMALISATION` is written
into every report so that values can be rescaled.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from .comparison import check_triangle_condition, make_triangle
from .errors import Empty, NotDistinguishing, ParseError, TooLargeForExact
from .model_space import ModelConfig

NORMALISATION = "gh = 1/2 * minimal distortion of a correspondence"
EXACT_CAP = 6
SEARCH_RESTARTS = 32


@dataclass(frozen=True)
class BoundedLorentzianSpace:
    """Finite set of points carrying only a time separation matrix."""

    tau: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        t = np.asarray(self.tau, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("tau must be a square matrix")
        if np.any(t < 0) or np.any(np.diag(t) != 0):
            raise ValueError("tau must be non-negative with a zero diagonal")
        object.__setattr__(self, "tau", t)
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(t.shape[0])))

    def __len__(self):
        return self.tau.shape[0]

    def indistinguishable_pair(self) -> tuple[int, int] | None:
        """First pair of distinct points with equal ``tau`` rows and columns, if any."""
        t = self.tau
        for i, j in itertools.combinations(range(len(self)), 2):
            if np.array_equal(t[i], t[j]) and np.array_equal(t[:, i], t[:, j]):
                return (i, j)
        return None

    def check_distinguishing(self) -> None:
        pair = self.indistinguishable_pair()
        if pair is not None:
            raise NotDistinguishing(f"points {self.ids[pair[0]]} and {self.ids[pair[1]]} are not distinguished by tau",
                                    (self.ids[pair[0]], self.ids[pair[1]]))

    def to_json_dict(self) -> dict:
        return {"points": list(self.ids), "tau": [float(v) for v in self.tau.ravel()]}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "BoundedLorentzianSpace":
        try:
            ids = tuple(doc["points"])
            k = len(ids)
            vals = np.asarray(doc["tau"], dtype=float)
            if vals.size != k * k:
                raise ParseError(f"tau has {vals.size} entries for {k} points")
            return cls(vals.reshape(k, k), ids)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed bounded space: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), separators=(",", ":")) + "\n")


def diamond_to_bounded(space, p, q) -> BoundedLorentzianSpace:
    """``J(p, q)`` with the points timelike related to nothing else in it removed.

    Raises
    ------
    Empty
        If ``J(p, q)`` contains no timelike pair.
    NotDistinguishing
        If two remaining points have identical ``tau`` data.
    """
    if not space.leq(p, q):
        raise ValueError(f"J({p},{q}) needs {p} <= {q}")
    members = space.diamond(p, q)
    sub = space.tau_matrix[np.ix_(members, members)]
    keep = (sub > 0).any(axis=0) | (sub > 0).any(axis=1)
    if not keep.any():
        raise Empty(f"J({p},{q}) has no timelike related pair")
    kept = members[keep]
    out = BoundedLorentzianSpace(sub[np.ix_(keep, keep)], tuple(int(i) for i in kept))
    out.check_distinguishing()
    return out


# ---------------------------------------------------------------------------
# correspondences


def distortion(X: BoundedLorentzianSpace, Y: BoundedLorentzianSpace, pairs) -> float:
    a = np.array([x for x, _ in pairs], dtype=np.int64)
    b = np.array([y for _, y in pairs], dtype=np.int64)
    return float(np.abs(X.tau[np.ix_(a, a)] - Y.tau[np.ix_(b, b)]).max())


def is_correspondence(pairs, nx_: int, ny_: int) -> bool:
    return {x for x, _ in pairs} == set(range(nx_)) and {y for _, y in pairs} == set(range(ny_))


@dataclass(frozen=True)
class GHResult:
    value: float
    mode: str
    is_upper_bound: bool
    pairs: tuple = field(default=(), repr=False)


def _feasible(X, Y, delta):
    """A correspondence of distortion <= delta, or None (maximal-clique search)."""
    nx_, ny_ = len(X), len(Y)
    verts = [(x, y) for x in range(nx_) for y in range(ny_)]
    G = nx.Graph()
    G.add_nodes_from(range(len(verts)))
    slack = delta + 1e-12
    for i, (x, y) in enumerate(verts):
        for j in range(i + 1, len(verts)):
            x2, y2 = verts[j]
            if abs(X.tau[x, x2] - Y.tau[y, y2]) <= slack and abs(X.tau[x2, x] - Y.tau[y2, y]) <= slack:
                G.add_edge(i, j)
    for clique in nx.find_cliques(G):
        pairs = [verts[k] for k in clique]
        if is_correspondence(pairs, nx_, ny_):
            return sorted(pairs)
    return None


def _gh_exact(X, Y, cap):
    if len(X) > cap or len(Y) > cap:
        raise TooLargeForExact(f"exact mode is capped at {cap}x{cap} points, got {len(X)}x{len(Y)}")
    cand = np.unique(np.abs(X.tau.ravel()[:, None] - Y.tau.ravel()[None, :]))
    lo, hi = 0, len(cand) - 1
    best = _feasible(X, Y, cand[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(X, Y, cand[mid])
        if found is None:
            lo = mid + 1
        else:
            hi, best = mid, found
    return GHResult(0.5 * distortion(X, Y, best), "exact", False, tuple(best))


def _contrib(TA, TB, rows_a, rows_b, A, B):
    """Distortion contributions of candidate pairs ``(rows_a[i], rows_b[i])`` against current pairs (A, B)."""
    d1 = np.abs(TA[np.ix_(rows_a, A)] - TB[np.ix_(rows_b, B)])
    d2 = np.abs(TA[np.ix_(A, rows_a)].T - TB[np.ix_(B, rows_b)].T)
    return np.maximum(d1, d2)


def _greedy(TX, TY, rng):
    """Randomised greedy: each point in random order joins the partner of least added distortion."""
    nx_, ny_ = TX.shape[0], TY.shape[0]
    A: list[int] = []
    B: list[int] = []
    for x in rng.permutation(nx_):
        if A:
            c = _contrib(TX, TY, np.full(ny_, x), np.arange(ny_), np.array(A), np.array(B)).max(axis=1)
        else:
            c = np.abs(TX[x, x] - np.diag(TY))
        ties = np.flatnonzero(c <= c.min() + 1e-15)
        A.append(int(x))
        B.append(int(ties[rng.integers(len(ties))]))
    for y in rng.permutation(ny_):
        c = _contrib(TY, TX, np.full(nx_, y), np.arange(nx_), np.array(B), np.array(A)).max(axis=1)
        ties = np.flatnonzero(c <= c.min() + 1e-15)
        A.append(int(ties[rng.integers(len(ties))]))
        B.append(int(y))
    return np.array(A), np.array(B)


def _pair_matrix(TX, TY, A, B):
    M = np.abs(TX[np.ix_(A, A)] - TY[np.ix_(B, B)])
    return np.maximum(M, M.T)


def _local_search(TX, TY, A, B, nx_, max_iter):
    """Reassign one partner of the worst pair, or swap the partners of the worst pair, while it helps.

    The first ``nx_`` entries keep their X point (they realise a map X -> Y),
    the rest keep their Y point, so every state is a correspondence.
    """
    M = _pair_matrix(TX, TY, A, B)
    d = M.max()
    for _ in range(max_iter):
        i, j = np.unravel_index(int(np.argmax(M)), M.shape)
        improved = False
        for k in (i, j):
            keep = np.ones(len(A), dtype=bool)
            keep[k] = False
            rest = M[np.ix_(keep, keep)].max(initial=0.0)
            if k < nx_:
                c = _contrib(TX, TY, np.full(TY.shape[0], A[k]), np.arange(TY.shape[0]), A[keep], B[keep])
            else:
                c = _contrib(TY, TX, np.full(TX.shape[0], B[k]), np.arange(TX.shape[0]), B[keep], A[keep])
            new = np.maximum(c.max(axis=1, initial=0.0), rest)
            best = int(np.argmin(new))
            if new[best] < d - 1e-15:
                if k < nx_:
                    B[k] = best
                else:
                    A[k] = best
                M = _pair_matrix(TX, TY, A, B)
                d = M.max()
                improved = True
                break
        if not improved and i != j and (i < nx_) == (j < nx_):
            A2, B2 = A.copy(), B.copy()
            if i < nx_:
                B2[i], B2[j] = B[j], B[i]
            else:
                A2[i], A2[j] = A[j], A[i]
            M2 = _pair_matrix(TX, TY, A2, B2)
            if M2.max() < d - 1e-15:
                A, B, M, d = A2, B2, M2, M2.max()
                improved = True
        if not improved:
            break
    return A, B, float(d)


def _gh_search(X, Y, restarts, seed, max_iter):
    rng = np.random.default_rng(seed)
    best = (math.inf, None)
    for _ in range(restarts):
        A, B = _greedy(X.tau, Y.tau, rng)
        A, B, d = _local_search(X.tau, Y.tau, A, B, len(X), max_iter)
        if d < best[0]:
            best = (d, tuple(sorted(set(zip(A.tolist(), B.tolist())))))
    return GHResult(0.5 * best[0], "search", True, best[1])


def gh_distance(X: BoundedLorentzianSpace, Y: BoundedLorentzianSpace, mode: str = "exact", *,
                cap: int = EXACT_CAP, restarts: int = SEARCH_RESTARTS, seed: int = 0,
                max_iter: int = 200) -> GHResult:
    """Half the least distortion over correspondences between X and Y.

    ``mode="exact"`` binary-searches the candidate distortion values and decides
    each by a maximal-clique search on the compatibility graph of pairs;
    it refuses spaces with more than ``cap`` points.  ``mode="search"`` runs
    ``restarts`` randomised greedy starts with local search and reports an
    upper bound.  Identical ``tau`` matrices give an exact 0 through the
    identity correspondence in either mode.
    """
    if mode not in ("exact", "search"):
        raise ValueError(f"mode must be 'exact' or 'search', got {mode!r}")
    if X.tau.shape == Y.tau.shape and np.array_equal(X.tau, Y.tau):
        return GHResult(0.0, mode, False, tuple((i, i) for i in range(len(X))))
    if mode == "exact":
        return _gh_exact(X, Y, cap)
    return _gh_search(X, Y, restarts, seed, max_iter)


# ---------------------------------------------------------------------------
# stability


@dataclass
class StabilityReport:
    sizes: list[int]
    gh_rows: list[tuple[int, int, str, float, bool]]
    triangle_margins: list[float]
    tol: float
    normalisation: str = NORMALISATION

    @property
    def final_holds(self) -> bool:
        return all(m >= -self.tol for m in self.triangle_margins)

    def consecutive(self) -> list[float]:
        return [v for i, j, _, v, _ in self.gh_rows if j == i + 1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.normalisation}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "mode", "value", "is_upper_bound"])
            for i, j, mode, v, ub in self.gh_rows:
                w.writerow([i, j, mode, repr(float(v)), str(ub).lower()])

    def to_dict(self) -> dict:
        return {"normalisation": self.normalisation, "sizes": self.sizes,
                "gh": [{"i": i, "j": j, "mode": m, "value": v, "is_upper_bound": ub}
                       for i, j, m, v, ub in self.gh_rows],
                "triangle_margins": self.triangle_margins, "final_holds": self.final_holds, "tol": self.tol}


def stability_experiment(spaces, cfg: ModelConfig, selectors=None, mode: str = "search", seed: int = 0,
                         restarts: int = SEARCH_RESTARTS, triangles: int = 10, min_side: float = 0.25,
                         tol: float = 0.05) -> StabilityReport:
    """GH distances between diamonds of a sequence of spaces, and triangle checks on the last one.

    ``selectors[i]`` is the diamond ``(p, q)`` of ``spaces[i]``; by default the
    first and last point (the tips of a sprinkle with tips).  Every pair of
    diamonds is compared.  ``triangles`` triangles of the final space with
    both short sides at least ``min_side`` are checked with the triangle
    condition for ``cfg``.
    """
    spaces = list(spaces)
    if selectors is None:
        selectors = [(0, sp.n - 1) for sp in spaces]
    bounded = [diamond_to_bounded(sp, p, q) for sp, (p, q) in zip(spaces, selectors)]
    rows = []
    for i, j in itertools.combinations(range(len(bounded)), 2):
        use = mode
        if mode == "exact" and max(len(bounded[i]), len(bounded[j])) > EXACT_CAP:
            use = "search"
        res = gh_distance(bounded[i], bounded[j], use, restarts=restarts, seed=seed)
        rows.append((i, j, res.mode, res.value, res.is_upper_bound))
    final = spaces[-1]
    rng = np.random.default_rng(seed)
    tl = np.argwhere(final.tau_matrix >= 2 * min_side)
    margins: list[float] = []
    tries = 0
    while len(margins) < triangles and len(tl) and tries < 100 * triangles:
        tries += 1
        p, r = (int(v) for v in tl[int(rng.integers(len(tl)))])
        inner = final.timelike_diamond(p, r)
        inner = inner[(final.tau_matrix[p, inner] >= min_side) & (final.tau_matrix[inner, r] >= min_side)]
        if inner.size == 0:
            continue
        q = int(inner[int(rng.integers(inner.size))])
        tri = make_triangle(final, p, q, r, cfg, id=len(margins))
        margins.append(check_triangle_condition(final, tri, cfg, samples=16, seed=seed, tol=tol).margin)
    return StabilityReport([len(b) for b in bounded], rows, margins, tol)
