"""Numerical forms of the globalisation machinery.

* :func:`gluing_subdivide` splits a triangle with a failing vertex along an
  adjacent side and evaluates the three angle conditions that cannot all hold.
* :func:`locate_positive_failure` iterates that split (plus a split of the long
  side through the boundary of ``J+(q_n)``) until a failing middle vertex is
  found.
* :func:`cats_cradle` runs the alternating subdivision of a timelike triangle
  together with the chain of model-space hinges, recording both monotone
  sequences.
* :func:`lebesgue_number` computes the null-distance Lebesgue number of a
  diamond cover of a finite space.
* :func:`scan_global_bound` and :func:`bonnet_myers_check` scan for failing
  angle conditions and check the finite-diameter bound.

All functions take any space implementing the shared query protocol of
:mod:`lorlab.spaces`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .ambient import ambient_for
from .comparison import (
    ComparisonEntry,
    ComparisonReport,
    TriangleInstance,
    check_angle_condition,
    comparison_angle,
    default_tol,
    make_triangle,
    measure_angle,
)
from .errors import (
    CoverInvalid,
    DegenerateTriangle,
    NoAdmissiblePairs,
    NotRealisable,
    PreconditionFailed,
    ResolutionExhausted,
    SizeBoundViolation,
)
from .model_space import CausalTriple, Hinge, ModelConfig, side_from_hinge
from .spaces import TimeReversed, sprinkle, unwrap

#: Smallest admissible cradle fraction; smaller values are rejected.
EPSILON_FLOOR = 1e-6
CRADLE_TOL_EXACT = 1e-9
CRADLE_TOL_DISCRETE = 1e-4


def _ambient(space):
    return space.region.ambient if space.region is not None else ambient_for(space.K)


def _d_T(space, x, y) -> float:
    return space.null_distance(x, y)


def _reverse_triangle(tri: TriangleInstance, space) -> TriangleInstance:
    """The same triangle seen in the time-reversed (or un-reversed) space."""
    return TriangleInstance(space, tri.r, tri.q, tri.p, tri.id, tri.qr, tri.pq, tri.pr)


# ---------------------------------------------------------------------------
# gluing


@dataclass
class GluingResult:
    """Angle conditions around a split point ``x`` of a triangle failing at ``vertex``.

    ``entries`` holds, in order, the conditions at x in Delta(p, x, r), at p
    in Delta(p, x, r) and at x in Delta(x, q, r) (for a failure at ``r`` the
    time-reversed analogues).  ``contract_ok`` is False only when the parent
    fails and all three hold.
    """

    vertex: str
    x: Any
    parent: ComparisonEntry
    entries: list[ComparisonEntry]
    triangles: list[TriangleInstance] = field(repr=False, default_factory=list)

    @property
    def any_fails(self) -> bool:
        return any(not e.holds for e in self.entries)

    @property
    def contract_ok(self) -> bool:
        return self.parent.holds or self.any_fails


def _glue_at_p(space, tri: TriangleInstance, x, cfg, tol) -> GluingResult:
    if space.same(x, tri.p) or space.same(x, tri.q):
        raise DegenerateTriangle("split point coincides with a vertex of the side")
    if not (space.timelike(tri.p, x) and space.timelike(x, tri.q)):
        raise DegenerateTriangle("split point must lie strictly inside a timelike side [p, q]")
    parent = check_angle_condition(space, tri, cfg, "p", tol)
    left = make_triangle(space, tri.p, x, tri.r, id=f"{tri.id}/L")
    right = make_triangle(space, x, tri.q, tri.r, id=f"{tri.id}/R")
    entries = [
        check_angle_condition(space, left, cfg, "q", tol),
        check_angle_condition(space, left, cfg, "p", tol),
        check_angle_condition(space, right, cfg, "p", tol),
    ]
    return GluingResult("p", x, parent, entries, [left, left, right])


def gluing_subdivide(space, tri: TriangleInstance, x, cfg: ModelConfig, vertex: str = "p",
                     tol: float | None = None) -> GluingResult:
    """Split ``tri`` at ``x`` on the side adjacent to ``vertex`` and evaluate the three sub-conditions.

    ``vertex="p"`` splits ``[p, q]``; ``vertex="r"`` splits ``[q, r]`` and is
    handled by reversing time.
    """
    tol = default_tol(space) if tol is None else tol
    if vertex == "p":
        return _glue_at_p(space, tri, x, cfg, tol)
    if vertex == "r":
        rev = TimeReversed(space)
        res = _glue_at_p(rev, _reverse_triangle(tri, rev), x, cfg, tol)
        res.vertex = "r"
        res.parent.vertex = "r"
        return res
    raise ValueError(f"gluing splits are defined at p or r, got {vertex!r}")


# ---------------------------------------------------------------------------
# failures of type sigma = +1


@dataclass
class PositiveFailure:
    triangle: TriangleInstance
    entry: ComparisonEntry
    trace: list[dict]


def _failing_vertex(space, tri, cfg, tol) -> str | None:
    entries = {v: check_angle_condition(space, tri, cfg, v, tol) for v in ("q", "p", "r") if tri.has_angle(v)}
    for v in ("q", "p", "r"):
        if v in entries and not entries[v].holds:
            return v
    return None


def locate_positive_failure(space, tri: TriangleInstance, cfg: ModelConfig, eps: float = 0.25,
                            max_steps: int = 60, tol: float | None = None,
                            vertex: str | None = None) -> PositiveFailure:
    """Find a triangle inside ``J(p, r)`` whose middle vertex fails the angle condition.

    Starting from a failure at ``p`` (a failure at ``r`` is handled by time
    reversal, one at ``q`` is returned as is), each step first tries the long
    side: ``r_n`` is the first point of ``[p_n, r]`` in ``I+(q_n)`` and the
    middle vertex of ``Delta(q_n, r_n, r)`` is checked.  Otherwise ``[p_n, q_n]``
    is split at its null-distance midpoint and :func:`gluing_subdivide` picks
    the failing half.

    ``vertex`` forces the starting vertex; by default a failing ``q`` is
    preferred, then ``p``, then ``r``.

    Raises
    ------
    PreconditionFailed
        If no vertex of ``tri`` fails (or ``vertex`` does not fail), or ``eps``
        is outside (0, 1).
    ResolutionExhausted
        If the iteration runs out of points or steps; the trace is attached.
    """
    if not 0.0 < eps < 1.0:
        raise PreconditionFailed(f"eps must lie in (0, 1), got {eps}")
    tol = default_tol(space) if tol is None else tol
    if vertex is None:
        v = _failing_vertex(space, tri, cfg, tol)
        if v is None:
            raise PreconditionFailed(f"no angle condition fails in triangle {tri.id}")
    else:
        v = vertex
        if check_angle_condition(space, tri, cfg, v, tol).holds:
            raise PreconditionFailed(f"the angle condition at {v} holds in triangle {tri.id}")
    if v == "q":
        return PositiveFailure(tri, check_angle_condition(space, tri, cfg, "q", tol), [])
    if v == "r":
        rev = TimeReversed(space)
        rev_tri = _reverse_triangle(tri, rev)
        if check_angle_condition(rev, rev_tri, cfg, "p", tol).holds:
            raise PreconditionFailed("failure at r not reproduced under time reversal")
        found = _descend(rev, rev_tri, cfg, eps, max_steps, tol)
        base_tri = _reverse_triangle(found.triangle, space)
        return PositiveFailure(base_tri, check_angle_condition(space, base_tri, cfg, "q", tol), found.trace)
    return _descend(space, tri, cfg, eps, max_steps, tol)


def _descend(space, tri, cfg, eps, max_steps, tol) -> PositiveFailure:
    p0, r = tri.p, tri.r
    L = _d_T(space, p0, r)
    pn, qn = tri.p, tri.q
    trace: list[dict] = []
    for step in range(max_steps):
        rec: dict = {"step": step, "d_T(p_n,q_n)": _d_T(space, pn, qn)}
        trace.append(rec)
        # long side: first point of [p_n, r] to the future of q_n
        rn = space.first_in_future_along(pn, r, qn, beyond=1e-6)
        if rn is not None and space.timelike(qn, rn) and space.timelike(rn, r):
            rec["d_T(p_n,r_n)"] = _d_T(space, pn, rn)
            rec["small"] = rec["d_T(p_n,r_n)"] <= (1 - eps) * L
            try:
                sub = make_triangle(space, qn, rn, r, id=f"{tri.id}/long{step}")
                e = check_angle_condition(space, sub, cfg, "q", tol)
                rec["long_margin"] = e.margin
                if not e.holds:
                    return PositiveFailure(sub, e, trace)
            except (NoAdmissiblePairs, NotRealisable, SizeBoundViolation, PreconditionFailed) as exc:
                rec["long_error"] = str(exc)
        # bisection of [p_n, q_n] at the null-distance midpoint
        half = 0.5 * _d_T(space, pn, qn)
        x = space.point_at_null_distance(pn, qn, half)
        if space.same(x, pn) or space.same(x, qn) or not (space.timelike(pn, x) and space.timelike(x, qn)):
            raise ResolutionExhausted("side [p_n, q_n] has no interior point left to split at", trace)
        cur = make_triangle(space, pn, qn, r, id=f"{tri.id}/{step}")
        try:
            g = gluing_subdivide(space, cur, x, cfg, "p", tol)
        except (NoAdmissiblePairs, NotRealisable, SizeBoundViolation) as exc:
            raise ResolutionExhausted(f"sub-triangle angles unavailable: {exc}", trace) from exc
        rec["margins"] = [e.margin for e in g.entries]
        at_x, at_p, at_x_right = g.entries
        if not at_x.holds:
            return PositiveFailure(g.triangles[0], at_x, trace)
        if not at_p.holds:
            qn = x
        elif not at_x_right.holds:
            pn = x
        else:
            raise ResolutionExhausted("all three sub-conditions hold although the parent fails", trace)
    raise ResolutionExhausted(f"no failing middle vertex within {max_steps} steps", trace)


# ---------------------------------------------------------------------------
# cat's cradle


@dataclass
class CatsCradleTrace:
    """Sequences recorded by :func:`cats_cradle`; index ``n`` refers to step ``n``.

    ``l[n] = tau(p, q_n) + tau(q_n, r)`` and ``model_side[n]`` is the far side
    of the model hinge at ``q_n``.  Angle lists are indexed from step 1
    (``theta[0]`` is theta_1); ``omega_bar[0]`` is the measured theta_1.
    ``defect[n-1]`` is how far ``q_n`` is from lying on a realiser of the
    side it was placed on; it is zero up to rounding on analytic spaces and
    bounds the amount by which ``l`` can decrease on discrete ones.
    """

    triangle_id: Any
    epsilon: float
    L: float
    swapped: bool
    tau_pr: float
    q: list = field(default_factory=list)
    l: list[float] = field(default_factory=list)
    model_side: list[float] = field(default_factory=list)
    theta: list[float] = field(default_factory=list)
    phi: list[float] = field(default_factory=list)
    theta_bar: list[float] = field(default_factory=list)
    phi_bar: list[float] = field(default_factory=list)
    omega_bar: list[float] = field(default_factory=list)
    excess: list[float] = field(default_factory=list)
    defect: list[float] = field(default_factory=list)
    reason: str = ""

    @property
    def steps(self) -> int:
        return len(self.l) - 1

    def ls5_ok(self, tol: float = 1e-9) -> bool:
        l = self.l
        return l[0] > 0 and all(b >= a - tol for a, b in zip(l, l[1:])) and l[-1] <= self.tau_pr + tol

    def ls6_ok(self, tol: float = 1e-9) -> bool:
        m = self.model_side
        return all(b >= a - tol for a, b in zip(m, m[1:]))

    @property
    def terminal_gap(self) -> float:
        return abs(self.model_side[-1] - self.l[-1])

    @property
    def initial_excess(self) -> float:
        """``tau(p~0, r~0) - tau(p, r)``: positive means the hinge condition at q fails."""
        return self.model_side[0] - self.tau_pr

    def to_dict(self) -> dict:
        return {
            "triangle_id": self.triangle_id, "epsilon": self.epsilon, "L": self.L, "swapped": self.swapped,
            "tau_pr": self.tau_pr, "l": self.l, "model_side": self.model_side, "theta": self.theta,
            "phi": self.phi, "theta_bar": self.theta_bar, "phi_bar": self.phi_bar,
            "omega_bar": self.omega_bar, "excess": self.excess, "defect": self.defect, "reason": self.reason,
            "ls5": self.ls5_ok(), "ls6": self.ls6_ok(), "terminal_gap": self.terminal_gap,
        }


def _angle(space, v, a, b, cfg) -> float:
    return measure_angle(space, v, a, b, cfg).value


def cats_cradle(space, tri: TriangleInstance, cfg: ModelConfig, eps: float = 0.25, max_steps: int = 200,
                tol: float | None = None) -> CatsCradleTrace:
    """Alternating subdivision of a timelike triangle with its model hinge chain.

    Odd steps put ``q_n`` on ``[p, q_{n-1}]`` with ``d_T(p, q_n) = eps L``, even
    steps on ``[q_{n-1}, r]`` with ``d_T(q_n, r) = eps L``, where
    ``L = d_T(p, r)``.  If ``d_T(p, q) < d_T(q, r)`` the roles of p and r are
    exchanged by reversing time.  The run stops when the step excess
    ``l_n - l_{n-1}`` drops below ``tol`` (1e-9 exact, 1e-4 discrete) or after
    ``max_steps`` steps.

    Raises
    ------
    PreconditionFailed
        For ``eps`` outside ``[EPSILON_FLOOR, 1/2)`` or a non-timelike triangle.
    ResolutionExhausted
        If not even the first step can be taken.
    SizeBoundViolation
        If a model hinge has no admissible far side.
    """
    if not (EPSILON_FLOOR <= eps < 0.5):
        raise PreconditionFailed(f"eps must lie in [{EPSILON_FLOOR}, 1/2), got {eps}")
    if not tri.timelike:
        raise PreconditionFailed("the cat's cradle needs a timelike triangle")
    if not tri.size_ok(cfg):
        raise SizeBoundViolation(f"triangle {tri.id} violates size bounds for K={cfg.K}")
    tol = (CRADLE_TOL_EXACT if space.exact else CRADLE_TOL_DISCRETE) if tol is None else tol
    swapped = _d_T(space, tri.p, tri.q) < _d_T(space, tri.q, tri.r)
    if swapped:
        space = TimeReversed(space)
        tri = _reverse_triangle(tri, space)
    p, r = tri.p, tri.r
    L = _d_T(space, p, r)
    tr = CatsCradleTrace(tri.id, eps, L, swapped, tri.pr)
    tau = space.tau

    q_prev = tri.q
    tr.q.append(q_prev)
    tr.l.append(tau(p, q_prev) + tau(q_prev, r))
    theta1 = _angle(space, q_prev, p, r, cfg)
    tr.omega_bar.append(theta1)
    tr.model_side.append(side_from_hinge(cfg, Hinge(tau(p, q_prev), tau(q_prev, r), theta1, 1)))

    for n in range(1, max_steps + 1):
        if n % 2:
            qn = space.point_at_null_distance(p, q_prev, eps * L)
            sub = (qn, q_prev, r)
            phi_other = r
        else:
            qn = space.point_at_null_distance(q_prev, r, eps * L, from_end="end")
            sub = (p, q_prev, qn)
            phi_other = p
        if space.same(qn, q_prev) or space.same(qn, p) or space.same(qn, r) or \
                not (space.timelike(sub[0], sub[1]) and space.timelike(sub[1], sub[2])):
            if n == 1:
                raise ResolutionExhausted("the first cradle point coincides with a vertex", [tr.to_dict()])
            tr.reason = "resolution"
            break
        triple = CausalTriple(tau(sub[0], sub[1]), tau(sub[1], sub[2]), tau(sub[0], sub[2]))
        theta_bar, _ = comparison_angle(cfg, triple, "q")
        phi_bar, _ = comparison_angle(cfg, triple, "p" if n % 2 else "r")
        if n % 2:
            theta = _angle(space, q_prev, qn, r, cfg)
        else:
            theta = _angle(space, q_prev, qn, p, cfg)
        phi = _angle(space, qn, q_prev, phi_other, cfg)
        tr.theta.append(theta)
        tr.phi.append(phi)
        tr.theta_bar.append(theta_bar)
        tr.phi_bar.append(phi_bar)
        tr.omega_bar.append(phi_bar)
        tr.q.append(qn)
        tr.l.append(tau(p, qn) + tau(qn, r))
        tr.model_side.append(side_from_hinge(cfg, Hinge(tau(p, qn), tau(qn, r), phi_bar, 1)))
        tr.excess.append(tr.l[-1] - tr.l[-2])
        if n % 2:
            tr.defect.append(tau(p, q_prev) - tau(p, qn) - tau(qn, q_prev))
        else:
            tr.defect.append(tau(q_prev, r) - tau(q_prev, qn) - tau(qn, r))
        q_prev = qn
        if tr.excess[-1] < tol:
            tr.reason = "excess"
            break
    else:
        tr.reason = "max_steps"
    return tr


# ---------------------------------------------------------------------------
# Lebesgue number


@dataclass
class DiamondCover:
    """Timelike chart diamonds ``I(lo_i, hi_i)`` meant to cover the discrete diamond ``J(x, y)``."""

    x: int
    y: int
    elements: list[tuple[tuple[float, float], tuple[float, float]]]

    def membership(self, space) -> tuple[np.ndarray, np.ndarray]:
        """Members of ``J(x, y)`` and a (elements, members) boolean containment matrix."""
        members = space.diamond(self.x, self.y)
        pts = space.coords[members]
        inside = np.zeros((len(self.elements), len(members)), dtype=bool)
        for i, (lo, hi) in enumerate(self.elements):
            a = _ambient(space).timelike(np.asarray(lo)[None, :], pts)
            b = _ambient(space).timelike(pts, np.asarray(hi)[None, :])
            inside[i] = a & b
        return members, inside

    def validate(self, space) -> None:
        members, inside = self.membership(space)
        bare = ~inside.any(axis=0)
        if bare.any():
            raise CoverInvalid(f"point {int(members[np.flatnonzero(bare)[0]])} of J({self.x},{self.y}) "
                               "lies in no cover element")


def greedy_cover(space, x, y, radius: float) -> DiamondCover:
    """Cover ``J(x, y)`` by chart diamonds of half-height ``radius`` centred on uncovered points, in index order."""
    members = space.diamond(x, y)
    elements: list = []
    covered = np.zeros(len(members), dtype=bool)
    pts = space.coords[members]
    for k, z in enumerate(members):
        if covered[k]:
            continue
        c = space.coords[z]
        lo = (float(c[0] - radius), float(c[1]))
        hi = (float(c[0] + radius), float(c[1]))
        elements.append((lo, hi))
        covered |= _ambient(space).timelike(np.asarray(lo)[None, :], pts) & \
            _ambient(space).timelike(pts, np.asarray(hi)[None, :])
    return DiamondCover(int(x), int(y), elements)


@dataclass(frozen=True)
class LebesgueResult:
    epsilon: float
    unconstrained: bool
    f: np.ndarray = field(repr=False)
    members: np.ndarray = field(repr=False)


def lebesgue_number(space, cover: DiamondCover, T=None) -> LebesgueResult:
    """``eps = min_p max_i d_T(p, C_i cap (J+(p) cup J-(p)))`` over the points of ``J(x, y)``.

    ``C_i`` is the part of ``J(x, y)`` outside element ``i``.  When one element
    contains all of ``J(x, y)`` any ``eps`` works; the result is then
    ``math.inf`` with ``unconstrained=True``.
    """
    cover.validate(space)
    members, inside = cover.membership(space)
    if inside.all(axis=1).any():
        return LebesgueResult(math.inf, True, np.full(len(members), math.inf), members)
    if T is None or np.array_equal(np.asarray(T, float), space.time_values()):
        D = space.nulldist.matrix[np.ix_(members, members)]
    else:
        from .null_distance import NullDistance

        D = NullDistance(space, T).matrix[np.ix_(members, members)]
    C = space.causal[np.ix_(members, members)]
    related = C | C.T | np.eye(len(members), dtype=bool)
    f = np.full(len(members), -math.inf)
    for row in inside:
        d = np.where(related & ~row[None, :], D, math.inf).min(axis=1)
        f = np.maximum(f, d)
    return LebesgueResult(float(f.min()), False, f, members)


def lebesgue_violations(space, cover: DiamondCover, eps: float) -> list[tuple[int, int]]:
    """Causal pairs ``p <= q`` in ``J(x, y)`` with ``d_T(p, q) < eps`` whose diamond lies in no single element."""
    members, inside = cover.membership(space)
    pos = {int(m): k for k, m in enumerate(members)}
    D = space.nulldist.matrix
    bad = []
    for a in members:
        for b in members:
            if a == b or not space.causal[a, b] or not D[a, b] < eps:
                continue
            idx = [pos[int(z)] for z in space.diamond(int(a), int(b))]
            if not inside[:, idx].all(axis=1).any():
                bad.append((int(a), int(b)))
    return bad


# ---------------------------------------------------------------------------
# scanning


@dataclass
class ScanResult:
    report: ComparisonReport
    triangles: int
    per_decile: list[int]
    #: the scanned (p, q, r) triples; entry ``triangle_id`` indexes this list
    instances: list = field(default_factory=list, repr=False)

    @property
    def failures(self) -> list[ComparisonEntry]:
        return self.report.failures

    @property
    def max_abs_margin(self) -> float:
        return max((abs(e.margin) for e in self.report.entries), default=0.0)


def _candidate_triangles(space, count: int, rng: np.random.Generator):
    base, _ = unwrap(space)
    out = []
    attempts = 0
    if base.exact:
        while len(out) < count and attempts < 200 * count:
            attempts += 1
            pts = sorted(base.sample_points(3, rng), key=lambda z: z[0])
            if base.timelike(pts[0], pts[1]) and base.timelike(pts[1], pts[2]):
                out.append(tuple(pts))
    else:
        tl = np.argwhere(base.tau_matrix > 0)
        if len(tl) == 0:
            return out
        while len(out) < count and attempts < 200 * count:
            attempts += 1
            p, r = tl[int(rng.integers(len(tl)))]
            inner = base.timelike_diamond(int(p), int(r))
            inner = inner[(inner != p) & (inner != r)]
            if inner.size == 0:
                continue
            out.append((int(p), int(inner[int(rng.integers(inner.size))]), int(r)))
    return out


def scan_global_bound(space, cfg: ModelConfig, triangles: int = 1000, seed: int = 0,
                      tol: float | None = None, max_size: float | None = None, jobs: int = 1) -> ScanResult:
    """Angle conditions at every vertex of sampled timelike triangles of all sizes.

    Candidates are binned into ten equal-width bins of ``tau(p, r)`` and drawn
    round-robin across bins so that large triangles are represented.  Only
    triangles within size bounds (and below ``max_size`` if given) are used.
    With ``jobs > 1`` triangles are checked on a thread pool; entry order
    does not depend on ``jobs``.
    """
    rng = np.random.default_rng(seed)
    tol = default_tol(space) if tol is None else tol
    pool = _candidate_triangles(space, 10 * triangles, rng)
    limit = min(cfg.D_K, math.inf if max_size is None else max_size)
    sized = [(space.tau(t[0], t[2]), t) for t in pool]
    sized = [(s, t) for s, t in sized if s < limit]
    report = ComparisonReport()
    if not sized:
        return ScanResult(report, 0, [0] * 10)
    top = max(s for s, _ in sized)
    bins: list[list] = [[] for _ in range(10)]
    for s, t in sized:
        bins[min(9, int(10 * s / top)) if top > 0 else 0].append(t)
    chosen = []
    per = [0] * 10
    while len(chosen) < triangles and any(bins):
        for k in range(10):
            if bins[k] and len(chosen) < triangles:
                chosen.append(bins[k].pop())
                per[k] += 1
    def check(item):
        i, (p, q, r) = item
        tri = make_triangle(space, p, q, r, cfg, id=i)
        out = []
        for v in ("p", "q", "r"):
            try:
                out.append(check_angle_condition(space, tri, cfg, v, tol))
            except (NoAdmissiblePairs, NotRealisable) as exc:
                out.append(ComparisonEntry(i, v, "angle", 0, math.nan, math.nan, math.nan, True, tol,
                                           {"skipped": str(exc)}))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool_:
            results = list(pool_.map(check, enumerate(chosen)))
    else:
        results = [check(item) for item in enumerate(chosen)]
    for entries in results:
        for e in entries:
            report.add(e)
    return ScanResult(report, len(chosen), per, chosen)


# ---------------------------------------------------------------------------
# finite diameter


@dataclass(frozen=True)
class DiameterVerdict:
    diameter: float
    bound: float
    holds: bool
    attained_at: tuple[int, int] | None = None


def bonnet_myers_check(space, cfg: ModelConfig, tol: float = 1e-6) -> DiameterVerdict:
    """Largest time separation against the finite-diameter bound ``pi / sqrt(-K)``."""
    if cfg.K >= 0:
        raise PreconditionFailed(f"the diameter bound needs K < 0, got K={cfg.K}")
    tau = space.tau_matrix
    k = int(np.argmax(tau))
    i, j = divmod(k, tau.shape[1])
    diam = float(tau[i, j])
    return DiameterVerdict(diam, cfg.D_K, diam <= cfg.D_K + tol, (int(i), int(j)))


@dataclass
class RefinementResult:
    ns: list[int]
    diameters: list[float]
    bound: float

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.diameters, self.diameters[1:]))

    @property
    def within_bound(self) -> bool:
        return all(d <= self.bound + 1e-6 for d in self.diameters)


def diameter_refinement(region, cfg: ModelConfig, ns=(250, 500, 1000, 2000), seed: int = 0) -> RefinementResult:
    """Diameters of nested sprinkles (same seed, growing ``n``) of ``region``.

    The sprinkle stream layout makes each sample a superset of the previous
    one, so the diameter can only grow; the bound must never be exceeded.
    """
    diams = []
    for n in ns:
        sp = sprinkle(region, int(n), seed)
        diams.append(bonnet_myers_check(sp, cfg).diameter)
    return RefinementResult(list(ns), diams, cfg.D_K)
