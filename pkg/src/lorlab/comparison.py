"""Comparison angles and the lower-curvature-bound checkers.

Conventions
-----------
A vertex's angle is signed by ``sigma``: +1 at the causally middle vertex
``q`` of ``p <= q <= r`` and -1 at the time-endpoints ``p`` and ``r``.  The
angle condition for curvature bounded below by ``K`` is

    sigma * measured  <=  sigma * comparison.

Every check reports a *margin* oriented so that positive means slack:

* angle:    ``sigma * comparison - sigma * measured``
* hinge:    ``tau(actual opposite side) - tau(model opposite side)``
* triangle: ``min(tau(model points) - tau(actual points))`` over sampled pairs

and a verdict ``holds = margin >= -tol``.  Default tolerances are 1e-6 for
exact (analytic) spaces and 0.05 for discrete ones.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .errors import (
    NoAdmissiblePairs,
    NotRealisable,
    PreconditionFailed,
    SizeBoundViolation,
)
from .model_space import (
    SIDES,
    CausalTriple,
    Hinge,
    ModelConfig,
    TriangleSides,
    angle_from_sides,
    comparison_point_distance,
    side_from_hinge,
    vertex_angle,
)
from .spaces import unwrap

TOL_EXACT = 1e-6
TOL_DISCRETE = 0.05
#: Default probe floor, as a fraction of the shorter side at the vertex.
PROBE_FLOOR = 0.5
#: Relative tolerance below which Alexandrov classifications count as degenerate.
DEGENERATE_RTOL = 1e-9


def default_tol(space) -> float:
    return TOL_EXACT if space.exact else TOL_DISCRETE


# ---------------------------------------------------------------------------
# triangles


@dataclass(frozen=True)
class TriangleInstance:
    """Causally ordered vertices ``p <= q <= r`` of a space, with their side lengths."""

    space: Any = field(repr=False, compare=False)
    p: Any
    q: Any
    r: Any
    id: Any = 0
    pq: float = 0.0
    qr: float = 0.0
    pr: float = 0.0

    @property
    def triple(self) -> CausalTriple:
        return CausalTriple(self.pq, self.qr, self.pr)

    @property
    def timelike(self) -> bool:
        return self.pq > 0 and self.qr > 0

    def vertex(self, name: str):
        return {"p": self.p, "q": self.q, "r": self.r}[name]

    def others(self, name: str):
        """Points the two sides at ``name`` lead to, ordered (past-most first)."""
        return {"p": (self.q, self.r), "q": (self.p, self.r), "r": (self.p, self.q)}[name]

    def opposite(self, name: str) -> float:
        return {"p": self.qr, "q": self.pr, "r": self.pq}[name]

    def has_angle(self, name: str) -> bool:
        sides, _ = self.triple.sides_at(name)
        return sides.a > 0 and sides.b > 0

    def size_ok(self, cfg: ModelConfig) -> bool:
        return max(self.pq, self.qr, self.pr) < cfg.D_K

    def endpoints(self, side: str):
        a, b = SIDES[side]
        return self.vertex(a), self.vertex(b)


def make_triangle(space, p, q, r, cfg: ModelConfig | None = None, id=0) -> TriangleInstance:
    """Validated triangle: ``p <= q <= r``, at least two timelike sides, size bounds for ``cfg``."""
    if not (space.leq(p, q) and space.leq(q, r)):
        raise PreconditionFailed("triangle vertices must satisfy p <= q <= r")
    pq, qr, pr = space.tau(p, q), space.tau(q, r), space.tau(p, r)
    if pr <= 0:
        raise PreconditionFailed("the longest side of a triangle must be timelike")
    if (pq <= 0) and (qr <= 0):
        raise PreconditionFailed("an admissible triangle has at most one null side")
    tri = TriangleInstance(space, p, q, r, id, pq, qr, pr)
    if cfg is not None and not tri.size_ok(cfg):
        raise SizeBoundViolation(f"triangle {id} has a side >= D_K={cfg.D_K}")
    return tri


def comparison_angle(cfg: ModelConfig, triple, vertex: str) -> tuple[float, int]:
    """Unsigned comparison angle at ``vertex`` and its sign."""
    if isinstance(triple, TriangleInstance):
        triple = triple.triple
    return vertex_angle(cfg, triple, vertex)


# ---------------------------------------------------------------------------
# angle measurement


@dataclass
class AngleProbe:
    """Scale pairs along two realisers from a common vertex and the comparison angle at each."""

    vertex: Any
    toward: tuple[Any, Any]
    orientations: tuple[int, int]
    scales: list[tuple[float, float]] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    excluded: int = 0


@dataclass(frozen=True)
class AngleMeasurement:
    value: float
    converged: bool
    exact: bool
    values: tuple[float, ...] = ()
    scales: tuple[tuple[float, float], ...] = ()
    excluded: int = 0


def _branch(space, v, a):
    """Chain vertices from ``v`` toward ``a`` (excluding ``v``), their tau-distances from ``v``, orientation."""
    if space.leq(v, a):
        chain = space.geodesic_chain(v, a).vertices[1:]
        d = space.tau_matrix[v, list(chain)]
        return np.array(chain, dtype=np.int64), d, 1
    chain = space.geodesic_chain(a, v).vertices[:-1][::-1]
    d = space.tau_matrix[list(chain), v]
    return np.array(chain, dtype=np.int64), d, -1


def build_probe(space, v, a, b, cfg: ModelConfig | None = None, min_scale: float | None = None) -> AngleProbe:
    """Comparison angles at ``v`` for point pairs on the discrete realisers toward ``a`` and ``b``.

    Pairs whose sides fall below ``min_scale`` (default: ``PROBE_FLOOR`` times
    the shorter realiser), violate size bounds or are not causally related are
    excluded.  Recorded scale pairs are sorted by increasing larger scale.
    """
    ca, da, oa = _branch(space, v, a)
    cb, db, ob = _branch(space, v, b)
    if min_scale is None:
        min_scale = PROBE_FLOOR * min(da.max(initial=0.0), db.max(initial=0.0))
    model = cfg if cfg is not None else ModelConfig(0.0)
    D_K = model.D_K
    probe = AngleProbe(v, (a, b), (oa, ob))
    tau = space.tau_matrix
    entries = []
    for i, x in enumerate(ca):
        if da[i] < min_scale or da[i] <= 0:
            continue
        for j, y in enumerate(cb):
            if db[j] < min_scale or db[j] <= 0:
                continue
            if oa != ob:
                third = tau[y, x] if oa > 0 else tau[x, y]
                sigma = 1
            else:
                third = max(tau[x, y], tau[y, x])
                sigma = -1
                if third == 0 and not (space.leq(x, y) or space.leq(y, x)):
                    probe.excluded += 1
                    continue
            if max(da[i], db[j], third) >= D_K:
                probe.excluded += 1
                continue
            try:
                val = angle_from_sides(model, TriangleSides(float(da[i]), float(db[j]), float(third)), sigma)
            except (NotRealisable, SizeBoundViolation):
                probe.excluded += 1
                continue
            entries.append((max(da[i], db[j]), min(da[i], db[j]), val))
    entries.sort()
    probe.scales = [(e[0], e[1]) for e in entries]
    probe.values = [e[2] for e in entries]
    return probe


def measure_angle(space, v, a, b, cfg: ModelConfig | None = None, k: int = 5,
                  min_scale: float | None = None, tol: float = TOL_DISCRETE) -> AngleMeasurement:
    """Angle at ``v`` between the realisers toward ``a`` and ``b``.

    Analytic spaces return the exact angle.  Discrete spaces take the
    comparison angles of the ``k`` smallest admissible scale pairs of an
    :class:`AngleProbe` and report their median, with ``converged`` set when
    successive values differ by less than ``tol``.

    Raises
    ------
    NoAdmissiblePairs
        If no admissible pair exists at any scale.
    """
    base, _ = unwrap(space)
    if base.exact:
        val = base.angle(v, a, b)
        return AngleMeasurement(val, True, True, (val,))
    probe = build_probe(base, v, a, b, cfg, min_scale)
    if not probe.values:
        raise NoAdmissiblePairs(f"no admissible scale pairs for the angle at {v} toward {a}, {b}")
    vals = probe.values[:k]
    steps = np.abs(np.diff(vals)) if len(vals) > 1 else np.zeros(1)
    return AngleMeasurement(
        float(np.median(vals)), bool(len(vals) > 1 and steps.max() < tol), False,
        tuple(float(x) for x in vals), tuple(probe.scales[:k]), probe.excluded,
    )


# ---------------------------------------------------------------------------
# reports


@dataclass
class ComparisonEntry:
    triangle_id: Any
    vertex: str
    mode: str
    sigma: int
    comparison: float
    measured: float
    margin: float
    holds: bool
    tol: float
    detail: dict = field(default_factory=dict)


@dataclass
class ComparisonReport:
    entries: list[ComparisonEntry] = field(default_factory=list)

    def add(self, entry: ComparisonEntry) -> ComparisonEntry:
        self.entries.append(entry)
        return entry

    def extend(self, other: "ComparisonReport") -> None:
        self.entries.extend(other.entries)

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)

    @property
    def failures(self) -> list[ComparisonEntry]:
        return [e for e in self.entries if not e.holds]

    def sorted(self) -> "ComparisonReport":
        return ComparisonReport(sorted(self.entries, key=lambda e: (str(e.triangle_id), e.vertex, e.mode)))

    def to_json(self) -> str:
        return json.dumps([_jsonable(asdict(e)) for e in self.entries], sort_keys=True)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["triangle_id", "vertex", "mode", "margin", "verdict"])
            for e in self.entries:
                w.writerow([e.triangle_id, e.vertex, e.mode, repr(float(e.margin)), "holds" if e.holds else "fails"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


# ---------------------------------------------------------------------------
# checkers


def _need_angle(tri: TriangleInstance, vertex: str) -> None:
    if not tri.has_angle(vertex):
        raise PreconditionFailed(f"vertex {vertex} of triangle {tri.id} meets a null side and has no angle")


def check_angle_condition(space, tri: TriangleInstance, cfg: ModelConfig, vertex: str,
                          tol: float | None = None, measured: AngleMeasurement | None = None) -> ComparisonEntry:
    """Angle condition at ``vertex``: signed measured angle <= signed comparison angle."""
    tol = default_tol(space) if tol is None else tol
    _need_angle(tri, vertex)
    comp, sigma = comparison_angle(cfg, tri, vertex)
    if measured is None:
        a, b = tri.others(vertex)
        measured = measure_angle(space, tri.vertex(vertex), a, b, cfg)
    margin = sigma * comp - sigma * measured.value
    return ComparisonEntry(tri.id, vertex, "angle", sigma, comp, measured.value, margin, margin >= -tol, tol,
                           {"converged": measured.converged})


def check_hinge_condition(space, tri: TriangleInstance, cfg: ModelConfig, vertex: str,
                          tol: float | None = None, measured: AngleMeasurement | None = None) -> ComparisonEntry:
    """Hinge condition at ``vertex``: actual opposite side >= model side of the hinge with the measured angle.

    A model side at or beyond ``D_K`` cannot be matched and counts as a
    failure (margin ``-inf``); a ``sigma = -1`` hinge whose model endpoints
    are spacelike has model side 0.
    """
    tol = default_tol(space) if tol is None else tol
    _need_angle(tri, vertex)
    sides, sigma = tri.triple.sides_at(vertex)
    if measured is None:
        a, b = tri.others(vertex)
        measured = measure_angle(space, tri.vertex(vertex), a, b, cfg)
    try:
        model = side_from_hinge(cfg, Hinge(sides.a, sides.b, measured.value, sigma))
    except SizeBoundViolation:
        model = math.inf
    except NotRealisable:
        model = 0.0
    actual = tri.opposite(vertex)
    margin = actual - model
    return ComparisonEntry(tri.id, vertex, "hinge", sigma, model, actual, margin, margin >= -tol, tol,
                           {"angle": measured.value})


def triangle_sample_plan(samples: int, rng: np.random.Generator) -> list[tuple[str, float, str, float]]:
    """Stratified sample pairs: vertices, then side midpoints, then uniform fractions."""
    names = list(SIDES)
    pairs = [(s1, s2) for i, s1 in enumerate(names) for s2 in names[i + 1:]]
    plan = []
    for s1, s2 in pairs:
        for f1 in (0.0, 1.0):
            for f2 in (0.0, 1.0):
                plan.append((s1, f1, s2, f2))
    for s1, s2 in pairs:
        plan.append((s1, 0.5, s2, 0.5))
    for s1, s2 in pairs:
        plan.append((s1, 0.5, s2, 0.0))
        plan.append((s1, 0.5, s2, 1.0))
        plan.append((s1, 0.0, s2, 0.5))
        plan.append((s1, 1.0, s2, 0.5))
    while len(plan) < samples:
        s1, s2 = pairs[int(rng.integers(len(pairs)))]
        plan.append((s1, float(rng.random()), s2, float(rng.random())))
    return plan[:samples]


def check_triangle_condition(space, tri: TriangleInstance, cfg: ModelConfig, samples: int = 64,
                             seed: int = 0, tol: float | None = None) -> ComparisonEntry:
    """Triangle condition: ``tau(x, y) <= tau(x~, y~)`` for sampled points on the sides.

    Both orders ``(x, y)`` and ``(y, x)`` are compared.  Points on discrete
    sides are chain vertices; their comparison points use the actual
    tau-fraction of the chosen vertex.
    """
    tol = default_tol(space) if tol is None else tol
    if not tri.size_ok(cfg):
        raise SizeBoundViolation(f"triangle {tri.id} violates size bounds for K={cfg.K}")
    rng = np.random.default_rng(seed)
    triple = tri.triple
    worst = math.inf
    worst_at = None
    count = 0
    for s1, f1, s2, f2 in triangle_sample_plan(samples, rng):
        a1, b1 = tri.endpoints(s1)
        a2, b2 = tri.endpoints(s2)
        x = space.point_along(a1, b1, f1)
        y = space.point_along(a2, b2, f2)
        t1 = space.fraction_of(a1, b1, x)
        t2 = space.fraction_of(a2, b2, y)
        model_xy = comparison_point_distance(cfg, triple, (s1, s2), t1, t2)
        model_yx = comparison_point_distance(cfg, triple, (s2, s1), t2, t1)
        m = min(model_xy - space.tau(x, y), model_yx - space.tau(y, x))
        count += 1
        if m < worst:
            worst, worst_at = m, (s1, t1, s2, t2)
    return ComparisonEntry(tri.id, "*", "triangle", 0, math.nan, math.nan, worst, worst >= -tol, tol,
                           {"samples": count, "worst_pair": worst_at})


def check_triangle_all_modes(space, tri: TriangleInstance, cfg: ModelConfig, tol: float | None = None,
                             samples: int = 64, seed: int = 0) -> ComparisonReport:
    """Angle and hinge checks at every vertex with an angle, plus the triangle check."""
    rep = ComparisonReport()
    for v in ("p", "q", "r"):
        if not tri.has_angle(v):
            continue
        a, b = tri.others(v)
        meas = measure_angle(space, tri.vertex(v), a, b, cfg)
        rep.add(check_angle_condition(space, tri, cfg, v, tol, meas))
        rep.add(check_hinge_condition(space, tri, cfg, v, tol, meas))
    rep.add(check_triangle_condition(space, tri, cfg, samples, seed, tol))
    return rep


# ---------------------------------------------------------------------------
# Alexandrov lemma, future version


@dataclass(frozen=True)
class AlexandrovResult:
    """Both sides of the future Alexandrov lemma for a split point ``x`` on a short side.

    ``angle_far`` is the comparison angle at x between the far vertex of the
    short side and r (``q`` when splitting [p, q]); ``angle_near`` the one
    between the near vertex and r.  ``tau_xr`` is the actual separation and
    ``tau_tilde`` the one between comparison points in the big triangle.
    """

    angle_far: float
    angle_near: float
    tau_xr: float
    tau_tilde: float
    by_angle: str
    by_tau: str

    @property
    def agree(self) -> bool:
        if "degenerate" in (self.by_angle, self.by_tau):
            return True
        return self.by_angle == self.by_tau


def _classify(small: float, large: float, scale: float) -> str:
    if abs(small - large) <= DEGENERATE_RTOL * max(1.0, scale):
        return "degenerate"
    return "convex" if small < large else "concave"


def alexandrov_future_lengths(cfg: ModelConfig, px: float, xq: float, qr: float, pr: float, xr: float,
                              pq: float | None = None) -> AlexandrovResult:
    """Alexandrov lemma for ``x`` on ``[p, q]`` of ``Delta(p, q, r)``, from side lengths alone.

    Convex at x means ``angle at x between q and r <= angle at x between p and r``
    in the glued comparison triangles, and the lemma says this happens iff
    ``tau(x, r) <= tau(x~, r~)``.
    """
    pq = px + xq if pq is None else pq
    angle_near, _ = vertex_angle(cfg, CausalTriple(px, xr, pr), "q")  # x is the middle vertex
    angle_far, _ = vertex_angle(cfg, CausalTriple(xq, qr, xr), "p")  # x is the past endpoint
    tilde = comparison_point_distance(cfg, CausalTriple(pq, qr, pr), ("pq", "pr"), px / pq, 1.0)
    return AlexandrovResult(
        angle_far, angle_near, xr, tilde,
        _classify(angle_far, angle_near, max(angle_far, angle_near)),
        _classify(xr, tilde, max(xr, tilde)),
    )


def verify_alexandrov_future(space, tri: TriangleInstance, x, cfg: ModelConfig, side: str = "pq") -> AlexandrovResult:
    """Future Alexandrov lemma for a split point ``x`` on ``[p, q]`` (or on ``[q, r]`` via time reversal)."""
    if side == "pq":
        px, xq, xr = space.tau(tri.p, x), space.tau(x, tri.q), space.tau(x, tri.r)
        if px <= 0 or xq <= 0 or xr <= 0:
            raise PreconditionFailed("sub-triangles at the split point must be timelike")
        return alexandrov_future_lengths(cfg, px, xq, tri.qr, tri.pr, xr, tri.pq)
    if side == "qr":
        # reversing time turns [q, r] into the side from the new p
        rx, xq, px = space.tau(x, tri.r), space.tau(tri.q, x), space.tau(tri.p, x)
        if rx <= 0 or xq <= 0 or px <= 0:
            raise PreconditionFailed("sub-triangles at the split point must be timelike")
        return alexandrov_future_lengths(cfg, rx, xq, tri.pq, tri.pr, px, tri.qr)
    raise ValueError(f"split side must be 'pq' or 'qr', got {side!r}")


# ---------------------------------------------------------------------------
# triangle inequality of angles


@dataclass(frozen=True)
class AngleTriangleVerdict:
    lhs: float
    rhs: float
    margin: float
    holds: bool


def angle_triangle_inequality_check(space, v, a, b, c, cfg: ModelConfig | None = None,
                                    tol: float | None = None) -> AngleTriangleVerdict:
    """``angle(alpha, gamma) <= angle(alpha, beta) + angle(beta, gamma)`` at ``v``.

    ``alpha``, ``beta``, ``gamma`` are the realisers from ``v`` toward ``a``,
    ``b``, ``c``; alpha and gamma must share a time orientation, beta the
    opposite one.
    """
    tol = default_tol(space) if tol is None else tol

    def orient(z):
        return 1 if space.leq(v, z) else (-1 if space.leq(z, v) else 0)

    oa, ob, oc = orient(a), orient(b), orient(c)
    if 0 in (oa, ob, oc) or oa != oc or oa == ob:
        raise PreconditionFailed("alpha and gamma must share a time orientation and beta must be opposite")
    ag = 0.0 if space.same(a, c) else measure_angle(space, v, a, c, cfg).value
    ab = measure_angle(space, v, a, b, cfg).value
    bg = measure_angle(space, v, b, c, cfg).value
    margin = ab + bg - ag
    return AngleTriangleVerdict(ag, ab + bg, margin, margin >= -tol)
