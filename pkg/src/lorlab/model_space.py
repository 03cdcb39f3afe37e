"""Trigonometry of the two-dimensional Lorentzian model spaces L_K.

All three curvature regimes are handled by one formula.  Writing ``s = sqrt|K|``
and using the generalised functions

    sn_K(x) = sin(s x)/s,  x,  sinh(s x)/s            (K < 0, K = 0, K > 0)
    md_K(x) = 2 sin^2(s x/2)/s^2,  x^2/2,  2 sinh^2(s x/2)/s^2

the law of cosines for a vertex with adjacent sides ``a``, ``b``, opposite side
``c``, hyperbolic angle ``omega`` and sign ``sigma`` reads

    md(c) = md(a) + md(b) + K md(a) md(b) + sigma cosh(omega) sn(a) sn(b).

Multiplying by ``K`` and adding one recovers the cos/cosh forms; at ``K = 0`` it
is ``c^2 = a^2 + b^2 + 2 sigma a b cosh(omega)``.  The half-angle form avoids
cancellation for small ``|K|`` and makes every regime continuous at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NotCausallyRelated, NotRealisable, SizeBoundViolation

#: Relative tolerance for trigonometric identities.
TRIG_TOL = 1e-9
#: ``cosh(omega)`` arguments this far below one are clamped to one.
COSH_CLAMP = 1e-9

VERTICES = ("p", "q", "r")
SIDES = {"pq": ("p", "q"), "qr": ("q", "r"), "pr": ("p", "r")}


def finite_diameter(K: float) -> float:
    """Finite diameter D_K of the model space: ``inf`` for K >= 0, ``pi/sqrt(-K)`` otherwise."""
    if K >= 0:
        return math.inf
    return math.pi / math.sqrt(-K)


@dataclass(frozen=True, slots=True)
class ModelConfig:
    """Curvature ``K`` of the comparison space together with its derived scale and diameter."""

    K: float
    s: float = field(init=False)
    D_K: float = field(init=False)

    def __post_init__(self):
        K = float(self.K)
        if not math.isfinite(K):
            raise ValueError(f"curvature must be finite, got {self.K!r}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "s", math.sqrt(abs(K)))
        object.__setattr__(self, "D_K", finite_diameter(K))

    # generalised trigonometric functions ---------------------------------
    def sn(self, x: float) -> float:
        if self.K < 0:
            return math.sin(self.s * x) / self.s
        if self.K > 0:
            return math.sinh(self.s * x) / self.s
        return x

    def md(self, x: float) -> float:
        if self.K < 0:
            h = math.sin(0.5 * self.s * x)
            return 2.0 * h * h / (self.s * self.s)
        if self.K > 0:
            h = math.sinh(0.5 * self.s * x)
            return 2.0 * h * h / (self.s * self.s)
        return 0.5 * x * x

    def md_inverse(self, m: float) -> float:
        """Side length with ``md(c) = m``; raises if it would reach D_K."""
        if m <= 0.0:
            return 0.0
        if self.K < 0:
            arg = self.s * math.sqrt(0.5 * m)
            if arg >= 1.0:
                raise SizeBoundViolation(
                    f"no side below D_K={self.D_K:.17g} (sin(s c/2) would be {arg:.17g})"
                )
            return 2.0 * math.asin(arg) / self.s
        if self.K > 0:
            return 2.0 * math.asinh(self.s * math.sqrt(0.5 * m)) / self.s
        return math.sqrt(2.0 * m)


@dataclass(frozen=True, slots=True)
class TriangleSides:
    """Side lengths seen from one vertex: ``a``, ``b`` meet there, ``c`` is opposite."""

    a: float
    b: float
    c: float

    def validate(self, cfg: ModelConfig) -> None:
        if not (self.a > 0 and self.b > 0):
            raise NotRealisable(f"sides meeting the vertex must be timelike, got a={self.a}, b={self.b}")
        if self.c < 0:
            raise NotRealisable(f"opposite side must be non-negative, got c={self.c}")
        longest = max(self.a, self.b, self.c)
        if longest >= cfg.D_K:
            raise SizeBoundViolation(f"side {longest:.17g} violates size bound D_K={cfg.D_K:.17g}")


@dataclass(frozen=True, slots=True)
class Hinge:
    """Two timelike sides ``a``, ``b`` with unsigned hyperbolic angle ``omega`` between them.

    ``sigma`` is +1 when the hinge vertex is the causally middle point of the
    configuration and -1 when it is a time-endpoint.
    """

    a: float
    b: float
    omega: float
    sigma: int

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma!r}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega!r}")

    @property
    def signed_angle(self) -> float:
        return self.sigma * self.omega


@dataclass(frozen=True, slots=True)
class CausalTriple:
    """Time separations of a causal triple ``p <= q <= r``."""

    pq: float
    qr: float
    pr: float

    def side(self, name: str) -> float:
        return getattr(self, name)

    def sides_at(self, vertex: str) -> tuple[TriangleSides, int]:
        """Vertex-relative sides and the sign of the angle at ``vertex``."""
        if vertex == "p":
            return TriangleSides(self.pq, self.pr, self.qr), -1
        if vertex == "q":
            return TriangleSides(self.pq, self.qr, self.pr), 1
        if vertex == "r":
            return TriangleSides(self.qr, self.pr, self.pq), -1
        raise ValueError(f"vertex must be one of {VERTICES}, got {vertex!r}")

    def satisfies_reverse_triangle(self, tol: float = TRIG_TOL) -> bool:
        return self.pr >= self.pq + self.qr - tol * max(1.0, self.pr)

    def excess(self) -> float:
        return self.pr - self.pq - self.qr


def _cosh_minus_one(cfg: ModelConfig, a: float, b: float, c: float, sigma: int) -> float:
    sa, sb = cfg.sn(a), cfg.sn(b)
    ma, mb, mc = cfg.md(a), cfg.md(b), cfg.md(c)
    denom = sigma * sa * sb
    return (mc - ma - mb - cfg.K * ma * mb - denom) / denom


def angle_from_sides(cfg: ModelConfig, sides: TriangleSides, sigma: int) -> float:
    """Unsigned hyperbolic angle opposite ``sides.c`` in the model space.

    Raises
    ------
    SizeBoundViolation
        If the longest side is not below ``D_K``.
    NotRealisable
        If the implied ``cosh(omega)`` is below one by more than the clamp
        tolerance, i.e. no comparison configuration exists.
    """
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma!r}")
    sides.validate(cfg)
    if cfg.K < 0 and max(cfg.s * sides.a, cfg.s * sides.b) >= math.pi:
        raise SizeBoundViolation("adjacent side reaches the finite diameter")
    x = _cosh_minus_one(cfg, sides.a, sides.b, sides.c, sigma)
    if not math.isfinite(x):
        raise NotRealisable(f"law of cosines is singular for {sides}")
    if x < 0:
        if x < -COSH_CLAMP:
            raise NotRealisable(
                f"cosh(omega) = {1 + x:.17g} < 1 for {sides}, sigma={sigma}: no comparison configuration"
            )
        return 0.0
    # arccosh(1 + x) without the loss of precision near x = 0
    return 2.0 * math.asinh(math.sqrt(0.5 * x))


def side_from_hinge(cfg: ModelConfig, hinge: Hinge) -> float:
    """Length of the side closing a model-space hinge.

    This inverts :func:`angle_from_sides`.  For K < 0 the branch with
    ``s c`` in ``[0, pi)`` is returned.

    Raises
    ------
    SizeBoundViolation
        If a hinge side or the closing side would reach ``D_K``.
    NotRealisable
        If the endpoints of the hinge are not causally related in the model
        (only possible for ``sigma = -1``).
    """
    a, b = hinge.a, hinge.b
    if not (a > 0 and b > 0):
        raise NotRealisable(f"hinge sides must be timelike, got a={a}, b={b}")
    if max(a, b) >= cfg.D_K:
        raise SizeBoundViolation(f"hinge side violates size bound D_K={cfg.D_K:.17g}")
    ma, mb = cfg.md(a), cfg.md(b)
    mc = ma + mb + cfg.K * ma * mb + hinge.sigma * math.cosh(hinge.omega) * cfg.sn(a) * cfg.sn(b)
    if mc < 0:
        scale = max(ma, mb)
        if mc < -TRIG_TOL * scale:
            raise NotRealisable("hinge endpoints are spacelike separated in the model space")
        return 0.0
    if hinge.sigma == 1 and a + b >= cfg.D_K:
        # the far side of a middle-vertex hinge is at least a + b; md folds back past D_K
        raise SizeBoundViolation(f"hinge sides sum to {a + b:.17g} >= D_K={cfg.D_K:.17g}")
    return cfg.md_inverse(mc)


def vertex_angle(cfg: ModelConfig, triple: CausalTriple, vertex: str) -> tuple[float, int]:
    """Unsigned model angle and its sign at a vertex of a causal triple."""
    sides, sigma = triple.sides_at(vertex)
    return angle_from_sides(cfg, sides, sigma), sigma


def _locate(triple: CausalTriple, side: str, t: float) -> dict[str, float]:
    """Distances of the point at tau-fraction ``t`` on ``side`` from that side's two ends."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {tuple(SIDES)}, got {side!r}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {t!r}")
    start, end = SIDES[side]
    length = triple.side(side)
    return {start: t * length, end: (1.0 - t) * length}


def comparison_point_distance(
    cfg: ModelConfig,
    triple: CausalTriple,
    which_sides: tuple[str, str],
    t1: float,
    t2: float,
    strict: bool = False,
) -> float:
    """Model time separation from a comparison point on one side to one on another.

    The first point sits at tau-fraction ``t1`` along ``which_sides[0]``, the
    second at ``t2`` along ``which_sides[1]``; fractions are measured from the
    past endpoint of each side.  The value returned is ``tau(first, second)``,
    which is zero by convention when the second point is not in the causal
    future of the first (``strict=True`` raises :class:`NotCausallyRelated`
    instead).

    Points on different sides are handled by a hinge at the vertex the sides
    share, using the angle of the full comparison triangle there.
    """
    side1, side2 = which_sides
    loc1, loc2 = _locate(triple, side1, t1), _locate(triple, side2, t2)
    if max(triple.pq, triple.qr, triple.pr) >= cfg.D_K:
        raise SizeBoundViolation(f"triangle violates size bound D_K={cfg.D_K:.17g}")

    def unrelated() -> float:
        if strict:
            raise NotCausallyRelated(
                f"comparison points on {side1}@{t1} and {side2}@{t2} are not causally related"
            )
        return 0.0

    if side1 == side2:
        length = triple.side(side1)
        gap = (t2 - t1) * length
        return gap if gap > 0 else (0.0 if gap == 0 else unrelated())

    (shared,) = set(SIDES[side1]) & set(SIDES[side2])
    d1, d2 = loc1[shared], loc2[shared]
    # +1 if the point lies to the future of the shared vertex along its side
    dir1 = 1 if SIDES[side1][0] == shared else -1
    dir2 = 1 if SIDES[side2][0] == shared else -1

    if d1 == 0.0 and d2 == 0.0:
        return 0.0
    if d1 == 0.0:
        return d2 if dir2 > 0 else unrelated()
    if d2 == 0.0:
        return d1 if dir1 < 0 else unrelated()

    omega, _ = vertex_angle(cfg, triple, shared)
    if dir1 != dir2:
        c = side_from_hinge(cfg, Hinge(d1, d2, omega, 1))
        return c if dir1 < 0 else unrelated()

    try:
        c = side_from_hinge(cfg, Hinge(d1, d2, omega, -1))
    except NotRealisable:
        return unrelated()
    if c == 0.0:
        return unrelated()
    # both points future of the shared vertex: the farther one is later
    later_is_second = (d2 > d1) if dir1 > 0 else (d1 > d2)
    return c if later_is_second else unrelated()
