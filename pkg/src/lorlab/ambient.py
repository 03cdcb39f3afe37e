"""Exact geometry of the two-dimensional constant-curvature spacetimes in conformal charts.

Every backend works in a chart ``(t, x)`` in which the metric is conformally flat,

    flat  (K = 0):  -dt^2 + dx^2
    K < 0 (AdS2):   (-dt^2 + dx^2) / (|K| cos^2 x),        |x| < pi/2
    K > 0 (dS2):    (-dt^2 + dx^2) / (K cos^2 t),          |t| < pi/2

so causality is read off the chart (``dt >= |dx|``) and the chart time ``t``
is a time function.  Time separations, geodesics and angles for ``K != 0``
come from the standard embeddings into R^{2,1} / R^{1,2}:

    AdS2:  P = (cos t / cos x, sin t / cos x, tan x),   <P,P> = -1, form (-,-,+)
    dS2:   P = (tan t, cos x / cos t, sin x / cos t),   <P,P> = +1, form (-,+,+)

All functions accept arrays of shape ``(..., 2)`` and broadcast.
"""

from __future__ import annotations

import math

import numpy as np

from .model_space import finite_diameter


def _split(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0], a[..., 1]


class Ambient:
    """Interface shared by the three curvature regimes."""

    K: float = 0.0

    def __init__(self, K: float = 0.0):
        self.K = float(K)
        self.s = math.sqrt(abs(self.K))
        self.D_K = finite_diameter(self.K)

    # chart causality ----------------------------------------------------
    def causal(self, a, b):
        """True where ``b`` lies in the causal future of ``a`` (including ``a == b``)."""
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt, dx = tb - ta, xb - xa
        return dt >= np.abs(dx)

    def timelike(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt, dx = tb - ta, xb - xa
        return dt > np.abs(dx)

    def time(self, a):
        return _split(a)[0]

    def null_distance(self, a, b):
        """Null distance for the chart time function inside a causally convex chart region."""
        ta, xa = _split(a)
        tb, xb = _split(b)
        return np.maximum(np.abs(tb - ta), np.abs(xb - xa))

    def tau(self, a, b):
        """Time separation ``tau(a, b)``; zero unless ``b`` is in the causal future of ``a``."""
        raise NotImplementedError

    def point_along(self, a, b, f):
        """Point at tau-fraction ``f`` along the geodesic from ``a`` to ``b``."""
        raise NotImplementedError

    def velocity(self, a, b):
        """Chart slope ``dx/dt`` of the geodesic from ``a`` towards ``b`` at ``a``."""
        raise NotImplementedError

    def angle(self, v, a, b):
        """Unsigned hyperbolic angle at ``v`` between the geodesics towards ``a`` and ``b``.

        The chart is conformally flat and hyperbolic angles are conformally
        invariant, so the angle is the difference of chart rapidities.
        """
        ra = np.arctanh(self.velocity(v, a))
        rb = np.arctanh(self.velocity(v, b))
        return np.abs(ra - rb)

    def sample_diamond(self, u: np.ndarray, lo, hi):
        """Map uniform variates ``u`` in [0,1)^2 to volume-uniform points of the chart diamond J(lo, hi)."""
        raise NotImplementedError


class FlatAmbient(Ambient):
    def __init__(self):
        super().__init__(0.0)

    def tau(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt, dx = tb - ta, xb - xa
        sq = (dt + dx) * (dt - dx)
        return np.where((dt >= np.abs(dx)) & (sq > 0), np.sqrt(np.maximum(sq, 0.0)), 0.0)

    def point_along(self, a, b, f):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        f = np.asarray(f, dtype=float)[..., None]
        return a + f * (b - a)

    def velocity(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        return (xb - xa) / (tb - ta)

    def sample_diamond(self, u, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        ulo, vlo = lo[0] + lo[1], lo[0] - lo[1]
        uhi, vhi = hi[0] + hi[1], hi[0] - hi[1]
        uu = ulo + u[:, 0] * (uhi - ulo)
        vv = vlo + u[:, 1] * (vhi - vlo)
        return np.column_stack([(uu + vv) / 2, (uu - vv) / 2])


def _invert_cdf(cdf, target, lo, hi, iters=64):
    """Vectorised bisection for ``cdf(w) = target`` on ``[lo, hi]`` (cdf increasing)."""
    a = np.full_like(target, lo)
    b = np.full_like(target, hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = cdf(m) < target
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    return 0.5 * (a + b)


def _sample_conformal_diamond(u, h):
    """Volume-uniform samples of the centred chart diamond ``|w| + |z| <= h`` with density sec^2(w/2).

    Returns ``(w, z)`` where ``w`` is the light-cone combination entering the
    conformal factor and ``z`` the other one.  The marginal of ``w`` is
    proportional to ``(h - |w|) sec^2(w/2)`` and is inverted by bisection on
    its closed-form antiderivative.
    """

    def half_mass(w):  # integral over [0, w] of (h - s) sec^2(s/2) ds
        return 2.0 * (h - w) * np.tan(w / 2) - 4.0 * np.log(np.cos(w / 2))

    total = half_mass(np.float64(h))
    # u0 in [0,1): symmetric around w = 0
    side = np.where(u[:, 0] < 0.5, -1.0, 1.0)
    frac = np.abs(2.0 * u[:, 0] - 1.0) * total
    w = side * _invert_cdf(half_mass, frac, 0.0, h)
    reach = h - np.abs(w)
    z = (2.0 * u[:, 1] - 1.0) * reach
    return w, z


class AntiDeSitterAmbient(Ambient):
    """Universal cover of AdS2 with curvature ``K < 0`` in the chart ``|x| < pi/2``."""

    def __init__(self, K: float):
        if K >= 0:
            raise ValueError(f"anti-de Sitter backend needs K < 0, got {K}")
        super().__init__(K)

    def embed(self, a):
        t, x = _split(a)
        c = np.cos(x)
        return np.stack([np.cos(t) / c, np.sin(t) / c, np.tan(x)], axis=-1)

    @staticmethod
    def unembed(P, t_ref):
        U, V, X = P[..., 0], P[..., 1], P[..., 2]
        x = np.arctan(X)
        t = np.arctan2(V, U)
        t = t_ref + np.remainder(t - t_ref + np.pi, 2 * np.pi) - np.pi
        return np.stack([t, x], axis=-1)

    def _hat_tau(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt, dx = tb - ta, xb - xa
        prod = np.sin((dt + dx) / 2) * np.sin((dt - dx) / 2) / (np.cos(xa) * np.cos(xb))
        ok = (dt >= np.abs(dx)) & (prod > 0)
        return np.where(ok, 2.0 * np.arcsin(np.sqrt(np.clip(prod, 0.0, 1.0))), 0.0)

    def tau(self, a, b):
        return self._hat_tau(a, b) / self.s

    def point_along(self, a, b, f):
        th = self._hat_tau(a, b)
        f = np.asarray(f, dtype=float)
        P, Q = self.embed(a), self.embed(b)
        t_ref = _split(a)[0] + f * (_split(b)[0] - _split(a)[0])
        with np.errstate(invalid="ignore", divide="ignore"):
            wa = np.where(th > 0, np.sin((1 - f) * th) / np.sin(th), 1 - f)
            wb = np.where(th > 0, np.sin(f * th) / np.sin(th), f)
        R = wa[..., None] * P + wb[..., None] * Q
        timelike = (th > 0)[..., None]
        flat = np.asarray(a, float) + np.asarray(f)[..., None] * (np.asarray(b, float) - np.asarray(a, float))
        return np.where(timelike, self.unembed(R, t_ref), flat)

    def velocity(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt = tb - ta
        return (np.sin(xb) - np.sin(xa) * np.cos(dt)) / (np.cos(xa) * np.sin(dt))

    def sample_diamond(self, u, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo[1] != 0.0 or hi[1] != 0.0:
            raise ValueError("model patches are chart diamonds centred on x = 0")
        h = hi[0] - lo[0]
        # conformal factor depends on x = (u - v)/2 = w/2
        w, z = _sample_conformal_diamond(u, h)
        t = lo[0] + h / 2 + z / 2
        x = w / 2
        return np.column_stack([t, x])


class DeSitterAmbient(Ambient):
    """dS2 with curvature ``K > 0`` in the conformal chart ``|t| < pi/2``."""

    def __init__(self, K: float):
        if K <= 0:
            raise ValueError(f"de Sitter backend needs K > 0, got {K}")
        super().__init__(K)

    def embed(self, a):
        t, x = _split(a)
        c = np.cos(t)
        return np.stack([np.tan(t), np.cos(x) / c, np.sin(x) / c], axis=-1)

    @staticmethod
    def unembed(P, x_ref):
        U, V, X = P[..., 0], P[..., 1], P[..., 2]
        t = np.arctan(U)
        x = np.arctan2(X, V)
        x = x_ref + np.remainder(x - x_ref + np.pi, 2 * np.pi) - np.pi
        return np.stack([t, x], axis=-1)

    def _hat_tau(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dt, dx = tb - ta, xb - xa
        prod = np.sin((dt + dx) / 2) * np.sin((dt - dx) / 2) / (np.cos(ta) * np.cos(tb))
        ok = (dt >= np.abs(dx)) & (prod > 0)
        return np.where(ok, 2.0 * np.arcsinh(np.sqrt(np.maximum(prod, 0.0))), 0.0)

    def tau(self, a, b):
        return self._hat_tau(a, b) / self.s

    def point_along(self, a, b, f):
        th = self._hat_tau(a, b)
        f = np.asarray(f, dtype=float)
        P, Q = self.embed(a), self.embed(b)
        x_ref = _split(a)[1] + f * (_split(b)[1] - _split(a)[1])
        with np.errstate(invalid="ignore", divide="ignore"):
            wa = np.where(th > 0, np.sinh((1 - f) * th) / np.sinh(th), 1 - f)
            wb = np.where(th > 0, np.sinh(f * th) / np.sinh(th), f)
        R = wa[..., None] * P + wb[..., None] * Q
        timelike = (th > 0)[..., None]
        flat = np.asarray(a, float) + np.asarray(f)[..., None] * (np.asarray(b, float) - np.asarray(a, float))
        return np.where(timelike, self.unembed(R, x_ref), flat)

    def velocity(self, a, b):
        ta, xa = _split(a)
        tb, xb = _split(b)
        dx = xb - xa
        return np.sin(dx) * np.cos(ta) / (np.sin(tb) - np.sin(ta) * np.cos(dx))

    def sample_diamond(self, u, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo[1] != hi[1]:
            raise ValueError("model patches are chart diamonds with tips at equal x")
        h = hi[0] - lo[0]
        if lo[0] + hi[0] != 0.0:
            raise ValueError("de Sitter patches must be centred on t = 0")
        # conformal factor depends on t = (u + v)/2
        w, z = _sample_conformal_diamond(u, h)
        t = w / 2
        x = lo[1] + z / 2
        return np.column_stack([t, x])


def ambient_for(K: float) -> Ambient:
    """The conformal-chart backend for curvature ``K``."""
    if K < 0:
        return AntiDeSitterAmbient(K)
    if K > 0:
        return DeSitterAmbient(K)
    return FlatAmbient()
