import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import hinge_oracle
from lorlab import (
    CausalTriple,
    Hinge,
    ModelConfig,
    TriangleSides,
    angle_from_sides,
    comparison_point_distance,
    finite_diameter,
    side_from_hinge,
    vertex_angle,
)
from lorlab.errors import NotCausallyRelated, NotRealisable, SizeBoundViolation


class TestConfig:
    def test_finite_diameter(self):
        assert finite_diameter(0.0) == math.inf
        assert finite_diameter(1.0) == math.inf
        assert finite_diameter(-1.0) == pytest.approx(3.14159265, abs=1e-8)
        assert finite_diameter(-4.0) == pytest.approx(math.pi / 2)

    def test_non_finite_curvature_rejected(self):
        with pytest.raises(ValueError):
            ModelConfig(math.nan)

    @pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
    def test_md_inverse_round_trip(self, K):
        cfg = ModelConfig(K)
        for x in (1e-6, 0.3, 1.0, 2.5):
            assert cfg.md_inverse(cfg.md(x)) == pytest.approx(x, rel=1e-12)


class TestAngleFromSides:
    def test_flat_middle_vertex(self):
        w = angle_from_sides(ModelConfig(0), TriangleSides(1, 1, 3), 1)
        assert math.cosh(w) == pytest.approx(3.5, rel=1e-12)
        assert w == pytest.approx(1.9248473, abs=1e-7)

    def test_flat_degenerate(self):
        assert angle_from_sides(ModelConfig(0), TriangleSides(1, 2, 3), 1) == 0.0

    def test_flat_endpoint_vertex(self):
        w = angle_from_sides(ModelConfig(0), TriangleSides(1, 3, 1), -1)
        assert math.cosh(w) == pytest.approx(1.5, rel=1e-12)
        assert w == pytest.approx(0.9624237, abs=1e-7)

    def test_examples_match_embedding(self):
        # the angles above, placed in the plane, reproduce the opposite sides
        assert hinge_oracle(0, 1, 1, math.acosh(3.5), 1) == pytest.approx(3.0, rel=1e-12)
        assert hinge_oracle(0, 1, 3, math.acosh(1.5), -1) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
    def test_degenerate_in_every_regime(self, K):
        assert angle_from_sides(ModelConfig(K), TriangleSides(0.4, 0.7, 1.1), 1) == pytest.approx(0.0, abs=1e-6)

    def test_not_realisable(self):
        # a middle vertex needs c >= a + b
        with pytest.raises(NotRealisable):
            angle_from_sides(ModelConfig(0), TriangleSides(1, 1, 1.5), 1)

    def test_size_bound(self):
        with pytest.raises(SizeBoundViolation):
            angle_from_sides(ModelConfig(-1), TriangleSides(1, 2.2, 3.2), 1)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            angle_from_sides(ModelConfig(0), TriangleSides(1, 1, 3), 0)

    @pytest.mark.parametrize("K", [-1.0, 1.0])
    def test_continuity_at_zero(self, K):
        s = TriangleSides(0.6, 0.9, 1.8)
        base = angle_from_sides(ModelConfig(0), s, 1)
        assert angle_from_sides(ModelConfig(K * 1e-8), s, 1) == pytest.approx(base, abs=1e-6)
        e = TriangleSides(0.5, 1.6, 0.9)
        base = angle_from_sides(ModelConfig(0), e, -1)
        assert angle_from_sides(ModelConfig(K * 1e-8), e, -1) == pytest.approx(base, abs=1e-6)


class TestSideFromHinge:
    def test_inverse_of_angle_example(self):
        assert side_from_hinge(ModelConfig(0), Hinge(1, 1, math.acosh(3.5), 1)) == pytest.approx(3.0, rel=1e-12)

    def test_zero_angle_adds(self):
        assert side_from_hinge(ModelConfig(0), Hinge(1, 2, 0.0, 1)) == pytest.approx(3.0)
        c = side_from_hinge(ModelConfig(-1), Hinge(math.pi / 4, math.pi / 4, 0.0, 1))
        assert c == pytest.approx(math.pi / 2, rel=1e-12)

    def test_spacelike_endpoints(self):
        with pytest.raises(NotRealisable):
            side_from_hinge(ModelConfig(0), Hinge(1, 1, 0.5, -1))

    def test_size_bound(self):
        with pytest.raises(SizeBoundViolation):
            side_from_hinge(ModelConfig(-1), Hinge(1.0, math.pi, 0.1, 1))
        with pytest.raises(SizeBoundViolation):
            side_from_hinge(ModelConfig(-1), Hinge(1.6, 1.6, 0.0, 1))

    def test_hinge_validation(self):
        with pytest.raises(ValueError):
            Hinge(1, 1, -0.1, 1)
        with pytest.raises(ValueError):
            Hinge(1, 1, 0.1, 2)
        assert Hinge(1, 1, 0.3, -1).signed_angle == -0.3

    @pytest.mark.parametrize("K", [-1, 0, 1])
    def test_matches_embedding(self, K):
        rng = np.random.default_rng(5 + K)
        cfg = ModelConfig(K)
        checked = 0
        while checked < 300:
            a, b = rng.uniform(0.05, 1.4, 2)
            om = rng.uniform(0, 2.5)
            s = int(rng.choice([-1, 1]))
            want = hinge_oracle(K, a, b, om, s)
            if want is None or want < 1e-3 or want >= cfg.D_K:
                continue
            assert side_from_hinge(cfg, Hinge(a, b, om, s)) == pytest.approx(want, rel=1e-9, abs=1e-12)
            checked += 1


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.05, 1.4), b=st.floats(0.05, 1.4), omega=st.floats(0.01, 3.0), sigma=st.sampled_from([-1, 1]))
def test_round_trip_side(K, a, b, omega, sigma):
    """side -> angle -> side is well conditioned and must close to rounding."""
    cfg = ModelConfig(K)
    try:
        c = side_from_hinge(cfg, Hinge(a, b, omega, sigma))
    except (NotRealisable, SizeBoundViolation):
        return
    assume(c > 1e-3)
    w = angle_from_sides(cfg, TriangleSides(a, b, c), sigma)
    assert side_from_hinge(cfg, Hinge(a, b, w, sigma)) == pytest.approx(c, rel=1e-9)


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
@settings(max_examples=200, deadline=None)
@given(pq=st.floats(0.05, 1.4), qr=st.floats(0.05, 1.4), gap=st.floats(0.0, 0.4))
def test_monotone_in_longest_side(K, pq, qr, gap):
    cfg = ModelConfig(K)
    pr = pq + qr + gap
    assume(pr + 1e-3 < min(cfg.D_K, 3.0))
    t0, t1 = CausalTriple(pq, qr, pr), CausalTriple(pq, qr, pr + 1e-3)
    for v in "pqr":
        assert vertex_angle(cfg, t1, v)[0] >= vertex_angle(cfg, t0, v)[0] - 1e-9


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
@settings(max_examples=200, deadline=None)
@given(pq=st.floats(0.05, 1.4), qr=st.floats(0.05, 1.4), gap=st.floats(2e-3, 0.4))
def test_monotone_in_short_side(K, pq, qr, gap):
    cfg = ModelConfig(K)
    pr = pq + qr + gap
    assume(pr < min(cfg.D_K, 3.0))
    t0, t1 = CausalTriple(pq, qr, pr), CausalTriple(pq + 1e-3, qr, pr)
    for v in "pqr":
        assert vertex_angle(cfg, t1, v)[0] <= vertex_angle(cfg, t0, v)[0] + 1e-9


class TestTriple:
    def test_signs(self):
        t = CausalTriple(1, 1, 3)
        assert vertex_angle(ModelConfig(0), t, "q")[1] == 1
        assert vertex_angle(ModelConfig(0), t, "p")[1] == -1
        assert vertex_angle(ModelConfig(0), t, "r")[1] == -1

    def test_reverse_triangle(self):
        assert CausalTriple(1, 1, 2.5).satisfies_reverse_triangle()
        assert not CausalTriple(1, 1, 1.5).satisfies_reverse_triangle()
        assert CausalTriple(1, 1, 2.5).excess() == pytest.approx(0.5)

    def test_bad_vertex(self):
        with pytest.raises(ValueError):
            CausalTriple(1, 1, 3).sides_at("x")


class TestComparisonPointDistance:
    cfg = ModelConfig(0)

    def test_vertices(self):
        t = CausalTriple(1.0, 1.2, 2.5)
        assert comparison_point_distance(self.cfg, t, ("pr", "pq"), 0.0, 1.0) == pytest.approx(1.0)

    def test_collinear_midpoints(self):
        t = CausalTriple(1.0, 1.0, 2.0)
        assert comparison_point_distance(self.cfg, t, ("pq", "qr"), 0.5, 0.5) == pytest.approx(1.0)

    def test_against_flat_embedding(self):
        a = math.sqrt(0.75)
        t = CausalTriple(a, a, 2.0)
        # p=(0,0), q=(1,0.5), r=(2,0): tau(p,q) = sqrt(0.75)
        m = (0.5, 0.25)
        want = math.sqrt((2 - m[0]) ** 2 - (0 - m[1]) ** 2)
        assert comparison_point_distance(self.cfg, t, ("pq", "qr"), 0.5, 1.0) == pytest.approx(want, rel=1e-12)

    def test_same_side(self):
        t = CausalTriple(1.0, 1.0, 3.0)
        assert comparison_point_distance(self.cfg, t, ("pr", "pr"), 0.2, 0.7) == pytest.approx(1.5)
        assert comparison_point_distance(self.cfg, t, ("pr", "pr"), 0.7, 0.2) == 0.0
        with pytest.raises(NotCausallyRelated):
            comparison_point_distance(self.cfg, t, ("pr", "pr"), 0.7, 0.2, strict=True)

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            comparison_point_distance(self.cfg, CausalTriple(1, 1, 3), ("pq", "qr"), 1.5, 0.2)

    def test_random_flat_triangles_match_coordinates(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = np.zeros(2)
            q = np.array([rng.uniform(0.5, 1.5), rng.uniform(-0.4, 0.4)])
            r = np.array([q[0] + rng.uniform(0.5, 1.5), q[1] + rng.uniform(-0.4, 0.4)])
            if abs(r[1] - q[1]) >= r[0] - q[0] or abs(r[1]) >= r[0]:
                continue
            tau = lambda a, b: math.sqrt(max(0.0, (b[0] - a[0]) ** 2 - (b[1] - a[1]) ** 2)) \
                if b[0] - a[0] > abs(b[1] - a[1]) else 0.0
            t = CausalTriple(tau(p, q), tau(q, r), tau(p, r))
            ends = {"pq": (p, q), "qr": (q, r), "pr": (p, r)}
            for s1, s2 in (("pq", "qr"), ("pq", "pr"), ("pr", "qr")):
                f1, f2 = rng.uniform(0, 1, 2)
                x = ends[s1][0] + f1 * (ends[s1][1] - ends[s1][0])
                y = ends[s2][0] + f2 * (ends[s2][1] - ends[s2][0])
                got = comparison_point_distance(self.cfg, t, (s1, s2), f1, f2)
                assert got == pytest.approx(tau(x, y), rel=1e-9, abs=1e-9)
