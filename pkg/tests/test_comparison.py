import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import random_flat_triangle, rapidity_angle
from lorlab import (
    AnalyticSpace,
    CausalTriple,
    ComparisonReport,
    DiscreteSpace,
    Hinge,
    ModelConfig,
    Region,
    angle_triangle_inequality_check,
    check_angle_condition,
    check_hinge_condition,
    check_triangle_condition,
    comparison_angle,
    make_triangle,
    measure_angle,
    side_from_hinge,
    sprinkle,
    verify_alexandrov_future,
)
from lorlab.comparison import (
    alexandrov_future_lengths,
    build_probe,
    check_triangle_all_modes,
    triangle_sample_plan,
)
from lorlab.errors import LorlabError, NoAdmissiblePairs, PreconditionFailed, SizeBoundViolation

K0, KM, KP = ModelConfig(0.0), ModelConfig(-1.0), ModelConfig(1.0)


class TestComparisonAngle:
    def test_middle_vertex(self):
        w, s = comparison_angle(K0, CausalTriple(1, 1, 3), "q")
        assert s == 1 and w == pytest.approx(math.acosh(3.5), rel=1e-12)

    def test_degenerate(self):
        assert comparison_angle(K0, CausalTriple(1, 1, 2), "q") == (0.0, 1)

    def test_endpoint(self):
        w, s = comparison_angle(K0, CausalTriple(1, 1, 3), "p")
        assert s == -1 and w == pytest.approx(math.acosh(1.5), rel=1e-12)

    def test_embedding(self):
        # p=(0,0), q on the t axis at 1, r chosen with tau(q,r)=1, tau(p,r)=3
        q = (1.0, 0.0)
        # r - q = (cosh w, sinh w) with 1 + 2 cosh w + 1 = 9 -> cosh w = 3.5
        w = math.acosh(3.5)
        r = (1.0 + math.cosh(w), math.sinh(w))
        assert rapidity_angle(q, (0, 0), r) == pytest.approx(comparison_angle(K0, CausalTriple(1, 1, 3), "q")[0])
        assert rapidity_angle((0, 0), q, r) == pytest.approx(comparison_angle(K0, CausalTriple(1, 1, 3), "p")[0])

    def test_signs_on_constructed_triangles(self, flat):
        rng = np.random.default_rng(0)
        for k in range(50):
            tri = make_triangle(flat, *random_flat_triangle(flat, rng), id=k)
            assert [comparison_angle(K0, tri, v)[1] for v in "pqr"] == [-1, 1, -1]


class TestMakeTriangle:
    def test_order_required(self, flat):
        with pytest.raises(PreconditionFailed):
            make_triangle(flat, (2, 0), (1, 0), (3, 0))

    def test_size_bound(self, flat):
        with pytest.raises(SizeBoundViolation):
            make_triangle(flat, (0.1, 0), (1.5, 0), (3.9, 0), KM)

    def test_one_null_side(self, flat):
        tri = make_triangle(flat, (0, 0), (1, 1), (3, 0))
        assert not tri.has_angle("p") and not tri.has_angle("q") and tri.has_angle("r")
        with pytest.raises(PreconditionFailed):
            check_angle_condition(flat, tri, K0, "p")
        assert check_angle_condition(flat, tri, K0, "r").holds

    def test_two_null_sides(self, flat):
        with pytest.raises(PreconditionFailed):
            make_triangle(flat, (0, 0), (1, 1), (2, 0))


class TestMeasureAngle:
    def test_analytic_exact(self, flat):
        rng = np.random.default_rng(1)
        for _ in range(30):
            p, q, r = random_flat_triangle(flat, rng)
            tri = make_triangle(flat, p, q, r)
            m = measure_angle(flat, q, p, r)
            assert m.exact and m.value == pytest.approx(rapidity_angle(q, p, r), abs=1e-12)
            assert m.value == pytest.approx(comparison_angle(K0, tri, "q")[0], abs=1e-9)

    def test_balanced_segments(self, flat):
        # y, x, z on one straight line: both halves make the same angle with a third realiser
        x, y, z = (2.0, 0.3), (1.0, 0.1), (3.0, 0.5)
        for a in [(0.5, 0.6), (3.5, 0.0), (2.9, 1.0)]:
            ang_y = measure_angle(flat, x, y, a).value
            ang_z = measure_angle(flat, x, z, a).value
            assert ang_y == pytest.approx(ang_z, abs=1e-12)
            assert ang_y == pytest.approx(rapidity_angle(x, y, a), abs=1e-12)

    def test_probe_constant_on_exact_lines(self):
        # points exactly on two straight rays from v: every scale pair gives the flat angle
        v = np.array([0.0, 0.0])
        u1 = np.array([math.cosh(0.2), math.sinh(0.2)])
        u2 = np.array([math.cosh(-0.5), math.sinh(-0.5)])
        pts = [v] + [s * u1 for s in np.linspace(0.1, 1.0, 10)] + [s * u2 for s in np.linspace(0.1, 1.0, 10)]
        sp = DiscreteSpace.from_coords(np.array(pts))
        probe = build_probe(sp, 0, 10, 20, K0, min_scale=0.0)
        assert len(probe.values) >= 3
        assert max(probe.values) - min(probe.values) < 1e-9
        assert probe.values[0] == pytest.approx(0.7, abs=1e-9)
        assert all(probe.scales[i][0] <= probe.scales[i + 1][0] for i in range(len(probe.scales) - 1))

    def test_no_pairs(self):
        sp = DiscreteSpace.from_coords(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.5]]))
        with pytest.raises(NoAdmissiblePairs):
            measure_angle(sp, 0, 1, 2, K0, min_scale=5.0)

    @pytest.mark.slow
    def test_discrete_estimate_4000(self):
        # statistical: chain jitter biases near-degenerate angles upward, so judge the distribution
        sp = sprinkle(Region.flat_diamond(hi=(4.0, 0.0)), 4000, 3, include_tips=True)
        C = sp.coords
        rng = np.random.default_rng(4)
        errs = []
        while len(errs) < 60:
            p, q, r = sorted(rng.choice(sp.n, 3, replace=False), key=lambda i: C[i, 0])
            if min(sp.tau(p, q), sp.tau(q, r)) < 0.3:
                continue
            for v, a, b in ((q, p, r), (p, q, r), (r, p, q)):
                exact = rapidity_angle(C[v], C[a], C[b])
                errs.append(abs(measure_angle(sp, v, a, b, K0).value - exact))
        errs = np.array(errs)
        assert np.mean(errs < 0.1) >= 0.9
        assert np.median(errs) < 0.05


class TestAngleCondition:
    @pytest.mark.parametrize("seed", range(5))
    def test_flat_zero_margin(self, flat, seed):
        rng = np.random.default_rng(seed)
        tri = make_triangle(flat, *random_flat_triangle(flat, rng))
        for v in "pqr":
            e = check_angle_condition(flat, tri, K0, v)
            assert e.holds and abs(e.margin) < 1e-9

    def test_flat_against_positive_curvature_holds(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        for v in "pqr":
            e = check_angle_condition(flat, tri, KP, v)
            assert e.holds and e.margin > 0.1

    def test_flat_against_negative_curvature_fails(self, flat):
        # with this sign convention flat space is not bounded below by -1
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        for v in "pqr":
            e = check_angle_condition(flat, tri, KM, v)
            assert not e.holds and e.margin < -0.1

    def test_margin_sign_convention(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        e = check_angle_condition(flat, tri, KP, "q")
        assert e.margin == pytest.approx(e.sigma * e.comparison - e.sigma * e.measured)


class TestHingeCondition:
    def test_flat_equality(self, flat):
        rng = np.random.default_rng(7)
        for _ in range(20):
            tri = make_triangle(flat, *random_flat_triangle(flat, rng))
            for v in "pqr":
                assert abs(check_hinge_condition(flat, tri, K0, v).margin) < 1e-9

    def test_round_trip(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        for cfg in (KM, K0, KP):
            for v in "pqr":
                sides, sigma = tri.triple.sides_at(v)
                w, _ = comparison_angle(cfg, tri, v)
                assert side_from_hinge(cfg, Hinge(sides.a, sides.b, w, sigma)) == \
                    pytest.approx(tri.opposite(v), rel=1e-9)

    def test_verdicts_follow_angle_condition(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        for cfg in (KM, KP):
            for v in "pqr":
                assert check_hinge_condition(flat, tri, cfg, v).holds == check_angle_condition(flat, tri, cfg, v).holds


class TestTriangleCondition:
    def test_flat_equality(self, flat):
        rng = np.random.default_rng(8)
        for k in range(10):
            tri = make_triangle(flat, *random_flat_triangle(flat, rng), id=k)
            e = check_triangle_condition(flat, tri, K0, samples=64, seed=k)
            assert e.holds and abs(e.margin) < 1e-9 and e.detail["samples"] == 64

    def test_vertices_only(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        e = check_triangle_condition(flat, tri, KM, samples=12)
        assert abs(e.margin) < 1e-12

    def test_sample_plan(self):
        plan = triangle_sample_plan(40, np.random.default_rng(0))
        assert len(plan) == 40
        assert plan[:4] == [("pq", 0.0, "qr", 0.0), ("pq", 0.0, "qr", 1.0), ("pq", 1.0, "qr", 0.0),
                            ("pq", 1.0, "qr", 1.0)]
        assert ("pq", 0.5, "qr", 0.5) in plan

    def test_discrete_flat(self):
        sp = sprinkle(Region.flat_diamond(hi=(2.0, 0.0)), 2000, 11, include_tips=True)
        rng = np.random.default_rng(2)
        margins = []
        while len(margins) < 12:
            p, r = sorted(rng.choice(sp.n, 2, replace=False))
            if sp.tau_matrix[p, r] < 0.8:
                continue
            inner = sp.timelike_diamond(p, r)
            inner = inner[(sp.tau_matrix[p, inner] >= 0.3) & (sp.tau_matrix[inner, r] >= 0.3)]
            if inner.size == 0:
                continue
            tri = make_triangle(sp, p, int(rng.choice(inner)), r, K0)
            margins.append(check_triangle_condition(sp, tri, K0, samples=32).margin)
        assert min(margins) >= -0.05

    def test_all_modes_agree_on_flat_backend(self, flat):
        rng = np.random.default_rng(9)
        for cfg in (KM, K0, KP):
            for _ in range(10):
                p, q, r = random_flat_triangle(flat, rng, min_side=0.2)
                try:
                    tri = make_triangle(flat, p, q, r, cfg)
                except SizeBoundViolation:
                    continue
                rep = check_triangle_all_modes(flat, tri, cfg)
                angle = {e.holds for e in rep.entries if e.mode == "angle"}
                hinge = {e.holds for e in rep.entries if e.mode == "hinge"}
                assert angle == hinge and len(angle) == 1


class TestAlexandrov:
    def test_flat_split_is_degenerate(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        x = flat.point_along(tri.p, tri.q, 0.5)
        res = verify_alexandrov_future(flat, tri, x, K0)
        assert res.by_angle == res.by_tau == "degenerate"
        assert res.tau_xr == pytest.approx(res.tau_tilde, rel=1e-12)

    def test_other_side(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        x = flat.point_along(tri.q, tri.r, 0.4)
        res = verify_alexandrov_future(flat, tri, x, K0, side="qr")
        assert res.by_tau == "degenerate" and res.agree

    @pytest.mark.parametrize("K", [-1.0, 1.0])
    def test_flat_in_curved_comparison(self, flat, K):
        rng = np.random.default_rng(10)
        cfg = ModelConfig(K)
        n = 0
        while n < 50:
            p, q, r = random_flat_triangle(flat, rng, min_side=0.1)
            try:
                tri = make_triangle(flat, p, q, r, cfg)
                res = verify_alexandrov_future(flat, tri, flat.point_along(p, q, rng.uniform(0.1, 0.9)), cfg)
            except (LorlabError, ValueError):
                continue
            assert res.agree
            assert res.by_tau != "degenerate"
            n += 1

    def test_bad_side(self, flat):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1))
        with pytest.raises(ValueError):
            verify_alexandrov_future(flat, tri, (1, 0), K0, side="pr")


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
@settings(max_examples=300, deadline=None)
@given(px=st.floats(0.05, 1.0), xq=st.floats(0.05, 1.0), qr=st.floats(0.05, 1.0),
       e1=st.floats(0.0, 0.6), e2=st.floats(0.0, 0.6))
def test_alexandrov_iff(K, px, xq, qr, e1, e2):
    """Random side data satisfying every reverse triangle inequality: both classifications agree."""
    cfg = ModelConfig(K)
    xr = xq + qr + e1
    pr = px + xr + e2
    assume(pr < min(cfg.D_K, 3.0))
    try:
        res = alexandrov_future_lengths(cfg, px, xq, qr, pr, xr)
    except LorlabError:
        return
    assert res.agree


class TestAngleTriangleInequality:
    def test_same_realiser(self, flat):
        v = (2.0, 0.0)
        res = angle_triangle_inequality_check(flat, v, (3.0, 0.2), (1.0, 0.1), (3.0, 0.2))
        assert res.lhs == 0.0 and res.holds

    def test_coplanar_equality(self, flat):
        v = (2.0, 0.0)
        res = angle_triangle_inequality_check(flat, v, (3.0, 0.5), (1.0, 0.0), (3.0, -0.4))
        assert res.holds

    def test_random(self, flat):
        rng = np.random.default_rng(11)
        v = (2.0, 0.0)
        for _ in range(1000):
            ra, rb, rc = rng.uniform(-1, 1, 3)
            a = (2.0 + math.cosh(ra), math.sinh(ra))
            c = (2.0 + 0.5 * math.cosh(rc), 0.5 * math.sinh(rc))
            b = (2.0 - 0.7 * math.cosh(rb), -0.7 * math.sinh(rb))
            assert angle_triangle_inequality_check(flat, v, a, b, c).holds

    def test_orientation_precondition(self, flat):
        with pytest.raises(PreconditionFailed):
            angle_triangle_inequality_check(flat, (2.0, 0.0), (3.0, 0.0), (3.0, 0.2), (3.0, 0.1))


class TestReport:
    def test_json_and_csv(self, flat, tmp_path):
        tri = make_triangle(flat, (0.2, 0), (1.3, 0.6), (2.5, 0.1), id=4)
        rep = check_triangle_all_modes(flat, tri, KM)
        assert not rep.holds and rep.failures
        doc = json.loads(rep.to_json())
        assert {d["mode"] for d in doc} == {"angle", "hinge", "triangle"}
        assert any(d["comparison"] == "nan" for d in doc)
        rep.sorted().write_csv(tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "triangle_id,vertex,mode,margin,verdict"
        assert all(line.startswith("4,") and line.endswith(",fails") for line in lines[1:])
        assert float(lines[1].split(",")[3]) == rep.sorted().entries[0].margin

    def test_extend(self):
        a, b = ComparisonReport(), ComparisonReport()
        a.extend(b)
        assert a.holds and a.failures == []
