import math

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from chordbench.geometry import (HAUSDORFF, HORIZONTAL, RATIO, ContractError,
                                 GeometryError, Point, Segment, Triangle, chord_split,
                                 coverage_error, get_tolerance, is_chain, lower_envelope,
                                 metric_to_segment, ratio_distance, set_tolerance,
                                 triangle_area, triangle_contains)
from conftest import Q, interior_point, positive_points, sandwich_triangles

P = lambda x, y: Point(Q(x), Q(y))


class TestRatioDistance:
    def test_formula(self):
        assert ratio_distance(P(1, 1), P("3/2", 3)) == 2

    def test_identity_and_domination(self):
        assert ratio_distance(P(2, 3), P(2, 3)) == 0
        assert ratio_distance(P(2, 2), P(1, 1)) == 0

    def test_rejects_non_positive(self):
        with pytest.raises(GeometryError):
            ratio_distance(P(0, 1), P(1, 1))

    @given(positive_points(), st.integers(0, 1000))
    def test_scaling(self, p, n):
        eps = Q(n, 100)
        assert ratio_distance(p, Point((1 + eps) * p.x, (1 + eps) * p.y)) == eps


class TestMetricToSegment:
    seg = Segment(P(1, 2), P(2, 1))

    def test_ratio_closed_form(self):
        assert metric_to_segment(P(1, 1), self.seg, RATIO) == Q(1, 2)

    def test_ratio_against_discretization(self):
        # independent check: minimize RD over 2001 points of the segment
        p = P(1, 1)
        best = min(ratio_distance(p, Point(1 + Q(i, 2000), 2 - Q(i, 2000))) for i in range(2001))
        assert best == metric_to_segment(p, self.seg, RATIO)

    def test_horizontal(self):
        assert metric_to_segment(P(1, 1), self.seg, HORIZONTAL) == 1

    def test_hausdorff(self):
        assert metric_to_segment(P(1, 1), self.seg, HAUSDORFF) == pytest.approx(math.sqrt(0.5))

    @pytest.mark.parametrize("metric", [RATIO, HORIZONTAL, HAUSDORFF])
    def test_on_segment_is_zero(self, metric):
        assert metric_to_segment(P("3/2", "3/2"), self.seg, metric) == 0

    def test_horizontal_segment_rejected(self):
        with pytest.raises(GeometryError):
            metric_to_segment(P(1, 1), Segment(P(1, 2), P(3, 2)), HORIZONTAL)

    def test_ratio_clamps_to_endpoint(self):
        # the ray through p meets the line left of the segment
        seg = Segment(P(2, 2), P(4, 1))
        p = P(1, 3)
        assert metric_to_segment(p, seg, RATIO) == ratio_distance(p, seg.p)

    @given(positive_points(), positive_points(), positive_points())
    @settings(max_examples=60)
    def test_ratio_is_infimum(self, p, u, v):
        if u == v:
            return
        seg = Segment(u, v)
        d = metric_to_segment(p, seg, RATIO)
        for i in range(0, 33):
            t = Q(i, 32)
            z = Point(u.x + t * (v.x - u.x), u.y + t * (v.y - u.y))
            assert d <= ratio_distance(p, z)


class TestCoverageAndArea:
    def test_self_coverage(self):
        chain = [P(1, 3), P(2, 2), P(4, 1)]
        assert coverage_error(chain, chain, RATIO)[0] == 0

    def test_single_point(self):
        err, wit = coverage_error([P(1, 1)], [P(1, 2), P(2, 1)], RATIO)
        assert err == Q(1, 2) and wit == P(1, 1)

    def test_empty(self):
        assert coverage_error([], [P(1, 1)], RATIO) == (0, None)

    def test_ig_three_point_set(self, ig43):
        q = ig43.points
        a, b, q4 = P(1, 2), P(2, 1), q[4]
        err, wit = coverage_error(ig43.points, [a, q4, b], HORIZONTAL)
        assert err < Q(3, 8)
        assert wit == P(1, "5/4")

    def test_area(self):
        assert triangle_area(Triangle(P(0, 1), P(1, 0), P(0, 0))) == Q(1, 2)
        assert triangle_area(Triangle(P(0, 0), P(1, 1), P(2, 2))) == 0
        assert triangle_area(Triangle(P(1, 2), P(2, 1), P(1, 1))) == Q(1, 2)


class TestChordSplit:
    def test_symmetric_case(self):
        t = Triangle(P(0, 1), P(1, 0), P(0, 0))
        sp = chord_split(t, P("1/4", "1/4"))
        assert triangle_area(sp.left) + triangle_area(sp.right) == Q(1, 8)
        assert sp.y_ratio == Q(1, 2)

    def test_q_at_s_is_degenerate(self):
        t = Triangle(P(1, 3), P(3, 1), P(1, 1))
        sp = chord_split(t, t.s)
        assert triangle_area(sp.left) == triangle_area(sp.right) == 0

    def test_q_on_chord_rejected(self):
        t = Triangle(P(1, 3), P(3, 1), P(1, 1))
        with pytest.raises(ContractError):
            chord_split(t, P(2, 2))

    @given(sandwich_triangles(), st.integers(1, 50), st.integers(1, 50), st.integers(1, 50))
    @settings(max_examples=200)
    def test_area_identity_and_nesting(self, t, w1, w2, w3):
        q = interior_point(t, w1, w2, w3)
        sp = chord_split(t, q)
        y = sp.y_ratio
        total = triangle_area(sp.left) + triangle_area(sp.right)
        assert total == y * (1 - y) * triangle_area(t)
        assert 4 * total <= triangle_area(t)
        for child in (sp.left, sp.right):
            assert all(triangle_contains(t, v) for v in child)

    @given(sandwich_triangles(), st.integers(1, 10 ** 4))
    @settings(max_examples=200)
    def test_small_area_means_small_error(self, t, shrink):
        # scale the triangle about s until its area is at most eps^2 alpha^2
        eps = Q(1, 16)
        alpha = min(t.s.x, t.s.y)
        area = triangle_area(t)
        f = Q(1, shrink)
        while f * f * area > eps * eps * alpha * alpha:
            f /= 2
        l = Point(t.s.x + f * (t.l.x - t.s.x), t.s.y + f * (t.l.y - t.s.y))
        r = Point(t.s.x + f * (t.r.x - t.s.x), t.s.y + f * (t.r.y - t.s.y))
        assert metric_to_segment(t.s, Segment(l, r), RATIO) <= eps


class TestChains:
    def test_envelope_and_chain(self):
        pts = [P(1, 4), P(2, 2), P(3, 3), P(4, 1), P(3, "3/2"), P("5/2", "5/2")]
        env = lower_envelope(pts)
        assert env == [P(1, 4), P(2, 2), P(4, 1)]
        assert is_chain(env)
        assert not is_chain([P(1, 3), P(2, 2), P(3, 1)])  # collinear


def test_tolerance_configurable():
    old = get_tolerance()
    try:
        set_tolerance(1e-6)
        assert get_tolerance() == 1e-6
        with pytest.raises(ValueError):
            set_tolerance(-1)
    finally:
        set_tolerance(old)


@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 40), st.integers(1, 40),
       st.integers(1, 40), st.integers(1, 40), st.integers(1, 20), st.integers(1, 20))
@settings(max_examples=300)
def test_sandwich_inequality(w1, w2, w3, v1, v2, v3, hn, ln):
    H, L = Q(hn, 4), Q(ln, 16)
    a, b, c = Point(Q(1), 1 + H), Point(1 + L, Q(1)), P(1, 1)
    s1 = interior_point(Triangle(a, b, c), w1, w2, w3)
    c2 = Point(s1.x, Q(1))
    s2 = interior_point(Triangle(s1, b, c2), v1, v2, v3)
    seg = Segment(s1, b)
    lam = (s1.y - b.y) / (b.x - s1.x)
    rd = metric_to_segment(s2, seg, RATIO)
    hd = metric_to_segment(s2, seg, HORIZONTAL)
    assert rd < hd <= rd + L * L + L / lam
