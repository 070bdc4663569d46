"""Shared strategies and helpers."""

from __future__ import annotations

import pytest
from gmpy2 import mpq
from hypothesis import assume, strategies as st

from chordbench.geometry import Point, Triangle

Q = mpq

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rationals(lo=1, hi=8, den=64):
    """Rationals in [lo, hi] with denominators up to ``den``."""
    return st.builds(lambda n, d: Q(n, d),
                     st.integers(lo * den, hi * den), st.just(den)) | st.builds(
        lambda n, d: lo + (hi - lo) * Q(n % (d + 1), d),
        st.integers(0, 10 ** 6), st.integers(1, den))


@st.composite
def positive_points(draw, lo=1, hi=8):
    return Point(draw(rationals(lo, hi)), draw(rationals(lo, hi)))


@st.composite
def sandwich_triangles(draw):
    """Triangles (l, r, s) with x(l) <= x(s) <= x(r), y(l) >= y(s) >= y(r) and s
    strictly below lr."""
    sx, sy = draw(rationals(1, 4)), draw(rationals(1, 4))
    dx_l = draw(rationals(0, 2))
    dy_l = draw(rationals(0, 2).filter(lambda v: v > 0))
    dx_r = draw(rationals(0, 2).filter(lambda v: v > 0))
    dy_r = draw(rationals(0, 2))
    l = Point(sx - dx_l * Q(1, 4), sy + dy_l)
    r = Point(sx + dx_r, sy - dy_r * Q(1, 4))
    t = Triangle(l, r, Point(sx, sy))
    # s strictly below the chord lr
    assume((r.x - l.x) * (t.s.y - l.y) - (r.y - l.y) * (t.s.x - l.x) < 0)
    return t


def interior_point(t: Triangle, w1, w2, w3) -> Point:
    """Barycentric combination with positive integer weights."""
    tot = w1 + w2 + w3
    return Point((w1 * t.l.x + w2 * t.r.x + w3 * t.s.x) / tot,
                 (w1 * t.l.y + w2 * t.r.y + w3 * t.s.y) / tot)


@pytest.fixture
def ig43():
    from chordbench.instances import gen_ig
    return gen_ig(1, 1, 4, 3)
