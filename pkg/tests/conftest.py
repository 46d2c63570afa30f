"""Shared hypothesis strategies and helpers for the test suite."""
from __future__ import annotations

from fractions import Fraction

import hypothesis
from hypothesis import strategies as st

from robogather import frames
from robogather.scalars import EXACT, FLOAT64, Point

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=100, derandomize=True
)
hypothesis.settings.load_profile("default")


# --- exact-backend strategies ------------------------------------------------

rational = st.fractions(min_value=-20, max_value=20, max_denominator=8)

exact_points = st.builds(Point, rational, rational)

exact_point_lists = st.lists(exact_points, max_size=8)


def _unit_pair(t: Fraction) -> tuple[Fraction, Fraction]:
    den = 1 + t * t
    return (1 - t * t) / den, (2 * t) / den


rotation_params = st.fractions(min_value=-5, max_value=5, max_denominator=6)

zooms = st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10)


@st.composite
def exact_similarities(draw):
    zoom = draw(zooms)
    c, s = _unit_pair(draw(rotation_params))
    reflect = draw(st.booleans())
    tx = draw(rational)
    ty = draw(rational)
    return frames.Similarity(zoom, c, s, reflect, tx, ty)


# --- float-backend strategies ------------------------------------------------

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)

float_points = st.builds(Point, finite_floats, finite_floats)

float_point_lists = st.lists(float_points, max_size=10)


# --- helpers ------------------------------------------------------------------


def circles_eq(a, b, backend) -> bool:
    return backend.points_eq(a.center, b.center) and backend.eq(a.radius_sq, b.radius_sq)


def assert_points_close(p, q, tol=1e-9):
    assert abs(float(p.x) - float(q.x)) <= tol and abs(float(p.y) - float(q.y)) <= tol, (p, q)
