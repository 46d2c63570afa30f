"""Planar geometry kernel: triangle classification, circumcircles, and the
smallest enclosing circle (SEC).

Circles store their radius *squared* so the exact backend stays closed under
rational arithmetic; every comparison the callers need is monotone in the
squared radius. The SEC is computed with Welzl's move-to-front algorithm
(expected linear time) behind a deterministic, seed-driven shuffle, and an
exhaustive brute-force oracle is provided for cross-checking.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import NamedTuple, Optional, Sequence

from .scalars import Backend, Point, Scalar


class GeometryError(Exception):
    pass


class DegenerateInput(GeometryError):
    """Two input points coincide where distinct points are required."""


class CollinearInput(GeometryError):
    """Three collinear points admit no circumcircle."""


class AmbiguousLongestSide(GeometryError):
    """No unique longest side exists (the triangle is not scalene)."""


class InputTooLarge(GeometryError):
    """Brute-force oracle refused an input beyond its size cap."""


class Circle(NamedTuple):
    center: Point
    radius_sq: Scalar


class TriangleKind(Enum):
    EQUILATERAL = "equilateral"
    ISOSCELES = "isosceles"
    SCALENE = "scalene"


@dataclass(frozen=True)
class TriangleShape:
    """Classification result; ``apex`` is set for isosceles triangles only.

    The apex is the vertex shared by the two equal sides, i.e. the vertex
    opposite the base. Here isosceles excludes equilateral.
    """

    kind: TriangleKind
    apex: Optional[Point] = None


def dist_sq(p: Point, q: Point) -> Scalar:
    """Squared euclidean distance; symmetric, zero iff the points coincide."""
    dx = p.x - q.x
    dy = p.y - q.y
    return dx * dx + dy * dy


def classify_triangle(p1: Point, p2: Point, p3: Point, backend: Backend) -> TriangleShape:
    """Classify a triangle by its squared side lengths.

    Invariant under any permutation of the inputs. Collinear-but-distinct
    points are still classified (purely by side lengths); callers that need
    a genuine triangle must check collinearity themselves.
    """
    for a, b in ((p1, p2), (p1, p3), (p2, p3)):
        if backend.points_eq(a, b):
            raise DegenerateInput(f"coincident points {a} and {b}")
    a2 = dist_sq(p2, p3)  # side opposite p1
    b2 = dist_sq(p1, p3)  # side opposite p2
    c2 = dist_sq(p1, p2)  # side opposite p3
    ab = backend.eq(a2, b2)
    bc = backend.eq(b2, c2)
    ac = backend.eq(a2, c2)
    # Two out of three equalities can only happen through tolerance
    # non-transitivity on floats; close it upward to equilateral.
    if ab + bc + ac >= 2:
        return TriangleShape(TriangleKind.EQUILATERAL)
    if ab:
        return TriangleShape(TriangleKind.ISOSCELES, apex=p3)
    if ac:
        return TriangleShape(TriangleKind.ISOSCELES, apex=p2)
    if bc:
        return TriangleShape(TriangleKind.ISOSCELES, apex=p1)
    return TriangleShape(TriangleKind.SCALENE)


def barycenter_3(p1: Point, p2: Point, p3: Point) -> Point:
    """Mean of three points; the minimizer of the sum of squared distances."""
    return Point((p1.x + p2.x + p3.x) / 3, (p1.y + p2.y + p3.y) / 3)


def opposite_of_max_side(p1: Point, p2: Point, p3: Point, backend: Backend) -> Point:
    """Vertex not incident to the strictly longest side (scalene triangles)."""
    sides = [
        (dist_sq(p2, p3), p1),
        (dist_sq(p1, p3), p2),
        (dist_sq(p1, p2), p3),
    ]
    sides.sort(key=lambda sv: sv[0], reverse=True)
    if backend.eq(sides[0][0], sides[1][0]):
        raise AmbiguousLongestSide("two sides tie for maximum length")
    return sides[0][1]


def _cross(o: Point, a: Point, b: Point) -> Scalar:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def circumcircle(p1: Point, p2: Point, p3: Point, backend: Backend) -> Circle:
    """The unique circle through three non-collinear points."""
    if backend.is_exact:
        return _circumcircle_rational(p1, p2, p3)
    d = 2 * _cross(p1, p2, p3)
    if backend.is_zero(d):
        raise CollinearInput(f"collinear points {p1}, {p2}, {p3}")
    n1 = p1.x * p1.x + p1.y * p1.y
    n2 = p2.x * p2.x + p2.y * p2.y
    n3 = p3.x * p3.x + p3.y * p3.y
    ux = (n1 * (p2.y - p3.y) + n2 * (p3.y - p1.y) + n3 * (p1.y - p2.y)) / d
    uy = (n1 * (p3.x - p2.x) + n2 * (p1.x - p3.x) + n3 * (p2.x - p1.x)) / d
    center = Point(ux, uy)
    return Circle(center, dist_sq(center, p1))


def _circumcircle_rational(p1: Point, p2: Point, p3: Point) -> Circle:
    """Same circle, computed over cleared-denominator integers.

    Scaling the points by the common denominator L scales the center by L
    and the squared radius by L²; native int arithmetic with three Fraction
    constructions at the end is several times faster than ~40 Fraction ops.
    """
    scale = lcm(
        p1.x.denominator,
        p1.y.denominator,
        p2.x.denominator,
        p2.y.denominator,
        p3.x.denominator,
        p3.y.denominator,
    )
    ax = p1.x.numerator * (scale // p1.x.denominator)
    ay = p1.y.numerator * (scale // p1.y.denominator)
    bx = p2.x.numerator * (scale // p2.x.denominator)
    by = p2.y.numerator * (scale // p2.y.denominator)
    cx = p3.x.numerator * (scale // p3.x.denominator)
    cy = p3.y.numerator * (scale // p3.y.denominator)
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise CollinearInput(f"collinear points {p1}, {p2}, {p3}")
    n1 = ax * ax + ay * ay
    n2 = bx * bx + by * by
    n3 = cx * cx + cy * cy
    ux = n1 * (by - cy) + n2 * (cy - ay) + n3 * (ay - by)
    uy = n1 * (cx - bx) + n2 * (ax - cx) + n3 * (bx - ax)
    center = Point(Fraction(ux, d * scale), Fraction(uy, d * scale))
    r_num = (ux - ax * d) ** 2 + (uy - ay * d) ** 2
    return Circle(center, Fraction(r_num, d * d * scale * scale))


def encloses(c: Circle, p: Point, backend: Backend) -> bool:
    """Is ``p`` inside or on ``c`` (boundary decided by backend tolerance)?"""
    return backend.le(dist_sq(c.center, p), c.radius_sq)


def on_circle(c: Circle, p: Point, backend: Backend) -> bool:
    """Is ``p`` on the boundary of ``c``?"""
    return backend.eq(dist_sq(c.center, p), c.radius_sq)


def _diameter_circle(p: Point, q: Point) -> Circle:
    center = Point((p.x + q.x) / 2, (p.y + q.y) / 2)
    return Circle(center, dist_sq(p, q) / 4)


# Fixed shuffle seed: sec() must be a deterministic function of the point
# *set* (we sort before shuffling), independent of caller ordering.
_SEC_SHUFFLE_SEED = 0x5EC


def sec(points: Sequence[Point], backend: Backend) -> Circle:
    """Smallest enclosing circle of a point list.

    Permutation- and duplication-invariant; ``sec([])`` is the zero circle
    at the origin. Welzl's move-to-front scheme: grow the circle point by
    point, rebuilding with one or two known boundary points on violation.
    """
    pts = sorted(set(points))
    if not pts:
        return Circle(backend.origin(), backend.scalar(0))
    random.Random(_SEC_SHUFFLE_SEED).shuffle(pts)
    c: Optional[Circle] = None
    for i, p in enumerate(pts):
        if c is None or not encloses(c, p, backend):
            c = _sec_one_point(pts[: i + 1], p, backend)
    assert c is not None
    return c


def _sec_one_point(pts: Sequence[Point], p: Point, backend: Backend) -> Circle:
    c = Circle(p, backend.scalar(0))
    for i, q in enumerate(pts):
        if not encloses(c, q, backend):
            if c.radius_sq == 0:
                c = _diameter_circle(p, q)
            else:
                c = _sec_two_points(pts[: i + 1], p, q, backend)
    return c


def _sec_two_points(pts: Sequence[Point], p: Point, q: Point, backend: Backend) -> Circle:
    circ = _diameter_circle(p, q)
    left: Optional[Circle] = None
    right: Optional[Circle] = None
    for r in pts:
        if encloses(circ, r, backend):
            continue
        cross = _cross(p, q, r)
        try:
            c = circumcircle(p, q, r, backend)
        except CollinearInput:
            continue
        cc = _cross(p, q, c.center)
        if cross > 0:
            if left is None or cc > _cross(p, q, left.center):
                left = c
        elif cross < 0:
            if right is None or cc < _cross(p, q, right.center):
                right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right  # type: ignore[return-value]
    if right is None:
        return left
    return left if left.radius_sq <= right.radius_sq else right


def on_sec(points: Sequence[Point], backend: Backend) -> list[Point]:
    """Deduplicated sublist of the input lying on the boundary of its SEC.

    Removing interior points does not change the SEC: sec(on_sec(l)) == sec(l).
    """
    c = sec(points, backend)
    out: list[Point] = []
    for p in points:
        if any(backend.points_eq(p, q) for q in out):
            continue
        if on_circle(c, p, backend):
            out.append(p)
    return out


def sec_bruteforce(points: Sequence[Point], backend: Backend, cap: int = 12) -> Circle:
    """Independent SEC oracle: try every circle determined by one point,
    each pair as a diameter, and each non-collinear triple; return the
    smallest one enclosing all input points.

    Exhaustive, so capped at ``cap`` distinct points.
    """
    pts = sorted(set(points))
    if len(pts) > cap:
        raise InputTooLarge(f"{len(pts)} distinct points exceed the cap of {cap}")
    if not pts:
        return Circle(backend.origin(), backend.scalar(0))
    candidates: list[Circle] = [Circle(p, backend.scalar(0)) for p in pts]
    for a, b in combinations(pts, 2):
        candidates.append(_diameter_circle(a, b))
    for a, b, c in combinations(pts, 3):
        try:
            candidates.append(circumcircle(a, b, c, backend))
        except CollinearInput:
            continue
    candidates.sort(key=lambda circ: circ.radius_sq)
    for circ in candidates:
        if all(encloses(circ, p, backend) for p in pts):
            return circ
    raise GeometryError("no enclosing candidate found (unreachable)")
