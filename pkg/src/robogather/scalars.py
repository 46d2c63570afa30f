"""Scalar backends and the plane point type.

All geometric decisions in the package (equality, enclosure, tie breaking)
are routed through a backend object so the same code runs bit-exact on
arbitrary-precision rationals and tolerance-aware on 64-bit floats.

Two backends are provided:

* ``ExactBackend`` -- coordinates are ``fractions.Fraction``; equality is
  decidable equality and every comparison is exact.
* ``FloatBackend`` -- coordinates are binary64 floats; two scalars compare
  equal iff ``|a - b| <= eps_abs + eps_rel * max(|a|, |b|)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

Scalar = Union[Fraction, float]


class Point(NamedTuple):
    """A location in the plane; equality and hashing are component-wise."""

    x: Scalar
    y: Scalar


@dataclass(frozen=True)
class ExactBackend:
    """Exact rational arithmetic; all comparisons are decidable."""

    name: str = "exact"
    is_exact: bool = True

    def scalar(self, value) -> Fraction:
        if isinstance(value, float):
            if not value.is_integer():
                raise TypeError(
                    "exact backend takes ints, Fractions or 'p/q' strings, "
                    f"not non-integral float {value!r}"
                )
            value = int(value)
        return Fraction(value)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        return a == b

    def le(self, a: Scalar, b: Scalar) -> bool:
        return a <= b

    def is_zero(self, a: Scalar) -> bool:
        return a == 0

    def point(self, x, y) -> Point:
        return Point(self.scalar(x), self.scalar(y))

    def origin(self) -> Point:
        return Point(Fraction(0), Fraction(0))

    def points_eq(self, p: Point, q: Point) -> bool:
        return p == q

    def format(self, a: Scalar) -> str:
        return str(a)

    def parse(self, text) -> Fraction:
        return Fraction(str(text))


@dataclass(frozen=True)
class FloatBackend:
    """Binary64 floats with a mixed absolute/relative equality tolerance."""

    eps_abs: float = 1e-9
    eps_rel: float = 1e-9
    name: str = "floating"
    is_exact: bool = False

    def scalar(self, value) -> float:
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        return abs(a - b) <= self.eps_abs + self.eps_rel * max(abs(a), abs(b))

    def le(self, a: Scalar, b: Scalar) -> bool:
        return a <= b or self.eq(a, b)

    def is_zero(self, a: Scalar) -> bool:
        return self.eq(a, 0.0)

    def point(self, x, y) -> Point:
        return Point(self.scalar(x), self.scalar(y))

    def origin(self) -> Point:
        return Point(0.0, 0.0)

    def points_eq(self, p: Point, q: Point) -> bool:
        return self.eq(p.x, q.x) and self.eq(p.y, q.y)

    def format(self, a: Scalar) -> str:
        return repr(float(a))

    def parse(self, text) -> float:
        return self.scalar(text)


Backend = Union[ExactBackend, FloatBackend]

EXACT = ExactBackend()
FLOAT64 = FloatBackend()


def get_backend(name: str, eps_abs: float | None = None, eps_rel: float | None = None) -> Backend:
    """Look up a backend by name ("exact" or "floating"), with optional eps overrides."""
    if name == "exact":
        return EXACT
    if name == "floating":
        if eps_abs is None and eps_rel is None:
            return FLOAT64
        return FloatBackend(
            eps_abs=FLOAT64.eps_abs if eps_abs is None else eps_abs,
            eps_rel=FLOAT64.eps_rel if eps_rel is None else eps_rel,
        )
    raise ValueError(f"unknown backend {name!r} (expected 'exact' or 'floating')")
