"""Exact rational primitives for planar point sets.

Every predicate here works over :class:`fractions.Fraction` (or plain Python
integers after scaling to a common denominator), so results never depend on
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

Rational = Fraction


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a canonical Fraction.

    Floats are rejected on purpose; they cannot carry exact coordinates.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            den_i = int(den)
            if den_i <= 0:
                raise ValueError(f"denominator must be positive: {value!r}")
            return Fraction(int(num), den_i)
        return Fraction(int(text))
    raise TypeError(f"cannot use {type(value).__name__} as an exact coordinate")


class Point(NamedTuple):
    x: Fraction
    y: Fraction


def point(x, y) -> Point:
    return Point(to_rational(x), to_rational(y))


class Orientation(IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def orientation(p: Point, q: Point, r: Point) -> Orientation:
    """Sign of ``(q - p) x (r - p)``."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return Orientation(_sign(d))


@dataclass(frozen=True)
class Certificate:
    """Proof object: all ``C(n, 3)`` triples were checked and none is collinear."""

    n: int

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Violation:
    """Lexicographically first collinear triple ``i < j < k`` (or a duplicate pair)."""

    i: int
    j: int
    k: int | None = None

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        if self.k is None:
            return f"points {self.i} and {self.j} coincide"
        return f"points {self.i}, {self.j}, {self.k} are collinear"


@dataclass(frozen=True)
class PreconditionViolation:
    """Returned (not raised) when a predicate's precondition does not hold."""

    reason: str

    def __bool__(self) -> bool:
        return False


def _scaled_integers(points: Sequence[Point]) -> tuple[list[int], list[int], int]:
    den = 1
    for p in points:
        den = math.lcm(den, p.x.denominator, p.y.denominator)
    xs = [int(p.x * den) for p in points]
    ys = [int(p.y * den) for p in points]
    return xs, ys, den


def _direction_key(dx: int, dy: int) -> tuple[int, int]:
    g = math.gcd(dx, dy)
    dx //= g
    dy //= g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy


def assert_general_position(points: Sequence[Point] | "PointSet") -> Certificate | Violation:
    """Return a certificate, or the lexicographically first violating triple.

    Runs in ``O(n^2 log n)``: for each ``i`` the reduced directions towards
    ``j > i`` are bucketed, and a repeated direction exposes a collinear triple.
    """
    pts = points.points if isinstance(points, PointSet) else tuple(points)
    n = len(pts)
    xs, ys, _ = _scaled_integers(pts)
    seen: dict[tuple[int, int], int] = {}
    for i in range(n):
        key = (xs[i], ys[i])
        if key in seen:
            return Violation(seen[key], i)
        seen[key] = i
    for i in range(n - 2):
        buckets: dict[tuple[int, int], list[int]] = {}
        for j in range(i + 1, n):
            buckets.setdefault(_direction_key(xs[j] - xs[i], ys[j] - ys[i]), []).append(j)
        best = None
        for group in buckets.values():
            if len(group) > 1 and (best is None or (group[0], group[1]) < best):
                best = (group[0], group[1])
        if best is not None:
            return Violation(i, best[0], best[1])
    return Certificate(n)


class GeneralPositionError(ValueError):
    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation


class PointSet:
    """Immutable, indexed set of distinct rational points in general position."""

    __slots__ = ("points", "__dict__")

    def __init__(self, points: Iterable, *, check: bool = True):
        pts = tuple(p if isinstance(p, Point) and isinstance(p.x, Fraction) and isinstance(p.y, Fraction)
                    else point(*p) for p in points)
        self.points: tuple[Point, ...] = pts
        if check:
            verdict = assert_general_position(pts)
            if not verdict:
                raise GeneralPositionError(verdict)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"PointSet(n={len(self.points)})"

    @property
    def labels(self) -> range:
        return range(len(self.points))

    def subset(self, indices: Iterable[int]) -> "PointSet":
        return PointSet([self.points[i] for i in indices], check=False)

    @cached_property
    def integer_coordinates(self) -> tuple[list[int], list[int], int]:
        """Coordinates scaled by a common denominator and shifted to be >= 0."""
        xs, ys, den = _scaled_integers(self.points)
        if xs:
            mx, my = min(xs), min(ys)
            xs = [v - mx for v in xs]
            ys = [v - my for v in ys]
        return xs, ys, den

    @cached_property
    def orientation_table(self) -> np.ndarray:
        return orientation_table(self)

    @cached_property
    def side_masks(self) -> tuple[list[list[int]], list[list[int]]]:
        """Bitmasks ``left[p][q]`` / ``right[p][q]`` of points strictly left/right of p->q."""
        table = self.orientation_table
        n = len(self)
        left = [[0] * n for _ in range(n)]
        right = [[0] * n for _ in range(n)]
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                row = table[p, q]
                lm = 0
                rm = 0
                for r in np.flatnonzero(row > 0).tolist():
                    lm |= 1 << r
                for r in np.flatnonzero(row < 0).tolist():
                    rm |= 1 << r
                left[p][q] = lm
                right[p][q] = rm
        return left, right


def orientation_table(points: PointSet | Sequence[Point]) -> np.ndarray:
    """``O[i, j, k] = orientation(p_i, p_j, p_k)`` for all triples, as int8.

    Uses ``O[i,j,k] = sign(C[j,k] - C[i,k] + C[i,j])`` with ``C`` the matrix of
    cross products of scaled integer coordinates.  Falls back to Python
    integers (object arrays) when coordinates are too large for int64.
    """
    ps = points if isinstance(points, PointSet) else PointSet(points, check=False)
    xs, ys, _ = ps.integer_coordinates
    n = len(xs)
    if n == 0:
        return np.zeros((0, 0, 0), dtype=np.int8)
    big = max(max(xs), max(ys)) >= 1 << 29
    dtype = object if big else np.int64
    x = np.array(xs, dtype=dtype)
    y = np.array(ys, dtype=dtype)
    cross = np.outer(x, y) - np.outer(y, x)
    out = np.empty((n, n, n), dtype=np.int8)
    step = max(1, 4_000_000 // max(1, n * n))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        val = cross[None, :, :] - cross[lo:hi, None, :] + cross[lo:hi, :, None]
        out[lo:hi] = (val > 0).astype(np.int8) - (val < 0).astype(np.int8)
    return out


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Counterclockwise hull vertices (Andrew's monotone chain, collinear points dropped)."""
    return [points[i] for i in convex_hull_indices(points)]


def convex_hull_indices(points: Sequence[Point]) -> list[int]:
    order = sorted(set(range(len(points))), key=lambda i: (points[i].x, points[i].y))
    uniq: list[int] = []
    for i in order:
        if not uniq or points[uniq[-1]] != points[i]:
            uniq.append(i)
    if len(uniq) <= 2:
        return uniq

    def half(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2 and orientation(points[chain[-2]], points[chain[-1]], points[i]) <= 0:
                chain.pop()
            chain.append(i)
        return chain

    lower = half(uniq)
    upper = half(reversed(uniq))
    return lower[:-1] + upper[:-1]


def convex_position(points: Sequence[Point]) -> bool:
    """True iff every point is a (strict) vertex of the convex hull."""
    pts = list(points)
    if len(pts) < 3:
        return len(set(pts)) == len(pts)
    return len(convex_hull_indices(pts)) == len(pts)


def point_in_convex_polygon(q: Point, hull: Sequence[Point]) -> bool:
    """Strict interior test against a counterclockwise polygon."""
    k = len(hull)
    return all(orientation(hull[i], hull[(i + 1) % k], q) > 0 for i in range(k))


def _line_value(p: Point, q: Point, r: Point) -> Fraction | None:
    """Signed vertical offset of r above line pq, or None for vertical lines."""
    if p.x == q.x:
        return None
    slope = (q.y - p.y) / (q.x - p.x)
    return r.y - (p.y + slope * (r.x - p.x))


def deep_below(X: Sequence[Point], Y: Sequence[Point]) -> bool | PreconditionViolation:
    """True iff X lies deep below Y (and so Y lies high above X)."""
    X = list(X)
    Y = list(Y)
    for a, b in combinations(Y, 2):
        for x in X:
            v = _line_value(a, b, x)
            if v is None:
                return PreconditionViolation("vertical line through two points of Y")
            if v >= 0:
                return False
    for a, b in combinations(X, 2):
        for y in Y:
            v = _line_value(a, b, y)
            if v is None:
                return PreconditionViolation("vertical line through two points of X")
            if v <= 0:
                return False
    return True


def co_segments_cross(p: Point, q: Point, r: Point, s: Point) -> bool:
    """Do the projective complements of segments pq and rs share an interior point?

    Parallel lines meet at infinity, which is interior to both complements.
    Otherwise the lines meet at one affine point; it is interior to the
    complement of pq iff it is not on the closed segment pq.  Pairs sharing an
    endpoint meet only at that endpoint, so they never cross.
    """
    if len({p, q, r, s}) < 4:
        return False
    d1x, d1y = q.x - p.x, q.y - p.y
    d2x, d2y = s.x - r.x, s.y - r.y
    den = d1x * d2y - d1y * d2x
    if den == 0:
        return True
    # p + t*(q-p) = r + u*(s-r)
    wx, wy = r.x - p.x, r.y - p.y
    t = (wx * d2y - wy * d2x) / den
    u = (wx * d1y - wy * d1x) / den
    inside_pq = 0 < t < 1
    inside_rs = 0 < u < 1
    return not inside_pq and not inside_rs
