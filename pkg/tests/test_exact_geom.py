from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import general_sets, points, rationals
from projholes.exact_geom import (
    Certificate,
    GeneralPositionError,
    Orientation,
    Point,
    PointSet,
    PreconditionViolation,
    Violation,
    assert_general_position,
    co_segments_cross,
    convex_hull,
    convex_position,
    deep_below,
    orientation,
    orientation_table,
    point,
    to_rational,
)
from projholes.generators import gen_horton


def pts(*xy):
    return [point(x, y) for x, y in xy]


class TestRationals:
    def test_strings_and_ints(self):
        assert to_rational("6/4") == Fraction(3, 2)
        assert to_rational(-3) == Fraction(-3)
        assert to_rational(" 7 ") == 7

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            to_rational(0.5)

    def test_bad_denominator(self):
        with pytest.raises(ValueError):
            to_rational("1/0")
        with pytest.raises(ValueError):
            to_rational("1/-2")

    @given(rationals)
    def test_canonical(self, q):
        r = to_rational(f"{q.numerator * 3}/{q.denominator * 3}")
        assert r == q and r.denominator > 0


class TestOrientation:
    def test_examples(self):
        assert orientation(*pts((0, 0), (1, 0), (0, 1))) == Orientation.CCW == 1
        assert orientation(*pts((0, 0), (1, 1), (2, 2))) == 0
        assert orientation(*pts((0, 0), (0, 1), (1, 0))) == -1

    def test_exact_near_degenerate(self):
        big = 10 ** 30
        p, q = point(0, 0), point(big, big + 1)
        r = point(2 * big, 2 * big + 2)
        assert orientation(p, q, r) == 0
        assert orientation(p, q, point(2 * big, f"{(2 * big + 2) * 7 + 1}/7")) == 1

    @given(points, points, points)
    def test_antisymmetry(self, p, q, r):
        assert orientation(p, q, r) == -orientation(p, r, q)

    @given(points, points, points)
    def test_cyclic(self, p, q, r):
        assert orientation(p, q, r) == orientation(q, r, p)

    @given(general_sets(3, 7))
    def test_table_matches_predicate(self, P):
        O = orientation_table(P)
        for i, j, k in combinations(range(len(P)), 3):
            assert O[i, j, k] == orientation(P[i], P[j], P[k])
            assert O[i, k, j] == -O[i, j, k]


class TestGeneralPosition:
    def test_certificate(self):
        c = assert_general_position(pts((0, 0), (1, 0), (0, 1)))
        assert isinstance(c, Certificate) and c

    def test_violation(self):
        v = assert_general_position(pts((0, 0), (1, 1), (2, 2), (0, 1)))
        assert v == Violation(0, 1, 2) and not v

    def test_first_violation_is_lexicographic(self):
        v = assert_general_position(pts((5, 7), (0, 0), (3, 1), (1, 1), (2, 2)))
        assert (v.i, v.j, v.k) == (1, 3, 4)

    def test_duplicates(self):
        v = assert_general_position(pts((0, 0), (1, 0), (0, 0)))
        assert not v and v.k is None

    def test_pointset_rejects(self):
        with pytest.raises(GeneralPositionError):
            PointSet([(0, 0), (1, 1), (2, 2)])

    @pytest.mark.parametrize("n", [8, 16, 32, 64])
    def test_horton_certified(self, n):
        assert assert_general_position(gen_horton(n, seed=n).points)

    @given(st.lists(points, min_size=3, max_size=7))
    def test_agrees_with_brute_force(self, P):
        verdict = assert_general_position(P)
        distinct = len(set(P)) == len(P)
        brute = distinct and all(orientation(a, b, c) != 0 for a, b, c in combinations(P, 3))
        assert bool(verdict) == brute


class TestConvexity:
    def test_square(self):
        assert convex_position(pts((0, 0), (1, 0), (1, 1), (0, 1)))
        assert convex_hull(pts((0, 0), (1, 1), (1, 0), (0, 1))) == pts((0, 0), (1, 0), (1, 1), (0, 1))

    def test_triangle_with_centroid(self):
        tri = pts((0, 0), (3, 0), (0, 3), (1, 1))
        assert not convex_position(tri)
        assert sorted(convex_hull(tri)) == sorted(tri[:3])

    def test_parabola(self):
        assert convex_position([point(i, i * i) for i in range(5)])

    def test_singleton(self):
        assert convex_hull(pts((2, 3))) == pts((2, 3))

    @given(general_sets(3, 9))
    def test_hull_vertices_brute_force(self, P):
        hull = convex_hull(list(P))
        # a point is a hull vertex iff no triangle of other points contains it
        for p in P:
            others = [q for q in P if q != p]
            covered = any(
                len({orientation(a, b, p), orientation(b, c, p), orientation(c, a, p)}) == 1
                for a, b, c in combinations(others, 3)
            )
            assert (p in hull) == (not covered)
        k = len(hull)
        assert all(orientation(hull[i], hull[(i + 1) % k], hull[(i + 2) % k]) > 0 for i in range(k))
        if convex_position(list(P)):
            assert k == len(P)


class TestDeepBelow:
    def test_examples(self):
        assert deep_below(pts((0, 0), (2, 0)), pts((1, 100), (3, 101))) is True
        assert deep_below(pts((0, 0)), pts((1, 1))) is True

    def test_vertical_line_is_reported(self):
        res = deep_below(pts((0, 0)), pts((1, 1), (1, 5)))
        assert isinstance(res, PreconditionViolation) and not res

    def test_horton_layers(self):
        H = gen_horton(32, seed=3)
        for layer in H.layers():
            if not layer.is_leaf:
                lo = [H.points[i] for i in layer.lower.indices]
                hi = [H.points[i] for i in layer.upper.indices]
                assert deep_below(lo, hi) is True

    @given(general_sets(4, 8))
    def test_not_both_ways(self, P):
        xs = [p.x for p in P]
        if len(set(xs)) != len(xs):
            return
        X, Y = list(P)[: len(P) // 2], list(P)[len(P) // 2:]
        if len(X) >= 2 and len(Y) >= 2:
            assert not (deep_below(X, Y) and deep_below(Y, X))


def co_segments_by_sides(p, q, r, s):
    # the lines meet outside [p,q] iff p,q lie on one side of line rs, and vice versa
    return orientation(r, s, p) == orientation(r, s, q) and orientation(p, q, r) == orientation(p, q, s)


class TestCoSegments:
    def test_outside_both(self):
        assert co_segments_cross(*pts((0, 0), (1, 0), (0, 1), (1, 2)))

    def test_square_diagonals(self):
        assert not co_segments_cross(*pts((0, 0), (1, 1), (1, 0), (0, 1)))

    def test_parallel(self):
        assert co_segments_cross(*pts((0, 0), (1, 0), (0, 1), (1, 1)))

    @given(general_sets(4, 4))
    def test_symmetric_and_matches_side_test(self, P):
        p, q, r, s = P
        v = co_segments_cross(p, q, r, s)
        assert v == co_segments_cross(r, s, p, q) == co_segments_cross(q, p, s, r)
        assert v == co_segments_by_sides(p, q, r, s)

    def test_deterministic(self):
        args = pts((0, 0), (3, 1), ("1/3", 2), (5, "-7/2"))
        assert len({co_segments_cross(*args) for _ in range(5)}) == 1

    def test_point_type(self):
        assert isinstance(point(1, 2), Point) and isinstance(point(1, 2).x, Fraction)
