import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given

from conftest import general_sets
from projholes.exact_geom import PointSet, convex_hull_indices, convex_position, orientation
from projholes.fast_count import (
    DivisibilityError,
    _divide,
    chart_sides,
    count_affine_from_edge,
    count_projective_fast,
    count_projective_islands_fast,
    empty_3wedges_per_apex,
    fan_counts,
    largest_gon_fast,
    pair_charts,
    triangle_tables,
)
from projholes.generators import PENTAGON, gen_double_chain, gen_es_lower, gen_horton, gen_random_uniform
from projholes.oracle import chart_signature, count_empty_3wedges_with_apex, count_oracle, largest_projective_gon
from projholes.projective_model import (
    DoubleChainWedge,
    chart_for_pair,
    projective_gons_of_subset,
    wedge_interior_mask,
)


def random_set(n, seed):
    return gen_random_uniform(n, seed=[n, seed, 99])


def image_orientations(P, chart):
    return chart.apply_all(P).orientation_table.astype(int)


PAIR_CHARTS = [("parallel", "+"), ("parallel", "-"), ("crossing", "+"), ("crossing", "-")]


class TestSignAlgebra:
    @given(general_sets(3, 6))
    def test_sides_match_real_charts(self, P):
        O = P.orientation_table.astype(int)
        n = len(P)
        for s, t in combinations(range(n), 2):
            for (kind, side), (a, b, sig) in zip(PAIR_CHARTS, chart_sides(O, s, t)):
                chart = chart_for_pair(P, s, t, side, kind)
                real = np.array([chart.side(p) for p in P])
                g = int(real[0] * sig[0])
                assert np.array_equal(real, g * sig.astype(int))
                img = image_orientations(P, chart)
                pred = O * sig[:, None, None] * sig[None, :, None] * sig[None, None, :]
                nz = pred != 0
                ratio = set((img[nz] * pred[nz]).tolist())
                assert len(ratio) == 1
                # the anchor a -> b is a hull edge with all other points on one side
                h = ratio.pop()
                others = [p for p in range(n) if p not in (a, b)]
                assert all(h * img[a, b, p] > 0 for p in others) or all(h * img[a, b, p] < 0 for p in others)
                assert all(pred[a, b, p] > 0 for p in others)

    def test_pair_charts_shape(self):
        P = random_set(6, 0)
        A, B, S = pair_charts(P.orientation_table)
        assert len(A) == len(B) == len(S) == 4 * math.comb(6, 2)


def brute_T(P, i, j, k):
    return sum(
        1
        for p in range(len(P))
        if p not in (i, j, k)
        and len({orientation(P[i], P[j], P[p]), orientation(P[j], P[k], P[p]), orientation(P[k], P[i], P[p])}) == 1
    )


class TestTriangleTables:
    @pytest.mark.parametrize("seed", range(3))
    def test_against_brute_force(self, seed):
        P = random_set(8, seed)
        T, W = triangle_tables(P.orientation_table)
        for i, j, k in combinations(range(8), 3):
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j), (i, k, j)):
                assert T[a, b, c] == brute_T(P, a, b, c)
                mask = wedge_interior_mask(P, DoubleChainWedge((a,), (b, c)))
                assert W[a, b, c] == bin(mask).count("1")

    @pytest.mark.parametrize("kind, side", PAIR_CHARTS)
    def test_fan_counts_vs_images(self, kind, side):
        P = random_set(7, 5)
        O = P.orientation_table
        T, W = triangle_tables(O)
        for s, t in [(0, 1), (2, 5), (3, 6)]:
            idx = PAIR_CHARTS.index((kind, side))
            a, _, sig = chart_sides(O, s, t)[idx]
            cnt = fan_counts(T, W, np.array([a]), sig[None, :])[0]
            Q = chart_for_pair(P, s, t, side, kind).apply_all(P)
            for w, x in combinations([p for p in range(7) if p != a], 2):
                assert cnt[w, x] == brute_T(Q, a, w, x)


def brute_from_edge(P, s, t, k, holes):
    n = len(P)
    count = 0
    for I in combinations([p for p in range(n) if p not in (s, t)], k - 2):
        sub = [s, t, *I]
        hull = convex_hull_indices([P[i] for i in sub])
        if len(hull) != k:
            continue
        cyc = [sub[h] for h in hull]
        pos = cyc.index(s)
        if cyc[(pos + 1) % k] != t:
            continue
        if holes:
            others = [p for p in range(n) if p not in sub]
            if any(all(orientation(P[cyc[i]], P[cyc[(i + 1) % k]], P[p]) > 0 for i in range(k)) for p in others):
                continue
        count += 1
    return count


class TestAffineFromEdge:
    def test_pentagon(self):
        P = PointSet(PENTAGON)
        # vertex 0 is bottom-most and 1 is its ccw successor
        assert count_affine_from_edge(P, 0, 1, 5)[5] == 1

    def test_triangle_with_interior_point(self):
        P = PointSet([(0, 0), (6, 0), (0, 6), (1, 1)])
        gons = count_affine_from_edge(P, 0, 1, 3, "gons")
        holes = count_affine_from_edge(P, 0, 1, 3, "holes")
        assert gons[3] == 2 and holes[3] == 1

    @pytest.mark.parametrize("what", ["gons", "holes"])
    @pytest.mark.parametrize("seed", range(2))
    def test_against_brute_force(self, what, seed):
        P = random_set(8, seed)
        for s, t in [(0, 1), (1, 0), (3, 7), (6, 2)]:
            got = count_affine_from_edge(P, s, t, 8, what)
            for k in range(3, 9):
                assert got[k] == brute_from_edge(P, s, t, k, what == "holes")

    def test_edges_sum_to_affine_counts(self):
        P = random_set(10, 3)
        t = count_oracle(P, 6, "holes")
        totals = {k: 0 for k in range(3, 7)}
        for s in range(10):
            for u in range(10):
                if s != u:
                    for k, v in count_affine_from_edge(P, s, u, 6, "holes").items():
                        totals[k] += v
        assert all(totals[k] == k * t.get(k, "holes_affine") for k in totals)


class TestExclusivity:
    @pytest.mark.parametrize("seed", range(3))
    def test_each_gon_counted_once_per_edge(self, seed):
        """Every projective gon with s, t adjacent is an affine polygon with
        anchor edge s-t in exactly one of the four pair charts."""
        n = 7
        P = random_set(n, seed)
        O = P.orientation_table.astype(int)
        for s, t in combinations(range(n), 2):
            seen = []
            for a, b, sig in chart_sides(O, s, t):
                img = O * sig[:, None, None] * sig[None, :, None] * sig[None, None, :]
                for k in range(3, n + 1):
                    for I in combinations([p for p in range(n) if p not in (s, t)], k - 2):
                        sub = [a, b, *I]
                        # convex chain a, b, ... closing at a, in the sign-algebra image
                        rest = sorted(I, key=lambda p: sum(img[a, q, p] > 0 for q in I))
                        cyc = [a, b, *rest]
                        if all(img[cyc[i], cyc[(i + 1) % k], cyc[(i + 2) % k]] > 0 for i in range(k)):
                            seen.append(chart_signature(sig.tolist(), cyc))
            expected = []
            for k in range(3, n + 1):
                for I in combinations(range(n), k):
                    if s in I and t in I:
                        for G in projective_gons_of_subset(P, I):
                            cyc = G.cycle
                            i = cyc.index(s)
                            if t in (cyc[i - 1], cyc[(i + 1) % k]):
                                expected.append(G)
            assert len(seen) == len(set(seen))
            assert set(seen) == set(expected)


class TestProjectiveCounts:
    @given(general_sets(5, 5))
    def test_five(self, P):
        t = count_projective_fast(P, 5)
        assert [t.get(k, "gons_projective") for k in (3, 4, 5)] == [40, 15, 1]

    def test_perfect_horton_sixteen(self):
        t = count_projective_fast(gen_horton(16, perfect=True).points, 3, "holes")
        assert t.get(3, "holes_projective") == 570

    @pytest.mark.parametrize("n, seed", [(6, 0), (8, 1), (9, 2), (10, 3)])
    @pytest.mark.parametrize("what", ["gons", "holes"])
    def test_matches_oracle(self, n, seed, what):
        P = random_set(n, seed)
        assert count_projective_fast(P, n, what) == count_oracle(P, n, what)

    @pytest.mark.parametrize("n, seed", [(5, 0), (7, 1), (9, 2), (10, 4)])
    def test_islands_match_oracle(self, n, seed):
        P = random_set(n, seed)
        assert count_projective_islands_fast(P, n) == count_oracle(P, n, "islands")

    def test_triangle_with_point_islands(self):
        P = PointSet([(0, 0), (6, 0), (0, 6), (1, 1)])
        assert count_projective_islands_fast(P) == count_oracle(P, 4, "islands")

    @given(general_sets(4, 8))
    def test_monotone(self, P):
        n = len(P)
        g = count_projective_fast(P, n, "gons")
        h = count_projective_fast(P, n, "holes")
        isl = count_projective_islands_fast(P, n)
        for k in range(3, n + 1):
            assert h.get(k, "holes_projective") <= min(g.get(k, "gons_projective"), isl.get(k, "islands_projective"))
            assert h.get(k, "holes_affine") <= g.get(k, "gons_affine")

    def test_thread_count_irrelevant(self):
        P = random_set(14, 0)
        assert count_projective_fast(P, 6, "holes", threads=1) == count_projective_fast(P, 6, "holes", threads=4)

    def test_big_integer_path(self):
        n = 52
        t = count_projective_fast(random_set(n, 0), 5, "gons")
        assert [t.get(k, "gons_projective") for k in (3, 4, 5)] == [4 * math.comb(n, 3), 3 * math.comb(n, 4), math.comb(n, 5)]

    def test_divisibility_guard(self):
        assert _divide(12, 4, "x") == 3
        with pytest.raises(DivisibilityError):
            _divide(13, 4, "x")

    def test_bad_arguments(self):
        P = random_set(5, 0)
        with pytest.raises(ValueError):
            count_projective_fast(P, 6)
        with pytest.raises(ValueError):
            count_projective_fast(P, 4, "islands")


class TestLargestGon:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_oracle(self, seed):
        P = random_set(10, seed)
        assert largest_gon_fast(P) == largest_projective_gon(P)

    def test_es_lower(self):
        assert largest_gon_fast(gen_es_lower(12).points) == 8 < 12

    def test_double_chain(self):
        assert largest_gon_fast(gen_double_chain(3, 3)) == 6

    def test_convex(self):
        P = PointSet([(x, x * x) for x in range(8)])
        assert convex_position(list(P)) and largest_gon_fast(P) == 8


class TestEmptyWedges:
    @given(general_sets(3, 8))
    def test_matches_oracle(self, P):
        got = empty_3wedges_per_apex(P)
        assert got.tolist() == [count_empty_3wedges_with_apex(P, p) for p in range(len(P))]
