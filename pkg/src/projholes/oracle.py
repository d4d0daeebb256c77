"""Brute-force counters and classifiers.

Everything here follows the definitions literally: subsets are enumerated,
every projective gon on a subset is listed, and emptiness is decided point by
point.  Runtime is exponential; use :mod:`projholes.fast_count` for speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .exact_geom import PointSet, co_segments_cross, convex_hull_indices, orientation_table
from .generators import HortonSet
from .projective_model import (
    AFFINE,
    WEDGE,
    CountTable,
    DoubleChainWedge,
    GonSignature,
    _bits,
    _mask,
    enumerate_charts,
    enumerate_wedges,
    interior_mask,
    projective_gons_of_subset,
    wedge_interior_mask,
)

SIZE_GUARD = 20


class SizeGuardError(ValueError):
    pass


def _guard(P: PointSet, force: bool, limit: int = SIZE_GUARD) -> None:
    if len(P) > limit and not force:
        raise SizeGuardError(f"{len(P)} points exceeds the oracle limit of {limit}; pass force=True")


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _levels(P: PointSet, max_k: int, keep) -> Iterable[tuple[int, int, list[GonSignature]]]:
    """Yield ``(k, subset_mask, gons)`` level by level.

    A k-subset is examined only if each of its (k-1)-subsets passed ``keep``;
    both projective convex position and the existence of a projective hole
    are inherited by subsets, so nothing is lost.
    """
    n = len(P)
    previous: set[int] | None = None
    for k in range(3, max_k + 1):
        current: set[int] = set()
        if previous is None or k <= 5:
            subsets = (_mask(c) for c in combinations(range(n), k))
        else:
            subsets = _apriori(previous, n)
        for sub in subsets:
            gons = projective_gons_of_subset(P, _bits(sub))
            if keep(sub, gons):
                current.add(sub)
            yield k, sub, gons
        previous = current


def _apriori(previous: set[int], n: int) -> Iterable[int]:
    seen = set()
    for sub in previous:
        top = sub.bit_length()
        for extra in range(top, n):
            cand = sub | (1 << extra)
            if cand in seen:
                continue
            seen.add(cand)
            ok = True
            rest = cand
            while rest:
                low = rest & -rest
                rest ^= low
                if low != (1 << extra) and (cand ^ low) not in previous:
                    ok = False
                    break
            if ok:
                yield cand


def count_oracle(P: PointSet, max_k: int | None = None, what: str = "gons", force: bool = False) -> CountTable:
    """Exhaustive CountTable for ``what`` in {gons, holes, islands}."""
    n = len(P)
    if max_k is None:
        max_k = n
    if not 3 <= max_k <= n:
        raise ValueError("need 3 <= max_k <= |P|")
    if what not in ("gons", "holes", "islands"):
        raise ValueError("what must be gons, holes or islands")
    _guard(P, force)
    table = CountTable()
    for k in range(3, max_k + 1):
        if what == "islands":
            table.set(k, "islands_projective", 0)
        else:
            for s in ("affine", "wedge", "projective"):
                table.set(k, f"{what}_{s}", 0)

    if what == "gons":
        for k, _, gons in _levels(P, max_k, lambda s, g: bool(g)):
            aff = sum(1 for g in gons if g.kind == AFFINE)
            rec = table.row(k)
            rec.gons_affine += aff
            rec.gons_wedge += len(gons) - aff
            rec.gons_projective += len(gons)
    elif what == "holes":
        def has_hole(sub, gons):
            return any(interior_mask(P, g) == 0 for g in gons)

        for k, _, gons in _levels(P, max_k, has_hole):
            for g in gons:
                if interior_mask(P, g) == 0:
                    rec = table.row(k)
                    rec.holes_projective += 1
                    if g.kind == AFFINE:
                        rec.holes_affine += 1
                    else:
                        rec.holes_wedge += 1
    else:
        # every island is (hull signature, points inside); the inside set is
        # fixed by the signature, so each gon G yields the island V(G) + int(G)
        seen: set[tuple[GonSignature, int]] = set()
        for k, sub, gons in _levels(P, max_k, lambda s, g: bool(g)):
            for g in gons:
                inside = interior_mask(P, g)
                size = k + _popcount(inside)
                key = (g, sub | inside)
                if size <= max_k and key not in seen:
                    seen.add(key)
                    table.row(size).islands_projective += 1
    table.check()
    return table


def list_projective_holes(P: PointSet, k: int, force: bool = False) -> list[GonSignature]:
    _guard(P, force, limit=64)
    out = []
    for sub in combinations(range(len(P)), k):
        for g in projective_gons_of_subset(P, sub):
            if interior_mask(P, g) == 0:
                out.append(g)
    return out


# ----------------------------------------------------- chart-based routes


def chart_signature(sigma: Sequence[int], cycle: Sequence[int]) -> GonSignature:
    """Signature of the projective gon seen as an affine polygon in a chart.

    ``sigma[i]`` is the side of the removed line holding point i.  Vertices on
    one side form one chain, the rest the other; no split means the polygon
    avoids the original line at infinity.
    """
    plus = frozenset(v for v in cycle if sigma[v] > 0)
    minus = frozenset(v for v in cycle if sigma[v] < 0)
    if not plus or not minus:
        return GonSignature(AFFINE, frozenset(cycle), None, tuple(cycle))
    return GonSignature(WEDGE, frozenset(cycle), frozenset((plus, minus)), tuple(cycle))


def chart_images(P: PointSet, chart) -> tuple[PointSet, list[int]]:
    sigma = [chart.side(p) for p in P]
    return chart.apply_all(P), sigma


def gons_by_charts(P: PointSet, max_k: int | None = None, holes: bool = False) -> dict[int, set[GonSignature]]:
    """All projective gons (or holes) seen as affine polygons in some chart."""
    n = len(P)
    max_k = n if max_k is None else max_k
    found: dict[int, set[GonSignature]] = {k: set() for k in range(3, max_k + 1)}
    for chart in enumerate_charts(P):
        Q, sigma = chart_images(P, chart)
        O = Q.orientation_table
        for k in range(3, max_k + 1):
            for sub in combinations(range(n), k):
                hull = convex_hull_indices([Q[i] for i in sub])
                if len(hull) != k:
                    continue
                cyc = [sub[h] for h in hull]
                if holes:
                    others = [p for p in range(n) if p not in sub]
                    if any(all(O[cyc[i], cyc[(i + 1) % k], p] > 0 for i in range(k)) for p in others):
                        continue
                found[k].add(chart_signature(sigma, cyc))
    return found


def count_islands_by_charts(P: PointSet, max_k: int | None = None) -> dict[int, int]:
    """Islands as distinct (hull signature, member set) over all charts."""
    n = len(P)
    max_k = n if max_k is None else max_k
    keys: set[tuple[GonSignature, frozenset]] = set()
    for chart in enumerate_charts(P):
        Q, sigma = chart_images(P, chart)
        O = Q.orientation_table
        for k in range(3, max_k + 1):
            for sub in combinations(range(n), k):
                hull = convex_hull_indices([Q[i] for i in sub])
                if len(hull) < 3:
                    continue
                cyc = [sub[h] for h in hull]
                h = len(cyc)
                others = [p for p in range(n) if p not in sub]
                if any(all(O[cyc[i], cyc[(i + 1) % h], p] > 0 for i in range(h)) for p in others):
                    continue
                keys.add((chart_signature(sigma, cyc), frozenset(sub)))
    counts = {k: 0 for k in range(3, max_k + 1)}
    for _, members in keys:
        counts[len(members)] += 1
    return counts


def _largest_convex_subset(O: np.ndarray, order_key: list) -> int:
    """Classical DP: largest convex polygon, anchored at its lowest vertex."""
    n = O.shape[0]
    best = min(n, 2)
    for s in range(n):
        above = [p for p in range(n) if order_key[p] > order_key[s]]
        if len(above) + 1 <= best:
            continue
        # angular order around s inside the upper half-plane
        rank = {p: sum(1 for q in above if O[s, q, p] > 0) for p in above}
        above.sort(key=rank.__getitem__)
        m = len(above)
        if m < 2:
            continue
        idx = np.array(above)
        left = O[np.ix_(idx, idx, idx)] > 0  # left[i, j, k]: turn i -> j -> k
        closes = O[np.ix_(idx, idx, [s])][:, :, 0] > 0  # closes[i, j]: turn i -> j -> s
        # dp[i, j]: vertices on a convex chain s, ..., i, j (i before j)
        dp = np.zeros((m, m), dtype=np.int64)
        for j in range(m):
            dp[:j, j] = 3
        for j in range(m):
            for k in range(j + 1, m):
                cand = dp[:j, j][left[:j, j, k]]
                if cand.size:
                    dp[j, k] = max(dp[j, k], int(cand.max()) + 1)
        valid = np.triu(np.ones((m, m), dtype=bool), 1) & closes
        if valid.any():
            best = max(best, int(dp[valid].max()))
    return best


def largest_projective_gon(P: PointSet, force: bool = False) -> int:
    """Maximum over all charts of the largest affine convex subset."""
    if len(P) < 3:
        raise ValueError("need at least 3 points")
    _guard(P, force, limit=24)
    best = 3
    for chart in enumerate_charts(P):
        Q, _ = chart_images(P, chart)
        O = Q.orientation_table
        key = [(q.y, q.x) for q in Q]
        best = max(best, _largest_convex_subset(O, key))
        if best == len(P):
            break
    return best


# ------------------------------------------------------ open caps / cups


@dataclass(frozen=True)
class OpenCapCupStats:
    t2_caps: int
    t3_caps: int
    t2_cups: int
    t3_cups: int
    openud: int
    opendu: int

    @property
    def opendiag(self) -> int:
        return self.openud + self.opendu


def count_open_caps_cups(H: PointSet | HortonSet) -> OpenCapCupStats:
    """Exhaustive scan; points are taken in increasing x."""
    P = H.points if isinstance(H, HortonSet) else H
    n = len(P)
    order = sorted(range(n), key=lambda i: P[i].x)
    xs = [P[i].x for i in order]
    if len(set(xs)) != n:
        raise ValueError("x-coordinates must be distinct")
    O = P.orientation_table
    # below[i][j] (i < j in x order): some point strictly between lies below line ij
    below = [[False] * n for _ in range(n)]
    above = [[False] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = order[a], order[b]
            mids = order[a + 1 : b]
            # left of pa -> pb (pa left of pb) means above the line
            below[a][b] = any(O[pa, pb, m] < 0 for m in mids)
            above[a][b] = any(O[pa, pb, m] > 0 for m in mids)
    t2_caps = sum(1 for a in range(n) for b in range(a + 1, n) if not below[a][b])
    t2_cups = sum(1 for a in range(n) for b in range(a + 1, n) if not above[a][b])
    t3_caps = t3_cups = 0
    for a, b, c in combinations(range(n), 3):
        turn = O[order[a], order[b], order[c]]
        if turn < 0 and not (below[a][b] or below[b][c] or below[a][c]):
            t3_caps += 1
        if turn > 0 and not (above[a][b] or above[b][c] or above[a][c]):
            t3_cups += 1
    openud = opendu = 0
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = order[a], order[b]
            left_side = [O[pa, pb, order[i]] for i in range(a)]
            right_side = [O[pa, pb, order[i]] for i in range(b + 1, n)]
            if all(s < 0 for s in left_side) and all(s > 0 for s in right_side):
                openud += 1
            if all(s > 0 for s in left_side) and all(s < 0 for s in right_side):
                opendu += 1
    return OpenCapCupStats(t2_caps, t3_caps, t2_cups, t3_cups, openud, opendu)


def longest_cap_cup(P: PointSet) -> tuple[int, int]:
    """Sizes of the longest cap and the longest cup (x-monotone DP)."""
    n = len(P)
    order = sorted(range(n), key=lambda i: P[i].x)
    O = P.orientation_table
    best_cap = best_cup = min(n, 2)
    cap = [[2] * n for _ in range(n)]
    cup = [[2] * n for _ in range(n)]
    for b in range(n):
        for c in range(b + 1, n):
            for a in range(b):
                t = O[order[a], order[b], order[c]]
                if t < 0:
                    cap[b][c] = max(cap[b][c], cap[a][b] + 1)
                elif t > 0:
                    cup[b][c] = max(cup[b][c], cup[a][b] + 1)
            best_cap = max(best_cap, cap[b][c])
            best_cup = max(best_cup, cup[b][c])
    return best_cap, best_cup


# ------------------------------------------------------- Horton 3-holes


@dataclass(frozen=True)
class HoleTypeBreakdown:
    affine: int
    type1a: int
    type1b: int

    @property
    def total(self) -> int:
        return self.affine + self.type1a + self.type1b


def classify_3holes(H: HortonSet) -> HoleTypeBreakdown:
    P = H.points
    affine = t1a = t1b = 0
    for tri in combinations(range(len(P)), 3):
        for g in projective_gons_of_subset(P, tri):
            if interior_mask(P, g) != 0:
                continue
            if g.kind == AFFINE:
                affine += 1
                continue
            apex = next(iter(min(g.chains, key=len)))
            beta, gamma = sorted(g.vertices - {apex})
            base = H.base(tri)
            side = {i: H.sublayer_of(base, i) for i in tri}
            if side[beta] == side[gamma] != side[apex]:
                t1a += 1
            else:
                t1b += 1
    return HoleTypeBreakdown(affine, t1a, t1b)


# -------------------------------------------------- co-segment bounds


@dataclass(frozen=True)
class Prop5Record:
    S_size: int
    S_prime_size: int
    bound3: int
    bound4: int
    h3: int
    h4: int


def prop5_bounds(P: PointSet, force: bool = False) -> Prop5Record:
    n = len(P)
    pairs = list(combinations(range(n), 2))
    crossed = [False] * len(pairs)
    for x, y in combinations(range(len(pairs)), 2):
        p, q = pairs[x]
        r, s = pairs[y]
        if co_segments_cross(P[p], P[q], P[r], P[s]):
            crossed[x] = crossed[y] = True
    h3 = h4 = 0
    if n >= 3:
        t = count_oracle(P, min(4, n), "holes", force=force)
        h3 = t.get(3, "holes_affine")
        h4 = t.get(4, "holes_affine")
    s = math.comb(n, 2)
    return Prop5Record(
        S_size=s,
        S_prime_size=sum(crossed),
        bound3=h3 + -(-s // 3),
        bound4=h4 + -(-(s - 3 * n + 3) // 2),
        h3=h3,
        h4=h4,
    )


# ------------------------------------------------------- empty 3-wedges


def count_empty_3wedges_with_apex(P: PointSet, p: int) -> int:
    total = 0
    others = [i for i in range(len(P)) if i != p]
    for i, j in combinations(others, 2):
        if wedge_interior_mask(P, DoubleChainWedge((p,), (i, j))) == 0:
            total += 1
    return total


# --------------------------------------------------- affine hole listing


def enumerate_affine_holes(P: PointSet, max_k: int | None = None) -> list[tuple[int, ...]]:
    """Every affine hole as a ccw vertex cycle starting at its lowest vertex.

    Depth-first over convex chains around the lowest vertex; a chain is
    abandoned as soon as a fan triangle is non-empty, so the work is
    proportional to the number of empty chains.
    """
    n = len(P)
    max_k = n if max_k is None else max_k
    O = P.orientation_table
    key = [(q.y, q.x) for q in P]
    out: list[tuple[int, ...]] = []
    for s in range(n):
        above = [p for p in range(n) if key[p] > key[s]]
        if len(above) < 2:
            continue
        idx = np.array(above)
        sub = O[np.ix_([s], idx, idx)][0]  # sub[v, w] = O[s, v, w]
        above = [above[i] for i in np.argsort(-(sub > 0).sum(axis=1), kind="stable")]
        idx = np.array(above)
        m = len(above)
        # empty[v, w]: triangle s, above[v], above[w] holds no point
        in_sv = O[s][np.ix_(idx, np.arange(n))] > 0      # left of s -> v
        in_vw = O[np.ix_(idx, idx, np.arange(n))] > 0    # left of v -> w
        in_ws = O[np.ix_(idx, [s], np.arange(n))][:, 0, :] > 0  # left of w -> s
        empty = ~np.any(in_sv[:, None, :] & in_vw & in_ws[None, :, :], axis=2)
        pos = {v: i for i, v in enumerate(above)}

        def extend(chain):
            if len(chain) >= 3 and O[chain[-2], chain[-1], s] > 0:
                out.append(tuple(chain))
            if len(chain) == max_k:
                return
            last = chain[-1]
            for nxt in above[pos[last] + 1:]:
                if not empty[pos[last], pos[nxt]]:
                    continue
                if len(chain) >= 2 and O[chain[-2], last, nxt] <= 0:
                    continue
                chain.append(nxt)
                extend(chain)
                chain.pop()

        for v in above:
            extend([s, v])
    return out


# ------------------------------------------------- cluster construction


def check_cluster_properties(T, holes: list[tuple[int, ...]] | None = None) -> dict[str, bool]:
    """Direct scans of P2-P6 for a :class:`ClusterConstruction`.

    ``holes`` may pass a precomputed affine hole list of ``T.points``.
    """
    from .projective_model import DoubleChainWedge, _Separation

    P = T.points
    n = len(P)
    cl = T.clusters
    owner = T.cluster_of()
    result = {}

    O = P.orientation_table
    ok2 = True
    for members in cl.values():
        others = [i for i in range(n) if i not in set(members)]
        for h1, h2 in combinations(members, 2):
            s = O[h1, h2, others]
            ok2 &= bool((s > 0).all() or (s < 0).all())
    result["P2"] = ok2

    sep = _Separation(P)
    ok3 = True
    for members in cl.values():
        for t in range(n):
            if t in members:
                continue
            W = DoubleChainWedge(tuple(members), (t,))
            Am, Bm = _mask(W.A), _mask(W.B)
            cyc = W.cycle
            valid = all(sep.ok(cyc[i], cyc[(i + 1) % len(cyc)], Am, Bm) for i in range(len(cyc)))
            ok3 &= valid and wedge_interior_mask(P, W) == 0
    result["P3"] = ok3

    if holes is None:
        holes = enumerate_affine_holes(P)
    ok4 = ok5 = ok6 = True
    Hset = set(T.H)
    Hpts = PointSet([P[i] for i in T.H], check=False)
    Hpos = {v: i for i, v in enumerate(T.H)}
    OH = Hpts.orientation_table
    for X in holes:
        touched = {owner[v] for v in X if v in owner}
        ok4 &= len(touched) <= 2
        inside_one = len(touched) == 1 and all(v in owner for v in X)
        if not inside_one:
            for c in touched:
                part = [cl[c].index(v) for v in X if owner.get(v) == c]
                ok5 &= len(part) <= 2 and (len(part) < 2 or abs(part[0] - part[1]) == 1)
        collapsed = []
        for v in X:
            r = owner.get(v, v)
            if r not in collapsed:
                collapsed.append(r)
        if len(collapsed) >= 3:
            idx = [Hpos[r] for r in collapsed]
            hull = convex_hull_indices([Hpts[i] for i in idx])
            if len(hull) != len(idx):
                ok6 = False
                continue
            cyc = [idx[h] for h in hull]
            k = len(cyc)
            rest = [p for p in range(len(Hpts)) if p not in set(idx)]
            if any(all(OH[cyc[i], cyc[(i + 1) % k], p] > 0 for i in range(k)) for p in rest):
                ok6 = False
    assert Hset == set(Hpos)
    result["P4"] = ok4
    result["P5"] = ok5
    result["P6"] = ok6
    return result


def in_cluster_affine_holes(T, holes: list[tuple[int, ...]], k: int) -> int:
    owner = T.cluster_of()
    total = 0
    for X in holes:
        if len(X) == k and all(v in owner for v in X) and len({owner[v] for v in X}) == 1:
            total += 1
    return total


__all__ = [
    "check_cluster_properties",
    "in_cluster_affine_holes",
    "SIZE_GUARD",
    "SizeGuardError",
    "count_oracle",
    "list_projective_holes",
    "chart_signature",
    "gons_by_charts",
    "count_islands_by_charts",
    "largest_projective_gon",
    "OpenCapCupStats",
    "count_open_caps_cups",
    "longest_cap_cup",
    "HoleTypeBreakdown",
    "classify_3holes",
    "Prop5Record",
    "prop5_bounds",
    "count_empty_3wedges_with_apex",
    "enumerate_affine_holes",
    "orientation_table",
]
