"""Exact constructions of the point families studied in this package.

Every generator is a pure function of its parameters and seed, and every
output is certified to be in general position before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .exact_geom import (
    Point,
    PointSet,
    assert_general_position,
    convex_hull_indices,
    deep_below,
    orientation,
    point_in_convex_polygon,
)

# ----------------------------------------------------------------- Horton


@dataclass(frozen=True)
class Layer:
    """A node of the Horton recursion; ``indices`` are sorted by x."""

    indices: tuple[int, ...]
    lower: Optional["Layer"] = None
    upper: Optional["Layer"] = None

    @property
    def is_leaf(self) -> bool:
        return self.lower is None

    def walk(self):
        yield self
        if not self.is_leaf:
            yield from self.lower.walk()
            yield from self.upper.walk()


@dataclass(frozen=True)
class HortonSet:
    points: PointSet
    layer_tree: Layer
    perfect: bool

    def __len__(self) -> int:
        return len(self.points)

    def layers(self) -> list[Layer]:
        return list(self.layer_tree.walk())

    def base(self, subset: Sequence[int]) -> Layer:
        """Smallest layer containing every index of ``subset``."""
        want = set(subset)
        node = self.layer_tree
        while not node.is_leaf:
            if want <= set(node.lower.indices):
                node = node.lower
            elif want <= set(node.upper.indices):
                node = node.upper
            else:
                break
        return node

    def sublayer_of(self, layer: Layer, index: int) -> str:
        """``"L"`` or ``"U"``: the child of ``layer`` holding ``index``."""
        if layer.is_leaf:
            raise ValueError("leaf layer has no children")
        return "L" if index in layer.lower.indices else "U"


def _horton_offsets(ranks: list[int], perfect: bool, rng: np.random.Generator | None) -> tuple[dict[int, int], Layer]:
    """Integer y-values (min 0) for the ranks of one layer, plus its subtree."""
    if len(ranks) == 1:
        return {ranks[0]: 0}, Layer(tuple(ranks))
    even = ranks[0::2]
    odd = ranks[1::2]
    if perfect or rng is None:
        lo_ranks, up_ranks = even, odd
    else:
        lo_ranks, up_ranks = (even, odd) if rng.integers(2) == 0 else (odd, even)
    ylo, tlo = _horton_offsets(lo_ranks, perfect, rng)
    yup, tup = _horton_offsets(up_ranks, perfect, rng)
    spread = max(max(ylo.values()), max(yup.values()), 1)
    depth = math.ceil(math.log2(len(ranks)))
    shift = 4 ** depth * spread
    y = dict(ylo)
    for r, v in yup.items():
        y[r] = v + shift
    return y, Layer(tuple(ranks), tlo, tup)


def gen_horton(n: int, perfect: bool = False, seed: int = 0) -> HortonSet:
    """Horton set on ``x = 0..n-1``.

    Each layer is split into even and odd x-ranks; the upper child is lifted
    by ``4**ceil(log2 |layer|)`` times the larger child spread.  Slopes inside
    a child are at most ``spread / (2 * gap)`` while horizontal distances are
    at most ``|layer| * gap``, so this shift certifies the deep-below relation.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = None if perfect else np.random.default_rng(seed)
    y, tree = _horton_offsets(list(range(n)), perfect, rng)
    pts = PointSet([(i, y[i]) for i in range(n)])
    return HortonSet(pts, tree, perfect)


def verify_horton(H: HortonSet) -> bool:
    """Exhaustive check of the deep-below relation at every internal layer."""
    for layer in H.layers():
        if layer.is_leaf:
            continue
        lo = [H.points[i] for i in layer.lower.indices]
        up = [H.points[i] for i in layer.upper.indices]
        if deep_below(lo, up) is not True:
            return False
    return True


# ------------------------------------------------------ squared Horton


@dataclass(frozen=True)
class SquaredHorton:
    t: int
    points: PointSet

    def index(self, i: int, j: int) -> int:
        return i * self.t + j

    def h(self, i: int, j: int) -> Point:
        return self.points[self.index(i, j)]


@dataclass(frozen=True)
class GenerationFailure:
    reason: str

    def __bool__(self) -> bool:
        return False


def _unit_offsets(t: int, rng: np.random.Generator) -> list[Fraction]:
    """Horton-style y-values on t ranks (seeded splits), scaled into [0, 1]."""
    y, _ = _horton_offsets(list(range(t)), False, rng)
    spread = max(max(y.values()), 1)
    return [Fraction(y[i], spread) for i in range(t)]


def gen_squared_horton(t: int, seed: int = 0) -> SquaredHorton | GenerationFailure:
    """Perturbed ``t x t`` lattice; point ``h_ij`` sits near ``(i, j)``.

    Row ``j`` gets a vertical Horton perturbation of size ``eps`` indexed by
    the column, and column ``i`` a horizontal one of size ``eps**3`` indexed
    by the row, with ``eps < 1/(4t)``.  Keeping the two scales far apart
    matters: with equal scales affine 7-holes appear from ``t = 5`` on, and
    with ``eps**2`` from ``t = 8`` on.  On a collinear
    triple the attempt is redrawn with the next sub-seed.
    """
    if t < 1:
        raise ValueError("t must be positive")
    for attempt in range(64):
        rng = np.random.default_rng([seed, attempt])
        ox = _unit_offsets(t, rng)
        oy = _unit_offsets(t, rng)
        eps = Fraction(1, 4 * t + 1 + attempt)
        pts = [(i + eps ** 3 * ox[j], j + eps * oy[i]) for i in range(t) for j in range(t)]
        verdict = assert_general_position([Point(Fraction(x), Fraction(y)) for x, y in pts])
        if verdict:
            return SquaredHorton(t, PointSet(pts, check=False))
    return GenerationFailure(f"no general-position squared Horton set for t={t} in 64 attempts")


# ------------------------------------------------------ lattice convex


@dataclass(frozen=True)
class LatticeConvex:
    t: int
    points: tuple[tuple[int, int], ...]

    @property
    def constant(self) -> float:
        """Reported c in ``|C1| >= c * t^(2/3)``."""
        return len(self.points) / self.t ** (2 / 3)


def gen_lattice_convex(t: int) -> LatticeConvex:
    """Greedy convex lattice polygon inside ``L(t x t)``.

    Primitive vectors are taken by increasing length (half-plane
    representatives); each accepted v contributes the edges v and -v, so the
    bounding box grows by ``(|vx|, |vy|)``.  Vertices are listed ccw.
    """
    if t < 2:
        raise ValueError("t must be at least 2")
    budget = t - 1
    vecs = []
    for dx in range(0, budget + 1):
        for dy in range(-budget, budget + 1):
            if (dx, dy) == (0, 0) or math.gcd(dx, dy) != 1:
                continue
            if dx == 0 and dy < 0:
                continue
            vecs.append((dx, dy))
    vecs.sort(key=lambda v: (v[0] ** 2 + v[1] ** 2, v))
    chosen = []
    w = h = 0
    for dx, dy in vecs:
        if w + abs(dx) <= budget and h + abs(dy) <= budget:
            chosen.append((dx, dy))
            w += abs(dx)
            h += abs(dy)
    edges = chosen + [(-dx, -dy) for dx, dy in chosen]
    edges.sort(key=lambda v: math.atan2(v[1], v[0]))
    x = y = 0
    verts = []
    for dx, dy in edges:
        verts.append((x, y))
        x += dx
        y += dy
    mx = min(v[0] for v in verts)
    my = min(v[1] for v in verts)
    verts = [(vx - mx, vy - my) for vx, vy in verts]
    start = min(range(len(verts)), key=lambda i: (verts[i][1], verts[i][0]))
    verts = verts[start:] + verts[:start]
    return LatticeConvex(t, tuple(verts))


# ------------------------------------------------------ cluster T(a, b)


@dataclass(frozen=True)
class ClusterConstruction:
    n: int
    a: int
    b: int
    alpha: Optional[Fraction]
    points: PointSet
    H: tuple[int, ...]
    clusters: dict[int, tuple[int, ...]]
    C1: tuple[tuple[int, int], ...]
    C3: tuple[tuple[int, int], ...]
    C3H: tuple[int, ...]
    C_prime: tuple[int, ...]
    C: tuple[int, ...]
    delta: dict[int, Fraction] = field(default_factory=dict)

    def cluster_of(self) -> dict[int, int]:
        return {i: c for c, members in self.clusters.items() for i in members}

    def annotations(self) -> dict:
        return {
            "n": self.n,
            "a": self.a,
            "b": self.b,
            "alpha": None if self.alpha is None else str(self.alpha),
            "H": list(self.H),
            "clusters": {str(c): list(m) for c, m in self.clusters.items()},
            "C1": [list(p) for p in self.C1],
            "C3": [list(p) for p in self.C3],
            "C3H": list(self.C3H),
            "C_prime": list(self.C_prime),
            "C": list(self.C),
            "delta": {str(c): str(d) for c, d in self.delta.items()},
        }


class InfeasibleParameters(ValueError):
    pass


def _cluster_points(c: Point, d: tuple[Fraction, Fraction], nu: tuple[Fraction, Fraction], b: int, delta: Fraction):
    js = [j - (b - 1) // 2 for j in range(b)]
    return [
        Point(c.x + delta * j * d[0] + delta * delta * j * j * nu[0],
              c.y + delta * j * d[1] + delta * delta * j * j * nu[1])
        for j in js
    ], js


def _orientation_rows(T: PointSet, rows: Sequence[int]) -> dict[int, np.ndarray]:
    """``{i: O[i, :, :]}`` for the given rows only, from exact integer coordinates."""
    xs, ys, _ = T.integer_coordinates
    x = np.array(xs, dtype=object)
    y = np.array(ys, dtype=object)
    out = {}
    for i in rows:
        dx = x - xs[i]
        dy = y - ys[i]
        val = np.outer(dx, dy) - np.outer(dy, dx)
        out[i] = ((val > 0).astype(np.int8) - (val < 0).astype(np.int8))
    return out


def check_P1(T: PointSet, H: Sequence[int], clusters: dict[int, Sequence[int]]) -> bool:
    """Order type of H survives replacing each c by any point of its cluster."""
    rep = np.arange(len(T))
    for c, members in clusters.items():
        for i in members:
            rep[i] = c
    idx = np.array(sorted(set(H) | {i for m in clusters.values() for i in m}))
    extras = [i for m in clusters.values() for i in m if rep[i] != i]
    rows = _orientation_rows(T, set(extras) | set(clusters))
    r = rep[idx]
    # every triple with an extra point rotates (cyclically) to start at it
    for e in extras:
        c = rep[e]
        keep = r != c
        q = idx[keep]
        rq = r[keep]
        got = rows[e][np.ix_(q, q)]
        want = rows[c][np.ix_(rq, rq)]
        distinct = rq[:, None] != rq[None, :]
        if not np.array_equal(got[distinct], want[distinct]):
            return False
    return True


def check_P2(T: PointSet, clusters: dict[int, Sequence[int]]) -> bool:
    """For h, h' in S_c all of T - S_c lies on one side of line hh'."""
    n = len(T)
    rows = _orientation_rows(T, {i for m in clusters.values() for i in m})
    for members in clusters.values():
        others = np.array([i for i in range(n) if i not in set(members)])
        for h1, h2 in combinations(members, 2):
            s = rows[h1][h2, others]
            if not (np.all(s > 0) or np.all(s < 0)):
                return False
    return True


def gen_cluster(n: int, a: int, b: int, alpha: Optional[Fraction] = None, seed: int = 0) -> ClusterConstruction:
    """Construction T(a, b): squared Horton points in a lattice-convex hull plus
    ``a`` clusters of ``b`` points on parabolic arcs tangent at hull vertices.

    Point order of the result: H first (with each chosen c at its own index),
    then the ``b - 1`` extra points of every cluster.
    """
    if a < 2 or b < 2:
        raise InfeasibleParameters("need a >= 2 and b >= 2")
    if a * b > n:
        raise InfeasibleParameters("need a * b <= n")
    side = math.isqrt(n)
    t1 = (side - 1) // 3 + 1
    if t1 < 2:
        raise InfeasibleParameters("n too small for a lattice-convex anchor set")
    C1 = gen_lattice_convex(t1).points
    C3 = tuple((3 * x, 3 * y) for x, y in C1)
    sq = gen_squared_horton(side, seed)
    if not sq:
        raise InfeasibleParameters(sq.reason)
    C3H_pts = [sq.h(i, j) for i, j in C3]
    hull = convex_hull_indices(C3H_pts)
    if len(hull) != len(C3H_pts):
        raise InfeasibleParameters("perturbed anchor set is not in convex position")
    hull_pts = [C3H_pts[i] for i in hull]
    # H = squared Horton points inside (or on) conv C3^H, in lattice order
    members = []
    for i in range(side):
        for j in range(side):
            p = sq.h(i, j)
            if p in hull_pts or point_in_convex_polygon(p, hull_pts):
                members.append(p)
    H_index = {p: k for k, p in enumerate(members)}
    C3H = tuple(H_index[p] for p in hull_pts)
    k = len(hull_pts)
    cprime_pos = list(range(0, k - (k % 2), 2))
    C_prime = tuple(C3H[i] for i in cprime_pos)
    if a > len(C_prime):
        raise InfeasibleParameters(f"a={a} exceeds |C'|={len(C_prime)}")
    chosen_pos = cprime_pos[:a]
    C = tuple(C3H[i] for i in chosen_pos)

    frames = {}
    for pos in chosen_pos:
        c = hull_pts[pos]
        prev, nxt = hull_pts[pos - 1], hull_pts[(pos + 1) % k]
        d = (nxt.x - prev.x, nxt.y - prev.y)
        nu = (d[1], -d[0])  # outward for a ccw hull
        frames[H_index[c]] = (c, d, nu)

    delta = Fraction(1, 8 * b)
    for _ in range(200):
        pts = list(members)
        clusters: dict[int, tuple[int, ...]] = {}
        for ci in C:
            c, d, nu = frames[ci]
            arc, js = _cluster_points(c, d, nu, b, delta)
            ids = []
            for p, j in zip(arc, js):
                if j == 0:
                    ids.append(ci)
                else:
                    ids.append(len(pts))
                    pts.append(p)
            clusters[ci] = tuple(ids)
        gp = assert_general_position(pts)
        if gp:
            T = PointSet(pts, check=False)
            H = tuple(range(len(members)))
            if check_P1(T, H, clusters) and check_P2(T, clusters):
                delta /= 2
                break
        delta /= 2
    else:
        raise InfeasibleParameters("could not place clusters")
    # rebuild at the final (halved once more) radius and re-certify
    pts = list(members)
    clusters = {}
    for ci in C:
        c, d, nu = frames[ci]
        arc, js = _cluster_points(c, d, nu, b, delta)
        ids = []
        for p, j in zip(arc, js):
            if j == 0:
                ids.append(ci)
            else:
                ids.append(len(pts))
                pts.append(p)
        clusters[ci] = tuple(ids)
    T = PointSet(pts)
    H = tuple(range(len(members)))
    assert check_P1(T, H, clusters) and check_P2(T, clusters)
    return ClusterConstruction(
        n=n, a=a, b=b, alpha=alpha, points=T, H=H, clusters=clusters, C1=C1, C3=C3,
        C3H=C3H, C_prime=C_prime, C=C, delta={c: delta for c in C},
    )


# ------------------------------------------------- cup-cap construction


@dataclass(frozen=True)
class EsLowerSet:
    k: int
    a: int
    u: int
    points: PointSet


def _max_abs_slope(pts: list[tuple[int, int]]) -> Fraction:
    best = Fraction(0)
    for (x1, y1), (x2, y2) in combinations(pts, 2):
        best = max(best, abs(Fraction(y2 - y1, x2 - x1)))
    return best


def _es_set(a: int, u: int, memo: dict) -> list[tuple[int, int]]:
    """Integer realization of S_{a,u}, normalized to min x = min y = 0."""
    if (a, u) in memo:
        return memo[(a, u)]
    if a <= 2 or u <= 2:
        out = [(0, 0)]
    else:
        left = _es_set(a, u - 1, memo)
        right = _es_set(a - 1, u, memo)
        wl = max(x for x, _ in left)
        dx = wl + 1
        width = dx + max(x for x, _ in right)
        sl = max(y for _, y in left)
        sr = max(y for _, y in right)
        slope = max(_max_abs_slope(left), _max_abs_slope(right))
        dy = sl + sr + math.ceil(4 * width * slope) + 1
        out = left + [(x + dx, y + dy) for x, y in right]
    memo[(a, u)] = out
    return out


def gen_es_lower(k: int) -> EsLowerSet:
    """``S_{a,a}`` with ``a = floor(k/2) - 1``: a left copy of ``S_{a,u-1}``
    deep below a right copy of ``S_{a-1,u}``."""
    if k < 7:
        raise ValueError("k must be at least 7")
    a = u = k // 2 - 1
    pts = _es_set(a, u, {})
    assert len(pts) == math.comb(a + u - 4, a - 2)
    return EsLowerSet(k, a, u, PointSet(pts))


# ------------------------------------------------------------ witnesses


PENTAGON = ((0, -10), (10, -3), (6, 8), (-6, 8), (-10, -3))


def gen_pentagon_center_witness() -> PointSet:
    """Convex pentagon p0..p4 followed by an interior point q avoiding every
    ear triangle ``p_i p_{i+1} p_{i+2}``."""
    pts = [Point(Fraction(x), Fraction(y)) for x, y in PENTAGON]
    q = Point(Fraction(0), Fraction(0))
    assert point_in_convex_polygon(q, pts)
    for i in range(5):
        tri = [pts[i], pts[(i + 1) % 5], pts[(i + 2) % 5]]
        assert not point_in_convex_polygon(q, tri)
    return PointSet(pts + [q])


# --------------------------------------------------------------- random


def _draw(rng: np.random.Generator, bits: int) -> int:
    nbytes = (bits + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bits)


def gen_random_uniform(n: int, shape: str = "square", seed: int = 0, grid_bits: int = 32) -> PointSet:
    """Uniform points on the ``2**-grid_bits`` grid in the unit square, or in
    the disk inscribed in it.  Collinear or repeated points are redrawn."""
    if n < 1:
        raise ValueError("n must be positive")
    if grid_bits < 20:
        raise ValueError("grid_bits must be at least 20")
    if shape not in ("square", "disk"):
        raise ValueError("shape must be 'square' or 'disk'")
    rng = np.random.default_rng(seed)
    size = 1 << grid_bits
    half = size >> 1

    def sample() -> tuple[int, int]:
        while True:
            x, y = _draw(rng, grid_bits), _draw(rng, grid_bits)
            if shape == "square" or (2 * x + 1 - size) ** 2 + (2 * y + 1 - size) ** 2 < size * size:
                return x, y

    raw = [sample() for _ in range(n)]
    while True:
        pts = [Point(Fraction(x, size), Fraction(y, size)) for x, y in raw]
        verdict = assert_general_position(pts)
        if verdict:
            return PointSet(pts, check=False)
        bad = verdict.j if verdict.k is None else verdict.k
        raw[bad] = sample()


# --------------------------------------------------------- double chain


def gen_double_chain(m: int, k_minus_m: int, seed: int = 0) -> PointSet:
    """A cap A (indices ``0..m-1``) facing a cup B (the rest), left to right.

    The cycle ``A`` then ``B`` is a double chain: consecutive edges inside a
    chain keep the other chain on the far side, and the two closing edges are
    the crossing diagonals.  Horizontal positions are seeded.
    """
    if m < 1 or k_minus_m < 1:
        raise ValueError("both chains must be nonempty")
    rng = np.random.default_rng(seed)

    def xs(count):
        vals = sorted(rng.choice(np.arange(-4 * count, 4 * count + 1), size=count, replace=False).tolist())
        return [Fraction(v) for v in vals]

    xa, xb = xs(m), xs(k_minus_m)
    curv = Fraction(1, 64 * (m + k_minus_m) ** 2)
    height = Fraction(1)
    for _ in range(64):
        A = [(x, -height - curv * x * x) for x in xa]
        B = [(x, height + curv * x * x) for x in xb]
        pts = [Point(*p) for p in A + B]
        if assert_general_position(pts):
            P = PointSet(pts, check=False)
            if is_double_chain(P, tuple(range(m)), tuple(range(m, m + k_minus_m))):
                return P
        curv /= 2
        height *= 2
    raise RuntimeError("double chain construction did not validate")


def is_double_chain(P: PointSet, A: Sequence[int], B: Sequence[int]) -> bool:
    """Check the separation invariant along the cyclic order ``A + B``."""
    cyc = list(A) + list(B)
    k = len(cyc)
    Aset, Bset = set(A), set(B)
    for i in range(k):
        p, q = cyc[i], cyc[(i + 1) % k]
        ra = [r for r in Aset if r not in (p, q)]
        rb = [r for r in Bset if r not in (p, q)]
        if not ra or not rb:
            continue
        sa = {int(orientation(P[p], P[q], P[r])) for r in ra}
        sb = {int(orientation(P[p], P[q], P[r])) for r in rb}
        if len(sa) != 1 or len(sb) != 1 or sa == sb:
            return False
    return True
