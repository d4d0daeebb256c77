"""Projective semantics inside a fixed affine chart.

A projective k-gon on a vertex set I is either the affine convex polygon on I
or a double chain k-wedge.  Both are encoded as :class:`GonSignature`.
Subsets are handled internally as integer bitmasks over the indices of the
ambient :class:`PointSet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .exact_geom import Point, PointSet, convex_hull_indices, orientation

AFFINE = "affine_polygon"
WEDGE = "wedge"

COUNT_FIELDS = (
    "gons_affine",
    "gons_wedge",
    "gons_projective",
    "holes_affine",
    "holes_wedge",
    "holes_projective",
    "islands_projective",
)


# --------------------------------------------------------------------- charts


@dataclass(frozen=True)
class Chart:
    """Invertible 3x3 integer matrix acting on homogeneous ``(x, y, 1)``.

    The third row is the equation of the line sent to infinity.
    """

    matrix: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("chart matrix is singular")

    @property
    def det(self) -> int:
        (a, b, c), (d, e, f), (g, h, i) = self.matrix
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def homogeneous(self, p: Point) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(r[0] * p.x + r[1] * p.y + r[2] for r in self.matrix)

    def side(self, p: Point) -> int:
        z = self.homogeneous(p)[2]
        return (z > 0) - (z < 0)

    def apply(self, p: Point) -> Point:
        X, Y, Z = self.homogeneous(p)
        if Z == 0:
            raise ValueError("point is sent to infinity by this chart")
        return Point(X / Z, Y / Z)

    def apply_all(self, P: PointSet | Sequence[Point]) -> PointSet:
        return PointSet([self.apply(p) for p in P], check=False)

    def inverse_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        m = self.matrix
        det = Fraction(self.det)
        cof = [[0] * 3 for _ in range(3)]
        for r in range(3):
            for c in range(3):
                rows = [i for i in range(3) if i != r]
                cols = [j for j in range(3) if j != c]
                minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]
                cof[r][c] = (-1) ** (r + c) * minor
        return tuple(tuple(Fraction(cof[c][r]) / det for c in range(3)) for r in range(3))


IDENTITY = Chart(((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def _chart_from_line(a: Fraction, b: Fraction, c: Fraction, avoid: Point | None) -> Chart:
    """Chart sending ``a x + b y = c`` to infinity.

    Rows one and two translate by ``tau``; ``tau`` is the origin unless the
    line passes through it, in which case ``avoid`` (a point off the line) is
    used, keeping the matrix invertible.
    """
    if c != 0:
        tx, ty = Fraction(0), Fraction(0)
    else:
        tx, ty = avoid.x, avoid.y
    rows = [[Fraction(1), Fraction(0), -tx], [Fraction(0), Fraction(1), -ty], [a, b, -c]]
    den = 1
    for row in rows:
        for v in row:
            den = math.lcm(den, v.denominator)
    mat = tuple(tuple(int(v * den) for v in row) for row in rows)
    chart = Chart(mat)
    assert chart.det != 0
    return chart


def chart_for_pair(P: PointSet, s: int, t: int, side: str, kind: str = "parallel") -> Chart:
    """Chart whose line at infinity hugs the line through ``s`` and ``t``.

    ``kind="parallel"``: the removed line is parallel to st at offset ``eps``
    on ``side`` ('+' = left of s->t), with ``eps`` half the smallest nonzero
    distance-proxy on that side (1 if that side is empty).  Projective gons
    whose s-t edge is the affine segment st become convex in one of these two.

    ``kind="crossing"``: the removed line passes through the midpoint of st and
    is turned by a small rational angle ('+' turns counterclockwise).  Gons
    whose s-t edge runs through infinity become convex in one of these two.
    """
    if s == t:
        raise ValueError("s and t must differ")
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    ps, pt = P[s], P[t]
    ux, uy = pt.x - ps.x, pt.y - ps.y
    others = [P[i] for i in range(len(P)) if i not in (s, t)]

    def v(p: Point) -> Fraction:
        return ux * (p.y - ps.y) - uy * (p.x - ps.x)

    values = [v(p) for p in others]
    # v(p) = a*x + b*y - c with:
    a, b = -uy, ux
    c = a * ps.x + b * ps.y
    if kind == "parallel":
        if side == "+":
            pos = [w for w in values if w > 0]
            eps = min(pos) / 2 if pos else Fraction(1)
            line = (a, b, c + eps)
        else:
            neg = [-w for w in values if w < 0]
            eps = min(neg) / 2 if neg else Fraction(1)
            line = (a, b, c - eps)
    elif kind == "crossing":
        mx, my = (ps.x + pt.x) / 2, (ps.y + pt.y) / 2
        sgn = 1 if side == "+" else -1
        delta = Fraction(1)
        while True:
            dx, dy = ux - sgn * delta * uy, uy + sgn * delta * ux
            ok = True
            for p, w in zip(others, values):
                lv = dx * (p.y - my) - dy * (p.x - mx)
                if (lv > 0) != (w > 0) or lv == 0:
                    ok = False
                    break
            if ok:
                break
            delta /= 2
        la, lb = -dy, dx
        line = (la, lb, la * mx + lb * my)
    else:
        raise ValueError("kind must be 'parallel' or 'crossing'")
    la, lb, lc = line
    # only consulted when the line passes through the origin
    avoid = next((q for q in (Point(Fraction(1), Fraction(0)), Point(Fraction(0), Fraction(1)))
                  if la * q.x + lb * q.y != lc), None)
    return _chart_from_line(la, lb, lc, avoid)


def enumerate_charts(P: PointSet) -> list[Chart]:
    """Identity followed by four charts per pair (two parallel, two crossing)."""
    if len(P) < 3:
        raise ValueError("need at least 3 points")
    charts = [IDENTITY]
    for s, t in combinations(range(len(P)), 2):
        for kind in ("parallel", "crossing"):
            for side in ("+", "-"):
                charts.append(chart_for_pair(P, s, t, side, kind))
    return charts


# ------------------------------------------------------------------ wedges


@dataclass(frozen=True)
class DoubleChainWedge:
    A: tuple[int, ...]
    B: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def k(self) -> int:
        return len(self.A) + len(self.B)

    @property
    def cycle(self) -> tuple[int, ...]:
        return self.A + self.B

    def edges_of_A(self) -> list[tuple[int, int]]:
        """Edges s_i s_{i+1} for i = 0..m (indices mod k), i.e. all edges touching A."""
        cyc = self.cycle
        k = len(cyc)
        return [(cyc[(i - 1) % k], cyc[i % k]) for i in range(0, self.m + 1)]

    def edges_of_B(self) -> list[tuple[int, int]]:
        cyc = self.cycle
        k = len(cyc)
        return [(cyc[(i - 1) % k], cyc[i % k]) for i in range(self.m, k + 1)]


def canonical_wedge(A: Sequence[int], B: Sequence[int]) -> DoubleChainWedge:
    """Normal form under the A<->B swap and simultaneous reversal."""
    A, B = tuple(A), tuple(B)
    if min(B) < min(A):
        A, B = B, A
    rev = (A[::-1], B[::-1])
    if len(A) > 1:
        if A[0] > A[-1]:
            A, B = rev
    elif len(B) > 1 and B[0] > B[-1]:
        A, B = rev
    return DoubleChainWedge(A, B)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class _Separation:
    """Edge test ``line pq strictly separates A - {p,q} from B - {p,q}`` on masks."""

    def __init__(self, P: PointSet):
        self.left, self.right = P.side_masks

    def ok(self, p: int, q: int, A: int, B: int) -> bool:
        pq = (1 << p) | (1 << q)
        a = A & ~pq
        b = B & ~pq
        if not a or not b:
            return True
        L = self.left[p][q]
        R = self.right[p][q]
        return (a & ~L == 0 and b & ~R == 0) or (a & ~R == 0 and b & ~L == 0)


def _hamiltonian_paths(nodes: list[int], adj: dict[int, set[int]]) -> list[tuple[int, ...]]:
    if len(nodes) == 1:
        return [(nodes[0],)]
    paths = []
    total = len(nodes)

    def extend(path, used):
        if len(path) == total:
            paths.append(tuple(path))
            return
        for nxt in adj[path[-1]]:
            if nxt not in used:
                used.add(nxt)
                path.append(nxt)
                extend(path, used)
                path.pop()
                used.discard(nxt)

    for start in nodes:
        extend([start], {start})
    return paths


def _wedges_for_partition(sep: _Separation, A: list[int], B: list[int]) -> list[DoubleChainWedge]:
    Am, Bm = _mask(A), _mask(B)

    def adjacency(nodes):
        adj = {v: set() for v in nodes}
        for p, q in combinations(nodes, 2):
            if sep.ok(p, q, Am, Bm):
                adj[p].add(q)
                adj[q].add(p)
        return adj

    adjA, adjB = adjacency(A), adjacency(B)
    if len(A) > 1 and any(not nb for nb in adjA.values()):
        return []
    if len(B) > 1 and any(not nb for nb in adjB.values()):
        return []
    out = []
    pathsA = _hamiltonian_paths(A, adjA)
    if not pathsA:
        return []
    pathsB = _hamiltonian_paths(B, adjB)
    for pa in pathsA:
        for pb in pathsB:
            if sep.ok(pa[-1], pb[0], Am, Bm) and sep.ok(pb[-1], pa[0], Am, Bm):
                out.append(canonical_wedge(pa, pb))
    return out


def enumerate_wedges(P: PointSet, I: Sequence[int]) -> list[DoubleChainWedge]:
    """All double chain wedges on the index subset ``I``, each exactly once.

    The smallest index ``i0`` of I is a vertex of every wedge, and for a wedge
    edge ``(i0, q)`` the rest of I splits along line i0-q exactly as A and B
    do.  That yields at most seven candidate partitions per ``q``; each
    candidate is then checked against the separation condition edge by edge.
    """
    I = sorted(I)
    k = len(I)
    if k < 3:
        raise ValueError("need at least 3 points")
    sep = _Separation(P)
    full = _mask(I)
    i0 = I[0]
    candidates: set[int] = set()
    for q in I[1:]:
        L = sep.left[i0][q] & full
        R = sep.right[i0][q] & full
        base = 1 << i0
        qb = 1 << q
        for extra in (L, R, 0):
            candidates.add(base | extra)
            candidates.add(base | extra | qb)
        candidates.add(full & ~qb)
    found: set[DoubleChainWedge] = set()
    for Am in candidates:
        Bm = full & ~Am
        if not Bm or not Am:
            continue
        for w in _wedges_for_partition(sep, _bits(Am), _bits(Bm)):
            found.add(w)
    return sorted(found, key=lambda w: (w.A, w.B))


def _strict_side_mask(sep: _Separation, p: int, q: int, toward: int, away: int) -> int:
    """Points strictly on the side of line pq that holds ``toward`` (or avoids ``away``)."""
    pq = (1 << p) | (1 << q)
    t = toward & ~pq
    if t:
        return sep.left[p][q] if t & sep.left[p][q] else sep.right[p][q]
    a = away & ~pq
    return sep.right[p][q] if a & sep.left[p][q] else sep.left[p][q]


def wedge_interior_mask(P: PointSet, W: DoubleChainWedge) -> int:
    sep = _Separation(P)
    Am, Bm = _mask(W.A), _mask(W.B)
    everything = (1 << len(P)) - 1
    wa = everything
    for p, q in W.edges_of_A():
        wa &= _strict_side_mask(sep, p, q, Am, Bm)
    wb = everything
    for p, q in W.edges_of_B():
        wb &= _strict_side_mask(sep, p, q, Bm, Am)
    return (wa | wb) & ~(Am | Bm)


def _half_plane_sign(P: PointSet, p: int, q: int, toward: Sequence[int], away: Sequence[int]) -> int:
    """Orientation sign (w.r.t. p->q) of the half-plane on the ``toward`` side."""
    for r in toward:
        if r not in (p, q):
            return int(orientation(P[p], P[q], P[r]))
    for r in away:
        if r not in (p, q):
            return -int(orientation(P[p], P[q], P[r]))
    raise ValueError("degenerate wedge")


def wedge_contains(P: PointSet, W: DoubleChainWedge, x: Point, mode: str = "interior") -> bool:
    """Membership of an arbitrary point in ``W_A u W_B``."""
    if mode not in ("interior", "closed"):
        raise ValueError("mode must be 'interior' or 'closed'")

    def inside(edges, toward, away):
        for p, q in edges:
            want = _half_plane_sign(P, p, q, toward, away)
            got = int(orientation(P[p], P[q], x))
            if mode == "interior" and got != want:
                return False
            if mode == "closed" and got == -want:
                return False
        return True

    return inside(W.edges_of_A(), W.A, W.B) or inside(W.edges_of_B(), W.B, W.A)


# --------------------------------------------------------------- signatures


@dataclass(frozen=True)
class GonSignature:
    """Chart-independent identity of a projective gon.

    ``cycle`` (the boundary order) is carried along for geometry but is not
    part of equality.
    """

    kind: str
    vertices: frozenset
    chains: frozenset | None = None
    cycle: tuple = field(default=(), compare=False, hash=False)

    @property
    def k(self) -> int:
        return len(self.vertices)

    @staticmethod
    def affine(P: PointSet, I: Sequence[int]) -> "GonSignature":
        idx = list(I)
        hull = convex_hull_indices([P[i] for i in idx])
        return GonSignature(AFFINE, frozenset(idx), None, tuple(idx[h] for h in hull))

    @staticmethod
    def wedge(W: DoubleChainWedge) -> "GonSignature":
        return GonSignature(WEDGE, frozenset(W.cycle), frozenset((frozenset(W.A), frozenset(W.B))), W.cycle)

    def as_wedge(self) -> DoubleChainWedge:
        if self.kind != WEDGE:
            raise ValueError("not a wedge signature")
        A, B = sorted(self.chains, key=min)
        cyc = self.cycle
        k = len(cyc)
        # rotate so that the cycle starts at the first A vertex after a B vertex
        for r in range(k):
            rot = cyc[r:] + cyc[:r]
            if set(rot[: len(A)]) == A:
                return DoubleChainWedge(tuple(rot[: len(A)]), tuple(rot[len(A):]))
        raise ValueError("cycle does not split into the stored chains")


def _affine_convex(P: PointSet, I: Sequence[int]) -> bool:
    return len(convex_hull_indices([P[i] for i in I])) == len(I)


def projective_gons_of_subset(P: PointSet, I: Sequence[int]) -> list[GonSignature]:
    I = sorted(I)
    if len(I) < 3:
        raise ValueError("need at least 3 points")
    out = []
    if _affine_convex(P, I):
        out.append(GonSignature.affine(P, I))
    out.extend(GonSignature.wedge(w) for w in enumerate_wedges(P, I))
    return out


def _wedge_of(P: PointSet, G: GonSignature) -> DoubleChainWedge:
    """Boundary of a wedge signature, taken from the chains alone when the stored cycle is unusable."""
    sep = _Separation(P)
    try:
        W = G.as_wedge()
    except ValueError:
        W = None
    if W is not None:
        Am, Bm = _mask(W.A), _mask(W.B)
        cyc = W.cycle
        if all(sep.ok(cyc[i], cyc[(i + 1) % len(cyc)], Am, Bm) for i in range(len(cyc))):
            return W
    A, B = sorted(G.chains, key=min)
    found = _wedges_for_partition(sep, sorted(A), sorted(B))
    if not found:
        raise ValueError("chains do not form a double chain")
    return found[0]


def interior_mask(P: PointSet, G: GonSignature) -> int:
    """Bitmask of points of P strictly inside the projective gon G.

    Depends on the signature only; the stored cycle is a hint, not a source of truth.
    """
    if G.kind == AFFINE:
        left, _ = P.side_masks
        idx = sorted(G.vertices)
        cyc = [idx[h] for h in convex_hull_indices([P[i] for i in idx])]
        m = (1 << len(P)) - 1
        for i in range(len(cyc)):
            m &= left[cyc[i]][cyc[(i + 1) % len(cyc)]]
        return m
    return wedge_interior_mask(P, _wedge_of(P, G))


def is_projective_hole(P: PointSet, G: GonSignature) -> bool:
    return interior_mask(P, G) == 0


# ----------------------------------------------------------------- counting


@dataclass
class CountRecord:
    gons_affine: int | None = None
    gons_wedge: int | None = None
    gons_projective: int | None = None
    holes_affine: int | None = None
    holes_wedge: int | None = None
    holes_projective: int | None = None
    islands_projective: int | None = None

    def as_dict(self) -> dict[str, int]:
        return {f: getattr(self, f) for f in COUNT_FIELDS if getattr(self, f) is not None}


@dataclass
class CountTable:
    """Per-k counts; absent (None) fields were not computed."""

    rows: dict[int, CountRecord] = field(default_factory=dict)

    def row(self, k: int) -> CountRecord:
        return self.rows.setdefault(k, CountRecord())

    def get(self, k: int, name: str) -> int:
        rec = self.rows.get(k)
        if rec is None:
            return 0
        v = getattr(rec, name)
        return 0 if v is None else v

    def set(self, k: int, name: str, value: int) -> None:
        setattr(self.row(k), name, int(value))

    def check(self) -> None:
        """Raise AssertionError if a sum identity or holes <= gons fails."""
        for k, rec in self.rows.items():
            for kind in ("gons", "holes"):
                a, w, p = (getattr(rec, f"{kind}_{s}") for s in ("affine", "wedge", "projective"))
                if None not in (a, w, p):
                    assert p == a + w, f"k={k}: {kind} projective != affine + wedge"
            for s in ("affine", "wedge", "projective"):
                g, h = getattr(rec, f"gons_{s}"), getattr(rec, f"holes_{s}")
                if g is not None and h is not None:
                    assert h <= g, f"k={k}: holes_{s} > gons_{s}"

    def to_json_counts(self) -> dict[str, dict[str, int]]:
        return {str(k): self.rows[k].as_dict() for k in sorted(self.rows)}

    def restricted(self, names: Iterable[str]) -> "CountTable":
        names = set(names)
        out = CountTable()
        for k, rec in self.rows.items():
            for f in COUNT_FIELDS:
                if f in names and getattr(rec, f) is not None:
                    out.set(k, f, getattr(rec, f))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountTable):
            return NotImplemented
        return self.to_json_counts() == other.to_json_counts()
