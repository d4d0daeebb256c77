"""Polynomial counters for projective gons, holes and islands.

Every chart is described only by the side ``sigma[p] in {+1, -1}`` of the
removed line on which each point lies.  The orientation of an image triple is
then ``O[i,j,k] * sigma_i * sigma_j * sigma_k`` (up to one global sign per
chart, irrelevant for counting), so charts never need explicit coordinates.

Counting is anchored at a directed hull edge ``a -> b`` of the image: convex
chains ``a, b, v_3, ..., v_j`` are grown in angular order around ``a`` with
a left turn at every vertex and are closed back to ``a``.  For holes every fan
triangle ``(a, v_i, v_{i+1})`` must be empty; for islands their point counts
are accumulated.  Many charts are processed at once as a sparse table of
chain ends ``(chart, v, w, inside) -> multiplicity``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from .exact_geom import PointSet
from .projective_model import CountTable

INT64_SAFE_N = 48


def chart_sides(O: np.ndarray, s: int, t: int) -> list[tuple[int, int, np.ndarray]]:
    """The four pair charts of ``{s, t}`` as ``(a, b, sigma)``.

    Other points keep ``sigma = sign O[s, t, p]``.  Parallel charts put s and t
    on a common side (``-1`` for the left offset, ``+1`` for the right one);
    crossing charts put them on opposite sides.  In the image every other
    point lies on side ``sigma_s * sigma_t`` of ``s -> t``, which fixes the
    anchor direction.
    """
    base = O[s, t].astype(np.int8).copy()
    out = []
    for ss, st in ((-1, -1), (1, 1), (1, -1), (-1, 1)):
        sig = base.copy()
        sig[s] = ss
        sig[t] = st
        if ss * st > 0:
            out.append((s, t, sig))
        else:
            out.append((t, s, sig))
    return out


def pair_charts(O: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = O.shape[0]
    A, B, S = [], [], []
    for s, t in combinations(range(n), 2):
        for a, b, sig in chart_sides(O, s, t):
            A.append(a)
            B.append(b)
            S.append(sig)
    return np.array(A, dtype=np.int64), np.array(B, dtype=np.int64), np.array(S, dtype=np.int8).reshape(-1, n)


def identity_charts(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A, B = [], []
    for a in range(n):
        for b in range(n):
            if a != b:
                A.append(a)
                B.append(b)
    return np.array(A, dtype=np.int64), np.array(B, dtype=np.int64), np.ones((len(A), n), dtype=np.int8)


# ------------------------------------------------------- triangle tables


def triangle_tables(O: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Point counts of the four projective triangles on each triple.

    ``T[i,j,k]`` counts points inside the affine triangle.  ``W[i,j,k]``
    counts points in the projective triangle with apex ``i``: the region
    beyond edge jk together with the vertical angle at i.
    Runs in ``O(n^4)`` vectorized time.
    """
    n = O.shape[0]
    T = np.zeros((n, n, n), dtype=np.int32)
    W = np.zeros((n, n, n), dtype=np.int32)
    if n < 4:
        return T, W
    step = max(1, 2_000_000 // (n ** 3))
    Oi = O.astype(np.int8)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        oij_p = Oi[lo:hi][:, :, None, :]                       # O[i,j,p]
        oij_k = Oi[lo:hi][:, :, :, None]                       # O[i,j,k]
        ojk_p = Oi[None, :, :, :]                              # O[j,k,p]
        ojk_i = Oi[:, :, lo:hi].transpose(2, 0, 1)[..., None]  # O[j,k,i]
        oki = Oi[:, lo:hi, :].transpose(1, 0, 2)               # [i,k,x] = O[k,i,x]
        oki_p = oki[:, None, :, :]                             # O[k,i,p]
        oki_j = oki.transpose(0, 2, 1)[..., None]              # O[k,i,j]
        valid = (oij_p != 0) & (ojk_p != 0) & (oki_p != 0)
        d1 = oij_p != oij_k
        d2 = ojk_p != ojk_i
        d3 = oki_p != oki_j
        T[lo:hi] = np.count_nonzero(valid & ~d1 & ~d2 & ~d3, axis=3)
        W[lo:hi] = np.count_nonzero(valid & (d1 == d3) & (d2 != d1), axis=3)
    return T, W


def fan_counts(T: np.ndarray, W: np.ndarray, a: np.ndarray, sig: np.ndarray) -> np.ndarray:
    """``cnt[c, w, x]``: points inside the image triangle ``(a_c, w, x)``."""
    C, n = sig.shape
    sa = sig[np.arange(C), a][:, None, None]
    sw = sig[:, :, None]
    sx = sig[:, None, :]
    G = W[:, a, :]  # G[w, c, x] = W[w, a_c, x]
    aff = T[a]
    apex_a = W[a]
    apex_w = G.transpose(1, 0, 2)
    apex_x = G.transpose(1, 2, 0)
    return np.where(
        (sw == sa) & (sx == sa), aff,
        np.where((sw == sx), apex_a, np.where(sw == sa, apex_x, apex_w)),
    )


# ---------------------------------------------------------- DP engine


def _dtype_for(n: int):
    return np.int64 if n <= INT64_SAFE_N else object


def _run_chunk(O, a, b, sig, m, mode, tables, n):
    """Sparse DP over one batch of charts.

    Returns ``totals[h][i]``: number of (chart, closed chain) pairs with h
    vertices and i interior points (``i`` is always 0 unless islands).
    """
    C = len(a)
    cidx = np.arange(C)
    sa = sig[cidx, a]
    sb = sig[cidx, b]
    # cand[c, p]: p strictly left of a -> b in the image
    cand = (O[a, b, :] * (sa * sb)[:, None] * sig) > 0
    # before[c, w, x]: x after w in angular order around a
    before = (O[a] * sa[:, None, None] * sig[:, :, None] * sig[:, None, :]) > 0
    first = np.zeros((C, n), dtype=bool)
    first[cidx, b] = True
    adm = before & (cand | first)[:, :, None] & cand[:, None, :]
    cnt = None
    if mode != "gons":
        T, W = tables
        cnt = fan_counts(T, W, a, sig)
        if mode == "holes":
            adm &= cnt == 0
    dtype = _dtype_for(n)
    totals: dict[int, dict[int, int]] = {}

    # chains a, b, x
    c0, x0 = np.nonzero(adm[cidx, b])
    ec, ev, ew = c0, b[c0], x0
    ei = cnt[ec, ev, ew].astype(np.int64) if mode == "islands" else np.zeros(len(ec), dtype=np.int64)
    if mode == "islands":
        keep = ei + 3 <= m
        ec, ev, ew, ei = ec[keep], ev[keep], ew[keep], ei[keep]
    val = np.ones(len(ec), dtype=dtype)
    h = 3
    while len(ec) and h <= m:
        # close: left turn at w back towards a
        closing = (O[ev, ew, a[ec]] * sig[ec, ev] * sig[ec, ew] * sa[ec]) > 0
        if closing.any():
            row = totals.setdefault(h, {})
            for i_val in np.unique(ei[closing]).tolist():
                sel = closing & (ei == i_val)
                row[i_val] = row.get(i_val, 0) + int(val[sel].sum())
        if h == m:
            break
        # extend by x: admissible edge w -> x and a left turn at w
        nc, nv, nw, ni, nval = [], [], [], [], []
        batch = max(1, 4_000_000 // n)
        for lo in range(0, len(ec), batch):
            sl = slice(lo, lo + batch)
            c, v, w, i, vv = ec[sl], ev[sl], ew[sl], ei[sl], val[sl]
            turn = (O[v, w, :] * (sig[c, v] * sig[c, w])[:, None] * sig[c]) > 0
            ok = adm[c, w, :] & turn
            r, x = np.nonzero(ok)
            nc.append(c[r])
            nv.append(w[r])
            nw.append(x)
            add = cnt[c[r], w[r], x].astype(np.int64) if mode == "islands" else 0
            ni.append(i[r] + add)
            nval.append(vv[r])
        ec = np.concatenate(nc)
        ev = np.concatenate(nv)
        ew = np.concatenate(nw)
        ei = np.concatenate(ni)
        val = np.concatenate(nval) if nval else np.zeros(0, dtype=dtype)
        h += 1
        if mode == "islands":
            keep = ei + h <= m
            ec, ev, ew, ei, val = ec[keep], ev[keep], ew[keep], ei[keep], val[keep]
        if len(ec) == 0:
            break
        # merge equal chain ends
        key = ((ec * n + ev) * n + ew) * (m + 1) + ei
        order = np.argsort(key, kind="stable")
        key = key[order]
        starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        summed = np.add.reduceat(val[order], starts) if len(starts) else val[:0]
        pick = order[starts]
        ec, ev, ew, ei, val = ec[pick], ev[pick], ew[pick], ei[pick], summed
    return totals


def _sweep(O, charts, m, mode, tables, threads=None):
    a, b, sig = charts
    n = O.shape[0]
    per = max(1, 3_000_000 // max(1, n * n))
    jobs = [(a[lo:lo + per], b[lo:lo + per], sig[lo:lo + per]) for lo in range(0, len(a), per)]
    merged: dict[int, dict[int, int]] = {}

    def run(job):
        return _run_chunk(O, job[0], job[1], job[2], m, mode, tables, n)

    workers = threads or 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    for res in results:
        for h, row in res.items():
            dst = merged.setdefault(h, {})
            for i, v in row.items():
                dst[i] = dst.get(i, 0) + v
    return merged


class DivisibilityError(AssertionError):
    pass


def _divide(total: int, k: int, label: str) -> int:
    q, r = divmod(total, k)
    if r:
        raise DivisibilityError(f"{label}: sum {total} is not divisible by {k}")
    return q


def _prepare(P: PointSet, m: int | None):
    n = len(P)
    if n < 3:
        raise ValueError("need at least 3 points")
    m = n if m is None else m
    if not 3 <= m <= n:
        raise ValueError("need 3 <= m <= n")
    O = P.orientation_table.astype(np.int64)
    return n, m, O


def count_projective_fast(P: PointSet, m: int | None = None, what: str = "gons", threads: int | None = None,
                          tables=None) -> CountTable:
    """Projective (and affine/wedge split) counts of k-gons or k-holes, k <= m."""
    if what not in ("gons", "holes"):
        raise ValueError("what must be gons or holes")
    n, m, O = _prepare(P, m)
    if what == "holes" and tables is None:
        tables = triangle_tables(O)
    proj = _sweep(O, pair_charts(O), m, what, tables, threads)
    aff = _sweep(O, identity_charts(n), m, what, tables, threads)
    table = CountTable()
    for k in range(3, m + 1):
        p = _divide(proj.get(k, {}).get(0, 0), k, f"projective {what} k={k}")
        f = _divide(aff.get(k, {}).get(0, 0), k, f"affine {what} k={k}")
        table.set(k, f"{what}_projective", p)
        table.set(k, f"{what}_affine", f)
        table.set(k, f"{what}_wedge", p - f)
    table.check()
    return table


def count_projective_islands_fast(P: PointSet, m: int | None = None, threads: int | None = None,
                                  tables=None) -> CountTable:
    """Projective k-islands for k <= m.

    A closed chain with h hull vertices and i interior points is an island of
    size h + i seen from one of its h hull edges, so each (h, i) total is
    divided by h.
    """
    n, m, O = _prepare(P, m)
    if tables is None:
        tables = triangle_tables(O)
    res = _sweep(O, pair_charts(O), m, "islands", tables, threads)
    islands = {k: 0 for k in range(3, m + 1)}
    for h, row in res.items():
        for i, total in row.items():
            islands[h + i] += _divide(total, h, f"islands h={h} i={i}")
    table = CountTable()
    for k, v in islands.items():
        table.set(k, "islands_projective", v)
    return table


def count_affine_from_edge(Q: PointSet, s: int, t: int, m: int | None = None, what: str = "gons") -> dict[int, int]:
    """Convex k-gons (or k-holes) of Q having ``s -> t`` as a ccw boundary edge."""
    if what not in ("gons", "holes"):
        raise ValueError("what must be gons or holes")
    n, m, O = _prepare(Q, m)
    tables = triangle_tables(O) if what == "holes" else None
    a = np.array([s], dtype=np.int64)
    b = np.array([t], dtype=np.int64)
    sig = np.ones((1, n), dtype=np.int8)
    res = _run_chunk(O, a, b, sig, m, what, tables, n)
    return {k: res.get(k, {}).get(0, 0) for k in range(3, m + 1)}


def largest_gon_fast(P: PointSet, threads: int | None = None) -> int:
    """Largest k with a projective k-gon."""
    n, m, O = _prepare(P, None)
    res = _sweep(O, pair_charts(O), n, "gons", None, threads)
    return max((h for h, row in res.items() if any(row.values())), default=0)


def empty_3wedges_per_apex(P: PointSet, tables=None) -> np.ndarray:
    """``out[p]``: pairs {i, j} whose 3-wedge with apex p is empty."""
    O = P.orientation_table.astype(np.int64)
    n = O.shape[0]
    if tables is None:
        tables = triangle_tables(O)
    _, W = tables
    idx = np.arange(n)
    distinct = (idx[:, None, None] != idx[None, :, None]) & (idx[:, None, None] != idx[None, None, :]) & (
        idx[None, :, None] < idx[None, None, :])
    return np.count_nonzero((W == 0) & distinct, axis=(1, 2))


def default_threads() -> int:
    return os.cpu_count() or 1


__all__ = [
    "chart_sides",
    "pair_charts",
    "identity_charts",
    "triangle_tables",
    "fan_counts",
    "count_projective_fast",
    "count_projective_islands_fast",
    "count_affine_from_edge",
    "largest_gon_fast",
    "empty_3wedges_per_apex",
    "DivisibilityError",
    "default_threads",
]
