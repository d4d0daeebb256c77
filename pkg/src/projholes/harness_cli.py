"""Command-line harness: generation, counting, verification and experiments.

Exit status: 0 on success, 1 on invalid input, 2 when a verification fails.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import generators as gen
from . import oracle
from .exact_geom import GeneralPositionError, Point, PointSet, assert_general_position, to_rational
from .fast_count import (
    count_projective_fast,
    count_projective_islands_fast,
    empty_3wedges_per_apex,
    largest_gon_fast,
    triangle_tables,
)
from .projective_model import CountTable

EXIT_INVALID = 1
EXIT_VERIFY = 2


class VerificationFailure(Exception):
    """Raised after a report is written when some verdict failed."""


# ------------------------------------------------------------- file format


def format_coordinate(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def dump_points(P: PointSet, header: list[str] | None = None) -> str:
    lines = [f"# {h}" for h in (header or [])]
    lines.append(str(len(P)))
    lines.extend(f"{format_coordinate(p.x)} {format_coordinate(p.y)}" for p in P)
    return "\n".join(lines) + "\n"


class PointFileError(ValueError):
    pass


def parse_points(text: str) -> PointSet:
    """Parse the point file format; raises PointFileError with a reason."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise PointFileError("empty point file")
    try:
        n = int(rows[0])
    except ValueError:
        raise PointFileError(f"first line must be the point count, got {rows[0]!r}") from None
    body = rows[1:]
    if len(body) != n:
        raise PointFileError(f"header says {n} points, found {len(body)}")
    pts = []
    for lineno, line in enumerate(body, 1):
        parts = line.split()
        if len(parts) != 2:
            raise PointFileError(f"point {lineno}: expected 'x y', got {line!r}")
        try:
            pts.append(Point(to_rational(parts[0]), to_rational(parts[1])))
        except (ValueError, TypeError) as exc:
            raise PointFileError(f"point {lineno}: {exc}") from None
    verdict = assert_general_position(pts)
    if not verdict:
        raise PointFileError(f"not in general position: {verdict}")
    return PointSet(pts, check=False)


def load_points(path: str) -> PointSet:
    try:
        return parse_points(Path(path).read_text())
    except OSError as exc:
        raise PointFileError(str(exc)) from None


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def counts_document(P: PointSet, mode: str, what: str, table: CountTable) -> dict:
    return {"n": len(P), "mode": mode, "what": what, "counts": table.to_json_counts()}


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- reports


@dataclass
class ExperimentReport:
    command: str
    seed: int
    parameters: dict
    trials: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def aggregate(values: list[int]) -> dict:
    return {
        "mean": statistics.fmean(values),
        "min": min(values),
        "max": max(values),
        "variance": statistics.variance(values) if len(values) > 1 else 0.0,
        "trials": len(values),
    }


def trial_seed(seed: int, n: int, trial: int) -> list[int]:
    return [seed, n, trial]


# ------------------------------------------------------------- operations


def run_count(P: PointSet, mode: str, what: str, max_k: int | None, force: bool, threads: int | None) -> CountTable:
    if mode == "oracle":
        return oracle.count_oracle(P, max_k, what, force=force)
    if what == "islands":
        return count_projective_islands_fast(P, max_k, threads=threads)
    return count_projective_fast(P, max_k, what, threads=threads)


def closed_forms(z: int) -> dict[str, Fraction]:
    p = Fraction(2) ** z
    zf = Fraction(z)
    return {
        "affine": 2 * p * p - (zf * zf / 2 + 3 * zf / 2 + 2) * p,
        "type1a": 2 * p * p - (zf * zf - zf + 6) * p + 4,
        "type1b": p * p / 4 + Fraction(5, 2) * p - 4 * zf - 2,
        "total": 4 * p * p + p * p / 4 - (Fraction(3, 2) * zf * zf + zf / 2 + Fraction(11, 2)) * p - 4 * zf + 2,
        "opendiag": p * p / 4 + 2 * zf - 1,
    }


def verify_horton_report(z_max: int, oracle_max_z: int = 5, threads: int | None = None) -> ExperimentReport:
    rep = ExperimentReport("verify horton", 0, {"z_max": z_max, "oracle_max_z": oracle_max_z})
    for z in range(1, z_max + 1):
        H = gen.gen_horton(2 ** z, perfect=True)
        forms = closed_forms(z)
        stats = oracle.count_open_caps_cups(H)
        rec: dict[str, Any] = {"z": z, "n": 2 ** z, "expected": {k: str(v) for k, v in forms.items()}}
        measured = {"opendiag": stats.opendiag}
        if 2 ** z >= 3:
            fast = count_projective_fast(H.points, 3, "holes", threads=threads)
            measured["affine"] = fast.get(3, "holes_affine")
            measured["total"] = fast.get(3, "holes_projective")
            if z <= oracle_max_z:
                br = oracle.classify_3holes(H)
                measured["type1a"] = br.type1a
                measured["type1b"] = br.type1b
                orc = oracle.count_oracle(H.points, 3, "holes", force=True)
                rec["oracle_agrees"] = (
                    orc.get(3, "holes_affine") == br.affine == measured["affine"]
                    and orc.get(3, "holes_projective") == br.total == measured["total"]
                )
                rep.verdicts[f"z={z}:oracle"] = rec["oracle_agrees"]
        else:
            measured.update(affine=0, total=0, type1a=0, type1b=0)
        rec["measured"] = measured
        for name, value in measured.items():
            rep.verdicts[f"z={z}:{name}"] = Fraction(value) == forms[name]
        rep.trials.append(rec)
    return rep


def empty_3wedge_total(P: PointSet) -> int:
    return int(empty_3wedges_per_apex(P).sum())


def experiment_wedges(ns: list[int], trials: int, seed: int, shape: str = "square") -> ExperimentReport:
    rep = ExperimentReport("experiment wedges", seed, {"n": ns, "trials": trials, "shape": shape})
    means = {}
    for n in ns:
        if n < 5:
            raise click.BadParameter("n must be at least 5", param_hint="--n")
        values = []
        for t in range(trials):
            P = gen.gen_random_uniform(n, shape, trial_seed(seed, n, t))
            v = empty_3wedge_total(P)
            values.append(v)
            rep.trials.append({"n": n, "trial": t, "empty_3wedges": v})
        agg = aggregate(values)
        bound = 2 * math.pi ** 2 / 3 * n * (n - 2)
        agg["bound"] = bound
        rep.aggregates[str(n)] = agg
        rep.verdicts[f"n={n}:mean<=bound"] = agg["mean"] <= bound
        means[n] = agg["mean"]
    for n in ns:
        if 2 * n in means and means[n] > 0:
            ratio = means[2 * n] / means[n]
            rep.aggregates[f"ratio {2 * n}/{n}"] = ratio
            rep.verdicts[f"ratio {2 * n}/{n} in [2.5,6]"] = 2.5 <= ratio <= 6
    return rep


def _kgon_count(P: PointSet, k: int) -> int:
    return count_projective_fast(P, k, "gons").get(k, "gons_projective")


def search_witness(n: int, k: int, trials: int, seed: int, bits: int = 16) -> dict:
    """Hill climbing on integer coordinates to remove all projective k-gons.

    One trial is one evaluated candidate.  Steps shrink after repeated
    failures, and the search restarts from a fresh random set when stuck.
    """
    if n < k:
        raise click.BadParameter("need n >= k")
    rng = np.random.default_rng(seed)
    size = 1 << bits

    def fresh():
        while True:
            raw = [tuple(int(v) for v in rng.integers(0, size, 2)) for _ in range(n)]
            if assert_general_position([Point(Fraction(x), Fraction(y)) for x, y in raw]):
                return raw

    best_score, best_raw, best_gon = None, None, None
    used = 0
    while used < trials:
        raw = fresh()
        score = _kgon_count(PointSet(raw, check=False), k)
        used += 1
        step = size // 4
        stall = 0
        while used < trials and score > 0 and step >= 1:
            cand = list(raw)
            i = int(rng.integers(n))
            dx, dy = (int(v) for v in rng.integers(-step, step + 1, 2))
            cand[i] = (min(size - 1, max(0, cand[i][0] + dx)), min(size - 1, max(0, cand[i][1] + dy)))
            used += 1
            if not assert_general_position([Point(Fraction(x), Fraction(y)) for x, y in cand]):
                continue
            s = _kgon_count(PointSet(cand, check=False), k)
            if s <= score:
                stall = 0 if s < score else stall + 1
                raw, score = cand, s
            else:
                stall += 1
            if stall > 4 * n:
                step //= 2
                stall = 0
        if best_score is None or score < best_score:
            best_score, best_raw = score, raw
            best_gon = largest_gon_fast(PointSet(raw, check=False))
        if score == 0:
            break
    P = PointSet(best_raw, check=False)
    return {"n": n, "k": k, "trials_used": used, "found": best_score == 0, "kgon_count": best_score,
            "largest_gon": best_gon, "points": P}


def construction_report(n: int, a: int | None, b: int | None, alpha: Fraction | None, x: int | None, mode: str,
                        k: int, seed: int, threads: int | None = None) -> tuple[ExperimentReport, list[dict]]:
    if mode == "thm5":
        if x is None:
            raise click.BadParameter("thm5 needs --x")
        a, b = 2, int(math.floor(math.log2(x)))
    else:
        if b is None:
            if alpha is None:
                raise click.BadParameter("thm4 needs --b or --alpha")
            b = int(math.floor(n ** ((Fraction(5, 3) + alpha) / k)))
        if a is None:
            a = 2
    try:
        T = gen.gen_cluster(n, a, b, alpha, seed)
    except gen.InfeasibleParameters as exc:
        raise click.BadParameter(str(exc)) from None
    rep = ExperimentReport("construction", seed, {"n": n, "a": a, "b": b, "alpha": None if alpha is None else str(alpha),
                                                  "x": x, "mode": mode, "k": k})
    m = min(max(k, 4), len(T.points))
    counts = count_projective_fast(T.points, m, "holes", threads=threads)
    holes = oracle.enumerate_affine_holes(T.points)
    props = oracle.check_cluster_properties(T, holes)
    rows = []
    H = len(T.H)
    for kk in range(3, m + 1):
        bound = a * math.comb(b, kk - 1) * (H - b)
        inside = oracle.in_cluster_affine_holes(T, holes, kk)
        row = {
            "n": n, "a": a, "b": b, "k": kk, "T_size": len(T.points), "H_size": H,
            "holes_affine": counts.get(kk, "holes_affine"),
            "holes_projective": counts.get(kk, "holes_projective"),
            "certified_lower_bound": bound,
            "in_cluster_affine_holes": inside,
            "expected_in_cluster": a * math.comb(b, kk),
        }
        rows.append(row)
        rep.trials.append(row)
        rep.verdicts[f"k={kk}:bound"] = row["holes_projective"] >= bound
        rep.verdicts[f"k={kk}:in_cluster"] = inside == row["expected_in_cluster"]
    if a == 2:
        # every subset of size >= 3 of the two clusters is a projective hole
        top = min(2 * b, len(T.points))
        wide = counts if top <= m else count_projective_fast(T.points, top, "holes", threads=threads)
        total = sum(wide.get(kk, "holes_projective") for kk in range(3, top + 1))
        bound = 2 ** (2 * b) - math.comb(2 * b, 2) - 2 * b - 1
        rep.aggregates["two_cluster_bound"] = bound
        rep.aggregates["holes_projective_total"] = total
        rep.verdicts["two_cluster_bound"] = total >= bound
    for name, ok in props.items():
        rep.verdicts[name] = ok
    rep.aggregates["annotations"] = T.annotations()
    return rep, rows


# -------------------------------------------------------------------- CLI


def _report_out(rep: ExperimentReport, as_json: bool, out: str | None) -> None:
    if as_json or out:
        emit(dumps(rep.to_dict()), out)
    else:
        for name, ok in rep.verdicts.items():
            click.echo(f"{'PASS' if ok else 'FAIL'}  {name}")
        for name, value in rep.aggregates.items():
            if name != "annotations":
                click.echo(f"{name}: {value}")
    if not rep.passed:
        raise VerificationFailure("; ".join(k for k, v in rep.verdicts.items() if not v))


@click.group()
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads (speed only).")
@click.pass_context
def cli(ctx, threads):
    """Generate point sets and count projective gons, holes and islands."""
    ctx.obj = {"threads": threads}


KINDS = ["horton", "perfect-horton", "squared-horton", "lattice-convex", "es-lower", "cluster", "random",
         "double-chain", "pentagon-witness"]


@cli.command("gen")
@click.argument("kind", type=click.Choice(KINDS))
@click.option("--n", type=int, help="Number of points (horton, random, cluster).")
@click.option("--t", type=int, help="Side length (squared-horton, lattice-convex).")
@click.option("--k", type=int, help="Target gon size (es-lower).")
@click.option("--a", type=int, help="Cluster count (cluster).")
@click.option("--b", type=int, help="Cluster size (cluster).")
@click.option("--alpha", type=str, default=None, help="Recorded alpha parameter (cluster).")
@click.option("--m", type=int, help="First chain size (double-chain).")
@click.option("--rest", type=int, help="Second chain size (double-chain).")
@click.option("--perfect", is_flag=True, help="Perfect Horton set.")
@click.option("--shape", type=click.Choice(["square", "disk"]), default="square")
@click.option("--grid-bits", type=click.IntRange(min=20), default=32)
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=0)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_gen(kind, n, t, k, a, b, alpha, m, rest, perfect, shape, grid_bits, seed, out):
    """Write a point set of the given KIND."""

    def need(**vals):
        for name, v in vals.items():
            if v is None:
                raise click.BadParameter(f"{kind} requires --{name}")

    header = [f"kind={kind} seed={seed}"]
    sidecar = None
    if kind in ("horton", "perfect-horton"):
        need(n=n)
        if n < 1:
            raise click.BadParameter("n must be positive")
        P = gen.gen_horton(n, perfect or kind == "perfect-horton", seed).points
    elif kind == "squared-horton":
        need(t=t)
        res = gen.gen_squared_horton(t, seed)
        if not res:
            raise click.ClickException(res.reason)
        P = res.points
    elif kind == "lattice-convex":
        need(t=t)
        if t < 2:
            raise click.BadParameter("t must be at least 2")
        P = PointSet(gen.gen_lattice_convex(t).points)
    elif kind == "es-lower":
        need(k=k)
        if k < 7:
            raise click.BadParameter("k must be at least 7")
        P = gen.gen_es_lower(k).points
    elif kind == "cluster":
        need(n=n, a=a, b=b)
        try:
            C = gen.gen_cluster(n, a, b, None if alpha is None else to_rational(alpha), seed)
        except gen.InfeasibleParameters as exc:
            raise click.BadParameter(str(exc)) from None
        P = C.points
        sidecar = C.annotations()
    elif kind == "random":
        need(n=n)
        if n < 1:
            raise click.BadParameter("n must be positive")
        P = gen.gen_random_uniform(n, shape, seed, grid_bits)
    elif kind == "double-chain":
        need(m=m, rest=rest)
        if m < 1 or rest < 1:
            raise click.BadParameter("chain sizes must be positive")
        P = gen.gen_double_chain(m, rest, seed)
    else:
        P = gen.gen_pentagon_center_witness()
    emit(dump_points(P, header), out)
    if sidecar is not None and out:
        Path(str(out) + ".clusters.json").write_text(dumps(sidecar))


@cli.command("count")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["oracle", "fast"]), default="fast")
@click.option("--what", type=click.Choice(["gons", "holes", "islands"]), default="gons")
@click.option("--max-k", type=int, default=None)
@click.option("--force", is_flag=True, help="Override the oracle size guard.")
@click.option("--json", "as_json", is_flag=True, help="Accepted for symmetry; output is always JSON.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_count(ctx, path, mode, what, max_k, force, as_json, out):
    """Count k-gons, k-holes or k-islands of the set in PATH as JSON."""
    P = load_points(path)
    if max_k is not None and not 3 <= max_k <= len(P):
        raise click.BadParameter("need 3 <= max-k <= n", param_hint="--max-k")
    if len(P) < 3:
        raise click.BadParameter("need at least 3 points")
    try:
        table = run_count(P, mode, what, max_k, force, ctx.obj["threads"])
    except oracle.SizeGuardError as exc:
        raise click.BadParameter(str(exc)) from None
    emit(dumps(counts_document(P, mode, what, table)), out)


@cli.group("verify")
def cmd_verify():
    """Formula verification."""


@cmd_verify.command("horton")
@click.option("--z-max", type=click.IntRange(1, 6), default=5)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_verify_horton(ctx, z_max, as_json, out):
    """Check the perfect Horton closed forms for z = 1..z-max."""
    _report_out(verify_horton_report(z_max, threads=ctx.obj["threads"]), as_json, out)


@cli.group("experiment")
def cmd_experiment():
    """Monte-Carlo experiments."""


@cmd_experiment.command("wedges")
@click.option("--n", "ns", type=int, multiple=True, required=True)
@click.option("--trials", type=click.IntRange(min=1), default=200)
@click.option("--shape", type=click.Choice(["square", "disk"]), default="square")
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=0)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_experiment_wedges(ns, trials, shape, seed, as_json, out):
    """Mean number of empty 3-wedges of uniform random sets."""
    _report_out(experiment_wedges(list(ns), trials, seed, shape), as_json, out)


@cli.command("search")
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option("--trials", type=click.IntRange(min=1), default=10_000)
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=0)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Where to save a witness.")
def cmd_search(n, k, trials, seed, as_json, out):
    """Look for n points without a projective k-gon."""
    if k < 3:
        raise click.BadParameter("k must be at least 3")
    res = search_witness(n, k, trials, seed)
    P = res.pop("points")
    if res["found"] and out:
        Path(out).write_text(dump_points(P, [f"search n={n} k={k} seed={seed}: no projective {k}-gon"]))
    if as_json:
        click.echo(dumps(res), nl=False)
    else:
        status = "found" if res["found"] else "not found"
        click.echo(f"witness {status} after {res['trials_used']} trials; best largest gon = {res['largest_gon']}")


@cli.command("prop5")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--force", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_prop5(path, force, as_json, out):
    """Co-segment counts and projective 3/4-hole lower bounds."""
    P = load_points(path)
    n = len(P)
    if n < 4:
        raise click.BadParameter("need at least 4 points")
    try:
        rec = oracle.prop5_bounds(P, force=force)
    except oracle.SizeGuardError as exc:
        raise click.BadParameter(str(exc)) from None
    rep = ExperimentReport("prop5", 0, {"n": n}, [asdict(rec)])
    rep.verdicts["euler"] = rec.S_size - rec.S_prime_size <= 3 * n - 3
    if n <= 12:
        t = oracle.count_oracle(P, 4, "holes", force=force)
        rep.verdicts["bound3"] = t.get(3, "holes_projective") >= rec.bound3
        rep.verdicts["bound4"] = t.get(4, "holes_projective") >= rec.bound4
    rep.aggregates.update(asdict(rec))
    _report_out(rep, as_json, out)


@cli.command("construction")
@click.option("--n", type=int, required=True)
@click.option("--a", type=int, default=None)
@click.option("--b", type=int, default=None)
@click.option("--alpha", type=str, default=None)
@click.option("--x", type=int, default=None)
@click.option("--mode", type=click.Choice(["thm4", "thm5"]), default="thm4")
@click.option("--k", type=click.IntRange(min=3), default=4)
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=0)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_construction(ctx, n, a, b, alpha, x, mode, k, seed, csv_path, as_json, out):
    """Build T(a, b) and compare hole counts with the certified bounds."""
    rep, rows = construction_report(n, a, b, None if alpha is None else to_rational(alpha), x, mode, k, seed,
                                    ctx.obj["threads"])
    if csv_path:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
        Path(csv_path).write_text(buf.getvalue())
    _report_out(rep, as_json, out)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="projholes", standalone_mode=False)
    except VerificationFailure as exc:
        click.echo(f"verification failed: {exc}", err=True)
        return EXIT_VERIFY
    except click.exceptions.Abort:
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (PointFileError, GeneralPositionError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    return 0


def entry() -> None:
    sys.exit(main())
