import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import general_sets
from projholes import harness_cli
from projholes.exact_geom import PointSet
from projholes.fast_count import largest_gon_fast
from projholes.generators import PENTAGON
from projholes.harness_cli import (
    EXIT_INVALID,
    EXIT_VERIFY,
    PointFileError,
    closed_forms,
    dump_points,
    main,
    parse_points,
)
from projholes.projective_model import COUNT_FIELDS


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, P):
    path = tmp_path / name
    path.write_text(dump_points(P))
    return path


class TestPointFiles:
    def test_round_trip_rationals(self):
        P = PointSet([("1/3", "-2/7"), (5, 0), ("-9/4", 11)])
        text = dump_points(P, ["demo"])
        assert text.startswith("# demo\n3\n")
        assert parse_points(text) == P

    @given(general_sets(1, 8))
    def test_round_trip_property(self, P):
        assert parse_points(dump_points(P)) == P

    @pytest.mark.parametrize(
        "text",
        ["", "2\n0 0\n", "x\n", "1\n0\n", "1\n0 1.5\n", "1\n1/0 2\n", "3\n0 0\n1 1\n2 2\n"],
    )
    def test_rejects(self, text):
        with pytest.raises(PointFileError):
            parse_points(text)

    def test_comments(self):
        P = parse_points("# header\n2  # count\n0 0\n# middle\n1 1\n")
        assert len(P) == 2


class TestGen:
    def test_perfect_horton(self, tmp_path, capsys):
        out = tmp_path / "h.txt"
        code, _, _ = run(capsys, "gen", "horton", "--n", 16, "--perfect", "--out", out)
        assert code == 0
        body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert body[0] == "16" and len(body) == 17

    def test_random_is_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for path in (a, b):
            assert run(capsys, "gen", "random", "--n", 50, "--shape", "disk", "--seed", 7, "--out", path)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_cluster_sidecar(self, tmp_path, capsys):
        out = tmp_path / "t.txt"
        assert run(capsys, "gen", "cluster", "--n", 400, "--a", 2, "--b", 5, "--out", out)[0] == 0
        side = json.loads((tmp_path / "t.txt.clusters.json").read_text())
        P = parse_points(out.read_text())
        members = [i for m in side["clusters"].values() for i in m]
        assert len(side["clusters"]) == 2 and all(len(m) == 5 for m in side["clusters"].values())
        assert len(set(members)) == 10 and max(members) < len(P)

    @pytest.mark.parametrize(
        "args",
        [
            ["horton"],
            ["random", "--n", 0],
            ["squared-horton", "--t", 4],
            ["lattice-convex", "--t", 6],
            ["es-lower", "--k", 10],
            ["double-chain", "--m", 2, "--rest", 3],
            ["pentagon-witness"],
            ["random", "--n", 5, "--grid-bits", 8],
            ["es-lower", "--k", 3],
            ["cluster", "--n", 49, "--a", 40, "--b", 2],
        ],
    )
    def test_kinds_and_errors(self, capsys, args):
        code, out, _ = run(capsys, "gen", *args)
        ok = args[0] in ("squared-horton", "lattice-convex", "pentagon-witness", "double-chain") or args == [
            "es-lower", "--k", 10]
        assert code == (0 if ok else EXIT_INVALID)
        if ok:
            assert len(parse_points(out)) >= 3


class TestCount:
    def test_five_points(self, tmp_path, capsys):
        path = write(tmp_path, "p.txt", PointSet(PENTAGON))
        code, out, _ = run(capsys, "count", path, "--mode", "fast", "--what", "gons", "--json")
        doc = json.loads(out)
        assert code == 0 and doc["n"] == 5 and doc["mode"] == "fast" and doc["what"] == "gons"
        assert [doc["counts"][k]["gons_projective"] for k in "345"] == [40, 15, 1]
        for rec in doc["counts"].values():
            assert set(rec) <= set(COUNT_FIELDS)
            assert all(type(v) is int for v in rec.values())

    def test_perfect_horton_eight(self, tmp_path, capsys):
        out = tmp_path / "h.txt"
        run(capsys, "gen", "perfect-horton", "--n", 8, "--out", out)
        code, text, _ = run(capsys, "count", out, "--what", "holes", "--max-k", 3)
        assert json.loads(text)["counts"]["3"]["holes_projective"] == 98

    @pytest.mark.parametrize("what", ["gons", "holes", "islands"])
    def test_oracle_equals_fast(self, tmp_path, capsys, what):
        out = tmp_path / "r.txt"
        run(capsys, "gen", "random", "--n", 9, "--seed", 3, "--out", out)
        docs = []
        for mode in ("oracle", "fast"):
            code, text, _ = run(capsys, "count", out, "--mode", mode, "--what", what)
            assert code == 0
            doc = json.loads(text)
            doc.pop("mode")
            docs.append(harness_cli.dumps(doc))
        assert docs[0] == docs[1]

    def test_threads_do_not_change_bytes(self, tmp_path, capsys):
        out = tmp_path / "r.txt"
        run(capsys, "gen", "random", "--n", 12, "--out", out)
        a = run(capsys, "--threads", 1, "count", out, "--what", "holes")[1]
        b = run(capsys, "--threads", 3, "count", out, "--what", "holes")[1]
        assert a == b

    def test_invalid_inputs(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("3\n0 0\n1 1\n2 2\n")
        code, _, err = run(capsys, "count", bad)
        assert code == EXIT_INVALID and "collinear" in err
        big = tmp_path / "big.txt"
        run(capsys, "gen", "random", "--n", 21, "--out", big)
        assert run(capsys, "count", big, "--mode", "oracle", "--max-k", 3)[0] == EXIT_INVALID
        assert run(capsys, "count", big, "--mode", "oracle", "--max-k", 3, "--force")[0] == 0
        assert run(capsys, "count", big, "--max-k", 30)[0] == EXIT_INVALID
        assert run(capsys, "count", tmp_path / "missing.txt")[0] == EXIT_INVALID


class TestVerify:
    def test_horton(self, capsys):
        code, out, _ = run(capsys, "verify", "horton", "--z-max", 4, "--json")
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        by_z = {t["z"]: t["measured"] for t in doc["trials"]}
        assert [by_z[2][k] for k in ("affine", "type1a", "type1b", "total", "opendiag")] == [4, 4, 4, 12, 7]
        assert [by_z[3][k] for k in ("affine", "type1a", "type1b", "total")] == [40, 36, 22, 98]
        assert by_z[4]["total"] == 570

    def test_closed_forms(self):
        assert closed_forms(3) == {"affine": 40, "type1a": 36, "type1b": 22, "total": 98, "opendiag": 21}
        assert closed_forms(4)["total"] == Fraction(570)

    def test_failure_exit_code(self, capsys, monkeypatch):
        real = harness_cli.closed_forms

        def wrong(z):
            forms = real(z)
            forms["total"] += 1
            return forms

        monkeypatch.setattr(harness_cli, "closed_forms", wrong)
        code, out, err = run(capsys, "verify", "horton", "--z-max", 2)
        assert code == EXIT_VERIFY and "FAIL" in out and "verification failed" in err


class TestExperiment:
    def test_trivial(self, capsys):
        code, out, _ = run(capsys, "experiment", "wedges", "--n", 5, "--trials", 1, "--json")
        doc = json.loads(out)
        assert code == 0
        assert 0 <= doc["trials"][0]["empty_3wedges"] <= 5 * 6

    def test_deterministic_and_bounded(self, capsys):
        args = ["experiment", "wedges", "--n", 16, "--n", 32, "--trials", 12, "--seed", 5, "--json"]
        a = run(capsys, *args)
        b = run(capsys, *args)
        assert a == b
        doc = json.loads(a[1])
        assert doc["aggregates"]["16"]["mean"] <= doc["aggregates"]["16"]["bound"]
        assert "ratio 32/16" in doc["aggregates"]

    def test_small_n_rejected(self, capsys):
        assert run(capsys, "experiment", "wedges", "--n", 4)[0] == EXIT_INVALID


class TestSearch:
    def test_finds_six_gon_free_octuple(self, tmp_path, capsys):
        out = tmp_path / "w.txt"
        code, text, _ = run(capsys, "search", "--n", 8, "--k", 6, "--trials", 3000, "--seed", 0, "--json",
                            "--out", out)
        doc = json.loads(text)
        assert code == 0 and doc["found"]
        assert largest_gon_fast(parse_points(out.read_text())) < 6

    @pytest.mark.parametrize("n, k", [(5, 5), (9, 6)])
    def test_impossible(self, capsys, n, k):
        code, text, _ = run(capsys, "search", "--n", n, "--k", k, "--trials", 150, "--json")
        doc = json.loads(text)
        assert code == 0 and not doc["found"] and doc["largest_gon"] >= k

    def test_bad(self, capsys):
        assert run(capsys, "search", "--n", 4, "--k", 6)[0] == EXIT_INVALID


class TestProp5Command:
    def test_square(self, tmp_path, capsys):
        path = write(tmp_path, "sq.txt", PointSet([(0, 0), (1, 0), (1, 1), (0, 1)]))
        code, text, _ = run(capsys, "prop5", path, "--json")
        doc = json.loads(text)
        assert code == 0 and doc["passed"]
        assert doc["aggregates"]["bound3"] == 6 and doc["aggregates"]["S_size"] == 6


class TestConstruction:
    def test_report_and_csv(self, tmp_path, capsys):
        table = tmp_path / "rows.csv"
        code, text, _ = run(capsys, "construction", "--n", 49, "--a", 2, "--b", 4, "--k", 4, "--csv", table, "--json")
        doc = json.loads(text)
        assert code == 0 and doc["passed"]
        assert doc["aggregates"]["two_cluster_bound"] == 219
        assert doc["aggregates"]["holes_projective_total"] >= 219
        rows = list(csv.DictReader(table.open()))
        assert [int(r["k"]) for r in rows] == [3, 4]
        for r in rows:
            assert int(r["holes_projective"]) >= int(r["certified_lower_bound"])
            assert r["in_cluster_affine_holes"] == r["expected_in_cluster"]

    def test_thm5(self, capsys):
        code, text, _ = run(capsys, "construction", "--n", 64, "--mode", "thm5", "--x", 16, "--k", 3, "--json")
        doc = json.loads(text)
        assert code == 0 and (doc["parameters"]["a"], doc["parameters"]["b"]) == (2, 4)

    def test_infeasible(self, capsys):
        assert run(capsys, "construction", "--n", 49, "--a", 40, "--b", 2)[0] == EXIT_INVALID


def test_console_entry(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "projholes", "gen", "pentagon-witness"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout.splitlines()[0].startswith("#")
    proc = subprocess.run([sys.executable, "-m", "projholes", "gen", "horton"], capture_output=True, text=True)
    assert proc.returncode == EXIT_INVALID
