import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from qpagerank.cli import main

DATA = Path(__file__).resolve().parents[1] / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def tables(text):
    return json.loads(text)["tables"]


def csv_sections(text):
    out = {}
    for block in text.strip().split("\n\n"):
        lines = block.splitlines()
        name = lines[0][2:]
        out[name] = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return out


class TestRankClassical:
    def test_two_cycle(self, capsys):
        code, out, _ = run(capsys, "rank-classical", DATA / "two_cycle.tsv")
        assert code == 0
        rows = tables(out)["pagerank"]
        assert [r["node"] for r in rows] == [1, 2]
        np.testing.assert_allclose([r["score"] for r in rows], 0.5, atol=1e-12)

    def test_dangling_chain_csv(self, capsys):
        code, out, _ = run(capsys, "rank-classical", DATA / "dangling_chain.tsv", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        np.testing.assert_allclose([float(r["score"]) for r in rows], [0.350877, 0.649123], atol=1e-6)


class TestRankQuantum:
    def test_norm_variant_conserves(self, capsys):
        code, out, _ = run(capsys, "rank-quantum", DATA / "four_node.tsv", "--variant", "norm", "--m", "0", "3")
        assert code == 0
        inst = tables(out)["instantaneous"]
        for m in (0, 3):
            assert sum(r["I_q"] for r in inst if r["m"] == m) == pytest.approx(1.0, abs=1e-10)

    def test_bound_halves_when_window_doubles(self, capsys):
        _, out, _ = run(capsys, "rank-quantum", DATA / "k3.tsv", "--t", "50", "100", "--nodes", "1")
        avg = {r["t"]: r for r in tables(out)["average"]}
        assert avg[100]["mixing_bound"] == pytest.approx(avg[50]["mixing_bound"] / 2)
        assert set(avg[50]) == {"node", "t", "I_avg", "I_infinity", "mixing_bound"}

    def test_explicit_psi0(self, capsys, tmp_path):
        inside = tmp_path / "psi1.json"
        inside.write_text(json.dumps([0.075**0.5, 0.925**0.5, 0.0, [0.0, 0.0]]))
        code, out, _ = run(capsys, "rank-quantum", DATA / "two_cycle.tsv", "--psi0", inside, "--m", "0", "--variant", "norm")
        assert code == 0
        # psi_1 puts weight g_1k on the second register
        np.testing.assert_allclose([r["I_q"] for r in tables(out)["instantaneous"]], [0.075, 0.925], atol=1e-12)
        outside = tmp_path / "e1.json"
        outside.write_text(json.dumps([1.0, 0.0, 0.0, 0.0]))
        code, _, err = run(capsys, "rank-quantum", DATA / "two_cycle.tsv", "--psi0", outside)
        assert code == 2 and "initial state" in err
        short = tmp_path / "short.json"
        short.write_text("[1.0]")
        assert run(capsys, "rank-quantum", DATA / "two_cycle.tsv", "--psi0", short)[0] == 2

    def test_bad_node(self, capsys):
        code, _, _ = run(capsys, "rank-quantum", DATA / "two_cycle.tsv", "--nodes", "3")
        assert code == 2


class TestPerturb:
    def test_two_cycle_dump(self, capsys):
        code, out, _ = run(capsys, "perturb", DATA / "two_cycle.tsv", DATA / "two_cycle.perturbation.json", "--order", "2")
        assert code == 0
        t = tables(out)
        t1 = {(r["i"], r["j"]): r["value"] for r in t["T_coefficients"] if r["order"] == 1}
        assert t1[1, 2] == pytest.approx(-0.05, abs=1e-15)
        radius = {r["name"]: r["value"] for r in t["radius"]}
        assert radius["r_ij_min"] == pytest.approx(0.75)
        assert radius["r0"] <= radius["r1"]
        assert all(r["holds"] for r in t["bounds"])

    def test_comparison_within_bound(self, capsys):
        code, out, _ = run(
            capsys, "perturb", DATA / "four_node.tsv", DATA / "four_node.perturbation.json", "--nodes", "1", "2", "--m", "0", "2"
        )
        assert code == 0
        rows = tables(out)["comparison"]
        assert rows and all(r["within_bound"] for r in rows)

    def test_evaluation_rows(self, capsys):
        code, out, _ = run(
            capsys, "perturb", DATA / "two_cycle.tsv", DATA / "two_cycle.perturbation.json", "--chi", "0.001"
        )
        assert code == 0
        row = tables(out)["evaluation"][0]
        assert row["series"] == pytest.approx(row["oracle"], abs=1e-8)

    def test_zero_perturbation(self, capsys):
        code, out, _ = run(capsys, "perturb", DATA / "four_node.tsv", DATA / "zero.perturbation.json", "--order", "2")
        assert code == 0
        t = tables(out)
        assert {r["name"]: r["value"] for r in t["radius"]}["r0"] == "inf"
        assert all(r["value"] == 0 for r in t["I_q_coefficients"] if r["order"] > 0)

    def test_chi_outside_radius(self, capsys):
        code, _, err = run(capsys, "perturb", DATA / "two_cycle.tsv", DATA / "two_cycle.perturbation.json", "--chi", "0.5")
        assert code == 6 and "r0" in err

    def test_bad_order(self, capsys):
        code, _, _ = run(capsys, "perturb", DATA / "two_cycle.tsv", DATA / "two_cycle.perturbation.json", "--order", "9")
        assert code == 2

    def test_json_csv_parity(self, capsys):
        args = ["perturb", DATA / "k3.tsv", DATA / "k3_breaking.perturbation.json", "--order", "2"]
        _, js, _ = run(capsys, *args)
        _, cs, _ = run(capsys, *args, "--format", "csv")
        jt, ct = tables(js), csv_sections(cs)
        assert list(jt) == list(ct)
        for name in jt:
            assert len(jt[name]) == len(ct[name])
            for a, b in zip(jt[name], ct[name]):
                for key, value in a.items():
                    if isinstance(value, bool):
                        assert b[key] == str(value).lower()
                    elif isinstance(value, float):
                        assert float(b[key]) == value
                    else:
                        assert b[key] == str(value)


class TestErrors:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "rank-classical", tmp_path / "nope.tsv")
        assert code == 2 and "nope.tsv" in err

    def test_duplicate_edge(self, capsys, tmp_path):
        p = tmp_path / "g.tsv"
        p.write_text("1\t2\n1\t2\n")
        code, _, err = run(capsys, "rank-classical", p)
        assert code == 2 and "line 2" in err

    def test_row_sum(self, capsys, tmp_path):
        p = tmp_path / "p.json"
        p.write_text(json.dumps({"order_terms": [{"order": 1, "entries": [{"i": 1, "j": 1, "value": 0.1}]}]}))
        code, _, _ = run(capsys, "perturb", DATA / "two_cycle.tsv", p)
        assert code == 5

    @pytest.mark.parametrize("alpha", ["0", "1", "abc"])
    def test_bad_alpha(self, capsys, alpha):
        with pytest.raises(SystemExit) as info:
            main(["rank-classical", str(DATA / "k3.tsv"), "--alpha", alpha])
        assert info.value.code == 2


def test_out_file_matches_stdout(capsys, tmp_path):
    args = ["rank-quantum", DATA / "four_node.tsv", "--m", "1"]
    _, out, _ = run(capsys, *args)
    target = tmp_path / "out.json"
    code, printed, _ = run(capsys, *args, "--out", target)
    assert code == 0 and printed == ""
    assert target.read_text() == out


def test_deterministic(capsys):
    args = ["perturb", DATA / "four_node.tsv", DATA / "four_node.perturbation.json", "--order", "3"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_validate_subset(capsys):
    code, out, err = run(capsys, "validate", "--criteria", "6", "10")
    assert code == 0
    assert "criterion  6 [PASS]" in err and "criterion 10 [PASS]" in err
    assert [r["number"] for r in tables(out)["criteria"]] == [6, 10]


def test_validate_unknown(capsys):
    code, _, _ = run(capsys, "validate", "--criteria", "11")
    assert code == 2
