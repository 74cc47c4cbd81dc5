"""Benchmark catalog, coverage reports, rendering, and the CLI."""

import json
from fractions import Fraction

import pytest

from mixcut import bench, cli
from mixcut.core import ValidationError, instance_to_json, make_cut


class TestCatalog:
    def test_first_sequence(self):
        inst = bench.benchmark_instance("L", 5, 3)
        assert inst.h == (20, 18, 14, 11, 6)
        assert inst.p == 3 and inst.uniform

    def test_second_sequence(self):
        inst = bench.benchmark_instance("K", 7, 5)
        assert inst.h == (40, 38, 34, 31, 26, 16, 8)
        assert inst.p == 5

    def test_trivial_single_scenario(self):
        inst = bench.benchmark_instance("L", 1, 1)
        assert inst.m == 1 and inst.p == 1

    @pytest.mark.parametrize("m,p", [(0, 1), (11, 3), (4, 5), (3, 0)])
    def test_range_validation(self, m, p):
        with pytest.raises(ValidationError):
            bench.benchmark_instance("L", m, p)


class TestRendering:
    @pytest.mark.parametrize(
        "fraction,expected",
        [
            (Fraction(1), "100.0"),
            (Fraction(11, 13), "84.62"),
            (Fraction(12, 13), "92.31"),
            (Fraction(180, 298), "60.4"),
            (Fraction(63, 100), "63.0"),
            (Fraction(438, 439), "99.77"),
            (Fraction(0), "0.0"),
        ],
    )
    def test_table_conventions(self, fraction, expected):
        assert bench.render_pct(fraction) == expected

    def test_half_up(self):
        assert bench.render_pct(Fraction(1, 800)) == "0.13"  # 0.125% rounds up


class TestCoverage:
    def test_worked_cell(self):
        report = bench.benchmark_coverage("L", 5, 3)
        assert report.facet_total == 13
        assert report.pct("zhao") == "84.62"
        assert report.pct("blp_uniform") == "92.31"
        assert report.pct("blp_generic") == "100.0"
        assert not bench.check_against_paper(report)

    def test_deterministic(self):
        a = bench.benchmark_coverage("L", 6, 3)
        b = bench.benchmark_coverage("L", 6, 3)
        assert a == b

    def test_improvement_identities(self):
        r = bench.benchmark_coverage("K", 6, 4)
        imp_mid, imp_top, total = r.improvements()
        assert imp_mid == r.fraction("blp_uniform") - r.fraction("zhao")
        assert imp_top == r.fraction("blp_generic") - r.fraction("blp_uniform")
        assert total == imp_mid + imp_top

    def test_trivial_cells_flagged(self):
        assert bench.benchmark_coverage("L", 4, 1).trivial
        assert bench.benchmark_coverage("L", 4, 4).trivial
        assert not bench.benchmark_coverage("L", 4, 2).trivial

    def test_budget_marks_incomplete(self):
        report = bench.coverage(
            bench.benchmark_instance("L", 8, 4), budget_seconds=1e-9
        )
        assert report.incomplete
        assert all(v == 0 for _, v in report.covered)

    def test_monotone_coverage(self):
        r = bench.benchmark_coverage("K", 7, 5)
        assert (
            r.fraction("zhao")
            <= r.fraction("blp_uniform")
            <= r.fraction("blp_generic")
        )


class TestEmit:
    def test_markdown_dash_convention(self):
        rows = [bench.benchmark_coverage("L", 4, 2)]  # a 100% row
        text = bench.emit_report(rows, "markdown")
        assert "| - | 100.0 | - | - |" in text

    def test_empty_report_is_header_only(self):
        text = bench.emit_report([], "csv")
        assert text.splitlines() == [",".join(bench._COLUMNS)]

    def test_json_round_trip(self):
        rows = [
            bench.benchmark_coverage("L", 5, 3),
            bench.benchmark_coverage("K", 4, 2),
        ]
        back = bench.parse_report(bench.emit_report(rows, "json"))
        assert back == sorted(rows, key=lambda r: (r.example, r.m, r.p))

    def test_unknown_format_rejected(self):
        with pytest.raises(ValidationError):
            bench.emit_report([], "yaml")


class TestCli:
    def test_coverage_check_paper_ok(self, capsys):
        code = cli.main(["coverage", "--example", "L", "--m", "5", "--p", "3", "--check-paper"])
        assert code == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "84.62" in out and "92.31" in out

    def test_coverage_check_paper_mismatch(self, capsys):
        # the middle family column of this cell cannot be reproduced from the
        # stated closed form; the CLI reports it via the dedicated exit code
        code = cli.main(["coverage", "--example", "L", "--m", "6", "--p", "4", "--check-paper"])
        assert code == cli.EXIT_PAPER_MISMATCH
        err = capsys.readouterr().err
        assert "blp_uniform" in err

    def test_hull_check_generate_pipeline(self, tmp_path, capsys):
        inst_file = tmp_path / "inst.json"
        inst_file.write_text(instance_to_json(bench.benchmark_instance("L", 4, 2)))
        out_file = tmp_path / "facets.json"
        assert cli.main(["hull", "--instance", str(inst_file), "--out", str(out_file)]) == 0
        payload = json.loads(out_file.read_text())
        assert payload["vertices"] and payload["facets"]

        cut_file = tmp_path / "cut.json"
        cut_file.write_text(json.dumps({"z": "1", "x": ["2", "4", "0", "0"], "rhs": "20"}))
        assert cli.main(["check", "--instance", str(inst_file), "--cut", str(cut_file), "--facet"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result == {"valid": True, "facet": True}

        params = tmp_path / "params.json"
        params.write_text(json.dumps({
            "instance": json.loads(inst_file.read_text()),
            "t_set": [1, 2],
        }))
        assert cli.main(["generate", "--family", "strengthened_star",
                         "--params", str(params), "--out", str(tmp_path / "cut2.json")]) == 0
        cut2 = json.loads((tmp_path / "cut2.json").read_text())
        assert cut2["z"] == "1"

    def test_generate_generic_certificate(self, tmp_path, capsys):
        inst = bench.benchmark_instance("L", 10, 4)
        params = tmp_path / "params.json"
        params.write_text(json.dumps({
            "instance": json.loads(instance_to_json(inst)),
            "r": 4, "t_set": [1, 4], "delta": ["-3", "-3"],
            "q_list": [5, 6], "phi": ["3", "3"],
        }))
        assert cli.main(["generate", "--family", "blp_generic", "--params", str(params)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["accepted"]
        assert doc["certificate"]["beta"][3] == "3"

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "inst.json"
        bad.write_text(json.dumps({"m": 2, "h": ["1", "2"], "epsilon": "1"}))
        assert cli.main(["hull", "--instance", str(bad)]) == cli.EXIT_VALIDATION

    def test_budget_exit_code(self, tmp_path, monkeypatch, capsys):
        inst_file = tmp_path / "inst.json"
        inst_file.write_text(instance_to_json(bench.benchmark_instance("L", 8, 4)))
        monkeypatch.setenv("MIXCUT_BUDGET", "0.000001")
        assert cli.main(["hull", "--instance", str(inst_file)]) == cli.EXIT_BUDGET

    def test_blp_aggregate_roundtrip(self, tmp_path, capsys):
        from mixcut import blp

        inst = bench.benchmark_instance("L", 3, 2)
        S = blp.build_sc(inst)
        set_file = tmp_path / "set.json"
        set_file.write_text(blp.bilinear_set_to_json(S))
        a = blp.BlpAssignment.build(blp.sc_constraint_index(S, 3, 1), 1)
        a_file = tmp_path / "assignment.json"
        a_file.write_text(blp.assignment_to_json(a))
        assert cli.main(["blp-aggregate", "--set", str(set_file), "--assignment", str(a_file)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["cut"]["z"] == "1"
        assert "audit" in doc
