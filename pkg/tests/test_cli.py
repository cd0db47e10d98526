"""Command-line surface and report serialization."""

import csv
import json
import os

import numpy as np
import pytest

import qcqp_stability as q
from qcqp_stability import report
from qcqp_stability.cli import run


def write_problem(tmp_path, inst, name="p.json"):
    path = tmp_path / name
    q.save_instance(inst, path)
    return str(path)


class TestExitCodes:
    def test_unknown_command(self):
        assert run(["frobnicate"]) == 1

    def test_missing_file(self, tmp_path):
        assert run(["solve", str(tmp_path / "missing.json")]) == 1

    def test_validate_ok(self, tmp_path, capsys):
        path = write_problem(tmp_path, q.make_lipschitz(3))
        assert run(["validate", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["valid"] is True

    def test_validate_non_psd_names_constraint(self, tmp_path, capsys):
        bad = {"dim": 1, "objective": {"T": [[0.0]], "c": [0.0]},
               "constraints": [{"T": [[-1.0]], "c": [0.0], "alpha": 0.0}],
               "label": "bad"}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert run(["validate", str(path)]) == 1
        out = json.loads(capsys.readouterr().out)
        assert out["valid"] is False
        assert any("constraint 0" in d["where"] for d in out["diagnostics"])

    def test_inconclusive_qpr_exits_two(self, tmp_path):
        # more halfspaces than the face-enumeration cap, zero form on the
        # kernel: the sampling-only path lands on the sign boundary
        rng = np.random.default_rng(2)
        n = 3
        cons = []
        for _ in range(21):
            ci = rng.normal(size=n)
            ci[0] = abs(ci[0]) + 0.5   # -e1 satisfies every halfspace
            cons.append((np.zeros((n, n)), ci, 0.0))
        inst = q.make_instance(np.zeros((n, n)), np.zeros(n), cons)
        path = write_problem(tmp_path, inst)
        assert run(["qpr", path]) == 2


class TestRepro:
    def test_lipschitz_report(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["repro", "lipschitz", "--n", "8", "--out", str(out)]) == 0
        d = json.loads(out.read_text())
        assert d["solve"]["status"] == "Solved"
        assert d["solve"]["value"] == pytest.approx(-1.0, abs=1e-6)
        assert (d["conditions"]["cond_i"], d["conditions"]["cond_ii"],
                d["conditions"]["cond_iii"]) == (True, True, True)

    def test_qpr_on_perturbed_k_not_open(self, tmp_path, capsys):
        prob = tmp_path / "kno3.json"
        out = tmp_path / "r.json"
        assert run(["repro", "k_not_open", "--n", "3", "--perturbed",
                    "--problem-out", str(prob), "--out", str(out)]) in (0, 2)
        capsys.readouterr()
        assert run(["qpr", str(prob)]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["trivial"] is False
        assert abs(d["witness"][2]) >= 0.999

    def test_problem_file_round_trip(self, tmp_path):
        prob = tmp_path / "u.json"
        out = tmp_path / "r.json"
        assert run(["repro", "unbounded_L2", "--n", "4",
                    "--problem-out", str(prob), "--out", str(out)]) == 0
        back = q.load_instance(prob)
        assert q.omega_distance(back, q.make_unbounded(4)) == 0.0

    def test_bad_family_arguments(self, capsys):
        assert run(["repro", "k_not_open", "--n", "13"]) == 1
        capsys.readouterr()

    def test_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run(["repro", "not_usc", "--n", "3", "--seed", "1",
                        "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestAnalysisCommands:
    def test_solve_json_schema(self, tmp_path, capsys):
        path = write_problem(tmp_path, q.make_lipschitz(3))
        assert run(["solve", path]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["status"] == "Solved"
        assert d["value"] == pytest.approx(-1.0, abs=1e-6)
        assert isinstance(d["minimizers"], list) and d["minimizers"]

    def test_conditions_json_schema(self, tmp_path, capsys):
        path = write_problem(tmp_path, q.make_lipschitz(3))
        assert run(["conditions", path]) == 0
        d = json.loads(capsys.readouterr().out)
        for key in ("cond_i", "cond_ii", "cond_iii", "predictions"):
            assert key in d
        assert d["predictions"]["usc"] is True

    def test_regularity_and_recession(self, tmp_path, capsys):
        path = write_problem(tmp_path, q.make_lipschitz(3))
        assert run(["regularity", path]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["status"] == "Regular"
        assert run(["recession", path]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["kernel_dim"] == 0


class TestStabilityOutput:
    def test_csv_columns_and_figure(self, tmp_path):
        path = write_problem(tmp_path, q.make_lipschitz(2))
        out = tmp_path / "sweep.csv"
        code = run(["stability", path, "--format", "csv", "--out", str(out),
                    "--deltas", "0.1", "0.03", "--samples", "3"])
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == report.CSV_COLUMNS
        assert len(rows) == 3
        assert os.path.exists(tmp_path / "sweep.png")

    def test_no_plot_flag(self, tmp_path):
        path = write_problem(tmp_path, q.make_lipschitz(2))
        out = tmp_path / "sweep.csv"
        run(["stability", path, "--format", "csv", "--out", str(out),
             "--deltas", "0.1", "--samples", "2", "--no-plot"])
        assert os.path.exists(out)
        assert not os.path.exists(tmp_path / "sweep.png")

    def test_csv_floats_round_trip_lossless(self, tmp_path):
        spec = q.PerturbationSpec(radius_schedule=(0.1,), samples_per_radius=3)
        rep = q.stability_sweep(q.make_lipschitz(2), spec,
                                q.SolverConfig(restarts=6))
        out = tmp_path / "rows.csv"
        report.write_stability_csv(rep, out)
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        for row, parsed in zip(rep.rows, rows):
            for col in report.CSV_COLUMNS:
                assert float(parsed[col]) == float(getattr(row, col))


class TestReportHelpers:
    def test_nonfinite_values_serializable(self):
        res = q.solve_global(q.make_instance(
            np.zeros((2, 2)), np.zeros(2),
            [(np.eye(2), np.zeros(2), 1.0)]), q.SolverConfig(restarts=4))
        d = report.solve_result_to_dict(res)
        assert d["value"] == "inf"
        json.dumps(d)

    def test_emit_stability_rejects_unknown_format(self, tmp_path):
        rep = q.StabilityReport([])
        with pytest.raises(ValueError):
            report.emit_stability(rep, "xml", tmp_path / "x.xml")
