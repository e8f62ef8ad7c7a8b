import csv
import io
import json
import subprocess
import sys

import pytest

from hyperlab.cli import main
from hyperlab.criterion import CriterionInstance, CriterionReport
from hyperlab.report import Report, Verdict
from hyperlab.seqspace import Axis, WindowVector
from hyperlab.shift import BackwardShift, RefutationCertificate, WeightSequence

N = Axis.NATURAL


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_instance(tmp_path, value, p=2.0, drop=None, name="inst.json"):
    basis = [WindowVector.basis(j, p, N) for j in range(1, 4)]
    inst = CriterionInstance(BackwardShift(WeightSequence.constant(value, N)), basis, basis, list(range(1, 31)))
    data = inst.to_dict()
    if drop:
        del data[drop]
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


SALAS_UNI = ["salas", "--unilateral", "--constant", "2", "--horizon", "40", "--threshold", "1e6"]
SALAS_BI = ["salas", "--bilateral", "--piecewise", "0.5", "2", "--eps", "0.1", "--q", "2", "--horizon", "64"]


class TestExitCodes:
    def test_salas_evidence(self, capsys):
        code, out, _ = run(SALAS_UNI, capsys)
        rep = Report.from_dict(json.loads(out))
        assert code == 0 and rep.verdict is Verdict.EVIDENCE_HYPERCYCLIC and rep.witness["n"] == 20

    def test_salas_undetermined(self, capsys):
        code, out, _ = run(["salas", "--unilateral", "--constant", "1", "--horizon", "40"], capsys)
        assert code == 2 and json.loads(out)["verdict"] == "UNDETERMINED_AT_HORIZON"

    def test_salas_bilateral(self, capsys):
        code, out, _ = run(SALAS_BI, capsys)
        assert code == 0 and json.loads(out)["witness"]["n"] == 6

    def test_malformed_weights(self, capsys, tmp_path):
        bad = tmp_path / "w.json"
        bad.write_text('{"axis": "Q", "rule": {"kind": "constant", "value": 2}}')
        code, out, err = run(["salas", "--weights", str(bad)], capsys)
        assert code == 1 and out == "" and "error" in err

    def test_nonpositive_weight(self, capsys):
        assert run(["salas", "--constant", "-1"], capsys)[0] == 1

    def test_unknown_flag(self, capsys):
        assert run(["salas", "--bogus"], capsys)[0] == 1

    def test_no_subcommand(self, capsys):
        assert run([], capsys)[0] == 1

    def test_criterion_pass(self, capsys, tmp_path):
        code, out, _ = run(["criterion", write_instance(tmp_path, 2)], capsys)
        rep = CriterionReport.from_dict(json.loads(out))
        assert code == 0 and rep.overall

    def test_criterion_constant_one_fails_condition3(self, capsys, tmp_path):
        code, out, _ = run(["criterion", write_instance(tmp_path, 1)], capsys)
        data = json.loads(out)
        assert code == 2 and data["cond3"]["verdict"] == "FAIL"
        assert data["cond1"]["verdict"] == "PASS" and data["cond2"]["verdict"] == "PASS"
        assert data["cond3"]["series"]["residual_a_z0"] == [1.0] * 30

    def test_criterion_missing_nk(self, capsys, tmp_path):
        code, _, err = run(["criterion", write_instance(tmp_path, 2, drop="nk")], capsys)
        assert code == 1 and "nk" in err

    def test_criterion_l1_instance(self, capsys, tmp_path):
        code, _, err = run(["criterion", write_instance(tmp_path, 2, p=1.0)], capsys)
        assert code == 1 and "reflexive" in err.lower()

    def test_criterion_missing_file(self, capsys, tmp_path):
        assert run(["criterion", str(tmp_path / "nope.json")], capsys)[0] == 1

    def test_refute_cond1(self, capsys):
        code, out, _ = run(["refute", "--constant", "2", "--doubling", "256"], capsys)
        cert = RefutationCertificate.from_dict(json.loads(out))
        assert code == 0 and cert.violated_condition.value == "COND1"

    def test_refute_cond2(self, capsys):
        code, out, _ = run(["refute", "--constant", "0.5", "--doubling", "256"], capsys)
        assert code == 0 and json.loads(out)["violated_condition"] == "COND2"

    def test_refute_undetermined(self, capsys):
        code, out, _ = run(["refute", "--constant", "2", "--nk", "1", "--nmax", "1"], capsys)
        assert code == 2 and json.loads(out)["verdict"] == "UNDETERMINED_AT_HORIZON"

    def test_refute_empty_nk(self, capsys):
        assert run(["refute", "--constant", "2"], capsys)[0] == 1

    def test_transitivity(self, capsys):
        argv = ["transitivity", "--constant", "2", "--g-center", "1:1", "--g-radius", "0.5",
                "--w-center", "1:1", "--w-indices", "1", "--min-n", "1"]
        code, out, _ = run(argv, capsys)
        assert code == 0 and json.loads(out)["witness"]["n"] == 2

    def test_transitivity_undetermined(self, capsys):
        argv = ["transitivity", "--constant", "1", "--g-center", "1:0", "--g-radius", "0.05",
                "--w-center", "1:1", "--w-indices", "1"]
        assert run(argv, capsys)[0] == 2

    def test_moebius_classify(self, capsys):
        code, out, _ = run(["moebius", "classify", "--coeffs", "1", "1", "-1", "3"], capsys)
        s = json.loads(out)["summary"]
        assert code == 0 and s["kind"] == "PARABOLIC"
        assert s["fixed_points"][0]["value"] == pytest.approx([1, 0], abs=1e-12)
        assert s["half_plane"]["a"] == pytest.approx([1, 0], abs=1e-12)

    def test_moebius_non_self_map(self, capsys):
        assert run(["moebius", "classify", "--symbol", "(1+z)/(1-z)"], capsys)[0] == 1

    def test_moebius_iterate(self, capsys):
        code, out, _ = run(["moebius", "iterate", "--symbol", "(1+z)/(3-z)", "--n", "5"], capsys)
        assert code == 0 and json.loads(out)["summary"]["value"] == pytest.approx([5 / 7, 0], abs=1e-14)

    def test_moebius_identity_check(self, capsys):
        code, out, _ = run(["moebius", "identity-check", "--a", "1", "--z", "0.5", "--n", "1"], capsys)
        assert code == 0 and json.loads(out)["summary"]["lhs_difference"] == pytest.approx([4 / 15, 0])

    def test_hardy_obstruct(self, capsys):
        code, out, _ = run(["hardy", "obstruct", "--symbol", "z/(2-z)", "--f", "1+z"], capsys)
        data = json.loads(out)
        assert code == 0 and data["summary"]["max_deviation"] < 1e-9
        assert data["witness"]["f_p"] == [1.0, 0.0]

    def test_hardy_obstruct_non_self_map(self, capsys):
        assert run(["hardy", "obstruct", "--symbol", "2*z", "--f", "z"], capsys)[0] == 1

    def test_hardy_estimate(self, capsys):
        code, out, _ = run(["hardy", "estimate", "--f", "z", "--z", "0.5", "--w", "0"], capsys)
        assert code == 0 and json.loads(out)["summary"]["rhs"] == pytest.approx(2.8284, abs=1e-4)

    def test_hardy_cluster(self, capsys):
        assert run(["hardy", "cluster", "--f", "z", "--n", "4096"], capsys)[0] == 0

    def test_negative_complex_values(self, capsys):
        code, out, _ = run(["hardy", "cluster", "--f", "z", "--grid", "0", "0.5", "-0.5j", "--n", "64"], capsys)
        assert code == 0 and json.loads(out)["summary"]["grid_size"] == 3
        code, out, _ = run(["hardy", "estimate", "--f", "z", "--z", "-0.5j", "--w", "-1e-1-2e-1i"], capsys)
        assert code == 0 and json.loads(out)["summary"]["w"] == pytest.approx([-0.1, -0.2])

    def test_bad_polynomial(self, capsys):
        assert run(["hardy", "decay", "--f", "1/z"], capsys)[0] == 1


class TestOutput:
    def test_decay_csv(self, capsys):
        code, out, _ = run(["--format", "csv", "hardy", "decay", "--a", "1", "--z", "0.5", "--nmax", "100"], capsys)
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and rows[0] == ["n", "d_n", "d_n_sqrt_n"]
        assert len(rows) == 101 and float(rows[1][1]) == pytest.approx(4 / 15, abs=1e-15)

    @pytest.mark.parametrize("argv", [SALAS_BI, ["refute", "--constant", "2", "--doubling", "64"],
                                      ["hardy", "obstruct", "--symbol", "z/(2-z)", "--f", "1+z", "--N", "5"]])
    def test_csv_first_column_is_n(self, capsys, argv):
        code, out, _ = run(argv + ["--format", "csv"], capsys)
        assert out.splitlines()[0].split(",")[0] == "n"

    def test_csv_without_series(self, capsys):
        code, _, err = run(["--format", "csv", "moebius", "classify", "--coeffs", "1", "1", "-1", "3"], capsys)
        assert code == 1 and "json" in err

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "r.json"
        code, out, _ = run(SALAS_UNI + ["--out", str(target)], capsys)
        assert code == 0 and out == "" and json.loads(target.read_text())["witness"]["n"] == 20

    @pytest.mark.parametrize("argv", [SALAS_UNI, SALAS_BI, ["hardy", "decay", "--nmax", "50"],
                                      ["moebius", "identity-check", "--random", "20", "--n", "100"],
                                      ["hardy", "estimate", "--random", "20"],
                                      ["transitivity", "--constant", "2", "--random", "10", "--min-n", "1"]])
    def test_report_round_trip(self, capsys, argv):
        _, out, _ = run(argv, capsys)
        data = json.loads(out)
        assert Report.from_dict(data).to_dict() == data

    def test_certificate_round_trip(self, capsys):
        _, out, _ = run(["refute", "--periodic", "2", "0.5", "--doubling", "128"], capsys)
        data = json.loads(out)
        assert RefutationCertificate.from_dict(data).to_dict() == data

    def test_criterion_round_trip(self, capsys, tmp_path):
        _, out, _ = run(["criterion", write_instance(tmp_path, 2)], capsys)
        data = json.loads(out)
        assert CriterionReport.from_dict(data).to_dict() == data


class TestConfig:
    def test_config_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"horizon": 10, "threshold": 1e6}))
        code, out, _ = run(["salas", "--unilateral", "--constant", "2", "--config", str(cfg)], capsys)
        assert code == 2 and json.loads(out)["summary"]["horizon"] == 10

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"horizon": 10, "threshold": 1e6}))
        code, out, _ = run(["salas", "--unilateral", "--constant", "2", "--config", str(cfg), "--horizon", "40"], capsys)
        assert code == 0 and json.loads(out)["witness"]["n"] == 20

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert run(["salas", "--config", str(cfg)], capsys)[0] == 1

    def test_help_mentions_precedence(self, capsys):
        with pytest.raises(SystemExit):
            main(["salas", "--help"])
        assert "override" in capsys.readouterr().out


class TestDeterminism:
    SEEDED = [["transitivity", "--constant", "2", "--random", "30", "--min-n", "1", "--seed", "5"],
              ["moebius", "identity-check", "--random", "50", "--n", "1000", "--seed", "5"],
              ["hardy", "estimate", "--random", "50", "--seed", "5"],
              ["--format", "csv", "hardy", "decay", "--nmax", "5000", "--f", "z^2 - z"],
              ["--format", "csv", "salas", "--unilateral", "--periodic", "0.5", "3", "--horizon", "3000"]]

    @pytest.mark.parametrize("argv", SEEDED)
    def test_threads_and_repeats(self, capsys, argv):
        outs = [run(argv + ["--threads", t], capsys)[1] for t in ("1", "4", "1")]
        assert outs[0] == outs[1] == outs[2]

    def test_seed_matters(self, capsys):
        a = run(["hardy", "estimate", "--random", "5", "--seed", "1"], capsys)[1]
        b = run(["hardy", "estimate", "--random", "5", "--seed", "2"], capsys)[1]
        assert a != b

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "hyperlab"] + SALAS_UNI, capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(proc.stdout)["witness"]["n"] == 20
