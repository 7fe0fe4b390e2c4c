"""End-to-end checks of the command-line interface, in process via main()."""

import json
import math

import numpy as np
import pytest

from varpend import melnikov
from varpend.cli import main


def run_cli(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def csv_rows(text):
    lines = [ln for ln in text.strip().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [tuple(float(x) for x in ln.split(",")) for ln in lines[1:]]
    return header, rows


class TestParsing:
    def test_missing_required_flag_exits_1(self, capsys):
        rc, _, err = run_cli(capsys, ["simulate", "--eps", "0.1", "--beta", "0.05"])
        assert rc == 1
        assert "omega" in err

    def test_bad_flag_value_exits_1(self, capsys):
        rc, _, err = run_cli(capsys, ["melnikov", "--kind", "nonsense"])
        assert rc == 1
        assert "kind" in err

    def test_domain_error_exits_1(self, capsys):
        rc, _, err = run_cli(capsys, ["simulate", "--eps", "-0.5",
                                      "--beta", "0.05", "--omega", "0.8"])
        assert rc == 1
        assert "nonnegative" in err

    def test_numerical_failure_exits_2(self, capsys):
        rc, _, err = run_cli(capsys, ["simulate", "--eps", "0.3", "--beta", "0",
                                      "--omega", "0.5", "--v0", "1e8",
                                      "--periods", "5"])
        assert rc == 2
        assert "numerical failure" in err

    def test_help_exits_0(self, capsys):
        rc, out, _ = run_cli(capsys, ["--help"])
        assert rc == 0
        for name in ("simulate", "classify", "melnikov", "averaging",
                     "sweep", "elliptic-check"):
            assert name in out

    def test_unknown_plane_exits_1(self, capsys):
        rc, _, err = run_cli(capsys, ["sweep", "--plane", "sideways"])
        assert rc == 1


class TestConfigFile:
    def test_config_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# decay run\neps = 0\nbeta = 0.05\nomega = 0.8\n"
                       "theta0 = 0.5\nperiods = 20\n")
        rc, out, _ = run_cli(capsys, ["simulate", "--config", str(cfg)])
        assert rc == 0
        _, rows = csv_rows(out)
        assert len(rows) == 21

    def test_explicit_flag_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps=0\nbeta=0.05\nomega=0.8\nperiods=20\n")
        rc, out, _ = run_cli(capsys, ["simulate", "--config", str(cfg),
                                      "--periods", "5"])
        assert rc == 0
        _, rows = csv_rows(out)
        assert len(rows) == 6

    def test_malformed_config_line_exits_1(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps 0.1\n")
        rc, _, err = run_cli(capsys, ["simulate", "--config", str(cfg)])
        assert rc == 1
        assert "key=value" in err

    def test_uncastable_config_value_exits_1(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps=small\nbeta=0.05\nomega=0.8\n")
        rc, _, err = run_cli(capsys, ["simulate", "--config", str(cfg)])
        assert rc == 1
        assert "eps" in err

    def test_missing_config_file_exits_1(self, capsys, tmp_path):
        rc, _, err = run_cli(capsys, ["simulate", "--config",
                                      str(tmp_path / "absent.cfg")])
        assert rc == 1


class TestSimulate:
    def test_unforced_damped_decay(self, capsys):
        rc, out, _ = run_cli(capsys, ["simulate", "--eps", "0",
                                      "--beta", "0.05", "--omega", "0.8",
                                      "--theta0", "0.5", "--periods", "100"])
        assert rc == 0
        header, rows = csv_rows(out)
        assert header == ["tau", "theta", "v"]
        assert len(rows) == 101
        assert rows[0][1] == 0.5
        assert abs(rows[-1][1]) < 1e-4 and abs(rows[-1][2]) < 1e-4

    def test_out_file_has_parameter_header(self, capsys, tmp_path):
        path = tmp_path / "traj.csv"
        rc, out, _ = run_cli(capsys, ["simulate", "--eps", "0.1",
                                      "--beta", "0.05", "--omega", "0.8",
                                      "--periods", "3", "--out", str(path)])
        assert rc == 0
        assert out == ""
        text = path.read_text()
        assert text.startswith("#")
        _, rows = csv_rows(text)
        assert len(rows) == 4

    def test_dense_records_more_than_sections(self, capsys):
        args = ["simulate", "--eps", "0.1", "--beta", "0.05", "--omega", "0.8",
                "--periods", "3"]
        _, sparse, _ = run_cli(capsys, args)
        rc, dense, _ = run_cli(capsys, args + ["--dense"])
        assert rc == 0
        assert len(dense.splitlines()) > 3 * len(sparse.splitlines())

    def test_bad_period_count_exits_1(self, capsys):
        rc, _, err = run_cli(capsys, ["simulate", "--eps", "0", "--beta", "0.05",
                                      "--omega", "0.8", "--periods", "0"])
        assert rc == 1


class TestClassify:
    def test_equilibrium_record(self, capsys):
        rc, out, _ = run_cli(capsys, ["classify", "--eps", "0.05",
                                      "--beta", "0.05", "--omega", "1.1",
                                      "--theta0", "0.4",
                                      "--transient", "120", "--sample", "40"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["kind"] == "equilibrium"
        assert doc["r"] == 0 and doc["q"] == 1
        assert abs(doc["final"]["theta"]) < 1e-4

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "label.json"
        rc, _, _ = run_cli(capsys, ["classify", "--eps", "0", "--beta", "0.05",
                                    "--omega", "0.8", "--theta0", "0.3",
                                    "--transient", "120", "--sample", "40",
                                    "--out", str(path)])
        assert rc == 0
        assert json.loads(path.read_text())["kind"] == "equilibrium"


class TestMelnikov:
    def test_homoclinic_curve_minimum(self, capsys):
        rc, out, _ = run_cli(capsys, ["melnikov", "--kind", "homoclinic",
                                      "--omega-min", "0.3", "--omega-max", "3",
                                      "--n", "200"])
        assert rc == 0
        header, rows = csv_rows(out)
        assert header == ["omega", "eps_over_beta"]
        assert len(rows) == 200
        om, thr = min(rows, key=lambda r: r[1])
        assert thr == pytest.approx(0.948, abs=0.01)
        assert om == pytest.approx(0.82, abs=0.02)

    def test_beta_rescales_to_eps_units(self, capsys):
        args = ["melnikov", "--kind", "rotation", "--q", "1",
                "--omega-min", "0.5", "--omega-max", "1.0", "--n", "6"]
        _, ratio_out, _ = run_cli(capsys, args)
        rc, eps_out, _ = run_cli(capsys, args + ["--beta", "0.05"])
        assert rc == 0
        header, eps_rows = csv_rows(eps_out)
        assert header == ["omega", "eps"]
        _, ratio_rows = csv_rows(ratio_out)
        for (om1, val1), (om2, val2) in zip(ratio_rows, eps_rows):
            assert om1 == om2
            assert val2 == pytest.approx(0.05 * val1, rel=1e-15)

    def test_oscillation_curve_skips_missing_resonances(self, capsys):
        # q=2 thresholds only exist above omega = 1/2
        rc, out, _ = run_cli(capsys, ["melnikov", "--kind", "oscillation",
                                      "--q", "2", "--omega-min", "0.3",
                                      "--omega-max", "0.7", "--n", "9"])
        assert rc == 0
        _, rows = csv_rows(out)
        assert 0 < len(rows) < 9
        assert all(om > 0.5 for om, _ in rows)

    def test_distance_table_matches_library(self, capsys):
        rc, out, _ = run_cli(capsys, ["melnikov", "--kind", "homoclinic",
                                      "--eps", "0.1", "--beta", "0.05",
                                      "--omega", "0.8", "--n", "17"])
        assert rc == 0
        header, rows = csv_rows(out)
        assert header == ["tau0", "distance"]
        assert len(rows) == 17
        for t0, dist in rows:
            assert dist == pytest.approx(
                melnikov.homoclinic_melnikov(0.1, 0.05, 0.8, t0), rel=1e-12)
        # above threshold, the distance must change sign over a period
        signs = {math.copysign(1.0, d) for _, d in rows}
        assert signs == {-1.0, 1.0}

    def test_rotation_kind_requires_q(self, capsys):
        rc, _, err = run_cli(capsys, ["melnikov", "--kind", "rotation",
                                      "--omega-min", "0.5", "--omega-max", "1",
                                      "--n", "5"])
        assert rc == 1
        assert "--q" in err


class TestAveraging:
    def test_point_report(self, capsys):
        rc, out, _ = run_cli(capsys, ["averaging", "--eps", "0.3",
                                      "--beta", "0.05", "--omega", "0.1",
                                      "--r", "1", "--q", "1"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["exists"] is True
        assert doc["s0"] == pytest.approx((1 - 0.09) ** 1.5, rel=1e-10)
        for branch in ("plus", "minus"):
            assert abs(doc[branch]["residual"]) < 1e-10
            assert 0.0 <= doc[branch]["theta"] < 2 * math.pi

    def test_nonexistent_point_reports_null_branches(self, capsys):
        # omega/beta below the existence threshold
        rc, out, _ = run_cli(capsys, ["averaging", "--eps", "0.3",
                                      "--beta", "0.1", "--omega", "0.1",
                                      "--r", "1", "--q", "1"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["exists"] is False
        assert doc["plus"] is None and doc["minus"] is None

    def test_boundary_table(self, capsys):
        rc, out, _ = run_cli(capsys, ["averaging", "--r", "1", "--q", "1",
                                      "--eps-min", "0.1", "--eps-max", "0.4",
                                      "--n", "7"])
        assert rc == 0
        header, rows = csv_rows(out)
        assert header == ["eps", "threshold_omega_over_beta"]
        assert len(rows) == 7
        thresholds = [thr for _, thr in rows]
        assert all(np.diff(thresholds) < 0)  # stronger pumping, easier existence


class TestSweep:
    def test_smoke_grid_with_boundaries(self, capsys, tmp_path):
        rc, out, _ = run_cli(capsys, ["sweep", "--omega-min", "0.8",
                                      "--omega-max", "1.0", "--n-omega", "2",
                                      "--eps-min", "0", "--eps-max", "0.01",
                                      "--n-eps", "2", "--beta", "0.05",
                                      "--transient", "120", "--sample", "40",
                                      "--boundaries", "homoclinic,rot:1",
                                      "--out-dir", str(tmp_path),
                                      "--jobs", "2"])
        assert rc == 0
        assert "equilibrium=4" in out
        for ext in ("csv", "json", "svg"):
            assert (tmp_path / f"sweep_0.05_2x2.{ext}").exists()
        doc = json.loads((tmp_path / "sweep_0.05_2x2.json").read_text())
        assert len(doc["curves"]) == 2

    def test_ratio_plane_naming_and_rotations(self, capsys, tmp_path):
        rc, out, _ = run_cli(capsys, ["sweep", "--plane", "ratio-eps",
                                      "--omega", "0.05",
                                      "--ratio-min", "8", "--ratio-max", "30",
                                      "--n-ratio", "2", "--eps-min", "0.2",
                                      "--eps-max", "0.4", "--n-eps", "2",
                                      "--out-dir", str(tmp_path),
                                      "--formats", "csv"])
        assert rc == 0
        assert "rotation" in out
        path = tmp_path / "sweep_avg_0.05_2x2.csv"
        assert path.exists()
        assert path.read_text().splitlines()[0] == "omega_over_beta,eps,kind,r,q"

    def test_bad_boundary_token_exits_1(self, capsys, tmp_path):
        rc, _, err = run_cli(capsys, ["sweep", "--omega-min", "0.8",
                                      "--omega-max", "1.0", "--n-omega", "2",
                                      "--eps-min", "0", "--eps-max", "0.01",
                                      "--n-eps", "2", "--beta", "0.05",
                                      "--boundaries", "spiral:1",
                                      "--out-dir", str(tmp_path)])
        assert rc == 1
        assert "boundary" in err

    def test_unknown_format_exits_1(self, capsys, tmp_path):
        rc, _, err = run_cli(capsys, ["sweep", "--omega-min", "0.8",
                                      "--omega-max", "1.0", "--n-omega", "2",
                                      "--eps-min", "0", "--eps-max", "0.01",
                                      "--n-eps", "2", "--beta", "0.05",
                                      "--transient", "120", "--sample", "40",
                                      "--formats", "pdf",
                                      "--out-dir", str(tmp_path)])
        assert rc == 1


class TestEllipticCheck:
    def test_all_identities_pass(self, capsys):
        rc, out, _ = run_cli(capsys, ["elliptic-check"])
        assert rc == 0
        lines = out.strip().splitlines()
        assert len(lines) == 6
        assert all(ln.endswith("ok") for ln in lines)
        assert "FAIL" not in out

    def test_bad_grid_exits_1(self, capsys):
        rc, _, _ = run_cli(capsys, ["elliptic-check", "--n", "2"])
        assert rc == 1
