"""End-to-end CLI runs: config validation, artifacts, determinism."""

import json
import os

import numpy as np
import pytest

from pseudowave import acceptance, cli


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=1))
    return str(path)


BASE_SWEEP = {
    "damping": {"family": "monomial", "p": 2.0},
    "potential": {"family": "zero"},
    "n": 0,
    "epsilon": 0.1,
    "beta_curve": {"kind": "power", "s": 1.0},
    "b_list": [6.0, 9.0, 12.0],
}


class TestConfigErrors:
    def test_missing_file(self, tmp_path, capsys):
        rc = cli.main(["sweep", "--config", str(tmp_path / "nope.json")])
        assert rc == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_bad_json_reports_line(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{\n "mode": "sweep",\n broken\n}')
        rc = cli.main(["sweep", "--config", str(path)])
        assert rc == cli.EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_unknown_family(self, tmp_path, capsys):
        cfg = dict(BASE_SWEEP, damping={"family": "sinh", "p": 1.0})
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == cli.EXIT_CONFIG
        assert "family" in capsys.readouterr().err

    def test_empty_b_list_is_usage_error_without_files(self, tmp_path, capsys):
        out = tmp_path / "results"
        cfg = dict(BASE_SWEEP, b_list=[], out=str(out))
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == cli.EXIT_CONFIG
        assert not out.exists()

    def test_mode_mismatch(self, tmp_path):
        cfg = dict(BASE_SWEEP, mode="spectrum")
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == cli.EXIT_CONFIG

    def test_oversized_operator_rejected(self, tmp_path):
        cfg = {"damping": {"family": "monomial", "p": 2.0},
               "potential": {"family": "zero"}, "N": 1500, "L": 12.0}
        rc = cli.main(["spectrum", "--config", write_config(tmp_path, cfg)])
        assert rc == cli.EXIT_CONFIG

    def test_decreasing_damping_rejected(self, tmp_path, capsys):
        cfg = dict(BASE_SWEEP,
                   damping={"family": "monomial", "p": 2.0, "scale": -1.0})
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == cli.EXIT_CONFIG


class TestSweepMode:
    def test_artifacts_and_determinism(self, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        cfg_path = write_config(tmp_path, dict(BASE_SWEEP))
        assert cli.main(["sweep", "--config", cfg_path,
                         "--out", str(out1)]) == cli.EXIT_OK
        assert cli.main(["sweep", "--config", cfg_path,
                         "--out", str(out2), "--workers", "2"]) == cli.EXIT_OK
        sweep1 = (out1 / "sweep.csv").read_bytes()
        sweep2 = (out2 / "sweep.csv").read_bytes()
        assert sweep1 == sweep2  # bit-identical CSV
        assert (out1 / "rate_fit.csv").exists()
        assert (out1 / "sweep.png").exists()
        header = sweep1.decode().splitlines()[0].split(",")
        assert header[:6] == ["b", "alpha", "beta", "delta", "n", "ratio"]
        assert len(sweep1.decode().splitlines()) == 4  # header + 3 rows

    def test_alpha_list_accepted(self, tmp_path):
        cfg = dict(BASE_SWEEP)
        del cfg["b_list"]
        cfg["alpha_list"] = [36.0, 81.0, 144.0]
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg),
                       "--out", str(tmp_path / "res")])
        assert rc == cli.EXIT_OK
        rows = (tmp_path / "res" / "sweep.csv").read_text().splitlines()[1:]
        bs = [float(r.split(",")[0]) for r in rows]
        assert bs == pytest.approx([6.0, 9.0, 12.0], rel=1e-12)


class TestPseudomodeMode:
    def test_single_point_run(self, tmp_path):
        cfg = {"damping": {"family": "monomial", "p": 2.0},
               "potential": {"family": "zero"},
               "n": 1, "epsilon": 0.1, "b": 6.0, "beta": 3.0,
               "beta_curve": {"kind": "constant", "c": 3.0}}
        out = tmp_path / "pm"
        rc = cli.main(["pseudomode", "--config", write_config(tmp_path, cfg),
                       "--out", str(out)])
        assert rc == cli.EXIT_OK
        assert (out / "pseudomode.csv").exists()
        assert (out / "report.csv").exists()
        assert (out / "pseudomode.png").exists()
        first = (out / "pseudomode.csv").read_text().splitlines()[0]
        assert first == "x,re_f,im_f,xi,abs_g"


class TestSpectrumMode:
    def test_eigenvalue_csv_contains_first_pair(self, tmp_path):
        cfg = {"damping": {"family": "monomial", "p": 2.0},
               "potential": {"family": "zero"}, "L": 10.0, "N": 151}
        out = tmp_path / "sp"
        rc = cli.main(["spectrum", "--config", write_config(tmp_path, cfg),
                       "--out", str(out)])
        assert rc == cli.EXIT_OK
        rows = np.genfromtxt(out / "eigenvalues.csv", delimiter=",",
                             names=True)
        vals = rows["re"] + 1j * rows["im"]
        target = acceptance.SPECTRUM_X2_FIRST
        best = vals[np.argmin(np.abs(vals - target))]
        assert abs(best - target) / abs(target) < 0.05
        assert (out / "spectrum.png").exists()


class TestPseudospecMode:
    def test_scan_artifacts(self, tmp_path):
        cfg = {"damping": {"family": "monomial", "p": 2.0},
               "potential": {"family": "zero"}, "L": 8.0, "N": 120,
               "scan": {"re_min": -4.0, "re_max": 0.0, "im_min": 0.5,
                        "im_max": 2.0, "nx": 3, "ny": 2}}
        out = tmp_path / "ps"
        rc = cli.main(["pseudospec", "--config", write_config(tmp_path, cfg),
                       "--out", str(out), "--workers", "2"])
        assert rc == cli.EXIT_OK
        text = (out / "pseudospectrum.csv").read_text().splitlines()
        assert text[0].startswith("# rect=-4,0,0.5,2 nx=3 ny=2")
        assert text[1] == "re_lambda,im_lambda,sigma_min"
        assert len(text) == 2 + 6
        assert (out / "pseudospectrum.png").exists()


class TestSelftestMode:
    def test_exit_code_wiring(self, monkeypatch, capsys):
        good = acceptance.CriterionResult(1, "stub", True, "ok", 0.0)
        bad = acceptance.CriterionResult(2, "stub", False, "no", 0.0)
        monkeypatch.setattr(acceptance, "run_all", lambda: [good, good])
        assert cli.main(["selftest"]) == cli.EXIT_OK
        monkeypatch.setattr(acceptance, "run_all", lambda: [good, bad])
        assert cli.main(["selftest"]) == cli.EXIT_SELFTEST
        assert "1/2" in capsys.readouterr().out


def test_numerical_failure_exit_code(tmp_path, capsys):
    # beta = 0 curve slips past config validation but fails numerically
    cfg = dict(BASE_SWEEP, beta_curve={"kind": "constant", "c": 0.0})
    rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg),
                   "--out", str(tmp_path / "x")])
    assert rc == cli.EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err
