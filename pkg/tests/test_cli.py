"""Command-line front end: CSV/JSON output, determinism, exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from kgpin import KernelParams, ManifoldSpec, PeriodizedKernel, wp_klein
from kgpin.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


BASE = {
    "manifold": {"kind": "klein", "n": 2, "k": 2},
    "alpha": 2.0,
}


class TestEval:
    def test_matches_library(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {**BASE, "points": [[0.4, 0.3]]})
        out = tmp_path / "out.csv"
        assert main(["--config", cfg, "--out", str(out), "eval"]) == 0
        header, row = out.read_text().splitlines()
        assert header == "x_1,x_2,value,tail,shells_used"
        cells = row.split(",")
        ker = PeriodizedKernel(ManifoldSpec.klein(2), params=KernelParams(2, 2.0))
        val = wp_klein(ker, np.array([0.4, 0.3]))
        assert float(cells[2]) == float(val)
        assert int(cells[4]) == val.shells_used

    def test_point_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", BASE)
        out = tmp_path / "out.csv"
        code = main(["--config", cfg, "--out", str(out), "eval", "--point", "0.5,0.7"])
        assert code == 0
        assert len(out.read_text().splitlines()) == 2

    def test_set_flag_overrides_any_field(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", BASE)
        out = tmp_path / "o.csv"
        code = main(
            [
                "--config", cfg,
                "--set", "points=[[0.4,0.3]]",
                "--set", "alpha=1.5",
                "--set", "truncation.tol=1e-10",
                "--out", str(out),
                "eval",
            ]
        )
        assert code == 0
        ker = PeriodizedKernel(
            ManifoldSpec.klein(2),
            params=KernelParams(2, 1.5),
        )
        from kgpin import TruncationPolicy
        from dataclasses import replace

        ker = replace(ker, trunc=TruncationPolicy.adaptive(1e-10))
        expected = float(wp_klein(ker, np.array([0.4, 0.3])))
        assert float(out.read_text().splitlines()[1].split(",")[2]) == expected

    def test_missing_points_is_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", BASE)
        assert main(["--config", cfg, "eval"]) == 2
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "config-schema"

    def test_two_point_eval_with_source(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {**BASE, "points": [[0.7, 0.9]], "source_point": [0.2, 0.3]}
        )
        out = tmp_path / "o.csv"
        assert main(["--config", cfg, "--out", str(out), "eval"]) == 0
        from kgpin import green_klein

        ker = PeriodizedKernel(ManifoldSpec.klein(2), params=KernelParams(2, 2.0))
        expected = float(green_klein(ker, np.array([0.7, 0.9]), np.array([0.2, 0.3])))
        assert float(out.read_text().splitlines()[1].split(",")[2]) == expected

    def test_singular_point_error_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {**BASE, "points": [[1.0, 1.0]]})
        assert main(["--config", cfg, "eval"]) == 2
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "singular-point"


class TestGridDeterminism:
    def test_byte_identical_across_worker_counts(self, tmp_path, monkeypatch):
        cfg = write_config(
            tmp_path,
            "c.json",
            {**BASE, "grid": {"min": [0.2, 0.2], "max": [0.8, 1.8], "steps": [4, 5]}},
        )
        outputs = []
        for workers in ("1", "4"):
            monkeypatch.setenv("KGPIN_WORKERS", workers)
            out = tmp_path / f"grid_{workers}.csv"
            assert main(["--config", cfg, "--out", str(out), "grid"]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert len(outputs[0].splitlines()) == 21

    def test_tol_env_override(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, "c.json", {**BASE, "points": [[0.4, 0.3]]})
        shells = {}
        for tol in ("1e-6", "1e-12"):
            monkeypatch.setenv("KGPIN_TOL", tol)
            out = tmp_path / f"e_{tol}.csv"
            assert main(["--config", cfg, "--out", str(out), "eval"]) == 0
            shells[tol] = int(out.read_text().splitlines()[1].split(",")[-1])
        assert shells["1e-6"] < shells["1e-12"]

    def test_lf_line_endings(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {**BASE, "grid": {"min": [0.3, 0.3], "max": [0.6, 0.6], "steps": 2}}
        )
        out = tmp_path / "g.csv"
        main(["--config", cfg, "--out", str(out), "grid"])
        raw = out.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestVerify:
    def test_green_suite_passes(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["--out", str(out), "verify", "--suite", "green"]) == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert report["suites"][0]["suite"] == "green"
        assert all(c["passed"] for c in report["suites"][0]["checks"])

    def test_unknown_suite_rejected(self, capsys):
        with pytest.raises(SystemExit):
            main(["verify", "--suite", "bogus"])


class TestSolve:
    def test_manufactured_exponential(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "manifold": {"kind": "mobius", "n": 3, "k": 1},
                "alpha": 1.0,
                "domain": {"lower": [0.25, 0.25, 0.25], "upper": [0.75, 0.75, 0.75]},
                "dirichlet": {"kind": "exp_axis", "axis": 1},
                "points": [[0.5, 0.5, 0.5]],
                "boundary_rule": {"panels": 3, "order": 4},
            },
        )
        out = tmp_path / "sol.csv"
        assert main(["--config", cfg, "--out", str(out), "solve"]) == 0
        row = out.read_text().splitlines()[1].split(",")
        assert float(row[-1]) < 1e-3  # abs_error column


class TestFit:
    def test_round_trip_via_csv(self, tmp_path):
        from kgpin import PoleExpansion, build_expansion

        ker = PeriodizedKernel(ManifoldSpec.klein(2), params=KernelParams(2, 2.0))
        pole = np.array([0.31, 0.47])
        field = build_expansion(
            PoleExpansion(poles=pole[None, :], terms=((((0, 0), 1.25), ((1, 0), -0.4)),)), ker
        )
        rng = np.random.default_rng(5)
        rows = []
        while len(rows) < 20:
            x = np.array([rng.uniform(0.05, 0.95), rng.uniform(0.05, 1.95)])
            from kgpin import orbit_distance, singular_distance

            if singular_distance(ManifoldSpec.klein(2), x) < 0.25:
                continue
            if orbit_distance(ManifoldSpec.klein(2), x, pole) < 0.2:
                continue
            rows.append((x, field(x)))
        samples = tmp_path / "samples.csv"
        with open(samples, "w", newline="\n") as fh:
            fh.write("x_1,x_2,value\n")
            for x, v in rows:
                fh.write(f"{x[0]:.17g},{x[1]:.17g},{v:.17g}\n")
        cfg = write_config(
            tmp_path,
            "c.json",
            {**BASE, "samples_path": str(samples), "poles": [[0.31, 0.47]], "max_order": 1},
        )
        out = tmp_path / "fit.json"
        assert main(["--config", cfg, "--out", str(out), "fit"]) == 0
        report = json.loads(out.read_text())
        assert report["residual_ok"] is True
        coeffs = {tuple(t["m"]): t["b"] for t in report["poles"][0]["terms"]}
        assert coeffs[(0, 0)] == pytest.approx(1.25, abs=1e-8)
        assert coeffs[(1, 0)] == pytest.approx(-0.4, abs=1e-8)

    def test_bad_samples_header(self, tmp_path, capsys):
        samples = tmp_path / "s.csv"
        samples.write_text("a,b,c\n1,2,3\n")
        cfg = write_config(
            tmp_path, "c.json", {**BASE, "samples_path": str(samples), "poles": [[0.3, 0.4]]}
        )
        assert main(["--config", cfg, "fit"]) == 2


class TestSubprocess:
    def test_module_entry_point(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {**BASE, "points": [[0.4, 0.3]]})
        proc = subprocess.run(
            [sys.executable, "-m", "kgpin.cli", "--config", cfg, "eval"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("x_1,x_2,value")
