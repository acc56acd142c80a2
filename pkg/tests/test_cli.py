"""End-to-end command line tests driven through subprocess."""

import os
import re
import subprocess
import sys

import pytest


def run_cli(*argv, env_extra=None, timeout=300):
    env = os.environ.copy()
    env.pop("RAUZY_POINT_BUDGET", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "rauzy", *argv],
        capture_output=True,
        text=True,
        env=env,
        timeout=timeout,
    )


# ---------------------------------------------------------------------------
# info


def test_info_shared_pisot(tribo_path):
    proc = run_cli("info", "--subs", tribo_path)
    assert proc.returncode == 0
    out = proc.stdout
    assert "alphabet: abc" in out
    assert "same-matrix: yes" in out
    assert "matrix: [[1, 1, 1], [1, 0, 0], [0, 1, 0]]" in out
    assert "det: 1" in out
    assert "irreducible: yes" in out
    assert "primitive: yes (exponent 3)" in out
    assert "beta: 1.839286755214161" in out
    assert "pisot: yes" in out
    assert "unimodular: yes" in out
    lam = re.search(r"lambda: ([0-9.]+)", out)
    assert lam and abs(float(lam.group(1)) - 0.7373527057603281) < 1e-12


def test_info_different_matrices(sturmian_path):
    proc = run_cli("info", "--subs", sturmian_path)
    assert proc.returncode == 0
    assert "same-matrix: no" in proc.stdout
    assert "matrix zero:" in proc.stdout
    assert "matrix one:" in proc.stdout


def test_info_non_pisot(quartic_path):
    proc = run_cli("info", "--subs", quartic_path)
    assert proc.returncode == 0
    out = proc.stdout
    assert "pisot: no" in out
    assert "lambda: n/a" in out
    assert "det: -1" in out
    assert "unimodular: yes" in out


# ---------------------------------------------------------------------------
# domain refusals and malformed input


def test_fractal_refuses_non_pisot(quartic_path):
    proc = run_cli("fractal", "--subs", quartic_path, "--points", "500")
    assert proc.returncode == 3
    assert "error:" in proc.stderr


def test_fractal_refuses_unshared_matrices(sturmian_path):
    proc = run_cli("fractal", "--subs", sturmian_path, "--seq", "(12)", "--points", "500")
    assert proc.returncode == 3


def test_missing_file_is_parse_error(tmp_path):
    proc = run_cli("info", "--subs", str(tmp_path / "nope.subs"))
    assert proc.returncode == 2
    assert "cannot read" in proc.stderr


def test_malformed_sequence_spec(tribo_path):
    proc = run_cli("fractal", "--subs", tribo_path, "--seq", "19", "--points", "100")
    assert proc.returncode == 2


def test_seed_requires_random(tribo_path):
    proc = run_cli("fractal", "--subs", tribo_path, "--seq", "(1)", "--seed", "7", "--points", "100")
    assert proc.returncode == 2
    assert "--seed only applies" in proc.stderr


def test_seed_expands_random(tribo_path):
    proc = run_cli("fractal", "--subs", tribo_path, "--seq", "random", "--seed", "9", "--points", "200")
    assert proc.returncode == 0
    assert "sequence: random:9" in proc.stdout


def test_bad_geometry_and_counts(tribo_path, tmp_path):
    out = str(tmp_path / "x.ppm")
    proc = run_cli(
        "fractal", "--subs", tribo_path, "--points", "100",
        "--out", out, "--format", "ppm", "--width", "8",
    )
    assert proc.returncode == 2
    proc = run_cli(
        "fractal", "--subs", tribo_path, "--points", "100",
        "--out", out, "--format", "ppm", "--margin", "0.7",
    )
    assert proc.returncode == 2
    assert run_cli("fractal", "--subs", tribo_path, "--points", "0").returncode == 2
    assert run_cli("gifs", "--subs", tribo_path, "--depth", "0").returncode == 2


# ---------------------------------------------------------------------------
# resource budgets


def test_budget_flag(tribo_path):
    proc = run_cli("fractal", "--subs", tribo_path, "--points", "2000", "--budget", "1999")
    assert proc.returncode == 4
    assert "exceeds budget" in proc.stderr


def test_budget_env(tribo_path):
    proc = run_cli(
        "fractal", "--subs", tribo_path, "--points", "2000",
        env_extra={"RAUZY_POINT_BUDGET": "1000"},
    )
    assert proc.returncode == 4
    proc = run_cli(
        "fractal", "--subs", tribo_path, "--points", "200",
        env_extra={"RAUZY_POINT_BUDGET": "50"},
    )
    assert proc.returncode == 4


def test_stalling_sequence_exhausts(sturmian_path):
    # the constant first substitution never grows the limit word
    proc = run_cli("balance", "--subs", sturmian_path, "--seq", "(1)", "--len", "1000")
    assert proc.returncode == 4
    assert "stall" in proc.stderr


# ---------------------------------------------------------------------------
# artifact round trips


def test_fractal_csv_ppm_and_render_round_trip(tribo_path, tmp_path):
    out_csv = str(tmp_path / "cloud.csv")
    geometry = ["--width", "200", "--height", "160", "--margin", "0.05"]
    proc = run_cli(
        "fractal", "--subs", tribo_path, "--points", "3000",
        "--out", out_csv, "--format", "both", *geometry,
    )
    assert proc.returncode == 0
    out_ppm = str(tmp_path / "cloud.ppm")
    assert os.path.exists(out_csv) and os.path.exists(out_ppm)
    with open(out_ppm, "rb") as f:
        data = f.read()
    assert data.startswith(b"P6\n200 160\n255\n")
    assert len(data) == len(b"P6\n200 160\n255\n") + 3 * 200 * 160

    redrawn = str(tmp_path / "again.ppm")
    proc = run_cli("render", "--in", out_csv, "--out", redrawn, *geometry)
    assert proc.returncode == 0
    with open(redrawn, "rb") as f:
        assert f.read() == data


def test_fractal_deterministic_bytes(tribo_path, tmp_path):
    first = str(tmp_path / "a.csv")
    second = str(tmp_path / "b.csv")
    for path in (first, second):
        proc = run_cli(
            "fractal", "--subs", tribo_path, "--seq", "random:4",
            "--points", "2000", "--out", path, "--format", "csv",
        )
        assert proc.returncode == 0
    assert open(first, "rb").read() == open(second, "rb").read()


def test_gifs_reports_bounds(tribo_path):
    proc = run_cli("gifs", "--subs", tribo_path, "--seq", "(2)", "--depth", "8")
    assert proc.returncode == 0
    assert "error-bound:" in proc.stdout
    assert "within-bound: yes" in proc.stdout


# ---------------------------------------------------------------------------
# verification commands


def test_check_passes_and_line_format(tribo_path):
    proc = run_cli("check", "--subs", tribo_path)
    assert proc.returncode == 0
    lines = [l for l in proc.stdout.splitlines() if l.startswith("check ")]
    assert len(lines) == 7
    pattern = re.compile(r"^check [a-z-]+: (PASS|FAIL) measured=\S+ threshold=\S+$")
    assert all(pattern.match(l) for l in lines)
    assert all(": PASS " in l for l in lines)
    assert "checks: all passed" in proc.stdout


@pytest.mark.parametrize(
    "fault,name",
    [("ratio", "contraction"), ("translation", "set-equation")],
)
def test_check_catches_injected_faults(tribo_path, fault, name):
    proc = run_cli("check", "--subs", tribo_path, "--inject-fault", fault)
    assert proc.returncode == 1
    assert f"check {name}: FAIL" in proc.stdout


def test_compare_tolerance_gate(tribo_path):
    args = [
        "compare", "--subs", tribo_path, "--seq", "(1)",
        "--points", "5000", "--depth", "7",
    ]
    passing = run_cli(*args, "--tol", "1.0")
    assert passing.returncode == 0
    assert "PASS" in passing.stdout
    failing = run_cli(*args, "--tol", "1e-12")
    assert failing.returncode == 1
    assert "FAIL" in failing.stdout


def test_cover_origin(tribo_path):
    proc = run_cli(
        "cover", "--subs", tribo_path, "--points", "2000",
        "--radius", "0", "--step", "0.5",
    )
    assert proc.returncode == 0
    assert "coverage: 1.0000 (1/1" in proc.stdout


def test_balance_and_gaps(tribo_path):
    proc = run_cli(
        "balance", "--subs", tribo_path, "--len", "2000",
        "--k-max", "3", "--factor-len", "2",
    )
    assert proc.returncode == 0
    assert "max-c-over-windows:" in proc.stdout
    assert "factor-gaps len=2:" in proc.stdout


def test_continuity_smoke(tribo_path):
    proc = run_cli(
        "continuity", "--subs", tribo_path, "--base", "(1)", "--variant", "(2)",
        "--n-min", "2", "--n-max", "6", "--stride", "2", "--points", "8000",
    )
    assert proc.returncode == 0
    assert proc.stdout.count("agree ") == 3
    assert "lambda:" in proc.stdout
