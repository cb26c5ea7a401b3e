import csv
import io
import subprocess
import sys
from fractions import Fraction

import pytest

from phasefit import cli, coeffs


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- coeffs ------------------------------------------------------------------------


def test_coeffs_pf_d0(capsys):
    code, out, _ = run(capsys, "coeffs", "--method", "pf-d0", "--v", "0.5")
    assert code == 0
    table = rows(out)
    assert len(table) == 11
    assert float(table[5]["b_j"]) != 0


def test_coeffs_classical_matches_rationals(capsys):
    code, out, _ = run(capsys, "coeffs", "--method", "classical")
    assert code == 0
    b = [float(r["b_j"]) for r in rows(out)]
    expected = [0, Fraction(399187, 241920), Fraction(-17327, 8640), Fraction(597859, 60480),
                Fraction(-704183, 60480), Fraction(465133, 24192)]
    assert b[:6] == [float(x) for x in expected]
    assert b == b[::-1]


def test_coeffs_out_of_range(capsys):
    code, out, err = run(capsys, "coeffs", "--method", "pf-d2", "--v", "9.9")
    assert code == 2 and out == ""
    assert "OutOfRange" in err


def test_coeffs_omega_times_h(capsys):
    _, a, _ = run(capsys, "coeffs", "--method", "pf-d1", "--omega", "2", "--h", "0.25")
    _, b, _ = run(capsys, "coeffs", "--method", "pf-d1", "--v", "0.5")
    assert a == b


def test_coeffs_needs_frequency(capsys):
    code, _, err = run(capsys, "coeffs", "--method", "pf-d1")
    assert code == 2 and "--v" in err
    code, _, _ = run(capsys, "coeffs", "--method", "pf-d1", "--v", "0.5", "--omega", "1", "--h", "0.5")
    assert code == 2


# -- verify ----------------------------------------------------------------------


def test_verify_all_on_grid(capsys):
    code, out, _ = run(capsys, "verify", "--method", "all", "--v-grid", "0.1:1.0:10")
    assert code == 0
    table = rows(out)
    assert not [r for r in table if r["status"] == "FAIL"]
    assert {r["method"] for r in table} == {coeffs.method_name(k) for k in coeffs.LEVELS}


def test_verify_first_derivative_row(capsys):
    code, out, _ = run(capsys, "verify", "--method", "pf-d1", "--v", "0.5")
    assert code == 0
    row = next(r for r in rows(out) if r["check"] == "PL'")
    assert row["status"] == "PASS"
    assert abs(float(row["value"])) <= 1e-6


def test_verify_classical_leading_constant(capsys):
    code, out, _ = run(capsys, "verify", "--method", "classical")
    assert code == 0
    row = next(r for r in rows(out) if r["check"].startswith("C_12"))
    assert row["check"] == "C_12=52559/912384" and row["status"] == "PASS"


def test_verify_reports_failure(capsys, monkeypatch):
    monkeypatch.setattr(cli, "PL_TOL", 0.0)
    monkeypatch.setattr(cli.analysis, "phase_lag_derivatives", _shifted_report(1e-3))
    code, out, _ = run(capsys, "verify", "--method", "pf-d0", "--v", "0.5")
    assert code == 1
    assert any(r["status"] == "FAIL" for r in rows(out))


def _shifted_report(offset):
    original = cli.analysis.phase_lag_derivatives

    def wrapped(*args, **kwargs):
        rep = original(*args, **kwargs)
        return type(rep)(rep.s, rep.pl + offset, rep.derivatives, rep.denominator, rep.level, rep.v)

    return wrapped


# -- integrate ------------------------------------------------------------------------


def test_integrate_multistep_csv(capsys):
    code, out, _ = run(capsys, "integrate", "--problem", "harmonic", "--h", "0.1", "--n-steps", "50",
                       "--method", "pf-d2", "--omega", "1")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["t", "y_1", "error"]
    assert len(table) == 51
    assert max(float(r["error"]) for r in table) < 1e-13


def test_integrate_gauss_with_decimation(capsys, tmp_path):
    path = tmp_path / "orbit.csv"
    code, _, _ = run(capsys, "integrate", "--problem", "two-body", "--opt", "eccentricity=0.3",
                     "--integrator", "gauss", "--stages", "3", "--h", "0.05", "--n-steps", "40",
                     "--decimate", "10", "--output", str(path))
    assert code == 0
    table = rows(path.read_text())
    assert list(table[0]) == ["t", "y_1", "y_2", "energy", "error"]
    assert len(table) == 5
    assert abs(float(table[-1]["energy"]) + 0.5) < 1e-9


def test_integrate_bad_option(capsys):
    code, _, err = run(capsys, "integrate", "--problem", "harmonic", "--opt", "spin=3", "--n-steps", "20")
    assert code == 2 and "spin" in err


# -- efficiency -------------------------------------------------------------------------


def test_efficiency_harmonic(capsys):
    code, out, _ = run(capsys, "efficiency", "--problem", "harmonic", "--steps", "200,400",
                       "--method", "classical,pf-d0")
    assert code == 0
    table = rows(out)
    assert [r["method"] for r in table] == ["classical", "pf-d0"] * 2
    assert list(table[0]) == ["method", "steps", "log10_steps", "minus_log10_error"]
    by = {(r["method"], r["steps"]): float(r["minus_log10_error"]) for r in table}
    assert by[("pf-d0", "400")] > by[("classical", "400")]


def test_efficiency_marks_divergence(capsys):
    # s = 2 lies far outside the interval of periodicity; 2000 steps overflow
    code, out, _ = run(capsys, "efficiency", "--problem", "harmonic", "--steps", "2000",
                       "--t-end", "4000", "--method", "classical")
    assert code == 0
    assert rows(out)[0]["minus_log10_error"] == "DIVERGED"


def test_efficiency_rejects_tiny_step_counts(capsys):
    code, _, _ = run(capsys, "efficiency", "--problem", "harmonic", "--steps", "5")
    assert code == 2


# -- stability map ---------------------------------------------------------------------


def test_stability_map_csv_and_pgm(capsys, tmp_path):
    path = tmp_path / "map.csv"
    code, _, _ = run(capsys, "stability-map", "--method", "pf-d4", "--v", "0:3", "--s", "0:3",
                     "--res", "12", "--output", str(path))
    assert code == 0
    assert len(path.read_text().splitlines()) == 1 + 144
    assert (tmp_path / "map.pgm").read_bytes().startswith(b"P5\n12 12\n255\n")


def test_stability_map_classical_constant_in_v(capsys):
    code, out, _ = run(capsys, "stability-map", "--method", "classical", "--s", "0:3", "--res", "6")
    assert code == 0
    table = rows(out)
    by_v = {}
    for r in table:
        by_v.setdefault(r["v"], []).append(r["state"])
    assert len({tuple(col) for col in by_v.values()}) == 1


def test_stability_map_pgm_to_stdout(capsysbinary):
    code = cli.main(["stability-map", "--method", "pf-d0", "--res", "4x5", "--format", "pgm"])
    out = capsysbinary.readouterr().out
    assert code == 0 and out.startswith(b"P5\n4 5\n255\n") and len(out) == len(b"P5\n4 5\n255\n") + 20


def test_stability_map_resolution_one(capsys):
    code, _, _ = run(capsys, "stability-map", "--res", "1")
    assert code == 2


def test_stability_map_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "stability-map", "--res", "3", "--output", str(tmp_path / "no" / "x.csv"))
    assert code == 2 and "cannot write" in err


# -- cross-cutting ---------------------------------------------------------------------


def test_config_file_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmethod = pf-d1\nv = 0.3\n")
    _, from_cfg, _ = run(capsys, "coeffs", "--config", str(cfg))
    _, direct, _ = run(capsys, "coeffs", "--method", "pf-d1", "--v", "0.3")
    assert from_cfg == direct
    _, override, _ = run(capsys, "coeffs", "--config", str(cfg), "--v", "0.7")
    _, direct7, _ = run(capsys, "coeffs", "--method", "pf-d1", "--v", "0.7")
    assert override == direct7


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    assert run(capsys, "coeffs", "--config", str(cfg))[0] == 2
    assert run(capsys, "coeffs", "--config", str(tmp_path / "missing.cfg"))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--method", "pf-d3", "--v", "1.2"],
        ["verify", "--method", "pf-d2", "--v", "0.4"],
        ["stability-map", "--method", "pf-d1", "--res", "8"],
    ],
)
def test_outputs_are_deterministic(capsys, argv):
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "phasefit", "coeffs", "--method", "classical"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "level,v,path,j,a_j,b_j"


def test_unknown_command_exits_two():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2
