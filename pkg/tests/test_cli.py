import numpy as np
import pytest

from ddfv.cli import main
from ddfv.harness import CSV_HEADER
from ddfv.mesh import read_mesh


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- mesh command -------------------------------------------------------------


def test_mesh_gen_uniform(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "mesh", "gen", "--family", "uniform",
                           "--n", "4", "--out", str(tmp_path))
    assert code == 0
    mesh = read_mesh(tmp_path / "uniform_4.mesh")
    assert mesh.n_cells == 16
    assert "theta_star" in out


def test_mesh_inspect_uniform(tmp_path, capsys):
    run_cli(capsys, "mesh", "gen", "--family", "uniform", "--n", "4",
            "--out", str(tmp_path))
    code, out, _ = run_cli(capsys, "mesh", "inspect", "--mesh",
                           str(tmp_path / "uniform_4.mesh"))
    assert code == 0
    line = [ln for ln in out.splitlines() if "theta interior max" in ln][0]
    assert float(line.split()[-1]) == pytest.approx(1.0)


def test_mesh_gen_kershaw_reports_distortion(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "mesh", "gen", "--family", "kershaw",
                           "--n", "16", "--out", str(tmp_path))
    assert code == 0
    line = [ln for ln in out.splitlines() if ln.startswith("theta_star")][0]
    assert float(line.split()[-1]) > 1.0


def test_mesh_convert_round_trip(tmp_path, capsys):
    run_cli(capsys, "mesh", "gen", "--family", "quad", "--n", "3",
            "--out", str(tmp_path))
    code, _, _ = run_cli(capsys, "mesh", "convert", "--mesh",
                         str(tmp_path / "quad_3.mesh"), "--out", str(tmp_path))
    assert code == 0
    a = read_mesh(tmp_path / "quad_3.mesh")
    b = read_mesh(tmp_path / "quad_3_converted.mesh")
    assert np.array_equal(a.vertices, b.vertices)
    assert a.cells == b.cells


def test_mesh_inspect_missing_file(capsys):
    code, _, err = run_cli(capsys, "mesh", "inspect", "--mesh", "/nope.mesh")
    assert code == 2
    assert "error" in err


# --- run command ----------------------------------------------------------------


def test_run_stationary_case_constant_energy(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "run", "--case", "uniform", "--family",
                           "uniform", "--n", "4", "--dt", "0.01",
                           "--tfinal", "0.05", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "trace.csv").read_text().splitlines()
    header = rows[0].split(",")
    energies = [float(r.split(",")[header.index("energy")]) for r in rows[1:]]
    assert max(energies) - min(energies) < 1e-12


def test_run_reference_case_invariants(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "run", "--case", "decay", "--family",
                           "quad", "--n", "8", "--dt", "4e-3",
                           "--tfinal", "0.04", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "trace.csv").read_text().splitlines()
    header = rows[0].split(",")
    mass = [float(r.split(",")[header.index("mass")]) for r in rows[1:]]
    mins = [float(r.split(",")[header.index("min_u")]) for r in rows[2:]]
    assert max(mass) - min(mass) <= 1e-11 * abs(mass[0])
    assert min(mins) > 0.0
    assert "floor activated  False" in out


def test_run_rejects_bad_beta(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", "--case", "uniform", "--family",
                           "uniform", "--n", "3", "--beta", "3",
                           "--out", str(tmp_path))
    assert code == 2
    assert "(0, 2)" in err


def test_run_solver_failure_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", "--case", "decay", "--family",
                           "quad", "--n", "8", "--dt", "4e-3",
                           "--tfinal", "0.02", "--newton-max-iter", "1",
                           "--out", str(tmp_path))
    assert code == 3
    assert "solver failure" in err


def test_run_config_round_trip(tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    code, _, _ = run_cli(capsys, "run", "--case", "decay", "--family",
                         "quad", "--n", "4", "--dt", "0.004",
                         "--tfinal", "0.02", "--out", str(out1))
    assert code == 0
    cfg = out1 / "effective_config"
    assert cfg.exists()
    code, _, _ = run_cli(capsys, "run", "--config", str(cfg),
                         "--out", str(out2))
    assert code == 0
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


# --- converge command -------------------------------------------------------------


def test_converge_uniform_two_levels(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "converge", "--case", "decay", "--family",
                           "uniform", "--levels", "2", "--n0", "4",
                           "--dt0", "4e-3", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    ordu = lines[2].split(",")[4]
    assert np.isfinite(float(ordu))


def test_converge_constant_case_zero_errors(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "converge", "--case", "uniform", "--family",
                         "uniform", "--levels", "2", "--n0", "3",
                         "--dt0", "0.05", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    for row in lines[1:]:
        assert float(row.split(",")[3]) == 0.0


# --- longtime and check -------------------------------------------------------------


def test_longtime_stationary_saturates(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "longtime", "--case", "uniform",
                           "--family", "uniform", "--n", "4", "--dt", "0.01",
                           "--tfinal", "0.05", "--out", str(tmp_path))
    assert code == 0
    assert "saturated" in out
    assert (tmp_path / "energy_decay.csv").exists()


def test_longtime_decay_case_decreasing(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "longtime", "--case", "decay",
                           "--family", "quad", "--n", "8", "--dt", "2e-3",
                           "--tfinal", "0.1", "--plot-script",
                           "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "energy_decay.csv").read_text().splitlines()[1:]
    es = [float(r.split(",")[2]) for r in rows]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(es, es[1:]))
    assert (tmp_path / "plot_energy.py").exists()


def test_check_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "check", "--seed", "42")
    code2, out2, _ = run_cli(capsys, "check", "--seed", "42")
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.count("PASS") == 6


def test_check_failure_exit_code(capsys, monkeypatch):
    import ddfv.selfcheck as sc

    def failing(rng):
        return sc.CheckResult("rigged", False, "forced failure")

    monkeypatch.setattr(sc, "CHECKS", [failing])
    code, out, _ = run_cli(capsys, "check", "--seed", "1")
    assert code == 4
    assert "FAIL" in out
