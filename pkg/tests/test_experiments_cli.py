import numpy as np
import pytest

from surfem import cli
from surfem.config import ExperimentConfig, load_config
from surfem.errors import ConfigError
from surfem.experiments import ConvergenceTable, eoc, fit_exponent, run_sphere_convergence
from surfem.geometry import Sphere, Torus
from surfem.io import read_csv, read_off, write_csv, write_off, write_vtk
from surfem.mesh import build_initial_mesh


# -- config ------------------------------------------------------------------------


def test_empty_config_is_default():
    cfg = load_config(text="")
    assert cfg == ExperimentConfig()


def test_config_parses_types():
    cfg = load_config(text="[surface]\nkind = torus\nminor_radius = 0.3\n[grading]\nenabled = yes\nmax_sweeps = 7\n")
    assert cfg.surface.kind == "torus" and cfg.surface.minor_radius == 0.3
    assert cfg.grading.enabled is True and cfg.grading.max_sweeps == 7
    assert isinstance(cfg.make_surface(), Torus)


@pytest.mark.parametrize(
    "text",
    [
        "[nonsense]\nx = 1\n",
        "[mesh]\nbogus = 1\n",
        "[mesh]\nlevels = many\n",
        "[grading]\nenabled = perhaps\n",
        "[mesh]\ninitial_h = -1\n",
        "[surface]\nkind = cube\n",
        "not an ini file",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        load_config(text=text)


def test_config_echo_round_trip():
    cfg = load_config(text="[mesh]\nlevels = 3\n[solver]\ntol = 1e-8\n")
    again = load_config(text=cfg.as_ini())
    assert again == cfg


# -- io ----------------------------------------------------------------------------


def test_off_round_trip(tmp_path):
    mesh = build_initial_mesh(Sphere(), 0.5)
    write_off(tmp_path / "m.off", mesh.vertices, mesh.triangles)
    v, f = read_off(tmp_path / "m.off")
    assert np.array_equal(v, mesh.vertices) and np.array_equal(f, mesh.triangles)


def test_vtk_layout(tmp_path):
    mesh = build_initial_mesh(Sphere(), 0.5)
    write_vtk(tmp_path / "m.vtk", mesh, point_fields={"u": mesh.vertices[:, 0], "x": mesh.vertices},
              cell_fields={"h": mesh.diameters()})
    text = (tmp_path / "m.vtk").read_text().splitlines()
    assert text[0] == "# vtk DataFile Version 3.0"
    assert f"POINTS {mesh.n_vertices} double" in text
    assert f"POLYGONS {mesh.n_triangles} {4 * mesh.n_triangles}" in text
    assert f"CELL_DATA {mesh.n_triangles}" in text and f"POINT_DATA {mesh.n_vertices}" in text
    assert "VECTORS x double" in text and "SCALARS u double 1" in text
    start = text.index(f"POINTS {mesh.n_vertices} double") + 1
    pts = np.array([[float(x) for x in ln.split()] for ln in text[start : start + mesh.n_vertices]])
    assert np.array_equal(pts, mesh.vertices)
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "bad.vtk", mesh, cell_fields={"h": np.zeros(3)})


def test_csv_round_trip(tmp_path):
    write_csv(tmp_path / "t.csv", ("a", "b"), [[1, 0.1], [2, 1 / 3]])
    header, rows = read_csv(tmp_path / "t.csv")
    assert header == ["a", "b"]
    assert float(rows[1][1]) == 1 / 3


# -- experiments ---------------------------------------------------------------------


def test_eoc_and_fit():
    h = np.array([0.4, 0.2, 0.1])
    e = 3.0 * h**2
    assert eoc(e[0], e[1], h[0], h[1]) == pytest.approx(2.0)
    assert fit_exponent(h, e) == pytest.approx(2.0)
    assert np.isnan(eoc(0.0, 1.0, 0.2, 0.1))


def test_table_format_and_write(tmp_path):
    t = ConvergenceTable()
    t.add(10, 0.4, 0.1, 0.01, 1e-2, 1e-1, 5, 0.5)
    t.add(40, 0.2, 0.025, 0.001, 2.5e-3, 5e-2, 9, 1.5)
    assert t.rows[1]["EOC_L2"] == pytest.approx(2.0)
    t.write(tmp_path / "c.csv", tmp_path / "w.csv")
    header, rows = read_csv(tmp_path / "c.csv")
    assert header[0] == "level" and len(rows) == 2
    assert "wall" not in " ".join(header)
    assert "EOC_H1" in t.format()


def test_zero_rhs_gives_zero_errors():
    table, _, _ = run_sphere_convergence(initial_h=0.5, levels=2, zero_rhs=True)
    assert np.all(table.column("L2_error") == 0.0) and np.all(table.column("H1_error") == 0.0)


def test_graded_sphere_convergence_matches_uniform():
    t_u, m_u, _ = run_sphere_convergence(initial_h=0.5, levels=3)
    t_g, m_g, _ = run_sphere_convergence(initial_h=0.5, levels=3, graded=True)
    for a, b in zip(m_u, m_g):
        assert abs(a.n_triangles - b.n_triangles) <= 0.1 * a.n_triangles


# -- cli ---------------------------------------------------------------------------


def _write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


def test_cli_solve_sphere(tmp_path, capsys):
    cfg = _write(tmp_path, "[mesh]\ninitial_h = 0.3\n")
    out = tmp_path / "o"
    assert cli.main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "manifest.txt").exists() and (out / "solution.vtk").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "[config]" in manifest and "assertions_passed = True" in manifest
    assert "L2_error" in capsys.readouterr().out


def test_cli_converge_deterministic(tmp_path):
    cfg = _write(tmp_path, "[mesh]\ninitial_h = 0.5\nlevels = 4\n[output]\nvtk = false\n")
    outs = []
    for k in range(2):
        out = tmp_path / "run"
        assert cli.main(["converge", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(((out / "convergence.csv").read_bytes(), (out / "manifest.txt").read_bytes()))
    assert outs[0] == outs[1]


def test_cli_grade_torus_and_export(tmp_path):
    cfg = _write(tmp_path, "[surface]\nkind = torus\n[mesh]\ninitial_h = 0.15\n[grading]\nh = 0.2\n"
                           "[output]\noff = true\n")
    out = tmp_path / "g"
    assert cli.main(["grade", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "graded.vtk").exists() and (out / "graded.off").exists()
    _, rows = read_csv(out / "grading.csv")
    assert dict(rows)["violations"] == "0"
    out2 = tmp_path / "e"
    assert cli.main(["export", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out2 / "stiffness.mtx").exists() and (out2 / "mesh.off").exists()


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "[mesh]\nwrong = 1\n")
    assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_cli_budget_failure_exit_code(tmp_path):
    cfg = _write(tmp_path, "[surface]\nkind = ridge\n[mesh]\ninitial_h = 0.3\n[grading]\nh = 0.3\nmax_sweeps = 1\n"
                           "kappa1 = 199.97\nkappa2 = 8.701\n[output]\nvtk = false\n")
    assert cli.main(["grade", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 1


def test_cli_rejects_unknown_verb():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
