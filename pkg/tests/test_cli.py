"""CLI subcommands, exit codes, and output files."""

import numpy as np
import pytest

from ferrogamma.cli import main
from ferrogamma.fieldio import read_field


def _read_rows(path):
    lines = path.read_text().splitlines()
    cols = lines[0].split(",")
    return cols, [dict(zip(cols, line.split(","))) for line in lines[1:]]


def test_usage_errors():
    assert main(["energy", "--field", "no-such-field", "--N", "16"]) == 2
    assert main(["verify", "no-such-check"]) == 2
    assert main(["frobnicate"]) == 2


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sweep.eps = -0.5\n")
    assert main(["sweep", "--config", str(bad)]) == 2


def test_energy_tangential_divfree_has_zero_electro_terms(tmp_path):
    out = tmp_path / "out"
    code = main(["energy", "--field", "tangential-divfree", "--N", "24",
                 "--level", "2", "--eps", "0.3", "--output", str(out),
                 "--experiment", "t"])
    assert code == 0
    cols, rows = _read_rows(out / "t_energy.csv")
    assert cols == ["eps", "N", "frank", "gl", "electro_interaction",
                    "electro_field", "term_I", "term_II", "term_III",
                    "splay_limit", "boundary_norm_sq"]
    row = rows[0]
    for key in ("electro_interaction", "electro_field", "term_I", "term_II",
                "term_III", "splay_limit", "boundary_norm_sq"):
        assert abs(float(row[key])) <= 1e-10
    assert float(row["frank"]) == pytest.approx(4 * np.pi / 3, rel=5e-3)


def test_solve_writes_field(tmp_path):
    out = tmp_path / "out"
    code = main(["solve", "--field", "radial", "--N", "20", "--level", "1",
                 "--eps", "0.3", "--output", str(out), "--experiment", "s"])
    assert code == 0
    u = read_field(out / "s_potential.field")
    assert u.values.ndim == 3
    assert u.grid.dims[0] > 20  # padded


def test_verify_boundary_concentration_cli(tmp_path):
    out = tmp_path / "out"
    code = main(["verify", "boundary-concentration", "--field", "radial",
                 "--N", "32", "--level", "3", "--output", str(out),
                 "--experiment", "bc"])
    assert code == 0
    cols, rows = _read_rows(out / "bc_boundary-concentration.csv")
    assert "eps_II" in cols
    resolvable = [r for r in rows if r["resolvable"] == "1"]
    last = resolvable[-1]
    assert float(last["eps_II"]) == pytest.approx(2 * np.pi, rel=0.10)


def test_verify_wrong_regime_is_reported_as_error(tmp_path):
    out = tmp_path / "out"
    code = main(["verify", "gamma-limit", "--field", "radial",
                 "--output", str(out)])
    assert code == 1


def test_minimize_cli_writes_trace_and_field(tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "domain.N = 16\ndomain.level = 1\nsweep.eps = 0.3\n"
        "optim.iters = 4\noptim.step = 0.05\n"
        f"output = {out}\nexperiment = mini\nfield = tangential-splay\n"
    )
    assert main(["minimize", "--config", str(cfg)]) == 0
    cols, rows = _read_rows(out / "mini_trace.csv")
    assert cols == ["iter", "energy", "grad_norm", "boundary_norm_sq"]
    energies = [float(r["energy"]) for r in rows]
    assert all(a >= b for a, b in zip(energies, energies[1:]))
    P = read_field(out / "mini_minimizer.field")
    assert P.components.shape[0] == 3


def test_sweep_csv_schema_and_determinism(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    cfg.write_text(
        "domain.N = 24\ndomain.level = 2\nsweep.eps = 0.4, 0.3\n"
        "field = tangential-splay\nexperiment = det\nseed = 5\n"
    )
    assert main(["sweep", "--config", str(cfg), "--output", str(out1)]) == 0
    assert main(["sweep", "--config", str(cfg), "--output", str(out2)]) == 0
    b1 = (out1 / "det_sweep.csv").read_bytes()
    b2 = (out2 / "det_sweep.csv").read_bytes()
    assert b1 == b2
    header = b1.decode().splitlines()[0]
    assert header == ("eps,N,frank,gl,electro_interaction,electro_field,"
                      "term_I,term_II,term_III,splay_limit,boundary_norm_sq")


def test_selftest_passes():
    assert main(["selftest"]) == 0
