import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CONFIGS
from nonlocal_godunov import ConfigError, NonDivisibleEta, project_initial
from nonlocal_godunov import config as cfgmod
from nonlocal_godunov.cli import EXIT_CFL, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, main
from nonlocal_godunov.grid import read_profile_csv

BASE = """
[model]
velocity = power
velocity_exponent = 5

[kernel]
family = constant
eta = 0.1

[grid]
length = 1
h = 0.02

[initial]
kind = piecewise
breakpoints = 0:1/3, 1/3:1, 2/3:1/3

[scheme]
name = godunov

[run]
T = {T}
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.ini")))
def test_shipped_configs_roundtrip(name):
    cfg = cfgmod.load(CONFIGS / name)
    text = cfgmod.dumps(cfg)
    again = cfgmod.loads(text)
    assert again == cfg
    assert cfgmod.dumps(again) == text


@given(h_cells=st.integers(1, 20), n=st.integers(1, 20), T=st.floats(0, 2, allow_subnormal=False),
       safety=st.floats(0.01, 1.0), low=st.floats(0, 1), high=st.floats(0, 1))
@settings(max_examples=50, deadline=None)
def test_roundtrip_random(h_cells, n, T, safety, low, high):
    h = 1.0 / (h_cells * 10)
    text = BASE.format(T=repr(T)).replace("h = 0.02", f"h = {h!r}").replace(
        "eta = 0.1", f"eta = {n * h!r}").replace(
        "0:1/3, 1/3:1, 2/3:1/3", f"0:{low!r}, 0.5:{high!r}").replace(
        "name = godunov", f"name = godunov\ncfl_safety = {safety!r}")
    cfg = cfgmod.loads(text)
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg
    assert cfgmod.dumps(cfgmod.loads(cfgmod.dumps(cfg))) == cfgmod.dumps(cfg)


def test_fraction_parsing():
    cfg = cfgmod.loads(BASE.format(T="1/20"))
    assert cfg.T == 0.05
    assert cfg.initial.breakpoints[1] == (1 / 3, 1.0)


@pytest.mark.parametrize("edit,field", [
    (("T = 0.1", "T = abc"), "run.T"),
    (("T = 0.1", "T = -1"), "run.T"),
    (("eta = 0.1", "eta = 0.07"), "kernel.eta/grid.h"),
    (("family = constant", "family = gauss"), "kernel"),
    (("name = godunov", "name = weno"), "scheme.name"),
    (("velocity_exponent = 5", "velocity_exponent = 0"), "model.velocity_exponent"),
    (("kind = piecewise", "kind = spline"), "initial.kind"),
    (("0:1/3, 1/3:1", "0:1/3, 1/3:2"), "initial.breakpoints"),
    (("h = 0.02", "h = 0.03"), "grid.h"),
])
def test_errors_name_field(edit, field):
    text = BASE.format(T="0.1").replace(*edit)
    with pytest.raises(ConfigError) as err:
        cfgmod.loads(text)
    assert err.value.field == field
    assert field in str(err.value)


def test_missing_key():
    with pytest.raises(ConfigError, match="kernel.eta"):
        cfgmod.loads(BASE.format(T="0.1").replace("eta = 0.1\n", ""))


def test_non_divisible_eta_type():
    with pytest.raises(NonDivisibleEta):
        cfgmod.loads(BASE.format(T="0.1").replace("eta = 0.1", "eta = 0.05"))


def test_convergence_levels_checked():
    text = BASE.format(T="0.1") + "\n[convergence]\nlevels = 0, 5\nreference_level = 3\n"
    with pytest.raises(ConfigError, match="convergence.levels"):
        cfgmod.loads(text)


# -- command line -------------------------------------------------------------

def test_run_zero_time_writes_projection(tmp_path):
    cfg_path = write(tmp_path, BASE.format(T="0"))
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path / "o")]) == EXIT_OK
    text = (tmp_path / "o" / "profile.csv").read_text()
    assert text.splitlines()[0] == "x,rho"
    x, rho = read_profile_csv(tmp_path / "o" / "profile.csv")
    cfg = cfgmod.load(cfg_path)
    np.testing.assert_array_equal(rho, project_initial(cfg.initial_data(), cfg.grid()).rho)


def test_run_diagnostics_and_plot(tmp_path, capsys):
    text = BASE.format(T="0.05") + "\n[output]\ndiagnostics = d.csv\nplot = p.svg\n"
    cfg_path = write(tmp_path, text)
    code = main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path), "--entropy-check",
                 "--backend", "direct", "--cfl-safety", "0.9"])
    assert code == EXIT_OK
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "step,time,mass,tv,min_rho,max_rho,max_entropy_residual"
    assert float(lines[-1].split(",")[1]) == 0.05
    assert all(float(r.split(",")[-1]) <= 1e-12 for r in lines[2:])
    assert (tmp_path / "p.svg").read_text().startswith("<svg")
    assert "max entropy residual" in capsys.readouterr().out


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg_path = write(tmp_path, BASE.format(T="0.1").replace("eta = 0.1", "eta = 0.07"))
    assert main(["run", "--config", str(cfg_path)]) == EXIT_CONFIG
    assert "kernel.eta/grid.h" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_cfl_safety_out_of_range(tmp_path):
    cfg_path = write(tmp_path, BASE.format(T="0.1"))
    assert main(["run", "--config", str(cfg_path), "--cfl-safety", "1.5"]) == EXIT_CONFIG


def test_degenerate_model_exit_code(tmp_path):
    text = BASE.format(T="0.1").replace("velocity = power\nvelocity_exponent = 5",
                                        "velocity = polynomial\nvelocity_coefficients = 0")
    cfg_path = write(tmp_path, text)
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_CFL


def test_validate_reports_hypothesis_violation(tmp_path, capsys):
    text = BASE.format(T="0.1").replace("velocity = power\nvelocity_exponent = 5",
                                        "velocity = polynomial\nvelocity_coefficients = 1, 1")
    cfg_path = write(tmp_path, text)
    assert main(["validate", "--config", str(cfg_path)]) == EXIT_INVARIANT
    assert "violation" in capsys.readouterr().out
    # a Godunov run refuses the model outright
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_lxf_only_records_h2_violation(tmp_path):
    text = BASE.format(T="0.02").replace("name = godunov", "name = lxf").replace(
        "[kernel]", "flux = polynomial\nflux_coefficients = 0.5, -0.25\n\n[kernel]")
    cfg_path = write(tmp_path, text)
    assert main(["validate", "--config", str(cfg_path)]) == EXIT_OK
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_OK


CONV = BASE + """
[convergence]
h_base = 0.02
levels = 0, 1, 3
reference_level = 3
reference_scheme = lxf
schemes = godunov, lxf
"""


def test_convergence_command(tmp_path):
    cfg_path = write(tmp_path, CONV.format(T="0.02"))
    assert main(["convergence", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "n,h,scheme,l1_error,eoc"
    rows = [l.split(",") for l in lines[1:]]
    assert [(r[0], r[2]) for r in rows] == [("0", "godunov"), ("0", "lxf"), ("1", "godunov"),
                                           ("1", "lxf"), ("3", "godunov"), ("3", "lxf")]
    assert math.isnan(float(rows[0][4]))
    e0, e1 = float(rows[0][3]), float(rows[2][3])
    assert float(rows[2][4]) == pytest.approx(math.log2(e0 / e1))
    # the reference compared with itself
    assert float(rows[5][3]) == 0.0
    steps = (tmp_path / "convergence_steps.csv").read_text().splitlines()
    assert steps[0] == "n,h,scheme,lambda,tau,steps"
    assert steps[1].startswith("3,")


def test_convergence_threads_deterministic(tmp_path):
    cfg_path = write(tmp_path, CONV.format(T="0.02"))
    main(["convergence", "--config", str(cfg_path), "--out-dir", str(tmp_path / "a")])
    main(["convergence", "--config", str(cfg_path), "--out-dir", str(tmp_path / "b"), "--threads", "2"])
    assert ((tmp_path / "a" / "convergence.csv").read_text()
            == (tmp_path / "b" / "convergence.csv").read_text())


def test_compare_models_command(tmp_path, capsys):
    cfg_path = write(tmp_path, BASE.format(T="0.05"))
    assert main(["compare-models", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_OK
    for v in ("mean_velocity", "mean_density"):
        assert (tmp_path / f"profile_{v}.csv").read_text().startswith("x,rho\n")
    assert "L1 distance" in capsys.readouterr().out


def test_compare_models_affine_coincide(tmp_path):
    from nonlocal_godunov.experiments import compare_models
    cfg = cfgmod.loads(BASE.format(T="0.05").replace("velocity = power", "velocity = affine"))
    assert compare_models(cfg).l1_distance <= 1e-12
    cfg = replace(cfg, scheme=replace(cfg.scheme, backend="direct"))
    assert compare_models(cfg).l1_distance <= 1e-12


def test_local_limit_command(tmp_path):
    text = BASE.format(T="0.02").replace("h = 0.02", "h = 0.005") + "\n[local_limit]\netas = 0.1, 0.02\n"
    cfg_path = write(tmp_path, text)
    assert main(["local-limit", "--config", str(cfg_path), "--out-dir", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "local_limit.csv").read_text().splitlines()
    assert lines[0] == "eta,l1_distance"
    d = [float(l.split(",")[1]) for l in lines[1:]]
    assert d[0] > d[1] > 0


def test_validate_shipped(capsys):
    assert main(["validate", "--config", str(CONFIGS / "linear_convergence.ini")]) == EXIT_OK
    assert "H1, H2 hold" in capsys.readouterr().out
