from pathlib import Path

import pytest

from csslab.config import ConfigError, RunConfig, load_config, log_level, parse_assignments, workers


def test_defaults():
    config = load_config()
    assert config.grid.n == 4096
    assert config.grid.r_max == 100.0
    assert config.spec.q == 1
    assert config.spec.nu == 2
    assert config.time.tau == -0.1
    assert config.modulation.avg_lo == 0.2


def test_parse_assignments_skips_comments():
    tree = parse_assignments(["# header", "", "grid.n = 1024  # coarse", "spec.nu_re=2.5"])
    assert tree == {"grid": {"n": "1024"}, "spec": {"nu_re": "2.5"}}


@pytest.mark.parametrize("line", ["grid.n 1024", "n = 1024", "mesh.n = 1024"])
def test_parse_assignments_rejects_malformed_lines(line):
    with pytest.raises(ConfigError):
        parse_assignments([line])


def test_file_and_overrides(tmp_path: Path):
    path = tmp_path / "run.cfg"
    path.write_text("grid.n = 1024\ngrid.kind = uniform\nsolver.dt_max = 5e-5\n")
    config = load_config(path, ["grid.n=2048"])
    assert config.grid.n == 2048
    assert config.grid.kind == "uniform"
    assert config.solver.dt_max == 5e-5
    assert config.grid.build().kind == "uniform"


def test_missing_file(tmp_path: Path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


@pytest.mark.parametrize(
    "override",
    [
        "grid.points=10",
        "grid.n=16",
        "grid.kind=chebyshev",
        "spec.nu_re=-1",
        "time.tau=0.5",
        "time.window=0.2",
        "solver.c_cfl=2",
        "modulation.avg_hi=0.3",
    ],
)
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_evolver_config():
    config = load_config(overrides=["solver.sponge=0", "solver.monitor_stride=7"])
    solver = config.evolver(m=0)
    assert solver.sponge == 0
    assert solver.monitor_stride == 7
    assert solver.dt_max == config.solver.dt_max
    assert solver.check_budget


def test_budget_check_can_be_switched_off():
    assert not load_config(overrides=["solver.check_budget=false"]).evolver().check_budget


def test_summary_leaves_out_output_dir(tmp_path: Path):
    config = load_config(overrides=[f"out.dir={tmp_path}"])
    assert config.out.dir == tmp_path
    assert "out" not in config.summary()
    assert config.summary()["spec"]["nu_re"] == 2.0


def test_environment(monkeypatch):
    monkeypatch.setenv("CSSLAB_OUT_DIR", "/tmp/csslab-runs")
    monkeypatch.setenv("CSSLAB_LOG_LEVEL", "debug")
    monkeypatch.setenv("CSSLAB_WORKERS", "3")
    assert RunConfig().out.dir == Path("/tmp/csslab-runs")
    assert log_level() == "DEBUG"
    assert workers() == 3


def test_environment_defaults(monkeypatch):
    monkeypatch.delenv("CSSLAB_LOG_LEVEL", raising=False)
    monkeypatch.delenv("CSSLAB_WORKERS", raising=False)
    assert log_level() == "WARNING"
    assert workers() is None
