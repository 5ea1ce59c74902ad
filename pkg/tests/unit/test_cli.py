import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from csslab.__main__ import app

runner = CliRunner()

VERBS = (
    "soliton-check",
    "specfun-check",
    "radiation-build",
    "mod-ode",
    "decompose",
    "evolve",
    "blowup-verify",
    "transform",
)


def test_help_lists_verbs():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for verb in VERBS:
        assert verb in result.output


@pytest.mark.parametrize("override", ["grid.n=abc", "nowhere.n=1", "grid.n"])
def test_bad_override_exits_with_config_error(override, tmp_path: Path):
    result = runner.invoke(app, ["evolve", "--set", override, "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert not any(tmp_path.iterdir())


def test_bad_nu_exits_with_usage_error(tmp_path: Path):
    result = runner.invoke(app, ["specfun-check", "--nu", "abc", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_specfun_check_writes_summary(tmp_path: Path):
    result = runner.invoke(app, ["specfun-check", "--nu", "2", "--nu", "1+0.5i", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "specfun-check" / "summary.json").read_text())
    assert summary["passed"] is True
    assert summary["command"] == "specfun-check"
    assert summary["values"]["p_re_nu=2"] == pytest.approx(1.0)
    assert summary["values"]["alpha_re_nu=2"] == pytest.approx(0.0, abs=1e-8)
    assert (tmp_path / "specfun-check" / "specfun.csv").read_text().startswith("nu_re,nu_im,")


def test_config_file_option(tmp_path: Path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("out.dir = elsewhere\n")
    result = runner.invoke(app, ["specfun-check", "-n", "3", "-c", str(cfg), "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "specfun-check" / "summary.json").exists()
