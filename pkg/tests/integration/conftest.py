import json
from pathlib import Path
from typing import Callable

import pytest
from typer.testing import CliRunner

from csslab.__main__ import app


@pytest.fixture(scope="package")
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def run_verb(runner: CliRunner, tmp_path: Path) -> Callable[..., dict]:
    """Run one verb into a fresh output directory and return its parsed summary."""

    def run(verb: str, *args: str, expect: int | None = 0) -> dict:
        result = runner.invoke(app, [verb, *args, "--out", str(tmp_path)])
        if expect is not None:
            assert result.exit_code == expect, result.output
        return json.loads((tmp_path / verb / "summary.json").read_text())

    return run
