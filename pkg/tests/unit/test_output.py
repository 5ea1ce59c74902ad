import json
import math
from pathlib import Path

import pytest

from csslab.checks import Check, CommandResult, at_least, at_most, nu_label, parse_complex, within_band
from csslab.output import csv_table, format_value, json_summary, write_all, write_atomic
from csslab.utils import gather_map


def test_format_value():
    assert format_value("ΛQ") == "ΛQ"
    assert format_value(True) == "1"
    assert format_value(7) == "7"
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(1 / 3)) == 1 / 3


def test_csv_table():
    text = csv_table(("t", "ok"), [{"t": -0.5, "ok": False, "extra": 1}])
    assert text == "t,ok\n-0.5,0\n"


def test_json_summary():
    checks = {"a": at_most(1e-9, 1e-8).as_dict(), "b": at_least(0.5, 1.0).as_dict()}
    doc = json.loads(json_summary("evolve", {"grid": {"n": 64}}, checks, {"values": {"x": 1.0}}))
    assert doc["schema"] == 1
    assert doc["command"] == "evolve"
    assert doc["passed"] is False
    assert doc["checks"]["a"]["passed"] is True
    assert doc["values"] == {"x": 1.0}


def test_json_summary_is_canonical():
    checks = {"z": at_most(0.0, 1.0).as_dict(), "a": at_most(0.0, 1.0).as_dict()}
    first = json_summary("c", {"b": 1, "a": 2}, checks)
    second = json_summary("c", {"a": 2, "b": 1}, dict(reversed(list(checks.items()))))
    assert first == second


def test_non_finite_check_values_become_null():
    check = Check(math.nan, 1.0, False)
    assert check.as_dict()["value"] is None
    json.loads(json_summary("c", {}, {"x": check.as_dict()}))


def test_within_band():
    assert within_band(1.04, 0.05).passed
    assert not within_band(0.9, 0.05).passed


def test_command_result():
    result = CommandResult(checks={"ok": at_most(1, 2), "bad": at_most(3, 2)})
    assert not result.passed
    assert result.failed == ["bad"]
    assert set(result.check_dicts()) == {"ok", "bad"}


@pytest.mark.parametrize("text, value", [("2", 2), ("1+0.5i", 1 + 0.5j), ("2-1j", 2 - 1j), (" 3 ", 3)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ValueError):
        parse_complex("two")


def test_nu_label():
    assert nu_label(2.0) == "2"
    assert nu_label(1 + 0.5j) == "1+0.5i"
    assert nu_label(2 - 1j) == "2-1i"


async def test_write_atomic(tmp_path: Path):
    path = await write_atomic(tmp_path / "sub" / "summary.json", "{}\n")
    assert path.read_text() == "{}\n"
    assert [p.name for p in path.parent.iterdir()] == ["summary.json"]


async def test_write_all(tmp_path: Path):
    paths = await write_all(tmp_path, {"b.csv": "b\n", "a.csv": "a\n"})
    assert [p.name for p in paths] == ["a.csv", "b.csv"]
    assert (tmp_path / "b.csv").read_text() == "b\n"


async def test_gather_map_keeps_order():
    assert await gather_map(pow, [1, 2, 3], 2) == [1, 4, 9]
