"""Formatting, atomic writers, and fit helper tests."""

import json
import os

import numpy as np
import pytest

from nelsonlab.report import (
    LedgerEntry,
    fmt,
    loglog_fit,
    write_csv_atomic,
    write_json_atomic,
)


class TestFormatting:
    def test_float_roundtrip_exact(self):
        for x in (1.0 / 3.0, np.pi, 1e-300, -7.25, 0.1 ** 3.5):
            assert float(fmt(x)) == x

    def test_int_and_str_passthrough(self):
        assert fmt(17) == "17"
        assert fmt(np.int64(-3)) == "-3"
        assert fmt("label") == "label"

    def test_ledger_entry_as_dict(self):
        e = LedgerEntry(name="gap", anchor="gap >= sigma/2",
                        margin=np.float64(0.25), passed=True)
        d = e.as_dict()
        assert d == {"name": "gap", "anchor": "gap >= sigma/2",
                     "margin": 0.25, "passed": True}
        assert isinstance(d["margin"], float)


class TestAtomicWriters:
    def test_csv_content_and_no_temp_left(self, tmp_path):
        path = tmp_path / "out" / "table.csv"
        write_csv_atomic(str(path), ["a", "b"], [(1, 0.5), (2, 1.0 / 3.0)])
        text = path.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "a,b"
        assert lines[1] == "1,0.5"
        assert float(lines[2].split(",")[1]) == 1.0 / 3.0
        assert [p for p in os.listdir(path.parent) if p.startswith(".tmp_")] == []

    def test_csv_rewrite_byte_identical(self, tmp_path):
        path = str(tmp_path / "t.csv")
        rows = [(3, np.pi), (4, np.e)]
        write_csv_atomic(path, ["i", "x"], rows)
        first = open(path, "rb").read()
        write_csv_atomic(path, ["i", "x"], rows)
        assert open(path, "rb").read() == first

    def test_json_sorted_and_parseable(self, tmp_path):
        path = str(tmp_path / "ledger.json")
        write_json_atomic(path, {"b": 1, "a": [True, 0.5]})
        obj = json.load(open(path))
        assert obj == {"a": [True, 0.5], "b": 1}
        text = open(path).read()
        assert text.index('"a"') < text.index('"b"')


class TestLogLogFit:
    def test_exact_power_law(self):
        x = 0.5 ** np.arange(8)
        y = 3.0 * x ** (1.0 / 16.0)
        expo, pre, sat = loglog_fit(x, y)
        assert not sat
        assert expo == pytest.approx(0.0625, abs=1e-6)
        assert pre == pytest.approx(3.0, rel=1e-9)

    def test_saturated_data_flagged(self):
        x = 0.5 ** np.arange(6)
        y = np.full(6, 1e-16)
        expo, pre, sat = loglog_fit(x, y)
        assert sat
        assert np.isnan(expo) and np.isnan(pre)
