import math

import pandas as pd
import pytest

from app.errors import MissingBaselineError
from app.utils import RATIO_COLUMNS, append_csv_rows, atomic_write_text, ratio_table


def frame(rows):
    return pd.DataFrame(rows, columns=["group", "run_id", "mapping", "coupling", "time_s", "energy_j", "llcmpi"])


def test_ratios_against_the_group_baseline():
    df = frame([
        ("g1", "a1", "analog", "tight", "1.0e-03", "2.0e-03", "1.0e-04"),
        ("g1", "d1", "digital", "tight", "1.0e-02", "3.0e-02", "4.0e-03"),
        ("g2", "a2", "analog", "loose", "5.0e-03", "1.0e-03", "0.0"),
        ("g2", "d2", "digital", "tight", "1.0e-02", "1.0e-02", "0.0"),
    ])
    out = ratio_table(df)
    assert list(out.columns) == RATIO_COLUMNS
    assert out["run_id"].tolist() == ["a1", "a2"]
    assert out["speedup"].tolist() == pytest.approx([10.0, 2.0])
    assert out["energy_ratio"].tolist() == pytest.approx([15.0, 10.0])
    assert out["llcmpi_ratio"].iloc[0] == pytest.approx(0.025)
    assert math.isnan(out["llcmpi_ratio"].iloc[1])


def test_missing_baseline_names_the_group():
    df = frame([("g1", "a1", "analog", "tight", 1.0, 1.0, 1.0), ("g2", "d2", "digital", "tight", 1.0, 1.0, 1.0)])
    with pytest.raises(MissingBaselineError, match="g1"):
        ratio_table(df)


def test_empty_results():
    out = ratio_table(frame([]))
    assert out.empty and list(out.columns) == RATIO_COLUMNS


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = atomic_write_text(tmp_path / "sub" / "f.txt", "hello\n")
    assert path.read_text() == "hello\n"
    assert [p.name for p in path.parent.iterdir()] == ["f.txt"]


def test_append_csv_rows(tmp_path):
    path = tmp_path / "r.csv"
    append_csv_rows(path, pd.DataFrame([{"a": 1, "b": 2}]))
    append_csv_rows(path, pd.DataFrame([{"a": 3, "b": 4}]))
    assert path.read_text().splitlines() == ["a,b", "1,2", "3,4"]
