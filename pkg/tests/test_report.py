import csv
import io
import json

import numpy as np
import pytest

from bigtax.errors import InvalidParameter
from bigtax.evaluation import EvalEntry, EvalReport
from bigtax.report import SUMMARY_COLUMNS, long_csv, markdown, render_report, summary_csv, svg


def _report():
    rng = np.random.default_rng(0)
    entries = []
    for ds in ("alpha", "beta"):
        for m in ("lda", "knn", "tree"):
            entries.append(EvalEntry(ds, m, rng.uniform(0.1, 0.4, 5), 5, 1 / 3, (42, 7)))
    entries.append(EvalEntry("beta", "bogus", np.full(5, np.nan), 5, 1 / 3, (42, 7), skipped="unknown"))
    return EvalReport(entries, {"R": 5})


def test_long_csv_rows():
    rows = list(csv.reader(io.StringIO(long_csv(_report()).decode())))
    assert rows[0] == ["dataset", "method", "r", "E_r"]
    assert len(rows) == 1 + 6 * 5


def test_summary_csv_columns():
    rows = list(csv.reader(io.StringIO(summary_csv(_report()).decode())))
    assert tuple(rows[0]) == SUMMARY_COLUMNS
    assert rows[1][-1] == "42-7" and rows[1][-3] == "5"
    assert rows[-1][2] == ""


def test_provenance_comment():
    text = summary_csv(_report(), {"seed": 42}).decode()
    assert text.startswith('# config: {"seed":42}\n')
    assert "<!-- config:" in markdown(_report(), {"seed": 42}).decode()


def test_markdown_shape():
    lines = markdown(_report()).decode().splitlines()
    assert lines[0] == "| dataset | lda | knn | tree | bogus |"
    assert len(lines) == 4
    assert lines[3].endswith("| n/a |")
    assert lines[2].endswith("|  |")


def test_svg_groups_and_boxes():
    doc = svg(_report()).decode()
    assert doc.count('<g class="box"') == 6
    assert doc.count('data-dataset="alpha"') == 3
    assert ">alpha</text>" in doc and ">beta</text>" in doc


def test_svg_deterministic():
    assert svg(_report(), {"a": 1}) == svg(_report(), {"a": 1})
    assert b"<metadata>" in svg(_report(), {"a": 1})


def test_svg_empty():
    with pytest.raises(InvalidParameter):
        svg(EvalReport([EvalEntry("d", "m", np.full(2, np.nan), 2, 0.5, (1,), skipped="x")]))


def test_render_json_and_bad_format():
    d = json.loads(render_report(_report(), "json", {"x": 1}))
    assert d["provenance"] == {"x": 1} and len(d["entries"]) == 7
    with pytest.raises(InvalidParameter):
        render_report(_report(), "pdf")
