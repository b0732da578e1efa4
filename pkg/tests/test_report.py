import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from metapool.exceptions import EmptyRows
from metapool.meta import IntervalMethod, Weighting, combine_region, pool
from metapool.prep import fit_summary
from metapool.report import (
    CSV_COLUMNS,
    ForestRow,
    RowKind,
    build_forest,
    combined_label,
    echo,
    parse_json,
    render_svg,
    result_to_record,
    serialize_results,
    summaries_to_csv,
    to_csv,
    to_json,
)
from metapool.types import FitPath, FittedSummary, OutcomeMeasure

from conftest import region10_quantiles

SVG = "{http://www.w3.org/2000/svg}"
R = OutcomeMeasure.ReproductionNumber


@pytest.fixture(scope="module")
def region10():
    summaries = [fit_summary(q) for q, _ in region10_quantiles()]
    results = [combine_region(summaries, method=m) for m in (IntervalMethod.Wald, IntervalMethod.KNHA)]
    return summaries, results


def test_model1_row(region10):
    summaries, results = region10
    rows = build_forest(summaries, results)
    first = rows[0]
    assert first.kind is RowKind.Model and first.label == "model1"
    assert first.center == 0.74
    assert (first.low, first.high) == pytest.approx((0.61, 0.87), abs=0.005)


def test_forest_row_layout(region10):
    summaries, results = region10
    rows = build_forest(summaries, results)
    assert len(rows) == 11 + 2 * 2
    assert [r.kind for r in rows[11:]] == [RowKind.CombinedCI, RowKind.CombinedCR] * 2
    assert rows[11].label == "Combined (REML)"
    assert rows[13].label == "Combined (REML+KNHA)"


def test_combined_label_inverse_variance():
    r = pool([1, 2, 3], [1, 1, 1], Weighting.InverseVariance, IntervalMethod.KNHA)
    assert combined_label(r) == "Combined (REML+KNHA, inverse-variance)"


def test_degenerate_row_has_zero_width():
    s = FittedSummary("m", "x", R, 1.2, 0.0, 0.0, 0.0, FitPath.Normal, True)
    (row,) = build_forest([s], [])
    assert row.low == row.high == row.center == 1.2
    _, (line,) = _intervals(render_svg([row], "point"))
    assert line.get("x1") == line.get("x2")


def test_model_rows_clamped_for_counts():
    s = FittedSummary("m", "x", OutcomeMeasure.DailyInfections, 10.0, 20.0, 0.0, 20.0, FitPath.Normal)
    (row,) = build_forest([s], [])
    assert row.low == 0.0


def _intervals(svg):
    root = ET.fromstring(svg)
    plot = next(e for e in root.iter(SVG + "g") if e.get("class") == "plot")
    lines = [e for e in root.iter(SVG + "line") if e.get("class") == "interval"]
    return plot, lines


def test_svg_one_interval_per_row(region10):
    summaries, results = region10
    rows = build_forest(summaries, results)
    svg = render_svg(rows, "R, region10", R)
    plot, lines = _intervals(svg)
    assert len(lines) == len(rows)
    assert [e.get("data-kind") for e in lines] == [r.kind.value for r in rows]
    # CR rows share the slot of their CI row
    assert lines[11].get("y1") == lines[12].get("y1")
    assert lines[10].get("y1") != lines[11].get("y1")


def test_svg_extents_round_trip(region10):
    summaries, results = region10
    rows = build_forest(summaries, results)
    plot, lines = _intervals(render_svg(rows, "R, region10", R))
    vmin, vmax = float(plot.get("data-vmin")), float(plot.get("data-vmax"))
    x0, x1 = float(plot.get("data-x0")), float(plot.get("data-x1"))
    per_px = (vmax - vmin) / (x1 - x0)
    for row, e in zip(rows, lines):
        lo = vmin + (float(e.get("x1")) - x0) * per_px
        hi = vmin + (float(e.get("x2")) - x0) * per_px
        # 2-dp pixel coordinates
        assert lo == pytest.approx(row.low, abs=0.005 * per_px + 1e-12)
        assert hi == pytest.approx(row.high, abs=0.005 * per_px + 1e-12)
        assert float(e.get("data-low")) == row.low


def test_svg_reference_lines():
    rows = [ForestRow("a", 0.5, 0.4, 0.6, RowKind.Model)]

    def refs(svg):
        return [e for e in ET.fromstring(svg).iter(SVG + "line") if e.get("class") == "reference"]

    assert len(refs(render_svg(rows, "t", R))) == 1
    assert len(refs(render_svg(rows, "t", OutcomeMeasure.GrowthRate))) == 1
    assert refs(render_svg(rows, "t", OutcomeMeasure.DailyInfections)) == []
    assert refs(render_svg(rows, "t", R, reference=None)) == []


def test_svg_deterministic(region10):
    summaries, results = region10
    rows = build_forest(summaries, results)
    assert render_svg(rows, "x", R).encode() == render_svg(rows, "x", R).encode()


def test_svg_escapes_title():
    svg = render_svg([ForestRow("a<b", 1, 0, 2, RowKind.Model)], "R & r")
    root = ET.fromstring(svg)
    assert root.find(SVG + "title").text == "R & r"


def test_svg_empty():
    with pytest.raises(EmptyRows):
        render_svg([], "nothing")


def test_echo_two_decimals():
    assert echo(0.80058, (0.7415, 0.8596), (0.7305, 0.8707)) == "0.80 (0.74, 0.86) [0.73, 0.87]"
    assert echo(-0.001, (-0.004, 0.002), (-0.0049, 0.1)) == "0.00 (0.00, 0.00) [0.00, 0.10]"


def test_region10_echo(region10):
    _, (wald, knha) = region10
    assert result_to_record(wald)["echo"] == "0.80 (0.75, 0.85) [0.74, 0.86]"
    assert result_to_record(knha)["echo"] == "0.80 (0.74, 0.86) [0.73, 0.87]"


def test_csv_header_only_for_empty():
    j, c = serialize_results([])
    assert c == ",".join(CSV_COLUMNS) + "\n"
    assert json.loads(j) == []


def test_csv_rows(region10):
    _, results = region10
    _, text = serialize_results(results)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2
    assert rows[1]["method"] == "knha"
    assert float(rows[1]["theta_hat"]) == results[1].theta_hat
    assert rows[0]["models"].split(";")[0] == "model1"
    assert rows[0]["clamped_low"] == "false"
    assert rows[0]["reliability"] == ""


def test_clamped_counts_result_serialises():
    r = pool([1.0, 50.0, 2.0], [0.01, 0.01, 0.01], nonnegative_measure=True)
    rec = result_to_record(r)
    assert rec["clamped_low"] is True
    assert rec["cr"][0] == 0.0
    row = next(csv.DictReader(io.StringIO(to_csv([rec]))))
    assert row["clamped_low"] == "true" and float(row["cr_low"]) == 0.0


def test_json_fixed_point(region10):
    _, results = region10
    text, _ = serialize_results(results)
    assert to_json(parse_json(text)) == text
    assert text.endswith("\n")


def test_summaries_csv(region10):
    summaries, _ = region10
    rows = list(csv.DictReader(io.StringIO(summaries_to_csv(summaries))))
    assert len(rows) == 11
    assert rows[0]["model"] == "model1" and rows[0]["path"] == "normal"
    assert float(rows[0]["y_hat"]) == 0.74
