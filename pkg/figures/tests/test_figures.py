"""Figure rendering against the golden experiment CSVs."""

import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from figures import FIGURE_KINDS, FigureSpec, render
from figures.cli import main
from figures.csvio import SchemaError, column, read_table
from figures.render import least_squares_line

GOLDEN = Path(__file__).resolve().parents[2] / "data" / "golden"
SVG_NS = "{http://www.w3.org/2000/svg}"

KIND_TO_CSV = {
    "lambda_sweep": GOLDEN / "lambda_sweep.csv",
    "tau_sweep": GOLDEN / "tau_sweep.csv",
    "ground_iterations": GOLDEN / "ground_search.csv",
    "resource_convergence": GOLDEN / "ground_search.csv",
}


def render_kind(kind, tmp_path, **kw):
    out = tmp_path / f"{kind}.svg"
    render(FigureSpec(KIND_TO_CSV[kind], kind, out, **kw))
    return out


def circles(svg_path, series):
    root = ET.parse(svg_path).getroot()
    return [
        (float(c.get("data-x")), float(c.get("data-y")))
        for c in root.iter(f"{SVG_NS}circle")
        if c.get("data-series") == series
    ]


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_renders_golden_csv(kind, tmp_path):
    out = render_kind(kind, tmp_path)
    text = out.read_text()
    assert text.startswith("<svg ")
    assert "<circle " in text


@pytest.mark.parametrize("kind,series,xcol,ycol", [
    ("lambda_sweep", "infidelity", "lambda", "infidelity"),
    ("lambda_sweep", "success_prob", "lambda", "success_prob"),
    ("tau_sweep", "energy_expectation", "tau", "energy_expectation"),
    ("tau_sweep", "success_prob", "tau", "success_prob"),
    ("ground_iterations", "E_i", "i", "E_i"),
])
def test_points_match_csv_rows(kind, series, xcol, ycol, tmp_path):
    rows = read_table(KIND_TO_CSV[kind], (xcol, ycol))
    got = circles(render_kind(kind, tmp_path), series)
    want = list(zip(column(rows, xcol), column(rows, ycol)))
    assert len(got) >= 3
    # data attributes round-trip the source values exactly
    assert got == want


def test_resource_points_are_log_errors(tmp_path):
    rows = read_table(KIND_TO_CSV["resource_convergence"],
                      ("E_i", "cumulative_queries", "exact_ground_energy"))
    import math
    ground = column(rows, "exact_ground_energy")[0]
    want = [
        (q, math.log10(abs(e - ground)))
        for q, e in zip(column(rows, "cumulative_queries"), column(rows, "E_i"))
        if e != ground
    ]
    got = circles(render_kind("resource_convergence", tmp_path), "log_error")
    assert len(got) >= 3
    assert got == pytest.approx(want)


def test_resource_convergence_slope_negative(tmp_path):
    out = render_kind("resource_convergence", tmp_path)
    root = ET.parse(out).getroot()
    fits = [el for el in root.iter(f"{SVG_NS}polyline")
            if el.get("data-series") == "fit"]
    assert len(fits) == 1
    assert float(fits[0].get("data-slope")) < 0


def test_tau_sweep_dashed_reference(tmp_path):
    rows = read_table(KIND_TO_CSV["tau_sweep"], ("exact_ground_energy",))
    ground = column(rows, "exact_ground_energy")[0]
    out = render_kind("tau_sweep", tmp_path)
    root = ET.parse(out).getroot()
    dashed = [el for el in root.iter(f"{SVG_NS}line")
              if el.get("stroke-dasharray") and el.get("y1") == el.get("y2")]
    assert len(dashed) == 1
    labels = [el.text for el in root.iter(f"{SVG_NS}text")]
    assert f"exact ground energy = {ground:.6g}" in labels


def test_ground_iterations_error_bars(tmp_path):
    rows = read_table(KIND_TO_CSV["ground_iterations"], ("i",))
    out = render_kind("ground_iterations", tmp_path)
    root = ET.parse(out).getroot()
    bars = [el for el in root.iter(f"{SVG_NS}line")
            if el.get("x1") == el.get("x2")]
    assert len(bars) == len(rows)


def test_rendering_is_deterministic(tmp_path):
    a = render_kind("lambda_sweep", tmp_path).read_bytes()
    b = (tmp_path / "again.svg")
    render(FigureSpec(KIND_TO_CSV["lambda_sweep"], "lambda_sweep", b))
    assert a == b.read_bytes()


def test_floor_excludes_points_from_fit(tmp_path):
    # a floor above every error leaves nothing to fit
    with pytest.raises(SchemaError, match="statistical floor"):
        render_kind("resource_convergence", tmp_path, floor=1.0)


def test_schema_mismatch(tmp_path):
    with pytest.raises(SchemaError, match="missing columns"):
        render(FigureSpec(KIND_TO_CSV["lambda_sweep"], "tau_sweep",
                          tmp_path / "x.svg"))


def test_empty_data(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# comment only\n")
    with pytest.raises(SchemaError, match="no data"):
        render(FigureSpec(empty, "lambda_sweep", tmp_path / "x.svg"))
    header_only = tmp_path / "header.csv"
    header_only.write_text("lambda,infidelity,success_prob,lower_bound\n")
    with pytest.raises(SchemaError, match="no rows"):
        render(FigureSpec(header_only, "lambda_sweep", tmp_path / "y.svg"))


def test_unknown_kind(tmp_path):
    with pytest.raises(SchemaError, match="unknown figure kind"):
        FigureSpec(KIND_TO_CSV["lambda_sweep"], "pie_chart",
                   tmp_path / "x.svg")


def test_least_squares_line():
    xs = [0.0, 1.0, 2.0, 3.0]
    slope, intercept = least_squares_line(xs, [2.0 * x - 1.0 for x in xs])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(-1.0)
    with pytest.raises(SchemaError):
        least_squares_line([1.0, 1.0], [0.0, 1.0])


def test_cli_roundtrip(tmp_path, capsys):
    out = tmp_path / "fig.svg"
    rc = main(["--kind", "resource_convergence",
               "--in", str(KIND_TO_CSV["resource_convergence"]),
               "--out", str(out)])
    assert rc == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_cli_schema_error_exit_code(tmp_path, capsys):
    rc = main(["--kind", "tau_sweep",
               "--in", str(KIND_TO_CSV["lambda_sweep"]),
               "--out", str(tmp_path / "fig.svg")])
    assert rc == 2
    assert "missing columns" in capsys.readouterr().err
