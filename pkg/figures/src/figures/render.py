"""The four figure kinds rendered from experiment CSVs.

Rendering is a pure function of the input file: the SVG text is rebuilt from
the parsed rows, so the same CSV always yields byte-identical output. The only
computation done here is axis transforms and one least-squares line; every
science number comes from the CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .csvio import SchemaError, column, read_table
from .svg import Axes, Figure, padded

FIGURE_KINDS = ("lambda_sweep", "tau_sweep", "ground_iterations",
                "resource_convergence")

_SCHEMAS = {
    "lambda_sweep": ("lambda", "infidelity", "success_prob"),
    "tau_sweep": ("tau", "energy_expectation", "exact_ground_energy",
                  "success_prob"),
    "ground_iterations": ("i", "E_i", "ci_low", "ci_high",
                          "exact_ground_energy"),
    "resource_convergence": ("E_i", "cumulative_queries",
                             "exact_ground_energy"),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str | Path
    figure_kind: str
    output: str | Path
    # resource_convergence only: errors at or below this level are treated as
    # statistical-floor samples and excluded from the least-squares fit.
    floor: float = 0.0

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.figure_kind!r}; "
                f"expected one of {FIGURE_KINDS}"
            )


def least_squares_line(xs, ys):
    """Ordinary least-squares slope and intercept for y = a*x + b."""
    n = len(xs)
    if n < 2:
        raise SchemaError("need at least two points for a line fit")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        raise SchemaError("degenerate fit: all x values identical")
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    return slope, my - slope * mx


def _main_axes(xlim, ylim, **kw):
    return Axes(60, 20, 540, 360, xlim, ylim, **kw)


def _render_lambda_sweep(rows) -> Figure:
    lams = column(rows, "lambda")
    series = {
        "infidelity": (column(rows, "infidelity"), "crimson"),
        "success_prob": (column(rows, "success_prob"), "steelblue"),
    }
    positive = [v for vals, _ in series.values() for v in vals if v > 0]
    fig = Figure()
    ax = _main_axes((min(lams), max(lams)),
                    padded(min(positive), max(positive), log=True), ylog=True)
    fig.frame(ax, "lambda", "infidelity / success probability (log)")
    y = 36
    for name, (vals, color) in series.items():
        keep = [(x, v) for x, v in zip(lams, vals) if v > 0]
        xs, ys = zip(*keep)
        fig.polyline(ax, xs, ys, stroke=color)
        fig.points(ax, xs, ys, series=name, fill=color)
        fig.text(72, y, name, size=11)
        fig.elements.append(
            f'<line x1="130" y1="{y - 4}" x2="160" y2="{y - 4}" '
            f'stroke="{color}"/>'
        )
        y += 16
    return fig


def _render_tau_sweep(rows) -> Figure:
    taus = column(rows, "tau")
    energies = column(rows, "energy_expectation")
    ground = column(rows, "exact_ground_energy")[0]
    succ = column(rows, "success_prob")
    fig = Figure()
    ax = _main_axes((min(taus), max(taus)),
                    padded(min(energies + [ground]), max(energies + [ground])))
    fig.frame(ax, "tau", "energy expectation")
    fig.hline(ax, ground, stroke="red", dash="6,3")
    fig.polyline(ax, taus, energies, stroke="black")
    fig.points(ax, taus, energies, series="energy_expectation")
    fig.text(ax.x0 + 8, ax.py(ground) - 6,
             f"exact ground energy = {ground:.6g}", size=10)
    # success-probability inset, upper right
    inset = Axes(420, 40, 160, 110, (min(taus), max(taus)),
                 padded(min(succ), max(succ)))
    fig.frame(inset, "tau", "")
    fig.text(inset.x0 + 4, inset.y0 + 12, "success prob", size=10)
    fig.polyline(inset, taus, succ, stroke="steelblue")
    fig.points(inset, taus, succ, series="success_prob", fill="steelblue",
               r=2.0)
    return fig


def _render_ground_iterations(rows) -> Figure:
    its = column(rows, "i")
    energies = column(rows, "E_i")
    lows = column(rows, "ci_low")
    highs = column(rows, "ci_high")
    ground = column(rows, "exact_ground_energy")[0]
    fig = Figure()
    ax = _main_axes((min(its) - 0.5, max(its) + 0.5),
                    padded(min(lows + [ground]), max(highs + [ground])))
    fig.frame(ax, "iteration", "energy estimate")
    fig.hline(ax, ground, stroke="red", dash="6,3")
    fig.error_bars(ax, its, lows, highs)
    fig.points(ax, its, energies, series="E_i")
    return fig


def _render_resource_convergence(rows, floor: float) -> Figure:
    queries = column(rows, "cumulative_queries")
    ground = column(rows, "exact_ground_energy")[0]
    errors = [abs(e - ground) for e in column(rows, "E_i")]
    pts = [(q, err) for q, err in zip(queries, errors) if err > 0]
    if not pts:
        raise SchemaError("all errors are zero; nothing to plot on a log axis")
    xs = [q for q, _ in pts]
    ys = [math.log10(err) for _, err in pts]
    fit = [(q, math.log10(err)) for q, err in pts if err > floor]
    if len(fit) < 2:
        raise SchemaError("fewer than two points above the statistical floor")
    fxs = [q for q, _ in fit]
    fys = [y for _, y in fit]
    slope, intercept = least_squares_line(fxs, fys)
    fig = Figure()
    ax = _main_axes(padded(min(xs), max(xs)), padded(min(ys), max(ys)))
    fig.frame(ax, "cumulative queries", "log10 |E_i - exact ground energy|")
    fig.points(ax, xs, ys, series="log_error")
    fig.polyline(
        ax, (min(fxs), max(fxs)),
        (slope * min(fxs) + intercept, slope * max(fxs) + intercept),
        stroke="darkorange",
        attrs=f'data-series="fit" data-slope="{slope:.17g}" '
              f'data-intercept="{intercept:.17g}"',
    )
    fig.text(72, 36, f"fit slope = {slope:.3e}", size=11)
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure kind from its CSV and write the SVG file."""
    rows = read_table(spec.input_csv, _SCHEMAS[spec.figure_kind])
    if spec.figure_kind == "lambda_sweep":
        fig = _render_lambda_sweep(rows)
    elif spec.figure_kind == "tau_sweep":
        fig = _render_tau_sweep(rows)
    elif spec.figure_kind == "ground_iterations":
        fig = _render_ground_iterations(rows)
    else:
        fig = _render_resource_convergence(rows, spec.floor)
    out = Path(spec.output)
    out.write_text(fig.to_svg())
    return out
