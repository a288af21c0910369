"""Shipped sweeps over the truncation parameter ``p`` of a GTR-T link.

``figure1`` varies the desired link at a common mean power Ω = 2 with
GTR-U interferers. ``figure2`` keeps a Rayleigh desired link and varies
the interferer law at a common diffuse power 2σ² = 2.

Series whose fading does not involve ``p`` are evaluated once and repeated
on every row so all CSVs share the same x grid.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

from .config import validate, _set_path, parse_override
from .report import Series, write_csv, write_svg, summary_line
from .runner import NUMERIC_FAILURE, run_tasks

P_VALUES = tuple(round(0.1 * i, 1) for i in range(1, 11))

_NETWORK = {"lambda_per_km2": 3.0, "power_w": 3.0, "eta": 4.0, "noise_dbm": -80.0}
_SIM = {"realizations": 20_000, "region_radius_factor": 15.0, "seed": 0}


@dataclass(frozen=True)
class SeriesSpec:
    name: str
    desired: dict
    interferer: dict
    methods: tuple
    swept: str = ""  # "desired.p" or "interferer.p" when the series depends on p


@dataclass(frozen=True)
class FigureSpec:
    name: str
    title: str
    series: tuple


FIGURE1 = FigureSpec(
    name="figure1",
    title="ASE vs p, GTR-U interferers, desired links at Ω = 2",
    series=(
        SeriesSpec("gtr_t", {"model": "gtr_t", "k": 10.0, "delta": 1.0, "omega": 2.0, "p": 1.0},
                   {"model": "gtr_u", "k": 5.0, "delta": 1.0, "omega": 2.0},
                   ("exact", "simulate", "hybrid"), swept="desired.p"),
        SeriesSpec("rician", {"model": "rician", "k": 10.0, "omega": 2.0},
                   {"model": "gtr_u", "k": 5.0, "delta": 1.0, "omega": 2.0},
                   ("exact", "simulate")),
        SeriesSpec("rayleigh", {"model": "rayleigh", "omega": 2.0},
                   {"model": "gtr_u", "k": 5.0, "delta": 1.0, "omega": 2.0},
                   ("exact", "simulate")),
    ),
)

FIGURE2 = FigureSpec(
    name="figure2",
    title="ASE vs p, Rayleigh desired link, interferers at 2σ² = 2",
    series=(
        SeriesSpec("gtr_t", {"model": "rayleigh", "sigma_sq": 1.0},
                   {"model": "gtr_t", "k": 5.0, "delta": 1.0, "sigma_sq": 1.0, "p": 1.0},
                   ("exact", "lower_bound", "simulate"), swept="interferer.p"),
        SeriesSpec("rayleigh", {"model": "rayleigh", "sigma_sq": 1.0},
                   {"model": "rayleigh", "sigma_sq": 1.0},
                   ("exact", "lower_bound", "simulate")),
        SeriesSpec("rician", {"model": "rayleigh", "sigma_sq": 1.0},
                   {"model": "rician", "k": 5.0, "sigma_sq": 1.0},
                   ("exact", "lower_bound", "simulate")),
    ),
)

FIGURES = {"figure1": FIGURE1, "figure2": FIGURE2}
HYBRID_NEAREST = 5


def base_config(fig, series, overrides=(), hybrid=False):
    raw = {
        "network": dict(_NETWORK),
        "desired": copy.deepcopy(series.desired),
        "interferer": copy.deepcopy(series.interferer),
        "method": "exact",
        "sim": dict(_SIM),
        "output": {"dir": ".", "name": fig.name, "format": "both"},
    }
    for item in overrides:
        path, value = parse_override(item)
        _set_path(raw, path, value)
    if hybrid:
        raw["sim"]["hybrid_nearest"] = HYBRID_NEAREST
    return raw


def _tasks(fig, overrides, p_values):
    """Evaluation tasks and, per series, the task indices of each row."""
    tasks = []
    layout = []
    for s in fig.series:
        rows = []
        points = p_values if s.swept else (None,)
        for p in points:
            for m in s.methods:
                raw = base_config(fig, s, overrides, hybrid=(m == "hybrid"))
                if p is not None:
                    _set_path(raw, s.swept, p)
                cfg = validate(raw)
                method = "simulate" if m == "hybrid" else m
                rows.append(len(tasks))
                tasks.append((cfg, method, "p", p))
        layout.append((s, points, rows))
    return tasks, layout


def build(fig, overrides=(), threads=1, p_values=P_VALUES):
    """Evaluate a figure; returns ``{series name: [Row, ...]}`` in row order."""
    tasks, layout = _tasks(fig, overrides, p_values)
    results = run_tasks(tasks, threads)
    out = {}
    for s, points, idx in layout:
        rows = [results[i] for i in idx]
        if not s.swept:
            # repeat the p-independent values along the p grid
            rows = [r.__class__("p", p, r.method, r.ase_nats, r.err, r.flags)
                    for p in p_values for r in rows]
        out[s.name] = rows
    return out


def write_figure(fig, table, out_dir, fmt, echo=print):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, rows in table.items():
        if fmt in ("csv", "both"):
            p = out / f"{fig.name}_{name}.csv"
            write_csv(p, rows)
            paths.append(p)
        for r in rows:
            echo(f"{fig.name}/{name} {summary_line(r)}")
    if fmt in ("svg", "both"):
        series = []
        for name, rows in table.items():
            methods = []
            for r in rows:
                if r.method not in methods:
                    methods.append(r.method)
            for m in methods:
                sel = [r for r in rows if r.method == m]
                series.append(Series(f"{name} {m}", tuple(r.swept_value for r in sel),
                                     tuple(r.ase_nats for r in sel),
                                     markers=m in ("simulate", "hybrid")))
        p = out / f"{fig.name}.svg"
        write_svg(p, series, fig.title, "p", "ASE [nats/s/Hz]")
        paths.append(p)
    return paths


def failed(table):
    return any(r.flags == NUMERIC_FAILURE for rows in table.values() for r in rows)
