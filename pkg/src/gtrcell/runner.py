"""Evaluate a :class:`~gtrcell.config.RunConfig` into CSV rows."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .ase import average_se
from .errors import NumericError
from .montecarlo import simulate_ase
from .report import Row, series_from_rows, summary_line, write_csv, write_svg

NUMERIC_FAILURE = "numeric_failure"


def methods_for(cfg):
    if cfg.method == "both":
        analytic = "severe" if cfg.interferer.model.startswith("severe") else "exact"
        return [analytic, "simulate"]
    return [cfg.method]


def sim_label(cfg):
    return "hybrid" if cfg.sim.hybrid_nearest is not None else "simulate"


def evaluate(cfg, method, swept_param="", swept_value=None, threads=1):
    """One ASE evaluation as a :class:`Row`; numeric failures become flagged rows."""
    net = cfg.network.resolve()
    link = cfg.link()
    label = sim_label(cfg) if method == "simulate" else method
    try:
        if method == "simulate":
            est = simulate_ase(cfg.sim.resolve(), net, link, threads=threads)
            value, err = est.mean, est.std_err
        else:
            res = average_se(net, link, method, threads=threads)
            value, err = res.nats, res.err_est
    except NumericError as exc:
        value = exc.value if exc.value is not None and math.isfinite(exc.value) else None
        return Row(swept_param, swept_value, label, value, exc.err_est, NUMERIC_FAILURE)
    return Row(swept_param, swept_value, label, value, err)


def run_tasks(tasks, threads):
    """Evaluate ``(cfg, method, param, value)`` tuples, returning rows in task order."""
    def one(task):
        cfg, method, param, value = task
        return evaluate(cfg, method, param, value, threads=1 if threads > 1 and len(tasks) > 1 else threads)

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, tasks))
    return [one(t) for t in tasks]


def sweep_tasks(cfg):
    param = cfg.sweep.param if cfg.sweep else ""
    return [(point, method, param, value)
            for value, point in cfg.points()
            for method in methods_for(point)]


def emit(rows, out_dir, name, fmt, title, x_label, echo=print):
    """Write ``name.csv`` and/or ``name.svg``; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt in ("csv", "both"):
        p = out / f"{name}.csv"
        write_csv(p, rows)
        paths.append(p)
    if fmt in ("svg", "both"):
        p = out / f"{name}.svg"
        write_svg(p, series_from_rows(rows), title, x_label, "ASE [nats/s/Hz]")
        paths.append(p)
    for r in rows:
        echo(summary_line(r))
    return paths


def run(cfg, threads=1, echo=print):
    """Execute a run configuration; returns ``(rows, paths)``."""
    rows = run_tasks(sweep_tasks(cfg), threads)
    x_label = cfg.sweep.param if cfg.sweep else ""
    paths = emit(rows, cfg.output.dir, cfg.output.name, cfg.output.format,
                 cfg.output.name, x_label, echo=echo)
    return rows, paths
