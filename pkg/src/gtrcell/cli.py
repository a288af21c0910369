"""``gtrcell`` command line.

Exit status: 0 on success, 2 for configuration errors, 3 when a numeric
routine failed (the CSV is still written, with the affected rows flagged).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import yaml

from . import config as config_mod
from . import figures, runner
from .errors import ConfigError, DomainError, NumericError
from .interference import METHODS, log_lt

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _common(p):
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                   help="override a config field, value parsed as YAML (repeatable)")
    p.add_argument("--seed", type=int, help="Monte-Carlo seed (sim.seed)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--dump-config", action="store_true", help="print the resolved SI configuration and exit")
    p.add_argument("--format", choices=config_mod.FORMATS, help="output format (output.format)")
    p.add_argument("--out", help="output directory (output.dir)")


def build_parser():
    parser = argparse.ArgumentParser(prog="gtrcell", description="Spectral efficiency of PPP cellular networks under GTR fading.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a YAML run configuration")
    p.add_argument("config")
    _common(p)

    for name in figures.FIGURES:
        p = sub.add_parser(name, help=f"shipped sweep {name}")
        _common(p)

    p = sub.add_parser("lt", help="print every interference LT method at one (r0, s)")
    p.add_argument("config")
    p.add_argument("--r0", type=float, required=True, help="serving distance [m]")
    p.add_argument("--s", type=float, required=True, help="LT argument [1/W]")
    _common(p)
    return parser


def _flag_overrides(args):
    extra = list(args.overrides)
    if args.seed is not None:
        extra.append(f"sim.seed={args.seed}")
    if args.format is not None:
        extra.append(f"output.format={args.format}")
    if args.out is not None:
        extra.append(f"output.dir={json.dumps(args.out)}")  # JSON strings are YAML
    return extra


def _dump(cfg):
    print(yaml.safe_dump(cfg.resolved(), sort_keys=False), end="")


def _cmd_run(args):
    cfg = config_mod.load(args.config, _flag_overrides(args))
    if args.dump_config:
        _dump(cfg)
        return EXIT_OK
    rows, _ = runner.run(cfg, threads=args.threads)
    return EXIT_NUMERIC if any(r.flags for r in rows) else EXIT_OK


def _cmd_figure(args):
    fig = figures.FIGURES[args.command]
    overrides = _flag_overrides(args)
    if args.dump_config:
        for s in fig.series:
            print(f"# {fig.name}/{s.name}")
            _dump(config_mod.validate(figures.base_config(fig, s, overrides)))
        return EXIT_OK
    # validate once up front so errors are reported before any work
    probe = config_mod.validate(figures.base_config(fig, fig.series[0], overrides))
    out_dir, fmt = probe.output.dir, probe.output.format
    table = figures.build(fig, overrides, threads=args.threads)
    figures.write_figure(fig, table, out_dir, fmt)
    return EXIT_NUMERIC if figures.failed(table) else EXIT_OK


def _cmd_lt(args):
    cfg = config_mod.load(args.config, _flag_overrides(args))
    if args.dump_config:
        _dump(cfg)
        return EXIT_OK
    net = cfg.network.resolve()
    fading = cfg.interferer.resolve()
    severe = cfg.interferer.model.startswith("severe")
    methods = ["severe"] if severe else [m for m in METHODS if m != "severe"]
    status = EXIT_OK
    for m in methods:
        try:
            log_l, err = log_lt(m, net, fading, args.r0, args.s)
        except NumericError as exc:
            print(f"{m:12s} failed: {exc}")
            status = EXIT_NUMERIC
            continue
        print(f"{m:12s} L = {math.exp(log_l[0]):.12g}  log L = {log_l[0]:.12g}  (± {err[0]:.3g})")
    return status


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "lt":
            return _cmd_lt(args)
        return _cmd_figure(args)
    except (ConfigError, DomainError) as exc:
        print(f"gtrcell: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"gtrcell: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
