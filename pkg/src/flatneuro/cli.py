"""Command-line scenario runner.

``flatneuro run``, ``flatneuro sweep`` and ``flatneuro list-scenarios``.
Every run writes a directory with ``config.ini`` (the resolved config),
``report.json``, ``timeseries.csv`` and/or scenario tables, and SVG plots.

Exit codes: 0 when every check passes, 1 for an invalid configuration or a
failed check, 2 for a runtime failure (singularity, divergence, domain
violation), whose diagnostic is written to the report.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import _kernels
from .config import SCENARIOS, load_config
from .errors import ConfigurationError, FlatneuroError
from .integrate import Method
from .runner import RUNNERS
from .svg import line_plot

REPORT_SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def run_scenario(cfg, out_dir, seed=0, svg=True) -> int:
    """Run one resolved config and write its artifacts; returns the exit code."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.ini").write_text(cfg.to_ini())
    report = {"schema_version": REPORT_SCHEMA, "scenario": cfg.scenario, "seed": seed,
              "kernel_backend": _kernels.BACKEND, "config": cfg.sections,
              "checks": [], "metrics": {}, "artifacts": ["config.ini"]}
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    try:
        outcome = RUNNERS[cfg.scenario](cfg, rng)
    except ConfigurationError as exc:
        report.update(status="invalid", exit_code=EXIT_INVALID,
                      error={"type": type(exc).__name__, "message": str(exc)})
        return _finish(out_dir, report)
    except FlatneuroError as exc:
        report.update(status="error", exit_code=EXIT_RUNTIME,
                      error={"type": type(exc).__name__, "message": str(exc),
                             "time": getattr(exc, "time", None),
                             "channel": getattr(exc, "channel", None)})
        partial = getattr(exc, "partial", None)
        if partial is not None and partial.times.size:
            cols = {"t": partial.times}
            cols.update({n: partial.states[:, i] for i, n in enumerate(partial.names)})
            write_csv(out_dir / "partial_timeseries.csv", list(cols), zip(*cols.values()))
            report["artifacts"].append("partial_timeseries.csv")
        return _finish(out_dir, report)
    report["runtime_s"] = round(time.perf_counter() - start, 3)

    if outcome.columns:
        write_csv(out_dir / "timeseries.csv", list(outcome.columns),
                  zip(*outcome.columns.values()))
        report["artifacts"].append("timeseries.csv")
    for name, (header, rows) in outcome.tables.items():
        write_csv(out_dir / name, header, rows)
        report["artifacts"].append(name)
    if svg:
        for fname, xcol, ycols, title in outcome.plots:
            line_plot(out_dir / fname, outcome.columns[xcol],
                      {c: outcome.columns[c] for c in ycols}, title, xlabel=xcol)
            report["artifacts"].append(fname)
    report["checks"] = [c.to_dict() for c in outcome.checks]
    report["metrics"] = outcome.metrics
    ok = all(c.passed for c in outcome.checks)
    report.update(status="pass" if ok else "fail", exit_code=EXIT_OK if ok else EXIT_INVALID)
    return _finish(out_dir, report)


def _finish(out_dir, report):
    report["artifacts"].append("report.json")
    (out_dir / "report.json").write_text(json.dumps(_json_safe(report), indent=2) + "\n")
    return report["exit_code"]


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


SHORTCUTS = {"lam": "gains.lambda", "mu": "gains.mu", "e0": "initial.e0",
             "t_end": "integrator.t_end"}


def _common(p):
    p.add_argument("--scenario", choices=sorted(SCENARIOS), help="scenario name")
    p.add_argument("--config", help="INI file layered over the scenario defaults")
    p.add_argument("--defaults", action="store_true",
                   help="use the bundled defaults only (no --config)")
    p.add_argument("--out", default="runs", help="output directory (default: runs)")
    p.add_argument("--seed", type=int, default=0, help="seed for random references")
    p.add_argument("--fixed-step", action="store_true",
                   help="use fixed-step RK4 at the configured dt (deterministic mode)")
    p.add_argument("--set", dest="sets", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--lambda", dest="lam", type=float, help="shortcut for gains.lambda")
    p.add_argument("--mu", type=float, help="shortcut for gains.mu")
    p.add_argument("--e0", type=float, help="shortcut for initial.e0")
    p.add_argument("--t-end", dest="t_end", type=float, help="shortcut for integrator.t_end")
    p.add_argument("--no-svg", action="store_true", help="skip SVG plots")


def build_parser():
    parser = _Parser(prog="flatneuro",
                     description="Flatness-based control scenarios for neural mass models "
                                 "and a two-link arm.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run one scenario")
    _common(run)
    sweep = sub.add_parser("sweep", help="run a scenario for several values of one key")
    _common(sweep)
    sweep.add_argument("--param", required=True, metavar="SECTION.KEY",
                       help="config key to vary")
    sweep.add_argument("--values", required=True,
                       help="comma-separated values, e.g. 0.5,1,2,4")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sub.add_parser("list-scenarios", help="list scenario names")
    return parser


def _overrides(args):
    out = []
    for item in args.sets:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        out.append((key.strip(), value.strip()))
    for attr, key in SHORTCUTS.items():
        value = getattr(args, attr)
        if value is not None:
            out.append((key, repr(value)))
    return out


def resolve(args):
    if args.defaults and args.config:
        raise ConfigurationError("--defaults and --config are mutually exclusive")
    cfg = load_config(args.config, args.scenario, _overrides(args))
    if args.fixed_step:
        cfg = cfg.override("integrator.method", Method.RK4_FIXED.value)
    return cfg


def _sweep_point(item):
    cfg, out_dir, seed, svg = item
    return run_scenario(cfg, out_dir, seed, svg)


def sweep(cfg, param, values, out_root, seed=0, svg=True, jobs=1) -> int:
    """One run per value under ``out_root/<param>=<value>`` plus ``aggregate.csv``."""
    out_root = Path(out_root)
    points = [(cfg.override(param, v), out_root / f"{param}={v}", seed, svg) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_sweep_point, points))
    else:
        codes = [_sweep_point(pt) for pt in points]
    reports = [json.loads((pt[1] / "report.json").read_text()) for pt in points]
    check_names = sorted({c["name"] for r in reports for c in r["checks"]})
    metric_names = sorted({k for r in reports for k in r["metrics"]})
    header = ["param", "value", "status", "exit_code"] + check_names + metric_names
    rows = []
    for v, r in zip(values, reports):
        checks = {c["name"]: c["value"] for c in r["checks"]}
        rows.append([param, v, r["status"], r["exit_code"]]
                    + [checks.get(n, "") for n in check_names]
                    + [r["metrics"].get(n, "") for n in metric_names])
    out_root.mkdir(parents=True, exist_ok=True)
    write_csv(out_root / "aggregate.csv", header, rows)
    return max(codes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, what in SCENARIOS.items():
            print(f"{name:16s} {what}")
        return EXIT_OK
    try:
        cfg = resolve(args)
        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            if not values:
                raise ConfigurationError("--values is empty")
            cfg.override(args.param, values[0])  # validate the key before running
            code = sweep(cfg, args.param, values, Path(args.out), args.seed,
                         not args.no_svg, args.jobs)
            print(f"sweep of {args.param} over {len(values)} values: exit {code}; "
                  f"aggregate in {Path(args.out) / 'aggregate.csv'}")
            return code
    except ConfigurationError as exc:
        print(f"flatneuro: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    code = run_scenario(cfg, args.out, args.seed, not args.no_svg)
    report = json.loads((Path(args.out) / "report.json").read_text())
    _print_report(report)
    return code


def _print_report(report):
    print(f"scenario {report['scenario']}: {report['status']} (exit {report['exit_code']})")
    for c in report["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        value = c["value"] if isinstance(c["value"], str) else f"{c['value']:.3g}"
        print(f"  {mark} {c['name']}: {value} {c['relation']} {c['limit']:.3g}"
              f"  [{c['exercises']}]")
    for k, v in report["metrics"].items():
        print(f"  {k} = {v}")
    if "error" in report:
        print(f"  error: {report['error']['type']}: {report['error']['message']}")


if __name__ == "__main__":
    sys.exit(main())
