"""``qcosym <command> --config <file> [--out <dir>] [--svg]``.

Exit status: 0 on success, 1 when ``validate`` finds a failing check, 2 on
configuration or runtime errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fastslow as fs
from .config import COMMANDS, CliConfig, ConfigParseError, ConfigValidationError, StructureConfig, load_config
from .geometry import (ScalarField, TwoFormField, QCosymplecticStructure, poisson_bracket, sample_points,
                       standard_structure, validate_structure, wedge)
from .svg import line_plot

FULL_HEADER = ("s", "t", "tau", "q", "p", "Q", "P", "I", "J", "H")
AVERAGED_HEADER = ("s", "tau", "Q", "P", "I")


def format_rows(header, rows, precision: int) -> str:
    fmt = f".{precision}g"
    lines = [",".join(header)]
    lines.extend(",".join(format(float(v), fmt) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: Path, header, rows, precision: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_rows(header, rows, precision))


def full_rows(traj):
    m = traj.monitors
    return np.column_stack([traj.times, traj.states, m["I"], m["J"], m["H"]])


def averaged_rows(traj):
    return np.column_stack([traj.times, traj.states, traj.monitors["I"]])


def build_named_structure(cfg: StructureConfig) -> QCosymplecticStructure:
    if cfg.structure == "fast-slow":
        return fs.build_structure()
    if cfg.structure == "non-closed-example":
        # dq^dp + z dq^dp on (q, p, z): the 2-form is not closed
        base = standard_structure(1, 1)
        return QCosymplecticStructure(base.chart, TwoFormField(lambda x: (1.0 + x[2]) * wedge([1, 0, 0], [0, 1, 0])),
                                      base.lambdas)
    return standard_structure(cfg.n, cfg.q)


def named_functions(s: QCosymplecticStructure, cfg: StructureConfig) -> dict[str, ScalarField]:
    funcs = {name: ScalarField.coordinate(i, s.dim) for i, name in enumerate(s.chart.names)}
    if cfg.structure == "fast-slow":
        model = fs.case_b_model(cfg.eps)
        funcs["H"] = fs.hamiltonian(model)
        funcs["J"] = fs.momentum_map_case_b(model)
    return funcs


def _print_table(rows, header, stream):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    stream.write("  ".join(str(h).ljust(w) for h, w in zip(header, widths)) + "\n")
    for r in rows:
        stream.write("  ".join(str(v).ljust(w) for v, w in zip(r, widths)) + "\n")


def _structure_points(s, cfg: StructureConfig):
    lo, hi = cfg.box
    if cfg.structure == "non-closed-example":
        # keep clear of z = -1 where the form degenerates
        lo, hi = max(lo, -0.5), max(hi, 0.5)
    return sample_points(s.dim, cfg.points, cfg.seed, (lo, hi))


def cmd_validate(cfg: CliConfig, out_dir: Path) -> int:
    sc = cfg.scenario
    s = build_named_structure(sc)
    report = validate_structure(s, _structure_points(s, sc))
    doc = {"structure": sc.structure, "n": s.chart.n, "q": s.chart.q, **report.to_dict()}
    json.dump(doc, sys.stdout, allow_nan=False)
    sys.stdout.write("\n")
    rows = [(name, "pass" if report.check_passed(name) else "FAIL",
             f"{max(p.checks[name].value for p in report.points):.3g}") for name in report.points[0].checks]
    _print_table(rows, ("check", "result", "max value"), sys.stderr)
    return 0 if report.passed else 1


def cmd_brackets(cfg: CliConfig, out_dir: Path) -> int:
    sc = cfg.scenario
    s = build_named_structure(sc)
    funcs = named_functions(s, sc)
    pairs = sc.pairs or tuple((s.chart.names[i], s.chart.names[s.chart.n + i]) for i in range(s.chart.n))
    for f, g in pairs:
        for name in (f, g):
            if name not in funcs:
                raise ConfigValidationError("scenario.pairs", f"unknown function {name!r}")
    pts = _structure_points(s, sc)
    rows = []
    for f, g in pairs:
        vals = [poisson_bracket(s, funcs[f], funcs[g], x) for x in pts]
        rows.append((f"{{{f},{g}}}", f"{np.min(vals):.12g}", f"{np.max(vals):.12g}", len(vals)))
    _print_table(rows, ("bracket", "min", "max", "points"), sys.stdout)
    return 0


def _svg(out_dir: Path, name: str, x, series):
    line_plot(out_dir / name, x, series)


def cmd_simulate(cfg: CliConfig, out_dir: Path, averaged: bool = False) -> int:
    sc = cfg.scenario
    prec = cfg.output.csv_precision
    if averaged or sc.case == "case-b-averaged":
        traj, diag = fs.run_averaged(sc)
        write_csv(out_dir / "trajectory.csv", AVERAGED_HEADER, averaged_rows(traj), prec)
        if cfg.output.svg:
            _svg(out_dir, "trajectory.svg", traj.times, {"Q": traj.states[:, 1], "P": traj.states[:, 2]})
    else:
        traj, diag = fs.run_scenario(sc)
        write_csv(out_dir / "trajectory.csv", FULL_HEADER, full_rows(traj), prec)
        if cfg.output.svg:
            _svg(out_dir, "trajectory.svg", traj.times,
                 {"q": traj.states[:, fs.Q_FAST], "Q": traj.states[:, fs.Q_SLOW],
                  "P": traj.states[:, fs.P_SLOW], "I": traj.monitors["I"]})
    json.dump({"case": sc.case, "rows": len(traj), **diag.to_dict()}, sys.stdout, allow_nan=False)
    sys.stdout.write("\n")
    return 0


def cmd_compare(cfg: CliConfig, out_dir: Path) -> int:
    sc = cfg.scenario
    prec = cfg.output.csv_precision
    report = fs.compare_full_vs_averaged(sc)
    full, avg = report.trajectories[sc.eps]
    write_csv(out_dir / "trajectory_full.csv", FULL_HEADER, full_rows(full), prec)
    write_csv(out_dir / "trajectory_averaged.csv", AVERAGED_HEADER, averaged_rows(avg), prec)
    dev = np.column_stack([full.times, np.abs(full.states[:, fs.Q_SLOW] - avg.states[:, 1]),
                           np.abs(full.states[:, fs.P_SLOW] - avg.states[:, 2])])
    write_csv(out_dir / "deviation.csv", ("s", "dQ", "dP"), dev, prec)
    if cfg.output.svg:
        _svg(out_dir, "deviation.svg", dev[:, 0], {"|dQ|": dev[:, 1], "|dP|": dev[:, 2]})
    json.dump(report.to_dict(), sys.stdout, allow_nan=False)
    sys.stdout.write("\n")
    return 0


def execute(cfg: CliConfig) -> int:
    out_dir = Path(cfg.output.dir)
    if cfg.command in ("simulate", "average", "compare"):
        out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.command == "validate":
        return cmd_validate(cfg, out_dir)
    if cfg.command == "brackets":
        return cmd_brackets(cfg, out_dir)
    if cfg.command == "simulate":
        return cmd_simulate(cfg, out_dir)
    if cfg.command == "average":
        return cmd_simulate(cfg, out_dir, averaged=True)
    return cmd_compare(cfg, out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcosym", description="q-cosymplectic mechanics scenarios")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    parser.add_argument("--svg", action="store_true", help="also write SVG line plots")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"qcosym: cannot read config: {exc}", file=sys.stderr)
        return 2
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"qcosym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if cfg.command != args.command:
        print(f"qcosym: config declares command {cfg.command!r}, not {args.command!r}", file=sys.stderr)
        return 2
    output = cfg.output
    if args.out is not None:
        output = replace(output, dir=args.out)
    if args.svg:
        output = replace(output, svg=True)
    cfg = replace(cfg, output=output)
    try:
        return execute(cfg)
    except OSError as exc:
        print(f"qcosym: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"qcosym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
