"""Command-line entry point.

Exit codes: 0 success, 1 config error, 2 runtime/solver error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

import numpy as np

from .bench.config import OUTPUT_ROOT_ENV, load_config, output_root
from .bench.experiment import build_problem, build_steps, expand_grid, run_experiment
from .diagnostics import audit_report, fit_rate
from .errors import ConfigError, IdxParseError, TraceFormatError
from .mnist import write_idx_images
from .plotting import emit_plot
from .problems import SphereRayleigh
from .schedules import Diminishing
from .solvers import run_rgd
from .tracefile import read_trace, write_trace

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("irgd")

# Two 2x2 images; pixel values chosen to cover 0, 255 and a few interior levels.
FIXTURE_IMAGES = np.array([[[0, 255], [128, 64]], [[1, 2], [3, 4]]], dtype=np.uint8)


def _cmd_run(args):
    cfg = load_config(args.config)
    summaries = run_experiment(cfg, outdir=args.out, workers=args.workers)
    out = Path(args.out) if args.out else cfg.output
    if not out.is_absolute():
        out = output_root() / out
    done = sum(s.reason == "GradTol" for s in summaries)
    print(f"{len(summaries)} runs ({done} reached grad_tol); artifacts in {out}")
    return EXIT_OK


def _run_index(trace_path):
    m = re.fullmatch(r"run_(\d+)", Path(trace_path).stem)
    if not m:
        raise ConfigError(f"cannot tell the run index from {trace_path}; expected run_NNNN.csv")
    return int(m.group(1))


def _cmd_audit(args):
    cfg = load_config(args.config)
    trace = read_trace(args.trace)
    cells = expand_grid(cfg)
    idx = _run_index(args.trace)
    if idx >= len(cells):
        raise ConfigError(f"run {idx} is outside the grid of {len(cells)} runs")
    cell = cells[idx]
    problem, _ = build_problem(cfg, cell.size, cell.seed)
    rep = audit_report(trace, problem, {"L": problem.lipschitz,
                                        "steps": build_steps(cfg, cell, problem.lipschitz)})
    print(f"run {idx}: {cell.label}, size {cell.size_label}, seed {cell.seed}")
    print(f"status: {rep.status}")
    if rep.available:
        print(f"descent ({rep.descent_rule}): {rep.descent_violations} violations / {rep.descent_checked} checked")
        print(f"oracle bound: {rep.bound_violations} violations / {rep.bound_checked} checked")
        print(f"two-sided bound: {rep.two_sided_violations} violations / {rep.two_sided_checked} checked")
        for d in rep.details:
            print(f"  {d}")
    else:
        print("no audit columns in this trace (run with audit = true)")
    return EXIT_OK


def _cmd_rate(args):
    rep = fit_rate(read_trace(args.trace))
    print(f"points: {rep.n_points}")
    print(f"preferred: {rep.preferred}")
    print(f"linear: Q={rep.q:.6g} R2={rep.linear_r2:.6g}")
    print(f"power: exponent={rep.exponent:.6g} R2={rep.power_r2:.6g}")
    return EXIT_OK


def _cmd_plot(args):
    traces = [read_trace(p) for p in args.traces]
    emit_plot(traces, args.out, [Path(p).stem for p in args.traces])
    print(f"wrote {args.out}")
    return EXIT_OK


def golden_trace():
    """Fixed-seed reference run used for the committed golden files."""
    problem = SphereRayleigh([3.0, 1.0, 1.0])
    x0 = problem.manifold.random_point(np.random.default_rng([0, 1]))
    return run_rgd(problem, x0, Diminishing(0.75))


def gen_fixtures(directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    good = d / "mnist-2x2.idx3-ubyte"
    write_idx_images(good, FIXTURE_IMAGES)
    blob = good.read_bytes()
    (d / "bad-magic.idx3-ubyte").write_bytes(b"\x00\x00\x08\x01" + blob[4:])
    (d / "truncated.idx3-ubyte").write_bytes(blob[:-3])
    trace = golden_trace()
    write_trace(trace, d / "golden-trace.csv")
    emit_plot([trace], d / "golden-plot.svg", ["RGD diminishing"])
    return sorted(p.name for p in d.iterdir() if p.is_file())


def _cmd_gen_fixtures(args):
    d = Path(args.dir) if args.dir else output_root() / "fixtures"
    for name in gen_fixtures(d):
        print(d / name)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="irgd",
        description="Inexact Riemannian gradient descent benchmarks.",
        epilog=f"Relative output paths resolve against ${OUTPUT_ROOT_ENV} (default: cwd).",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log regime warnings")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment grid")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [experiment] output)")
    r.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    r.set_defaults(func=_cmd_run)
    a = sub.add_parser("audit", help="audit a trace against its config")
    a.add_argument("trace")
    a.add_argument("config")
    a.set_defaults(func=_cmd_audit)
    t = sub.add_parser("rate", help="fit linear and power-law rates to a trace")
    t.add_argument("trace")
    t.set_defaults(func=_cmd_rate)
    pl = sub.add_parser("plot", help="plot gradient norms of one or more traces")
    pl.add_argument("traces", nargs="+")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=_cmd_plot)
    g = sub.add_parser("gen-fixtures", help="write the IDX fixtures and golden files")
    g.add_argument("--dir", help=f"target directory (default: ${OUTPUT_ROOT_ENV}/fixtures)")
    g.set_defaults(func=_cmd_gen_fixtures)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IdxParseError, TraceFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # solver/runtime failures
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
