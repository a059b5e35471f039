"""Grid execution: expand a config into runs, execute them (optionally in a
process pool), and write traces, summaries, a manifest and plots."""

from __future__ import annotations

import csv
import io
import json
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..diagnostics import audit_report, fit_rate
from ..errors import ConfigError, ContractViolation, RegimeWarning
from ..mnist import load_mnist_idx, mnist_pca_instance
from ..oracles import ErrorSchedule
from ..plotting import emit_plot
from ..problems import McProblem, PcaProblem, SphereRayleigh, gen_mc_instance, gen_pca_instance
from ..schedules import ArmijoBacktracking, CappedConstant, Constant, Diminishing, StopRule
from ..solvers import Termination, run_irgd, run_irgdr, run_reg, run_rgd, run_rsam
from ..tracefile import write_trace
from .config import output_root

PARAM_NAME = {"irgd": "nu", "irgdr": "nu", "rsam": "rho", "reg": "rho", "rgd": None}
DISPLAY = {"rgd": "RGD", "irgd": "IRGD", "irgdr": "IRGDr", "rsam": "RSAM", "reg": "REG"}


@dataclass(frozen=True)
class Cell:
    index: int
    size: tuple
    seed: int
    algorithm: str
    step: str
    param: float | None

    @property
    def size_label(self):
        return "x".join(str(d) for d in self.size)

    @property
    def label(self):
        name = PARAM_NAME[self.algorithm]
        tail = f" {name}={self.param:g}" if name else ""
        return f"{DISPLAY[self.algorithm]} {self.step}{tail}"


@dataclass(frozen=True)
class RunSummary:
    run: int
    config_digest: str
    size: str
    seed: int
    algorithm: str
    step: str
    param: str
    iterations: int
    reason: str
    wall_s: float
    final_f: float
    final_gradnorm: float
    evals: int
    audit: str
    rate_model: str
    rate_q: float
    rate_linear_r2: float
    rate_exponent: float
    rate_power_r2: float
    warnings: int


SUMMARY_FIELDS = tuple(RunSummary.__dataclass_fields__)


def expand_grid(cfg):
    cells = []
    for size in cfg.sizes:
        for seed in cfg.seeds:
            for algorithm in cfg.algorithms:
                name = PARAM_NAME[algorithm]
                params = getattr(cfg, name) if name else (None,)
                for step in cfg.steps:
                    for param in params:
                        cells.append(Cell(len(cells), size, seed, algorithm, step, param))
    return cells


_MNIST_CACHE = {}


def build_problem(cfg, size, seed):
    """Problem instance and starting point for one (size, seed) grid cell."""
    opts = cfg.problem
    L = opts["lipschitz"]
    if cfg.kind == "mc":
        problem = McProblem(gen_mc_instance(*size, mask_prob=opts["mask_prob"], seed=seed), L)
    elif cfg.kind == "pca":
        problem = PcaProblem(gen_pca_instance(*size, seed=seed), L)
    elif cfg.kind == "sphere":
        if opts["eigs"] is not None:
            if len(opts["eigs"]) != size[0]:
                raise ConfigError(f"sphere size {size[0]} does not match {len(opts['eigs'])} eigs")
            H = np.diag(opts["eigs"])
        else:
            H = gen_pca_instance(size[0], 1, seed=seed).H
        problem = SphereRayleigh(H, L)
    else:
        path = opts["path"]
        if path not in _MNIST_CACHE:
            _MNIST_CACHE[path] = load_mnist_idx(path)
        data, manifest = _MNIST_CACHE[path]
        problem = PcaProblem(mnist_pca_instance(data, size[0], opts["subsample"], seed, manifest), L)
    x0 = problem.manifold.random_point(np.random.default_rng([seed, 1]))
    return problem, x0


def build_steps(cfg, cell, L):
    s = cfg.solver
    if cell.step == "diminishing":
        return Diminishing(s["alpha"])
    if cell.step == "armijo":
        return ArmijoBacktracking(s["armijo_t0"], s["armijo_contraction"],
                                  s["armijo_sufficient_decrease"], s["armijo_max_backtracks"])
    if cell.step == "constant":
        return Constant(s["t"])
    if cell.algorithm == "irgdr":
        nu = cell.param
    elif cell.algorithm == "reg":
        nu = s["nu_reg"] if s["nu_reg"] is not None else L * cell.param
    else:
        nu = 0.0
    return CappedConstant(nu, s["delta"], L)


def _rho(cfg, value):
    decay = cfg.solver["rho_decay"]
    return ErrorSchedule.power_decay(value, decay) if decay else ErrorSchedule.constant(value)


def execute(cfg, cell):
    """Run one grid cell; returns (trace, dataset manifest)."""
    s = cfg.solver
    try:
        problem, x0 = build_problem(cfg, cell.size, cell.seed)
        L = problem.lipschitz
        steps = build_steps(cfg, cell, L)
        stop = StopRule(s["grad_tol"], s["max_iters"], s["max_wall_seconds"])
        rng = np.random.default_rng([cfg.master_seed, cell.index])
        a = cell.algorithm
        if a == "rgd":
            trace = run_rgd(problem, x0, steps, stop, cfg.audit)
        elif a == "irgd":
            errors = ErrorSchedule.power_decay(cell.param, s["p"])
            trace = run_irgd(problem, x0, steps, errors, stop, rng, audit=cfg.audit)
        elif a == "irgdr":
            trace = run_irgdr(problem, x0, steps, cell.param, stop, rng, audit=cfg.audit)
        elif a == "rsam":
            trace = run_rsam(problem, x0, _rho(cfg, cell.param), steps, stop, audit=cfg.audit)
        else:
            trace = run_reg(problem, x0, _rho(cfg, cell.param), steps, stop,
                            nu=s["nu_reg"], audit=cfg.audit)
    except ContractViolation as exc:
        raise ConfigError(f"run {cell.index} ({cell.label}, size {cell.size_label}, "
                          f"seed {cell.seed}): {exc}") from None
    manifest = getattr(getattr(problem, "inst", None), "manifest", None)
    return trace, problem, manifest


def run_cell(cfg, cell):
    # Regime warnings are kept on the trace and written to the manifest.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        trace, problem, manifest = execute(cfg, cell)
    rate = fit_rate(trace)
    audit = audit_report(trace, problem) if cfg.audit else None
    last = trace.final
    summary = RunSummary(
        run=cell.index, config_digest=cfg.digest, size=cell.size_label, seed=cell.seed,
        algorithm=cell.algorithm, step=cell.step,
        param="" if cell.param is None else repr(cell.param),
        iterations=trace.iterations, reason=trace.reason.value,
        wall_s=last.wall_s if cfg.timing else 0.0,
        final_f=last.f, final_gradnorm=last.gradnorm, evals=last.evals,
        audit=audit.status if audit else "UNAVAILABLE",
        rate_model=rate.preferred, rate_q=rate.q, rate_linear_r2=rate.linear_r2,
        rate_exponent=rate.exponent, rate_power_r2=rate.power_r2,
        warnings=len(trace.warnings),
    )
    entry = {
        "run": cell.index, "label": cell.label, "size": cell.size_label, "seed": cell.seed,
        "algorithm": cell.algorithm, "step": cell.step, "param": cell.param,
        "L": problem.lipschitz, "reason": trace.reason.value, "warnings": list(trace.warnings),
        "flag_count": len(trace.flags), "flags": trace.flags[:10],
        "dataset": asdict(manifest) if manifest is not None else None,
    }
    if audit is not None:
        entry["audit"] = {k: v for k, v in asdict(audit).items()}
    trace.x = None
    return summary, trace, entry


def _run_star(args):
    return run_cell(*args)


def _csv_row(summary):
    out = []
    for name in SUMMARY_FIELDS:
        v = getattr(summary, name)
        out.append(repr(v) if isinstance(v, float) else v)
    return out


def summary_csv_text(summaries):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    w.writerows(_csv_row(s) for s in summaries)
    return buf.getvalue()


def summary_table_text(cfg, cells, summaries):
    """Iteration/time table: rows are solver x step x parameter, columns are
    sizes, entries are medians over seeds (``*`` marks cells where some run
    stopped before reaching grad_tol)."""
    rows, cols = {}, []
    for cell, s in zip(cells, summaries):
        key = (cell.algorithm, cell.step, cell.param)
        rows.setdefault(key, {}).setdefault(cell.size_label, []).append(s)
        if cell.size_label not in cols:
            cols.append(cell.size_label)
    head = f"{'solver':<8} {'step':<12} {'param':>8}"
    lines = [f"{cfg.name}: {cfg.kind} problem, median over seeds "
             f"{', '.join(str(x) for x in cfg.seeds)}", ""]
    lines.append(head + "".join(f" | {c:^19}" for c in cols))
    lines.append(" " * len(head) + "".join(f" | {'Iter':>8} {'Time':>10}" for _ in cols))
    lines.append("-" * len(lines[-1]))
    for (alg, step, param), by_size in rows.items():
        line = f"{DISPLAY[alg]:<8} {step:<12} {('-' if param is None else f'{param:g}'):>8}"
        for c in cols:
            runs = by_size.get(c, [])
            if not runs:
                line += f" | {'':>8} {'':>10}"
                continue
            it = statistics.median(r.iterations for r in runs)
            mark = "*" if any(r.reason != Termination.GRAD_TOL.value for r in runs) else ""
            tm = f"{statistics.median(r.wall_s for r in runs):.3f}" if cfg.timing else "-"
            line += f" | {f'{it:g}{mark}':>8} {tm:>10}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def resolve_output(cfg, override=None):
    out = Path(override) if override is not None else cfg.output
    return out if out.is_absolute() else output_root() / out


def run_experiment(cfg, outdir=None, workers=None):
    """Execute the grid and write all artifacts; returns the run summaries.

    Results are merged by run index, so the worker count never changes the
    output files.
    """
    cells = expand_grid(cfg)
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg, c) for c in cells]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_star, jobs))
    else:
        results = [_run_star(j) for j in jobs]
    summaries = [r[0] for r in results]
    if outdir is not False:
        write_artifacts(cfg, cells, results, resolve_output(cfg, outdir))
    return summaries


def _write(path, text):
    try:
        path.write_text(text, newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_artifacts(cfg, cells, results, outdir):
    outdir = Path(outdir)
    try:
        for sub in ("traces", "plots"):
            (outdir / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc.strerror}") from exc
    summaries = [r[0] for r in results]
    groups = {}
    for cell, (_, trace, _) in zip(cells, results):
        path = outdir / "traces" / f"run_{cell.index:04d}.csv"
        try:
            write_trace(trace, path, timing=cfg.timing)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
        groups.setdefault((cell.size_label, cell.seed), []).append((cell, trace))
    for (size, seed), members in groups.items():
        path = outdir / "plots" / f"{size}_seed{seed}.svg"
        try:
            emit_plot([t for _, t in members], path, [c.label for c, _ in members],
                      title=f"gradient norm, {cfg.kind} {size}, seed {seed}")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    _write(outdir / "summary.csv", summary_csv_text(summaries))
    _write(outdir / "summary.txt", summary_table_text(cfg, cells, summaries))
    manifest = {
        "name": cfg.name, "kind": cfg.kind, "config_digest": cfg.digest,
        "master_seed": cfg.master_seed, "audit": cfg.audit, "timing": cfg.timing,
        "runs": [r[2] for r in results],
    }
    _write(outdir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return outdir
