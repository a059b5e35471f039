"""Experiment configuration: an INI file with one section per concern.

    [experiment]  name, seed (master seed for noise streams), audit, timing,
                  workers, output
    [problem]     kind = mc | pca | sphere | mnist, plus kind-specific keys
    [solver]      alpha, p, delta, rho_decay, t, grad_tol, max_iters,
                  max_wall_seconds, armijo_* keys
    [grid]        sizes, seeds, algorithms, steps, nu, rho

Lists are comma separated. A size is written ``20x20x8`` for mc (m x n x k),
``20x10`` for pca (n x p), ``3`` for sphere (n) and ``10`` for mnist (p).
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError

ALGORITHMS = ("rgd", "irgd", "irgdr", "rsam", "reg")
STEPS = ("diminishing", "armijo", "capped", "constant")
KINDS = ("mc", "pca", "sphere", "mnist")
OUTPUT_ROOT_ENV = "IRGD_OUTPUT_ROOT"

_KEYS = {
    "experiment": {"name", "seed", "audit", "timing", "workers", "output"},
    "problem": {"kind", "mask_prob", "eigs", "path", "subsample", "lipschitz"},
    "solver": {"alpha", "p", "delta", "rho_decay", "t", "nu_reg", "grad_tol", "max_iters",
               "max_wall_seconds", "armijo_t0", "armijo_contraction",
               "armijo_sufficient_decrease", "armijo_max_backtracks"},
    "grid": {"sizes", "seeds", "algorithms", "steps", "nu", "rho"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    sizes: tuple
    seeds: tuple
    algorithms: tuple
    steps: tuple
    nu: tuple = ()
    rho: tuple = ()
    master_seed: int = 0
    audit: bool = True
    timing: bool = False
    workers: int = 1
    output: Path = Path("results")
    problem: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    digest: str = ""
    source: str = ""


def _list(raw, key, conv):
    items = [s.strip() for s in raw.split(",")]
    items = [s for s in items if s]
    if not items:
        raise ConfigError(f"grid axis {key!r} is empty")
    try:
        return tuple(conv(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"grid axis {key!r}: {exc}") from None


def _size(kind):
    def conv(s):
        dims = tuple(int(d) for d in s.lower().split("x"))
        want = {"mc": 3, "pca": 2, "sphere": 1, "mnist": 1}[kind]
        if len(dims) != want or min(dims) < 1:
            raise ValueError(f"size {s!r} needs {want} positive dimension(s) for kind {kind}")
        return dims
    return conv


def _get(section, key, conv, default):
    if key not in section or section[key].strip() == "":
        return default
    try:
        return conv(section[key])
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# Keys that change where or how fast a grid runs but not what it computes.
_UNDIGESTED = {("experiment", "workers"), ("experiment", "output")}


def canonical_text(cp):
    """Section/key sorted rendering used for the config digest."""
    lines = []
    for name in sorted(cp.sections()):
        lines.append(f"[{name}]")
        for key in sorted(cp[name]):
            if (name, key) in _UNDIGESTED:
                continue
            lines.append(f"{key}={' '.join(cp[name][key].split())}")
    return "\n".join(lines) + "\n"


def output_root():
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "."))


def parse_config(text, source="<string>"):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    for name in cp.sections():
        if name not in _KEYS:
            raise ConfigError(f"{source}: unknown section [{name}]")
        unknown = set(cp[name]) - _KEYS[name]
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    for name in ("problem", "grid"):
        if name not in cp:
            raise ConfigError(f"{source}: missing section [{name}]")
    exp = cp["experiment"] if "experiment" in cp else cp["DEFAULT"]
    prob, grid = cp["problem"], cp["grid"]
    solver = cp["solver"] if "solver" in cp else cp["DEFAULT"]

    kind = prob.get("kind", "").strip()
    if kind not in KINDS:
        raise ConfigError(f"{source}: [problem] kind must be one of {', '.join(KINDS)}, got {kind!r}")
    for key in ("sizes", "seeds", "algorithms", "steps"):
        if key not in grid:
            raise ConfigError(f"{source}: [grid] is missing {key!r}")
    sizes = _list(grid["sizes"], "sizes", _size(kind))
    seeds = _list(grid["seeds"], "seeds", int)
    algorithms = _list(grid["algorithms"], "algorithms", str.lower)
    steps = _list(grid["steps"], "steps", str.lower)
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ConfigError(f"{source}: unknown algorithm {a!r}")
    for s in steps:
        if s not in STEPS:
            raise ConfigError(f"{source}: unknown step rule {s!r}")
    nu = _list(grid["nu"], "nu", float) if "nu" in grid else ()
    rho = _list(grid["rho"], "rho", float) if "rho" in grid else ()
    if {"irgd", "irgdr"} & set(algorithms) and not nu:
        raise ConfigError(f"{source}: algorithms irgd/irgdr need a [grid] nu axis")
    if {"rsam", "reg"} & set(algorithms) and not rho:
        raise ConfigError(f"{source}: algorithms rsam/reg need a [grid] rho axis")
    if any(v < 0 for v in nu + rho):
        raise ConfigError(f"{source}: nu and rho values must be nonnegative")

    problem = {
        "mask_prob": _get(prob, "mask_prob", float, 0.5),
        "eigs": _get(prob, "eigs", lambda s: _list(s, "eigs", float), None),
        "path": _get(prob, "path", str.strip, None),
        "subsample": _get(prob, "subsample", int, 1000),
        "lipschitz": _get(prob, "lipschitz", float, None),
    }
    if kind == "mnist" and not problem["path"]:
        raise ConfigError(f"{source}: kind mnist needs [problem] path")
    solver_opts = {
        "alpha": _get(solver, "alpha", float, 0.5),
        "p": _get(solver, "p", float, 2.1),
        "delta": _get(solver, "delta", float, 0.1),
        "rho_decay": _get(solver, "rho_decay", float, 0.0),
        "t": _get(solver, "t", float, None),
        "nu_reg": _get(solver, "nu_reg", float, None),
        "grad_tol": _get(solver, "grad_tol", float, 1e-6),
        "max_iters": _get(solver, "max_iters", int, 10000),
        "max_wall_seconds": _get(solver, "max_wall_seconds", float, None),
        "armijo_t0": _get(solver, "armijo_t0", float, 1.0),
        "armijo_contraction": _get(solver, "armijo_contraction", float, 0.5),
        "armijo_sufficient_decrease": _get(solver, "armijo_sufficient_decrease", float, 1e-4),
        "armijo_max_backtracks": _get(solver, "armijo_max_backtracks", int, 50),
    }
    if "constant" in steps and solver_opts["t"] is None:
        raise ConfigError(f"{source}: step rule 'constant' needs [solver] t")
    if not 0 < solver_opts["alpha"] < 1:
        raise ConfigError(f"{source}: [solver] alpha must lie in (0, 1)")
    if solver_opts["rho_decay"] != 0 and solver_opts["rho_decay"] < 1:
        raise ConfigError(f"{source}: [solver] rho_decay must be 0 or >= 1")
    if solver_opts["p"] < 1:
        raise ConfigError(f"{source}: [solver] p must be >= 1")

    workers = _get(exp, "workers", int, 1)
    if workers < 1:
        raise ConfigError(f"{source}: [experiment] workers must be >= 1")
    name = _get(exp, "name", str.strip, "experiment")
    out = Path(_get(exp, "output", str.strip, name))
    return ExperimentConfig(
        name=name, kind=kind, sizes=sizes, seeds=seeds, algorithms=algorithms, steps=steps,
        nu=nu, rho=rho,
        master_seed=_get(exp, "seed", int, 0),
        audit=_get(exp, "audit", _bool, True),
        timing=_get(exp, "timing", _bool, False),
        workers=workers, output=out, problem=problem, solver=solver_opts,
        digest=hashlib.sha256(canonical_text(cp).encode()).hexdigest(),
        source=source,
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))
