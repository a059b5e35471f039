"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import functools
import time
from pathlib import Path

import numpy as np
import pytest

import refimpl
from conftest import ACCEPTANCE
from irgd import (
    ArmijoBacktracking,
    CappedConstant,
    Diminishing,
    ErrorSchedule,
    FixedRank,
    Grassmann,
    IdxParseError,
    McProblem,
    PcaProblem,
    Sphere,
    SphereRayleigh,
    Termination,
    additive_noise_oracle,
    audit_report,
    exact_oracle,
    extragrad_oracle,
    fit_rate,
    minimize,
    relative_noise_oracle,
    run_irgd,
    run_irgdr,
    run_reg,
    run_rgd,
    run_rsam,
    sam_oracle,
)
from irgd.bench import parse_config, run_experiment
from irgd.mnist import load_mnist_idx
from irgd.oracles import ExtragradOracle, SamOracle
from irgd.problems import gen_mc_instance, gen_pca_instance
from irgd.tracefile import trace_csv_text

DATA = Path(__file__).parent / "data"
DIAG311 = SphereRayleigh([3.0, 1.0, 1.0])
TRIALS = 1000


def criterion(num, title):
    """Run the body, record PASS/FAIL with its detail string, re-raise failures."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs) or "ok"
            except BaseException as exc:
                ACCEPTANCE[num] = (title, False, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
                raise
            ACCEPTANCE[num] = (title, True, detail)

        return run

    return wrap


def x0_for(problem, seed=0):
    return problem.manifold.random_point(np.random.default_rng([seed, 1]))


def _amb(M, v):
    return M.tangent_to_ambient(v)


@criterion(1, "manifold axioms")
def test_criterion_01_manifold_axioms():
    start = time.perf_counter()
    worst = {}
    hs = np.array([1e-2, 1e-3, 1e-4])
    for M in (Sphere(10), Grassmann(8, 3), FixedRank(10, 12, 3)):
        rng = np.random.default_rng(2024)
        feas = idem = tang = 0.0
        slope = np.inf
        for _ in range(TRIALS):
            x = M.random_point(rng)
            eta = M.random_tangent(x, rng)
            y = M.retract(x, eta)
            feas = max(feas, M.feasibility_residual(x), M.feasibility_residual(y))
            p = M.project(x, rng.standard_normal(M.ambient_shape))
            pp = M.project(x, _amb(M, p))
            idem = max(idem, np.linalg.norm(_amb(M, pp) - _amb(M, p)) / max(1.0, M.norm(x, p)))
            t = M.transport(x, eta, M.random_tangent(x, rng))
            tang = max(tang, np.linalg.norm(_amb(M, M.project_tangent(y, t)) - _amb(M, t)))
            u = M.random_unit_tangent(x, rng)
            base, d = M.to_ambient(x), _amb(M, u)
            errs = [np.linalg.norm(M.to_ambient(M.retract(x, h * u)) - (base + h * d)) for h in hs]
            slope = min(slope, refimpl.loglog_slope(hs, errs))
        assert feas <= 1e-10, (type(M).__name__, feas)
        assert idem <= 1e-12, (type(M).__name__, idem)
        assert tang <= 1e-10, (type(M).__name__, tang)
        assert slope >= 1.9, (type(M).__name__, slope)
        worst[type(M).__name__] = slope
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    return f"min slopes {', '.join(f'{k}={v:.3f}' for k, v in worst.items())}; {elapsed:.1f}s"


@criterion(2, "gradient finite differences")
def test_criterion_02_gradient_fd():
    start = time.perf_counter()
    problems = {
        "mc": McProblem(gen_mc_instance(20, 20, 8, seed=0)),
        "pca": PcaProblem(gen_pca_instance(20, 10, seed=0)),
        "sphere": SphereRayleigh(gen_pca_instance(10, 9, seed=0).H),
    }
    worst = {}
    for name, prob in problems.items():
        rng = np.random.default_rng(7)
        errs = []
        for _ in range(20):
            x = prob.manifold.random_point(rng)
            errs.append(refimpl.fd_relative_error(prob, x, prob.manifold.random_unit_tangent(x, rng)))
        worst[name] = max(errs)
        assert worst[name] <= 1e-5, (name, worst[name])
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    return f"max rel err {', '.join(f'{k}={v:.1e}' for k, v in worst.items())}; {elapsed:.1f}s"


@criterion(3, "oracle bound certification")
def test_criterion_03_oracle_bounds():
    start = time.perf_counter()
    prob = SphereRayleigh(gen_pca_instance(10, 9, seed=0).H)
    M, L = prob.manifold, prob.lipschitz
    rng = np.random.default_rng(11)
    sched = ErrorSchedule.power_decay(0.1, 2.1)
    nu = 0.4
    err = lambda x, out: M.norm(x, out.g - out.grad)
    slack = lambda x, out: 1e-12 * out.bound_value + 8 * np.finfo(float).eps * M.norm(x, out.grad)
    draws = {"exact": 0, "additive": 0, "relative": 0, "sam": 0, "extragrad": 0}
    for _ in range(TRIALS):
        x = M.random_point(rng)
        out = additive_noise_oracle(prob, x, 0, sched, rng)
        assert err(x, out) <= out.bound_value + slack(x, out)
        out = relative_noise_oracle(prob, x, nu, rng)
        gn, n = M.norm(x, out.grad), M.norm(x, out.g)
        assert err(x, out) <= nu * gn * (1 + 1e-12)
        assert (1 - nu) * gn * (1 - 1e-12) <= n <= (1 + nu) * gn * (1 + 1e-12)
        out = exact_oracle(prob, x)
        assert err(x, out) == 0.0
        out = sam_oracle(prob, x, 1e-2, lipschitz=L)
        assert err(x, out) <= out.bound_value * (1 + 1e-12)
        out = extragrad_oracle(prob, x, 0.5 / L, lipschitz=L, nu=0.5)
        assert err(x, out) <= 0.5 * M.norm(x, out.grad) * (1 + 1e-12)
        for k in draws:
            draws[k] += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    # The zeroth-order estimator is biased and declares no bound, so it has nothing to certify.
    return f"{TRIALS} draws x {len(draws)} oracles, 0 violations; {elapsed:.1f}s"


@criterion(4, "reduction identities")
def test_criterion_04_reductions():
    x0 = x0_for(DIAG311, 7)
    steps = Diminishing(0.75)
    rho = ErrorSchedule.power_decay(0.1, 1.5)
    same = lambda a, b: trace_csv_text(a) == trace_csv_text(b)
    assert same(run_rsam(DIAG311, x0, rho, steps), minimize(DIAG311, x0, SamOracle(DIAG311, rho), steps))
    assert same(run_reg(DIAG311, x0, 0.05, steps), minimize(DIAG311, x0, ExtragradOracle(DIAG311, 0.05), steps))
    rgd = run_rgd(DIAG311, x0, steps)
    zero = ErrorSchedule.power_decay(0.0, 2.1)
    assert same(run_irgd(DIAG311, x0, steps, zero, rng=np.random.default_rng(0)), rgd)
    assert same(run_irgdr(DIAG311, x0, steps, 0.0, rng=np.random.default_rng(0)), rgd)
    assert same(run_reg(DIAG311, x0, 0.0, steps), rgd)
    return "RSAM, REG vs generic loop; IRGD/IRGDr nu=0 and REG rho=0 vs RGD byte-identical"


@criterion(5, "descent audits")
def test_criterion_05_descent_audits():
    notes = []
    for name, prob in (("sphere", DIAG311), ("pca", PcaProblem(gen_pca_instance(20, 10, seed=0)))):
        tr = run_irgdr(prob, x0_for(prob), CappedConstant(0.5, 0.1, prob.lipschitz), 0.5,
                       rng=np.random.default_rng(1))
        rep = audit_report(tr, prob)
        assert rep.descent_rule == "capped-constant" and rep.descent_checked > 0
        assert rep.status == "PASS", rep.details
        notes.append(f"IRGDr {name} {rep.descent_checked} checks")
    cases = (("pca", PcaProblem(gen_pca_instance(20, 10, seed=0)), 0.75),
             ("mc", McProblem(gen_mc_instance(20, 20, 8, seed=0)), 0.1))
    for name, prob, alpha in cases:
        tr = run_irgd(prob, x0_for(prob), Diminishing(alpha), ErrorSchedule.power_decay(1e-3, 2.1),
                      rng=np.random.default_rng(2))
        rep = audit_report(tr, prob)
        assert rep.descent_rule == "descent-lemma" and rep.descent_checked > 0
        assert rep.status == "PASS", rep.details
        notes.append(f"IRGD {name} {rep.descent_checked} checks")
    return "0 violations (" + "; ".join(notes) + ")"


def _solve_all_five(prob, x0):
    steps = Diminishing(0.75)
    return {
        "RGD": run_rgd(prob, x0, steps),
        "IRGD": run_irgd(prob, x0, steps, ErrorSchedule.power_decay(1e-3, 2.1), rng=np.random.default_rng(0)),
        "IRGDr": run_irgdr(prob, x0, steps, 0.1, rng=np.random.default_rng(0)),
        "RSAM": run_rsam(prob, x0, ErrorSchedule.power_decay(0.1, 1.5), steps),
        "REG": run_reg(prob, x0, 0.05, steps),
    }


@criterion(6, "convergence targets")
def test_criterion_06_convergence():
    iters = {}
    for name, tr in _solve_all_five(DIAG311, x0_for(DIAG311)).items():
        assert tr.reason is Termination.GRAD_TOL and tr.iterations <= 10000, name
        assert tr.final.gradnorm < 1e-6 and abs(tr.final.f + 3.0) < 1e-5, name
        iters[name] = tr.iterations
    inst = gen_pca_instance(20, 10, seed=0)
    prob = PcaProblem(inst)
    target = -0.5 * refimpl.top_eig_sum(inst.H, 10)
    for name, tr in (("RGD", run_rgd(prob, x0_for(prob), Diminishing(0.75))),
                     ("REG", run_reg(prob, x0_for(prob), 1e-3, Diminishing(0.75)))):
        assert tr.final.gradnorm < 1e-6 and abs(tr.final.f - target) <= 1e-4, name
    prob = McProblem(gen_mc_instance(20, 20, 8, mask_prob=0.5, seed=0))
    tr = run_rgd(prob, x0_for(prob), ArmijoBacktracking(), audit=False)
    assert tr.reason is Termination.GRAD_TOL and tr.final.gradnorm < 1e-6
    return f"sphere iters {iters}; PCA at eig target; MC RGD-Armijo {tr.iterations} iters"


@criterion(7, "order-of-magnitude iteration counts")
def test_criterion_07_table_bands():
    start = time.perf_counter()
    mc, rgd, reg = [], [], []
    for seed in range(10):
        prob = McProblem(gen_mc_instance(20, 20, 8, seed=seed))
        tr = run_rgd(prob, x0_for(prob, seed), ArmijoBacktracking(), audit=False)
        assert tr.reason is Termination.GRAD_TOL
        mc.append(tr.iterations)
        prob = PcaProblem(gen_pca_instance(20, 10, seed=seed))
        rgd.append(run_rgd(prob, x0_for(prob, seed), Diminishing(0.75), audit=False).iterations)
        reg.append(run_reg(prob, x0_for(prob, seed), 1e-3, Diminishing(0.75), audit=False).iterations)
    m_mc, m_rgd, m_reg = np.median(mc), np.median(rgd), np.median(reg)
    assert 100 <= m_mc <= 2700
    assert 35 <= m_rgd <= 900
    assert m_reg <= 1.2 * m_rgd
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    return f"medians MC RGD-Armijo={m_mc:g}, PCA RGD={m_rgd:g}, PCA REG={m_reg:g}; {elapsed:.1f}s"


@criterion(8, "rate fitting")
def test_criterion_08_rate_fit():
    k = np.arange(300)
    rep = fit_rate(ks=k, values=0.9**k)
    assert abs(rep.q - 0.9) <= 1e-6
    prob = SphereRayleigh(np.linspace(1.0, 0.1, 10))
    tr = run_irgdr(prob, prob.manifold.random_point(np.random.default_rng(3)), ArmijoBacktracking(),
                   0.1, rng=np.random.default_rng(0))
    fit = fit_rate(tr)
    assert fit.preferred == "linear" and fit.q < 1 and fit.linear_r2 >= 0.95
    return f"synthetic Q={rep.q:.9f}; IRGDr-Armijo Q={fit.q:.4f}, R2={fit.linear_r2:.4f}"


@criterion(9, "MNIST IDX parser")
def test_criterion_09_mnist():
    data, _ = load_mnist_idx(DATA / "mnist-2x2.idx3-ubyte")
    np.testing.assert_array_equal(data, np.array([[0, 255, 128, 64], [1, 2, 3, 4]]) / 255.0)
    with pytest.raises(IdxParseError) as bad:
        load_mnist_idx(DATA / "bad-magic.idx3-ubyte")
    assert bad.value.offset == 0 and "magic" in str(bad.value)
    with pytest.raises(IdxParseError) as cut:
        load_mnist_idx(DATA / "truncated.idx3-ubyte")
    assert cut.value.offset == 21 and "truncated" in str(cut.value)
    return "fixture exact; bad magic at offset 0; truncation at offset 21"


DETERMINISM_CFG = """
[experiment]
name = determinism
seed = 5

[problem]
kind = pca

[solver]
alpha = 0.75

[grid]
sizes = 20x10
seeds = 0, 1
algorithms = rgd, irgd, irgdr, rsam, reg
steps = diminishing, armijo
nu = 1e-3
rho = 1e-3
"""


@criterion(10, "determinism")
def test_criterion_10_determinism(tmp_path):
    cfg = parse_config(DETERMINISM_CFG)
    run_experiment(cfg, outdir=tmp_path / "a")
    run_experiment(cfg, outdir=tmp_path / "b", workers=2)
    files = lambda d: {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
    a, b = files(tmp_path / "a"), files(tmp_path / "b")
    assert a == b
    n_csv = sum(name.endswith(".csv") for name in a)
    n_svg = sum(name.endswith(".svg") for name in a)
    assert n_csv > 0 and n_svg > 0
    return f"{n_csv} CSV and {n_svg} SVG files byte-identical across reruns (serial vs 2 workers)"
