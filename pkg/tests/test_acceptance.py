"""
Acceptance suite: one test per criterion, each printing a single
``AC<n> PASS|FAIL`` line with the measured quantities. The same lines are
repeated in the terminal summary (see ``conftest.py``).
"""

import math
import time

import numpy as np
import pytest

from fnslab import energy as en
from fnslab import experiments as ex
from fnslab import lemmas as lm
from fnslab import littlewood_paley as lp
from fnslab import physics as ph
from fnslab import spectral as sp
from fnslab.integrator import SolverConfig, integrate
from fnslab.physics import FlowState
from fnslab.spectral import Grid

from conftest import exact_mode, philox, random_state

RESULTS: dict[str, tuple[bool, str]] = {}


def report(ac: str, checks: dict[str, bool], detail: str):
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"{ac} {'PASS' if ok else 'FAIL'}  {detail}" + (f"  failed: {', '.join(failed)}" if failed else "")
    RESULTS[ac] = (ok, line)
    print(line)
    assert ok, line


def test_ac01_partition_of_unity():
    t0 = time.perf_counter()
    res = {n: float(np.max(np.abs(lp.build_frame(Grid(2, n)).partition_sum() - 1))) for n in (32, 64, 128)}
    dt = time.perf_counter() - t0
    report("AC1", {"residual": max(res.values()) <= 1e-12, "runtime": dt < 1.0},
           f"max residual {max(res.values()):.2e} over n=32/64/128, {dt:.2f}s")


def test_ac02_reconstruction_and_orthogonality():
    t0 = time.perf_counter()
    g = Grid(2, 64)
    fr = lp.build_frame(g)
    rng = philox(2)
    recon, leak = 0.0, 0.0
    for _ in range(50):
        f = sp.random_field(g, rng)
        blocks = {j: lp.dyadic_block(f, j, fr) for j in fr.blocks}
        total = sum(b.coeffs for b in blocks.values())
        recon = max(recon, np.max(np.abs(total - f.coeffs)) / np.max(np.abs(f.coeffs)))
        for j in range(fr.j_max + 1):
            for jp in range(j + 2, fr.j_max + 1):
                leak = max(leak, float(np.max(np.abs(lp.dyadic_block(blocks[j], jp, fr).coeffs))))
    dt = time.perf_counter() - t0
    report("AC2", {"reconstruction": recon <= 1e-12, "orthogonality": leak == 0.0, "runtime": dt < 10},
           f"reconstruction {recon:.2e}, far-block overlap {leak:.1e}, 50 fields, {dt:.2f}s")


def test_ac03_norm_sanity():
    worst_const = 0.0
    for n in (32, 64, 128):
        g = Grid(2, n)
        fr = lp.build_frame(g)
        for s in (-1.0, 0.0, 1.5, 3.0):
            for c in (0.5, -2.0):
                want = 2**-s * abs(c) * (2 * math.pi) ** (g.d / 2)
                got = lp.sobolev_norm(exact_mode(g, (0, 0), c), s, fr)
                worst_const = max(worst_const, abs(got - want) / want)
    ratios = []
    for n in (32, 64, 128):
        g = Grid(2, n)
        fr = lp.build_frame(g)
        rng = philox(300 + n)
        for _ in range(100):
            f = sp.random_field(g, rng, band=n // 3, decay=1.0)
            ratios.append(lp.sobolev_norm(f, 1.0, fr) / lp.direct_weighted_norm(f, 1.0))
    spread = max(ratios) / min(ratios)
    report("AC3", {"constant": worst_const <= 1e-12, "one_decade": spread <= 10},
           f"constant-field error {worst_const:.2e}; dyadic/direct ratio in [{min(ratios):.3f}, "
           f"{max(ratios):.3f}] (spread {spread:.2f}) over 3x100 fields")


def test_ac04_bernstein_and_lemma_constants():
    t0 = time.perf_counter()
    g = Grid(2, 64)
    fr = lp.build_frame(g)
    grad_err = 0.0
    for k in [(1, 0), (3, 4), (0, 9), (12, -5), (20, 7)]:
        m = exact_mode(g, k)
        r = sp.l2_norm(sp.gradient(m)) / sp.l2_norm(m)
        grad_err = max(grad_err, abs(r - math.hypot(*k)) / math.hypot(*k))
    f = sp.random_field(g, philox(4), band=24)
    u = sp.SpectralField(g, np.concatenate([exact_mode(g, (0, 0), 0.4).coeffs, exact_mode(g, (0, 0), -1.1).coeffs]))
    comm = max(float(np.max(np.abs(lm.commutator(u, f, j, fr).coeffs))) for j in fr.blocks)
    comm /= float(np.max(np.abs(f.coeffs)))
    spec = lm.RandomFieldEnsembleSpec(size=50, seed=0)
    suite = lm.lemma_suite(spec, fr)
    dt = time.perf_counter() - t0
    by_j = suite.commutator_by_block
    report("AC4", {"gradient_ratio": grad_err <= 1e-12, "constant_commutator": comm <= 1e-12,
                   "finite": suite.all_finite, "j_stable": suite.commutator_j_stable,
                   "ensemble": spec.size >= 50, "runtime": dt < 60},
           f"gradient ratio error {grad_err:.1e}, commutator {comm:.1e}, commutator max j>=5 "
           f"{by_j[lm.J_SPLIT + 1:].max():.2e} vs j<5 {by_j[:lm.J_SPLIT + 1].max():.2e}, "
           f"{len(suite.rows)} constants finite, {dt:.1f}s")


def test_ac05_linear_oracle():
    t0 = time.perf_counter()
    rep = ex.run_linear_check(ex.ScenarioSpec(kind="linear_check", linear_dt=1e-3, linear_T_end=1.0))
    dt = time.perf_counter() - t0
    report("AC5", {**rep.verdicts, "runtime": dt < 10},
           f"max mode error {rep.values['max_rel_error']:.1e}, heat error {rep.values['heat_error']:.1e}, {dt:.2f}s")


@pytest.fixture(scope="module")
def long_run():
    cfg = SolverConfig(n=16, eps=1 / 4, save_every=100)
    cfg = cfg.with_(T_end=10_000 * cfg.resolved_dt())
    fr = lp.build_frame(cfg.grid)
    initial = ex.gen_initial(1e-3, cfg.grid, cfg.s, fr, seed=3, k_init=6.0)
    return cfg, integrate(cfg, initial, keep_states="all")


def test_ac06_conservation_and_symmetry(long_run):
    cfg, rec = long_run
    mean = rec.column("rho_mean")
    drift = float(np.max(np.abs(mean - mean[0])))
    herm = float(rec.column("hermitian_residual").max())
    herm_states = max(sp.hermitian_residual(s.pack(), cfg.grid) for s in rec.states)
    report("AC6", {"completed": rec.termination == "completed" and rec.steps == 10_000,
                   "mean_drift": drift <= 1e-12, "hermitian": max(herm, herm_states) <= 1e-12},
           f"{rec.steps} steps, mean drift {drift:.1e}, Hermitian residual {max(herm, herm_states):.1e} "
           f"over {len(rec.rows)} saved states")


def test_ac07_friedrich_structure(long_run):
    cfg, rec = long_run
    g = Grid(2, 32)
    idem = 0.0
    for eps in (1 / 2, 1 / 5, 1 / 9, 1 / 15):
        f = sp.random_field(g, philox(7))
        once = sp.truncate(f, eps)
        idem = max(idem, float(np.max(np.abs(sp.truncate(once, eps).coeffs - once.coeffs))))
    mask = cfg.grid.truncation_mask(cfg.eps)
    trunc = max(math.sqrt(sp.l2_norm_sq(sp.SpectralField(cfg.grid, s.pack() * ~mask))) for s in rec.states)
    st = random_state(g, 71, amplitude=0.1, band=6)
    laws = ph.get_laws("linear-mu")
    eps = 1 / (math.sqrt(2) * g.n)  # cutoff beyond every lattice frequency
    fried = ph.eval_friedrich_rhs(st, eps, laws).pack()
    full = ph.eval_linear_rhs(st, laws).pack() + np.concatenate([f.coeffs for f in ph.eval_G_terms(st, laws)])
    exact = float(np.max(np.abs(fried - full)) / np.max(np.abs(full)))
    report("AC7", {"idempotent": idem <= 1e-12, "saved_truncated": trunc <= 1e-12, "limit": exact <= 1e-12},
           f"idempotence {idem:.1e}, saved-state truncation residual {trunc:.1e}, "
           f"truncated vs untruncated RHS {exact:.1e}")


def test_ac08_nonlinear_consistency():
    g = Grid(2, 32)
    worst = 0.0
    for laws in ("const-mu", "linear-mu"):
        lw = ph.get_laws(laws)
        for seed in range(5):
            st = random_state(g, 80 + seed, amplitude=0.2)
            fform = ph.eval_full_rhs_fform(st, lw).pack()
            gform = ph.eval_linear_rhs(st, lw).pack() + np.concatenate([f.coeffs for f in ph.eval_G_terms(st, lw)])
            worst = max(worst, float(np.max(np.abs(fform - gform))))
    base = random_state(g, 88, amplitude=1.0)

    def nonlinear(a):
        s = FlowState.unpack(g, a * base.pack())
        return np.linalg.norm(np.concatenate([f.coeffs for f in ph.eval_G_terms(s, ph.get_laws("linear-mu"))]))

    ratio = nonlinear(0.02) / nonlinear(0.01)
    report("AC8", {"F_vs_G": worst <= 1e-10, "richardson": abs(ratio - 4) <= 0.6},
           f"F-form vs G-form {worst:.1e}, amplitude-halving ratio {ratio:.4f}")


def test_ac09_small_data_boundedness():
    t0 = time.perf_counter()
    spec = ex.ScenarioSpec(kind="smalldata")
    assert (spec.solver.d, spec.solver.n, spec.solver.s, spec.solver.eps, spec.eta, spec.solver.T_end) == \
        (2, 64, 3.0, 1 / 16, 1e-3, 50.0)
    rep = ex.run_smalldata(spec)
    dt = time.perf_counter() - t0
    v = rep.values
    report("AC9", {**rep.verdicts, "runtime": dt <= 600},
           f"K {v.get('K', float('nan')):.4f}, tail {v.get('tail', float('nan')):.2e}, C_fit "
           f"{v.get('C_fit', float('nan')):.4f} -> {v.get('C_fit_doubled', float('nan')):.4f} "
           f"(change {v.get('C_fit_change', float('nan')):.1%}), {dt:.0f}s")


def test_ac10_eps_refinement():
    rep = ex.run_eps_refinement(ex.ScenarioSpec(kind="eps_refine"))
    D = [rep.values[f"D{i}"] for i in (1, 2, 3)]
    report("AC10", rep.verdicts, "D(eps, eps/2) = " + ", ".join(f"{d:.3e}" for d in D))


def test_ac11_contraction():
    rep = ex.run_contraction(ex.ScenarioSpec(kind="contraction"))
    v = rep.values
    report("AC11", rep.verdicts,
           f"zero-delta separation {v['max_delta_zero']:.1e}, min envelope margin {v['min_envelope_margin']:.2e}, "
           f"halving ratio {v['final_ratio']:.4f}")


def test_ac12_manufactured_solution():
    rep = ex.run_manufactured(ex.ScenarioSpec(kind="manufactured"))
    report("AC12", rep.verdicts,
           f"temporal order {rep.values['order']:.3f}, 48->64 error change {rep.values['resolution_change']:.2e}")


def test_ac13_block_functional_margin():
    g = Grid(2, 32)
    fr = lp.build_frame(g)
    worst = math.inf
    for lam in (1 / 16, 1 / 8, 1 / 4):
        params = en.BlockFunctionalParams(lam=lam)
        for seed in range(100):
            st = random_state(g, 1300 + seed, amplitude=0.1, band=14)
            worst = min(worst, float(np.min(en.check_block_equivalence(st, params, fr))))
    report("AC13", {"margins": worst >= -1e-10}, f"min margin {worst:.3e} over 3 lambdas x 100 states")
