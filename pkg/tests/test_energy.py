import csv
import math
import types

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import cumulative_trapezoid

from fnslab import energy as en
from fnslab import littlewood_paley as lp
from fnslab import physics as ph
from fnslab import spectral as sp
from fnslab.integrator import DiagnosticRow, RunRecord, SolverConfig, integrate
from fnslab.physics import FlowState
from fnslab.spectral import Grid, SpectralField

from conftest import exact_mode, random_state


@pytest.fixture(scope="module")
def frame32():
    return lp.build_frame(Grid(2, 32))


def _record(times, **cols):
    cfg = SolverConfig(n=16, eps=1 / 4, T_end=float(times[-1]) if times[-1] > 0 else 1.0)
    rows = []
    for i, t in enumerate(times):
        vals = {k: float(np.asarray(cols.get(k, 0.0))[i] if np.ndim(cols.get(k, 0.0)) else cols.get(k, 0.0))
                for k in en.ENERGY_KEYS}
        rows.append(DiagnosticRow(t=float(t), step=i, rho_linf=0, theta_linf=0, min_density=1, rho_mean=0,
                                  hermitian_residual=0, truncation_residual=0, **vals))
    return RunRecord(cfg, rows=rows)


def test_E0_examples(frame32):
    g = frame32.grid
    assert en.energy_E0(FlowState.zeros(g), 3.0, frame32) == 0
    c = 0.1
    st = FlowState(exact_mode(g, (0, 0), c), SpectralField.zeros(g, 2), SpectralField.zeros(g))
    assert en.energy_E0(st, 3.0, frame32) == pytest.approx((2**-3 * c) ** 2 * g.volume, rel=1e-12)


def test_instantaneous_energy_matches_norms(frame32):
    g = frame32.grid
    s = 2.5
    state = random_state(g, 3, amplitude=0.1)
    e = en.instantaneous_energy(state.pack(), g, frame32, s)
    assert sum(e[:3]) == pytest.approx(en.energy_E0(state, s, frame32), rel=1e-12)
    rho, u, th = state.fields()
    assert e[3] == pytest.approx(lp.sobolev_norm(sp.gradient(rho), s - 1, frame32) ** 2, rel=1e-12)
    grad_u = SpectralField(g, np.concatenate([sp.gradient(u.component(m)).coeffs for m in range(2)]))
    assert e[4] == pytest.approx(lp.sobolev_norm(grad_u, s, frame32) ** 2, rel=1e-12)
    assert e[5] == pytest.approx(lp.sobolev_norm(sp.gradient(th), s, frame32) ** 2, rel=1e-12)


def test_zero_trajectory():
    rep = en.energy_ET(_record(np.linspace(0, 1, 5)))
    assert rep.E0 == 0 and rep.ET == 0
    assert math.isnan(rep.sup_ratio)
    assert rep.tail_fraction() == 0


def test_frozen_trajectory():
    t = np.linspace(0, 10, 11)
    rep = en.energy_ET(_record(t, rho_Hs=1.0, u_Hs=2.0, theta_Hs=3.0, grad_rho_Hs1=0.5, grad_u_Hs=0.25,
                               grad_theta_Hs=1.0))
    assert rep.E0 == 6.0
    assert rep.ET == pytest.approx(6.0 + 10 * (0.5 + 0.25 + 1.0), rel=1e-14)
    assert rep.sup_ratio == 1.0
    # constant dissipation keeps growing linearly: last 20% carries 20% of the integral
    assert rep.tail_fraction() == pytest.approx(0.2, rel=1e-12)


def test_energy_ET_needs_two_rows():
    with pytest.raises(ValueError):
        en.energy_ET(_record(np.array([0.0])))


def test_heat_dissipation_integral_closed_form():
    cfg = SolverConfig(n=16, eps=1e-3, s=2.0, T_end=0.5, dt=1e-3, save_every=5)
    g = cfg.grid
    a, k = 0.01, (1, 1)
    th = exact_mode(g, k, a)
    st = FlowState(SpectralField.zeros(g), SpectralField.zeros(g, 2), th)
    rec = integrate(cfg, st, rhs=ph.LinearRHS(g))
    rep = en.energy_ET(rec)
    frame = lp.build_frame(g)
    K = 2.0
    w = frame.sobolev_weight(cfg.s)[k]
    amp0 = w * K * sp.l2_norm_sq(th)
    want = amp0 * (1 - math.exp(-2 * K * cfg.T_end)) / (2 * K)
    assert rep.diss_theta[-1] == pytest.approx(want, rel=1e-4)
    # temperature drives velocity linearly, so the other integrals are small but not zero
    assert 0 < rep.diss_u[-1] < rep.diss_theta[-1]


def test_other_s_needs_states():
    cfg = SolverConfig(n=16, eps=1 / 4, T_end=0.1, save_every=2)
    st = random_state(cfg.grid, 5)
    frame = lp.build_frame(cfg.grid)
    rec_final = integrate(cfg, st)
    with pytest.raises(ValueError):
        en.energy_ET(rec_final, s=2.0, frame=frame)
    rec = integrate(cfg, st, keep_states="all")
    same = en.energy_ET(rec, s=cfg.s, frame=frame)
    redo = en.energy_ET(rec, s=cfg.s + 1e-15, frame=frame)
    assert redo.ET == pytest.approx(same.ET, rel=1e-12)
    assert en.energy_ET(rec, s=2.0, frame=frame).ET < same.ET


def _quadrature_block_functional(state, j, params, frame):
    """The block functional from physical samples instead of coefficients."""
    g = state.grid
    vol = g.volume

    def samples(f):
        return sp.inverse_dft(lp.dyadic_block(f, j, frame)).values

    def h1(f):
        v = samples(f)
        grads = [sp.inverse_dft(lp.dyadic_block(sp.gradient(f.component(m)), j, frame)).values
                 for m in range(f.components)]
        return (np.mean(np.sum(v**2, axis=0)) + sum(np.mean(np.sum(gv**2, axis=0)) for gv in grads)) * vol

    rho, u, th = state.fields()
    grad_rho = sp.inverse_dft(lp.dyadic_block(sp.gradient(rho), j, frame)).values
    cross = np.mean(np.sum(samples(u) * grad_rho, axis=0)) * vol
    return h1(rho) + h1(u) + 2 * params.lam * cross + params.Lambda_theta * h1(th)


def test_block_functional_matches_quadrature(frame32):
    state = random_state(frame32.grid, 7, amplitude=0.1, band=12)
    params = en.BlockFunctionalParams(lam=0.2, Lambda_theta=4.0)
    for j in frame32.blocks:
        a = en.block_functional(state, j, params, frame32)
        b = _quadrature_block_functional(state, j, params, frame32)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-18)


@pytest.mark.parametrize("lam", [1 / 16, 1 / 8, 1 / 4])
def test_equivalence_margins_nonnegative(frame32, lam):
    params = en.BlockFunctionalParams(lam=lam)
    for seed in range(20):
        state = random_state(frame32.grid, 100 + seed, amplitude=0.1, band=14)
        m = en.check_block_equivalence(state, params, frame32)
        assert m.shape == (len(frame32.blocks),)
        assert np.min(m) >= -1e-10


def test_aligned_mode_margin_closed_form(frame32):
    # rho = a cos(k.x), u = a k sin(k.x) = -grad rho: the cross term is as negative as it gets
    g = frame32.grid
    k = np.array([3, 1])
    a = 0.01
    x = g.coords
    arg = k[0] * x[0] + k[1] * x[1]
    rho = sp.forward_dft(sp.RealField(g, a * np.cos(arg)))
    u = sp.forward_dft(sp.RealField(g, np.stack([a * k[0] * np.sin(arg), a * k[1] * np.sin(arg)])))
    state = FlowState(rho, u, SpectralField.zeros(g))
    lam = 1 / 8
    m = en.check_block_equivalence(state, en.BlockFunctionalParams(lam=lam), frame32)
    K = float(k @ k)
    rho_sq, grad_u_sq = a**2 * g.volume / 2, K**2 * a**2 * g.volume / 2
    idx = tuple(k)
    want = [lam * frame32.weight(j)[idx] ** 2 * (rho_sq + grad_u_sq) for j in frame32.blocks]
    np.testing.assert_allclose(m, want, rtol=1e-10, atol=1e-18)


def test_equivalence_failure_is_reported(frame32):
    state = random_state(frame32.grid, 9, amplitude=0.1)
    bogus = types.SimpleNamespace(lam=-0.25, Lambda_theta=1.0)
    with pytest.raises(en.EquivalenceFailure):
        en.check_block_equivalence(state, bogus, frame32)


@pytest.mark.parametrize("bad", [dict(lam=-0.1), dict(lam=0.0), dict(lam=0.5), dict(Lambda_theta=0.5)])
def test_block_params_validation(bad):
    with pytest.raises(ValueError):
        en.BlockFunctionalParams(**bad)


def _report(E0, ET):
    z = np.zeros(2)
    return en.EnergyReport(np.array([0.0, 1.0]), z, z, z, z, z, z, E0, ET)


def test_fit_constant_examples():
    fit = en.fit_constant([_report(1.0, 1.0)])
    assert fit.C_fit == pytest.approx(1 / 3)
    assert fit.max_residual == pytest.approx(0.0, abs=1e-15)
    reps = [_report(1.0, 1.0), _report(0.0, 0.0), _report(1e-3, 2e-3)]
    fit = en.fit_constant(reps)
    assert fit.used == (0, 2)
    assert fit.witness == 2 and fit.C_fit == pytest.approx(2e-3 / (1e-3 + 4e-6 + 8e-9))
    assert fit.min_residual >= -1e-15
    assert reps[0].C_fit == fit.C_fit and reps[1].C_fit is None


def test_fit_constant_errors():
    with pytest.raises(ValueError):
        en.fit_constant([])
    with pytest.raises(ValueError):
        en.fit_constant([_report(0.0, 1.0)])
    with pytest.raises(ValueError):
        en.fit_constant([_report(0.0, 0.0)])


def test_energy_csv_footer(tmp_path):
    rep = en.energy_ET(_record(np.linspace(0, 1, 3), rho_Hs=1.0, grad_u_Hs=1.0))
    en.fit_constant([rep])
    path = en.write_energy_csv(rep, tmp_path / "out", "r1")
    assert path.name == "r1.energy.csv"
    rows = list(csv.reader(path.open()))
    assert rows[0][0] == "t" and len(rows) == 1 + 3 + 1
    footer = rows[-1]
    assert footer[0] == "# summary"
    assert float(footer[footer.index("ET") + 1]) == rep.ET
    assert float(footer[footer.index("C_fit") + 1]) == rep.C_fit


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=4, max_size=30), st.integers(1, 100))
def test_dissipation_quadrature_is_additive(values, split):
    y = np.array(values)
    t = np.cumsum(np.linspace(0.5, 1.5, y.size)) - 0.5
    i = split % (y.size - 2) + 1
    full = cumulative_trapezoid(y, t, initial=0.0)[-1]
    rep = en.energy_ET(_record(t, grad_u_Hs=y))
    assert rep.diss_u[-1] == pytest.approx(full, rel=1e-12, abs=1e-12)
    halves = cumulative_trapezoid(y[: i + 1], t[: i + 1])[-1] + cumulative_trapezoid(y[i:], t[i:])[-1]
    assert rep.diss_u[-1] == pytest.approx(halves, rel=1e-12, abs=1e-12)
    assert np.all(np.diff(rep.diss_u) >= 0)
