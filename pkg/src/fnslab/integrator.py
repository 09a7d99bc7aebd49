"""
Fixed-step RK4 integration of the truncated system with guard detection.

The evolved representation is whatever the right-hand-side object calls its
work coordinates (see ``physics.LinearRHS``); saved states are always full
lattice ``FlowState`` values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Iterable, Literal

import numpy as np

from . import spectral as sp
from .energy import ENERGY_KEYS, instantaneous_energy
from .littlewood_paley import build_frame
from .physics import VACUUM_FLOOR, Constitutive, FlowState, FriedrichRHS, GuardBreach, resolve_laws
from .spectral import Grid

RK4_STABILITY = 2.5

Termination = Literal["completed", "guard_breach", "nonfinite"]


@dataclass(frozen=True)
class SolverConfig:
    d: int = 2
    n: int = 64
    box_length: float = 2 * math.pi
    s: float = 3.0
    eps: float = 1.0 / 16
    dt: float | None = None
    T_end: float = 50.0
    pad: float = sp.DEFAULT_PAD
    laws: str | Constitutive = "const-mu"
    rho_guard: float = 0.5
    theta_guard: float = 0.5
    vacuum_floor: float = VACUUM_FLOOR
    save_every: int = 10
    seed: int = 0
    backend: str = "auto"

    def __post_init__(self):
        Grid(self.d, self.n, self.box_length)  # validates grid parameters
        if not self.s > self.d / 2:
            raise ValueError(f"s must exceed d/2 = {self.d / 2}, got {self.s}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.T_end > 0:
            raise ValueError(f"T_end must be positive, got {self.T_end}")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")
        if self.dt is not None:
            if not self.dt > 0:
                raise ValueError(f"dt must be positive, got {self.dt}")
            limit = stable_dt_estimate(self)
            if self.dt > limit * (1 + 1e-12):
                raise ValueError(f"dt = {self.dt} exceeds the stability estimate {limit:.6g}")
        resolve_laws(self.laws)

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n, self.box_length)

    def resolved_dt(self) -> float:
        return self.dt if self.dt is not None else stable_dt_estimate(self)

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


def stable_dt_estimate(config: SolverConfig) -> float:
    """RK4 step bound for the stiffest diffusive multiplier retained by the cutoff."""
    laws = resolve_laws(config.laws)
    dk = 2 * math.pi / config.box_length
    k_max = min((config.n // 2 - 1) * dk, 1.0 / config.eps)
    return RK4_STABILITY / (max(2 * laws.mu1, laws.kappa0) * k_max**2)


# -- stepping -------------------------------------------------------------------


def rk4_step(W: np.ndarray, t: float, dt: float, f: Callable[[float, np.ndarray], np.ndarray]) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(t, W)
        k2 = f(t + dt / 2, W + (dt / 2) * k1)
        k3 = f(t + dt / 2, W + (dt / 2) * k2)
        k4 = f(t + dt, W + dt * k3)
        out = W + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values in RK4 stages")
    return out


def step_rk4(state: FlowState, dt: float, rhs) -> FlowState:
    """One classical RK4 step; the result is re-truncated and re-symmetrized."""
    W = rhs.to_work(state.pack())
    W = rhs.symmetrize(rhs.to_work(rhs.from_work(rk4_step(W, state.t, dt, rhs))))
    return FlowState.unpack(state.grid, rhs.from_work(W), state.t + dt)


# -- records ----------------------------------------------------------------------


@dataclass(frozen=True)
class GuardEvent:
    kind: Literal["rho_Linf", "theta_Linf", "vacuum", "nonfinite"]
    time: float
    value: float
    threshold: float


@dataclass(frozen=True)
class DiagnosticRow:
    t: float
    step: int
    rho_linf: float
    theta_linf: float
    min_density: float
    rho_mean: float
    hermitian_residual: float
    truncation_residual: float
    rho_Hs: float
    u_Hs: float
    theta_Hs: float
    grad_rho_Hs1: float
    grad_u_Hs: float
    grad_theta_Hs: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> list[float]:
        return list(asdict(self).values())


@dataclass
class RunRecord:
    config: SolverConfig
    rows: list[DiagnosticRow] = field(default_factory=list)
    states: list[FlowState] = field(default_factory=list)
    termination: Termination = "completed"
    event: GuardEvent | None = None
    initial_projection_error: float = 0.0
    dt: float = 0.0
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def final_state(self) -> FlowState | None:
        return self.states[-1] if self.states else None


# -- guards ---------------------------------------------------------------------------


class _GuardCheck:
    def __init__(self, config: SolverConfig, grid: Grid, band: int | None):
        self.config = config
        self.grid = grid
        self.ov = sp.oversampler(grid, float(config.pad), band)

    def sup_norms(self, X: np.ndarray) -> tuple[float, float, float]:
        d = self.grid.d
        vals = self.ov.sample(X[[0, d + 1]])
        rho_max = float(np.max(np.abs(vals[0])))
        return rho_max, float(np.max(np.abs(vals[1]))), 1.0 + float(np.min(vals[0]))

    def event(self, X: np.ndarray, t: float) -> GuardEvent | None:
        c, d = self.config, self.grid.d
        # cheap sufficient condition: sum |c_k| / V bounds the sup norm
        bound = np.sum(np.abs(X[[0, d + 1]]), axis=tuple(range(1, d + 1))) / self.grid.volume
        if bound[0] <= c.rho_guard and bound[1] <= c.theta_guard and 1.0 - bound[0] >= c.vacuum_floor:
            return None
        rho_max, theta_max, min_density = self.sup_norms(X)
        if min_density < c.vacuum_floor:
            return GuardEvent("vacuum", t, min_density, c.vacuum_floor)
        if rho_max > c.rho_guard:
            return GuardEvent("rho_Linf", t, rho_max, c.rho_guard)
        if theta_max > c.theta_guard:
            return GuardEvent("theta_Linf", t, theta_max, c.theta_guard)
        return None


# -- driver ---------------------------------------------------------------------------

Monitor = Callable[[FlowState, DiagnosticRow], None]


def make_rhs(config: SolverConfig) -> FriedrichRHS:
    return FriedrichRHS(config.grid, config.eps, resolve_laws(config.laws), config.pad, config.backend)


def integrate(
    config: SolverConfig,
    initial: FlowState,
    monitors: Iterable[Monitor] = (),
    keep_states: Literal["none", "final", "all"] = "final",
    rhs=None,
) -> RunRecord:
    """Advance ``initial`` to ``config.T_end`` with fixed RK4 steps.

    The initial state is projected onto the cutoff first; the projection
    error is recorded. The step is shrunk so that an integer number of steps
    lands exactly on ``T_end``. Diagnostics are saved every ``save_every``
    steps and at the final step. A guard breach or non-finite value stops the
    run; the offending state is never saved and the event carries the time of
    the last accepted state.
    """
    grid = config.grid
    if initial.grid != grid:
        raise ValueError("initial state lives on a different grid than the config")
    rhs = make_rhs(config) if rhs is None else rhs
    monitors = list(monitors)
    frame = build_frame(grid)
    mask = grid.truncation_mask(config.eps)
    band = getattr(getattr(rhs, "ov", None), "band", None)
    guards = _GuardCheck(config, grid, band)

    X0 = initial.pack()
    dt_req = config.resolved_dt()
    nsteps = max(1, math.ceil(config.T_end / dt_req * (1 - 1e-12)))
    dt = config.T_end / nsteps
    record = RunRecord(config, dt=dt)
    record.initial_projection_error = math.sqrt(sp.l2_norm_sq(sp.SpectralField(grid, X0 * ~mask)))

    W = rhs.symmetrize(rhs.to_work(X0))
    t0 = initial.t

    def save(X: np.ndarray, t: float, step: int):
        rho_max, theta_max, min_density = guards.sup_norms(X)
        e = instantaneous_energy(X, grid, frame, config.s)
        row = DiagnosticRow(
            t=t,
            step=step,
            rho_linf=rho_max,
            theta_linf=theta_max,
            min_density=min_density,
            rho_mean=float(X[(0,) + (0,) * grid.d].real / grid.volume),
            hermitian_residual=sp.hermitian_residual(X, grid),
            truncation_residual=math.sqrt(sp.l2_norm_sq(sp.SpectralField(grid, X * ~mask))),
            **dict(zip(ENERGY_KEYS, e)),
        )
        record.rows.append(row)
        state = None
        if keep_states == "all" or monitors:
            state = FlowState.unpack(grid, X, t)
        if keep_states == "all":
            record.states.append(state)
        for m in monitors:
            m(state, row)

    def finish(X: np.ndarray, t: float) -> RunRecord:
        if keep_states == "final" and record.rows:
            record.states.append(FlowState.unpack(grid, X, t))
        return record

    X = rhs.from_work(W)
    ev = guards.event(X, t0)
    if ev is not None:
        record.termination, record.event = "guard_breach", ev
        return record
    save(X, t0, 0)

    for step in range(1, nsteps + 1):
        t_prev = t0 + (step - 1) * dt
        try:
            W_new = rk4_step(W, t_prev, dt, rhs)
        except GuardBreach as exc:
            record.termination = "guard_breach"
            record.event = GuardEvent("vacuum", t_prev, exc.min_density, exc.floor)
            return finish(X, t_prev)
        except FloatingPointError:
            record.termination = "nonfinite"
            record.event = GuardEvent("nonfinite", t_prev, math.nan, math.inf)
            return finish(X, t_prev)
        W_new = rhs.symmetrize(W_new)
        X_new = rhs.from_work(W_new)
        ev = guards.event(X_new, t_prev)
        if ev is not None:
            record.termination, record.event = "guard_breach", ev
            return finish(X, t_prev)
        W, X = W_new, X_new
        record.steps = step
        t = t0 + step * dt
        if step % config.save_every == 0 or step == nsteps:
            save(X, t, step)
    return finish(X, t0 + nsteps * dt)
