"""
Energy functionals of the perturbed system and their numerical checks.

``E0`` is the squared ``H^s`` size of the data; ``E(T)`` adds the sup over
time of the same quantity, componentwise, to the time integrals of the
dissipation rates ``||grad rho||^2_{H^{s-1}}``, ``||grad u||^2_{H^s}`` and
``||grad theta||^2_{H^s}``. The per-block functional couples ``u_j`` and
``grad rho_j`` through a cross term with weight ``2 * lambda``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .littlewood_paley import LPFrame, sobolev_norm
from .spectral import Grid

ENERGY_KEYS = ("rho_Hs", "u_Hs", "theta_Hs", "grad_rho_Hs1", "grad_u_Hs", "grad_theta_Hs")
EQUIVALENCE_TOL = 1e-10


def _power(c: np.ndarray) -> np.ndarray:
    return np.sum(c.real**2 + c.imag**2, axis=0)


def instantaneous_energy(X: np.ndarray, grid: Grid, frame: LPFrame, s: float) -> tuple[float, ...]:
    """Squared norms in ``ENERGY_KEYS`` order for a packed state ``(rho, u, theta)``."""
    d, vol = grid.d, grid.volume
    ws, ws1 = frame.sobolev_weight(s), frame.sobolev_weight(s - 1)
    p_rho, p_u, p_th = _power(X[:1]), _power(X[1 : d + 1]), _power(X[d + 1 :])
    ksq = grid.ksq * grid.keep_mask
    return (
        float(np.sum(ws * p_rho) / vol),
        float(np.sum(ws * p_u) / vol),
        float(np.sum(ws * p_th) / vol),
        float(np.sum(ws1 * ksq * p_rho) / vol),
        float(np.sum(ws * ksq * p_u) / vol),
        float(np.sum(ws * ksq * p_th) / vol),
    )


def energy_E0(state, s: float, frame: LPFrame) -> float:
    return sum(sobolev_norm(f, s, frame) ** 2 for f in state.fields())


@dataclass
class EnergyReport:
    t: np.ndarray
    rho_Hs: np.ndarray
    u_Hs: np.ndarray
    theta_Hs: np.ndarray
    diss_rho: np.ndarray  # running integral of ||grad rho||^2_{H^{s-1}}
    diss_u: np.ndarray
    diss_theta: np.ndarray
    E0: float
    ET: float
    C_fit: float | None = None
    residual: float | None = None

    @property
    def energy(self) -> np.ndarray:
        return self.rho_Hs + self.u_Hs + self.theta_Hs

    @property
    def sup_ratio(self) -> float:
        """``sup_t energy(t) / E0``; NaN for zero data."""
        return float(np.max(self.energy) / self.E0) if self.E0 > 0 else math.nan

    def tail_fraction(self, last: float = 0.2) -> float:
        """Largest relative growth of a dissipation integral over the final ``last`` of the horizon."""
        t_cut = self.t[0] + (1 - last) * (self.t[-1] - self.t[0])
        i = int(np.searchsorted(self.t, t_cut))
        worst = 0.0
        for D in (self.diss_rho, self.diss_u, self.diss_theta):
            if D[-1] > 0:
                worst = max(worst, (D[-1] - D[i]) / D[-1])
        return worst


def energy_ET(record, s: float | None = None, frame: LPFrame | None = None) -> EnergyReport:
    """Energy report of a run from its saved diagnostic rows.

    Rows carry integrands for the run's own ``s``; another ``s`` needs stored
    states (``keep_states="all"``) and a frame.
    """
    rows = record.rows
    if len(rows) < 2:
        raise ValueError("energy_ET needs at least two saved rows")
    t = np.array([r.t for r in rows])
    if s is None or s == record.config.s:
        cols = {k: np.array([getattr(r, k) for r in rows]) for k in ENERGY_KEYS}
    else:
        if frame is None or len(record.states) != len(rows):
            raise ValueError("recomputing at another s needs all states and a frame")
        vals = np.array([instantaneous_energy(st.pack(), st.grid, frame, s) for st in record.states])
        cols = dict(zip(ENERGY_KEYS, vals.T))
    D = {k: cumulative_trapezoid(cols[k], t, initial=0.0) for k in ENERGY_KEYS[3:]}
    E0 = float(cols["rho_Hs"][0] + cols["u_Hs"][0] + cols["theta_Hs"][0])
    ET = float(
        cols["rho_Hs"].max() + cols["u_Hs"].max() + cols["theta_Hs"].max()
        + sum(D[k][-1] for k in ENERGY_KEYS[3:])
    )
    return EnergyReport(
        t, cols["rho_Hs"], cols["u_Hs"], cols["theta_Hs"],
        D["grad_rho_Hs1"], D["grad_u_Hs"], D["grad_theta_Hs"], E0, ET,
    )


# -- per-block functional --------------------------------------------------------


@dataclass(frozen=True)
class BlockFunctionalParams:
    lam: float = 1.0 / 8
    Lambda_theta: float = 8.0

    def __post_init__(self):
        if not 0 < self.lam < 0.5:
            raise ValueError(f"lambda must lie in (0, 1/2), got {self.lam}")
        if not self.Lambda_theta >= 1:
            raise ValueError(f"Lambda_theta must be >= 1, got {self.Lambda_theta}")


def _h1_sq(c: np.ndarray, grid: Grid) -> float:
    return float(np.sum((1.0 + grid.ksq * grid.keep_mask) * _power(c)) / grid.volume)


def _block_parts(state, j: int, frame: LPFrame):
    g = state.grid
    w = frame.weight(j)
    rho, u, th = (f.coeffs * w for f in state.fields())
    grad_rho = 1j * g.k * rho[0] * g.keep_mask
    cross = float(np.sum(u * np.conj(grad_rho)).real / g.volume)
    return _h1_sq(rho, g), _h1_sq(u, g), _h1_sq(th, g), cross


def block_functional(state, j: int, params: BlockFunctionalParams, frame: LPFrame) -> float:
    """``||rho_j||^2_{H1} + ||u_j||^2_{H1} + 2 lam (u_j, grad rho_j) + Lambda ||theta_j||^2_{H1}``.

    ``H1`` is the classical norm ``||f||^2 + ||grad f||^2``.
    """
    r, u, th, cross = _block_parts(state, j, frame)
    return r + u + 2 * params.lam * cross + params.Lambda_theta * th


class EquivalenceFailure(ValueError):
    pass


def check_block_equivalence(state, params: BlockFunctionalParams, frame: LPFrame) -> np.ndarray:
    """Margins ``F_j - [(1 - lam)(||rho_j||^2 + ||u_j||^2) + Lambda ||theta_j||^2]`` (H1 norms)
    for ``j = -1 .. j_max``. Each margin is nonnegative by Cauchy-Schwarz and Young."""
    margins = []
    for j in frame.blocks:
        r, u, th, cross = _block_parts(state, j, frame)
        F = r + u + 2 * params.lam * cross + params.Lambda_theta * th
        margins.append(F - ((1 - params.lam) * (r + u) + params.Lambda_theta * th))
    margins = np.array(margins)
    if np.min(margins, initial=0.0) < -EQUIVALENCE_TOL:
        j = int(np.argmin(margins)) - 1
        raise EquivalenceFailure(f"block {j} margin {margins.min():.3e} is negative")
    return margins


# -- constant fitting --------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    C_fit: float
    max_residual: float
    min_residual: float
    witness: int
    residuals: tuple[float, ...]
    used: tuple[int, ...]


def fit_constant(reports: Sequence[EnergyReport]) -> FitResult:
    """Smallest ``C`` with ``ET <= C (E0 + ET^2 + ET^3)`` over all reports.

    Zero-data reports satisfy the inequality for every ``C`` and are skipped.
    Residuals ``C (E0 + ET^2 + ET^3) - ET`` are stored on each report.
    """
    if not reports:
        raise ValueError("no reports to fit")
    used, ratios = [], []
    for i, r in enumerate(reports):
        if r.E0 == 0.0:
            if r.ET > 0.0:
                raise ValueError(f"report {i} has E0 = 0 but ET = {r.ET}")
            continue
        used.append(i)
        ratios.append(r.ET / (r.E0 + r.ET**2 + r.ET**3))
    if not used:
        raise ValueError("every report has zero data; nothing to fit")
    C = max(ratios)
    witness = used[int(np.argmax(ratios))]
    residuals = []
    for i in used:
        r = reports[i]
        r.C_fit = C
        r.residual = C * (r.E0 + r.ET**2 + r.ET**3) - r.ET
        residuals.append(r.residual)
    return FitResult(C, max(residuals), min(residuals), witness, tuple(residuals), tuple(used))


def write_energy_csv(report: EnergyReport, out_dir: str | Path, run_id: str) -> Path:
    """``<run-id>.energy.csv``: one row per saved time and a summary footer."""
    path = Path(out_dir) / f"{run_id}.energy.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "rho_Hs", "u_Hs", "theta_Hs", "int_grad_rho_Hs1", "int_grad_u_Hs", "int_grad_theta_Hs"])
        for i in range(len(report.t)):
            w.writerow([repr(float(v)) for v in (
                report.t[i], report.rho_Hs[i], report.u_Hs[i], report.theta_Hs[i],
                report.diss_rho[i], report.diss_u[i], report.diss_theta[i])])
        w.writerow(["# summary", "E0", repr(report.E0), "ET", repr(report.ET),
                    "C_fit", repr(report.C_fit), "residual", repr(report.residual)])
    return path
