"""
Empirical constants for the harmonic-analysis inequalities used by the
energy method.

Each inequality ``LHS <= C * RHS`` is measured as the ratio ``LHS / RHS`` over
a seeded ensemble of band-limited random fields; the report holds the largest
ratio per inequality and the ensemble member that attains it. Nothing is
asserted about the size of the constants except finiteness (and, for the
commutator estimate, that the per-block constant does not grow with ``j``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectral as sp
from .littlewood_paley import LPFrame, build_frame, dyadic_block, homogeneous_norm, sobolev_norm
from .physics import advect
from .snapshot import Snapshot, write_snapshot
from .spectral import Grid, SpectralField

J_SPLIT = 5  # commutator stability compares blocks j >= J_SPLIT against j < J_SPLIT


@dataclass(frozen=True)
class RandomFieldEnsembleSpec:
    size: int = 50
    seed: int = 0
    d: int = 2
    n: int = 64
    band: float | None = None  # default n / 4, so quadratic products stay on the lattice
    decay: float = 2.0
    sigma: float = 1.5
    amplitude: float = 0.3

    def __post_init__(self):
        if self.size < 50:
            raise ValueError(f"ensemble size must be >= 50, got {self.size}")
        if not self.sigma > self.d / 2:
            raise ValueError("sigma must exceed d/2 (the algebra and composition laws need it)")
        if not 0 < self.amplitude < 1:
            raise ValueError("amplitude must lie in (0, 1) so that 1 + u stays positive")

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n)

    @property
    def resolved_band(self) -> float:
        return self.n / 4 if self.band is None else self.band


@dataclass
class EnsembleMember:
    f: SpectralField  # scalar
    g: SpectralField  # scalar
    u: SpectralField  # vector

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.f.coeffs, self.g.coeffs, self.u.coeffs])


def _normalized(field_: SpectralField, amplitude: float) -> SpectralField:
    peak = sp.max_abs(field_)
    if peak == 0.0:
        raise ValueError("degenerate ensemble: a generated field is identically zero")
    return field_ * (amplitude / peak)


def ensemble_member(spec: RandomFieldEnsembleSpec, index: int) -> EnsembleMember:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, index])))
    g = spec.grid
    kw = dict(band=spec.resolved_band, decay=spec.decay)
    f = _normalized(sp.random_field(g, rng, 1, **kw), spec.amplitude)
    h = _normalized(sp.random_field(g, rng, 1, **kw), spec.amplitude)
    u = _normalized(sp.random_field(g, rng, g.d, **kw), spec.amplitude)
    return EnsembleMember(f, h, u)


# -- individual measurements ------------------------------------------------------


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def commutator(u: SpectralField, f: SpectralField, j: int, frame: LPFrame, pad: float = sp.DEFAULT_PAD) -> SpectralField:
    """``[u . grad, Delta_j] f = u . grad(Delta_j f) - Delta_j(u . grad f)``."""
    return advect(u, dyadic_block(f, j, frame), pad) - dyadic_block(advect(u, f, pad), j, frame)


def transport_integral(rho: SpectralField, u: SpectralField, j: int, frame: LPFrame,
                       pad: float = sp.DEFAULT_PAD) -> float:
    """``int Delta_j div(rho u) * lap(Delta_j rho) dx`` evaluated by Parseval."""
    flux = sp.divergence(sp.pointwise_product(rho, u, pad))
    return sp.l2_inner(dyadic_block(flux, j, frame), sp.laplacian(dyadic_block(rho, j, frame)))


def _bernstein(f: SpectralField, frame: LPFrame) -> dict[str, float]:
    d = f.grid.d
    up = low = ball = 0.0
    for j in frame.blocks:
        b = dyadic_block(f, j, frame)
        nb = sp.l2_norm(b)
        if nb == 0.0:
            continue
        lam = 2.0 ** max(j, 0)
        ball = max(ball, sp.max_abs(b) / (lam ** (d / 2) * nb))
        if j >= 0:
            ng = sp.l2_norm(sp.gradient(b))
            up = max(up, ng / (lam * nb))
            low = max(low, lam * nb / ng)
    return {"bernstein-ring-upper": up, "bernstein-ring-lower": low, "bernstein-ball-sup": ball}


def _measure(m: EnsembleMember, spec: RandomFieldEnsembleSpec, frame: LPFrame) -> tuple[dict, np.ndarray, np.ndarray]:
    s = spec.sigma
    f, g, u = m.f, m.g, m.u
    H = lambda x, t=s: sobolev_norm(x, t, frame)  # noqa: E731
    Hh = lambda x, t=s: homogeneous_norm(x, t, frame)  # noqa: E731
    inf_f, inf_g = sp.max_abs(f), sp.max_abs(g)
    fg = sp.pointwise_product(f, g)
    grad_f = sp.gradient(f)
    out = _bernstein(f, frame)
    out["gradient-equivalence-upper"] = _ratio(Hh(grad_f), Hh(f, s + 1))
    out["gradient-equivalence-lower"] = _ratio(Hh(f, s + 1), Hh(grad_f))
    out["homogeneous-vs-nonhomogeneous"] = _ratio(Hh(f), H(f))
    out["product-tame"] = _ratio(H(fg), H(f) * inf_g + H(g) * inf_f)
    out["product-tame-homogeneous"] = _ratio(Hh(fg), Hh(f) * inf_g + Hh(g) * inf_f)
    out["product-algebra"] = _ratio(H(fg), H(f) * H(g))
    frac = sp.compose_pointwise(f, lambda x: x / (1.0 + x))
    out["composition"] = _ratio(H(frac), H(f))
    out["composition-homogeneous"] = _ratio(Hh(frac), Hh(f))
    ch = lambda x: np.cosh(x) - 1.0  # noqa: E731
    diff = sp.compose_pointwise(f, ch) - sp.compose_pointwise(g, ch)
    out["composition-difference"] = _ratio(H(diff), H(f - g) * (H(f) + H(g)))
    # commutator: per block ratio scaled by 2^{j(s+1)}
    grad_u = SpectralField(u.grid, np.concatenate([sp.gradient(u.component(i)).coeffs for i in range(u.components)]))
    den_comm = H(grad_u, s + 1) * H(f, s + 1)
    r_comm = np.array([2.0 ** (j * (s + 1)) * _ratio(sp.l2_norm(commutator(u, f, j, frame)), den_comm) for j in frame.blocks])
    # transport-divergence integral, j >= 0
    den_transport = H(f, s + 1) * (H(grad_f) ** 2 + H(grad_u, s + 1) ** 2)
    r_transport = np.array([2.0 ** (2 * j * s) * _ratio(abs(transport_integral(f, u, j, frame)), den_transport)
                   for j in range(0, frame.j_max + 1)])
    out["commutator"] = float(r_comm.max())
    out["transport"] = float(r_transport.max())
    return out, r_comm, r_transport


@dataclass
class LemmaRow:
    lemma: str
    max_ratio: float
    witness: int
    witness_path: str = ""


@dataclass
class MeasuredConstantsReport:
    spec: RandomFieldEnsembleSpec
    rows: list[LemmaRow]
    commutator_by_block: np.ndarray  # max over ensemble of the scaled ratio, j = -1 .. j_max
    transport_by_block: np.ndarray  # j = 0 .. j_max
    all_ratios: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def ratio(self, lemma: str) -> float:
        return next(r.max_ratio for r in self.rows if r.lemma == lemma)

    @property
    def commutator_j_stable(self) -> bool:
        """Max scaled commutator ratio over ``j >= 5`` within twice the max over ``j < 5``."""
        by_j = self.commutator_by_block  # index 0 is j = -1
        low, high = by_j[: J_SPLIT + 1], by_j[J_SPLIT + 1 :]
        if high.size == 0:
            raise ValueError(f"grid has no blocks j >= {J_SPLIT}; use n >= 64")
        return bool(high.max() <= 2 * low.max())

    @property
    def all_finite(self) -> bool:
        return all(math.isfinite(r.max_ratio) for r in self.rows)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lemma", "seed", "size", "max_ratio", "witness_snapshot"])
            for r in self.rows:
                w.writerow([r.lemma, self.spec.seed, self.spec.size, repr(r.max_ratio), r.witness_path])
        return path


def lemma_suite(spec: RandomFieldEnsembleSpec, frame: LPFrame | None = None,
                witness_dir: str | Path | None = None) -> MeasuredConstantsReport:
    """Measure every inequality over the ensemble; optionally save witness snapshots."""
    grid = spec.grid
    frame = frame or build_frame(grid)
    if frame.grid != grid:
        raise ValueError("frame does not match the ensemble grid")
    ratios: dict[str, list[float]] = {}
    comm_all, transport_all = [], []
    for i in range(spec.size):
        vals, r_comm, r_transport = _measure(ensemble_member(spec, i), spec, frame)
        for k, v in vals.items():
            ratios.setdefault(k, []).append(v)
        comm_all.append(r_comm)
        transport_all.append(r_transport)
    arrays = {k: np.array(v) for k, v in ratios.items()}
    rows = []
    for k, v in arrays.items():
        i = int(np.argmax(v))
        row = LemmaRow(k, float(v[i]), i)
        if witness_dir is not None:
            snap = Snapshot(grid, ensemble_member(spec, i).stacked(), spec.sigma, 0.0, 0.0)
            row.witness_path = str(write_snapshot(Path(witness_dir) / f"witness-{k}.fnss", snap))
        rows.append(row)
    return MeasuredConstantsReport(spec, rows, np.max(comm_all, axis=0), np.max(transport_all, axis=0), arrays)
