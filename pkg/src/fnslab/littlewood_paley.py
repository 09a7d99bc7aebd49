"""
Dyadic Littlewood-Paley frame on the lattice and blockwise Sobolev norms.

The ball cutoff ``chi`` equals 1 for ``|xi| <= 3/4`` and 0 for ``|xi| >= 4/3``
with an ``exp(-1/x)`` smooth monotone bridge in between; the ring cutoff is
``phi(xi) = chi(xi/2) - chi(xi)``. Partition sums telescope, so
``chi + sum_{j>=0} phi(2^-j .) = 1`` holds on the lattice up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import Grid, SpectralField

BALL_INNER = 3.0 / 4.0
BALL_OUTER = 4.0 / 3.0
RING_OUTER = 8.0 / 3.0


def _h(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``, monotone between."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    a, b = _h(x), _h(1.0 - x)
    return a / (a + b)


def chi_profile(r: np.ndarray) -> np.ndarray:
    return smooth_step((BALL_OUTER - np.asarray(r, dtype=float)) / (BALL_OUTER - BALL_INNER))


def phi_profile(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return chi_profile(r / 2.0) - chi_profile(r)


@dataclass(eq=False)
class LPFrame:
    """Tabulated cutoffs for one grid.

    ``chi`` and ``phi[j]`` (for ``j = 0 .. j_max``) are arrays on the lattice.
    Homogeneous blocks run from ``j_min_hom`` to ``j_max``.
    """

    grid: Grid
    chi: np.ndarray
    phi: list[np.ndarray]
    j_max: int
    j_min_hom: int
    _hom: dict = field(default_factory=dict, repr=False)
    _weights: dict = field(default_factory=dict, repr=False)

    @property
    def blocks(self) -> range:
        return range(-1, self.j_max + 1)

    @property
    def hom_blocks(self) -> range:
        return range(self.j_min_hom, self.j_max + 1)

    def weight(self, j: int) -> np.ndarray:
        if j < -1 or j > self.j_max:
            raise ValueError(f"block index {j} outside [-1, {self.j_max}]")
        return self.chi if j == -1 else self.phi[j]

    def hom_weight(self, j: int) -> np.ndarray:
        if j < self.j_min_hom or j > self.j_max:
            raise ValueError(f"homogeneous block {j} outside [{self.j_min_hom}, {self.j_max}]")
        if j >= 0:
            return self.phi[j]
        if j not in self._hom:
            self._hom[j] = phi_profile(self.grid.kabs * 2.0**-j)
        return self._hom[j]

    def partition_sum(self) -> np.ndarray:
        return self.chi + np.sum(self.phi, axis=0)

    def sobolev_weight(self, s: float) -> np.ndarray:
        """``sum_j 2^{2js} w_j(k)^2`` tabulated on the lattice."""
        key = ("inh", float(s))
        if key not in self._weights:
            w = 2.0 ** (-2 * s) * self.chi**2
            for j, p in enumerate(self.phi):
                w = w + 2.0 ** (2 * j * s) * p**2
            self._weights[key] = w
        return self._weights[key]

    def homogeneous_weight(self, s: float) -> np.ndarray:
        key = ("hom", float(s))
        if key not in self._weights:
            w = np.zeros(self.grid.shape)
            for j in self.hom_blocks:
                w = w + 2.0 ** (2 * j * s) * self.hom_weight(j) ** 2
            self._weights[key] = w
        return self._weights[key]


def build_frame(grid: Grid) -> LPFrame:
    kabs = grid.kabs
    r_max = float(kabs.max())
    k_min = float(kabs[kabs > 0].min())
    # 2^j_max * 3/4 <= r_max < 2^(j_max+1) * 3/4
    j_max = int(math.floor(math.log2(r_max / BALL_INNER)))
    j_min_hom = int(math.floor(math.log2(k_min / RING_OUTER))) + 1
    chi = chi_profile(kabs)
    phi = [phi_profile(kabs * 2.0**-j) for j in range(j_max + 1)]
    return LPFrame(grid, chi, phi, j_max, j_min_hom)


def dyadic_block(f: SpectralField, j: int, frame: LPFrame) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * frame.weight(j))


def homogeneous_block(f: SpectralField, j: int, frame: LPFrame) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * frame.hom_weight(j))


def dyadic_spectrum(f: SpectralField, frame: LPFrame) -> np.ndarray:
    """Per-block L2 norms for ``j = -1 .. j_max``."""
    vol = f.grid.volume
    power = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    return np.array([math.sqrt(np.sum(frame.weight(j) ** 2 * power) / vol) for j in frame.blocks])


def weighted_sum(coeffs: np.ndarray, weight: np.ndarray, volume: float) -> float:
    return float(np.sum(weight * np.sum(np.abs(coeffs) ** 2, axis=0)) / volume)


def sobolev_norm(f: SpectralField, s: float, frame: LPFrame) -> float:
    """Nonhomogeneous dyadic norm ``(sum_{j>=-1} 2^{2js} ||Delta_j f||^2)^(1/2)``."""
    return math.sqrt(weighted_sum(f.coeffs, frame.sobolev_weight(s), f.grid.volume))


def homogeneous_norm(f: SpectralField, s: float, frame: LPFrame) -> float:
    """Homogeneous dyadic norm; the ``k = 0`` coefficient never contributes."""
    return math.sqrt(weighted_sum(f.coeffs, frame.homogeneous_weight(s), f.grid.volume))


def direct_weighted_norm(f: SpectralField, s: float) -> float:
    """``(sum_k (1 + |k|^2)^s |f_hat(k)|^2 / V)^(1/2)``, the classical Bessel-potential norm."""
    g = f.grid
    return math.sqrt(weighted_sum(f.coeffs, (1.0 + g.ksq) ** s, g.volume))
