"""
Fourier representation of real fields on the periodic box [0, L)^d.

Conventions
-----------
Coefficients follow ``f_hat(k) = (V / N) * fftn(f)`` with ``V = L**d`` and
``N = n**d``, so ``f(x) = (1/V) * sum_k f_hat(k) exp(i k.x)`` and
``||f||_{L2}^2 = (1/V) * sum_k |f_hat(k)|^2``. Arrays are stored in numpy FFT
order with a leading component axis: shape ``(components, n, ..., n)``.

Frequencies with any component equal to ``-n/2`` (the Nyquist rows) carry no
content through differential operators or pointwise products: they are zeroed
on output and ignored on input.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

HERMITIAN_TOL = 1e-12
DEFAULT_PAD = 2.0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per dimension."""

    d: int
    n: int
    box_length: float = 2 * math.pi

    def __post_init__(self):
        if self.d not in (2, 3, 4):
            raise ValueError(f"dimension must be 2, 3 or 4, got {self.d}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def volume(self) -> float:
        return self.box_length**self.d

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.d + 1))

    @cached_property
    def k1d(self) -> np.ndarray:
        return sfft.fftfreq(self.n, 1.0 / self.n) * (2 * math.pi / self.box_length)

    @cached_property
    def k(self) -> np.ndarray:
        """Wavevectors, shape ``(d, n, ..., n)``."""
        return np.stack(np.meshgrid(*([self.k1d] * self.d), indexing="ij"))

    @cached_property
    def ksq(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on lattice points with a component equal to ``-n/2``."""
        idx = np.indices(self.shape)
        return np.any(idx == self.n // 2, axis=0)

    @cached_property
    def keep_mask(self) -> np.ndarray:
        return ~self.nyquist_mask

    @cached_property
    def reflect_index(self) -> np.ndarray:
        return (-np.arange(self.n)) % self.n

    @cached_property
    def coords(self) -> np.ndarray:
        """Physical sample coordinates, shape ``(d, n, ..., n)``."""
        x = np.arange(self.n) * (self.box_length / self.n)
        return np.stack(np.meshgrid(*([x] * self.d), indexing="ij"))

    def reflect(self, coeffs: np.ndarray) -> np.ndarray:
        """Return ``c(-k)`` for an array with a leading component axis."""
        out = coeffs
        for ax in self.axes:
            out = np.take(out, self.reflect_index, axis=ax)
        return out

    def truncation_mask(self, eps: float) -> np.ndarray:
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps}")
        cutoff = 1.0 / eps
        return self.ksq <= cutoff * cutoff * (1 + 1e-12)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == self.grid.d:
            c = c[None]
        if c.shape[1:] != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        c = np.array(c, copy=True) if c is self.coeffs else c
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: Grid, components: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((components,) + grid.shape, dtype=complex))

    def component(self, m: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[m : m + 1])

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid or other.components != self.components:
            raise ValueError("fields live on different grids or have different ranks")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def mean(self) -> np.ndarray:
        """Physical-space mean of each component."""
        idx = (slice(None),) + (0,) * self.grid.d
        return self.coeffs[idx].real / self.grid.volume


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == self.grid.d:
            v = v[None]
        if v.shape[1:] != self.grid.shape:
            raise ValueError(f"value shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @property
    def components(self) -> int:
        return self.values.shape[0]


def hermitian_residual(coeffs: np.ndarray, grid: Grid) -> float:
    """Max of ``|c(k) - conj(c(-k))|`` relative to ``max |c|`` (0 for a zero field)."""
    scale = np.max(np.abs(coeffs), initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(grid.reflect(coeffs)))) / scale)


def symmetrize(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return 0.5 * (coeffs + np.conj(grid.reflect(coeffs)))


def forward_dft(f: RealField) -> SpectralField:
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite sample values")
    g = f.grid
    coeffs = sfft.fftn(f.values, axes=g.axes) * (g.volume / g.size)
    return SpectralField(g, coeffs)


def inverse_dft(F: SpectralField, tol: float = HERMITIAN_TOL) -> RealField:
    g = F.grid
    res = hermitian_residual(F.coeffs, g)
    if res > tol:
        raise ValueError(f"coefficients are not Hermitian (residual {res:.3e})")
    values = sfft.ifftn(F.coeffs, axes=g.axes) * (g.size / g.volume)
    scale = np.max(np.abs(values), initial=0.0)
    if scale > 0 and np.max(np.abs(values.imag)) > max(tol, 1e-13) * scale * 10:
        raise ValueError("inverse transform has a non-negligible imaginary part")
    return RealField(g, values.real)


def l2_norm_sq(f: SpectralField) -> float:
    return float(np.sum(np.abs(f.coeffs) ** 2) / f.grid.volume)


def l2_norm(f: SpectralField) -> float:
    return math.sqrt(l2_norm_sq(f))


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """Real L2 pairing ``(f, g) = int f . g dx``."""
    f._check(g)
    return float(np.sum(f.coeffs * np.conj(g.coeffs)).real / f.grid.volume)


# -- differential operators ---------------------------------------------------


def _require_rank(f: SpectralField, rank: str):
    if rank == "scalar" and f.components != 1:
        raise ValueError(f"expected a scalar field, got {f.components} components")
    if rank == "vector" and f.components != f.grid.d:
        raise ValueError(f"expected a {f.grid.d}-vector field, got {f.components} components")


def gradient(f: SpectralField) -> SpectralField:
    _require_rank(f, "scalar")
    g = f.grid
    return SpectralField(g, 1j * g.k * f.coeffs[0] * g.keep_mask)


def divergence(v: SpectralField) -> SpectralField:
    _require_rank(v, "vector")
    g = v.grid
    return SpectralField(g, (1j * np.sum(g.k * v.coeffs, axis=0) * g.keep_mask)[None])


def laplacian(f: SpectralField) -> SpectralField:
    g = f.grid
    return SpectralField(g, -g.ksq * f.coeffs * g.keep_mask)


def grad_div(v: SpectralField) -> SpectralField:
    _require_rank(v, "vector")
    g = v.grid
    kdotv = np.sum(g.k * v.coeffs, axis=0)
    return SpectralField(g, -g.k * kdotv * g.keep_mask)


def truncate(f: SpectralField, eps: float) -> SpectralField:
    """Sharp Fourier cutoff keeping ``|k| <= 1/eps``."""
    return SpectralField(f.grid, f.coeffs * f.grid.truncation_mask(eps))


# -- oversampled physical grids ---------------------------------------------


def fine_size(n: int, pad: float, band: int | None = None) -> int:
    """Even FFT-friendly size of the product grid.

    ``band`` is the largest retained ``|k_m|``; ``None`` means the whole
    lattice. The size is at least ``pad * 2 * (band + 1)``, which is alias-free
    for quadratic products on the retained band when ``pad >= 1.5``.
    """
    if pad < 1:
        raise ValueError(f"pad must be >= 1, got {pad}")
    half = n // 2 if band is None else min(n // 2, band + 1)
    m = 2 * math.ceil(pad * half)
    while True:
        m = sfft.next_fast_len(m, real=True)
        if m % 2 == 0:
            return m
        m += 1


class Oversampler:
    """Moves band-limited lattice coefficients to and from a finer physical grid.

    Work happens on the *band block*: the half spectrum ``|k_m| <= band`` with
    nonnegative last component, shape ``(c, 2b+1, ..., 2b+1, b+1)``.
    """

    def __init__(self, grid: Grid, pad: float = DEFAULT_PAD, band: int | None = None):
        n = grid.n
        self.grid = grid
        self.band = n // 2 - 1 if band is None else min(int(band), n // 2 - 1)
        self.m = fine_size(n, pad, band)
        b = self.band
        freqs = np.arange(-b, b + 1)
        pos = np.arange(0, b + 1)
        lat, fine = freqs % n, freqs % self.m
        d = grid.d
        self._lat = np.ix_(*([lat] * (d - 1) + [pos]))
        self._fine = np.ix_(*([fine] * (d - 1) + [pos]))
        self._neg_last = n - np.arange(1, b + 1)
        self.fine_shape = (self.m,) * d
        self.block_shape = (2 * b + 1,) * (d - 1) + (b + 1,)
        self._half_shape = (self.m,) * (d - 1) + (self.m // 2 + 1,)
        self._axes = tuple(range(1, d + 1))
        self._to_phys = self.m**d / grid.volume
        self._to_spec = grid.volume / self.m**d
        # wavevectors on the band block
        self.kb = grid.k[(slice(None),) + self._lat]
        self.ksq_b = np.sum(self.kb**2, axis=0)

    def extract(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs[(slice(None),) + self._lat]

    def sample_block(self, block: np.ndarray) -> np.ndarray:
        half = np.zeros((block.shape[0],) + self._half_shape, dtype=complex)
        half[(slice(None),) + self._fine] = block
        return sfft.irfftn(half, s=self.fine_shape, axes=self._axes) * self._to_phys

    def project_block(self, values: np.ndarray) -> np.ndarray:
        r = sfft.rfftn(values, axes=self._axes)
        return r[(slice(None),) + self._fine] * self._to_spec

    def scatter(self, block: np.ndarray) -> np.ndarray:
        """Full Hermitian lattice coefficients from a band block."""
        g = self.grid
        out = np.zeros((block.shape[0],) + g.shape, dtype=complex)
        out[(slice(None),) + self._lat] = block
        b = self.band
        if b > 0:
            pos = out[..., 1 : b + 1]
            for ax in self._axes[:-1]:
                pos = np.take(pos, g.reflect_index, axis=ax)
            out[..., self._neg_last] = np.conj(pos)
        return out

    def sample(self, coeffs: np.ndarray) -> np.ndarray:
        """Physical values on the fine grid, shape ``(c, m, ..., m)``."""
        return self.sample_block(self.extract(coeffs))

    def project(self, values: np.ndarray) -> np.ndarray:
        """Lattice coefficients (band-limited, Hermitian) of fine-grid samples."""
        return self.scatter(self.project_block(values))

    def sample_field(self, f: SpectralField) -> np.ndarray:
        return self.sample(f.coeffs)


@functools.lru_cache(maxsize=64)
def oversampler(grid: Grid, pad: float = DEFAULT_PAD, band: int | None = None) -> Oversampler:
    return Oversampler(grid, pad, band)


def pointwise_product(a: SpectralField, b: SpectralField, pad: float = DEFAULT_PAD) -> SpectralField:
    """Product ``a * b`` (componentwise, or scalar times vector), projected to the lattice."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.components != b.components and 1 not in (a.components, b.components):
        raise ValueError("component counts are incompatible")
    ov = oversampler(a.grid, float(pad))
    return SpectralField(a.grid, ov.project(ov.sample(a.coeffs) * ov.sample(b.coeffs)))


def compose_pointwise(
    f: SpectralField, law: Callable[[np.ndarray], np.ndarray], pad: float = DEFAULT_PAD
) -> SpectralField:
    """Apply a scalar law to the samples of ``f`` on the oversampled grid."""
    ov = oversampler(f.grid, float(pad))
    samples = law(ov.sample(f.coeffs))
    if not np.all(np.isfinite(samples)):
        raise ValueError("law is undefined at some sample")
    return SpectralField(f.grid, ov.project(np.asarray(samples, dtype=float)))


def max_abs(f: SpectralField, pad: float = DEFAULT_PAD) -> float:
    """Sup norm estimated on the oversampled grid."""
    ov = oversampler(f.grid, float(pad))
    return float(np.max(np.abs(ov.sample(f.coeffs))))


def random_field(
    grid: Grid,
    rng: np.random.Generator,
    components: int = 1,
    band: float | None = None,
    decay: float = 0.0,
    mean_zero: bool = False,
) -> SpectralField:
    """Gaussian random real field, band-limited to ``|k| <= band`` with
    amplitude spectrum ``(1 + |k|^2)^(-decay/2)``. Nyquist rows are empty."""
    shape = (components,) + grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weight = (1 + grid.ksq) ** (-decay / 2) * grid.keep_mask
    if band is not None:
        weight = weight * (grid.kabs <= band)
    if mean_zero:
        weight = weight * (grid.ksq > 0)
    c = symmetrize(c * weight, grid) * grid.volume
    return SpectralField(grid, c)
