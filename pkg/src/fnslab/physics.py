"""
Right-hand sides of the perturbed Navier-Stokes-Fourier system.

Unknowns are the density perturbation ``rho`` (total density ``rho + 1``),
velocity ``u`` and temperature ``theta``. The linear part is

    d rho/dt   = -div u
    d u/dt     = mu(1) (lap u + grad div u) - grad rho - grad theta
    d theta/dt = kappa lap theta

and the nonlinear remainders ``G1, G2, G3`` are evaluated pointwise on an
oversampled grid. Two independent assembly routes exist: the term-by-term
F-form (``eval_F1``/``eval_F2`` plus convective products) and the fused
G-form used by the time integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import spectral as sp
from .kernels import get_backend
from .spectral import Grid, SpectralField

VACUUM_FLOOR = 0.25

Law = Callable[[np.ndarray], np.ndarray]


class GuardBreach(ValueError):
    """Raised when a state approaches vacuum (``min(rho + 1)`` below the floor)."""

    def __init__(self, min_density: float, floor: float = VACUUM_FLOOR):
        super().__init__(f"min(rho + 1) = {min_density:.6g} is below the floor {floor}")
        self.min_density = min_density
        self.floor = floor


@dataclass(frozen=True)
class Constitutive:
    """Scalar laws. ``mu``, ``mu_prime`` and ``Pe_prime`` take the total
    density ``rho + 1``; ``kappa_fn`` and ``kappa_prime`` take ``theta``."""

    name: str
    mu: Law
    mu_prime: Law
    Pe_prime: Law
    kappa_fn: Law
    kappa_prime: Law

    def __post_init__(self):
        if not self.mu1 > 0:
            raise ValueError(f"mu(1) must be positive, got {self.mu1}")
        if abs(self.pe_prime_at_1 - 1.0) > 1e-12:
            raise ValueError(f"Pe'(1) must equal 1, got {self.pe_prime_at_1}")
        if not self.kappa0 > 0:
            raise ValueError(f"kappa(0) must be positive, got {self.kappa0}")

    @property
    def mu1(self) -> float:
        return float(np.asarray(self.mu(np.array([1.0])))[0])

    @property
    def pe_prime_at_1(self) -> float:
        return float(np.asarray(self.Pe_prime(np.array([1.0])))[0])

    @property
    def kappa0(self) -> float:
        return float(np.asarray(self.kappa_fn(np.array([0.0])))[0])


def polynomial_laws(
    name: str,
    mu_coeffs: Sequence[float],
    pe_prime_coeffs: Sequence[float],
    kappa_coeffs: Sequence[float],
) -> Constitutive:
    """Laws given by ascending power-series coefficients."""
    mu_c = np.asarray(mu_coeffs, dtype=float)
    pe_c = np.asarray(pe_prime_coeffs, dtype=float)
    ka_c = np.asarray(kappa_coeffs, dtype=float)
    dmu_c = P.polyder(mu_c) if mu_c.size > 1 else np.zeros(1)
    dka_c = P.polyder(ka_c) if ka_c.size > 1 else np.zeros(1)

    def law(c):
        return lambda x: P.polyval(x, c) + np.zeros_like(x)

    return Constitutive(name, law(mu_c), law(dmu_c), law(pe_c), law(ka_c), law(dka_c))


PRESETS = {
    # mu = 1, Pe(x) = x, kappa(theta) = 1 + theta^2
    "const-mu": dict(mu_coeffs=[1.0], pe_prime_coeffs=[1.0], kappa_coeffs=[1.0, 0.0, 1.0]),
    # mu(x) = x exercises the mu' terms
    "linear-mu": dict(mu_coeffs=[0.0, 1.0], pe_prime_coeffs=[1.0], kappa_coeffs=[1.0, 0.0, 1.0]),
}


def get_laws(name: str = "const-mu") -> Constitutive:
    try:
        return polynomial_laws(name, **PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown constitutive preset {name!r}; have {sorted(PRESETS)}") from None


def resolve_laws(laws: "str | Constitutive | None") -> Constitutive:
    """Preset name, ready-made laws, or ``None`` for the default preset."""
    if laws is None:
        return get_laws()
    if isinstance(laws, Constitutive):
        return laws
    return get_laws(laws)


@dataclass(frozen=True, eq=False)
class FlowState:
    rho: SpectralField
    u: SpectralField
    theta: SpectralField
    t: float = 0.0

    def __post_init__(self):
        g = self.rho.grid
        if self.u.grid != g or self.theta.grid != g:
            raise ValueError("state fields live on different grids")
        if self.rho.components != 1 or self.theta.components != 1 or self.u.components != g.d:
            raise ValueError("rho and theta must be scalar and u a d-vector")
        if self.t < 0:
            raise ValueError("time must be nonnegative")

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "FlowState":
        return cls(SpectralField.zeros(grid), SpectralField.zeros(grid, grid.d), SpectralField.zeros(grid), t)

    def pack(self) -> np.ndarray:
        """Stack as one array of shape ``(d + 2, n, ..., n)``: rho, u_1..u_d, theta."""
        return np.concatenate([self.rho.coeffs, self.u.coeffs, self.theta.coeffs])

    @classmethod
    def unpack(cls, grid: Grid, X: np.ndarray, t: float = 0.0) -> "FlowState":
        d = grid.d
        return cls(SpectralField(grid, X[:1]), SpectralField(grid, X[1 : d + 1]), SpectralField(grid, X[d + 1 :]), t)

    def fields(self) -> tuple[SpectralField, SpectralField, SpectralField]:
        return self.rho, self.u, self.theta


@dataclass(frozen=True, eq=False)
class StateDerivative:
    rho: SpectralField
    u: SpectralField
    theta: SpectralField

    def pack(self) -> np.ndarray:
        return np.concatenate([self.rho.coeffs, self.u.coeffs, self.theta.coeffs])

    @classmethod
    def unpack(cls, grid: Grid, X: np.ndarray) -> "StateDerivative":
        d = grid.d
        return cls(SpectralField(grid, X[:1]), SpectralField(grid, X[1 : d + 1]), SpectralField(grid, X[d + 1 :]))

    def __add__(self, other: "StateDerivative") -> "StateDerivative":
        return StateDerivative(self.rho + other.rho, self.u + other.u, self.theta + other.theta)

    def __sub__(self, other: "StateDerivative") -> "StateDerivative":
        return StateDerivative(self.rho - other.rho, self.u - other.u, self.theta - other.theta)


# -- linear part ----------------------------------------------------------------


def _linear(X, k, ksq, mu1, kappa0):
    d = k.shape[0]
    rho, u, th = X[0], X[1 : d + 1], X[d + 1]
    kdotu = np.sum(k * u, axis=0)
    out = np.empty_like(X)
    out[0] = -1j * kdotu
    out[1 : d + 1] = -mu1 * (ksq * u + k * kdotu) - 1j * k * (rho + th)
    out[d + 1] = -kappa0 * ksq * th
    return out


def linear_packed(X: np.ndarray, grid: Grid, mu1: float, kappa0: float) -> np.ndarray:
    return _linear(X, grid.k, grid.ksq, mu1, kappa0) * grid.keep_mask


def eval_linear_rhs(state: FlowState, laws: Constitutive | None = None) -> StateDerivative:
    laws = laws or get_laws()
    g = state.grid
    return StateDerivative.unpack(g, linear_packed(state.pack(), g, laws.mu1, laws.kappa0))


def symbol_matrix(k: np.ndarray, mu1: float, kappa0: float) -> np.ndarray:
    """``(d+2) x (d+2)`` matrix ``A(k)`` with ``d/dt (rho, u, theta)_hat = A(k) (rho, u, theta)_hat``."""
    k = np.asarray(k, dtype=float)
    d = k.size
    ksq = float(k @ k)
    A = np.zeros((d + 2, d + 2), dtype=complex)
    A[0, 1 : d + 1] = -1j * k
    A[1 : d + 1, 0] = -1j * k
    A[1 : d + 1, d + 1] = -1j * k
    A[1 : d + 1, 1 : d + 1] = -mu1 * (ksq * np.eye(d) + np.outer(k, k))
    A[d + 1, d + 1] = -kappa0 * ksq
    return A


# -- pointwise nonlinearity ---------------------------------------------------


class _Sampled:
    """Physical samples of a state and its derivatives on an oversampled grid."""

    def __init__(self, B: np.ndarray, grid: Grid, ov: sp.Oversampler):
        d = grid.d
        k, ksq = ov.kb, ov.ksq_b
        ik = 1j * k
        rho, u, th = B[0], B[1 : d + 1], B[d + 1]
        kdotu = np.sum(k * u, axis=0)
        spec = [rho[None], th[None], u, ik * rho]
        spec.append((ik[None, :] * u[:, None]).reshape((d * d,) + ov.block_shape))
        spec += [ik * th, -ksq * u - k * kdotu, (-ksq * th)[None]]
        vals = ov.sample_block(np.concatenate(spec))
        npts = vals[0].size
        flat = vals.reshape(vals.shape[0], npts)
        self.npts = npts
        self.rho = flat[0]
        self.theta = flat[1]
        self.u = flat[2 : 2 + d]
        self.grad_rho = flat[2 + d : 2 + 2 * d]
        self.grad_u = flat[2 + 2 * d : 2 + 2 * d + d * d].reshape(d, d, npts)
        o = 2 + 2 * d + d * d
        self.grad_theta = flat[o : o + d]
        self.visc = flat[o + d : o + 2 * d]
        self.lap_theta = flat[o + 2 * d]


def check_density(rho_samples: np.ndarray, floor: float = VACUUM_FLOOR) -> float:
    m = float(np.min(rho_samples)) + 1.0
    if not m >= floor:
        raise GuardBreach(m, floor)
    return m


class NonlinearEvaluator:
    """Fused evaluation of ``(G1, G2, G3)`` on packed states.

    ``band`` restricts the oversampled grid to the retained frequency band
    (``|k_m| <= band``); inputs must then be band-limited.
    """

    def __init__(self, grid: Grid, laws: Constitutive, pad: float = sp.DEFAULT_PAD,
                 band: int | None = None, backend: str = "auto"):
        self.grid = grid
        self.laws = laws
        self.mu1 = laws.mu1
        self.kappa0 = laws.kappa0
        self.ov = sp.Oversampler(grid, pad, band)
        self.kernel = get_backend(backend).nonlinear_terms
        self.backend = backend

    def block(self, B: np.ndarray) -> np.ndarray:
        """Nonlinear terms on a band block (see ``Oversampler``)."""
        d, laws, ov = self.grid.d, self.laws, self.ov
        S = _Sampled(B, self.grid, ov)
        check_density(S.rho)
        r1 = S.rho + 1.0
        mass = np.empty((d, S.npts))
        mom = np.empty((d, S.npts))
        heat = np.empty(S.npts)
        self.kernel(
            np.ascontiguousarray(S.rho), np.ascontiguousarray(S.theta),
            np.ascontiguousarray(S.u), np.ascontiguousarray(S.grad_rho),
            np.ascontiguousarray(S.grad_u), np.ascontiguousarray(S.grad_theta),
            np.ascontiguousarray(S.visc), np.ascontiguousarray(S.lap_theta),
            laws.mu(r1), laws.mu_prime(r1), laws.Pe_prime(r1),
            laws.kappa_fn(S.theta), laws.kappa_prime(S.theta),
            self.mu1, self.kappa0, mass, mom, heat,
        )
        phys = np.concatenate([mass, mom, heat[None]]).reshape((2 * d + 1,) + ov.fine_shape)
        spec = ov.project_block(phys)
        out = np.empty((d + 2,) + ov.block_shape, dtype=complex)
        out[0] = -1j * np.sum(ov.kb * spec[:d], axis=0)
        out[1:] = spec[d:]
        return out

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.ov.scatter(self.block(self.ov.extract(X)))


def eval_G_terms(state: FlowState, laws: Constitutive | None = None, pad: float = sp.DEFAULT_PAD,
                 backend: str = "auto") -> tuple[SpectralField, SpectralField, SpectralField]:
    """Untruncated nonlinear remainders ``G1 = -div(rho u)``, ``G2``, ``G3``."""
    laws = laws or get_laws()
    g = state.grid
    out = NonlinearEvaluator(g, laws, pad, backend=backend)(state.pack())
    d = g.d
    return SpectralField(g, out[:1]), SpectralField(g, out[1 : d + 1]), SpectralField(g, out[d + 1 :])


# -- F-form, term by term -------------------------------------------------------


def _fform_samples(state: FlowState, pad: float):
    g = state.grid
    ov = sp.oversampler(g, float(pad))
    S = _Sampled(ov.extract(state.pack()), g, ov)
    check_density(S.rho)
    return g, ov, S


def F1_terms(state: FlowState, laws: Constitutive | None = None, pad: float = sp.DEFAULT_PAD) -> dict:
    """The four summands of ``F1`` as separately projected vector fields."""
    laws = laws or get_laws()
    g, ov, S = _fform_samples(state, pad)
    shape = (g.d,) + ov.fine_shape
    r1 = 1.0 + S.rho
    strain = S.grad_u + np.swapaxes(S.grad_u, 0, 1)
    terms = {
        "viscosity": (laws.mu(r1) / r1 - laws.mu1) * S.visc,
        "thermal": (S.theta / r1) * S.grad_rho,
        "strain": (laws.mu_prime(r1) / r1) * np.einsum("ijn,jn->in", strain, S.grad_rho),
        "pressure": -(laws.Pe_prime(r1) - 1.0) * S.grad_rho,
    }
    return {name: SpectralField(g, ov.project(v.reshape(shape))) for name, v in terms.items()}


def F2_terms(state: FlowState, laws: Constitutive | None = None, pad: float = sp.DEFAULT_PAD) -> dict:
    laws = laws or get_laws()
    g, ov, S = _fform_samples(state, pad)
    shape = (1,) + ov.fine_shape
    r1 = 1.0 + S.rho
    strain = S.grad_u + np.swapaxes(S.grad_u, 0, 1)
    terms = {
        "conduction": (laws.kappa_fn(S.theta) / r1 - laws.kappa0) * S.lap_theta,
        "dissipation": (laws.mu(r1) / r1) * np.einsum("ijn,ijn->n", strain, S.grad_u),
        "compression": -S.theta * np.trace(S.grad_u),
        "conductivity": (laws.kappa_prime(S.theta) / r1) * np.sum(S.grad_theta**2, axis=0),
    }
    return {name: SpectralField(g, ov.project(v.reshape(shape))) for name, v in terms.items()}


def _sum_fields(fields):
    it = iter(fields)
    total = next(it)
    for f in it:
        total = total + f
    return total


def eval_F1(state: FlowState, laws: Constitutive | None = None, pad: float = sp.DEFAULT_PAD) -> SpectralField:
    return _sum_fields(F1_terms(state, laws, pad).values())


def eval_F2(state: FlowState, laws: Constitutive | None = None, pad: float = sp.DEFAULT_PAD) -> SpectralField:
    return _sum_fields(F2_terms(state, laws, pad).values())


def advect(u: SpectralField, f: SpectralField, pad: float = sp.DEFAULT_PAD) -> SpectralField:
    """``u . grad f`` for scalar ``f`` or componentwise for vector ``f``."""
    g = u.grid
    parts = []
    for m in range(f.components):
        grad = sp.gradient(f.component(m))
        acc = None
        for j in range(g.d):
            term = sp.pointwise_product(u.component(j), grad.component(j), pad)
            acc = term if acc is None else acc + term
        parts.append(acc.coeffs)
    return SpectralField(g, np.concatenate(parts))


def eval_full_rhs_fform(state: FlowState, laws: Constitutive | None = None,
                        pad: float = sp.DEFAULT_PAD) -> StateDerivative:
    """Untruncated right-hand side assembled from ``F1``, ``F2`` and convective products."""
    laws = laws or get_laws()
    rho, u, th = state.fields()
    lin = eval_linear_rhs(state, laws)
    drho = lin.rho - sp.divergence(sp.pointwise_product(rho, u, pad))
    du = lin.u - advect(u, u, pad) + eval_F1(state, laws, pad)
    dth = lin.theta - advect(u, th, pad) + eval_F2(state, laws, pad)
    return StateDerivative(drho, du, dth)


# -- Friedrich system -------------------------------------------------------------


def friedrich_band(grid: Grid, eps: float) -> int:
    """Largest ``|k_m|`` kept by the cutoff ``|k| <= 1/eps`` on this lattice."""
    kmax = math.floor((1.0 / eps) * (1 + 1e-12) / (2 * math.pi / grid.box_length))
    return min(grid.n // 2 - 1, kmax)


class LinearRHS:
    """Linear dynamics on the full lattice.

    Right-hand-side objects share one protocol used by the integrator:
    ``to_work``/``from_work`` convert packed lattice coefficients to the
    evolved representation, ``symmetrize`` restores real-field symmetry,
    and calling the object evaluates the derivative in work coordinates.
    """

    def __init__(self, grid: Grid, laws: Constitutive | None = None):
        laws = laws or get_laws()
        self.grid, self.laws = grid, laws
        self.mu1, self.kappa0 = laws.mu1, laws.kappa0

    def to_work(self, X: np.ndarray) -> np.ndarray:
        return X * self.grid.keep_mask

    def from_work(self, W: np.ndarray) -> np.ndarray:
        return W

    def symmetrize(self, W: np.ndarray) -> np.ndarray:
        return sp.symmetrize(W, self.grid)

    def __call__(self, t: float, W: np.ndarray) -> np.ndarray:
        return linear_packed(W, self.grid, self.mu1, self.kappa0)


class FriedrichRHS:
    """Frequency-truncated system; evolves the retained band block only.

    Nonlinear terms are evaluated on truncated fields and wrapped in an outer
    truncation; linear terms act on the truncated fields directly.
    """

    def __init__(self, grid: Grid, eps: float, laws: Constitutive | None = None,
                 pad: float = sp.DEFAULT_PAD, backend: str = "auto"):
        self.grid = grid
        self.eps = eps
        self.laws = laws or get_laws()
        self.mask = grid.truncation_mask(eps)
        self.nonlinear = NonlinearEvaluator(grid, self.laws, pad, friedrich_band(grid, eps), backend)
        ov = self.ov = self.nonlinear.ov
        self.mask_b = ov.extract(self.mask[None])[0]
        self.mu1, self.kappa0 = self.laws.mu1, self.laws.kappa0
        self._plane = (slice(None),) + (slice(None),) * (grid.d - 1) + (0,)
        self._flip = tuple(slice(None, None, -1) for _ in range(grid.d - 1))

    def to_work(self, X: np.ndarray) -> np.ndarray:
        return self.ov.extract(X) * self.mask_b

    def from_work(self, W: np.ndarray) -> np.ndarray:
        return self.ov.scatter(W)

    def symmetrize(self, W: np.ndarray) -> np.ndarray:
        # only the k_last = 0 plane carries an internal Hermitian constraint
        W = W.copy()
        plane = W[self._plane]
        W[self._plane] = 0.5 * (plane + np.conj(plane[(slice(None),) + self._flip]))
        return W

    def __call__(self, t: float, W: np.ndarray) -> np.ndarray:
        We = W * self.mask_b
        lin = _linear(We, self.ov.kb, self.ov.ksq_b, self.mu1, self.kappa0)
        return lin + self.nonlinear.block(We) * self.mask_b

    def full(self, X: np.ndarray) -> np.ndarray:
        """Derivative of a packed full-lattice state, as full-lattice coefficients."""
        Xe = X * self.mask
        return linear_packed(Xe, self.grid, self.mu1, self.kappa0) + self.nonlinear(Xe) * self.mask


def eval_friedrich_rhs(state: FlowState, eps: float, laws: Constitutive | None = None,
                       pad: float = sp.DEFAULT_PAD, backend: str = "auto") -> StateDerivative:
    rhs = FriedrichRHS(state.grid, eps, laws, pad, backend)
    return StateDerivative.unpack(state.grid, rhs.full(state.pack()))
