"""Pseudo-spectral Friedrich truncation laboratory for the compressible
Navier-Stokes-Fourier system on a periodic box."""

from .spectral import Grid, RealField, SpectralField
from .littlewood_paley import LPFrame, build_frame
from .physics import Constitutive, FlowState, GuardBreach, StateDerivative, get_laws
from .integrator import RunRecord, SolverConfig, integrate

__all__ = [
    "Grid",
    "RealField",
    "SpectralField",
    "LPFrame",
    "build_frame",
    "Constitutive",
    "FlowState",
    "GuardBreach",
    "StateDerivative",
    "get_laws",
    "RunRecord",
    "SolverConfig",
    "integrate",
]

__version__ = "0.1.0"
