"""Spectral toolkit for convex integration of stochastic fractional Navier-Stokes on the 2-torus."""
from .spectral_field import GridError, TimeGrid, TorusField, norm, transform
from .building_blocks import BlockSpec, Direction, direction_set
from .geometry import OutOfDomainError, TraceFreeSym2, gamma
from .noise import NoiseSpectrum, NoisePath, simulate_scalar, simulate_z, stopping_time

__version__ = "0.1.0"

__all__ = [
    "GridError", "TimeGrid", "TorusField", "norm", "transform", "BlockSpec", "Direction", "direction_set",
    "OutOfDomainError", "TraceFreeSym2", "gamma", "NoiseSpectrum", "NoisePath", "simulate_scalar",
    "simulate_z", "stopping_time",
]
