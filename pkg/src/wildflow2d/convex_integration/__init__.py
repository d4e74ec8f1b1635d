"""Iteration core: parameters, level-0 pair, mollification, amplitudes, perturbation and assembly."""
from .amplitude import AmplitudePath, amplitude, amplitude_path, chi, rho
from .fields import InvariantError
from .initial import check_level_zero, initial_pair, level_zero_residual
from .iterate import StepOptions, iterate_step, oscillation_norms
from .mollify import Mollified, mollify_step
from .params import (
    ConstraintViolation,
    LevelBlocks,
    ParamSet,
    check_constraints,
    default_eta,
    derive_parameters,
    eta_interval,
    m_star,
    p_star,
)
from .perturbation import BlockBank, Perturbation, perturbation
from .reynolds import assemble, oscillation, oscillation_identity, orbits, pair_identity_defect
from .state import IterationState

__all__ = [
    "AmplitudePath", "amplitude", "amplitude_path", "chi", "rho", "InvariantError", "check_level_zero",
    "initial_pair", "level_zero_residual", "StepOptions", "iterate_step", "oscillation_norms", "Mollified", "mollify_step",
    "ConstraintViolation", "LevelBlocks", "ParamSet", "check_constraints", "default_eta",
    "derive_parameters", "eta_interval", "m_star", "p_star", "BlockBank", "Perturbation", "perturbation",
    "assemble", "oscillation", "oscillation_identity", "orbits", "pair_identity_defect", "IterationState",
]
