"""Finite-temperature correlation lengths of the XXZ chain in a field.

Linear integral equations for the dressed functions, the non-linear integral
equations of the quantum transfer matrix for the dominant and excited states,
the effective momentum and energy, the low-temperature combinatorics, and the
free-fermion closed forms at delta = 0.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .model import DomainError, ModelParams, RegimeError
from .dressed import DressedData, dressed_quantities, find_fermi_boundary, solve_fredholm
from .nlie import ConvergenceError, ExcitationConfig, NlieSolution, solve_dominant, solve_excited
from .spectral import SpectralObservables, dominant_corrlen, leading_asymptote, observables
from .lowt import LowTConfig, delta0, minimize_im_delta0

__all__ = [
    "ConvergenceError", "DomainError", "DressedData", "ExcitationConfig", "LowTConfig", "ModelParams",
    "NlieSolution", "RegimeError", "SpectralObservables", "delta0", "dominant_corrlen",
    "dressed_quantities", "find_fermi_boundary", "leading_asymptote", "minimize_im_delta0",
    "observables", "solve_dominant", "solve_excited", "solve_fredholm",
]
