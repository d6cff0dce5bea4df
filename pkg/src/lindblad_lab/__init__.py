"""Analytic and numerical solutions of the Lindblad master equation.

Submodules cover the damped oscillator (``model``, ``moments``, ``charfun``,
``quasiprob``, ``wigner``, ``fock``), two coupled oscillators (``twoosc``),
angular momentum (``angmom``), dissipative tunneling (``tunnel``) and a
two-level atom in a field (``optics``). ``scenarios`` and ``cli`` drive them
from JSON configs.
"""
from . import angmom, charfun, fock, model, moments, optics, quasiprob, tunnel, twoosc, wigner
from .errors import (
    ConfigurationError,
    ConsistencyError,
    CriticalDampingFallback,
    DegenerateCaseError,
    LindbladLabError,
    NoSteadyStateError,
    SingularOperatingPointError,
    TruncationError,
)
from .model import OscillatorModel

__version__ = "0.1.0"

__all__ = [
    "angmom",
    "charfun",
    "fock",
    "model",
    "moments",
    "optics",
    "quasiprob",
    "tunnel",
    "twoosc",
    "wigner",
    "OscillatorModel",
    "LindbladLabError",
    "ConfigurationError",
    "NoSteadyStateError",
    "DegenerateCaseError",
    "TruncationError",
    "ConsistencyError",
    "SingularOperatingPointError",
    "CriticalDampingFallback",
]
