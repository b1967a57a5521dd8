"""Discrete verification of rough-kernel operator bounds on generalized weighted Morrey spaces."""
from . import functions, grid, harness, kernels, operators, spaces, weights
from .errors import (
    ConfigurationError, DomainError, GateError, KernelError, PreconditionError, RoughMorreyError,
)

__version__ = "0.1.0"

__all__ = [
    "functions", "grid", "harness", "kernels", "operators", "spaces", "weights",
    "ConfigurationError", "DomainError", "GateError", "KernelError", "PreconditionError", "RoughMorreyError",
]
