"""Synthesis of qutrit (ternary) quantum circuits by recursive cosine-sine decomposition."""

from .circuit_ir import (
    Circuit,
    MSControlled,
    SingleQutrit,
    UniformlyControlledGate,
    UniformlyControlledRotation,
    apply,
    circuit_to_matrix,
    deserialize,
    gate_counts,
    gate_to_matrix,
    serialize,
)
from .csd import CSDFactors, TernaryCSDFactors, csd_general, csd_square, ternary_csd
from .errors import DimensionError, FormatError, NotUnitaryError, QutritSynthError, WireError
from .matrix_core import haar_random_unitary
from .synthesis import lower_circuit, synthesize_structured, verify

__version__ = "0.1.0"

__all__ = [
    "CSDFactors",
    "Circuit",
    "DimensionError",
    "FormatError",
    "MSControlled",
    "NotUnitaryError",
    "QutritSynthError",
    "SingleQutrit",
    "TernaryCSDFactors",
    "UniformlyControlledGate",
    "UniformlyControlledRotation",
    "WireError",
    "apply",
    "circuit_to_matrix",
    "csd_general",
    "csd_square",
    "deserialize",
    "gate_counts",
    "gate_to_matrix",
    "haar_random_unitary",
    "lower_circuit",
    "serialize",
    "synthesize_structured",
    "ternary_csd",
    "verify",
]
