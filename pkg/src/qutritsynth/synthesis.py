"""Recursive CSD synthesis, lowering passes and verification.

``synthesize_structured`` turns a ``3**n`` unitary into multiplexers
(:class:`UniformlyControlledGate`) and uniformly controlled rotations.
The recursion keeps a table of same-sized blocks, one per setting of the
wires already peeled off. Each level applies :func:`ternary_csd` to every
table entry; matching multiplexer factors merge into a table with one more
control wire, while the rotation factors become rotation gates on the
current top wire controlled by every other wire.

``lower_circuit`` expands singly controlled gates into shifts and
Muthukrishnan-Stroud (MS) gates, which fire when the control is |2>::

    +2 (ctrl), MS(t0), +1, +1, MS(t1), +2, MS(t2)

Control value ``v`` reaches |2> at the first MS for ``v = 0``, the second for
``v = 1`` and the third for ``v = 2``; the shifts sum to 6 = 0 mod 3.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit_ir import (
    Circuit,
    Gate,
    MSControlled,
    SingleQutrit,
    UniformlyControlledGate,
    UniformlyControlledRotation,
    circuit_to_matrix,
    shift,
)
from .csd import TernaryCSDFactors, ternary_csd
from .errors import DimensionError
from .matrix_core import STACKED_CSD_TOL, UNITARITY_TOL, check_unitary, frobenius_distance, qutrit_count, r01, r12

log = logging.getLogger(__name__)

STRUCTURED = "structured"
ELEMENTARY = "elementary"
IDENTITY_ATOL = 1e-14


def synthesize_structured(W, *, parallel: bool = False, tol: float = UNITARITY_TOL) -> Circuit:
    """Synthesize ``W`` into a structured circuit.

    For ``n`` qutrits the output holds ``4**(n-1)`` multiplexers and
    ``4**(n-1) - 1`` rotations (a single one-qutrit gate when ``n == 1``).
    With ``parallel`` the per-level CSDs run in a thread pool; the emitted
    gate order does not change.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {W.shape}")
    n = qutrit_count(W.shape[0])
    check_unitary(W, tol, name="input")
    if parallel:
        with ThreadPoolExecutor() as pool:
            gates = _synth_table([W], 0, n, pool.map)
    else:
        gates = _synth_table([W], 0, n, map)
    return Circuit(n, tuple(gates))


def _synth_table(table: Sequence[np.ndarray], depth: int, n: int, mapper) -> list[Gate]:
    if depth == n - 1:
        if depth == 0:
            return [SingleQutrit(0, table[0])]
        return [UniformlyControlledGate(tuple(range(depth)), n - 1, tuple(table))]

    factors: list[TernaryCSDFactors] = list(mapper(ternary_csd, table))

    def merged(name: str) -> list[np.ndarray]:
        return [block for f in factors for block in getattr(f, name)]

    def rotation(name: str, axis: str) -> UniformlyControlledRotation:
        angles = np.concatenate([getattr(f, name) for f in factors])
        controls = tuple(range(depth)) + tuple(range(depth + 1, n))
        return UniformlyControlledRotation(controls, depth, axis, tuple(angles))

    # W = D1 MidX(sigma) D2 MidZ D3 MidX(gamma) D4, applied right to left.
    return (
        _synth_table(merged("D4"), depth + 1, n, mapper)
        + [rotation("gamma_x_thetas", "12")]
        + _synth_table(merged("D3"), depth + 1, n, mapper)
        + [rotation("mid_z_thetas", "01")]
        + _synth_table(merged("D2"), depth + 1, n, mapper)
        + [rotation("sigma_x_thetas", "12")]
        + _synth_table(merged("D1"), depth + 1, n, mapper)
    )


def _ms_ladder(control: int, target: int, payloads: Sequence[np.ndarray], optimize: bool) -> list[Gate]:
    def ms(u):
        if optimize and np.allclose(u, np.eye(3), rtol=0, atol=IDENTITY_ATOL):
            return []
        return [MSControlled(control, target, u)]

    return (
        [shift(control, 2)] + ms(payloads[0])
        + [shift(control, 1), shift(control, 1)] + ms(payloads[1])
        + [shift(control, 2)] + ms(payloads[2])
    )


def lower_ucg_single_control(g: UniformlyControlledGate, *, optimize: bool = False) -> list[Gate]:
    """Expand a one-control multiplexer into 4 shifts and 3 MS gates."""
    if len(g.controls) != 1:
        raise ValueError(f"expected exactly one control, got {len(g.controls)}")
    return _ms_ladder(g.controls[0], g.target, g.table, optimize)


def lower_ucr_single_control(g: UniformlyControlledRotation, *, optimize: bool = False) -> list[Gate]:
    """Expand a one-control rotation into 4 shifts and 3 MS rotation gates."""
    if len(g.controls) != 1:
        raise ValueError(f"expected exactly one control, got {len(g.controls)}")
    rot = r01 if g.axis == "01" else r12
    return _ms_ladder(g.controls[0], g.target, [rot(a) for a in g.angles], optimize)


def unlowered_gates(c: Circuit) -> list[tuple[int, Gate]]:
    """Gates with two or more controls, which have no elementary lowering."""
    return [
        (i, g) for i, g in enumerate(c.gates)
        if isinstance(g, (UniformlyControlledGate, UniformlyControlledRotation)) and len(g.controls) >= 2
    ]


def lower_circuit(c: Circuit, level: str = ELEMENTARY, *, optimize: bool = False) -> Circuit:
    """Lower ``c`` to ``level``.

    At ``"elementary"`` zero-control structured gates become single-qutrit
    gates and one-control ones become shift/MS ladders. Gates with more
    controls are kept and logged; see :func:`unlowered_gates`.
    """
    if level == STRUCTURED:
        return c
    if level != ELEMENTARY:
        raise ValueError(f"unknown level {level!r}; expected {STRUCTURED!r} or {ELEMENTARY!r}")
    out: list[Gate] = []
    for g in c.gates:
        if isinstance(g, UniformlyControlledGate) and not g.controls:
            out.append(SingleQutrit(g.target, g.table[0]))
        elif isinstance(g, UniformlyControlledRotation) and not g.controls:
            out.append(SingleQutrit(g.target, g.table_form()[2][0]))
        elif isinstance(g, UniformlyControlledGate) and len(g.controls) == 1:
            out.extend(lower_ucg_single_control(g, optimize=optimize))
        elif isinstance(g, UniformlyControlledRotation) and len(g.controls) == 1:
            out.extend(lower_ucr_single_control(g, optimize=optimize))
        else:
            out.append(g)
    lowered = Circuit(c.qutrits, tuple(out))
    skipped = unlowered_gates(lowered)
    if skipped:
        log.warning("%d gate(s) with >= 2 controls left structured", len(skipped))
    return lowered


@dataclass(frozen=True)
class VerifyReport:
    residual: float
    tol: float
    passed: bool


def default_tolerance(dim: int) -> float:
    return STACKED_CSD_TOL * dim


def verify(c: Circuit, W, tol: float | None = None) -> VerifyReport:
    """Compare ``circuit_to_matrix(c)`` against ``W`` in Frobenius norm."""
    W = np.asarray(W, dtype=complex)
    if W.shape != (c.dim, c.dim):
        raise DimensionError(f"circuit acts on dimension {c.dim}, unitary has shape {W.shape}")
    if tol is None:
        tol = default_tolerance(c.dim)
    residual = frobenius_distance(circuit_to_matrix(c), W)
    return VerifyReport(residual, tol, residual <= tol)
