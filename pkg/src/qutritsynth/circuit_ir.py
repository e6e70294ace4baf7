"""Gate-level intermediate representation for qutrit circuits.

Wire 0 is the most significant digit of a basis index: the product state
``|v0 v1 ... v_{n-1}>`` has index ``sum(v_j * 3**(n-1-j))``. Circuits are
application ordered, so ``circuit_to_matrix`` multiplies gate matrices in
reverse list order.

Every gate reduces to a *controlled table*: a list of control wires, one
target wire, and ``3**k`` one-qutrit unitaries indexed by the control
string (first listed control most significant).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import DimensionError, FormatError, NotUnitaryError, WireError
from .matrix_core import (
    SHIFT_PLUS_1,
    SHIFT_PLUS_2,
    UNITARITY_TOL,
    decode_complex_matrix,
    dumps,
    encode_complex_matrix,
    frozen,
    is_unitary,
    r01,
    r12,
)

AXES = ("01", "12")
_ROTATIONS = {"01": r01, "12": r12}
_EYE3 = frozen(np.eye(3))


def _qutrit_unitary(u, what: str) -> np.ndarray:
    u = frozen(u)
    if u.shape != (3, 3):
        raise DimensionError(f"{what}: expected a 3x3 matrix, got shape {u.shape}")
    if not is_unitary(u, UNITARITY_TOL):
        raise NotUnitaryError(f"{what}: matrix is not unitary")
    return u


def _check_wires(wires: tuple[int, ...]) -> None:
    if any(not isinstance(w, (int, np.integer)) or w < 0 for w in wires):
        raise WireError(f"wires must be non-negative integers, got {wires}")
    if len(set(wires)) != len(wires):
        raise WireError(f"wires must be distinct, got {wires}")


class Gate:
    """Common behaviour of all gate variants."""

    kind: str = ""

    @property
    def wires(self) -> tuple[int, ...]:
        controls, target, _ = self.table_form()
        return controls + (target,)

    def table_form(self) -> tuple[tuple[int, ...], int, tuple[np.ndarray, ...]]:
        raise NotImplementedError

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        a, b = self._key(), other._key()
        return len(a) == len(b) and all(_field_equal(x, y) for x, y in zip(a, b))

    def __hash__(self):
        return hash((type(self).__name__, self.wires))


def _field_equal(x, y) -> bool:
    if isinstance(x, tuple) and isinstance(y, tuple):
        return len(x) == len(y) and all(_field_equal(a, b) for a, b in zip(x, y))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.array_equal(x, y)
    return x == y


@dataclass(frozen=True, eq=False)
class SingleQutrit(Gate):
    wire: int
    u: np.ndarray
    kind = "single"

    def __post_init__(self):
        _check_wires((self.wire,))
        object.__setattr__(self, "u", _qutrit_unitary(self.u, "single-qutrit gate"))

    def table_form(self):
        return (), self.wire, (self.u,)

    def _key(self):
        return (self.wire, self.u)


@dataclass(frozen=True, eq=False)
class MSControlled(Gate):
    """Applies ``u`` to ``target`` iff ``control`` carries |2>."""

    control: int
    target: int
    u: np.ndarray
    kind = "ms"

    def __post_init__(self):
        _check_wires((self.control, self.target))
        object.__setattr__(self, "u", _qutrit_unitary(self.u, "MS gate"))

    def table_form(self):
        return (self.control,), self.target, (_EYE3, _EYE3, self.u)

    def _key(self):
        return (self.control, self.target, self.u)


@dataclass(frozen=True, eq=False)
class UniformlyControlledGate(Gate):
    """Multiplexer: ``table[idx]`` acts on ``target`` for control string ``idx``."""

    controls: tuple[int, ...]
    target: int
    table: tuple[np.ndarray, ...]
    kind = "ucg"

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        _check_wires(self.controls + (self.target,))
        if len(self.table) != 3 ** len(self.controls):
            raise DimensionError(
                f"multiplexer with {len(self.controls)} controls needs {3 ** len(self.controls)} "
                f"table entries, got {len(self.table)}"
            )
        table = tuple(_qutrit_unitary(u, f"multiplexer table[{i}]") for i, u in enumerate(self.table))
        object.__setattr__(self, "table", table)

    def table_form(self):
        return self.controls, self.target, self.table

    def _key(self):
        return (self.controls, self.target, self.table)


@dataclass(frozen=True, eq=False)
class UniformlyControlledRotation(Gate):
    """Rotation of ``target`` in plane ``axis`` by ``angles[idx]`` for control string ``idx``."""

    controls: tuple[int, ...]
    target: int
    axis: str
    angles: tuple[float, ...]
    kind = "ucr"

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        _check_wires(self.controls + (self.target,))
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.angles) != 3 ** len(self.controls):
            raise DimensionError(
                f"rotation with {len(self.controls)} controls needs {3 ** len(self.controls)} "
                f"angles, got {len(self.angles)}"
            )

    def table_form(self):
        rot = _ROTATIONS[self.axis]
        return self.controls, self.target, tuple(frozen(rot(a)) for a in self.angles)

    def _key(self):
        return (self.controls, self.target, self.axis, self.angles)


GateType = Union[SingleQutrit, MSControlled, UniformlyControlledGate, UniformlyControlledRotation]


def shift(wire: int, amount: int) -> SingleQutrit:
    """``|v> -> |v + amount mod 3>`` on ``wire``."""
    return SingleQutrit(wire, {1: SHIFT_PLUS_1, 2: SHIFT_PLUS_2}[amount % 3] if amount % 3 else _EYE3)


@dataclass(frozen=True)
class Circuit:
    qutrits: int
    gates: tuple[GateType, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.qutrits < 1:
            raise DimensionError(f"a circuit needs at least one qutrit, got {self.qutrits}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for i, g in enumerate(self.gates):
            if max(g.wires) >= self.qutrits:
                raise WireError(f"gates[{i}] uses wire {max(g.wires)} on a {self.qutrits}-qutrit circuit")

    @property
    def dim(self) -> int:
        return 3 ** self.qutrits

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


# -- matrix semantics -------------------------------------------------------

def gate_to_matrix(g: Gate, n: int) -> np.ndarray:
    """Dense ``3**n`` matrix of ``g`` built by basis-index arithmetic."""
    controls, target, table = g.table_form()
    if max(g.wires) >= n:
        raise WireError(f"gate on wires {g.wires} does not fit {n} qutrits")
    dim = 3 ** n
    cols = np.arange(dim)
    digits = (cols[:, None] // 3 ** (n - 1 - np.arange(n))) % 3
    ctrl_idx = np.zeros(dim, dtype=int)
    for c in controls:
        ctrl_idx = 3 * ctrl_idx + digits[:, c]
    t_in = digits[:, target]
    place = 3 ** (n - 1 - target)
    stack = np.asarray(table)
    out = np.zeros((dim, dim), dtype=complex)
    for t_out in range(3):
        rows = cols + (t_out - t_in) * place
        out[rows, cols] = stack[ctrl_idx, t_out, t_in]
    return out


def circuit_to_matrix(c: Circuit) -> np.ndarray:
    out = np.eye(c.dim, dtype=complex)
    for g in c.gates:
        out = gate_to_matrix(g, c.qutrits) @ out
    return out


def apply_gate(g: Gate, state: np.ndarray, n: int) -> np.ndarray:
    controls, target, table = g.table_form()
    k = len(controls)
    psi = np.asarray(state, dtype=complex).reshape((3,) * n)
    rest = [w for w in range(n) if w not in controls and w != target]
    perm = list(controls) + [target] + rest
    moved = np.transpose(psi, perm).reshape(3 ** k, 3, -1)
    out = np.einsum("cij,cjr->cir", np.asarray(table), moved)
    out = out.reshape((3,) * n)
    return np.transpose(out, np.argsort(perm)).reshape(-1)


def apply(c: Circuit, state) -> np.ndarray:
    """Statevector simulation, gate by gate."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (c.dim,):
        raise DimensionError(f"state has shape {state.shape}, circuit expects ({c.dim},)")
    for g in c.gates:
        state = apply_gate(g, state, c.qutrits)
    return state


# -- counting ---------------------------------------------------------------

def is_shift(g: Gate) -> bool:
    return isinstance(g, SingleQutrit) and (
        np.array_equal(g.u, SHIFT_PLUS_1) or np.array_equal(g.u, SHIFT_PLUS_2)
    )


def _is_planar_rotation(u: np.ndarray, atol: float = 1e-14) -> bool:
    if np.allclose(u, _EYE3, rtol=0, atol=atol) or np.abs(u.imag).max() > atol:
        return False
    for axis, rot in _ROTATIONS.items():
        lo = 0 if axis == "01" else 1
        theta = np.arctan2(u.real[lo + 1, lo], u.real[lo, lo])
        if np.allclose(u, rot(theta), rtol=0, atol=atol):
            return True
    return False


def gate_counts(c: Circuit | Iterable[Gate]) -> dict[str, int]:
    """Gate counts by kind plus ``shift`` and ``rotation`` sub-counts.

    ``shift`` counts single-qutrit +1/+2 permutations. ``rotation`` counts
    uniformly controlled rotations and single/MS gates whose payload is a
    non-identity real R01/R12 rotation.
    """
    counts = Counter({"single": 0, "ms": 0, "ucg": 0, "ucr": 0, "shift": 0, "rotation": 0})
    for g in c:
        counts[g.kind] += 1
        if is_shift(g):
            counts["shift"] += 1
        if isinstance(g, UniformlyControlledRotation) or (
            isinstance(g, (SingleQutrit, MSControlled)) and _is_planar_rotation(g.u)
        ):
            counts["rotation"] += 1
    return dict(counts)


def format_counts(counts: dict[str, int]) -> str:
    return ", ".join(f"{k}: {v}" for k, v in counts.items())


# -- serialization ----------------------------------------------------------

def gate_to_json(g: Gate) -> dict:
    if isinstance(g, SingleQutrit):
        return {"kind": "single", "wire": g.wire, "matrix": encode_complex_matrix(g.u)}
    if isinstance(g, MSControlled):
        return {"kind": "ms", "control": g.control, "target": g.target, "matrix": encode_complex_matrix(g.u)}
    if isinstance(g, UniformlyControlledGate):
        return {"kind": "ucg", "controls": list(g.controls), "target": g.target,
                "table": [encode_complex_matrix(u) for u in g.table]}
    if isinstance(g, UniformlyControlledRotation):
        return {"kind": "ucr", "controls": list(g.controls), "target": g.target,
                "axis": g.axis, "angles": list(g.angles)}
    raise TypeError(f"not a gate: {g!r}")


def circuit_to_json(c: Circuit) -> dict:
    return {"qutrits": c.qutrits, "gates": [gate_to_json(g) for g in c.gates]}


def serialize(c: Circuit) -> bytes:
    return dumps(circuit_to_json(c)).encode()


def _int_field(d: dict, key: str, where: str) -> int:
    if key not in d:
        raise FormatError(f"{where}: missing key {key!r}")
    v = d[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise FormatError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _list_field(d: dict, key: str, where: str) -> list:
    if key not in d:
        raise FormatError(f"{where}: missing key {key!r}")
    if not isinstance(d[key], list):
        raise FormatError(f"{where}.{key}: expected a list")
    return d[key]


def gate_from_json(d, where: str = "gate") -> Gate:
    if not isinstance(d, dict):
        raise FormatError(f"{where}: expected an object")
    kind = d.get("kind")
    try:
        if kind == "single":
            return SingleQutrit(_int_field(d, "wire", where),
                                decode_complex_matrix(d.get("matrix"), f"{where}.matrix"))
        if kind == "ms":
            return MSControlled(_int_field(d, "control", where), _int_field(d, "target", where),
                                decode_complex_matrix(d.get("matrix"), f"{where}.matrix"))
        if kind == "ucg":
            controls = _list_field(d, "controls", where)
            table = [decode_complex_matrix(u, f"{where}.table[{i}]")
                     for i, u in enumerate(_list_field(d, "table", where))]
            return UniformlyControlledGate(tuple(controls), _int_field(d, "target", where), tuple(table))
        if kind == "ucr":
            controls = _list_field(d, "controls", where)
            angles = _list_field(d, "angles", where)
            for i, a in enumerate(angles):
                if not isinstance(a, (int, float)) or isinstance(a, bool):
                    raise FormatError(f"{where}.angles[{i}]: expected a number, got {a!r}")
            return UniformlyControlledRotation(tuple(controls), _int_field(d, "target", where),
                                               d.get("axis"), tuple(angles))
    except FormatError:
        raise
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{where}: {exc}") from None
    raise FormatError(f"{where}: unknown gate kind {kind!r}")


def circuit_from_json(data) -> Circuit:
    if not isinstance(data, dict):
        raise FormatError("circuit: top level must be an object")
    n = _int_field(data, "qutrits", "circuit")
    gates = [gate_from_json(g, f"gates[{i}]") for i, g in enumerate(_list_field(data, "gates", "circuit"))]
    try:
        return Circuit(n, tuple(gates))
    except ValueError as exc:
        raise FormatError(f"circuit: {exc}") from None


def deserialize(data: bytes | str) -> Circuit:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return circuit_from_json(obj)
