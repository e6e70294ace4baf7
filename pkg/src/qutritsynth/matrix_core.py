"""Dense complex linear algebra used throughout the synthesizer.

Matrices are plain ``numpy`` complex128 arrays. Functions here never mutate
their inputs; arrays they hand back to other modules are marked read-only.

Random unitaries come from :func:`haar_random_unitary`, which draws from
``numpy.random.default_rng(seed)`` (the PCG64 bit generator). Only the
properties of the samples, not the exact bits, are expected to carry over to
other generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, FormatError, NotUnitaryError

#: Per-dimension unitarity tolerance: ``||M^H M - I||_F <= UNITARITY_TOL * dim``.
UNITARITY_TOL = 1e-12
#: Per-dimension reconstruction tolerance for a single CSD.
CSD_TOL = 1e-10
#: Per-dimension reconstruction tolerance for stacked CSDs.
STACKED_CSD_TOL = 1e-9

SHIFT_PLUS_1 = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
SHIFT_PLUS_2 = SHIFT_PLUS_1 @ SHIFT_PLUS_1
SHIFT_PLUS_1.setflags(write=False)
SHIFT_PLUS_2.setflags(write=False)


def frozen(a) -> np.ndarray:
    """Return a read-only complex128 copy of ``a``."""
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def multiply(a, b) -> np.ndarray:
    a = _square(a, "A")
    b = _square(b, "B")
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def frobenius_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def unitarity_defect(m) -> float:
    """``||M^H M - I||_F``."""
    m = _square(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def is_unitary(m, tol: float = UNITARITY_TOL) -> bool:
    m = _square(m)
    return unitarity_defect(m) <= tol * m.shape[0]


def check_unitary(m, tol: float = UNITARITY_TOL, name: str = "matrix") -> np.ndarray:
    """Raise :class:`NotUnitaryError` unless ``m`` is unitary within ``tol * dim``."""
    m = _square(m, name)
    defect = unitarity_defect(m)
    if defect > tol * m.shape[0]:
        raise NotUnitaryError(
            f"{name} is not unitary: ||M^H M - I||_F = {defect:.3e} exceeds {tol * m.shape[0]:.3e}",
            defect=defect,
        )
    return m


def qutrit_count(dim: int) -> int:
    """Return ``n`` with ``3**n == dim``; raise :class:`DimensionError` otherwise."""
    if dim < 1:
        raise DimensionError(f"dimension {dim} is not a power of 3")
    n, d = 0, dim
    while d % 3 == 0:
        d //= 3
        n += 1
    if d != 1:
        raise DimensionError(f"dimension {dim} is not a power of 3")
    return n


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` indexes the more significant digit."""
    return np.kron(a, b)


def r01(theta: float) -> np.ndarray:
    """Real rotation in the {|0>, |1>} plane of one qutrit."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=complex)


def r12(theta: float) -> np.ndarray:
    """Real rotation in the {|1>, |2>} plane of one qutrit."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=complex)


@dataclass(frozen=True)
class BlockSpec:
    """Row and column partition of a matrix into contiguous blocks."""

    row_split: tuple[int, ...]
    col_split: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "row_split", tuple(int(x) for x in self.row_split))
        object.__setattr__(self, "col_split", tuple(int(x) for x in self.col_split))
        for split in (self.row_split, self.col_split):
            if not split or any(x <= 0 for x in split):
                raise DimensionError(f"block sizes must be positive, got {split}")

    @classmethod
    def square(cls, split: Sequence[int]) -> "BlockSpec":
        return cls(tuple(split), tuple(split))

    def validate(self, shape: tuple[int, int]) -> None:
        if sum(self.row_split) != shape[0] or sum(self.col_split) != shape[1]:
            raise DimensionError(
                f"block spec {self.row_split}x{self.col_split} does not partition shape {shape}"
            )


def block_partition(m, spec: BlockSpec) -> list[list[np.ndarray]]:
    m = np.asarray(m)
    spec.validate(m.shape)
    rows = np.cumsum((0,) + spec.row_split)
    cols = np.cumsum((0,) + spec.col_split)
    return [
        [m[rows[i]:rows[i + 1], cols[j]:cols[j + 1]].copy() for j in range(len(spec.col_split))]
        for i in range(len(spec.row_split))
    ]


def block_assemble(grid: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    try:
        return np.block([[np.asarray(b, dtype=complex) for b in row] for row in grid])
    except ValueError as exc:
        raise DimensionError(f"inconsistent block grid: {exc}") from None


def block_diag(*blocks) -> np.ndarray:
    """Block-diagonal matrix of the given square blocks."""
    dim = sum(np.shape(b)[0] for b in blocks)
    out = np.zeros((dim, dim), dtype=complex)
    k = 0
    for b in blocks:
        d = np.shape(b)[0]
        out[k:k + d, k:k + d] = b
        k += d
    return out


def haar_random_unitary(dim: int, seed: int | None = None) -> np.ndarray:
    """Sample a Haar-distributed ``dim x dim`` unitary.

    A complex Gaussian (Ginibre) matrix is QR-factored and the columns of Q
    are rephased so that the diagonal of R is real positive.
    """
    if dim < 1:
        raise DimensionError(f"dimension must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def basis_state(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


# -- JSON encoding ---------------------------------------------------------

def encode_complex_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_complex_matrix(data, where: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise FormatError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise FormatError(f"{where}[{i}]: expected a list of [re, im] pairs")
        rows.append([decode_complex(z, f"{where}[{i}][{j}]") for j, z in enumerate(row)])
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{where}[{i}]: row has {len(row)} entries, expected {width}")
    return np.array(rows, dtype=complex)


def decode_complex(z, where: str) -> complex:
    if (
        not isinstance(z, list)
        or len(z) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
    ):
        raise FormatError(f"{where}: expected [re, im] pair of numbers, got {z!r}")
    return complex(z[0], z[1])


def dumps(obj) -> str:
    """Canonical JSON text: fixed key order and separators, shortest-repr floats."""
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def unitary_to_json(m) -> dict:
    m = _square(m)
    n = qutrit_count(m.shape[0])
    return {"qutrits": n, "dim": m.shape[0], "matrix": encode_complex_matrix(m)}


def unitary_from_json(data, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Decode and validate a unitary file payload.

    Raises :class:`FormatError` for structural problems,
    :class:`DimensionError` when ``dim`` is not a power of 3 or disagrees with
    ``qutrits``, and :class:`NotUnitaryError` when the matrix is not unitary.
    """
    if not isinstance(data, dict):
        raise FormatError("unitary file: top level must be an object")
    for key in ("qutrits", "dim", "matrix"):
        if key not in data:
            raise FormatError(f"unitary file: missing key {key!r}")
    dim, n = data["dim"], data["qutrits"]
    if not isinstance(dim, int) or not isinstance(n, int) or isinstance(dim, bool):
        raise FormatError("unitary file: 'qutrits' and 'dim' must be integers")
    m = decode_complex_matrix(data["matrix"])
    if m.shape != (dim, dim):
        raise FormatError(f"unitary file: matrix shape {m.shape} does not match dim {dim}")
    if qutrit_count(dim) != n:
        raise DimensionError(f"unitary file: dim {dim} != 3^{n}")
    check_unitary(m, tol)
    return m


def write_unitary(path, m) -> None:
    Path(path).write_text(dumps(unitary_to_json(m)))


def read_unitary(path, tol: float = UNITARITY_TOL) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return unitary_from_json(data, tol)
