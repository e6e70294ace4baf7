"""Cosine-sine decomposition and the ternary seven-factor form.

For a unitary ``W`` of size ``m`` and a split ``r`` with ``2r <= m``::

    W = diag(U1, U2) @ [[C, -S, 0], [S, C, 0], [0, 0, I]] @ diag(V1, V2)

with ``C = diag(cos(theta))`` and ``S = diag(sin(theta))``. Angles are
returned sorted ascending in ``[0, pi/2]``.

For ``W`` of size ``3**n`` two further square CSDs (on ``U2`` and ``V2``)
yield::

    W = D1 @ MidX(sigma) @ D2 @ MidZ(mid) @ D3 @ MidX(gamma) @ D4

where each ``Dk`` is block diagonal with three ``3**(n-1)`` blocks and ``D2``,
``D4`` have an exact identity first block.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .matrix_core import UNITARITY_TOL, block_diag, check_unitary, frozen, qutrit_count

# Sines below this are treated as zero when building U2 columns.
_TINY_SINE = 1e-300
_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class CSDFactors:
    r: int
    m: int
    U1: np.ndarray
    U2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    thetas: np.ndarray

    @property
    def C(self) -> np.ndarray:
        return np.cos(self.thetas)

    @property
    def S(self) -> np.ndarray:
        return np.sin(self.thetas)

    def middle(self) -> np.ndarray:
        return cs_middle(self.thetas, self.m)

    def left(self) -> np.ndarray:
        return block_diag(self.U1, self.U2)

    def right(self) -> np.ndarray:
        return block_diag(self.V1, self.V2)

    def reconstruct(self) -> np.ndarray:
        return self.left() @ self.middle() @ self.right()


def cs_middle(thetas, m: int) -> np.ndarray:
    """``[[C, -S, 0], [S, C, 0], [0, 0, I_{m-2r}]]`` for ``r = len(thetas)``."""
    thetas = np.asarray(thetas, dtype=float)
    r = len(thetas)
    c, s = np.cos(thetas), np.sin(thetas)
    out = np.eye(m, dtype=complex)
    idx = np.arange(r)
    out[idx, idx] = c
    out[idx + r, idx + r] = c
    out[idx, idx + r] = -s
    out[idx + r, idx] = s
    return out


def mid_z(thetas) -> np.ndarray:
    """Rotation factor acting on block rows/cols 0 and 1 of a 3x3 block matrix."""
    return cs_middle(thetas, 3 * len(thetas))


def mid_x(thetas) -> np.ndarray:
    """Rotation factor acting on block rows/cols 1 and 2 of a 3x3 block matrix."""
    b = len(thetas)
    return block_diag(np.eye(b), cs_middle(thetas, 2 * b))


def _frozen_angles(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _polar_unitary(a: np.ndarray) -> np.ndarray:
    """Nearest unitary to ``a`` in Frobenius norm."""
    x, _, yh = np.linalg.svd(a)
    return x @ yh


def _complete_columns(cols: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormalise ``cols`` in order and extend to a full ``dim x dim`` unitary.

    The first ``k`` output columns span the same nested subspaces as the input
    columns and keep their phases.
    """
    k = cols.shape[1]
    if k == 0:
        return np.eye(dim, dtype=complex)
    q, rr = np.linalg.qr(cols, mode="complete")
    d = np.diag(rr)[:k]
    phase = np.ones(dim, dtype=complex)
    nz = np.abs(d) > 0
    phase[:k][nz] = d[nz] / np.abs(d[nz])
    return q * phase


def csd_general(W, r: int, *, tol: float = UNITARITY_TOL) -> CSDFactors:
    """Cosine-sine decomposition of ``W`` with leading block size ``r``.

    ``U1, cos(theta), V1`` come from the SVD of the leading ``r x r`` block.
    Sines are measured from the column norms of ``W21 V1^H`` and combined with
    the cosines through ``arctan2`` so both ends of the angle range stay
    accurate. ``U2`` is built from those normalised columns (largest sine
    first) and completed to a unitary; ``V2`` is then solved from the full
    identity and projected back onto the unitary group.
    """
    W = np.asarray(check_unitary(W, tol, name="W"), dtype=complex)
    m = W.shape[0]
    if not (1 <= r and 2 * r <= m):
        raise DimensionError(f"block size r={r} out of range for dimension {m} (need 1 <= r <= m/2)")
    p = m - r
    W11, W12, W21, W22 = W[:r, :r], W[:r, r:], W[r:, :r], W[r:, r:]

    if not W12.any() and not W21.any():
        # Exactly block-diagonal: no rotation, identity right factors.
        return CSDFactors(r, m, frozen(W11), frozen(W22), frozen(np.eye(r)), frozen(np.eye(p)),
                          _frozen_angles(np.zeros(r)))

    U1, c, V1 = np.linalg.svd(W11)
    # Rows of V1 with cos > 1/sqrt(2) are resolved better by the sines:
    # re-diagonalise that subspace with the SVD of W21, then rebuild U1.
    k = int(np.count_nonzero(c > _SQRT_HALF))
    if k:
        _, _, zh = np.linalg.svd(W21 @ V1[:k].conj().T)
        V1 = np.vstack([zh @ V1[:k], V1[k:]])
        top = W11 @ V1[:k].conj().T
        cols = np.hstack([top / np.linalg.norm(top, axis=0), U1[:, k:]])
        U1 = _complete_columns(cols, r)
    B = U1.conj().T @ W11 @ V1.conj().T
    c = np.abs(np.diag(B))
    # Absorb the residual diagonal phase so C stays real non-negative.
    d = np.diag(B)
    ph = np.where(c > 0, d / np.where(c > 0, c, 1), 1)
    U1 = U1 * ph
    A = W21 @ V1.conj().T
    s = np.linalg.norm(A, axis=0)
    thetas = np.arctan2(s, c)
    order = np.argsort(thetas, kind="stable")
    thetas, U1, V1, A, s = thetas[order], U1[:, order], V1[order, :], A[:, order], s[order]

    # U2: columns i < r follow A[:, i] / s_i, processed from the largest sine down.
    by_sine = [int(i) for i in np.argsort(-s, kind="stable") if s[i] > _TINY_SINE]
    basis = _complete_columns(A[:, by_sine] / s[by_sine], p)
    U2 = np.empty((p, p), dtype=complex)
    rest = [i for i in range(p) if i not in set(by_sine)]
    U2[:, by_sine] = basis[:, :len(by_sine)]
    U2[:, rest] = basis[:, len(by_sine):]

    # Solve diag(U1, U2)^H W = Mid diag(V1, V2) for V2, then project.
    mid = cs_middle(thetas, m)
    P = mid.T @ (block_diag(U1, U2).conj().T @ W)
    V2 = _polar_unitary(P[r:, r:])

    return CSDFactors(r, m, frozen(U1), frozen(U2), frozen(V1), frozen(V2),
                      _frozen_angles(thetas))


def csd_square(W, *, tol: float = UNITARITY_TOL) -> CSDFactors:
    """CSD of an even-dimensional unitary split into equal halves."""
    m = np.shape(W)[0]
    if m % 2:
        raise DimensionError(f"square CSD needs an even dimension, got {m}")
    return csd_general(W, m // 2, tol=tol)


@dataclass(frozen=True)
class TernaryCSDFactors:
    """Seven-factor ternary decomposition of a ``3**n`` unitary.

    ``D1``..``D4`` are triples of ``3**(n-1)`` blocks. ``sigma_x_thetas`` and
    ``gamma_x_thetas`` parametrise the block (1, 2) rotations next to ``D1``
    and ``D4``; ``mid_z_thetas`` the block (0, 1) rotation in the centre.
    """

    n: int
    D1: tuple[np.ndarray, np.ndarray, np.ndarray]
    D2: tuple[np.ndarray, np.ndarray, np.ndarray]
    D3: tuple[np.ndarray, np.ndarray, np.ndarray]
    D4: tuple[np.ndarray, np.ndarray, np.ndarray]
    sigma_x_thetas: np.ndarray
    mid_z_thetas: np.ndarray
    gamma_x_thetas: np.ndarray

    def factors(self) -> list[np.ndarray]:
        """The seven matrices whose left-to-right product is ``W``."""
        return [
            block_diag(*self.D1), mid_x(self.sigma_x_thetas), block_diag(*self.D2),
            mid_z(self.mid_z_thetas),
            block_diag(*self.D3), mid_x(self.gamma_x_thetas), block_diag(*self.D4),
        ]

    def reconstruct(self) -> np.ndarray:
        return np.linalg.multi_dot(self.factors())


def _identity_ternary(n: int) -> TernaryCSDFactors:
    b = 3 ** (n - 1)
    eye = frozen(np.eye(b))
    zeros = _frozen_angles(np.zeros(b))
    triple = (eye, eye, eye)
    return TernaryCSDFactors(n, triple, triple, triple, triple, zeros, zeros, zeros)


def ternary_csd(W, *, tol: float = UNITARITY_TOL, parallel: bool = False) -> TernaryCSDFactors:
    """Factor a ``3**n``-dimensional unitary (``n >= 2``) into seven factors."""
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {W.shape}")
    n = qutrit_count(W.shape[0])
    if n < 2:
        raise DimensionError(f"ternary CSD needs at least 2 qutrits, got dimension {W.shape[0]}")
    b = 3 ** (n - 1)
    if np.array_equal(W, np.eye(3 * b)):
        return _identity_ternary(n)

    outer = csd_general(W, b, tol=tol)
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fu, fv = pool.submit(csd_square, outer.U2, tol=tol), pool.submit(csd_square, outer.V2, tol=tol)
            left, right = fu.result(), fv.result()
    else:
        left, right = csd_square(outer.U2, tol=tol), csd_square(outer.V2, tol=tol)

    eye = frozen(np.eye(b))
    return TernaryCSDFactors(
        n=n,
        D1=(outer.U1, left.U1, left.U2),
        D2=(eye, left.V1, left.V2),
        D3=(outer.V1, right.U1, right.U2),
        D4=(eye, right.V1, right.V2),
        sigma_x_thetas=left.thetas,
        mid_z_thetas=outer.thetas,
        gamma_x_thetas=right.thetas,
    )
