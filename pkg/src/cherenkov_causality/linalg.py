"""Dense and sparse complex linear algebra used throughout the package.

Small objects (qubit states, two-time matrices, Choi matrices) are plain
``numpy`` arrays.  Operators on the qubit-field composite space are held as
:class:`SparseOperator`, a thin immutable wrapper around a CSR matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import constants as C

__all__ = [
    "PAULI",
    "IDENTITY2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "SparseOperator",
    "DensityMatrix",
    "NotHermitianError",
    "kron",
    "hermitian_eig",
    "partial_trace",
    "trace_distance",
    "is_hermitian",
    "dag",
]

# Qubit basis ordering: index 0 is |E> (sigma_z = +1), index 1 is |G>.
IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |G><E|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
PAULI = (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z)


class NotHermitianError(ValueError):
    pass


def dag(a):
    return a.conj().T


def is_hermitian(a, tol=C.HERMITIAN_FLAG_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - dag(a)), initial=0.0) <= tol)


@dataclass(frozen=True)
class SparseOperator:
    """Square sparse complex operator in CSR form.

    Build with :meth:`from_triplets` (duplicate entries rejected) or
    :meth:`from_matrix`.
    """

    csr: sp.csr_matrix

    def __post_init__(self):
        if self.csr.shape[0] != self.csr.shape[1]:
            raise ValueError(f"operator must be square, got {self.csr.shape}")

    @classmethod
    def from_triplets(cls, dim: int, triplets: Iterable[tuple[int, int, complex]]) -> "SparseOperator":
        rows, cols, vals = [], [], []
        seen = set()
        for r, c, v in triplets:
            if not (0 <= r < dim and 0 <= c < dim):
                raise ValueError(f"index ({r}, {c}) outside dimension {dim}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            seen.add((r, c))
            rows.append(r)
            cols.append(c)
            vals.append(v)
        m = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
        return cls(m)

    @classmethod
    def from_matrix(cls, m) -> "SparseOperator":
        m = sp.csr_matrix(m, dtype=complex)
        m.eliminate_zeros()
        m.sort_indices()
        return cls(m)

    @property
    def dim(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def triplets(self) -> list[tuple[int, int, complex]]:
        coo = self.csr.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def dag(self) -> "SparseOperator":
        return SparseOperator.from_matrix(self.csr.conj().T)

    def is_hermitian(self, tol=C.HERMITIAN_FLAG_TOL) -> bool:
        diff = self.csr - self.csr.conj().T
        return diff.nnz == 0 or float(np.max(np.abs(diff.data))) <= tol

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator.from_matrix(self.csr @ other.csr)
        return self.csr @ np.asarray(other)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator.from_matrix(self.csr + other.csr)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator.from_matrix(self.csr - other.csr)

    def __mul__(self, scalar: complex) -> "SparseOperator":
        return SparseOperator.from_matrix(self.csr * scalar)

    __rmul__ = __mul__


def kron(*ops):
    """Kronecker product of any number of factors.

    Dense inputs give a dense result; if any factor is a
    :class:`SparseOperator` the result is one as well.
    """
    if not ops:
        raise ValueError("kron needs at least one factor")
    if any(isinstance(o, SparseOperator) for o in ops):
        mats = [o.csr if isinstance(o, SparseOperator) else sp.csr_matrix(o) for o in ops]
        return SparseOperator.from_matrix(reduce(lambda a, b: sp.kron(a, b, format="csr"), mats))
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def hermitian_eig(h, tol=C.HERMITIAN_REJECT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and the matching orthonormal
    eigenvectors as columns.  Input whose anti-Hermitian part exceeds
    ``tol`` (max-abs entry) is rejected; smaller asymmetry is averaged away.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    asym = float(np.max(np.abs(h - dag(h)), initial=0.0))
    if asym > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |H - H^dag| = {asym:.3e})")
    return np.linalg.eigh((h + dag(h)) / 2)


def _check_dims(n: int, dims: Sequence[int]) -> None:
    if any(d < 1 for d in dims) or int(np.prod(dims)) != n:
        raise ValueError(f"subsystem dims {list(dims)} do not multiply to {n}")


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems appear in their original order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    _check_dims(m.shape[0], dims)
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims)
    # letters: row index i_k, column index j_k; traced pairs share a letter
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems")
    row = list(letters[:n])
    col = [row[k] if k not in keep else letters[n + k] for k in range(n)]
    out = [row[k] for k in keep] + [col[k] for k in keep]
    sub = "".join(row) + "".join(col) + "->" + "".join(out)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.einsum(sub, t).reshape(dk, dk)


def trace_distance(rho1, rho2) -> float:
    a = np.asarray(rho1.matrix if isinstance(rho1, DensityMatrix) else rho1)
    b = np.asarray(rho2.matrix if isinstance(rho2, DensityMatrix) else rho2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    evals, _ = hermitian_eig(a - b)
    return float(0.5 * np.sum(np.abs(evals)))


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state with its tensor-factor dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        dims = tuple(self.dims) if self.dims else (m.shape[0],)
        _check_dims(m.shape[0], dims)
        asym = float(np.max(np.abs(m - dag(m))))
        if asym > C.STATE_HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (asymmetry {asym:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1) > C.STATE_TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")
        lo = float(np.linalg.eigvalsh((m + dag(m)) / 2)[0])
        if lo < -C.STATE_POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, psi, dims=()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    def ptrace(self, keep) -> "DensityMatrix":
        keep = sorted(np.atleast_1d(keep).tolist())
        return DensityMatrix(partial_trace(self.matrix, self.dims, keep), tuple(self.dims[k] for k in keep))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix), self.dims + other.dims)
