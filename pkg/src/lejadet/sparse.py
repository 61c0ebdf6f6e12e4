"""Sparse SPD matrix storage, Matrix Market I/O, and synthetic generators.

The CSR container here is deliberately thin: it validates the structural
invariants once at construction, freezes the arrays, and delegates the
matrix-vector kernel to scipy's CSR product (a sequential row-wise dot
product, bitwise reproducible for fixed input).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseMatrixCSR",
    "matvec",
    "load_matrix_market",
    "write_matrix_market",
    "gen_pentadiagonal",
    "gen_gmrf_grid",
]


class SparseMatrixCSR:
    """Immutable compressed-sparse-row storage for a square real matrix.

    Invariants checked at construction:

    - ``row_ptr`` is non-decreasing with ``row_ptr[0] == 0`` and
      ``row_ptr[n] == nnz``;
    - column indices lie in ``[0, n)`` and are strictly increasing within
      each row (so there are no duplicate entries);
    - all values are finite.

    ``symmetric_verified`` is True only if an explicit check found a stored
    ``(j, i)`` partner with a bitwise-equal value for every stored ``(i, j)``.
    """

    __slots__ = ("_mat", "symmetric_verified")

    def __init__(self, row_ptr, col_idx, values, n=None, check_symmetry=True):
        row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if n is None:
            n = row_ptr.shape[0] - 1
        if row_ptr.ndim != 1 or row_ptr.shape[0] != n + 1:
            raise ValueError("row_ptr must have length n+1")
        if row_ptr[0] != 0 or row_ptr[-1] != values.shape[0]:
            raise ValueError("row_ptr[0] must be 0 and row_ptr[n] must equal nnz")
        if col_idx.shape != values.shape:
            raise ValueError("col_idx and values must have equal length")
        counts = np.diff(row_ptr)
        if np.any(counts < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if values.shape[0]:
            if col_idx.min() < 0 or col_idx.max() >= n:
                raise ValueError("column index out of range")
            # strictly increasing within each row: consecutive entries that
            # belong to the same row must have increasing column indices
            row_of = np.repeat(np.arange(n, dtype=np.int64), counts)
            same_row = row_of[1:] == row_of[:-1]
            if np.any(col_idx[1:][same_row] <= col_idx[:-1][same_row]):
                raise ValueError("column indices must be strictly increasing within rows")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")
        for arr in (row_ptr, col_idx, values):
            arr.flags.writeable = False
        mat = sp.csr_matrix((values, col_idx, row_ptr), shape=(n, n), copy=False)
        object.__setattr__(self, "_mat", mat)
        sym = _is_symmetric(mat) if check_symmetry else False
        object.__setattr__(self, "symmetric_verified", sym)

    def __setattr__(self, name, value):
        raise AttributeError("SparseMatrixCSR is immutable")

    @classmethod
    def from_scipy(cls, mat, check_symmetry=True):
        """Build from any scipy sparse matrix (duplicates summed, indices sorted)."""
        m = sp.csr_matrix(mat, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.indptr, m.indices, m.data, n=m.shape[0],
                   check_symmetry=check_symmetry)

    @classmethod
    def from_dense(cls, arr, check_symmetry=True):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("dense input must be square")
        return cls.from_scipy(sp.csr_matrix(arr), check_symmetry=check_symmetry)

    @property
    def n(self) -> int:
        return self._mat.shape[0]

    @property
    def nnz(self) -> int:
        return self._mat.nnz

    @property
    def row_ptr(self) -> np.ndarray:
        return self._mat.indptr

    @property
    def col_idx(self) -> np.ndarray:
        return self._mat.indices

    @property
    def values(self) -> np.ndarray:
        return self._mat.data

    def to_scipy(self) -> sp.csr_matrix:
        """The backing scipy matrix; its arrays are frozen, treat as read-only."""
        return self._mat

    def to_dense(self, max_n: int = 10_000) -> np.ndarray:
        if self.n > max_n:
            raise ValueError(f"refusing to densify a {self.n}x{self.n} matrix "
                             f"(limit {max_n})")
        return self._mat.toarray()

    def bandwidth(self) -> int:
        """Largest |i - j| over stored entries (0 for diagonal matrices)."""
        if self.nnz == 0:
            return 0
        row_of = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))
        return int(np.max(np.abs(self.col_idx - row_of)))

    def __repr__(self):
        return (f"SparseMatrixCSR(n={self.n}, nnz={self.nnz}, "
                f"symmetric_verified={self.symmetric_verified})")


def _is_symmetric(mat: sp.csr_matrix) -> bool:
    diff = (mat - mat.T).tocsr()
    return diff.nnz == 0 or float(np.max(np.abs(diff.data))) == 0.0


def matvec(Q: SparseMatrixCSR, v: np.ndarray) -> np.ndarray:
    """Product Q @ v as sequential row-wise dot products.

    Deterministic bitwise for fixed input.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (Q.n,):
        raise ValueError(f"vector has length {v.shape}, expected ({Q.n},)")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return Q.to_scipy() @ v


# ---------------------------------------------------------------------------
# Matrix Market coordinate format (ASCII, 1-based on disk, 0-based in memory)
# ---------------------------------------------------------------------------

def load_matrix_market(path) -> SparseMatrixCSR:
    """Read a Matrix Market coordinate file into CSR storage.

    Symmetric-storage files are expanded to full storage, duplicate entries
    are summed, and the result is sorted per the CSR invariants.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        parts = header.split()
        if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
            raise ValueError(f"malformed Matrix Market header: {header!r}")
        obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
        if obj != "matrix" or fmt != "coordinate":
            raise ValueError(f"unsupported Matrix Market type: {header!r}")
        if field == "complex":
            raise ValueError("complex field is not supported")
        if field not in ("real", "integer"):
            raise ValueError(f"unsupported field {field!r}")
        if symmetry not in ("general", "symmetric"):
            raise ValueError(f"unsupported symmetry {symmetry!r}")
        line = fh.readline()
        while line and line.lstrip().startswith("%"):
            line = fh.readline()
        size = line.split()
        if len(size) != 3:
            raise ValueError(f"malformed size line: {line!r}")
        rows, cols, nnz = (int(t) for t in size)
        if rows != cols:
            raise ValueError(f"matrix is not square: {rows}x{cols}")
        data = np.loadtxt(fh, dtype=np.float64, ndmin=2, comments="%")
    if data.size == 0:
        data = data.reshape(0, 3)
    if data.shape[0] != nnz:
        raise ValueError(f"declared {nnz} entries but file holds {data.shape[0]}")
    if data.shape[1] != 3:
        raise ValueError("each entry must be 'row col value'")
    i = data[:, 0].astype(np.int64) - 1
    j = data[:, 1].astype(np.int64) - 1
    v = data[:, 2]
    if symmetry == "symmetric":
        off = i != j
        i, j = np.concatenate([i, j[off]]), np.concatenate([j, i[off]])
        v = np.concatenate([v, v[off]])
    coo = sp.coo_matrix((v, (i, j)), shape=(rows, cols))
    return SparseMatrixCSR.from_scipy(coo)


def write_matrix_market(Q: SparseMatrixCSR, path) -> None:
    """Write all stored entries in coordinate format (general symmetry).

    Values use shortest round-trip decimal form, so load(write(Q)) restores
    CSR content bitwise.
    """
    coo = Q.to_scipy().tocoo()
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{Q.n} {Q.n} {Q.nnz}\n")
        for i, j, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            fh.write(f"{i + 1} {j + 1} {v!r}\n")


# ---------------------------------------------------------------------------
# Synthetic generators used in the experiments
# ---------------------------------------------------------------------------

def gen_pentadiagonal(n: int, seed: int) -> SparseMatrixCSR:
    """Random SPD pentadiagonal matrix of dimension n.

    Diagonals at offsets {0, +1, +2, -1, -2} are drawn uniform on [0, 1)
    from a seeded PCG64 generator (numpy ``default_rng``), then the matrix
    is symmetrized and shifted: ``Q + Q.T + n*I``.  Diagonal dominance makes
    the result SPD: every off-diagonal magnitude is below 2 while the
    diagonal is at least n.
    """
    if n < 3:
        raise ValueError("pentadiagonal generator needs n >= 3")
    rng = np.random.default_rng(seed)
    diagonals = [rng.random(n), rng.random(n - 1), rng.random(n - 2),
                 rng.random(n - 1), rng.random(n - 2)]
    q = sp.diags(diagonals, [0, 1, 2, -1, -2], format="csr")
    q = q + q.T + float(n) * sp.identity(n, format="csr")
    return SparseMatrixCSR.from_scipy(q)


def gen_gmrf_grid(g: int, theta: float) -> SparseMatrixCSR:
    """Lattice precision matrix Q of a g-by-g grid field.

    Unit diagonal with coupling ``theta`` at the four nearest-neighbor
    positions of a non-periodic lattice.  For |theta| < 1/4 the eigenvalues
    lie in [1 - 4|theta|, 1 + 4|theta|], so Q is SPD.
    """
    if g < 2:
        raise ValueError("grid side must be at least 2")
    if abs(theta) >= 0.25:
        raise ValueError(f"|theta| must be below 1/4 for positive definiteness, got {theta}")
    ones = np.ones(g - 1)
    t = sp.diags([ones, ones], [-1, 1], shape=(g, g))
    eye = sp.identity(g)
    adjacency = sp.kron(eye, t) + sp.kron(t, eye)
    q = (sp.identity(g * g, format="csr") + theta * adjacency).tocsr()
    q.eliminate_zeros()    # theta = 0 would otherwise store an explicit zero pattern
    return SparseMatrixCSR.from_scipy(q)
