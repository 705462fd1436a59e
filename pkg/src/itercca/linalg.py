"""Sparse and dense matrix kernels shared by every algorithm in the package.

Sparse matrices are canonical CSR (`scipy.sparse.csr_array`) with sorted,
duplicate-free column indices and no explicitly stored zeros; `as_sparse`
produces that form and freezes the underlying buffers.  Dense matrices are
plain float64 ndarrays and are tall-skinny everywhere in this package.

The two sparse-dense products funnel through a process-global work counter
(`sparse_work`) that tallies nonzero multiplies; algorithm drivers snapshot
it to report machine-independent compute budgets.
"""

from typing import NamedTuple

import numpy as np
from scipy import sparse

# Relative threshold on |r_ii| the whole package uses for numerical rank
# decisions in thin QR factors.
RANK_RTOL = 1e-12


class _SparseWork:
    """Tally of nonzero multiplies performed by the sparse kernels.

    Process-global instrumentation, not part of any numerical contract;
    callers snapshot `total` before and after a run to meter it.
    """

    def __init__(self):
        self.total = 0

    def add(self, count):
        self.total += int(count)

    def reset(self):
        self.total = 0


sparse_work = _SparseWork()


def as_sparse(a, shape=None):
    """Return `a` as a canonical, frozen CSR matrix.

    Accepts anything `scipy.sparse.csr_array` accepts (dense arrays, other
    sparse formats, (data, (row, col)) triplets).  Duplicates are summed,
    indices sorted, explicit zeros dropped, and the result's buffers are
    marked read-only so shared matrices cannot be mutated downstream.
    """
    m = sparse.csr_array(a, shape=shape, dtype=np.float64, copy=True)
    m.sum_duplicates()
    m.sort_indices()
    m.eliminate_zeros()
    m.check_format(full_check=True)
    for buf in (m.data, m.indices, m.indptr):
        buf.flags.writeable = False
    return m


def _check_dense(b, name="b"):
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {b.shape}")
    return b


def sparse_dense_mul(a, b):
    """Product a @ b of a sparse n-by-p matrix with a dense p-by-k matrix."""
    b = _check_dense(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"shape mismatch: sparse {a.shape} @ dense {b.shape}"
        )
    sparse_work.add(a.nnz * b.shape[1])
    return a @ b


def sparse_transpose_dense_mul(a, b):
    """Product a.T @ b without materializing the transpose of `a`.

    `a` is sparse n-by-p, `b` dense n-by-k; the result is dense p-by-k.
    """
    b = _check_dense(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"shape mismatch: sparse.T {a.shape} @ dense {b.shape}"
        )
    sparse_work.add(a.nnz * b.shape[1])
    # .T on CSR is a CSC view; the product streams over stored entries.
    return a.T @ b


class QrFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray


def thin_qr(m):
    """Thin QR of a tall-skinny dense matrix via Householder reflections.

    Column signs of q are flipped so diag(r) is non-negative, which makes
    the factorization deterministic.  Rank deficiency is not an error here;
    use `rank_deficient_columns` on the returned r and decide at the caller.
    """
    m = _check_dense(m, "m")
    n, k = m.shape
    if not 1 <= k <= n:
        raise ValueError(f"thin_qr needs n >= k >= 1, got shape {m.shape}")
    q, r = np.linalg.qr(m, mode="reduced")
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return QrFactors(q * signs, r * signs[:, None])


def rank_deficient_columns(r, rtol=RANK_RTOL):
    """Indices i with |r_ii| below rtol times the largest diagonal entry."""
    d = np.abs(np.diag(r))
    ref = d.max() if d.size else 0.0
    if ref == 0.0:
        return np.arange(d.size)
    return np.flatnonzero(d < rtol * ref)


def gram_diagonal(a):
    """Squared column norms of a sparse matrix, i.e. diag(a.T @ a)."""
    p = a.shape[1]
    if a.nnz == 0:
        return np.zeros(p)
    return np.bincount(a.indices, weights=np.square(a.data), minlength=p)


def sparse_gram(a, b=None):
    """The dense cross product a.T @ b (a.T @ a when b is omitted).

    Both operands are sparse with equal row counts; the output is a small
    dense p_a-by-p_b array, so this is only for desk-scale column counts.
    Counted into `sparse_work` at the exact multiply count of the
    row-outer-product expansion.
    """
    if b is None:
        b = a
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: {a.shape} vs {b.shape}")
    row_nnz_a = np.diff(a.indptr)
    row_nnz_b = np.diff(b.indptr)
    sparse_work.add(int(row_nnz_a @ row_nnz_b))
    return np.asarray((a.T @ b).todense(), dtype=np.float64)
