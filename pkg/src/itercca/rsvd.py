"""Randomized computation of top left singular subspaces of sparse matrices.

Range finder with a Gaussian test matrix, power iterations that
re-orthonormalize after every sparse product (the bare power scheme loses
all but the top direction to exponent collapse), and a final small
eigendecomposition of the projected Gram to order and truncate the basis.

Randomness comes from numpy's PCG64 bit generator seeded directly with the
integer `seed`, with standard-normal draws; identical inputs and seed give
bitwise identical output on any platform.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_sparse, sparse_dense_mul, sparse_transpose_dense_mul, thin_qr


@dataclass(frozen=True)
class RangeBasis:
    """Orthonormal basis u1 for an approximate top singular subspace.

    Columns are ordered by decreasing singular value estimate
    (`singular_estimates`).  `rank_deficient` is set when the requested
    rank exceeded the numerical rank and u1 was truncated accordingly.
    """

    u1: np.ndarray
    k_pc: int
    seed: int
    power_iters: int
    oversample: int
    singular_estimates: np.ndarray = field(default_factory=lambda: np.empty(0))
    rank_deficient: bool = False


def randomized_top_singulars(a, k, power_iters=2, oversample=10, seed=0):
    """Approximate top-k left singular vectors of a sparse n-by-p matrix.

    Parameters
    ----------
    a : sparse matrix, n-by-p
    k : int
        Number of basis columns requested, 1 <= k <= min(n, p).
    power_iters : int
        Power iterations a(a.T .) applied after the initial sketch; each
        application is followed by a thin QR.
    oversample : int
        Extra sketch columns beyond k; the basis is truncated back to k.
    seed : int
        Seed for the PCG64 generator drawing the Gaussian test matrix.
    """
    a = as_sparse(a)
    n, p = a.shape
    if not 1 <= k <= min(n, p):
        raise ValueError(f"k={k} outside [1, min{a.shape}]")
    if power_iters < 0 or oversample < 0:
        raise ValueError("power_iters and oversample must be >= 0")

    m = min(k + oversample, n, p)
    rng = np.random.Generator(np.random.PCG64(seed))
    omega = rng.standard_normal((p, m))

    q = thin_qr(sparse_dense_mul(a, omega)).q
    for _ in range(power_iters):
        w = thin_qr(sparse_transpose_dense_mul(a, q)).q
        q = thin_qr(sparse_dense_mul(a, w)).q

    # Eigendecomposition of the projected Gram (q.T a)(q.T a).T orders the
    # sketch by singular value estimate and reveals the numerical rank.
    b = sparse_transpose_dense_mul(a, q)
    evals, evecs = np.linalg.eigh(b.T @ b)
    order = np.argsort(evals)[::-1]
    evals = np.maximum(evals[order], 0.0)
    sing = np.sqrt(evals)

    if sing.size and sing[0] > 0.0:
        cutoff = sing[0] * max(n, p) * np.finfo(np.float64).eps
        rank = int(np.count_nonzero(sing > cutoff))
    else:
        rank = 0
    keep = min(k, rank)

    u1 = q @ evecs[:, order[:keep]]
    return RangeBasis(
        u1=u1,
        k_pc=k,
        seed=seed,
        power_iters=power_iters,
        oversample=oversample,
        singular_estimates=sing[:keep],
        rank_deficient=keep < k,
    )
