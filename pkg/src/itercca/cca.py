"""Canonical correlation algorithms.

One exact desk-scale solver plus a family of large-scale approximations
that share a single driver:

* exact_cca — whiten both Gram matrices by symmetric eigendecomposition
  and take the SVD of the whitened cross-covariance.  The reference
  answer everything else is measured against; column counts are capped
  because it materializes p-by-p Grams.
* iterative_ls_cca — orthogonal iteration where every half-step is a
  least-squares projection onto one side's column space, with a thin QR
  after every solve.  The LS solver is pluggable, which is the whole
  point: swapping it produces the variants below.
* l_cca / g_cca — the deflated-gradient solver (and its no-deflation
  special case) plugged into the driver.
* d_cca — projection approximated by inverting only diag(Gram); exact
  when columns have disjoint supports (indicator data).
* rp_cca — no iteration at all: exact CCA between randomized top
  singular bases of the two sides.

All entry points are deterministic given their seed and report wall time
plus the sparse multiply count consumed, so runs can be compared at
matched compute budgets.
"""

import time
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .evaluation import subspace_dist
from .linalg import (
    as_sparse,
    gram_diagonal,
    rank_deficient_columns,
    sparse_dense_mul,
    sparse_gram,
    sparse_transpose_dense_mul,
    sparse_work,
    thin_qr,
)
from .ling import LingConfig, build_solver, ling_solve
from .rsvd import randomized_top_singulars

# exact_cca materializes p-by-p Grams; refuse silly column counts.
MAX_ORACLE_COLS = 2048

_EIG_FLOOR_REL = 1e-10
_RIDGE_REL = 1e-8


class SingularGramError(ValueError):
    """A Gram matrix is numerically singular and ridge repair is off."""

    def __init__(self, side, detail):
        self.side = side
        super().__init__(
            f"gram matrix of side {side!r} is numerically singular ({detail}); "
            "enable ridge repair or drop dependent columns"
        )


class IterationFailure(np.linalg.LinAlgError):
    """Numerical failure mid-run; carries whatever trace existed so far."""

    def __init__(self, msg, partial_trace):
        super().__init__(msg)
        self.partial_trace = partial_trace


@dataclass(frozen=True)
class ExactCcaFactors:
    """Loadings and correlations of the exact solution.

    d holds the top canonical correlations, non-increasing.  Column i of
    x_loadings maps the x data to its i-th canonical variable; the
    canonical variables have unit norm and are mutually orthogonal.
    """

    d: np.ndarray
    x_loadings: np.ndarray
    y_loadings: np.ndarray


@dataclass(frozen=True)
class ConvergenceTrace:
    """One record per completed outer iteration of an iterative run.

    dists_x / dists_y stay empty unless the caller supplied reference
    subspaces to measure against.  restarts lists the iteration indices
    (0 = the random start) where a rank-collapsed iterate had columns
    replaced.
    """

    corr_sums: np.ndarray
    seconds: np.ndarray
    dists_x: np.ndarray
    dists_y: np.ndarray
    restarts: tuple


@dataclass(frozen=True)
class CcaResult:
    """Orthonormal canonical bases with their correlations.

    correlations come from a final small CCA between the two returned
    bases (the singular values of x_basis.T @ y_basis), which is the
    common yardstick applied to every algorithm in this package.  work is
    the sparse nonzero-multiply count the run consumed.
    """

    x_basis: np.ndarray
    y_basis: np.ndarray
    correlations: np.ndarray
    trace: Optional[ConvergenceTrace]
    wall_time: float
    work: int
    seed: Optional[int] = None


def _inverse_sqrt_gram(c, side, ridge):
    """Inverse square root of a symmetric PSD Gram via eigendecomposition.

    Eigenvalues below 1e-10 * trace/p mark the matrix numerically
    singular: either an error, or (ridge=True) the whole spectrum is
    shifted up by 1e-8 * trace/p and inversion proceeds on the shifted
    matrix.
    """
    p = c.shape[0]
    trace = float(np.trace(c))
    if trace <= 0.0:
        raise SingularGramError(side, "trace is zero")
    evals, evecs = np.linalg.eigh(c)
    floor = _EIG_FLOOR_REL * trace / p
    n_bad = int(np.count_nonzero(evals < floor))
    if n_bad:
        if not ridge:
            raise SingularGramError(side, f"{n_bad} eigenvalues below {floor:.3e}")
        evals = evals + _RIDGE_REL * trace / p
        if evals[0] <= 0.0:
            raise SingularGramError(side, "not repairable by ridge shift")
    return (evecs / np.sqrt(evals)) @ evecs.T


def exact_cca(x, y, k_cca, ridge=False):
    """Top-k_cca canonical correlations and loadings, solved exactly.

    Whitens both Grams with their inverse square roots and takes the SVD
    of the whitened cross-covariance; the singular values are the
    canonical correlations, and mapping the singular vectors back through
    the whitening factors gives the loadings.  Desk scale only.
    """
    x = as_sparse(x)
    y = as_sparse(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: x {x.shape} vs y {y.shape}")
    p1, p2 = x.shape[1], y.shape[1]
    if max(p1, p2) > MAX_ORACLE_COLS:
        raise ValueError(
            f"exact solver is desk-scale only (p <= {MAX_ORACLE_COLS}), got {max(p1, p2)}"
        )
    if not 1 <= k_cca <= min(p1, p2):
        raise ValueError(f"k_cca={k_cca} outside [1, {min(p1, p2)}]")

    cxx = sparse_gram(x)
    cyy = sparse_gram(y)
    cxy = sparse_gram(x, y)
    wx = _inverse_sqrt_gram(cxx, "x", ridge)
    wy = _inverse_sqrt_gram(cyy, "y", ridge)
    u, d, vt = np.linalg.svd(wx @ cxy @ wy)
    return ExactCcaFactors(
        d=d[:k_cca],
        x_loadings=wx @ u[:, :k_cca],
        y_loadings=wy @ vt[:k_cca].T,
    )


def exact_cca_result(x, y, k_cca, ridge=False):
    """exact_cca packaged as a CcaResult for cross-algorithm comparison.

    The canonical-variable blocks are re-orthonormalized by QR (they are
    orthonormal only up to the solver's own tolerance, and ridge repair
    can push them further) and the correlations recomputed between the
    cleaned bases.
    """
    t0 = time.perf_counter()
    w0 = sparse_work.total
    x = as_sparse(x)
    y = as_sparse(y)
    factors = exact_cca(x, y, k_cca, ridge=ridge)
    bases = []
    for side, a, loadings in (("x", x, factors.x_loadings), ("y", y, factors.y_loadings)):
        q, r = thin_qr(sparse_dense_mul(a, loadings))
        if rank_deficient_columns(r).size:
            raise SingularGramError(side, "canonical variables are rank deficient")
        bases.append(q)
    corr = final_correlations(bases[0], bases[1])
    return CcaResult(
        x_basis=bases[0],
        y_basis=bases[1],
        correlations=corr,
        trace=None,
        wall_time=time.perf_counter() - t0,
        work=sparse_work.total - w0,
    )


def final_correlations(x_basis, y_basis):
    """Correlations between two orthonormal bases, sorted non-increasing.

    The CCA of two orthonormal blocks needs no whitening, so it reduces
    to the singular values of x_basis.T @ y_basis.  Values are clamped to
    [0, 1]; rounding can push them a hair over 1.
    """
    x_basis = np.asarray(x_basis, dtype=np.float64)
    y_basis = np.asarray(y_basis, dtype=np.float64)
    if x_basis.ndim != 2 or y_basis.ndim != 2 or x_basis.shape[0] != y_basis.shape[0]:
        raise ValueError(
            f"need two bases with equal row counts, got {x_basis.shape} and {y_basis.shape}"
        )
    for name, b in (("x_basis", x_basis), ("y_basis", y_basis)):
        gram = b.T @ b
        if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-6:
            raise ValueError(f"{name} is not orthonormal within 1e-6")
    s = np.linalg.svd(x_basis.T @ y_basis, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def _replace_deficient(m, bad, side, rng):
    fresh = sparse_dense_mul(side, rng.standard_normal((side.shape[1], bad.size)))
    m = np.array(m, copy=True)
    m[:, bad] = fresh
    return m


def _orthonormalize_iterate(m, side, rng, restarts, t, max_restarts=5):
    """Thin QR of an iterate, reviving rank-collapsed columns.

    Deficient columns are replaced with fresh random combinations of the
    side's data columns and the QR redone; gives up only when the data
    itself cannot support the block size.
    """
    for _ in range(max_restarts + 1):
        q, r = thin_qr(m)
        bad = rank_deficient_columns(r)
        if bad.size == 0:
            return q
        restarts.append(t)
        m = _replace_deficient(m, bad, side, rng)
    raise np.linalg.LinAlgError(
        f"iterate stayed rank-deficient after {max_restarts} restarts "
        f"(data rank below the requested block size?)"
    )


def iterative_ls_cca(
    x,
    y,
    k_cca,
    t1,
    ls_x,
    ls_y,
    seed,
    trace=False,
    reference=None,
):
    """Orthogonal iteration between two column spaces via pluggable LS solvers.

    Starts from a random combination of x's columns and alternates
    y-iterate = ls_y(x-iterate), x-iterate = ls_x(y-iterate), with a thin
    QR after every solve.  ls_x(rhs) must approximate the projection of
    rhs onto the column space of x (likewise ls_y); with exact solvers
    the iterates converge to the top-k_cca canonical subspaces.

    trace=True records correlation sums per outer iteration; passing
    reference=(x_ref, y_ref) additionally records subspace distances to
    those references.
    """
    x = as_sparse(x)
    y = as_sparse(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: x {x.shape} vs y {y.shape}")
    if not 1 <= k_cca <= min(x.shape[1], y.shape[1]):
        raise ValueError(f"k_cca={k_cca} outside [1, {min(x.shape[1], y.shape[1])}]")
    if t1 < 1:
        raise ValueError("t1 must be >= 1")
    if reference is not None:
        trace = True

    t_start = time.perf_counter()
    w_start = sparse_work.total
    rng = np.random.Generator(np.random.PCG64(seed))
    restarts = []
    corr_sums, seconds, dists_x, dists_y = [], [], [], []

    def make_trace():
        return ConvergenceTrace(
            corr_sums=np.array(corr_sums),
            seconds=np.array(seconds),
            dists_x=np.array(dists_x),
            dists_y=np.array(dists_y),
            restarts=tuple(restarts),
        )

    t = 0
    try:
        g = rng.standard_normal((x.shape[1], k_cca))
        x_hat = _orthonormalize_iterate(sparse_dense_mul(x, g), x, rng, restarts, 0)
        for t in range(1, t1 + 1):
            y_hat = _orthonormalize_iterate(ls_y(x_hat), y, rng, restarts, t)
            x_hat = _orthonormalize_iterate(ls_x(y_hat), x, rng, restarts, t)
            if trace:
                corr_sums.append(float(np.sum(final_correlations(x_hat, y_hat))))
                seconds.append(time.perf_counter() - t_start)
                if reference is not None:
                    dists_x.append(subspace_dist(x_hat, reference[0]))
                    dists_y.append(subspace_dist(y_hat, reference[1]))
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        raise IterationFailure(
            f"outer iteration {t} failed: {exc}", make_trace() if trace else None
        ) from exc

    trace_obj = make_trace() if trace else None
    return CcaResult(
        x_basis=x_hat,
        y_basis=y_hat,
        correlations=final_correlations(x_hat, y_hat),
        trace=trace_obj,
        wall_time=time.perf_counter() - t_start,
        work=sparse_work.total - w_start,
        seed=seed,
    )


def l_cca(x, y, k_cca, t1, ling_cfg, trace=False, reference=None):
    """Orthogonal iteration with the deflated-gradient LS solver per side.

    Each side's solver (top-k_pc singular basis plus t2 gradient steps) is
    built once and reused across all t1 outer iterations.  Sub-seeds for
    the random start and the two basis computations are derived from
    ling_cfg.seed, so one integer pins the whole run.
    """
    t0 = time.perf_counter()
    w0 = sparse_work.total
    x = as_sparse(x)
    y = as_sparse(y)
    children = np.random.SeedSequence(ling_cfg.seed).spawn(3)
    seed_init, seed_x, seed_y = (int(c.generate_state(1)[0]) for c in children)
    solver_x = build_solver(x, replace(ling_cfg, seed=seed_x))
    solver_y = build_solver(y, replace(ling_cfg, seed=seed_y))
    result = iterative_ls_cca(
        x,
        y,
        k_cca,
        t1,
        lambda rhs: ling_solve(solver_x, rhs),
        lambda rhs: ling_solve(solver_y, rhs),
        seed_init,
        trace=trace,
        reference=reference,
    )
    return replace(
        result,
        wall_time=time.perf_counter() - t0,
        work=sparse_work.total - w0,
        seed=ling_cfg.seed,
    )


def g_cca(x, y, k_cca, t1, t2, seed, trace=False, reference=None):
    """Pure-gradient variant: the deflated solver with deflation turned off."""
    cfg = LingConfig(k_pc=0, t2=t2, seed=seed)
    return l_cca(x, y, k_cca, t1, cfg, trace=trace, reference=reference)


def _diagonal_ls(a, side):
    """LS solve with the Gram replaced by its diagonal.

    Exact when a's columns have disjoint supports (indicator matrices);
    otherwise an approximation.  Zero-norm columns get a zero inverse
    entry, the pseudo-inverse convention.
    """
    d = gram_diagonal(a)
    n_zero = int(np.count_nonzero(d == 0))
    if n_zero:
        warnings.warn(
            f"{n_zero} zero-norm columns on side {side!r} treated as absent",
            stacklevel=3,
        )
    inv = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)

    def solve(rhs):
        return sparse_dense_mul(a, inv[:, None] * sparse_transpose_dense_mul(a, rhs))

    return solve


def d_cca(x, y, k_cca, t1, seed, trace=False, reference=None):
    """Orthogonal iteration with diagonal-Gram projections per side."""
    x = as_sparse(x)
    y = as_sparse(y)
    return iterative_ls_cca(
        x,
        y,
        k_cca,
        t1,
        _diagonal_ls(x, "x"),
        _diagonal_ls(y, "y"),
        seed,
        trace=trace,
        reference=reference,
    )


def rp_cca(x, y, k_cca, k_rpcca, power_iters=2, oversample=10, seed=0):
    """CCA restricted to randomized top singular bases of both sides.

    Computes a rank-k_rpcca orthonormal range basis per side, then an
    exact CCA between the bases; their Grams are identity, so whitening
    is trivial and the correlations are the singular values of the k-by-k
    cross product.  Correlation living outside the kept singular
    directions is invisible to this method by construction.
    """
    t0 = time.perf_counter()
    w0 = sparse_work.total
    x = as_sparse(x)
    y = as_sparse(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: x {x.shape} vs y {y.shape}")
    if not 1 <= k_cca <= k_rpcca <= min(x.shape[1], y.shape[1]):
        raise ValueError(
            f"need 1 <= k_cca <= k_rpcca <= {min(x.shape[1], y.shape[1])}, "
            f"got k_cca={k_cca}, k_rpcca={k_rpcca}"
        )
    children = np.random.SeedSequence(seed).spawn(2)
    seed_x, seed_y = (int(c.generate_state(1)[0]) for c in children)
    basis_x = randomized_top_singulars(
        x, k_rpcca, power_iters=power_iters, oversample=oversample, seed=seed_x
    )
    basis_y = randomized_top_singulars(
        y, k_rpcca, power_iters=power_iters, oversample=oversample, seed=seed_y
    )
    for side, basis in (("x", basis_x), ("y", basis_y)):
        if basis.rank_deficient:
            warnings.warn(
                f"side {side!r} has rank {basis.u1.shape[1]} < k_rpcca={k_rpcca}",
                stacklevel=2,
            )
    if min(basis_x.u1.shape[1], basis_y.u1.shape[1]) < k_cca:
        raise ValueError("data rank below k_cca; no full-size canonical basis exists")

    u, d, vt = np.linalg.svd(basis_x.u1.T @ basis_y.u1)
    x_basis = basis_x.u1 @ u[:, :k_cca]
    y_basis = basis_y.u1 @ vt[:k_cca].T
    return CcaResult(
        x_basis=x_basis,
        y_basis=y_basis,
        correlations=final_correlations(x_basis, y_basis),
        trace=None,
        wall_time=time.perf_counter() - t0,
        work=sparse_work.total - w0,
        seed=seed,
    )
