"""Subspace distance and convergence-rate measurement.

Everything here is instrumentation: a metric between column spaces, a
geometric-rate fit over the tail of an error curve, and the scalar summary
(sum of captured correlations) used to compare algorithms.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import rank_deficient_columns, thin_qr


def subspace_dist(w, z):
    """Spectral-norm distance between the column spaces of w and z.

    Equals the sine of the largest principal angle, i.e. the spectral norm
    of the difference of the two orthogonal projectors, but is computed
    from n x k quantities only: orthonormalize both sides and take the
    largest singular value of q_z - q_w (q_w^T q_z).  That residual form
    agrees with sqrt(1 - sigma_min(q_w^T q_z)^2) in exact arithmetic and,
    unlike it, resolves distances all the way down to machine precision
    (the sigma_min route bottoms out near sqrt(eps)).
    """
    w = np.asarray(w, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if w.ndim != 2 or z.ndim != 2 or w.shape != z.shape:
        raise ValueError(f"need two equal-shape matrices, got {w.shape} and {z.shape}")

    q_w, r_w = thin_qr(w)
    q_z, r_z = thin_qr(z)
    for name, r in (("w", r_w), ("z", r_z)):
        if rank_deficient_columns(r).size:
            raise ValueError(f"argument {name} is rank deficient")

    def one_sided(qa, qb):
        resid = qb - qa @ (qa.T @ qb)
        return np.linalg.svd(resid, compute_uv=False)[0]

    d = max(one_sided(q_w, q_z), one_sided(q_z, q_w))
    return float(min(d, 1.0))


@dataclass(frozen=True)
class RateFit:
    """Geometric decay rate fitted to the tail of an error curve.

    ratio is exp(slope) of log-error over the tail iterations; theoretical
    carries the reference ratio a test compares against, margin the excess
    it tolerates.
    """

    log_errors: np.ndarray
    ratio: float
    theoretical: float = field(default=float("nan"))
    margin: float = 0.0

    def within_margin(self):
        return bool(self.ratio <= self.theoretical + self.margin)


def fit_geometric_rate(errors, tail_fraction=0.5, theoretical=float("nan"), margin=0.0):
    """Fit the per-iteration decay ratio over the tail of an error curve.

    The head of a convergence curve is transient-dominated, so only the
    last ceil(tail_fraction * len) points enter the least-squares slope of
    log(error) against iteration index.  Requires at least 4 tail points,
    all strictly positive; curves that reach exact zero must be truncated
    by the caller first.
    """
    errors = np.asarray(errors, dtype=np.float64)
    if errors.ndim != 1:
        raise ValueError("errors must be a 1-d sequence")
    if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        raise ValueError("errors must be strictly positive and finite")
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")

    n_tail = int(np.ceil(tail_fraction * errors.size))
    if n_tail < 4:
        raise ValueError(f"need >= 4 tail points, got {n_tail}")
    tail = np.log(errors[-n_tail:])
    slope = np.polynomial.polynomial.polyfit(np.arange(n_tail), tail, 1)[1]
    return RateFit(
        log_errors=np.log(errors),
        ratio=float(np.exp(slope)),
        theoretical=float(theoretical),
        margin=float(margin),
    )


def captured_correlation_sum(result):
    """Total correlation captured by a run: the sum of its correlations."""
    return float(np.sum(result.correlations))
