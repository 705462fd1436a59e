"""Deflated-gradient least-squares solver tests.

Expected values come from dense QR projections and dense SVD spectra,
computed with scipy directly in the tests.
"""

import numpy as np
import pytest
import scipy.linalg

import itercca as ic

from conftest import (
    RATE_SPECTRUM,
    cliff_sparse,
    controlled_spectrum,
    random_sparse,
    rng_for,
    truncate_curve,
)


def dense_projection(a_sparse, y):
    q = scipy.linalg.qr(a_sparse.toarray(), mode="economic")[0]
    return q @ (q.T @ y)


def error_curve(solve, exact, t2_range):
    return np.array([np.linalg.norm(solve(t2) - exact) ** 2 for t2 in t2_range])


def test_config_validates_fields():
    cfg = ic.LingConfig(k_pc=3, t2=10)
    assert cfg.rsvd_power_iters == 2
    for bad in (
        dict(k_pc=-1, t2=5),
        dict(k_pc=2, t2=-1),
        dict(k_pc=2, t2=5, rsvd_power_iters=-2),
    ):
        with pytest.raises(ValueError):
            ic.LingConfig(**bad)


def test_build_solver_without_deflation_has_no_basis():
    x = random_sparse(20, 8, 0.5, seed=0)
    solver = ic.build_solver(x, ic.LingConfig(k_pc=0, t2=5))
    assert solver.basis is None


def test_build_solver_on_identity_returns_orthonormal_pair():
    # spectrum is fully tied, so only orthonormality and width are pinned
    x = ic.as_sparse(np.eye(4))
    solver = ic.build_solver(x, ic.LingConfig(k_pc=2, t2=0))
    u1 = solver.basis.u1
    assert u1.shape == (4, 2)
    np.testing.assert_allclose(u1.T @ u1, np.eye(2), atol=1e-10)


def test_build_solver_matches_dense_top_subspace():
    x = cliff_sparse(3)
    xd = x.toarray()
    evals, evecs = scipy.linalg.eigh(xd.T @ xd)
    order = np.argsort(evals)[::-1][:5]
    u_exact = xd @ evecs[:, order] / np.sqrt(evals[order])
    solver = ic.build_solver(x, ic.LingConfig(k_pc=5, t2=0, rsvd_power_iters=3))
    u1 = solver.basis.u1
    resid = max(
        scipy.linalg.svd(u_exact - u1 @ (u1.T @ u_exact), compute_uv=False)[0],
        scipy.linalg.svd(u1 - u_exact @ (u_exact.T @ u1), compute_uv=False)[0],
    )
    assert resid <= 1e-6


def test_gd_zero_rhs_stays_zero():
    x = random_sparse(15, 6, 0.5, seed=1)
    for t2 in (0, 1, 7):
        out = ic.gd_least_squares(x, np.zeros((15, 2)), t2)
        assert np.all(out == 0.0)


def test_gd_orthonormal_design_converges_in_one_step():
    q = ic.thin_qr(rng_for(2).standard_normal((12, 4))).q
    x = ic.as_sparse(q)
    y = rng_for(3).standard_normal((12, 3))
    out = ic.gd_least_squares(x, y, 1)
    np.testing.assert_allclose(out, q @ (q.T @ y), atol=1e-10)


def test_gd_accepts_single_column_vector():
    x = random_sparse(10, 4, 0.6, seed=4)
    y = rng_for(5).standard_normal(10)
    out = ic.gd_least_squares(x, y, 3)
    assert out.shape == y.shape


def test_gd_rate_meets_full_spectrum_bound():
    x = random_sparse(40, 10, 0.5, seed=5)
    y = rng_for(50).standard_normal((40, 2))
    exact = dense_projection(x, y)
    sig = scipy.linalg.svd(x.toarray(), compute_uv=False)
    r = (sig[0] ** 2 - sig[-1] ** 2) / (sig[0] ** 2 + sig[-1] ** 2)
    errs = error_curve(lambda t2: ic.gd_least_squares(x, y, t2), exact, range(41))
    fit = ic.fit_geometric_rate(truncate_curve(errs, 1e-8), tail_fraction=0.5)
    assert fit.ratio <= r ** 2 + 0.02


def test_gd_objective_monotone_per_column():
    x = random_sparse(40, 10, 0.5, seed=5)
    y = rng_for(50).standard_normal((40, 2))
    exact = dense_projection(x, y)
    prev = None
    for t2 in range(25):
        col = np.sum((ic.gd_least_squares(x, y, t2) - exact) ** 2, axis=0)
        if prev is not None:
            assert np.all(col <= prev + 1e-12)
        prev = col


def test_solve_contracts_range_orthogonal_rhs():
    x = random_sparse(30, 8, 0.5, seed=6)
    q = scipy.linalg.qr(x.toarray(), mode="economic")[0]
    z = rng_for(7).standard_normal((30, 2))
    y = z - q @ (q.T @ z)
    solver = ic.build_solver(x, ic.LingConfig(k_pc=3, t2=10, seed=1))
    out = ic.ling_solve(solver, y)
    assert np.linalg.norm(out) <= np.linalg.norm(y)


def test_solve_exact_when_deflation_covers_rank():
    x = random_sparse(60, 30, 0.5, seed=8)
    y = rng_for(9).standard_normal((60, 4))
    solver = ic.build_solver(x, ic.LingConfig(k_pc=30, t2=0, seed=2))
    np.testing.assert_allclose(
        ic.ling_solve(solver, y), dense_projection(x, y), atol=1e-8
    )


def test_solve_rate_meets_deflated_bound():
    x = controlled_spectrum(60, 30, RATE_SPECTRUM, seed=0)
    y = rng_for(100).standard_normal((60, 3))
    exact = dense_projection(x, y)
    lam = RATE_SPECTRUM
    r = (lam[5] ** 2 - lam[-1] ** 2) / (lam[5] ** 2 + lam[-1] ** 2)

    def solve(t2):
        cfg = ic.LingConfig(k_pc=5, t2=t2, rsvd_power_iters=30, seed=9)
        return ic.ling_solve(ic.build_solver(x, cfg), y)

    errs = error_curve(solve, exact, range(31))
    fit = ic.fit_geometric_rate(truncate_curve(errs, 1e-8), tail_fraction=0.5)
    assert fit.ratio <= r ** 2 + 0.02


def test_deflation_no_worse_than_plain_gd_on_decaying_spectrum():
    x = controlled_spectrum(60, 30, RATE_SPECTRUM, seed=0)
    y = rng_for(100).standard_normal((60, 3))
    exact = dense_projection(x, y)
    for t2 in (5, 15):
        errs = {}
        for k_pc in (0, 10):
            cfg = ic.LingConfig(k_pc=k_pc, t2=t2, rsvd_power_iters=30, seed=9)
            errs[k_pc] = np.linalg.norm(ic.ling_solve(ic.build_solver(x, cfg), y) - exact)
        assert errs[10] <= errs[0]


def test_solve_is_nearly_idempotent():
    x = controlled_spectrum(60, 30, RATE_SPECTRUM, seed=0)
    y = rng_for(100).standard_normal((60, 3))
    exact = dense_projection(x, y)
    solver = ic.build_solver(x, ic.LingConfig(k_pc=5, t2=30, rsvd_power_iters=30, seed=9))
    once = ic.ling_solve(solver, y)
    twice = ic.ling_solve(solver, once)
    solver_err = np.linalg.norm(once - exact)
    assert np.linalg.norm(twice - once) <= 2.0 * solver_err + 1e-12
    assert np.linalg.norm(twice - exact) <= 2.0 * solver_err + 1e-12
