#!/usr/bin/env python3
"""
Show how projecting out the top singular block accelerates least squares.

Builds a 60x30 design with a known singular spectrum, solves one LS
problem with plain exact-line-search gradient descent and with the
deflated solver at two subspace widths, and prints the observed
per-step error ratios next to the predicted convergence rates.
"""

import numpy as np

import itercca as ic

SPECTRUM = np.concatenate([
    np.full(5, 1.0),
    np.full(5, 0.72),
    np.linspace(0.5, 0.35, 20),
])


def controlled_design(n, spectrum, seed):
    """Sparse matrix whose singular values equal `spectrum` exactly."""
    p = spectrum.size
    rng = np.random.default_rng(seed)
    u = ic.thin_qr(rng.standard_normal((n, p))).q
    v = ic.thin_qr(rng.standard_normal((p, p))).q
    return ic.as_sparse((u * spectrum) @ v.T)


def error_curve(x, rhs, k_pc, t2_max):
    """Squared distances between the returned fit and the exact projection."""
    xd = x.toarray()
    exact_fit = xd @ np.linalg.lstsq(xd, rhs, rcond=None)[0]
    errors = []
    for t2 in range(t2_max + 1):
        if k_pc == 0:
            fit = ic.gd_least_squares(x, rhs, t2=t2)
        else:
            cfg = ic.LingConfig(k_pc=k_pc, t2=t2, rsvd_power_iters=30, seed=9)
            solver = ic.build_solver(x, cfg)
            fit = ic.ling_solve(solver, rhs)
        errors.append(np.linalg.norm(fit - exact_fit) ** 2)
    return np.array(errors)


def main():
    x = controlled_design(60, SPECTRUM, seed=3)
    rng = np.random.default_rng(17)
    rhs = rng.standard_normal((60, 2))

    print(f"design: {x.shape}, singular values from "
          f"{SPECTRUM[0]:.2f} down to {SPECTRUM[-1]:.2f}")
    print("=" * 66)
    print(f"{'k_pc':>5}  {'predicted rate':>14}  {'fitted rate':>12}")
    for k_pc in (0, 5, 10):
        lam_top = SPECTRUM[k_pc]
        lam_bot = SPECTRUM[-1]
        # steepest descent contracts the error norm by (kappa-1)/(kappa+1)
        # per step, kappa being the squared-singular-value spread of the
        # block the solver still sees; squared errors contract at its square
        r = (lam_top**2 - lam_bot**2) / (lam_top**2 + lam_bot**2)
        errors = error_curve(x, rhs, k_pc, t2_max=30)
        keep = errors > 1e-8 * errors[0]
        fitted = ic.fit_geometric_rate(errors[keep])
        print(f"{k_pc:>5}  {r**2:>14.3f}  {fitted.ratio:>12.3f}")
    print("=" * 66)
    print("Removing the flat top of the spectrum shrinks the conditioning")
    print("of what gradient descent still has to handle, so each extra")
    print("inner step buys a much larger error reduction.")


if __name__ == "__main__":
    main()
