"""Radial profiles of the free Klein-Gordon kernel and its certified tail bound.

The fundamental solution of Delta - alpha^2 in R^n is radial, negative, and
decays like e^{-alpha r} r^{-(n-1)/2}; near the origin it blows up with pole
order n-2 (log for n = 2).  This script tabulates profiles for a few
dimensions, shows the tail bound hugging the true decay, and verifies the
singularity order by a log-log slope fit.  Run with --plot for figures.
"""

import argparse
import sys

import numpy as np

from kgpin import KernelParams, singularity_order, tail_bound, yukawa


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true", help="show matplotlib figures")
    args = ap.parse_args(argv)

    radii = np.geomspace(0.05, 12.0, 40)
    print("# free-kernel magnitude |E_alpha(r)|, alpha = 1")
    print("r " + " ".join(f"n={n}" for n in (2, 3, 4, 5)))
    table = {}
    for n in (2, 3, 4, 5):
        params = KernelParams(n, 1.0)
        table[n] = np.array([abs(yukawa(params, r)) for r in radii])
    for i, r in enumerate(radii):
        print(f"{r:8.4f} " + " ".join(f"{table[n][i]:12.5e}" for n in (2, 3, 4, 5)))

    print("\n# certified tail bound vs true value (n = 3, alpha = 1)")
    params = KernelParams(3, 1.0)
    for R in (5.0, 10.0, 20.0, 30.0):
        bound = tail_bound(params, R)
        truth = abs(yukawa(params, R))
        print(f"R = {R:5.1f}: bound {bound:.4e}  |E(R)| {truth:.4e}  ratio {bound / truth:.2f}")

    print("\n# singularity order from log-log slope (expect n - 2)")
    for n in (3, 4, 5):
        params = KernelParams(n, 1.0)
        field = lambda z: yukawa(params, float(np.linalg.norm(z)))
        est = singularity_order(field, np.zeros(n), np.geomspace(1e-4, 1e-2, 6))
        print(f"n = {n}: estimated order {est.order} (slope {est.slope:.3f})")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots()
        for n in (2, 3, 4, 5):
            ax.loglog(radii, table[n], label=f"n = {n}")
        ax.set_xlabel("r")
        ax.set_ylabel("|E_alpha(r)|")
        ax.legend()
        ax.set_title("free Klein-Gordon kernel, alpha = 1")
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
