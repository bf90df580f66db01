"""Finite pole expansions on the Klein bottle and their recovery from samples.

On the compact quotient every field in the operator kernel with isolated poles
is a finite combination of translated derivative kernels, and the combination
is unique (an entire pseudo-periodic remainder vanishes).  The demo builds a
two-pole field, recovers its coefficients from scattered samples, then offers
a spurious third pole and watches its coefficients come back as zeros.
"""

import sys

import numpy as np

from kgpin import (
    KernelParams,
    ManifoldSpec,
    PeriodizedKernel,
    PoleExpansion,
    TruncationPolicy,
    build_expansion,
    fit_expansion,
    orbit_distance,
    singular_distance,
)

SPEC = ManifoldSpec.klein(2)
ALPHA = 2.0


def sample_points(rng, poles, count):
    out = []
    while len(out) < count:
        x = np.array([rng.uniform(0.03, 0.97), rng.uniform(0.03, 1.97)])
        if singular_distance(SPEC, x) < 0.2:
            continue
        if min(orbit_distance(SPEC, x, p) for p in poles) < 0.18:
            continue
        out.append(x)
    return np.array(out)


def main():
    kernel = PeriodizedKernel(
        SPEC, params=KernelParams(2, ALPHA), trunc=TruncationPolicy.adaptive(1e-12)
    )
    poles = np.array([[0.31, 0.47], [0.72, 1.33]])
    truth = PoleExpansion(
        poles=poles,
        terms=(
            (((0, 0), 1.25), ((1, 0), -0.40)),
            (((0, 1), 0.70),),
        ),
    )
    field = build_expansion(truth, kernel)
    rng = np.random.default_rng(7)
    X = sample_points(rng, poles, 40)
    vals = field.many(X)

    print("## round trip with the true poles")
    fit = fit_expansion(kernel, X, vals, poles, max_order=1)
    print(f"  residual (rms) {fit.residual:.2e}   rank {fit.rank}/{fit.n_coefficients}")
    for i, per_pole in enumerate(fit.expansion.terms):
        shown = ", ".join(f"m={m} b={b:+.6f}" for m, b in per_pole if abs(b) > 1e-8)
        print(f"  pole {poles[i]}: {shown}")

    print("\n## same samples, spurious third pole offered")
    spurious = np.vstack([poles, [0.5, 0.9]])
    fit2 = fit_expansion(kernel, X, vals, spurious, max_order=1)
    mags = [max(abs(b) for _, b in per_pole) for per_pole in fit2.expansion.terms]
    print(f"  residual (rms) {fit2.residual:.2e}")
    print(f"  max |coefficient| per pole: {mags[0]:.3f}, {mags[1]:.3f}, {mags[2]:.2e}")
    print("  the spurious pole's coefficients are numerically zero: the compact")
    print("  geometry leaves no entire pseudo-periodic field to hide in")
    return 0


if __name__ == "__main__":
    sys.exit(main())
