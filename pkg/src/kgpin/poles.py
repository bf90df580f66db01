"""Finite pole expansions on the compact Klein-bottle geometry.

Every field in Ker(Delta - alpha^2) with the pseudo-periodic invariance and
at most isolated poles is a finite linear combination of translated derivative
kernels; compactness makes the combination unique (an entire pseudo-periodic
remainder vanishes identically).  This module builds such combinations,
recovers their coefficients from samples by least squares, and estimates
singularity orders from log-log decay slopes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import NonIntegerOrderWarning, RankDeficientWarning
from .kernels import PeriodizedKernel, eval_many_x, periodized
from .lattice import orbit_distance

__all__ = [
    "PoleExpansion",
    "ExpansionField",
    "FitResult",
    "OrderEstimate",
    "multi_indices",
    "build_expansion",
    "fit_expansion",
    "singularity_order",
]

MIN_POLE_SEPARATION = 1e-6


def multi_indices(n: int, max_order: int, reduced: bool = False):
    """Multi-indices of length n with total order <= max_order.

    Ascending total order, lexicographic within an order.  With reduced=True
    only indices whose last component is <= 1 are kept: because the kernels
    satisfy sum_i d^2_i G = alpha^2 G off the poles, pure second derivatives
    are linearly dependent with the kernel itself, and the reduced set is a
    canonical independent basis of the derivative span (any d_n^2 can be
    rewritten through the operator identity).
    """
    out = [(0,) * n]
    for q in range(1, max_order + 1):
        block = set()
        for dirs in combinations_with_replacement(range(n), q):
            m = [0] * n
            for d in dirs:
                m[d] += 1
            if reduced and m[n - 1] > 1:
                continue
            block.add(tuple(m))
        out.extend(sorted(block, reverse=True))
    return out


@dataclass(frozen=True)
class PoleExpansion:
    """Poles a_i with per-pole derivative terms (multi-index, coefficient)."""

    poles: np.ndarray
    terms: tuple

    def __post_init__(self):
        poles = np.atleast_2d(np.asarray(self.poles, dtype=float))
        object.__setattr__(self, "poles", poles)
        terms = tuple(
            tuple((tuple(int(c) for c in m), float(b)) for m, b in per_pole)
            for per_pole in self.terms
        )
        object.__setattr__(self, "terms", terms)
        if len(terms) != len(poles):
            raise ValueError("need one term list per pole")
        n = poles.shape[1]
        for per_pole in terms:
            for m, _ in per_pole:
                if len(m) != n or any(mi < 0 for mi in m):
                    raise ValueError(f"bad multi-index {m} for dimension {n}")
                if sum(m) > 4:
                    raise ValueError("multi-index order above the supported depth 4")

    @property
    def coefficient_count(self) -> int:
        return sum(len(t) for t in self.terms)


def _check_poles(kernel: PeriodizedKernel, poles: np.ndarray):
    for i, a in enumerate(poles):
        if orbit_distance(kernel.spec, a, np.zeros(kernel.spec.n)) < MIN_POLE_SEPARATION:
            raise ValueError(f"pole {i} lies on the lattice orbit")
    for i, j in combinations_with_replacement(range(len(poles)), 2):
        if i == j:
            continue
        if orbit_distance(kernel.spec, poles[i], poles[j]) < MIN_POLE_SEPARATION:
            raise ValueError(f"poles {i} and {j} are congruent modulo the deck group")


class ExpansionField:
    """Evaluator sum_i sum_(m,b) b * (d^m G)(x, a_i) built on a base kernel."""

    def __init__(self, expansion: PoleExpansion, kernel: PeriodizedKernel):
        if kernel.order != 0:
            raise ValueError("base kernel must be derivative free")
        _check_poles(kernel, expansion.poles)
        self.expansion = expansion
        self.kernel = kernel

    def __call__(self, x) -> float:
        total = 0.0
        for pole, per_pole in zip(self.expansion.poles, self.expansion.terms):
            for m, b in per_pole:
                total += b * float(periodized(self.kernel.with_derivative(m), x, pole))
        return total

    def many(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(len(X))
        for pole, per_pole in zip(self.expansion.poles, self.expansion.terms):
            for m, b in per_pole:
                out += b * eval_many_x(self.kernel.with_derivative(m), X, pole)
        return out


def build_expansion(expansion: PoleExpansion, kernel: PeriodizedKernel) -> ExpansionField:
    """Finite combination of translated derivative kernels (empty -> zero field)."""
    return ExpansionField(expansion, kernel)


@dataclass
class FitResult:
    expansion: PoleExpansion
    residual: float
    max_residual: float
    rank: int
    n_coefficients: int
    sparsity: int
    residual_ok: bool


def fit_expansion(
    kernel: PeriodizedKernel,
    samples_x,
    samples_val,
    poles,
    max_order: int,
    residual_threshold: float = 1e-6,
    basis: str = "all",
) -> FitResult:
    """Least-squares pole-expansion fit of sampled field values.

    One coefficient per (pole, multi-index of total order <= max_order).  The
    sample count must be at least twice the coefficient count.  The residual
    is the RMS misfit; residual_ok=False flags an essential singularity or a
    missing pole.

    basis="all" keeps every multi-index; from order 2 up those columns are
    linearly dependent (sum_i d^2_i G = alpha^2 G), the solution is the
    minimal-norm representative, and RankDeficientWarning fires.
    basis="independent" uses the canonical reduced set (last component <= 1)
    with unique coefficients.
    """
    if basis not in ("all", "independent"):
        raise ValueError("basis must be 'all' or 'independent'")
    X = np.atleast_2d(np.asarray(samples_x, dtype=float))
    vals = np.asarray(samples_val, dtype=float)
    poles = np.atleast_2d(np.asarray(poles, dtype=float))
    _check_poles(kernel, poles)
    n = kernel.spec.n
    mset = multi_indices(n, max_order, reduced=(basis == "independent"))
    ncols = len(mset) * len(poles)
    if len(X) < 2 * ncols:
        raise ValueError(
            f"need at least {2 * ncols} samples for {ncols} coefficients, got {len(X)}"
        )
    A = np.empty((len(X), ncols))
    col = 0
    for pole in poles:
        for m in mset:
            A[:, col] = eval_many_x(kernel.with_derivative(m), X, pole)
            col += 1
    coeffs, _, rank, _ = np.linalg.lstsq(A, vals, rcond=None)
    if rank < ncols:
        warnings.warn(
            f"fit matrix rank {rank} below coefficient count {ncols}",
            RankDeficientWarning,
        )
    misfit = A @ coeffs - vals
    residual = float(np.sqrt(np.mean(misfit**2)))
    terms = []
    col = 0
    for _ in range(len(poles)):
        per_pole = []
        for m in mset:
            per_pole.append((m, float(coeffs[col])))
            col += 1
        terms.append(tuple(per_pole))
    expansion = PoleExpansion(poles=poles, terms=tuple(terms))
    sparsity = int(np.sum(np.abs(coeffs) > 1e-9))
    return FitResult(
        expansion=expansion,
        residual=residual,
        max_residual=float(np.max(np.abs(misfit))),
        rank=int(rank),
        n_coefficients=ncols,
        sparsity=sparsity,
        residual_ok=residual <= residual_threshold,
    )


@dataclass(frozen=True)
class OrderEstimate:
    """Estimated singularity order with the raw log-log slope."""

    order: int
    slope: float
    integer_like: bool


def singularity_order(field, s, radii, n_directions: int = 8, seed: int = 0) -> OrderEstimate:
    """Estimate the pole order of `field` at the point s.

    Samples max |field| over fixed random directions at each probe radius and
    fits the slope of log|f| against log(1/rho); the order is the slope
    rounded half-up.  A slope further than 0.2 from an integer triggers
    NonIntegerOrderWarning (log singularity, n = 2, or essential singularity).
    """
    s = np.asarray(s, dtype=float)
    radii = np.asarray(radii, dtype=float)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_directions, len(s)))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    peaks = np.empty(len(radii))
    for i, rho in enumerate(radii):
        peaks[i] = max(abs(float(field(s + rho * d))) for d in dirs)
    if np.any(peaks == 0.0):
        return OrderEstimate(order=0, slope=0.0, integer_like=True)
    t = np.log(1.0 / radii)
    y = np.log(peaks)
    slope = float(np.polyfit(t, y, 1)[0])
    order = math.floor(slope + 0.5)
    integer_like = abs(slope - round(slope)) <= 0.2
    if not integer_like:
        warnings.warn(
            f"singularity-order slope {slope:.3f} is not close to an integer",
            NonIntegerOrderWarning,
        )
    return OrderEstimate(order=int(order), slope=slope, integer_like=integer_like)
