"""Periodized Klein-Gordon kernels on Moebius-strip and Klein-bottle quotients.

The one-point kernel is the lattice periodization of the free fundamental
solution E_alpha; the two-point Green kernel is the orbit sum

    G(x, y) = sum_gamma chi(gamma) E_alpha(x - gamma y)

over the deck group, twisted by a pin character chi.  Sums run shell by shell
in the sup-norm of the deck label (lexicographic inside a shell) and are
accumulated with exactly rounded summation (math.fsum), so results are
bit-identical across runs.  Truncation is certified through the exponential
tail bound of the free kernel: each discarded shell is charged its cardinality
times a pointwise bound at the shell's minimal distance |v|_max - |x| - |y|.

Cartesian multi-index derivatives (total order <= 4) are analytic: with
D = (1/r) d/dr, a radial function obeys

    d^q f(|z|) / dz_{i_1} .. dz_{i_q}
        = sum over partial pairings P of {1..q} of
          (prod of delta factors) (prod of unpaired z_i) (D^{q-|P|} f)(|z|),

and D^j E_alpha is available in closed form (specfun._radial_scale).

Evaluations at one point are sequential by contract; evaluations at distinct
points share no state and may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NotCertifiedError, SingularPointError
from .lattice import (
    KLEIN,
    MOBIUS,
    ManifoldSpec,
    PinCharacter,
    _image_last_signs,
    _images,
    orbit_distance,
    shell,
    shell_count,
)
from .specfun import KernelParams, _radial_scale, tail_bound

__all__ = [
    "TruncationPolicy",
    "PeriodizedKernel",
    "CertifiedValue",
    "wp_mobius",
    "wp_klein",
    "green_mobius",
    "green_klein",
    "kernel_derivative",
    "periodized",
    "partial_sums",
    "eval_many_x",
    "eval_many_y",
    "grad_y_many",
]

MIN_SINGULAR_DISTANCE = 1e-9
_MAX_SHELLS = 400

ADAPTIVE = "adaptive"
FIXED_RADIUS = "fixed_radius"


@dataclass(frozen=True)
class TruncationPolicy:
    """How a lattice sum is cut off.

    adaptive: stop at the smallest shell radius whose certified tail is below
    tol (absolute).  fixed_radius: always sum to `radius` and report the
    certified tail alongside the value (error if the certificate regime
    alpha*(radius+1-|x|-|y|) >= 5 is not reached).
    """

    mode: str = ADAPTIVE
    radius: int = 0
    tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in (ADAPTIVE, FIXED_RADIUS):
            raise ValueError(f"mode must be '{ADAPTIVE}' or '{FIXED_RADIUS}'")
        if self.mode == ADAPTIVE and not (self.tol > 0.0):
            raise ValueError("adaptive truncation needs tol > 0")
        if self.mode == FIXED_RADIUS and (self.radius < 0 or not isinstance(self.radius, (int, np.integer))):
            raise ValueError("fixed_radius truncation needs an integer radius >= 0")

    @classmethod
    def adaptive(cls, tol: float = 1e-12) -> "TruncationPolicy":
        return cls(mode=ADAPTIVE, tol=tol)

    @classmethod
    def fixed(cls, radius: int, tol: float = 1e-12) -> "TruncationPolicy":
        return cls(mode=FIXED_RADIUS, radius=radius, tol=tol)


class CertifiedValue(float):
    """A float carrying its truncation certificate (tail bound, shells used)."""

    tail: float
    shells_used: int

    def __new__(cls, value: float, tail: float, shells_used: int):
        obj = super().__new__(cls, value)
        obj.tail = float(tail)
        obj.shells_used = int(shells_used)
        return obj

    def __repr__(self):
        return f"CertifiedValue({float(self)!r}, tail={self.tail:.3e}, shells={self.shells_used})"


def _zero_multi_index(n: int):
    return (0,) * n


@dataclass(frozen=True)
class PeriodizedKernel:
    """A periodized kernel: quotient, pin character, mass, derivative, truncation.

    `derivative` is a Cartesian multi-index (length n, total order <= 4) applied
    to the x argument of the kernel.
    """

    spec: ManifoldSpec
    chi: PinCharacter = None
    params: KernelParams = None
    derivative: tuple = None
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        if self.params is None:
            raise ValueError("params (KernelParams) is required")
        if self.params.n != self.spec.n:
            raise ValueError(
                f"params.n = {self.params.n} does not match manifold n = {self.spec.n}"
            )
        if self.chi is None:
            object.__setattr__(self, "chi", PinCharacter.trivial(self.spec.k))
        if self.chi.rank != self.spec.k:
            raise ValueError(
                f"character rank {self.chi.rank} does not match lattice rank {self.spec.k}"
            )
        if self.derivative is None:
            object.__setattr__(self, "derivative", _zero_multi_index(self.spec.n))
        m = tuple(int(mi) for mi in self.derivative)
        object.__setattr__(self, "derivative", m)
        if len(m) != self.spec.n or any(mi < 0 for mi in m):
            raise ValueError(f"derivative must be a multi-index of length {self.spec.n}")
        if sum(m) > 4:
            raise ValueError(f"derivative order {sum(m)} exceeds the supported depth 4")

    @property
    def order(self) -> int:
        return sum(self.derivative)

    def with_derivative(self, m) -> "PeriodizedKernel":
        return PeriodizedKernel(self.spec, self.chi, self.params, tuple(m), self.trunc)


# ---------------------------------------------------------------------------
# Multi-index derivative plans (merged partial pairings)
# ---------------------------------------------------------------------------


def _partial_pairings(positions):
    positions = list(positions)
    if not positions:
        yield [], []
        return
    first, rest = positions[0], positions[1:]
    for pairs, singles in _partial_pairings(rest):
        yield pairs, [first] + singles
    for idx in range(len(rest)):
        other = rest[idx]
        remaining = rest[:idx] + rest[idx + 1 :]
        for pairs, singles in _partial_pairings(remaining):
            yield [(first, other)] + pairs, singles


@lru_cache(maxsize=512)
def _derivative_plan(m: tuple):
    """[(j, singleton_dirs, count)] with j the D-order q - #pairs.

    Pairings whose delta factors vanish (paired positions with different
    directions) are dropped; pairings with equal singleton multisets merge.
    """
    dirs = [i for i, mi in enumerate(m) for _ in range(mi)]
    q = len(dirs)
    merged: dict = {}
    for pairs, singles in _partial_pairings(tuple(range(q))):
        if any(dirs[a] != dirs[b] for a, b in pairs):
            continue
        key = (q - len(pairs), tuple(sorted(dirs[s] for s in singles)))
        merged[key] = merged.get(key, 0) + 1
    return tuple((j, sdirs, cnt) for (j, sdirs), cnt in sorted(merged.items()))


def _term_values(kernel: PeriodizedKernel, Z: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Per-image values chi-free: (d^m E)(Z) with r = |Z| precomputed."""
    params = kernel.params
    if kernel.order == 0:
        return _radial_scale(params, r, 0)
    out = np.zeros_like(r)
    for j, sdirs, cnt in _derivative_plan(kernel.derivative):
        t = cnt * _radial_scale(params, r, j)
        for d in sdirs:
            t = t * Z[..., d]
        out += t
    return out


# ---------------------------------------------------------------------------
# Certified tails
# ---------------------------------------------------------------------------


def _deriv_pointwise_bound(params: KernelParams, plan, R: float) -> float:
    """Upper bound for |(d^m E)(z)| over all |z| >= R, any multi-index plan.

    Uses the rigorous inequality K_mu(z) <= 2 sqrt(pi/2z) e^{-z} e^{mu^2/(2z)}
    (valid for every z > 0) term by term; every pairing term's bound decreases
    in R, so evaluating at R bounds the whole range.
    """
    alpha, nu = params.alpha, params.nu
    c0 = (2.0 * math.pi) ** (-params.n / 2.0) * alpha ** (params.n - 2)
    z = alpha * R
    total = 0.0
    for j, sdirs, cnt in plan:
        mu = nu + j
        kbound = 2.0 * math.sqrt(math.pi / (2.0 * z)) * math.exp(-z + mu * mu / (2.0 * z))
        total += cnt * R ** len(sdirs) * c0 * alpha ** (2 * j) * z ** (-mu) * kbound
    return total


def _pointwise_bound(kernel: PeriodizedKernel, R: float) -> float:
    if kernel.order == 0:
        return tail_bound(kernel.params, R)
    return _deriv_pointwise_bound(kernel.params, _derivative_plan(kernel.derivative), R)


def _certify_regime_ok(kernel: PeriodizedKernel, rho: float, m_last: int) -> bool:
    return kernel.params.alpha * (m_last + 1 - rho) >= 5.0


def _tail_sum(kernel: PeriodizedKernel, rho: float, m_last: int) -> float:
    """Certified bound on the absolute value of everything beyond shell m_last."""
    params, k = kernel.params, kernel.spec.k
    alpha = params.alpha
    if not _certify_regime_ok(kernel, rho, m_last):
        raise NotCertifiedError(
            f"tail certificate needs alpha*(M+1-|x|-|y|) >= 5; "
            f"M={m_last}, |x|+|y|={rho:.3g}, alpha={alpha:.3g}"
        )
    total = 0.0
    m = m_last + 1
    while True:
        term = shell_count(k, m) * _pointwise_bound(kernel, m - rho)
        total += term
        ratio_cap = shell_count(k, m + 1) / shell_count(k, m) * math.exp(-alpha)
        if ratio_cap < 0.95 and m >= m_last + 3:
            return total + term * ratio_cap / (1.0 - ratio_cap)
        m += 1
        if m > m_last + 5000:
            raise NotCertifiedError(
                f"tail series does not contract (alpha = {alpha:.3g} too small)"
            )


def _required_radius(kernel: PeriodizedKernel, rho: float) -> int:
    """Smallest shell radius whose certified tail meets the adaptive tolerance."""
    pol = kernel.trunc
    if pol.mode == FIXED_RADIUS:
        return pol.radius
    alpha = kernel.params.alpha
    m = max(1, math.ceil(rho + 5.0 / alpha - 1.0))
    while m <= _MAX_SHELLS:
        if _tail_sum(kernel, rho, m) <= pol.tol:
            return m
        m += 1
    raise NotCertifiedError(
        f"adaptive truncation did not reach tol={pol.tol:g} within {_MAX_SHELLS} shells"
    )


# ---------------------------------------------------------------------------
# Evaluation engines
# ---------------------------------------------------------------------------


def _check_points(kernel: PeriodizedKernel, x, y):
    n = kernel.spec.n
    x = np.asarray(x, dtype=float)
    y = np.zeros(n) if y is None else np.asarray(y, dtype=float)
    if x.shape != (n,) or y.shape != (n,):
        raise ValueError(f"points must have dimension {n}")
    dist = orbit_distance(kernel.spec, x, y)
    if dist < MIN_SINGULAR_DISTANCE:
        raise SingularPointError(
            f"evaluation point is within {dist:.3e} of a singular orbit "
            f"(guard distance {MIN_SINGULAR_DISTANCE:g})"
        )
    return x, y


def _shell_terms(kernel: PeriodizedKernel, x: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
    """chi-weighted kernel terms of shell m, in lexicographic label order."""
    V = shell(kernel.spec.k, m).points
    Z = x[None, :] - _images(kernel.spec, V, y)
    r = np.linalg.norm(Z, axis=-1)
    return kernel.chi.signs(V) * _term_values(kernel, Z, r)


def _orbit_sum(kernel: PeriodizedKernel, x, y) -> CertifiedValue:
    x, y = _check_points(kernel, x, y)
    rho = float(np.linalg.norm(x) + np.linalg.norm(y))
    pol = kernel.trunc
    shell_sums = []
    if pol.mode == FIXED_RADIUS:
        for m in range(pol.radius + 1):
            shell_sums.append(math.fsum(_shell_terms(kernel, x, y, m).tolist()))
        tail = _tail_sum(kernel, rho, pol.radius)
        return CertifiedValue(math.fsum(shell_sums), tail, pol.radius)
    m = 0
    while m <= _MAX_SHELLS:
        shell_sums.append(math.fsum(_shell_terms(kernel, x, y, m).tolist()))
        if _certify_regime_ok(kernel, rho, m):
            tail = _tail_sum(kernel, rho, m)
            if tail <= pol.tol:
                return CertifiedValue(math.fsum(shell_sums), tail, m)
        m += 1
    raise NotCertifiedError(
        f"adaptive truncation did not reach tol={pol.tol:g} within {_MAX_SHELLS} shells"
    )


def wp_mobius(kernel: PeriodizedKernel, x) -> CertifiedValue:
    """Twisted periodization of E_alpha on the generalized Moebius strip.

    Evaluates sum_v chi(v) (d^m E_alpha)(x - gamma_v(0)), equal termwise (after
    the v -> -v reindex) to the series over translated/flipped copies of the
    free kernel.  Returns the value with its certified truncation tail.
    """
    if kernel.spec.kind != MOBIUS:
        raise ValueError("wp_mobius needs a Moebius-strip kernel")
    return _orbit_sum(kernel, x, None)


def wp_klein(kernel: PeriodizedKernel, x) -> CertifiedValue:
    """Twisted periodization of E_alpha on the generalized Klein bottle."""
    if kernel.spec.kind != KLEIN:
        raise ValueError("wp_klein needs a Klein-bottle kernel")
    return _orbit_sum(kernel, x, None)


def green_mobius(kernel: PeriodizedKernel, x, y) -> CertifiedValue:
    """Two-point Green kernel G(x, y) = sum_v chi(v) E_alpha(x - gamma_v y).

    Symmetric in (x, y); equivariant, G(x, gamma y) = chi(gamma) G(x, y).
    The kernel's multi-index derivative acts on x.
    """
    if kernel.spec.kind != MOBIUS:
        raise ValueError("green_mobius needs a Moebius-strip kernel")
    return _orbit_sum(kernel, x, y)


def green_klein(kernel: PeriodizedKernel, x, y) -> CertifiedValue:
    """Two-point Green kernel on the Klein bottle (orbit sum over the deck group)."""
    if kernel.spec.kind != KLEIN:
        raise ValueError("green_klein needs a Klein-bottle kernel")
    return _orbit_sum(kernel, x, y)


def periodized(kernel: PeriodizedKernel, x, y=None) -> CertifiedValue:
    """Kind-agnostic evaluation; y = None gives the one-point kernel."""
    return _orbit_sum(kernel, x, y)


def kernel_derivative(kernel: PeriodizedKernel, x, y=None) -> CertifiedValue:
    """Multi-index x-derivative of the (two-point) kernel; m = 0 is the kernel
    itself.  Termwise analytic differentiation; see the module docstring."""
    return _orbit_sum(kernel, x, y)


def partial_sums(kernel: PeriodizedKernel, x, m_max: int, y=None):
    """Partial sums S_0..S_{m_max} over growing sup-norm balls, with tails.

    Returns (sums, tails); tails[M] is the certified bound past shell M, or
    NaN where the certificate regime is not yet reached.  Diagnostic path for
    convergence studies; no tolerance check is applied.
    """
    x, y = _check_points(kernel, x, y)
    rho = float(np.linalg.norm(x) + np.linalg.norm(y))
    shell_sums = []
    sums = np.empty(m_max + 1)
    tails = np.full(m_max + 1, np.nan)
    for m in range(m_max + 1):
        shell_sums.append(math.fsum(_shell_terms(kernel, x, y, m).tolist()))
        sums[m] = math.fsum(shell_sums)
        if _certify_regime_ok(kernel, rho, m):
            tails[m] = _tail_sum(kernel, rho, m)
    return sums, tails


# ---------------------------------------------------------------------------
# Batched evaluation (matrix assembly, sampling); numpy accumulation
# ---------------------------------------------------------------------------


def _images_batch(spec: ManifoldSpec, V: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """gamma_v(y) for all rows v of V and y of Y; returns (len(Y), len(V), n)."""
    n, k = spec.n, spec.k
    out = np.empty((len(Y), len(V), n))
    out[:] = Y[:, None, :]
    if spec.kind == MOBIUS:
        out[:, :, :k] += V[None, :, :]
        signs = _image_last_signs(spec, V)
        out[:, :, n - 1] = signs[None, :] * Y[:, n - 1][:, None]
    else:
        out[:, :, : n - 1] += V[None, :, : n - 1]
        signs = _image_last_signs(spec, V)
        out[:, :, n - 1] = signs[None, :] * Y[:, n - 1][:, None] + V[None, :, n - 1]
    return out


def _batch_radius(kernel: PeriodizedKernel, rho: float) -> int:
    pol = kernel.trunc
    if pol.mode == FIXED_RADIUS:
        if not _certify_regime_ok(kernel, rho, pol.radius):
            raise NotCertifiedError("fixed radius below the certificate regime")
        return pol.radius
    return _required_radius(kernel, rho)


def _auto_chunk(kernel: PeriodizedKernel, M: int, requested) -> int:
    if requested is not None:
        return int(requested)
    widest = shell_count(kernel.spec.k, M)
    budget = 48_000_000 // max(1, widest * kernel.spec.n * 8 * 4)
    return int(min(4096, max(8, budget)))


def _guard_batch_radii(r: np.ndarray):
    if r.size and float(r.min()) < MIN_SINGULAR_DISTANCE:
        raise SingularPointError(
            f"a batched evaluation point lies within {float(r.min()):.3e} of a "
            f"singular orbit (guard distance {MIN_SINGULAR_DISTANCE:g})"
        )


def eval_many_y(kernel: PeriodizedKernel, x, Y, chunk=None) -> np.ndarray:
    """Kernel values G(x, y) for one x against many y (rows of Y)."""
    x = np.asarray(x, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if len(Y) == 0:
        return np.zeros(0)
    rho = float(np.linalg.norm(x) + np.max(np.linalg.norm(Y, axis=1)))
    M = _batch_radius(kernel, rho)
    chunk = _auto_chunk(kernel, M, chunk)
    out = np.zeros(len(Y))
    for lo in range(0, len(Y), chunk):
        Yc = Y[lo : lo + chunk]
        acc = np.zeros(len(Yc))
        for m in range(M + 1):
            V = shell(kernel.spec.k, m).points
            Z = x[None, None, :] - _images_batch(kernel.spec, V, Yc)
            r = np.linalg.norm(Z, axis=-1)
            _guard_batch_radii(r)
            acc += (kernel.chi.signs(V)[None, :] * _term_values(kernel, Z, r)).sum(axis=1)
        out[lo : lo + chunk] = acc
    return out


def eval_many_x(kernel: PeriodizedKernel, X, y=None, chunk=None) -> np.ndarray:
    """Kernel values G(x, y) for many x (rows of X) against one y."""
    X = np.asarray(X, dtype=float)
    n = kernel.spec.n
    y = np.zeros(n) if y is None else np.asarray(y, dtype=float)
    if len(X) == 0:
        return np.zeros(0)
    rho = float(np.max(np.linalg.norm(X, axis=1)) + np.linalg.norm(y))
    M = _batch_radius(kernel, rho)
    chunk = _auto_chunk(kernel, M, chunk)
    out = np.zeros(len(X))
    for lo in range(0, len(X), chunk):
        Xc = X[lo : lo + chunk]
        acc = np.zeros(len(Xc))
        for m in range(M + 1):
            V = shell(kernel.spec.k, m).points
            img = _images(kernel.spec, V, y)
            Z = Xc[:, None, :] - img[None, :, :]
            r = np.linalg.norm(Z, axis=-1)
            _guard_batch_radii(r)
            acc += (kernel.chi.signs(V)[None, :] * _term_values(kernel, Z, r)).sum(axis=1)
        out[lo : lo + chunk] = acc
    return out


def grad_y_many(kernel: PeriodizedKernel, x, Y, chunk=None) -> np.ndarray:
    """Gradient of G(x, .) with respect to y at many y; returns (len(Y), n).

    d/dy_i G = - sum_v chi(v) s_v^{[i=n]} (d_i E)(x - gamma_v y), with s_v the
    sign of the last-coordinate linear part of gamma_v.
    """
    if kernel.order != 0:
        raise ValueError("grad_y_many needs a derivative-free kernel")
    x = np.asarray(x, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = kernel.spec.n
    if len(Y) == 0:
        return np.zeros((0, n))
    rho = float(np.linalg.norm(x) + np.max(np.linalg.norm(Y, axis=1)))
    M = _batch_radius(kernel, rho)
    chunk = _auto_chunk(kernel, M, chunk)
    out = np.zeros((len(Y), n))
    for lo in range(0, len(Y), chunk):
        Yc = Y[lo : lo + chunk]
        acc = np.zeros((len(Yc), n))
        for m in range(M + 1):
            V = shell(kernel.spec.k, m).points
            Z = x[None, None, :] - _images_batch(kernel.spec, V, Yc)
            r = np.linalg.norm(Z, axis=-1)
            _guard_batch_radii(r)
            d1 = _radial_scale(kernel.params, r, 1)  # (Nc, Nv)
            w = kernel.chi.signs(V)[None, :] * d1
            grad = Z * w[:, :, None]  # gradient wrt z, chi-weighted
            s = _image_last_signs(kernel.spec, V)
            grad[:, :, n - 1] *= s[None, :]
            acc += -grad.sum(axis=1)
        out[lo : lo + chunk] = acc
    return out
