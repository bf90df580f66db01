"""Free-space fundamental solution of the Klein-Gordon operator Delta - alpha^2.

For alpha > 0 the fundamental solution in R^n is radial and real,

    E_alpha(r) = - (alpha/2)^(n/2-1) r^(1-n/2) K_{n/2-1}(alpha r) / (2 pi^(n/2)),

normalized so that (Delta - alpha^2) E_alpha = +delta_0.  For n = 3 this is the
Yukawa potential -exp(-alpha r)/(4 pi r), for n = 2 it is -K_0(alpha r)/(2 pi).
The module also provides Gamma at half-integers, the unit-sphere area, radial
derivatives of E_alpha, and a certified exponential tail bound used to truncate
lattice sums.

Everything here is a pure function of its arguments; concurrent use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kve as _scipy_kve

from .errors import NotCertifiedError, OverflowGuardError

__all__ = [
    "KernelParams",
    "RadialKernelValue",
    "gamma_half",
    "sphere_area",
    "bessel_k",
    "yukawa",
    "yukawa_radial_derivative",
    "yukawa_profile",
    "tail_bound",
]

_SQRT_PI = math.sqrt(math.pi)
# exp(-z) underflows to 0 for z above this; K_nu(z) is then an exact 0 in doubles
_UNDERFLOW_Z = 745.2
_LOG_HUGE = 709.0


@dataclass(frozen=True)
class KernelParams:
    """Dimension and mass parameter governing every kernel evaluation.

    n      : ambient dimension, n >= 2
    alpha  : mass / inverse screening length, alpha > 0 (the root of alpha^2
             is chosen positive).  alpha = 0 is rejected: the harmonic case is
             out of scope and the lattice-sum convergence relies on the
             exponential decay e^{-alpha r}.
    """

    n: int
    alpha: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not (self.alpha > 0.0) or not math.isfinite(self.alpha):
            raise ValueError(
                f"alpha must be a positive finite real (alpha = 0 is the harmonic "
                f"case and is not supported), got {self.alpha!r}"
            )

    @property
    def nu(self) -> float:
        """Bessel order n/2 - 1 of the radial profile."""
        return 0.5 * self.n - 1.0


@dataclass(frozen=True)
class RadialKernelValue:
    """Value of E_alpha at a radius together with radial derivatives.

    derivatives[j] is the j-th radial derivative, so derivatives[0] == value.
    """

    value: float
    derivatives: tuple


def gamma_half(two_x: int) -> float:
    """Gamma(two_x / 2) by the exact recurrence from Gamma(1/2) and Gamma(1).

    Parameters
    ----------
    two_x : positive integer (twice the argument).
    """
    if not isinstance(two_x, (int, np.integer)) or two_x < 1:
        raise ValueError(f"two_x must be a positive integer, got {two_x!r}")
    if two_x % 2 == 0:
        # Gamma(m) = (m-1)!
        return float(math.factorial(two_x // 2 - 1))
    val = _SQRT_PI
    x = 0.5
    while x + 1.0 <= two_x / 2.0:
        val *= x
        x += 1.0
    return val


def sphere_area(n: int) -> float:
    """Surface measure omega_n of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    return 2.0 * math.pi ** (n / 2.0) / gamma_half(int(n))


def _is_half_integer(nu: float) -> bool:
    return abs(2.0 * nu - round(2.0 * nu)) < 1e-12


def _kv_half_integer(m: int, z):
    """K_{m+1/2}(z) from the elementary closed form.

    K_{m+1/2}(z) = sqrt(pi/(2z)) e^{-z} sum_{j=0}^{m} (m+j)! / (j! (m-j)!) (2z)^{-j}.
    All terms are positive, so the sum is cancellation free for every z > 0.
    """
    z = np.asarray(z, dtype=float)
    acc = np.zeros_like(z)
    for j in range(m, -1, -1):
        coeff = math.factorial(m + j) / (math.factorial(j) * math.factorial(m - j))
        acc = acc + coeff * (2.0 * z) ** (-j)
    return np.sqrt(math.pi / (2.0 * z)) * np.exp(-z) * acc


def _kv_array(nu: float, z):
    """K_nu for an array of positive arguments; closed form at half-integer nu.

    Integer orders go through the exponentially scaled routine so the result
    underflows gracefully (kv itself flushes to zero already near z ~ 700).
    """
    if _is_half_integer(nu) and round(2 * nu) % 2 == 1:
        return _kv_half_integer(int(round(nu - 0.5)), z)
    z = np.asarray(z, dtype=float)
    return _scipy_kve(nu, z) * np.exp(-z)


def bessel_k(nu: float, z: float) -> float:
    """Modified Bessel function K_nu(z) for nonnegative integer/half-integer nu.

    Half-integer orders use the exact finite closed form; integer orders use
    scipy's routine.  Underflow of e^{-z} (z > ~745) yields an exact 0.
    Raises OverflowGuardError when the result would overflow double precision.
    """
    if not (z > 0.0) or not math.isfinite(z):
        raise ValueError(f"z must be positive and finite, got {z!r}")
    if nu < 0 or not _is_half_integer(nu):
        raise ValueError(f"nu must be a nonnegative integer or half-integer, got {nu!r}")
    if nu > 0:
        # small-z estimate K_nu ~ Gamma(nu)/2 * (2/z)^nu
        log_est = math.lgamma(nu) - math.log(2.0) + nu * (math.log(2.0) - math.log(z))
        if log_est > _LOG_HUGE:
            raise OverflowGuardError(
                f"K_nu overflow: nu={nu}, z={z} (log-scale estimate {log_est:.1f})"
            )
    if z > _UNDERFLOW_Z:
        return 0.0
    return float(_kv_array(nu, z))


# ---------------------------------------------------------------------------
# E_alpha and its derivatives, through F_mu(z) = z^-mu K_mu(z).
#
# With D = (1/r) d/dr and E(r) = c0 * F_nu(alpha r), c0 = -(2 pi)^{-n/2} alpha^{n-2},
# the identity d/dz [z^-mu K_mu(z)] = -z^{-mu} K_{mu+1}(z) gives
#     D^j E (r) = c0 * (-alpha^2)^j * F_{nu+j}(alpha r),
# which is what the Cartesian multi-index derivatives of the kernels consume.
# ---------------------------------------------------------------------------


def _c0(params: KernelParams) -> float:
    return -((2.0 * math.pi) ** (-params.n / 2.0)) * params.alpha ** (params.n - 2)


def _radial_scale(params: KernelParams, r, j: int):
    """D^j E_alpha at radii r (array-safe), D = (1/r) d/dr."""
    z = params.alpha * np.asarray(r, dtype=float)
    mu = params.nu + j
    return _c0(params) * (-(params.alpha**2)) ** j * z ** (-mu) * _kv_array(mu, z)


def yukawa(params: KernelParams, r: float) -> float:
    """Fundamental solution E_alpha at radius r > 0 (negative for all r)."""
    if not (r > 0.0):
        raise ValueError(f"radius must be positive, got {r!r}")
    return float(_radial_scale(params, r, 0))


def _derivative_terms(order: int):
    """d^order/dr^order E as terms coeff * r^p * F_{nu+j}(alpha r) (scaled).

    Returns {(p, j): coeff}; the alpha powers are restored in the evaluator via
    d/dr [r^p F_j(alpha r)] = p r^{p-1} F_j - alpha^2 r^{p+1} F_{j+1}.
    """
    terms = {(0, 0): 1.0}
    for _ in range(order):
        new: dict = {}
        for (p, j), c in terms.items():
            if p != 0:
                new[(p - 1, j)] = new.get((p - 1, j), 0.0) + c * p
            new[(p + 1, j + 1)] = new.get((p + 1, j + 1), 0.0) - c
        terms = new
    return terms


def yukawa_radial_derivative(params: KernelParams, r: float, order: int) -> float:
    """order-th radial derivative of E_alpha at r > 0 (order 0 is the value)."""
    if not (r > 0.0):
        raise ValueError(f"radius must be positive, got {r!r}")
    if not isinstance(order, (int, np.integer)) or order < 0:
        raise ValueError(f"order must be a nonnegative integer, got {order!r}")
    if order == 0:
        return yukawa(params, r)
    total = 0.0
    for (p, j), c in _derivative_terms(order).items():
        # terms store alpha^{2j} implicitly; _radial_scale carries (-alpha^2)^j
        total += c * (-1.0) ** j * r**p * float(_radial_scale(params, r, j))
    return total


def yukawa_profile(params: KernelParams, r: float, max_order: int) -> RadialKernelValue:
    """E_alpha at r with radial derivatives up to max_order."""
    derivs = tuple(yukawa_radial_derivative(params, r, q) for q in range(max_order + 1))
    return RadialKernelValue(value=derivs[0], derivatives=derivs)


def _asymptotic_coefficient(params: KernelParams) -> float:
    """Leading constant of |E_alpha(r)| ~ C e^{-alpha r} r^{-(n-1)/2}."""
    n, alpha = params.n, params.alpha
    return (2.0 * math.pi) ** (-n / 2.0) * math.sqrt(math.pi / 2.0) * alpha ** ((n - 3) / 2.0)


def tail_bound(params: KernelParams, R: float) -> float:
    """Certified upper bound for |E_alpha(r)| valid for every r >= R.

    Built from the leading asymptotic constant with safety factor 2; the first
    asymptotic correction (4 nu^2 - 1)/(8 alpha R) is included when positive so
    the bound stays valid for larger n (validated for 2 <= n <= 8).  Requires
    alpha R >= 5; outside that regime the bound is not certified and
    NotCertifiedError is raised.
    """
    aR = params.alpha * R
    if aR < 5.0:
        raise NotCertifiedError(
            f"tail bound certified only for alpha*R >= 5, got alpha*R = {aR:.3g}"
        )
    nu = params.nu
    correction = max(0.0, (4.0 * nu * nu - 1.0) / (8.0 * aR))
    return (
        2.0
        * _asymptotic_coefficient(params)
        * (1.0 + correction)
        * math.exp(-aR)
        * R ** (-(params.n - 1) / 2.0)
    )
