"""Independent oracles the tests compare the library against.

Nothing here may import from kgpin's evaluation paths: Bessel functions come
from an integral representation, a small-argument power series with digamma
terms, an elementary half-integer closed form (reimplemented), and mpmath;
lattice sums are plain brute-force loops over a large cube.  These were
written and validated against each other before the library.
"""

import math
from functools import lru_cache

import numpy as np
from mpmath import mp

mp.dps = 30

EULER_GAMMA = 0.5772156649015328606


@lru_cache(maxsize=64)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def besselk_quad(nu: float, z) -> np.ndarray:
    """K_nu(z) from int_0^inf e^{-z cosh t} cosh(nu t) dt, composite Gauss.

    Vectorized over z; accurate to ~1e-13 relative for 1e-3 <= z <= 600 and
    nu <= 6 (validated against mpmath in the test suite).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zmin = float(np.min(z))
    T = math.acosh(1.0 + (50.0 + 12.0 * nu) / zmin)
    g, w = _leggauss(48)
    edges = np.linspace(0.0, T, 13)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * (g + 1.0) + a)
        weights.append(0.5 * (b - a) * w)
    t = np.concatenate(nodes)
    wt = np.concatenate(weights)
    integrand = np.exp(-z[:, None] * np.cosh(t)[None, :]) * np.cosh(nu * t)[None, :]
    out = integrand @ wt
    return out if out.size > 1 else float(out[0])


def besselk_series(m: int, z: float, terms: int = 60) -> float:
    """Small-argument series with digamma terms for integer order m (z <= 2)."""
    half = 0.5 * z
    # I_m part
    def psi(k):
        return -EULER_GAMMA + sum(1.0 / j for j in range(1, k))

    total = 0.0
    for j in range(m):
        total += (
            0.5
            * half ** (-m)
            * math.factorial(m - j - 1)
            / math.factorial(j)
            * (-(half**2)) ** j
        )
    im = sum(half ** (m + 2 * j) / (math.factorial(j) * math.factorial(m + j)) for j in range(terms))
    total += (-1.0) ** (m + 1) * math.log(half) * im
    for j in range(terms):
        total += (
            (-1.0) ** m
            * 0.5
            * half ** (m + 2 * j)
            * (psi(j + 1) + psi(m + j + 1))
            / (math.factorial(j) * math.factorial(m + j))
        )
    return total


def besselk_halfint(m: int, z: float) -> float:
    """K_{m+1/2}(z) by the elementary closed form (independent rewrite)."""
    acc = 0.0
    for j in range(m + 1):
        acc += (
            math.factorial(m + j)
            / (math.factorial(j) * math.factorial(m - j))
            * (2.0 * z) ** (-j)
        )
    return math.sqrt(math.pi / (2.0 * z)) * math.exp(-z) * acc


def besselk_mp(nu: float, z: float) -> float:
    return float(mp.besselk(mp.mpf(nu), mp.mpf(z)))


def free_kernel(n: int, alpha: float, r) -> np.ndarray:
    """E_alpha(r) = -(alpha/2)^(n/2-1) r^(1-n/2) K_{n/2-1}(alpha r) / (2 pi^(n/2))."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    nu = 0.5 * n - 1.0
    if n % 2 == 1:
        kvals = np.array([besselk_halfint(int(nu - 0.5), alpha * ri) for ri in r])
    else:
        kvals = np.atleast_1d(besselk_quad(nu, alpha * r))
    out = -((0.5 * alpha) ** nu) * r ** (-nu) * kvals / (2.0 * math.pi ** (0.5 * n))
    return out if out.size > 1 else float(out[0])


def _chi(S, v) -> float:
    return -1.0 if sum(abs(int(v[i - 1])) for i in S) % 2 else 1.0


def _ball(k: int, M: int):
    import itertools

    return list(itertools.product(range(-M, M + 1), repeat=k))


def brute_wp_mobius(n, k, alpha, S, x, M=40) -> float:
    """Double/triple loop over translated, x_n-flipped free-kernel copies."""
    x = np.asarray(x, dtype=float)
    pts = []
    for v in _ball(k, M):
        z = x.copy()
        z[:k] += v
        z[n - 1] = (1.0 if sum(v) % 2 == 0 else -1.0) * x[n - 1]
        pts.append((_chi(S, v), float(np.linalg.norm(z))))
    radii = np.array([r for _, r in pts])
    vals = free_kernel(n, alpha, radii)
    return math.fsum((np.array([c for c, _ in pts]) * vals).tolist())


def brute_wp_klein(n, alpha, S, x, M=40) -> float:
    x = np.asarray(x, dtype=float)
    sgns, radii = [], []
    for v in _ball(n, M):
        z = x.copy()
        z[: n - 1] += v[: n - 1]
        mn = v[n - 1]
        z[n - 1] = ((-1.0) ** (mn % 2)) * x[n - 1] + mn
        sgns.append(_chi(S, v))
        radii.append(float(np.linalg.norm(z)))
    vals = free_kernel(n, alpha, np.array(radii))
    return math.fsum((np.array(sgns) * vals).tolist())


def brute_green_mobius(n, k, alpha, S, x, y, M=40) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sgns, radii = [], []
    for v in _ball(k, M):
        gy = y.copy()
        gy[:k] += v
        gy[n - 1] = (1.0 if sum(v) % 2 == 0 else -1.0) * y[n - 1]
        sgns.append(_chi(S, v))
        radii.append(float(np.linalg.norm(x - gy)))
    vals = free_kernel(n, alpha, np.array(radii))
    return math.fsum((np.array(sgns) * vals).tolist())


def brute_green_klein(n, alpha, S, x, y, M=40) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sgns, radii = [], []
    for v in _ball(n, M):
        gy = y.copy()
        gy[: n - 1] += v[: n - 1]
        mn = v[n - 1]
        gy[n - 1] = ((-1.0) ** (mn % 2)) * y[n - 1] + mn
        sgns.append(_chi(S, v))
        radii.append(float(np.linalg.norm(x - gy)))
    vals = free_kernel(n, alpha, np.array(radii))
    return math.fsum((np.array(sgns) * vals).tolist())


def richardson_order(err_h, err_h2) -> float:
    """Observed convergence order from errors at steps h and h/2."""
    return math.log2(abs(err_h) / abs(err_h2))


def fitted_slope(xs, ys) -> float:
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def manufactured_bump(box_lower, box_upper, alpha):
    """(u, f) with u a C^3 bump vanishing on the box boundary, f = (Lap - a^2) u.

    Plain-float arithmetic: the source gets called at every volume quadrature
    node, so it must be cheap.
    """
    lo = [float(c) for c in box_lower]
    wid = [float(b) - float(a) for a, b in zip(box_lower, box_upper)]
    n = len(lo)
    a2 = alpha * alpha

    def u(x):
        prod = 1.0
        for i in range(n):
            t = 2.0 * (float(x[i]) - lo[i]) / wid[i] - 1.0
            if abs(t) >= 1.0:
                return 0.0
            prod *= (1.0 - t * t) ** 4
        return prod

    def f(x):
        psi, d2 = [], []
        for i in range(n):
            t = 2.0 * (float(x[i]) - lo[i]) / wid[i] - 1.0
            if abs(t) >= 1.0:
                return 0.0
            s = 1.0 - t * t
            psi.append(s**4)
            d2.append((-8.0 * s**3 + 48.0 * t * t * s * s) * (2.0 / wid[i]) ** 2)
        total = 1.0
        for p in psi:
            total *= p
        lap = 0.0
        for i in range(n):
            other = 1.0
            for j in range(n):
                if j != i:
                    other *= psi[j]
            lap += d2[i] * other
        return lap - a2 * total

    return u, f
