"""Lattices, deck transformations and pin characters of the flat quotients.

Two families of quotients of R^n are supported:

* generalized Moebius strips: Z^k translations of the first k coordinates
  (k <= n-1) that flip the sign of x_n whenever the translation vector has odd
  coordinate sum;
* generalized Klein bottles (k = n): translations of the first n-1 coordinates
  together with x_n -> (-1)^b x_n + b, b in Z (an infinite-dihedral action on
  the last coordinate; the quotient is compact with cell [0,1)^{n-1} x [0,2)).

Deck elements are labelled by integer vectors v.  For the Moebius family the
labels compose additively; for the Klein family the last coordinate composes
as b = b1 + (-1)^{b1} b2.  Pin characters chi_S(v) = (-1)^{sum_{i in S} v_i}
are multiplicative for both compositions and parameterize the 2^k twisted
bundles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

__all__ = [
    "MOBIUS",
    "KLEIN",
    "ManifoldSpec",
    "PinCharacter",
    "LatticeShell",
    "sign_of",
    "character_value",
    "shell",
    "shell_count",
    "deck_apply",
    "deck_compose",
    "reduce_to_cell",
    "singular_distance",
    "orbit_distance",
    "all_characters",
]

MOBIUS = "mobius"
KLEIN = "klein"


@dataclass(frozen=True)
class ManifoldSpec:
    """Which quotient of R^n: kind, ambient dimension n, lattice rank k."""

    kind: str
    n: int
    k: int

    def __post_init__(self):
        if self.kind not in (MOBIUS, KLEIN):
            raise ValueError(f"kind must be '{MOBIUS}' or '{KLEIN}', got {self.kind!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if self.kind == MOBIUS and not (1 <= self.k <= self.n - 1):
            raise ValueError(
                f"Moebius strip requires 1 <= k <= n-1 (the flipped coordinate "
                f"x_n is not translated), got k={self.k}, n={self.n}"
            )
        if self.kind == KLEIN and self.k != self.n:
            raise ValueError(f"Klein bottle requires k = n, got k={self.k}, n={self.n}")

    @classmethod
    def mobius(cls, n: int, k: int) -> "ManifoldSpec":
        return cls(MOBIUS, n, k)

    @classmethod
    def klein(cls, n: int) -> "ManifoldSpec":
        return cls(KLEIN, n, n)


@dataclass(frozen=True)
class PinCharacter:
    """Character chi_S(v) = (-1)^{sum_{i in S} v_i} on deck labels.

    twisted is a subset of 1-based generator indices {1, ..., rank}; the empty
    set is the trivial bundle.
    """

    rank: int
    twisted: frozenset

    def __post_init__(self):
        object.__setattr__(self, "twisted", frozenset(int(i) for i in self.twisted))
        if not all(1 <= i <= self.rank for i in self.twisted):
            raise ValueError(
                f"twisted indices must lie in 1..{self.rank}, got {sorted(self.twisted)}"
            )

    @classmethod
    def trivial(cls, rank: int) -> "PinCharacter":
        return cls(rank, frozenset())

    def value(self, v) -> int:
        """chi(v) in {+1, -1}."""
        s = sum(int(v[i - 1]) for i in self.twisted)
        return -1 if s % 2 else 1

    def signs(self, V: np.ndarray) -> np.ndarray:
        """Vectorized chi over rows of an integer label array (N, rank)."""
        if not self.twisted:
            return np.ones(len(V))
        idx = [i - 1 for i in sorted(self.twisted)]
        parity = np.abs(V[:, idx]).sum(axis=1) & 1
        return 1.0 - 2.0 * parity


def all_characters(rank: int):
    """All 2^rank pin characters, trivial first, ordered by subset size."""
    for size in range(rank + 1):
        for subset in combinations(range(1, rank + 1), size):
            yield PinCharacter(rank, frozenset(subset))


def sign_of(v, convention: str = "parity") -> int:
    """sgn(v) controlling the x_n flip of the Moebius deck action.

    convention="parity" (default): (-1)^{v_1 + ... + v_k}, the multiplicative
    character the rearrangement argument behind the periodicity identities
    requires.  convention="all_even": +1 iff every coordinate is even (the
    non-multiplicative rule; coincides with "parity" for k = 1, kept for
    comparison only).
    """
    if convention == "parity":
        return -1 if sum(int(c) for c in v) % 2 else 1
    if convention == "all_even":
        return 1 if all(int(c) % 2 == 0 for c in v) else -1
    raise ValueError(f"unknown sgn convention {convention!r}")


def _parity_signs(V: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * (np.abs(V).sum(axis=1) & 1)


def character_value(chi: PinCharacter, v) -> int:
    """chi(v) for a single label; multiplicative in v."""
    return chi.value(v)


@dataclass(frozen=True)
class LatticeShell:
    """All lattice vectors of sup-norm exactly m, in lexicographic order."""

    m: int
    points: np.ndarray

    @property
    def count(self) -> int:
        return len(self.points)


def shell_count(k: int, m: int) -> int:
    """Cardinality (2m+1)^k - (2m-1)^k of the sup-norm-m shell (1 for m = 0)."""
    if m == 0:
        return 1
    return (2 * m + 1) ** k - (2 * m - 1) ** k


@lru_cache(maxsize=4096)
def _shell_points(k: int, m: int) -> np.ndarray:
    if m == 0:
        pts = np.zeros((1, k), dtype=np.int64)
        pts.setflags(write=False)
        return pts
    out = []

    def rec(prefix, has_extreme):
        depth = len(prefix)
        if depth == k - 1:
            last = range(-m, m + 1) if has_extreme else (-m, m)
            for c in last:
                out.append(prefix + (c,))
            return
        for c in range(-m, m + 1):
            rec(prefix + (c,), has_extreme or abs(c) == m)

    rec((), False)
    pts = np.array(out, dtype=np.int64)
    pts.setflags(write=False)
    return pts


def shell(k: int, m: int) -> LatticeShell:
    """The set of v in Z^k with |v|_max = m (lexicographic order)."""
    if k < 1 or m < 0:
        raise ValueError(f"need k >= 1 and m >= 0, got k={k}, m={m}")
    return LatticeShell(m=m, points=_shell_points(k, m))


# ---------------------------------------------------------------------------
# Deck actions
# ---------------------------------------------------------------------------


def deck_apply(spec: ManifoldSpec, v, x) -> np.ndarray:
    """Apply the deck transformation labelled by v to a point x in R^n.

    Moebius: (x_1..x_k) += v, x_n *= sgn(v).
    Klein:   (x_1..x_{n-1}) += v_1..v_{n-1}, x_n -> (-1)^{v_n} x_n + v_n.
    """
    v = np.asarray(v, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    if v.shape != (spec.k,):
        raise ValueError(f"label rank {v.shape} does not match lattice rank {spec.k}")
    if x.shape != (spec.n,):
        raise ValueError(f"point must have dimension {spec.n}, got shape {x.shape}")
    y = x.copy()
    if spec.kind == MOBIUS:
        y[: spec.k] += v
        y[spec.n - 1] *= sign_of(v)
    else:
        y[: spec.n - 1] += v[: spec.n - 1]
        b = int(v[spec.n - 1])
        y[spec.n - 1] = (-1 if b % 2 else 1) * x[spec.n - 1] + b
    return y


def deck_compose(spec: ManifoldSpec, v, w) -> np.ndarray:
    """Label of the composite gamma_v o gamma_w.

    Additive for the Moebius family; for the Klein family the last coordinate
    composes as b = v_n + (-1)^{v_n} w_n.
    """
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    if spec.kind == MOBIUS:
        return v + w
    out = v + w
    bv, bw = int(v[spec.n - 1]), int(w[spec.n - 1])
    out[spec.n - 1] = bv + (-1 if bv % 2 else 1) * bw
    return out


def _images(spec: ManifoldSpec, V: np.ndarray, y: np.ndarray) -> np.ndarray:
    """gamma_v(y) for every label row of V; returns (len(V), n)."""
    n, k = spec.n, spec.k
    img = np.tile(y, (len(V), 1))
    if spec.kind == MOBIUS:
        img[:, :k] += V
        img[:, n - 1] = _parity_signs(V) * y[n - 1]
    else:
        img[:, : n - 1] += V[:, : n - 1]
        b = V[:, n - 1]
        img[:, n - 1] = np.where(b & 1, -y[n - 1], y[n - 1]) + b
    return img


def _image_last_signs(spec: ManifoldSpec, V: np.ndarray) -> np.ndarray:
    """Sign of the last-coordinate linear part of gamma_v (diagonal entry)."""
    if spec.kind == MOBIUS:
        return _parity_signs(V)
    return 1.0 - 2.0 * (V[:, spec.n - 1] & 1)


def reduce_to_cell(spec: ManifoldSpec, x) -> np.ndarray:
    """Orbit representative in the fundamental cell; idempotent.

    Moebius: [0,1)^k x R^{n-k} (with the x_n sign the unique in-cell deck image
    carries).  Klein: [0,1)^{n-1} x [0,2), choosing the smaller of the two
    last-coordinate candidates as the canonical representative.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n,):
        raise ValueError(f"point must have dimension {spec.n}, got shape {x.shape}")
    if spec.kind == MOBIUS:
        v = -np.floor(x[: spec.k]).astype(np.int64)
        return deck_apply(spec, v, x)
    y = x.copy()
    y[: spec.n - 1] -= np.floor(y[: spec.n - 1])
    t = x[spec.n - 1]
    r1 = t % 2.0
    r2 = (1.0 - t) % 2.0
    y[spec.n - 1] = min(r1, r2)
    return y


def singular_distance(spec: ManifoldSpec, x) -> float:
    """Distance from x to the singular orbit of the one-point kernel.

    Moebius: the orbit of 0 is Lambda_k x {0}^{n-k}; Klein: all of Z^n.
    """
    x = np.asarray(x, dtype=float)
    if spec.kind == MOBIUS:
        d2 = float(np.sum((x[: spec.k] - np.round(x[: spec.k])) ** 2))
        d2 += float(np.sum(x[spec.k :] ** 2))
        return math.sqrt(d2)
    return math.sqrt(float(np.sum((x - np.round(x)) ** 2)))


def _nearest_with_parity(d: np.ndarray, parity: int) -> float:
    """min |d - v|^2 over integer v with coordinate-sum parity `parity`."""
    r = np.round(d)
    e = d - r
    base = float(np.sum(e * e))
    if int(abs(r.sum())) % 2 == parity:
        return base
    # flip one coordinate to its second-nearest integer, at minimal extra cost
    extra = (1.0 - np.abs(e)) ** 2 - e * e
    return base + float(np.min(extra))


def orbit_distance(spec: ManifoldSpec, x, y) -> float:
    """min over deck elements gamma of |x - gamma(y)| (exact closed form)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = spec.n, spec.k
    if spec.kind == MOBIUS:
        d = x[:k] - y[:k]
        mid2 = float(np.sum((x[k : n - 1] - y[k : n - 1]) ** 2))
        best = math.inf
        # sgn(v) = +1 needs even coordinate sum, -1 odd: parity couples the
        # translation rounding to the x_n sign
        for parity, s in ((0, 1.0), (1, -1.0)):
            t2 = _nearest_with_parity(d, parity)
            best = min(best, t2 + mid2 + (x[n - 1] - s * y[n - 1]) ** 2)
        return math.sqrt(best)
    d = x[: n - 1] - y[: n - 1]
    trans2 = float(np.sum((d - np.round(d)) ** 2))
    # even offsets keep the sign, odd offsets flip it
    de = x[n - 1] - y[n - 1]
    even = de - 2.0 * np.round(de / 2.0)
    do = x[n - 1] + y[n - 1]
    odd = do - (2.0 * np.round((do - 1.0) / 2.0) + 1.0)
    return math.sqrt(trans2 + min(even**2, odd**2))
