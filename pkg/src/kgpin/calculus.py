"""Finite-difference operators and tensor Gauss-Legendre quadrature on boxes.

The residual operator applies Delta - alpha^2 through central second
differences; all operators come with Richardson pairs so convergence order is
testable.  Quadrature is composite Gauss-Legendre per axis, on box faces
(surface measure) and box volumes.  Boxes are axis-aligned and, when used with
periodized kernels, must sit strictly inside the fundamental cell away from
the singular orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import KLEIN, ManifoldSpec

__all__ = [
    "BoxDomain",
    "QuadratureRule",
    "kg_residual",
    "gradient",
    "normal_derivative",
    "surface_integral",
    "volume_integral",
    "iter_face_nodes",
    "volume_nodes",
    "box_orbit_clearance",
    "validate_box_domain",
]


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lower_1, upper_1] x ... x [lower_n, upper_n]."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in self.lower)
        hi = tuple(float(c) for c in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi) or len(lo) < 1:
            raise ValueError("lower/upper must have equal positive length")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("need lower < upper componentwise")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.array(self.upper) - np.array(self.lower)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.upper) + np.array(self.lower))

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= np.array(self.lower) - tol) and np.all(x <= np.array(self.upper) + tol)
        )


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre: `panels` equal panels per axis, `order` nodes each."""

    panels: int = 4
    order: int = 4

    def __post_init__(self):
        if self.panels < 1 or self.order < 1:
            raise ValueError("panels and order must be >= 1")


@lru_cache(maxsize=256)
def _gauss_unit(panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [0, 1] (weights sum to 1)."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    nodes = []
    weights = []
    for p in range(panels):
        nodes.append((p + 0.5 * (xg + 1.0)) / panels)
        weights.append(wg / (2.0 * panels))
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _axis_nodes(lo: float, hi: float, rule: QuadratureRule):
    t, w = _gauss_unit(rule.panels, rule.order)
    return lo + (hi - lo) * t, (hi - lo) * w


def iter_face_nodes(box: BoxDomain, rule: QuadratureRule):
    """Yield (points, weights, normal) per face; weights carry the area measure.

    Faces come in axis order, lower side before upper side.
    """
    n = box.n
    for axis in range(n):
        for side, coord, sign in ((0, box.lower[axis], -1.0), (1, box.upper[axis], 1.0)):
            axes = [a for a in range(n) if a != axis]
            grids = [_axis_nodes(box.lower[a], box.upper[a], rule) for a in axes]
            mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij") if axes else []
            wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij") if axes else []
            count = int(np.prod([len(g[0]) for g in grids])) if axes else 1
            pts = np.empty((count, n))
            pts[:, axis] = coord
            for a, m in zip(axes, mesh):
                pts[:, a] = m.ravel()
            w = np.ones(count)
            for m in wmesh:
                w = w * m.ravel()
            normal = np.zeros(n)
            normal[axis] = sign
            yield pts, w, normal


def volume_nodes(box: BoxDomain, rule: QuadratureRule):
    """Tensor nodes and weights covering the box volume."""
    grids = [_axis_nodes(box.lower[a], box.upper[a], rule) for a in range(box.n)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    w = np.ones(len(pts))
    for m in wmesh:
        w = w * m.ravel()
    return pts, w


def surface_integral(integrand, box: BoxDomain, rule: QuadratureRule) -> float:
    """Integral over the box boundary of integrand(y) (scalar callable)."""
    parts = []
    for pts, w, _ in iter_face_nodes(box, rule):
        parts.extend(wi * integrand(p) for p, wi in zip(pts, w))
    return math.fsum(parts)


def volume_integral(integrand, box: BoxDomain, rule: QuadratureRule) -> float:
    """Integral over the box volume of integrand(y) (scalar callable)."""
    pts, w = volume_nodes(box, rule)
    return math.fsum(wi * integrand(p) for p, wi in zip(pts, w))


def kg_residual(field, x, h: float, alpha: float) -> float:
    """(Delta - alpha^2) field at x by central second differences of step h.

    For fields in the operator kernel the residual decays like h^2.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    f0 = float(field(x))
    acc = -(alpha**2) * f0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        acc += (float(field(x + e)) - 2.0 * f0 + float(field(x - e))) / (h * h)
    return acc


def gradient(field, x, h: float) -> np.ndarray:
    """Central-difference gradient of a scalar field."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    g = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (float(field(x + e)) - float(field(x - e))) / (2.0 * h)
    return g


def normal_derivative(field, y, nu, h: float) -> float:
    """Outward normal derivative as the interior-offset limit, extrapolated.

    Approximates lim_{t->0+} nu . grad field(y - t nu) from t = h and t = h/2
    (Richardson step removing the linear offset error; remaining error O(h^2)).
    """
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    g1 = float(np.dot(nu, gradient(field, y - h * nu, h)))
    g2 = float(np.dot(nu, gradient(field, y - 0.5 * h * nu, 0.5 * h)))
    return 2.0 * g2 - g1


def _interval_int_distance(lo: float, hi: float) -> float:
    """Distance from [lo, hi] to the nearest integer."""
    if math.ceil(lo) <= hi:
        return 0.0
    base = math.floor(lo)
    return min(lo - base, base + 1.0 - hi)


def _interval_zero_distance(lo: float, hi: float) -> float:
    if lo <= 0.0 <= hi:
        return 0.0
    return min(abs(lo), abs(hi))


def box_orbit_clearance(box: BoxDomain, spec: ManifoldSpec) -> float:
    """Distance from the box to the singular orbit of the one-point kernel."""
    d2 = 0.0
    for i in range(box.n):
        if spec.kind == KLEIN or i < spec.k:
            d = _interval_int_distance(box.lower[i], box.upper[i])
        else:
            d = _interval_zero_distance(box.lower[i], box.upper[i])
        d2 += d * d
    return math.sqrt(d2)


def validate_box_domain(box: BoxDomain, spec: ManifoldSpec, min_clearance: float = 0.05):
    """Check the box sits strictly inside the fundamental cell with clearance,
    and contains at most one deck image of each of its points.

    Moebius cell: (0,1)^k x R^{n-k}; the Moebius action is free so any in-cell
    box is injective.  Klein cell: (0,1)^{n-1} x (0,2); the odd-offset
    reflections x_n -> -x_n + m fix the hyperplanes x_n = m/2 (m odd), so the
    box's last extent must additionally avoid the half-odd-integer mirror
    heights - a straddling box holds mirror-image pairs and Green integrals
    over it reproduce the sum over both images.
    """
    if box.n != spec.n:
        raise ValueError(f"box dimension {box.n} does not match manifold n={spec.n}")
    if spec.kind == KLEIN:
        in_cell = all(
            0.0 < box.lower[i] and box.upper[i] < 1.0 for i in range(spec.n - 1)
        ) and 0.0 < box.lower[spec.n - 1] and box.upper[spec.n - 1] < 2.0
        lo2 = 2.0 * box.lower[spec.n - 1]
        hi2 = 2.0 * box.upper[spec.n - 1]
        m = math.ceil(lo2)
        m = m + 1 if m % 2 == 0 else m
        if in_cell and m <= hi2:
            raise ValueError(
                f"box straddles the mirror height x_n = {m / 2}: Klein-family "
                f"boxes must lie strictly between adjacent half-odd-integer levels"
            )
    else:
        in_cell = all(0.0 < box.lower[i] and box.upper[i] < 1.0 for i in range(spec.k))
    if not in_cell:
        raise ValueError("box must lie strictly inside the fundamental cell")
    clearance = box_orbit_clearance(box, spec)
    if clearance < min_clearance:
        raise ValueError(
            f"box clearance {clearance:.3g} from the singular orbit is below "
            f"the required {min_clearance:g}"
        )
