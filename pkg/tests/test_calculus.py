"""Finite-difference operators and box quadrature."""

import math

import numpy as np
import pytest

import oracles
from kgpin import (
    BoxDomain,
    KernelParams,
    ManifoldSpec,
    QuadratureRule,
    gradient,
    kg_residual,
    normal_derivative,
    surface_integral,
    volume_integral,
    yukawa,
    yukawa_radial_derivative,
)
from kgpin.calculus import (
    box_orbit_clearance,
    iter_face_nodes,
    validate_box_domain,
    volume_nodes,
)


class TestResidual:
    def test_constant_field(self):
        res = kg_residual(lambda x: 1.0, np.array([0.3, 0.4, 0.5]), 1e-3, 1.0)
        assert res == pytest.approx(-1.0, abs=1e-9)

    def test_exponential_in_kernel(self):
        alpha = 1.3
        field = lambda x: math.exp(alpha * x[0])
        x = np.array([0.2, 0.1, 0.4])
        r1 = kg_residual(field, x, 1e-2, alpha)
        r2 = kg_residual(field, x, 5e-3, alpha)
        assert abs(r1) < 1e-3
        assert abs(oracles.richardson_order(r1, r2) - 2.0) < 0.2

    def test_free_kernel_order_two(self):
        params = KernelParams(3, 1.0)
        field = lambda z: yukawa(params, float(np.linalg.norm(z)))
        x = np.array([0.5, 0.5, 0.5])
        r1 = kg_residual(field, x, 1e-2, 1.0)
        r2 = kg_residual(field, x, 5e-3, 1.0)
        assert r1 / r2 == pytest.approx(4.0, rel=0.2)


class TestGradient:
    def test_quadratic(self):
        g = gradient(lambda x: x[0] ** 2, np.array([1.0, 0.0, 0.0]), 1e-4)
        assert np.allclose(g, [2.0, 0.0, 0.0], atol=1e-9)

    def test_order_two(self):
        field = lambda x: math.sin(x[0]) * math.exp(x[1])
        x = np.array([0.4, 0.7])
        exact = np.array([math.cos(0.4) * math.exp(0.7), math.sin(0.4) * math.exp(0.7)])
        e1 = np.linalg.norm(gradient(field, x, 1e-2) - exact)
        e2 = np.linalg.norm(gradient(field, x, 5e-3) - exact)
        assert abs(oracles.richardson_order(e1, e2) - 2.0) < 0.2


class TestNormalDerivative:
    def test_exponential(self):
        alpha = 1.1
        field = lambda x: math.exp(alpha * x[0])
        y = np.array([0.75, 0.4, 0.3])
        nu = np.array([1.0, 0.0, 0.0])
        assert normal_derivative(field, y, nu, 1e-4) == pytest.approx(
            alpha * math.exp(alpha * 0.75), rel=1e-7
        )

    def test_free_kernel_chain_rule(self):
        params = KernelParams(3, 1.0)
        field = lambda z: yukawa(params, float(np.linalg.norm(z)))
        y = np.array([0.75, 0.55, 0.35])
        nu = np.array([0.0, 1.0, 0.0])
        r = float(np.linalg.norm(y))
        exact = yukawa_radial_derivative(params, r, 1) * (y @ nu) / r
        assert normal_derivative(field, y, nu, 1e-4) == pytest.approx(exact, rel=1e-7)


class TestQuadrature:
    def test_unit_box_surface_and_volume(self):
        box = BoxDomain((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        rule = QuadratureRule(panels=2, order=4)
        assert surface_integral(lambda y: 1.0, box, rule) == pytest.approx(6.0, abs=1e-12)
        assert volume_integral(lambda y: 1.0, box, rule) == pytest.approx(1.0, abs=1e-12)

    def test_odd_integrand_vanishes(self):
        box = BoxDomain((-1.0, -1.0), (1.0, 1.0))
        rule = QuadratureRule(panels=3, order=4)
        assert abs(volume_integral(lambda y: y[0], box, rule)) < 1e-12
        assert abs(surface_integral(lambda y: y[0] * y[1], box, rule)) < 1e-12

    def test_separable_exponential(self):
        box = BoxDomain((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        rule = QuadratureRule(panels=2, order=6)
        assert volume_integral(lambda y: math.exp(y[0]), box, rule) == pytest.approx(
            math.e - 1.0, rel=1e-10
        )

    def test_gauss_exactness_per_axis(self):
        # order g integrates degree 2g-1 exactly
        box = BoxDomain((0.0,), (1.0,))
        for g in (2, 3, 4):
            rule = QuadratureRule(panels=1, order=g)
            deg = 2 * g - 1
            val = volume_integral(lambda y: y[0] ** deg, box, rule)
            assert val == pytest.approx(1.0 / (deg + 1), abs=1e-13)

    def test_weights_positive_and_sum_to_area(self):
        box = BoxDomain((0.1, 0.2, 0.3), (0.6, 0.9, 0.8))
        rule = QuadratureRule(panels=3, order=5)
        widths = box.widths
        for face_index, (pts, w, normal) in enumerate(iter_face_nodes(box, rule)):
            axis = face_index // 2
            assert np.all(w > 0.0)
            area = float(np.prod(np.delete(widths, axis)))
            assert math.fsum(w.tolist()) == pytest.approx(area, abs=1e-13)
            assert abs(normal[axis]) == 1.0
        pts, w = volume_nodes(box, rule)
        assert math.fsum(w.tolist()) == pytest.approx(box.volume, abs=1e-13)

    def test_doubling_panels_reduces_error(self):
        box = BoxDomain((0.0, 0.0), (1.0, 1.0))
        exact = (math.e - 1.0) ** 2
        errs = []
        for panels in (1, 2):
            val = volume_integral(
                lambda y: math.exp(y[0] + y[1]), box, QuadratureRule(panels=panels, order=2)
            )
            errs.append(abs(val - exact))
        assert errs[1] < errs[0] / 4


class TestBoxValidation:
    def test_clearance_mobius(self):
        spec = ManifoldSpec.mobius(3, 1)
        box = BoxDomain((0.25, 0.25, 0.25), (0.75, 0.75, 0.75))
        # nearest singular point is (0,0,0), off the corner by 0.25 per axis
        assert box_orbit_clearance(box, spec) == pytest.approx(0.25 * math.sqrt(3.0))
        validate_box_domain(box, spec)

    def test_clearance_klein(self):
        spec = ManifoldSpec.klein(2)
        box = BoxDomain((0.3, 0.55), (0.7, 0.95))
        assert box_orbit_clearance(box, spec) == pytest.approx(math.hypot(0.3, 0.05))
        validate_box_domain(box, spec)

    def test_klein_mirror_straddle_rejected(self):
        spec = ManifoldSpec.klein(2)
        # the odd-offset reflections fix x_n = 1/2, 3/2, ...; boxes crossing
        # those heights contain mirror-image pairs and are not injective
        with pytest.raises(ValueError, match="mirror"):
            validate_box_domain(BoxDomain((0.3, 0.3), (0.7, 0.7)), spec)
        with pytest.raises(ValueError, match="mirror"):
            validate_box_domain(BoxDomain((0.3, 1.4), (0.7, 1.6)), spec)

    def test_rejects_box_outside_cell(self):
        spec = ManifoldSpec.klein(2)
        with pytest.raises(ValueError):
            validate_box_domain(BoxDomain((0.3, 0.3), (1.2, 0.7)), spec)

    def test_rejects_box_too_close_to_singularity(self):
        spec = ManifoldSpec.mobius(3, 1)
        with pytest.raises(ValueError):
            validate_box_domain(BoxDomain((0.01, 0.01, 0.01), (0.5, 0.5, 0.5)), spec)

    def test_box_shape_validation(self):
        with pytest.raises(ValueError):
            BoxDomain((0.5, 0.5), (0.4, 0.9))
