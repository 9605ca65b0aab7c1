import numpy as np
import pytest

from asympdiag import (
    HyperbolicPolynomial,
    check_low_order_vanishing,
    companion_series,
    root_expansion,
    unit_directions,
)
from asympdiag._util import fit_loglog_slope
from asympdiag.errors import (
    DegreeViolation,
    NotNormalised,
    NotStrictlyHyperbolic,
)


def wave_poly():
    # tau^2 - |xi|^2 in one spatial dimension
    return HyperbolicPolynomial(2, 1, {(2, (0,)): 1.0, (0, (2,)): -1.0})


def klein_gordon_poly():
    # tau^2 - |xi|^2 - 1
    return HyperbolicPolynomial(2, 1, {(2, (0,)): 1.0, (0, (2,)): -1.0, (0, (0,)): -1.0})


def three_speed_poly():
    # (tau - xi)(tau + xi)(tau - 2 xi) + tau + 1, distinct speeds {2, 1, -1}
    return HyperbolicPolynomial(
        3,
        1,
        {
            (3, (0,)): 1.0,
            (2, (1,)): -2.0,
            (1, (2,)): -1.0,
            (0, (3,)): 2.0,
            (1, (0,)): 1.0,
            (0, (0,)): 1.0,
        },
    )


class TestPolynomialType:
    def test_degree_violation(self):
        with pytest.raises(DegreeViolation):
            HyperbolicPolynomial(2, 1, {(2, (0,)): 1.0, (2, (1,)): 1.0})

    def test_missing_leading_coefficient(self):
        with pytest.raises(DegreeViolation):
            HyperbolicPolynomial(2, 1, {(0, (2,)): -1.0})

    def test_lower_degree(self):
        assert wave_poly().lower_degree() is None
        assert klein_gordon_poly().lower_degree() == 0


class TestCompanion:
    def test_wave_leading_block(self):
        comp = companion_series(wave_poly(), [1.0], 2)
        np.testing.assert_array_equal(comp.coefficient(0), np.array([[0, 1], [1, 0]]))
        for k in (1, 2):
            np.testing.assert_array_equal(comp.coefficient(k), np.zeros((2, 2)))

    def test_lower_order_term_placement(self):
        comp = companion_series(klein_gordon_poly(), [1.0], 2)
        np.testing.assert_array_equal(comp.coefficient(0), np.array([[0, 1], [1, 0]]))
        np.testing.assert_array_equal(comp.coefficient(1), np.zeros((2, 2)))
        np.testing.assert_array_equal(comp.coefficient(2), np.array([[0, 0], [1, 0]]))

    def test_unit_direction_required(self):
        with pytest.raises(NotNormalised):
            companion_series(wave_poly(), [2.0], 1)

    @pytest.mark.parametrize("poly", [klein_gordon_poly(), three_speed_poly()])
    def test_characteristic_identity(self, poly, rng):
        for _ in range(20):
            xi = rng.uniform(1.0, 12.0) * (1 if rng.uniform() < 0.5 else -1)
            tau = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
            eta = np.array([np.sign(xi)])
            rho = 1.0 / abs(xi)
            mat = companion_series(poly, eta, poly.m).evaluate(rho) / rho
            lhs = np.linalg.det(tau * np.eye(poly.m) - mat) * poly.c
            rhs = poly.evaluate(tau, [xi])
            assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1.0)

    def test_characteristic_identity_2d(self, rng):
        poly = HyperbolicPolynomial(
            2, 2, {(2, (0, 0)): 1.0, (0, (2, 0)): -1.0, (0, (0, 2)): -2.0, (0, (0, 0)): -0.5}
        )
        for _ in range(20):
            xi = rng.uniform(-5, 5, size=2)
            if np.linalg.norm(xi) < 0.5:
                continue
            tau = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
            eta = xi / np.linalg.norm(xi)
            rho = 1.0 / np.linalg.norm(xi)
            mat = companion_series(poly, eta, poly.m).evaluate(rho) / rho
            lhs = np.linalg.det(tau * np.eye(poly.m) - mat) * poly.c
            rhs = poly.evaluate(tau, xi)
            assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1.0)


class TestRootExpansion:
    def test_wave_roots_exact(self):
        expansion = root_expansion(wave_poly(), [1.0], 3)
        np.testing.assert_allclose(sorted(expansion.phi), [-1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(expansion.coeffs, np.zeros((2, 4)), atol=1e-13)

    def test_massive_correction(self):
        expansion = root_expansion(klein_gordon_poly(), [1.0], 2)
        np.testing.assert_allclose(sorted(expansion.phi), [-1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(expansion.coeffs[:, 0]), 0.0, atol=1e-12)
        signs = np.sign(expansion.phi)
        np.testing.assert_allclose(expansion.coeffs[:, 1].real, signs * 0.5, atol=1e-10)

    def test_three_speed_oracle_match(self):
        poly = three_speed_poly()
        order = 2
        expansion = root_expansion(poly, np.array([1.0]), order)
        xs = np.geomspace(8.0, 512.0, 7)
        worst = []
        for x in xs:
            # polynomial-in-tau coefficients at xi = x: tau^3, tau^2, tau, 1
            roots = np.roots(
                [1.0, -2.0 * x, -(x**2) + 1.0, 2.0 * x**3 + 1.0]
            )
            errs = []
            for j in range(3):
                value = expansion.branch_value(j, x)
                errs.append(np.min(np.abs(roots - value)))
            worst.append(max(errs))
        slope, _, exact = fit_loglog_slope(1.0 / xs, worst, floor=1e-13)
        assert exact or slope >= order + 0.8

    def test_not_strictly_hyperbolic(self):
        elliptic = HyperbolicPolynomial(2, 1, {(2, (0,)): 1.0, (0, (2,)): 1.0})
        with pytest.raises(NotStrictlyHyperbolic):
            root_expansion(elliptic, [1.0], 1)

    def test_double_speed_rejected(self):
        # tau^2 - 2 tau xi + xi^2 = (tau - xi)^2
        double = HyperbolicPolynomial(
            2, 1, {(2, (0,)): 1.0, (1, (1,)): -2.0, (0, (2,)): 1.0}
        )
        with pytest.raises(NotStrictlyHyperbolic):
            root_expansion(double, [1.0], 1)

    def test_real_coefficients_conjugate_symmetry(self):
        expansion = root_expansion(three_speed_poly(), np.array([1.0]), 3)
        coeffs = expansion.coeffs
        # spectrum of a real polynomial is closed under conjugation, so the
        # branch list must be permutation-conjugate to itself
        for j in range(coeffs.shape[0]):
            distances = [
                np.max(np.abs(coeffs[j] - np.conj(coeffs[i]))) for i in range(coeffs.shape[0])
            ]
            assert min(distances) <= 1e-10


class TestVanishing:
    def test_massive_wave_passes(self):
        report = check_low_order_vanishing(klein_gordon_poly(), [1.0])
        assert report.checked == (0,)
        assert report.passed

    def test_cubic_constant_perturbation(self):
        poly = HyperbolicPolynomial(
            3, 1, {(3, (0,)): 1.0, (1, (2,)): -1.0, (0, (0,)): 0.25}
        )
        report = check_low_order_vanishing(poly, [1.0])
        assert report.checked == (0, 1)
        assert report.passed

    def test_vacuous_when_subprincipal_full(self):
        poly = HyperbolicPolynomial(
            2, 1, {(2, (0,)): 1.0, (0, (2,)): -1.0, (1, (0,)): 0.5}
        )
        report = check_low_order_vanishing(poly, [1.0])
        assert report.checked == ()
        assert report.passed

    def test_homogeneous_forces_everything(self):
        report = check_low_order_vanishing(wave_poly(), [1.0])
        assert report.lower_degree is None
        assert report.checked == (0, 1)
        assert report.passed


class TestDirections:
    def test_one_dimensional(self):
        np.testing.assert_array_equal(unit_directions(1, 2), [[1.0], [-1.0]])

    def test_unit_norm(self):
        for n in (2, 3):
            dirs = unit_directions(n, 50)
            np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)

    def test_uniform_strictness_over_sphere(self):
        # 2-d wave-type operator with anisotropic speeds and a lower term
        poly = HyperbolicPolynomial(
            2, 2, {(2, (0, 0)): 1.0, (0, (2, 0)): -1.0, (0, (0, 2)): -2.5, (0, (0, 0)): -1.0}
        )
        min_gap = np.inf
        for eta in unit_directions(2, 50):
            expansion = root_expansion(poly, eta, 1)
            gaps = np.abs(np.subtract.outer(expansion.phi, expansion.phi))
            min_gap = min(min_gap, np.min(gaps[gaps > 0]))
        assert min_gap > 1.0  # speeds are separated by at least the slow cone
