import numpy as np
import pytest

from asympdiag import (
    MatrixSeries,
    diagonalize,
    eig,
    eigenprojection,
    exact_projection,
    residual,
    spectral_bound,
)
from asympdiag._util import default_rho_grid, fit_loglog_slope, residual_floor
from asympdiag.errors import DegenerateLeading, DimensionMismatch
from conftest import random_hermitian_family, random_nondegenerate_family


def _coupled_family(order=4):
    # eigenvalues +-sqrt(1 + rho^2): even-power expansions with closed form
    return MatrixSeries.from_coeffs(
        [np.diag([1.0, -1.0]).astype(complex), np.array([[0, 1], [1, 0]], dtype=complex)],
        order=order,
    )


class TestDiagonalize:
    def test_constant_diagonal(self):
        family = MatrixSeries.from_coeffs([np.diag([1.0, -1.0])], order=3)
        result = diagonalize(family, 3)
        np.testing.assert_array_equal(result.M.coefficient(0), np.eye(2))
        for k in range(1, 4):
            np.testing.assert_array_equal(result.M.coefficient(k), np.zeros((2, 2)))
            np.testing.assert_array_equal(result.Lambda.coefficient(k), np.zeros((2, 2)))
        np.testing.assert_array_equal(result.Lambda.coefficient(0), np.diag([1.0, -1.0]))

    def test_coupled_family_closed_form(self):
        result = diagonalize(_coupled_family(), 2)
        np.testing.assert_allclose(result.Lambda.coefficient(0), np.diag([1.0, -1.0]))
        np.testing.assert_allclose(result.Lambda.coefficient(1), np.zeros((2, 2)), atol=1e-15)
        np.testing.assert_allclose(result.Lambda.coefficient(2), np.diag([0.5, -0.5]), atol=1e-14)
        m1 = np.linalg.inv(result.M.coefficient(0)) @ result.M.coefficient(1)
        np.testing.assert_allclose(m1, np.array([[0, -0.5], [0.5, 0]]), atol=1e-14)

    def test_diagonal_perturbation_shortcut(self):
        a0 = np.diag([3.0, 1.0, -2.0])
        d = np.diag([0.3, -0.7, 0.1])
        family = MatrixSeries.from_coeffs([a0, d], order=3)
        result = diagonalize(family, 3)
        np.testing.assert_allclose(result.Lambda.coefficient(1), d, atol=1e-14)
        for k in range(1, 4):
            np.testing.assert_allclose(result.M.coefficient(k), np.zeros((3, 3)), atol=1e-14)

    def test_degenerate_leading_rejected(self):
        family = MatrixSeries.from_coeffs([np.eye(2), np.ones((2, 2))])
        with pytest.raises(DegenerateLeading):
            diagonalize(family, 1)

    def test_lambda_exactly_diagonal(self, rng):
        family = random_nondegenerate_family(rng, 3, 3)
        result = diagonalize(family, 3)
        for c in result.Lambda.coeffs:
            np.testing.assert_array_equal(c - np.diag(np.diag(c)), np.zeros((3, 3)))

    def test_leading_diagonaliser_kept(self, rng):
        family = random_nondegenerate_family(rng, 3, 2)
        result = diagonalize(family, 2)
        m0 = eig(family.coefficient(0)).vectors
        np.testing.assert_array_equal(result.M.coefficient(0), m0)

    def test_residual_sample_slope(self, rng):
        for order in (1, 2, 3):
            family = random_nondegenerate_family(rng, 3, order)
            result = diagonalize(family, order)
            rhos = [s[0] for s in result.residual_samples]
            norms = [s[1] for s in result.residual_samples]
            slope, _, exact = fit_loglog_slope(rhos, norms, floor=residual_floor(1.0))
            assert exact or slope >= order + 0.8


class TestResidual:
    def test_constant_diagonal_zero(self):
        family = MatrixSeries.from_coeffs([np.diag([2.0, -1.0])], order=2)
        result = diagonalize(family, 2)
        np.testing.assert_array_equal(residual(family, result, 0.3), np.zeros((2, 2)))

    def test_coupled_family_magnitude(self):
        family = _coupled_family()
        result = diagonalize(family, 2)
        norm = np.linalg.norm(residual(family, result, 1e-2), 2)
        assert norm <= 10.0 * (1e-2) ** 3

    def test_order_escalation(self, rng):
        family = random_nondegenerate_family(rng, 3, 4)
        grid = default_rho_grid()
        for k in range(1, 5):
            partial = diagonalize(family, k - 1)
            norms = [np.linalg.norm(residual(family, partial, r), 2) for r in grid]
            slope, _, exact = fit_loglog_slope(grid, norms, floor=residual_floor(1.0))
            assert exact or slope >= k - 0.2

    def test_dimension_mismatch(self):
        family = _coupled_family()
        other = MatrixSeries.from_coeffs([np.eye(3)], order=1)
        result = diagonalize(family, 1)
        with pytest.raises(DimensionMismatch):
            residual(other, result, 0.1)


class TestUniqueness:
    def test_column_scaling_invariance(self, rng):
        for _ in range(10):
            m = int(rng.integers(2, 5))
            family = random_nondegenerate_family(rng, m, 3)
            base = diagonalize(family, 3)
            scales = rng.uniform(0.5, 2.0, m) * np.exp(2j * np.pi * rng.uniform(size=m))
            rescaled = diagonalize(family, 3, column_scaling=scales)
            assert np.max(np.abs(base.branches - rescaled.branches)) <= 1e-9

    def test_hermitian_family_real_branches(self, rng):
        family = random_hermitian_family(rng, 4, 3)
        result = diagonalize(family, 3)
        assert np.max(np.abs(result.branches.imag)) <= 1e-10


class TestSpectralBound:
    def test_exact_diagonal(self):
        family = MatrixSeries.from_coeffs([np.diag([1.0, -1.0]), np.diag([0.5, 0.25])])
        result = diagonalize(family, 1)
        bound, verified = spectral_bound(family, result, 0.2)
        assert bound <= 1e-13
        assert verified

    def test_coupled_family_scale(self):
        family = _coupled_family()
        result = diagonalize(family, 1)
        bound, verified = spectral_bound(family, result, 0.1)
        assert verified
        assert 1e-4 <= bound <= 5e-2  # an O(rho^2) quantity at rho = 0.1

    def test_random_families_verified_with_slope(self, rng):
        family = random_nondegenerate_family(rng, 3, 3)
        result = diagonalize(family, 3)
        grid = default_rho_grid()
        bounds = []
        for rho in grid:
            bound, verified = spectral_bound(family, result, rho)
            assert verified
            bounds.append(bound)
        slope, _, exact = fit_loglog_slope(grid, bounds, floor=residual_floor(1.0))
        assert exact or slope >= 3.8


class TestEigenprojection:
    def test_diagonal_family(self):
        family = MatrixSeries.from_coeffs([np.diag([2.0, -1.0])], order=1)
        result = diagonalize(family, 1)
        np.testing.assert_allclose(eigenprojection(result, 0, 0.1), np.diag([1.0, 0.0]), atol=1e-14)

    def test_defect_decay(self):
        family = _coupled_family()
        result = diagonalize(family, 2)
        grid = default_rho_grid()
        errs = []
        for rho in grid:
            a = family.evaluate(rho)
            lam = result.Lambda.evaluate(rho)[0, 0]
            p = eigenprojection(result, 0, rho)
            errs.append(np.linalg.norm((lam * np.eye(2) - a) @ p, 2))
        slope, _, exact = fit_loglog_slope(grid, errs, floor=residual_floor(1.0))
        assert exact or slope >= 2.8

    def test_against_product_formula(self):
        family = _coupled_family()
        result = diagonalize(family, 2)
        grid = default_rho_grid()
        errs = []
        for rho in grid:
            a = family.evaluate(rho)
            values = eig(a).values
            approx = eigenprojection(result, 0, rho)
            target = values[np.argmin(np.abs(values - result.Lambda.evaluate(rho)[0, 0]))]
            j = int(np.argmin(np.abs(values - target)))
            exact_p = exact_projection(a, values, j)
            errs.append(np.linalg.norm(exact_p - approx, 2))
        slope, _, is_exact = fit_loglog_slope(grid, errs, floor=residual_floor(1.0))
        assert is_exact or slope >= 2.8

    def test_completeness(self, rng):
        family = random_nondegenerate_family(rng, 4, 2)
        result = diagonalize(family, 2)
        for rho in (0.01, 0.05, 0.1):
            if rho > result.empirical_radius:
                continue
            total = sum(eigenprojection(result, j, rho) for j in range(4))
            assert np.linalg.norm(total - np.eye(4), 2) <= 1e-12 * 4

    def test_idempotent(self, rng):
        family = random_nondegenerate_family(rng, 3, 2)
        result = diagonalize(family, 2)
        p = eigenprojection(result, 1, 0.05)
        assert np.linalg.norm(p @ p - p, 2) <= 1e-10
