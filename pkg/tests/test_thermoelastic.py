import numpy as np
import pytest

from asympdiag import (
    MatrixSeries,
    ThermoParams,
    build_family,
    eig,
    large_xi_expansion,
    small_xi_expansion,
    verify_spectral_signs,
)
from asympdiag._util import fit_loglog_slope
from asympdiag.errors import InvalidParams
from asympdiag.thermoelastic import rescaled_family

PARAM_SETS = [
    ThermoParams(1.0, 1.0, 1.0, 1.0, 1.0),
    ThermoParams(2.0, 0.7, 1.3, 0.9, 0.5),
    ThermoParams(0.8, 1.9, 0.4, 2.2, 1.7),
]


def abstract_family(alpha, beta, gamma, delta, kappa):
    a0 = 0.5 * np.array([[alpha, alpha, 0], [alpha, alpha, 0], [0, 0, 0]], dtype=complex)
    a1 = np.array(
        [[beta, 0, gamma], [0, -beta, gamma], [delta / 2, delta / 2, 0]], dtype=complex
    )
    a2 = np.diag([0, 0, kappa]).astype(complex)
    return MatrixSeries((a0, a1, a2))


class TestParamsAndFamily:
    def test_matrices(self):
        p = ThermoParams(2.0, 3.0, 0.5, 0.7, 1.1)
        fam = build_family(p)
        np.testing.assert_array_equal(
            fam.coefficient(0), -(1.1 / 2) * np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]])
        )
        np.testing.assert_array_equal(
            fam.coefficient(1),
            1j * np.array([[2.0, 0, 0.5], [0, -2.0, 0.5], [0.35, 0.35, 0]]),
        )
        a2 = fam.coefficient(2)
        assert a2[2, 2] == -3.0
        assert np.count_nonzero(a2) == 1

    def test_positivity_required(self):
        with pytest.raises(InvalidParams):
            ThermoParams(1.0, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(InvalidParams):
            ThermoParams(-1.0, 1.0, 1.0, 1.0, 1.0)

    def test_substitution_matches_abstract_shape(self):
        # alpha = -m, beta = i tau, gamma = i gamma1, delta = i gamma2,
        # kappa -> -kappa reproduces the generic three-by-three family
        p = ThermoParams(1.4, 0.6, 0.9, 1.2, 2.0)
        fam = build_family(p)
        ref = abstract_family(-p.m, 1j * p.tau, 1j * p.gamma1, 1j * p.gamma2, -p.kappa)
        for k in range(3):
            np.testing.assert_allclose(fam.coefficient(k), ref.coefficient(k), atol=1e-15)


class TestSmallFrequency:
    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_exponential_branch_rate(self, p):
        expansion = small_xi_expansion(p, 3)
        expected = (p.tau**2 + p.gamma1 * p.gamma2) / p.m
        assert abs(expansion.lambda0 - expected) <= 1e-10 * max(1.0, expected)

    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_parabolic_rates_vieta(self, p):
        # lambda_+ and lambda_- solve x^2 - (kappa + lambda0) x
        # + tau^2 kappa / m = 0, so check sum and product
        expansion = small_xi_expansion(p, 3)
        lp, lm = expansion.lambda_pm
        target_sum = p.kappa + (p.tau**2 + p.gamma1 * p.gamma2) / p.m
        target_prod = p.tau**2 * p.kappa / p.m
        assert abs((lp + lm) - target_sum) <= 1e-9 * target_sum
        assert abs(lp * lm - target_prod) <= 1e-9 * target_prod

    def test_branches_at_zero(self):
        p = PARAM_SETS[0]
        values = np.sort(eig(build_family(p).evaluate(0.0)).values.real)
        np.testing.assert_allclose(values, [-p.m, 0.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_trace_identity_per_order(self, p):
        family = build_family(p)
        padded = MatrixSeries.from_coeffs(list(family.coeffs), order=4)
        expansion = small_xi_expansion(p, 4)
        for k in range(5):
            branch_sum = expansion.branches[:, k].sum()
            assert abs(branch_sum - np.trace(padded.coefficient(k))) <= 1e-10

    def test_nondegeneracy_order_two(self):
        assert small_xi_expansion(PARAM_SETS[0], 3).nondeg_order == 2

    def test_oracle_match(self):
        p = PARAM_SETS[1]
        expansion = small_xi_expansion(p, 3)
        family = build_family(p)
        xis = np.geomspace(2.0**-10, 2.0**-4, 7)
        worst = []
        for xi in xis:
            numeric = np.linalg.eigvals(family.evaluate(xi))
            errs = [
                np.min(np.abs(numeric - expansion.branch_value(j, xi))) for j in range(3)
            ]
            worst.append(max(errs))
        slope, _, exact = fit_loglog_slope(xis, worst, floor=1e-13)
        assert exact or slope >= 3.8


class TestLargeFrequency:
    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_constant_terms(self, p):
        # trace-consistent constants: gamma1 gamma2 / kappa for the
        # parabolic branch and -m/2 - gamma1 gamma2 / (2 kappa) for the
        # hyperbolic pair (their sum must equal trace A0 = -m)
        expansion = large_xi_expansion(p, 3)
        par = p.gamma1 * p.gamma2 / p.kappa
        hyp = -p.m / 2 - p.gamma1 * p.gamma2 / (2 * p.kappa)
        assert abs(expansion.parabolic_constant - par) <= 1e-8
        for c in expansion.hyperbolic_constants:
            assert abs(c - hyp) <= 1e-8
        total = expansion.parabolic_constant + sum(expansion.hyperbolic_constants)
        assert abs(total - (-p.m)) <= 1e-10

    def test_leading_structure(self):
        p = PARAM_SETS[0]
        expansion = large_xi_expansion(p, 3)
        np.testing.assert_allclose(expansion.branches[2, 0], -p.kappa, atol=1e-12)
        hyp_leads = sorted(expansion.branches[:2, 1], key=lambda z: z.imag)
        np.testing.assert_allclose(hyp_leads, [-1j * p.tau, 1j * p.tau], atol=1e-12)

    def test_nondegeneracy_order_one(self):
        assert large_xi_expansion(PARAM_SETS[0], 3).nondeg_order == 1

    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_oracle_decay(self, p):
        expansion = large_xi_expansion(p, 3)
        family = build_family(p)
        xis = np.geomspace(50.0, 5000.0, 7)
        worst = []
        for xi in xis:
            numeric = np.linalg.eigvals(family.evaluate(xi))
            errs = [
                np.min(np.abs(numeric - expansion.branch_value(j, xi))) for j in range(3)
            ]
            worst.append(max(errs))
        slope, _, exact = fit_loglog_slope(xis, worst, floor=1e-12)
        assert exact or slope <= -0.8

    def test_trace_identity_rescaled(self):
        p = PARAM_SETS[2]
        expansion = large_xi_expansion(p, 4)
        family = rescaled_family(p, 4)
        for k in range(5):
            branch_sum = expansion.branches[:, k].sum()
            assert abs(branch_sum - np.trace(family.coefficient(k))) <= 1e-10


class TestSpectralSigns:
    def test_at_zero_frequency(self):
        p = PARAM_SETS[0]
        report = verify_spectral_signs(p, [0.0])
        assert report.all_nonpositive
        assert abs(report.samples[0].max_real) <= 1e-12

    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_log_sweep_negative(self, p):
        report = verify_spectral_signs(p, np.geomspace(0.01, 100.0, 30))
        assert report.all_negative_offzero
        assert report.min_margin > 0
        assert report.violations == ()

    def test_large_frequency_limit(self):
        p = PARAM_SETS[0]
        report = verify_spectral_signs(p, [1e4])
        hyp_real = -p.m / 2 - p.gamma1 * p.gamma2 / (2 * p.kappa)
        assert abs(report.samples[0].max_real - hyp_real) <= 1e-4

    @pytest.mark.parametrize("p", PARAM_SETS)
    def test_determinant_consistency(self, p):
        family = build_family(p)
        for xi in (0.05, 1.0, 20.0):
            a = family.evaluate(xi)
            values = np.linalg.eigvals(a)
            det = np.linalg.det(a)
            assert abs(np.prod(values) - det) <= 1e-8 * max(abs(det), 1.0)

    def test_regime_consistency_at_one(self):
        # both expansions, evaluated at xi = 1, land within their own
        # truncation error of the numeric spectrum
        p = PARAM_SETS[0]
        family = build_family(p)
        numeric = np.linalg.eigvals(family.evaluate(1.0))
        small = small_xi_expansion(p, 4)
        large = large_xi_expansion(p, 4)
        for expansion in (small, large):
            for j in range(3):
                value = expansion.branch_value(j, 1.0)
                tail = np.abs(expansion.branches[j, -1])
                assert np.min(np.abs(numeric - value)) <= 3.0 * (tail + 0.3)
