"""Damped one-dimensional thermo-elastic model.

The Fourier-transformed first-order system has a quadratic-in-frequency
coefficient family; the block scheme yields eigenvalue expansions in
both frequency regimes, and a spectral sweep verifies that all branches
stay in the open left half plane away from frequency zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import parallel_map
from .block import block_diagonalize
from .errors import AsympdiagError, InvalidParams
from .matrixcore import eig
from .series import MatrixSeries

_REAL_TOL = 1e-10


@dataclass(frozen=True)
class ThermoParams:
    """Wave speed, diffusivity, coupling pair and damping; all positive."""

    tau: float
    kappa: float
    gamma1: float
    gamma2: float
    m: float

    def __post_init__(self):
        for name in ("tau", "kappa", "gamma1", "gamma2", "m"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"parameter {name} must be strictly positive")
        # non-degeneracy of the order-2 candidate blocks, in the generic
        # parameters of the abstract three-by-three family
        alpha, beta = -self.m, 1j * self.tau
        gamma, delta, kap = 1j * self.gamma1, 1j * self.gamma2, -self.kappa
        disc = (beta**2 + (gamma * delta + alpha * kap)) ** 2 - 4 * alpha * kap * gamma * delta
        scale = max(1.0, abs(alpha * kap), abs(beta) ** 2, abs(gamma * delta))
        if abs(disc) <= 1e-12 * scale**2:
            raise InvalidParams("parameters hit the degenerate branch-collision locus")


def build_family(params):
    """Coefficient family A_0 + xi A_1 + xi^2 A_2 of the first-order system."""
    m, tau = params.m, params.tau
    g1, g2, kappa = params.gamma1, params.gamma2, params.kappa
    a0 = -(m / 2.0) * np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], dtype=complex)
    a1 = 1j * np.array(
        [[tau, 0, g1], [0, -tau, g1], [g2 / 2.0, g2 / 2.0, 0]], dtype=complex
    )
    a2 = np.diag([0.0, 0.0, -kappa]).astype(complex)
    return MatrixSeries((a0, a1, a2))


def rescaled_family(params, order):
    """Family divided by xi^2, as a series in 1/xi (coefficients reversed)."""
    base = build_family(params)
    coeffs = [base.coefficient(2), base.coefficient(1), base.coefficient(0)]
    return MatrixSeries.from_coeffs(coeffs, order=max(order, 2))


def _require_positive_real(value, what):
    if abs(value.imag) > _REAL_TOL * max(1.0, abs(value)):
        raise AsympdiagError(f"{what} = {value:.6g} is not real")
    if value.real <= 0:
        raise AsympdiagError(f"{what} = {value.real:.6g} is not positive")
    return float(value.real)


@dataclass(frozen=True)
class SmallXiExpansion:
    """Low-frequency branches: one exponential mode starting at -m and two
    parabolic modes -lambda_pm * xi^2 + O(xi^3)."""

    branches: np.ndarray
    lambda0: float
    lambda_pm: tuple
    nondeg_order: int | None

    def branch_value(self, j, xi):
        return sum(self.branches[j, k] * xi**k for k in range(self.branches.shape[1]))


@dataclass(frozen=True)
class LargeXiExpansion:
    """High-frequency branches; coefficient k of branch j multiplies
    xi^(2-k), so index 2 is the constant term."""

    branches: np.ndarray
    nondeg_order: int | None

    @property
    def parabolic_constant(self):
        return self.branches[2, 2]

    @property
    def hyperbolic_constants(self):
        return self.branches[0, 2], self.branches[1, 2]

    def branch_value(self, j, xi):
        return sum(
            self.branches[j, k] * float(xi) ** (2 - k)
            for k in range(self.branches.shape[1])
        )


def small_xi_expansion(params, order, **tols):
    """Branch expansions at frequency zero via the block scheme.

    Checks that the diffusion rates (the order-2 coefficients, negated for
    the two parabolic branches) come out real and positive.
    """
    if order < 2:
        raise InvalidParams("need order >= 2 to resolve the parabolic coefficients")
    family = build_family(params)
    padded = MatrixSeries.from_coeffs(list(family.coeffs), order=order)
    result, _ = block_diagonalize(padded, order, **tols)
    if result.failure is not None:
        raise AsympdiagError(f"block scheme failed at order {result.failure.k}")
    branches = result.branches
    exponential = int(np.argmin(np.abs(branches[:, 0] + params.m)))
    parabolic = [j for j in range(3) if j != exponential]
    lambda0 = _require_positive_real(branches[exponential, 2], "lambda0")
    lam_pm = tuple(
        _require_positive_real(-branches[j, 2], "lambda_pm") for j in parabolic
    )
    return SmallXiExpansion(branches, lambda0, lam_pm, result.nondeg_order)


def large_xi_expansion(params, order, **tols):
    """Branch expansions as the frequency grows, from the rescaled family."""
    if order < 2:
        raise InvalidParams("need order >= 2 to resolve the constant terms")
    family = rescaled_family(params, order)
    result, _ = block_diagonalize(family, order, **tols)
    if result.failure is not None:
        raise AsympdiagError(f"block scheme failed at order {result.failure.k}")
    branches = result.branches
    # canonical order puts the two zero-leading (hyperbolic) branches first
    parabolic = int(np.argmin(np.abs(branches[:, 0] + params.kappa)))
    order_idx = [j for j in range(3) if j != parabolic] + [parabolic]
    return LargeXiExpansion(branches[order_idx], result.nondeg_order)


@dataclass(frozen=True)
class SignSample:
    xi: float
    values: np.ndarray
    max_real: float


@dataclass(frozen=True)
class SignReport:
    """Spectral sweep: real parts per frequency and the worst margin."""

    samples: tuple
    all_nonpositive: bool
    all_negative_offzero: bool
    min_margin: float

    @property
    def violations(self):
        return tuple(
            s for s in self.samples if s.max_real > (_REAL_TOL if s.xi == 0 else 0.0)
        )


def verify_spectral_signs(params, xi_grid, **tols):
    """Eigenvalue real-part signs of the evaluated family over a grid.

    At frequency zero the spectrum is {-m, 0, 0}; away from zero every
    branch must have strictly negative real part, and the report carries
    the smallest margin observed.
    """
    family = build_family(params)

    def one(xi):
        values = eig(family.evaluate(xi), **tols).values
        return SignSample(float(xi), values, float(values.real.max()))

    samples = tuple(parallel_map(one, xi_grid))
    offzero = [s for s in samples if s.xi != 0.0]
    all_nonpos = all(s.max_real <= _REAL_TOL for s in samples)
    all_neg = all(s.max_real < 0.0 for s in offzero)
    min_margin = min((-s.max_real for s in offzero), default=np.inf)
    return SignReport(samples, all_nonpos, all_neg, float(min_margin))
