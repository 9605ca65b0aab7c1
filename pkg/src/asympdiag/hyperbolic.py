"""Characteristic-root expansions of strictly hyperbolic polynomials.

The polynomial is rewritten as a companion matrix whose normalised form is
a power series in 1/|xi|; the standard scheme then yields, per unit
direction, the linear-in-|xi| root speeds and all lower-order expansion
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import opnorm
from .errors import (
    DegreeViolation,
    DimensionMismatch,
    NotDiagonable,
    NotNormalised,
    NotStrictlyHyperbolic,
)
from .matrixcore import DEFAULT_TOL_GROUP, eig, group_eigenvalues
from .series import MatrixSeries
from .standard import diagonalize

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class HyperbolicPolynomial:
    """Polynomial in (tau, xi_1..xi_n) of degree m in tau.

    ``terms`` maps (tau_power, xi_multi_index) to a complex coefficient;
    the total degree of every term is at most m and the coefficient of
    tau^m (the leading normalisation) must be nonzero.
    """

    m: int
    n: int
    terms: dict

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DegreeViolation("need tau-degree >= 1 and spatial dimension >= 1")
        cleaned = {}
        for (a, beta), coeff in self.terms.items():
            beta = tuple(int(b) for b in beta)
            a = int(a)
            if len(beta) != self.n or a < 0 or any(b < 0 for b in beta):
                raise DegreeViolation(f"malformed term ({a}, {beta})")
            if a + sum(beta) > self.m:
                raise DegreeViolation(
                    f"term ({a}, {beta}) has total degree {a + sum(beta)} > {self.m}"
                )
            coeff = complex(coeff)
            if coeff != 0:
                cleaned[(a, beta)] = coeff
        if cleaned.get((self.m, (0,) * self.n), 0) == 0:
            raise DegreeViolation("coefficient of tau^m must be nonzero")
        object.__setattr__(self, "terms", cleaned)

    @property
    def c(self):
        """Leading normalisation: the coefficient of tau^m."""
        return self.terms[(self.m, (0,) * self.n)]

    def evaluate(self, tau, xi):
        """Value of the polynomial at numeric (tau, xi)."""
        xi = np.asarray(xi, dtype=complex).ravel()
        if xi.shape != (self.n,):
            raise DimensionMismatch(f"xi must have {self.n} components")
        total = 0.0 + 0.0j
        for (a, beta), coeff in self.terms.items():
            total += coeff * tau**a * np.prod(xi**np.array(beta))
        return total

    def lower_degree(self):
        """Total degree of the non-homogeneous remainder, or None if the
        polynomial is m-homogeneous."""
        degrees = [a + sum(beta) for (a, beta) in self.terms if a + sum(beta) < self.m]
        return max(degrees) if degrees else None


@dataclass(frozen=True)
class RootExpansion:
    """Asymptotic expansion of the m characteristic roots along ``eta``.

    Branch j behaves like |xi| * phi[j] + coeffs[j, 0] +
    coeffs[j, 1] / |xi| + ... as |xi| grows.
    """

    eta: np.ndarray
    phi: np.ndarray
    coeffs: np.ndarray

    @property
    def order(self):
        return self.coeffs.shape[1] - 1

    def branch_value(self, j, xi_abs):
        """Evaluate branch j of the expansion at frequency magnitude |xi|."""
        value = xi_abs * self.phi[j]
        for k in range(self.coeffs.shape[1]):
            value = value + self.coeffs[j, k] * xi_abs ** (-k)
        return value


def _check_direction(eta, n):
    eta = np.asarray(eta, dtype=float).ravel()
    if eta.shape != (n,):
        raise DimensionMismatch(f"direction must have {n} components")
    if abs(np.linalg.norm(eta) - 1.0) > _UNIT_TOL:
        raise NotNormalised(f"direction norm {np.linalg.norm(eta):.15g} is not 1")
    return eta


def companion_series(poly, eta, order):
    """Normalised companion matrix of the polynomial as a series in 1/|xi|.

    Coefficient j carries, in its last row, the degree-(k-j) homogeneous
    parts of the tau^(m-k) coefficient polynomials evaluated at ``eta``;
    coefficient 0 additionally carries the superdiagonal of ones.  The
    series terminates at power m, so the result is exact for order >= m.
    """
    eta = _check_direction(eta, poly.n)
    m = poly.m
    depth = min(order, m)
    coeffs = [np.zeros((m, m), dtype=complex) for _ in range(depth + 1)]
    for r in range(m - 1):
        coeffs[0][r, r + 1] = 1.0
    for (a, beta), coeff in poly.terms.items():
        k = m - a
        if k == 0:
            continue
        j = k - sum(beta)
        if j > depth:
            continue
        col = m - k
        coeffs[j][m - 1, col] -= coeff / poly.c * np.prod(eta ** np.array(beta))
    return MatrixSeries(tuple(coeffs))


def _strictness_check(leading, eta, tol_group, reality_tol):
    try:
        values = eig(leading).values
    except NotDiagonable as exc:
        # a defective companion block means repeated principal roots
        values = np.linalg.eigvals(leading)
        gaps = np.abs(values[:, None] - values[None, :]) + np.diag(
            np.full(len(values), np.inf)
        )
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise NotStrictlyHyperbolic(
            eta,
            pair=(values[i], values[j]),
            detail="principal symbol is defective (repeated roots)",
        ) from exc
    scale = max(1.0, opnorm(leading))
    worst = int(np.argmax(np.abs(values.imag)))
    if abs(values[worst].imag) > reality_tol * scale:
        raise NotStrictlyHyperbolic(
            eta,
            pair=(values[worst], values[worst].conjugate()),
            detail=f"principal root {values[worst]:.6g} is not real",
        )
    # defective double roots split eigenvalues at the sqrt(eps) scale, so
    # the separation test must not resolve below that
    gap_tol = max(tol_group, 8.0 * np.sqrt(np.finfo(float).eps) * scale)
    partition, _ = group_eigenvalues(values, tol_group=gap_tol)
    if not partition.is_finest:
        gid = partition.group_ids()
        dup = np.flatnonzero(np.diff(gid) == 0)[0]
        raise NotStrictlyHyperbolic(
            eta,
            pair=(values[dup], values[dup + 1]),
            detail="principal roots coincide",
        )
    return values


def root_expansion(poly, eta, order, tol_group=DEFAULT_TOL_GROUP, reality_tol=1e-8):
    """Expansion of all characteristic roots to coefficient index ``order``.

    The companion family is diagonalised at one extra order because the
    k-th root coefficient is the (k+1)-st eigenvalue coefficient of the
    normalised companion matrix.
    """
    comp = companion_series(poly, eta, order + 1)
    comp = MatrixSeries.from_coeffs(list(comp.coeffs), order=order + 1)
    _strictness_check(comp.coefficient(0), eta, tol_group, reality_tol)
    result = diagonalize(comp, order + 1, tol_group=tol_group)
    branches = result.branches
    phi = branches[:, 0].real
    return RootExpansion(np.asarray(eta, float), phi, branches[:, 1:])


@dataclass(frozen=True)
class VanishingReport:
    """Which low-order root coefficients are forced to vanish, and whether
    they numerically do."""

    lower_degree: int | None
    checked: tuple
    magnitudes: np.ndarray
    passed: bool


def check_low_order_vanishing(poly, eta, tol=1e-12, tol_group=DEFAULT_TOL_GROUP):
    """Verify the forced vanishing of leading root coefficients.

    When the non-homogeneous remainder has total degree L < m - 1, the
    root coefficients of index 0 .. m - L - 2 vanish identically; an
    m-homogeneous polynomial forces every coefficient to vanish (checked
    up to index m - 1 here).  The report is vacuous when L = m - 1.
    """
    ldeg = poly.lower_degree()
    effective = -1 if ldeg is None else ldeg
    top = poly.m - effective - 2
    checked = tuple(range(0, top + 1))
    if not checked:
        return VanishingReport(ldeg, (), np.zeros((poly.m, 0)), True)
    expansion = root_expansion(poly, eta, max(checked), tol_group=tol_group)
    magnitudes = np.abs(expansion.coeffs[:, : top + 1])
    return VanishingReport(ldeg, checked, magnitudes, bool(np.all(magnitudes <= tol)))


def unit_directions(n, count):
    """Deterministic sample of unit directions.

    Both points for n = 1, a uniform circle grid for n = 2 and a Fibonacci
    lattice for n = 3; higher dimensions use a seeded Gaussian sample.
    """
    if count < 1:
        raise DimensionMismatch("need at least one direction")
    if n == 1:
        return np.array([[1.0], [-1.0]])[: max(count, 1)] if count >= 2 else np.array([[1.0]])
    if n == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if n == 3:
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        i = np.arange(count)
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        theta = 2.0 * np.pi * i / golden
        return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)
