"""Standard recursive diagonalisation of a non-degenerate matrix family.

Given A(rho) with distinct leading eigenvalues, constructs a diagonaliser
series M(rho) = M0 (I + rho M1 + ...) and a diagonal series Lambda(rho)
such that A M - M Lambda vanishes to the requested order, together with
the spectral bound and eigenprojection approximants derived from them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import default_rho_grid, opnorm
from .errors import DegenerateLeading, DimensionMismatch, SingularDiagonaliser
from .matrixcore import (
    DEFAULT_SEP_MIN,
    DEFAULT_TOL_EIG,
    DEFAULT_TOL_GROUP,
    Partition,
    PartitionFiltration,
    eig,
    group_eigenvalues,
    sylvester_offdiag_solve,
)
from .series import MatrixSeries


@dataclass(frozen=True)
class BlockFailure:
    """Failure marker attached to a partial multi-step result."""

    k: int
    indices: tuple
    block: np.ndarray
    detail: str = ""


@dataclass(frozen=True)
class DiagonalizationResult:
    """Diagonaliser series, diagonal series and diagnostics.

    ``Lambda`` coefficients are literal diagonal matrices.  ``order`` is
    the order actually achieved (lower than requested only for partial
    multi-step results, in which case ``failure`` is set).
    ``empirical_radius`` is the largest sampled parameter at which the
    evaluated diagonaliser stays well conditioned.
    """

    M: MatrixSeries
    Lambda: MatrixSeries
    order: int
    residual_samples: tuple
    empirical_radius: float
    filtration: PartitionFiltration
    nondeg_order: int | None
    failure: BlockFailure | None = None

    @property
    def branches(self):
        """Per-branch expansion coefficients, shape (m, order+1)."""
        return np.column_stack([np.diag(c) for c in self.Lambda.coeffs])


def _residual_diagnostics(family, m_series, lam_series, grid, tol_eig):
    samples = []
    radius = 0.0
    for rho in grid:
        a = family.evaluate(rho)
        mm = m_series.evaluate(rho)
        ll = lam_series.evaluate(rho)
        samples.append((float(rho), opnorm(a @ mm - mm @ ll)))
        svals = np.linalg.svd(mm, compute_uv=False)
        if svals[-1] > 0 and svals[0] / svals[-1] < 1.0 / tol_eig:
            radius = max(radius, float(rho))
    return tuple(samples), radius


def diagonalize(
    family,
    order,
    tol_eig=DEFAULT_TOL_EIG,
    tol_group=DEFAULT_TOL_GROUP,
    sep_min=DEFAULT_SEP_MIN,
    column_scaling=None,
    sample_grid=None,
):
    """Run the standard scheme on ``family`` up to ``order``.

    The leading coefficient must have all eigenvalues distinct (within
    ``tol_group``), otherwise DegenerateLeading is raised and the block
    scheme applies instead.  ``column_scaling`` rescales the columns of
    the leading diagonaliser; the resulting Lambda is unchanged up to
    round-off, which is exercised by the uniqueness tests.
    """
    if order < 0:
        raise DimensionMismatch("order must be >= 0")
    m = family.dim
    decomp = eig(family.coefficient(0), tol_eig=tol_eig)
    partition, _ = group_eigenvalues(decomp.values, tol_group=tol_group)
    if not partition.is_finest:
        raise DegenerateLeading(
            f"leading coefficient has repeated eigenvalues (partition {partition.sizes})"
        )
    m0 = decomp.vectors
    if column_scaling is not None:
        scales = np.asarray(column_scaling, dtype=complex).ravel()
        if scales.shape != (m,) or np.any(scales == 0):
            raise DimensionMismatch("column_scaling must give one nonzero scale per column")
        m0 = m0 * scales[None, :]
    lam0 = decomp.values
    m0_inv = np.linalg.inv(m0)

    transformed = family.conjugate_by(m0, m0_inv).truncate(order)
    transformed = MatrixSeries.from_coeffs(list(transformed.coeffs), order=order)
    transformed = transformed.with_coefficient(0, np.diag(lam0))

    w = MatrixSeries.identity(m, order)
    lam = MatrixSeries.from_coeffs([np.diag(lam0)], order=order)
    for k in range(1, order + 1):
        defect = transformed @ w - w @ lam
        b_k = defect.coefficient(k)
        lam = lam.with_coefficient(k, np.diag(np.diag(b_k)))
        m_k = sylvester_offdiag_solve(lam0, b_k, Partition.finest(m), sep_min=sep_min)
        w = w.with_coefficient(k, m_k)

    m_series = MatrixSeries.constant(m0, order) @ w
    grid = default_rho_grid() if sample_grid is None else np.asarray(sample_grid, float)
    samples, radius = _residual_diagnostics(family, m_series, lam, grid, tol_eig)
    filtration = PartitionFiltration((Partition.finest(m),), (lam0,))
    return DiagonalizationResult(
        M=m_series,
        Lambda=lam,
        order=order,
        residual_samples=samples,
        empirical_radius=radius,
        filtration=filtration,
        nondeg_order=0,
    )


def residual(family, result, rho):
    """A(rho) M(rho) - M(rho) Lambda(rho) at a numeric parameter value."""
    if family.dim != result.M.dim:
        raise DimensionMismatch("family and result dimensions differ")
    a = family.evaluate(rho)
    mm = result.M.evaluate(rho)
    ll = result.Lambda.evaluate(rho)
    return a @ mm - mm @ ll


def _inverted_diagonaliser(result, rho, tol_eig=DEFAULT_TOL_EIG):
    mm = result.M.evaluate(rho)
    svals = np.linalg.svd(mm, compute_uv=False)
    if svals[-1] <= 0 or svals[0] / svals[-1] >= 1.0 / tol_eig:
        raise SingularDiagonaliser(
            f"diagonaliser at rho={rho} has condition "
            f"{svals[0] / max(svals[-1], 1e-300):.3e}"
        )
    return mm, np.linalg.inv(mm)


def spectral_bound(family, result, rho, tol_eig=DEFAULT_TOL_EIG, slack=1e-12):
    """Resolvent-based eigenvalue bound at ``rho``.

    Returns ``(bound, verified)``: the operator norm of
    M(rho)^-1 (A M - M Lambda)(rho), and whether every eigenvalue of
    A(rho) lies within ``bound`` (plus ``slack``) of the spectrum of
    Lambda(rho) - the one-sided Hausdorff distance check.
    """
    _, m_inv = _inverted_diagonaliser(result, rho, tol_eig)
    bound = opnorm(m_inv @ residual(family, result, rho))
    a_spec = np.linalg.eigvals(family.evaluate(rho))
    lam_spec = np.diag(result.Lambda.evaluate(rho))
    hausdorff = float(
        max(np.min(np.abs(lam_spec[None, :] - a_spec[:, None]), axis=1), default=0.0)
    )
    return bound, bool(hausdorff <= bound + slack)


def eigenprojection(result, j, rho, tol_eig=DEFAULT_TOL_EIG):
    """Approximate eigenprojection M(rho) (e_j o e_j) M(rho)^-1 of branch j."""
    m = result.M.dim
    if not 0 <= j < m:
        raise DimensionMismatch(f"branch index {j} out of range for dimension {m}")
    mm, m_inv = _inverted_diagonaliser(result, rho, tol_eig)
    return np.outer(mm[:, j], m_inv[j, :])
