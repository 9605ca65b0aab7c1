"""Multi-step block diagonalisation of degenerate matrix families.

Step k removes the off-block parts of the order-(k+1) coefficient in k+1
sub-steps (one per partition level, using the commutation of the sub-step
solutions with all lower diagonal coefficients), then diagonalises the
remaining block-diagonal candidate blockwise.  The hierarchy of
diagonability assumptions and the resulting non-degeneracy order are
exposed as separate reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import default_rho_grid
from .errors import AssumptionFailure, DimensionMismatch
from .matrixcore import (
    DEFAULT_SEP_MIN,
    DEFAULT_TOL_EIG,
    DEFAULT_TOL_GROUP,
    Partition,
    PartitionFiltration,
    bdiag,
    group_eigenvalues,
    is_diagonable,
    sylvester_offdiag_solve,
)
from .series import MatrixSeries
from .standard import BlockFailure, DiagonalizationResult, _residual_diagnostics


@dataclass(frozen=True)
class BlockStep:
    """Record of one scheme step: sub-step solutions, the intermediate
    block projections, the pre-diagonalisation candidate and its blockwise
    diagonaliser (None when the candidate was not diagonable)."""

    k: int
    sub_solutions: tuple  # (ell, K) pairs
    intermediates: tuple  # (ell, block-projected coefficient) pairs
    lambda_tilde: np.ndarray
    m_tilde: np.ndarray | None


@dataclass(frozen=True)
class SchemeTrace:
    steps: tuple
    prepass: tuple = ()  # (power, K) pairs from the perfect-block variant


@dataclass(frozen=True)
class AssumptionEntry:
    order: int
    status: str  # 'diagonable' | 'not_diagonable' | 'not_reached'
    candidate: np.ndarray | None = None


@dataclass(frozen=True)
class AssumptionReport:
    """Diagonability verdicts for the candidate matrices of orders 0..n."""

    n: int
    entries: tuple
    satisfied: bool


@dataclass(frozen=True)
class NondegeneracyResult:
    """Smallest order at which the scheme separates all branches.

    ``status`` is 'found', 'assumption_failed' (a candidate block was not
    diagonable at order ``failed_at``) or 'degenerate' (every candidate was
    diagonable but some branches still coincide at the maximal order;
    ``coinciding`` lists the offending index groups).
    """

    order: int | None
    status: str
    failed_at: int | None = None
    filtration: PartitionFiltration | None = None
    coinciding: tuple = ()


def _snap_to_groups(values, partition):
    """Replace each group's entries by their mean so equality is bitwise."""
    out = np.asarray(values, dtype=complex).copy()
    for blk in partition.blocks():
        if blk.stop - blk.start > 1:
            out[blk] = out[blk].mean()
    return out


def _restored(series, tables, upto, extra=None):
    """Reset coefficients 0..upto to their known diagonals (they are
    invariant under the preceding transform in exact arithmetic)."""
    for j in range(upto + 1):
        series = series.with_coefficient(j, np.diag(tables[j]))
    if extra is not None:
        series = series.with_coefficient(upto + 1, extra)
    return series


def _grouped_certificate(matrix, tol_eig, tol_group):
    """Eigendecomposition with contiguous, snapped eigenvalue groups."""
    report = is_diagonable(matrix, tol=tol_eig)
    if not report.diagonable:
        return None, report.failing
    decomp = report.certificate
    partition, perm = group_eigenvalues(decomp.values, tol_group=tol_group)
    values = _snap_to_groups(decomp.values[perm], partition)
    return (values, decomp.vectors[:, perm], partition), None


def block_diagonalize(
    family,
    order,
    tol_eig=DEFAULT_TOL_EIG,
    tol_group=DEFAULT_TOL_GROUP,
    sep_min=DEFAULT_SEP_MIN,
    perfect_block=False,
    sample_grid=None,
):
    """Run the multi-step scheme on ``family`` up to ``order``.

    Returns ``(result, trace)``.  The diagonaliser is the flattened product
    of the leading diagonaliser, all unipotent sub-step factors and the
    constant blockwise diagonalisers.  When a candidate block matrix at
    some order k >= 1 is not diagonable the partial result (diagonal
    through order k-1, block-diagonal at order k) is returned with its
    ``failure`` field set; a non-diagonable leading coefficient raises
    AssumptionFailure(0).

    ``perfect_block`` switches to the variant that first block-diagonalises
    with respect to the leading partition at every order, so later steps
    skip their level-0 sub-step.
    """
    if order < 0:
        raise DimensionMismatch("order must be >= 0")
    m = family.dim
    cert, failing = _grouped_certificate(family.coefficient(0), tol_eig, tol_group)
    if cert is None:
        raise AssumptionFailure(
            0,
            indices=tuple(range(m)),
            block=family.coefficient(0),
            detail=f"cluster at {failing.eigenvalue:.6g} has geometric multiplicity "
            f"{failing.geometric} < {failing.size}",
        )
    values0, m0, partition0 = cert
    m0_inv = np.linalg.inv(m0)

    series = family.conjugate_by(m0, m0_inv)
    series = MatrixSeries.from_coeffs(list(series.coeffs), order=order)
    series = series.with_coefficient(0, np.diag(values0))

    tables = [values0]
    partitions = [partition0]
    m_total = MatrixSeries.constant(m0, order)
    prepass = []
    steps = []
    failure = None

    if perfect_block:
        for k in range(1, order + 1):
            coeff = series.coefficient(k)
            target = bdiag(partition0, coeff)
            off = coeff - target
            if np.any(off):
                k_mat = sylvester_offdiag_solve(
                    tables[0], off, partition0, sep_min=sep_min
                )
                factor = MatrixSeries.identity(m, order).with_coefficient(k, k_mat)
                series = (factor.inverse() @ series) @ factor
                m_total = m_total @ factor
                prepass.append((k, k_mat))
            series = series.with_coefficient(k, target)

    for k in range(order):
        sub_solutions = []
        intermediates = []
        for ell in range(k + 1):
            coeff = series.coefficient(k + 1)
            target = bdiag(partitions[ell], coeff)
            off = coeff - target
            if not np.any(off):
                sub_solutions.append((ell, np.zeros((m, m), dtype=complex)))
                intermediates.append((ell, target))
                series = series.with_coefficient(k + 1, target)
                continue
            within = partitions[ell - 1] if ell >= 1 else None
            k_mat = sylvester_offdiag_solve(
                tables[ell], off, partitions[ell], sep_min=sep_min, within=within
            )
            power = k + 1 - ell
            factor = MatrixSeries.identity(m, order).with_coefficient(power, k_mat)
            series = (factor.inverse() @ series) @ factor
            series = _restored(series, tables, k, extra=target)
            m_total = m_total @ factor
            sub_solutions.append((ell, k_mat))
            intermediates.append((ell, target))

        lam_tilde = series.coefficient(k + 1)
        pk = partitions[-1]
        m_tilde = np.eye(m, dtype=complex)
        new_table = np.zeros(m, dtype=complex)
        new_sizes = []
        for blk in pk.blocks():
            sub = lam_tilde[blk, blk]
            if blk.stop - blk.start == 1:
                new_table[blk.start] = sub[0, 0]
                new_sizes.append(1)
                continue
            cert, failing = _grouped_certificate(sub, tol_eig, tol_group)
            if cert is None:
                failure = BlockFailure(
                    k + 1,
                    indices=tuple(range(blk.start, blk.stop)),
                    block=sub,
                    detail=f"cluster at {failing.eigenvalue:.6g} has geometric "
                    f"multiplicity {failing.geometric} < {failing.size}",
                )
                break
            bvals, bvecs, bpart = cert
            m_tilde[blk, blk] = bvecs
            new_table[blk] = bvals
            new_sizes.extend(bpart.sizes)
        if failure is not None:
            steps.append(BlockStep(k, tuple(sub_solutions), tuple(intermediates), lam_tilde, None))
            break

        series = series.conjugate_by(m_tilde)
        series = _restored(series, tables, k, extra=np.diag(new_table))
        m_total = m_total @ MatrixSeries.constant(m_tilde, order)
        partitions.append(Partition(tuple(new_sizes)))
        tables.append(new_table)
        steps.append(BlockStep(k, tuple(sub_solutions), tuple(intermediates), lam_tilde, m_tilde))

    achieved = len(tables) - 1
    lam = MatrixSeries(tuple(np.diag(t) for t in tables))
    filtration = PartitionFiltration(tuple(partitions), tuple(tables))
    grid = default_rho_grid() if sample_grid is None else np.asarray(sample_grid, float)
    samples, radius = _residual_diagnostics(family, m_total, lam, grid, tol_eig)
    nondeg = filtration.finest_level if failure is None else None
    result = DiagonalizationResult(
        M=m_total,
        Lambda=lam,
        order=achieved,
        residual_samples=samples,
        empirical_radius=radius,
        filtration=filtration,
        nondeg_order=nondeg,
        failure=failure,
    )
    return result, SchemeTrace(tuple(steps), tuple(prepass))


def check_assumption(
    family,
    n,
    tol_eig=DEFAULT_TOL_EIG,
    tol_group=DEFAULT_TOL_GROUP,
    sep_min=DEFAULT_SEP_MIN,
):
    """Diagonability report for the candidate matrices of orders 0..n."""
    if family.order < n:
        raise DimensionMismatch(f"family order {family.order} is below n = {n}")
    a0 = family.coefficient(0)
    rep0 = is_diagonable(a0, tol=tol_eig)
    entries = [
        AssumptionEntry(0, "diagonable" if rep0.diagonable else "not_diagonable", a0)
    ]
    if rep0.diagonable and n >= 1:
        result, trace = block_diagonalize(
            family, n, tol_eig=tol_eig, tol_group=tol_group, sep_min=sep_min
        )
        failed_at = result.failure.k if result.failure is not None else None
        for k in range(1, n + 1):
            step = trace.steps[k - 1] if k - 1 < len(trace.steps) else None
            if step is None:
                entries.append(AssumptionEntry(k, "not_reached"))
            elif failed_at == k:
                entries.append(AssumptionEntry(k, "not_diagonable", step.lambda_tilde))
            else:
                entries.append(AssumptionEntry(k, "diagonable", step.lambda_tilde))
    elif not rep0.diagonable:
        for k in range(1, n + 1):
            entries.append(AssumptionEntry(k, "not_reached"))
    satisfied = all(e.status == "diagonable" for e in entries)
    return AssumptionReport(n, tuple(entries), satisfied)


def nondegeneracy_order(
    family,
    max_n,
    tol_eig=DEFAULT_TOL_EIG,
    tol_group=DEFAULT_TOL_GROUP,
    sep_min=DEFAULT_SEP_MIN,
):
    """Smallest n <= max_n with all assumptions satisfied and every branch
    separated at order n; distinguishes assumption failure from families
    that remain degenerate through ``max_n``."""
    if family.order < max_n:
        raise DimensionMismatch(f"family order {family.order} is below max_n = {max_n}")
    try:
        result, _ = block_diagonalize(
            family, max_n, tol_eig=tol_eig, tol_group=tol_group, sep_min=sep_min
        )
    except AssumptionFailure as exc:
        return NondegeneracyResult(None, "assumption_failed", failed_at=exc.k)
    if result.failure is not None:
        return NondegeneracyResult(
            None,
            "assumption_failed",
            failed_at=result.failure.k,
            filtration=result.filtration,
        )
    level = result.filtration.finest_level
    if level is None:
        last = result.filtration.levels[-1]
        groups = []
        start = 0
        for size in last.sizes:
            if size > 1:
                groups.append(tuple(range(start, start + size)))
            start += size
        return NondegeneracyResult(
            None,
            "degenerate",
            filtration=result.filtration,
            coinciding=tuple(groups),
        )
    return NondegeneracyResult(level, "found", filtration=result.filtration)
