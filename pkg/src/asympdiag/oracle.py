"""Independent validation of computed expansions.

Dense numeric eigendecomposition over parameter grids, optimal matching of
numeric eigenvalues to expansion branches, convergence-order fits and the
exact eigenprojection via the product formula.  Nothing here reuses the
scheme recursions, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._util import fit_loglog_slope, parallel_map, residual_floor
from .errors import DimensionMismatch, InsufficientGrid, NotDiagonable, SmallDivisor
from .matrixcore import DEFAULT_SEP_MIN, DEFAULT_TOL_EIG, eig


@dataclass(frozen=True)
class BranchMatch:
    """Optimal pairing of numeric spectra with expansion branches.

    ``matched[p][j]`` is the index of the numeric eigenvalue assigned to
    branch j at grid point p; ``residuals[p, j]`` the matched distance.
    Grid points whose spectra were unavailable are listed in ``skipped``.
    """

    grid: np.ndarray
    matched: tuple
    residuals: np.ndarray
    skipped: tuple = ()
    value_scale: float = 1.0


@dataclass(frozen=True)
class BranchSlope:
    branch: int
    slope: float | None
    exact: bool
    points_used: int


def sample_spectrum(family, grid, tol_eig=DEFAULT_TOL_EIG):
    """Canonically ordered spectra of the evaluated family per grid point.

    Points where the evaluated matrix is numerically defective yield None
    and are skipped by downstream matching.
    """

    def one(rho):
        try:
            return eig(family.evaluate(rho), tol_eig=tol_eig).values
        except NotDiagonable:
            return None

    return parallel_map(one, grid)


def match_branches(spectra, lam, grid):
    """Hungarian assignment of numeric eigenvalues to expansion branches.

    The cost is the plain modulus distance; a tiny penalty steers ties
    towards the previous grid point's permutation so conjugate branches do
    not swap along the grid.
    """
    grid = np.asarray(grid, dtype=float)
    m = lam.dim
    matched = []
    residuals = np.full((len(grid), m), np.nan)
    skipped = []
    prev = None
    value_scale = 1.0
    for p, rho in enumerate(grid):
        numeric = spectra[p]
        if numeric is None:
            matched.append(None)
            skipped.append(p)
            continue
        if len(numeric) != m:
            raise DimensionMismatch("spectrum size does not match branch count")
        value_scale = max(value_scale, float(np.max(np.abs(numeric))))
        expansion = np.diag(lam.evaluate(rho))
        cost = np.abs(numeric[None, :] - expansion[:, None])
        if prev is not None:
            tie = 1e-12 * (1.0 + cost.max())
            penalty = np.full_like(cost, tie)
            penalty[np.arange(m), prev] = 0.0
            cost = cost + penalty
        rows, cols = linear_sum_assignment(cost)
        perm = np.empty(m, dtype=int)
        perm[rows] = cols
        matched.append(perm)
        residuals[p] = np.abs(numeric[perm] - expansion)
        prev = perm
    return BranchMatch(grid, tuple(matched), residuals, tuple(skipped), value_scale)


def convergence_order(match, min_points=5, min_decades=2.0):
    """Per-branch least-squares slope of log residual against log rho.

    Residuals at the round-off floor are excluded from the fit; branches
    whose residuals sit entirely at the floor are reported as exact.
    Raises InsufficientGrid when the grid has fewer than ``min_points``
    usable points or spans fewer than ``min_decades`` decades.
    """
    usable = [p for p in range(len(match.grid)) if p not in match.skipped]
    if len(usable) < min_points:
        raise InsufficientGrid(f"need at least {min_points} grid points, have {len(usable)}")
    rhos = match.grid[usable]
    if np.log10(rhos.max() / rhos.min()) < min_decades:
        raise InsufficientGrid(f"grid must span at least {min_decades} decades")
    floor = residual_floor(match.value_scale)
    out = []
    for j in range(match.residuals.shape[1]):
        res = match.residuals[usable, j]
        slope, used, exact = fit_loglog_slope(rhos, res, floor=floor)
        out.append(BranchSlope(j, slope, exact, used))
    return out


def exact_projection(a_eval, values, j, sep_min=DEFAULT_SEP_MIN):
    """Eigenprojection by the product formula.

    Computes the product over i != j of (values[i] - A) / (values[i] -
    values[j]); requires the eigenvalues to be separated by ``sep_min``.
    """
    a = np.asarray(a_eval, dtype=complex)
    values = np.asarray(values, dtype=complex).ravel()
    m = a.shape[0]
    if values.shape != (m,):
        raise DimensionMismatch("need one eigenvalue per matrix dimension")
    if not 0 <= j < m:
        raise DimensionMismatch(f"index {j} out of range")
    proj = np.eye(m, dtype=complex)
    for i in range(m):
        if i == j:
            continue
        gap = values[i] - values[j]
        if abs(gap) < sep_min:
            raise SmallDivisor(i, j, float(abs(gap)), sep_min)
        proj = proj @ ((values[i] * np.eye(m) - a) / gap)
    return proj
