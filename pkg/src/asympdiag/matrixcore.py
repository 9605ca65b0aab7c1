"""Dense complex matrix primitives.

Canonical eigendecomposition of a constant matrix, eigenvalue clustering
into contiguous partitions, block-diagonal projection and the entrywise
off-diagonal Sylvester solver.  Everything here operates on small dense
complex matrices (dimension capped at :data:`MAX_DIM`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import opnorm
from .errors import (
    AmbiguousClustering,
    DimensionMismatch,
    NonConvergence,
    NotDiagonable,
    SmallDivisor,
)

MAX_DIM = 64

DEFAULT_TOL_EIG = 1e-10
DEFAULT_TOL_GROUP = 1e-8
DEFAULT_SEP_MIN = 1e-8

_EPS = float(np.finfo(float).eps)


def as_matrix(a):
    """Validate and return ``a`` as a square complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix entries must be finite")
    return m


def _lex_order(values):
    """Indices sorting complex values by (Re descending, Im descending)."""
    values = np.asarray(values)
    return np.lexsort((-values.imag, -values.real))


@dataclass(frozen=True)
class Partition:
    """Contiguous grouping (pi_1, ..., pi_q) of the indices 0..m-1."""

    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise DimensionMismatch(f"group sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def finest(cls, m):
        return cls((1,) * m)

    @classmethod
    def coarsest(cls, m):
        return cls((m,))

    @property
    def dim(self):
        return sum(self.sizes)

    @property
    def is_finest(self):
        return all(s == 1 for s in self.sizes)

    def group_ids(self):
        """Group index of every matrix index, as an integer array."""
        return np.repeat(np.arange(len(self.sizes)), self.sizes)

    def same(self, i, j):
        gid = self.group_ids()
        return bool(gid[i] == gid[j])

    def blocks(self):
        """Slices of the diagonal blocks, in order."""
        start = 0
        for s in self.sizes:
            yield slice(start, start + s)
            start += s

    def refines(self, other):
        """True when every group of ``self`` lies inside one group of ``other``."""
        if self.dim != other.dim:
            return False
        own = set(np.cumsum(self.sizes).tolist())
        return set(np.cumsum(other.sizes).tolist()) <= own


@dataclass(frozen=True)
class PartitionFiltration:
    """Partitions Pi_0 >= Pi_1 >= ... with the eigenvalue table per level.

    ``tables[k]`` holds the order-k diagonal entries; two indices share a
    level-k group exactly when their tables agree at every level <= k.
    """

    levels: tuple
    tables: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        tables = tuple(np.asarray(t, dtype=complex) for t in self.tables)
        if len(levels) != len(tables):
            raise DimensionMismatch("one eigenvalue table per level required")
        for k, level in enumerate(levels):
            if tables[k].shape != (level.dim,):
                raise DimensionMismatch(f"table {k} does not match partition size")
            if k and not level.refines(levels[k - 1]):
                raise DimensionMismatch(f"level {k} does not refine level {k - 1}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "tables", tables)

    @property
    def depth(self):
        return len(self.levels) - 1

    @property
    def finest_level(self):
        """First level whose partition is the finest one, or None."""
        for k, level in enumerate(self.levels):
            if level.is_finest:
                return k
        return None


@dataclass(frozen=True)
class EigenDecomposition:
    """Canonically ordered and normalised eigendecomposition.

    ``values`` are sorted by (Re desc, Im desc); column j of ``vectors``
    has unit norm and its first component of largest modulus is real
    positive.  ``cond`` estimates the condition of the eigenvector matrix.
    """

    values: np.ndarray
    vectors: np.ndarray
    cond: float


def _normalise_columns(vectors):
    v = vectors.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            continue
        col = col / nrm
        pivot = col[int(np.argmax(np.abs(col)))]
        col = col * (pivot.conjugate() / abs(pivot))
        v[:, j] = col
    return v


def eig(a, tol_eig=DEFAULT_TOL_EIG):
    """Eigendecomposition with a deterministic ordering convention.

    Raises NotDiagonable when the eigenvector matrix is numerically
    singular (smallest singular value below ``tol_eig`` times the largest)
    and NonConvergence when the underlying QR iteration fails.
    """
    a = as_matrix(a)
    m = a.shape[0]
    if m > MAX_DIM:
        raise DimensionMismatch(f"dimension {m} exceeds the supported maximum {MAX_DIM}")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigensolver did not converge: {exc}") from exc
    order = _lex_order(values)
    values = values[order]
    vectors = _normalise_columns(vectors[:, order])
    svals = np.linalg.svd(vectors, compute_uv=False)
    if svals[-1] < tol_eig * svals[0]:
        raise NotDiagonable(
            f"eigenvector matrix numerically singular "
            f"(sigma_min/sigma_max = {svals[-1] / svals[0]:.3e} < tol_eig = {tol_eig:.1e})"
        )
    return EigenDecomposition(values, vectors, float(svals[0] / svals[-1]))


def _cluster_indices(values, tol):
    """Transitive closure of pairwise closeness; returns lists of indices."""
    n = len(values)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def group_eigenvalues(values, tol_group=DEFAULT_TOL_GROUP):
    """Cluster values that agree within ``tol_group`` into contiguous groups.

    Returns ``(partition, perm)`` where ``values[perm]`` lists the values
    group by group, ordered lexicographically (Re desc, Im desc) within and
    across groups.  Clustering is the transitive closure of pairwise
    closeness; AmbiguousClustering signals that two clusters are wide
    relative to their separation, so the tolerance geometry is unreliable.
    """
    vals = np.asarray(values, dtype=complex).ravel()
    if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
        raise ValueError("eigenvalues must be finite")
    clusters = _cluster_indices(vals, tol_group)
    for c in clusters:
        c.sort(key=lambda i: (-vals[i].real, -vals[i].imag, i))
    clusters.sort(key=lambda c: (-vals[c[0]].real, -vals[c[0]].imag))

    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            ca, cb = clusters[a], clusters[b]
            sep = min(abs(vals[i] - vals[j]) for i in ca for j in cb)
            diam_a = max((abs(vals[i] - vals[j]) for i in ca for j in ca), default=0.0)
            diam_b = max((abs(vals[i] - vals[j]) for i in cb for j in cb), default=0.0)
            if diam_a > sep / 2 and diam_b > sep / 2:
                raise AmbiguousClustering(
                    f"clusters of diameters {diam_a:.3e} and {diam_b:.3e} are "
                    f"separated by only {sep:.3e}",
                    clusters=(tuple(ca), tuple(cb)),
                    separation=sep,
                )

    perm = np.array([i for c in clusters for i in c], dtype=int)
    partition = Partition(tuple(len(c) for c in clusters))
    return partition, perm


def bdiag(partition, mat):
    """Project ``mat`` onto its block-diagonal part with respect to ``partition``."""
    m = as_matrix(mat)
    if partition.dim != m.shape[0]:
        raise DimensionMismatch(
            f"partition of size {partition.dim} does not match matrix of dim {m.shape[0]}"
        )
    out = np.zeros_like(m)
    for blk in partition.blocks():
        out[blk, blk] = m[blk, blk]
    return out


def sylvester_offdiag_solve(lam, b, partition, sep_min=DEFAULT_SEP_MIN, within=None):
    """Solve [Lambda, K] + B - bdiag(B) = 0 for the off-block part K.

    ``lam`` is a diagonal matrix (or its diagonal) whose entries are
    constant inside every partition group; the solution is
    ``K[i, j] = -B[i, j] / (lam[i] - lam[j])`` for indices in different
    groups and zero inside groups.  ``within`` optionally restricts the
    solve (and the gap requirement) to index pairs sharing a group of a
    coarser partition; entries outside it are zero.
    """
    b = as_matrix(b)
    lam = np.asarray(lam, dtype=complex)
    diag = np.diag(lam) if lam.ndim == 2 else lam.ravel()
    m = b.shape[0]
    if diag.shape != (m,) or partition.dim != m:
        raise DimensionMismatch("Lambda, B and partition sizes disagree")
    gid = partition.group_ids()
    solve = gid[:, None] != gid[None, :]
    if within is not None:
        wid = within.group_ids()
        solve &= wid[:, None] == wid[None, :]
    gaps = diag[:, None] - diag[None, :]
    bad = solve & (np.abs(gaps) < sep_min)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise SmallDivisor(int(i), int(j), float(abs(gaps[i, j])), sep_min)
    k = np.zeros_like(b)
    k[solve] = -b[solve] / gaps[solve]
    return k


@dataclass(frozen=True)
class FailingCluster:
    """Eigenvalue cluster whose geometric multiplicity falls short."""

    eigenvalue: complex
    size: int
    geometric: int


@dataclass(frozen=True)
class DiagonabilityReport:
    diagonable: bool
    certificate: EigenDecomposition | None
    failing: FailingCluster | None


def is_diagonable(a, tol=DEFAULT_TOL_EIG, cluster_tol=None):
    """Test diagonability, with a certificate or the offending cluster.

    Eigenvalues are clustered at ``cluster_tol`` (default: square-root of
    machine precision times the matrix scale, which captures the splitting
    of defective eigenvalues); a cluster fails when the rank deficiency of
    A - mean*I, measured by singular values below the larger of
    ``tol * sigma_max`` and the cluster spread, is smaller than its size.
    """
    a = as_matrix(a)
    scale = max(1.0, opnorm(a))
    if cluster_tol is None:
        cluster_tol = 8.0 * np.sqrt(_EPS) * scale
    values = np.linalg.eigvals(a)
    for cluster in _cluster_indices(values, cluster_tol):
        if len(cluster) == 1:
            continue
        mu = values[cluster].mean() if isinstance(cluster, np.ndarray) else np.mean(
            [values[i] for i in cluster]
        )
        spread = max(abs(values[i] - mu) for i in cluster)
        svals = np.linalg.svd(a - mu * np.eye(a.shape[0]), compute_uv=False)
        thresh = max(tol * svals[0], 4.0 * spread, 64.0 * _EPS * scale)
        geometric = int(np.sum(svals < thresh))
        if geometric < len(cluster):
            return DiagonabilityReport(
                False, None, FailingCluster(complex(mu), len(cluster), geometric)
            )
    try:
        certificate = eig(a, tol_eig=tol)
    except NotDiagonable:
        gaps = np.abs(values[:, None] - values[None, :]) + np.diag(
            np.full(len(values), np.inf)
        )
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        mu = (values[i] + values[j]) / 2
        return DiagonabilityReport(False, None, FailingCluster(complex(mu), 2, 1))
    return DiagonabilityReport(True, certificate, None)
