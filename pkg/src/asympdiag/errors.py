"""Exception hierarchy for the diagonalisation library."""


class AsympdiagError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(AsympdiagError):
    """Operands have incompatible shapes or an unsupported dimension."""


class NonConvergence(AsympdiagError):
    """The underlying iterative eigensolver failed to converge."""


class NotDiagonable(AsympdiagError):
    """A matrix is numerically defective (eigenvector matrix singular)."""

    def __init__(self, message, cluster=None):
        super().__init__(message)
        self.cluster = cluster


class AmbiguousClustering(AsympdiagError):
    """Eigenvalue clusters are too wide relative to their separation."""

    def __init__(self, message, clusters=None, separation=None):
        super().__init__(message)
        self.clusters = clusters
        self.separation = separation


class SmallDivisor(AsympdiagError):
    """A Sylvester denominator fell below the minimum separation."""

    def __init__(self, i, j, gap, sep_min):
        super().__init__(
            f"gap |lambda[{i}] - lambda[{j}]| = {gap:.6e} below sep_min = {sep_min:.6e}"
        )
        self.pair = (i, j)
        self.gap = gap
        self.sep_min = sep_min


class SingularLeadingCoefficient(AsympdiagError):
    """Leading series coefficient is not invertible."""


class SingularDiagonaliser(AsympdiagError):
    """An evaluated diagonaliser is numerically singular."""


class DegenerateLeading(AsympdiagError):
    """Leading coefficient has repeated eigenvalues; the standard scheme
    does not apply (use the block scheme)."""


class AssumptionFailure(AsympdiagError):
    """A candidate block matrix arising in the multi-step scheme is not
    diagonable.  ``k`` is the order at which the failure occurred."""

    def __init__(self, k, indices=None, block=None, detail=""):
        msg = f"block matrix at order {k} is not diagonable"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.k = k
        self.indices = indices
        self.block = block


class NotStrictlyHyperbolic(AsympdiagError):
    """Principal-part roots are not real and simple in some direction."""

    def __init__(self, eta, pair=None, detail=""):
        msg = f"not strictly hyperbolic at direction {eta}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.eta = eta
        self.pair = pair


class NotNormalised(AsympdiagError):
    """Direction vector is not of unit length."""


class DegreeViolation(AsympdiagError):
    """Polynomial term exceeds the declared total degree."""


class InvalidParams(AsympdiagError):
    """Model parameters violate their constraints."""


class InsufficientGrid(AsympdiagError):
    """Sample grid has too few points or spans too little range."""


class BlowUp(AsympdiagError):
    """A perturbation integral is not numerically integrable."""
