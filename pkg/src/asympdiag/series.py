"""Truncated matrix power series in one small parameter.

A series stores dense coefficients for powers 0..order; every operation
records the resulting valid order, and mixing series of different orders
truncates to the minimum.  The same object represents expansions in rho,
in 1/|xi| or in 1/t depending on the application.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularLeadingCoefficient
from .matrixcore import DEFAULT_TOL_EIG, as_matrix


@dataclass(frozen=True)
class MatrixSeries:
    """Sum of coeffs[k] * parameter**k for k = 0..order."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(as_matrix(c) for c in self.coeffs)
        if not coeffs:
            raise DimensionMismatch("a series needs at least the order-0 coefficient")
        dim = coeffs[0].shape[0]
        if any(c.shape != (dim, dim) for c in coeffs):
            raise DimensionMismatch("all coefficients must share one dimension")
        for c in coeffs:
            c.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_coeffs(cls, coeffs, order=None, dim=None):
        """Build a series, zero-padding or truncating to ``order`` if given."""
        coeffs = [as_matrix(c) for c in coeffs]
        if not coeffs:
            if dim is None or order is None:
                raise DimensionMismatch("empty coefficient list needs dim and order")
            coeffs = [np.zeros((dim, dim), dtype=complex)]
        d = coeffs[0].shape[0]
        if order is not None:
            zero = np.zeros((d, d), dtype=complex)
            coeffs = (coeffs + [zero] * (order + 1 - len(coeffs)))[: order + 1]
        return cls(tuple(coeffs))

    @classmethod
    def zeros(cls, dim, order):
        return cls(tuple(np.zeros((dim, dim), dtype=complex) for _ in range(order + 1)))

    @classmethod
    def identity(cls, dim, order):
        coeffs = [np.eye(dim, dtype=complex)]
        coeffs += [np.zeros((dim, dim), dtype=complex) for _ in range(order)]
        return cls(tuple(coeffs))

    @classmethod
    def constant(cls, mat, order):
        mat = as_matrix(mat)
        return cls.from_coeffs([mat], order=order)

    @property
    def dim(self):
        return self.coeffs[0].shape[0]

    @property
    def order(self):
        return len(self.coeffs) - 1

    def coefficient(self, k):
        """Coefficient of power k (zero matrix beyond the stored order)."""
        if 0 <= k <= self.order:
            return self.coeffs[k]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def truncate(self, order):
        if order >= self.order:
            return self
        return MatrixSeries(self.coeffs[: order + 1])

    def with_coefficient(self, k, mat):
        """Functional update of one coefficient."""
        mat = as_matrix(mat)
        if mat.shape != (self.dim, self.dim) or not 0 <= k <= self.order:
            raise DimensionMismatch("coefficient update out of range")
        coeffs = list(self.coeffs)
        coeffs[k] = mat
        return MatrixSeries(tuple(coeffs))

    def _check_dim(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check_dim(other)
        n = min(self.order, other.order)
        return MatrixSeries(tuple(self.coeffs[k] + other.coeffs[k] for k in range(n + 1)))

    def __sub__(self, other):
        self._check_dim(other)
        n = min(self.order, other.order)
        return MatrixSeries(tuple(self.coeffs[k] - other.coeffs[k] for k in range(n + 1)))

    def scale(self, scalar):
        scalar = complex(scalar)
        return MatrixSeries(tuple(scalar * c for c in self.coeffs))

    def __mul__(self, scalar):
        return self.scale(scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def __matmul__(self, other):
        """Cauchy product truncated at the minimum operand order."""
        self._check_dim(other)
        n = min(self.order, other.order)
        out = [np.zeros((self.dim, self.dim), dtype=complex) for _ in range(n + 1)]
        for i, a in enumerate(self.coeffs[: n + 1]):
            for j in range(0, n + 1 - i):
                out[i + j] += a @ other.coeffs[j]
        return MatrixSeries(tuple(out))

    def inverse(self, tol=DEFAULT_TOL_EIG):
        """Series inverse by the Neumann-style recursion.

        Requires an invertible leading coefficient (condition below
        1/tol); the product with the inverse is the identity exactly at
        every retained order.
        """
        c0 = self.coeffs[0]
        svals = np.linalg.svd(c0, compute_uv=False)
        if svals[-1] <= tol * svals[0] or svals[-1] == 0.0:
            raise SingularLeadingCoefficient(
                f"leading coefficient condition {svals[0] / max(svals[-1], 1e-300):.3e} "
                f"exceeds 1/tol"
            )
        inv0 = np.linalg.inv(c0)
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = np.zeros_like(c0)
            for j in range(1, k + 1):
                acc += self.coeffs[j] @ out[k - j]
            out.append(-inv0 @ acc)
        return MatrixSeries(tuple(out))

    def conjugate_by(self, t, t_inv=None):
        """Constant-matrix similarity transform t^-1 * self * t."""
        t = as_matrix(t)
        if t_inv is None:
            t_inv = np.linalg.inv(t)
        return MatrixSeries(tuple(t_inv @ c @ t for c in self.coeffs))

    def evaluate(self, rho):
        """Horner evaluation at a numeric parameter value."""
        rho = complex(rho)
        out = np.array(self.coeffs[-1], dtype=complex)
        for c in self.coeffs[-2::-1]:
            out = out * rho + c
        return out
