import numpy as np
import pytest

from asympdiag import MatrixSeries


def random_nondegenerate_family(rng, m, order, coupling=1.0):
    """Family with well-separated leading eigenvalues and O(1) higher terms."""
    values = np.arange(m) * 2.0 + rng.uniform(-0.3, 0.3, m) + 1j * rng.uniform(-0.5, 0.5, m)
    mix = np.eye(m) + 0.35 * (
        rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    ) / np.sqrt(m)
    a0 = mix @ np.diag(values) @ np.linalg.inv(mix)
    coeffs = [a0]
    for _ in range(order):
        coeffs.append(
            coupling * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        )
    return MatrixSeries.from_coeffs(coeffs, order=order)


def random_hermitian_family(rng, m, order):
    """All-Hermitian coefficients, distinct leading eigenvalues."""
    q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    a0 = q @ np.diag(np.arange(m) * 1.5 + rng.uniform(-0.2, 0.2, m)) @ q.conj().T
    coeffs = [(a0 + a0.conj().T) / 2]
    for _ in range(order):
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        coeffs.append((g + g.conj().T) / 2)
    return MatrixSeries.from_coeffs(coeffs, order=order)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
