"""Asymptotic integration of linear ODE systems dv/dt = A(t) v.

For A(t) with a power-series expansion in 1/t and non-degenerate leading
coefficient, a variant of the standard scheme produces a diagonalising
series M(t) and diagonal phase Lambda(t); solutions are then represented
as M * exp(integral of Lambda) * Q with a bounded correction Q obtained
from the perturbation generator by a Volterra (or literal iterated
integral) construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import opnorm
from .errors import (
    BlowUp,
    DegenerateLeading,
    DimensionMismatch,
    InvalidParams,
)
from .matrixcore import (
    DEFAULT_SEP_MIN,
    DEFAULT_TOL_EIG,
    DEFAULT_TOL_GROUP,
    Partition,
    eig,
    group_eigenvalues,
    sylvester_offdiag_solve,
)
from .series import MatrixSeries

_SKEW_TOL = 1e-12


@dataclass(frozen=True)
class OdeFamily:
    """Coefficient matrix with an expansion A(t) ~ sum A_k t^-k.

    ``series`` coefficient k multiplies t^-k.  ``skew_leading`` asserts
    that the leading coefficient is anti-Hermitian, the hypothesis under
    which the diagonal fundamental factor stays bounded.
    """

    series: MatrixSeries
    t0: float
    skew_leading: bool = False

    def __post_init__(self):
        if self.t0 <= 0:
            raise InvalidParams(f"base time t0 = {self.t0} must be positive")
        a0 = self.series.coefficient(0)
        if self.skew_leading and opnorm(a0 + a0.conj().T) > _SKEW_TOL:
            raise InvalidParams("skew_leading is set but A0 + A0^H is not negligible")

    @property
    def dim(self):
        return self.series.dim

    def evaluate(self, t):
        """A(t), exact for the stored polynomial-in-1/t coefficients."""
        return self.series.evaluate(1.0 / t)


def _ddt(series):
    """Time derivative of a series in 1/t: t^-k maps to -k t^-(k+1)."""
    m = series.dim
    out = [np.zeros((m, m), dtype=complex)]
    for k, c in enumerate(series.coeffs):
        out.append(-k * c)
    return MatrixSeries(tuple(out))


@dataclass(frozen=True)
class WkbDiagonalization:
    """Diagonalising series (in 1/t) with the remainder it leaves behind."""

    M: MatrixSeries
    Lambda: MatrixSeries
    family: OdeFamily

    @property
    def branches(self):
        return np.column_stack([np.diag(c) for c in self.Lambda.coeffs])

    def remainder_matrix(self, t):
        """R(t) = M^-1 dM/dt - M^-1 A M + Lambda, the operator defect."""
        sigma = 1.0 / t
        mm = self.M.evaluate(sigma)
        dm = _ddt(self.M).evaluate(sigma)
        aa = self.family.evaluate(t)
        ll = self.Lambda.evaluate(sigma)
        m_inv = np.linalg.inv(mm)
        return m_inv @ dm - m_inv @ aa @ mm + ll

    def remainder_norm(self, t):
        return opnorm(self.remainder_matrix(t))

    def effective_generator(self, t):
        """Generator G with d/dt (M^-1 v) = (Lambda + G) M^-1 v exactly;
        equals minus the operator defect."""
        return -self.remainder_matrix(t)


def asymptotic_diagonalize_ode(
    family,
    order,
    tol_eig=DEFAULT_TOL_EIG,
    tol_group=DEFAULT_TOL_GROUP,
    sep_min=DEFAULT_SEP_MIN,
):
    """Diagonalise d/dt - A(t) asymptotically as t grows.

    Same recursion as the non-degenerate parameter scheme with two
    changes: the diagonal update enters with a minus sign (the operator
    carries -A), and differentiating the t^-k factors feeds an extra
    one-order-better term into each defect.  Requires distinct leading
    eigenvalues.
    """
    m = family.dim
    decomp = eig(family.series.coefficient(0), tol_eig=tol_eig)
    partition, _ = group_eigenvalues(decomp.values, tol_group=tol_group)
    if not partition.is_finest:
        raise DegenerateLeading(
            f"leading coefficient has repeated eigenvalues (partition {partition.sizes})"
        )
    lam0 = decomp.values
    m0 = decomp.vectors
    m0_inv = np.linalg.inv(m0)
    transformed = family.series.conjugate_by(m0, m0_inv)
    transformed = MatrixSeries.from_coeffs(list(transformed.coeffs), order=order)
    transformed = transformed.with_coefficient(0, np.diag(lam0))

    w = MatrixSeries.identity(m, order)
    lam = MatrixSeries.from_coeffs([np.diag(lam0)], order=order)
    for k in range(1, order + 1):
        defect = _ddt(w).truncate(order) + (w @ lam - transformed @ w)
        b_k = defect.coefficient(k)
        lam = lam.with_coefficient(k, -np.diag(np.diag(b_k)))
        m_k = sylvester_offdiag_solve(lam0, -b_k, Partition.finest(m), sep_min=sep_min)
        w = w.with_coefficient(k, m_k)

    m_series = MatrixSeries.constant(m0, order) @ w
    return WkbDiagonalization(m_series, lam, family)


def fundamental_diagonal(lam, t0, t):
    """Closed-form diagonal fundamental factor exp(int_t0^t Lambda).

    Entrywise: exp(c0 (t - t0)) * (t/t0)^c1 * exp(sum_{k>=2} c_k
    (t0^(1-k) - t^(1-k)) / (k-1)).  Equals the identity at t = t0.
    """
    if t0 <= 0 or t <= 0:
        raise InvalidParams("fundamental factor needs positive times")
    phases = np.zeros(lam.dim, dtype=complex)
    for k, coeff in enumerate(lam.coeffs):
        d = np.diag(coeff)
        if k == 0:
            phases += d * (t - t0)
        elif k == 1:
            phases += d * np.log(t / t0)
        else:
            phases += d * (t0 ** (1 - k) - t ** (1 - k)) / (k - 1)
    return np.diag(np.exp(phases))


@dataclass(frozen=True)
class WkbCorrection:
    """Sampled bounded correction Q with its integral certificates.

    ``norm_integral`` and ``trace_integral`` are the trapezoid values of
    int ||G|| and int trace G over the sample grid, so Liouville's theorem
    ties det(q_inf) to exp(trace_integral).
    """

    ts: np.ndarray
    qs: np.ndarray
    norm_integral: float
    trace_integral: complex
    mode: str

    @property
    def q_inf(self):
        return self.qs[-1]

    def bound(self):
        return float(np.exp(self.norm_integral))

    def liouville_defect(self):
        return abs(np.linalg.det(self.q_inf) - np.exp(self.trace_integral))


def _time_grid(t0, t_end, rel_step):
    if t_end < t0:
        raise InvalidParams("end time precedes the base time")
    ts = [t0]
    while ts[-1] < t_end:
        ts.append(min(ts[-1] * (1.0 + rel_step), t_end))
    return np.array(ts)


def peano_baker(rfun, t0, t_end, depth=8, rel_step=0.01, mode="volterra"):
    """Correction factor Q with Q(t0) = I driven by the generator ``rfun``.

    ``volterra`` steps the equivalent integral equation with an explicit
    trapezoid predictor-corrector; ``iterated`` sums the literal iterated
    integrals up to ``depth`` levels on the same grid (both converge to
    the same limit).  Raises BlowUp when the generator norm integral is
    numerically divergent, which happens for non-skew leading parts.
    """
    if depth < 1:
        raise InvalidParams("depth must be >= 1")
    ts = _time_grid(t0, t_end, rel_step)
    gens = [np.asarray(rfun(t), dtype=complex) for t in ts]
    m = gens[0].shape[0]
    norms = np.array([opnorm(g) for g in gens])
    if not np.all(np.isfinite(norms)):
        raise BlowUp("generator is not finite on the integration grid")
    hs = np.diff(ts)
    norm_integral = float(np.sum(0.5 * hs * (norms[:-1] + norms[1:])))
    if norm_integral > 500.0:
        raise BlowUp(
            f"generator norm integral {norm_integral:.3e} is numerically divergent "
            "(is the leading coefficient skew?)"
        )
    traces = np.array([np.trace(g) for g in gens])
    trace_integral = complex(np.sum(0.5 * hs * (traces[:-1] + traces[1:])))

    qs = np.empty((len(ts), m, m), dtype=complex)
    qs[0] = np.eye(m)
    if mode == "volterra":
        for j, h in enumerate(hs):
            slope = gens[j] @ qs[j]
            predictor = qs[j] + h * slope
            qs[j + 1] = qs[j] + 0.5 * h * (slope + gens[j + 1] @ predictor)
    elif mode == "iterated":
        level = np.tile(np.eye(m, dtype=complex), (len(ts), 1, 1))
        total = level.copy()
        for _ in range(depth):
            integrand = np.einsum("tij,tjk->tik", np.stack(gens), level)
            nxt = np.zeros_like(level)
            for j, h in enumerate(hs):
                nxt[j + 1] = nxt[j] + 0.5 * h * (integrand[j] + integrand[j + 1])
            level = nxt
            total = total + level
        qs = total
    else:
        raise InvalidParams(f"unknown mode {mode!r}")
    return WkbCorrection(ts, qs, norm_integral, trace_integral, mode)


@dataclass(frozen=True)
class WkbSolution:
    """All factors of the representation M(t) E(t) Q(t) M(t0)^-1."""

    diagonalization: WkbDiagonalization
    correction: WkbCorrection
    t0: float

    def fundamental(self, t):
        return fundamental_diagonal(self.diagonalization.Lambda, self.t0, t)

    def propagator(self, index=-1):
        """State transition matrix from t0 to the sampled time ``index``."""
        t = self.correction.ts[index]
        mm = self.diagonalization.M.evaluate(1.0 / t)
        m0 = self.diagonalization.M.evaluate(1.0 / self.t0)
        return mm @ self.fundamental(t) @ self.correction.qs[index] @ np.linalg.inv(m0)


def wkb_solution(family, order, t_end, rel_step=0.01, mode="volterra", depth=8, **tols):
    """Diagonalise, then integrate the correction up to ``t_end``."""
    diag = asymptotic_diagonalize_ode(family, order, **tols)

    def generator(t):
        e = np.diag(fundamental_diagonal(diag.Lambda, family.t0, t))
        g = diag.effective_generator(t)
        return g * (e[None, :] / e[:, None])

    correction = peano_baker(
        generator, family.t0, t_end, depth=depth, rel_step=rel_step, mode=mode
    )
    return WkbSolution(diag, correction, family.t0)


def wkb_solve(family, v0, t_end, order, rel_step=0.01, mode="volterra", depth=8, **tols):
    """Propagate ``v0`` from t0 to ``t_end`` through the factorised form.

    Requires the skew leading flag (boundedness of the diagonal factor);
    accuracy improves with the expansion order and with ``t_end`` since
    the neglected defect decays faster than any retained power.
    """
    if not family.skew_leading:
        raise InvalidParams("wkb_solve requires a family flagged skew_leading")
    v0 = np.asarray(v0, dtype=complex).ravel()
    if v0.shape != (family.dim,):
        raise DimensionMismatch("initial vector size does not match the family")
    sol = wkb_solution(family, order, t_end, rel_step=rel_step, mode=mode, depth=depth, **tols)
    return sol.propagator(-1) @ v0


def rk_reference(a_of_t, v0, t0, t_end, tol=1e-9, max_steps=2_000_000):
    """Adaptive classical Runge-Kutta reference integrator.

    Fourth-order steps with Richardson step halving: each step is taken
    once with h and twice with h/2; the extrapolated value is kept when
    the estimated error passes ``tol``, otherwise the step is retried
    with half the size.
    """

    def rk4(t, v, h):
        k1 = a_of_t(t) @ v
        k2 = a_of_t(t + h / 2) @ (v + h / 2 * k1)
        k3 = a_of_t(t + h / 2) @ (v + h / 2 * k2)
        k4 = a_of_t(t + h) @ (v + h * k3)
        return v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    v = np.asarray(v0, dtype=complex).ravel()
    t = float(t0)
    h = (t_end - t0) / 64.0
    steps = 0
    while t < t_end:
        if steps > max_steps:
            raise BlowUp("reference integrator exceeded its step budget")
        h = min(h, t_end - t)
        coarse = rk4(t, v, h)
        half = rk4(t, v, h / 2)
        fine = rk4(t + h / 2, half, h / 2)
        err = np.linalg.norm(fine - coarse) / 15.0
        scale = tol * max(1.0, float(np.linalg.norm(v)))
        if err > scale and h > 1e-12 * max(1.0, t):
            h *= 0.5
            steps += 1
            continue
        v = fine + (fine - coarse) / 15.0
        t += h
        if err < scale / 32.0:
            h *= 2.0
        steps += 1
    return v
