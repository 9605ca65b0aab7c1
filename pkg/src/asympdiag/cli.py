"""Command-line surface and JSON document schemas.

Subcommands: ``expand`` (run a scheme on a family document), ``verify``
(oracle checks of an expansion against dense eigensolves), ``roots``
(hyperbolic-polynomial root expansions as CSV), ``integrate`` (asymptotic
ODE solution diagnostics as CSV) and ``thermo`` (the built-in
thermo-elastic model).  Exit codes: 0 ok, 2 assumption failure, 3 input
error, 4 numeric failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from ._util import default_rho_grid
from .block import block_diagonalize
from .errors import (
    AssumptionFailure,
    AsympdiagError,
    DegenerateLeading,
    InsufficientGrid,
    InvalidParams,
    NotNormalised,
    DegreeViolation,
    DimensionMismatch,
)
from .hyperbolic import HyperbolicPolynomial, root_expansion, unit_directions
from .matrixcore import DEFAULT_SEP_MIN, DEFAULT_TOL_EIG, DEFAULT_TOL_GROUP
from .oracle import convergence_order, match_branches, sample_spectrum
from .series import MatrixSeries
from .standard import diagonalize, spectral_bound
from .thermoelastic import (
    ThermoParams,
    build_family,
    large_xi_expansion,
    rescaled_family,
    small_xi_expansion,
    verify_spectral_signs,
)
from .wkb import OdeFamily, rk_reference, wkb_solution

EXIT_OK = 0
EXIT_ASSUMPTION = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_VERIFY = 5

_INPUT_ERRORS = (
    InvalidParams,
    NotNormalised,
    DegreeViolation,
    InsufficientGrid,
)


class DocumentError(AsympdiagError):
    """A JSON document does not match its schema."""


class VerificationFailure(AsympdiagError):
    """An oracle check failed; the message names the first failing check."""


# ---------------------------------------------------------------------------
# serialisation


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _from_pair(obj, what="value"):
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise DocumentError(f"{what} must be a number or a [re, im] pair, got {obj!r}")


def matrix_to_json(mat):
    return [[_pair(z) for z in row] for row in np.asarray(mat, dtype=complex)]


def json_to_matrix(obj, dim, what="matrix"):
    if not isinstance(obj, list) or len(obj) != dim:
        raise DocumentError(f"{what} must be a {dim}x{dim} array")
    rows = []
    for row in obj:
        if not isinstance(row, list) or len(row) != dim:
            raise DocumentError(f"{what} must be a {dim}x{dim} array")
        rows.append([_from_pair(z, what) for z in row])
    return np.array(rows, dtype=complex)


def family_to_document(family, variable="rho", meta=None):
    doc = {
        "variable": variable,
        "dim": family.dim,
        "coefficients": [
            {"power": k, "matrix": matrix_to_json(family.coefficient(k))}
            for k in range(family.order + 1)
        ],
    }
    if meta:
        doc["meta"] = meta
    return doc


def document_to_family(doc):
    if not isinstance(doc, dict):
        raise DocumentError("family document must be a JSON object")
    try:
        dim = int(doc["dim"])
        entries = doc["coefficients"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"missing or malformed field: {exc}") from exc
    if dim < 1 or not isinstance(entries, list) or not entries:
        raise DocumentError("need a positive dim and a non-empty coefficient list")
    powers = {}
    for entry in entries:
        try:
            power = int(entry["power"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"coefficient entry without a valid power: {exc}") from exc
        if power < 0:
            raise DocumentError(f"negative power {power}")
        if power in powers:
            raise DocumentError(f"duplicate power {power}")
        powers[power] = json_to_matrix(entry.get("matrix"), dim, f"matrix at power {power}")
    if 0 not in powers:
        raise DocumentError("power 0 must be present")
    order = max(powers)
    coeffs = [powers.get(k, np.zeros((dim, dim), dtype=complex)) for k in range(order + 1)]
    family = MatrixSeries(tuple(coeffs))
    return family, str(doc.get("variable", "rho")), doc.get("meta")


def polynomial_to_document(poly):
    return {
        "degree": poly.m,
        "dim": poly.n,
        "terms": [
            {"tau": a, "xi": list(beta), "coeff": _pair(coeff)}
            for (a, beta), coeff in sorted(poly.terms.items())
        ],
    }


def document_to_polynomial(doc):
    if not isinstance(doc, dict):
        raise DocumentError("polynomial document must be a JSON object")
    try:
        m = int(doc["degree"])
        n = int(doc["dim"])
        raw_terms = doc["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"missing or malformed field: {exc}") from exc
    terms = {}
    for entry in raw_terms:
        try:
            a = int(entry["tau"])
            beta = tuple(int(b) for b in entry["xi"])
            coeff = _from_pair(entry["coeff"], "coeff")
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed polynomial term: {exc}") from exc
        terms[(a, beta)] = terms.get((a, beta), 0) + coeff
    return HyperbolicPolynomial(m, n, terms)


def _load_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read JSON from {path}: {exc}") from exc


def _emit(text, output):
    if output and output != "-":
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _dump_report(report, output):
    _emit(json.dumps(report, indent=2) + "\n", output)


# ---------------------------------------------------------------------------
# shared helpers


def _parse_grid_number(token):
    token = token.strip()
    for sep in ("^", "**"):
        if sep in token:
            base, exponent = token.split(sep, 1)
            return float(base) ** float(exponent)
    return float(token)


def parse_grid(spec):
    """Grid spec LO:HI:COUNT with numbers like 0.25 or 2^-10; log-spaced."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise InsufficientGrid(f"grid spec must be LO:HI:COUNT, got {spec!r}")
    try:
        lo = _parse_grid_number(parts[0])
        hi = _parse_grid_number(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise InsufficientGrid(f"malformed grid spec {spec!r}: {exc}") from exc
    if count < 2 or lo <= 0 or hi <= 0:
        raise InsufficientGrid("grid needs positive endpoints and at least two points")
    return np.geomspace(lo, hi, count)


def _tolerances(args):
    return {
        "tol_eig": args.tol_eig,
        "tol_group": args.tol_group,
        "sep_min": args.sep_min,
    }


def _add_tolerance_flags(parser):
    parser.add_argument("--tol-eig", type=float, default=DEFAULT_TOL_EIG)
    parser.add_argument("--tol-group", type=float, default=DEFAULT_TOL_GROUP)
    parser.add_argument("--sep-min", type=float, default=DEFAULT_SEP_MIN)


def _branches_json(lam):
    return [
        [_pair(c) for c in np.column_stack([np.diag(co) for co in lam.coeffs])[j]]
        for j in range(lam.dim)
    ]


def _filtration_json(filtration):
    return {
        "levels": [list(level.sizes) for level in filtration.levels],
        "tables": [[_pair(v) for v in table] for table in filtration.tables],
    }


def _result_report(result, mode, order, tols, variable):
    report = {
        "command": "expand",
        "variable": variable,
        "mode": mode,
        "requested_order": order,
        "achieved_order": result.order,
        "tolerances": tols,
        "branches": _branches_json(result.Lambda),
        "filtration": _filtration_json(result.filtration),
        "nondegeneracy_order": result.nondeg_order,
        "empirical_radius": result.empirical_radius,
        "residuals": [[rho, norm] for rho, norm in result.residual_samples],
        "failure": None,
    }
    if result.failure is not None:
        report["failure"] = {
            "k": result.failure.k,
            "indices": list(result.failure.indices),
            "detail": result.failure.detail,
        }
    return report


# ---------------------------------------------------------------------------
# subcommands


def _run_scheme(family, mode, order, tols):
    if mode == "standard":
        return diagonalize(family, order, **tols)
    result, _ = block_diagonalize(
        family, order, perfect_block=(mode == "remark23"), **tols
    )
    return result


def cmd_expand(args):
    family, variable, _ = document_to_family(_load_json(args.file))
    tols = _tolerances(args)
    try:
        result = _run_scheme(family, args.mode, args.order, tols)
    except (AssumptionFailure, DegenerateLeading) as exc:
        k = getattr(exc, "k", 0)
        report = {
            "command": "expand",
            "variable": variable,
            "mode": args.mode,
            "requested_order": args.order,
            "achieved_order": None,
            "tolerances": tols,
            "branches": None,
            "failure": {"k": k, "detail": str(exc)},
        }
        _dump_report(report, args.output)
        return EXIT_ASSUMPTION
    report = _result_report(result, args.mode, args.order, tols, variable)
    _dump_report(report, args.output)
    return EXIT_ASSUMPTION if result.failure is not None else EXIT_OK


def _expansion_from_report(path, dim):
    report = _load_json(path)
    branches = report.get("branches")
    if not isinstance(branches, list) or len(branches) != dim:
        raise DocumentError("expansion report lacks a usable 'branches' field")
    rows = [[_from_pair(c, "branch coefficient") for c in row] for row in branches]
    n_coeff = min(len(r) for r in rows)
    coeffs = [np.diag([rows[j][k] for j in range(dim)]) for k in range(n_coeff)]
    return MatrixSeries(tuple(coeffs))


def cmd_verify(args):
    family, variable, _ = document_to_family(_load_json(args.file))
    tols = _tolerances(args)
    grid = parse_grid(args.grid) if args.grid else default_rho_grid()
    result = None
    if args.expansion:
        lam = _expansion_from_report(args.expansion, family.dim)
    else:
        result = _run_scheme(family, args.mode, args.order, tols)
        if result.failure is not None:
            raise AssumptionFailure(result.failure.k, detail=result.failure.detail)
        lam = result.Lambda

    spectra = sample_spectrum(family, grid, tol_eig=args.tol_eig)
    match = match_branches(spectra, lam, grid)
    slopes = convergence_order(match)
    target = args.order + 0.8
    slope_rows = []
    failing = None
    for s in slopes:
        ok = bool(s.exact or (s.slope is not None and s.slope >= target))
        slope_rows.append(
            {
                "branch": s.branch,
                "slope": s.slope,
                "exact": s.exact,
                "points_used": s.points_used,
                "pass": ok,
            }
        )
        if not ok and failing is None:
            failing = f"branch {s.branch} slope {s.slope:.3f} below {target:.3f}"

    bound_rows = None
    if result is not None:
        bound_rows = []
        for rho in grid:
            bound, verified = spectral_bound(family, result, rho, tol_eig=args.tol_eig)
            bound_rows.append({"rho": float(rho), "bound": bound, "pass": verified})
            if not verified and failing is None:
                failing = f"spectral bound violated at rho = {rho}"

    report = {
        "command": "verify",
        "variable": variable,
        "order": args.order,
        "grid": [float(r) for r in grid],
        "matched": [None if p is None else [int(i) for i in p] for p in match.matched],
        "residuals": [
            [None if not np.isfinite(v) else v for v in row] for row in match.residuals
        ],
        "slopes": slope_rows,
        "spectral_bound": bound_rows,
        "pass": failing is None,
        "first_failure": failing,
    }
    _dump_report(report, args.output)
    return EXIT_OK if failing is None else EXIT_VERIFY


def _fmt(x):
    return repr(float(x))


def _write_csv(rows, header, output):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _emit(buffer.getvalue(), output)


def cmd_roots(args):
    poly = document_to_polynomial(_load_json(args.file))
    directions = unit_directions(poly.n, args.directions)
    header = [f"eta_{i}" for i in range(poly.n)] + ["branch", "phi"]
    for k in range(args.order + 1):
        header += [f"tau_{k}_re", f"tau_{k}_im"]
    rows = []
    for eta in directions:
        expansion = root_expansion(poly, eta, args.order, tol_group=args.tol_group)
        for j in range(poly.m):
            row = [_fmt(c) for c in eta] + [j, _fmt(expansion.phi[j])]
            for k in range(args.order + 1):
                row += [_fmt(expansion.coeffs[j, k].real), _fmt(expansion.coeffs[j, k].imag)]
            rows.append(row)
    _write_csv(rows, header, args.output)
    return EXIT_OK


def _parse_vector(text, dim):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"--v0 must be JSON: {exc}") from exc
    if not isinstance(data, list) or len(data) != dim:
        raise DocumentError(f"--v0 must be a list of {dim} entries")
    return np.array([_from_pair(x, "v0 entry") for x in data])


def cmd_integrate(args):
    series, _, _ = document_to_family(_load_json(args.file))
    a0 = series.coefficient(0)
    skew = bool(np.linalg.norm(a0 + a0.conj().T) <= 1e-12)
    family = OdeFamily(series, t0=args.t0, skew_leading=skew)
    v0 = _parse_vector(args.v0, family.dim)
    solution = wkb_solution(family, args.order, args.T, rel_step=args.rel_step)
    correction = solution.correction
    q_inf = correction.q_inf

    sample_idx = np.unique(
        np.clip(
            np.searchsorted(correction.ts, np.geomspace(args.t0, args.T, args.samples)),
            0,
            len(correction.ts) - 1,
        )
    )
    rows = []
    v_ref = v0.copy()
    t_prev = args.t0
    for idx in sample_idx:
        t = float(correction.ts[idx])
        if t > t_prev:
            v_ref = rk_reference(family.evaluate, v_ref, t_prev, t, tol=args.rk_tol)
            t_prev = t
        v_wkb = solution.propagator(int(idx)) @ v0
        r_norm = solution.diagonalization.remainder_norm(t)
        q_gap = float(np.linalg.norm(correction.qs[idx] - q_inf, 2))
        err = float(np.linalg.norm(v_wkb - v_ref) / max(np.linalg.norm(v_ref), 1e-300))
        rows.append([_fmt(t), _fmt(r_norm), _fmt(q_gap), _fmt(err)])
    _write_csv(rows, ["t", "remainder_norm", "q_gap", "error_vs_reference"], args.output)
    return EXIT_OK


def cmd_thermo(args):
    params = ThermoParams(args.tau, args.kappa, args.gamma1, args.gamma2, args.m)
    tols = _tolerances(args)
    if args.emit_doc:
        if args.regime == "large":
            family = rescaled_family(params, args.order)
            variable = "1/xi"
        else:
            family = build_family(params)
            variable = "xi"
        _dump_report(family_to_document(family, variable=variable), args.output)
        return EXIT_OK
    if args.regime == "small":
        expansion = small_xi_expansion(params, args.order, **tols)
        report = {
            "command": "thermo",
            "regime": "small",
            "order": args.order,
            "branches": [[_pair(c) for c in row] for row in expansion.branches],
            "lambda0": expansion.lambda0,
            "lambda_pm": list(expansion.lambda_pm),
            "nondegeneracy_order": expansion.nondeg_order,
        }
        _dump_report(report, args.output)
        return EXIT_OK
    if args.regime == "large":
        expansion = large_xi_expansion(params, args.order, **tols)
        report = {
            "command": "thermo",
            "regime": "large",
            "order": args.order,
            "branches": [[_pair(c) for c in row] for row in expansion.branches],
            "powers": [2 - k for k in range(expansion.branches.shape[1])],
            "parabolic_constant": _pair(expansion.parabolic_constant),
            "hyperbolic_constants": [_pair(c) for c in expansion.hyperbolic_constants],
            "nondegeneracy_order": expansion.nondeg_order,
        }
        _dump_report(report, args.output)
        return EXIT_OK
    grid = parse_grid(args.xi_grid)
    report = verify_spectral_signs(params, grid, tol_eig=args.tol_eig)
    rows = []
    for sample in report.samples:
        for value in sample.values:
            rows.append([_fmt(sample.xi), _fmt(value.real), _fmt(value.imag)])
    _write_csv(rows, ["xi", "re_nu", "im_nu"], args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="asympdiag",
        description="Asymptotic eigenvalue expansions of matrix families.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_expand = sub.add_parser("expand", help="diagonalise a family document")
    p_expand.add_argument("file", help="family JSON (or - for stdin)")
    p_expand.add_argument("--order", type=int, default=2)
    p_expand.add_argument(
        "--mode", choices=("standard", "block", "remark23"), default="block"
    )
    p_expand.add_argument("--output", default=None)
    _add_tolerance_flags(p_expand)
    p_expand.set_defaults(handler=cmd_expand)

    p_verify = sub.add_parser("verify", help="oracle-check an expansion")
    p_verify.add_argument("file", help="family JSON (or - for stdin)")
    p_verify.add_argument("--order", type=int, default=2)
    p_verify.add_argument(
        "--mode", choices=("standard", "block", "remark23"), default="block"
    )
    p_verify.add_argument("--grid", default=None, help="LO:HI:COUNT, e.g. 2^-10:2^-2:9")
    p_verify.add_argument(
        "--expansion", default=None, help="check this expand report instead of recomputing"
    )
    p_verify.add_argument("--output", default=None)
    _add_tolerance_flags(p_verify)
    p_verify.set_defaults(handler=cmd_verify)

    p_roots = sub.add_parser("roots", help="hyperbolic characteristic root expansions")
    p_roots.add_argument("file", help="polynomial JSON (or - for stdin)")
    p_roots.add_argument("--directions", type=int, default=8)
    p_roots.add_argument("--order", type=int, default=2)
    p_roots.add_argument("--output", default=None)
    _add_tolerance_flags(p_roots)
    p_roots.set_defaults(handler=cmd_roots)

    p_int = sub.add_parser("integrate", help="asymptotic ODE integration diagnostics")
    p_int.add_argument("file", help="coefficient family in 1/t (or - for stdin)")
    p_int.add_argument("--t0", type=float, default=10.0)
    p_int.add_argument("--T", type=float, default=1000.0)
    p_int.add_argument("--order", type=int, default=4)
    p_int.add_argument("--v0", required=True, help="JSON vector, entries x or [re, im]")
    p_int.add_argument("--samples", type=int, default=25)
    p_int.add_argument("--rel-step", type=float, default=0.01)
    p_int.add_argument("--rk-tol", type=float, default=1e-9)
    p_int.add_argument("--output", default=None)
    _add_tolerance_flags(p_int)
    p_int.set_defaults(handler=cmd_integrate)

    p_thermo = sub.add_parser("thermo", help="damped thermo-elastic model")
    p_thermo.add_argument("--tau", type=float, default=1.0)
    p_thermo.add_argument("--kappa", type=float, default=1.0)
    p_thermo.add_argument("--gamma1", type=float, default=1.0)
    p_thermo.add_argument("--gamma2", type=float, default=1.0)
    p_thermo.add_argument("--m", type=float, default=1.0)
    p_thermo.add_argument(
        "--regime", choices=("small", "large", "signs"), default="small"
    )
    p_thermo.add_argument("--order", type=int, default=3)
    p_thermo.add_argument("--xi-grid", default="0.01:100:60")
    p_thermo.add_argument("--emit-doc", action="store_true")
    p_thermo.add_argument("--output", default=None)
    _add_tolerance_flags(p_thermo)
    p_thermo.set_defaults(handler=cmd_thermo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DocumentError as exc:
        print(f"asympdiag: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _INPUT_ERRORS as exc:
        print(f"asympdiag: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AssumptionFailure, DegenerateLeading) as exc:
        print(f"asympdiag: assumption failure: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except VerificationFailure as exc:
        print(f"asympdiag: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except AsympdiagError as exc:
        print(f"asympdiag: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
