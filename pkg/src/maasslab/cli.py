"""Command-line entry point wiring all modules.

Subcommands: solve-dde, first-zero, sieve-verify, density-report, bound,
identity-check, fetch.  JSON is the default output; CSV serves the grid
outputs (DDE tables and asymptotic reports).  Every run echoes its
parsed configuration so output is reproducible from the header alone.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 data gap,
4 resource limit, 5 network unavailable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds, dde, density, ingest, satake, sieve
from .errors import (DataGapError, InvalidInputError, MaasslabError,
                     ResourceLimitError, RemoteUnavailableError,
                     UnsupportedRangeError)

DEFAULT_SEED = 1729   # fixed, documented; reproducibility over entropy

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DATA_GAP = 3
EXIT_RESOURCE = 4
EXIT_NETWORK = 5


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit_payload(payload: dict, args) -> None:
    """Scalar results: JSON by default, aligned key/value in table mode."""
    fmt = getattr(args, "format", None) or "json"
    if fmt == "table":
        lines = ["# config: " + json.dumps(_config_dict(args), sort_keys=True)]
        width = max(len(k) for k in payload)
        for k, v in payload.items():
            lines.append(f"{k:<{width}}  {v}")
        _write_out("\n".join(lines) + "\n", args)
        return
    doc = {"config": _config_dict(args), **payload}
    text = json.dumps(doc, indent=2, sort_keys=True)
    _write_out(text + "\n", args)


def _emit_grid(header: list[str], rows: list[tuple], args) -> None:
    """Grid results: CSV by default, JSON rows or aligned table on request."""
    fmt = getattr(args, "format", None) or "csv"
    if fmt == "json":
        _emit_payload({"columns": header,
                       "rows": [list(r) for r in rows]}, args)
        return
    if fmt == "table":
        cells = [[_csv_cell(v) for v in row] for row in rows]
        widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
                  for i, h in enumerate(header)]
        lines = ["# config: " + json.dumps(_config_dict(args), sort_keys=True)]
        lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for c in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)))
        _write_out("\n".join(lines) + "\n", args)
        return
    lines = ["# config: " + json.dumps(_config_dict(args), sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    _write_out("\n".join(lines) + "\n", args)


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_out(text: str, args) -> None:
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve_dde(args) -> int:
    spec = dde.DdeSpec(args.chi0, args.chi1)
    sol = dde.solve(spec, args.u_max, args.step)
    rows = []
    for i, (u, sig) in enumerate(sol.nodes()):
        if i % args.stride == 0 and u <= args.u_max + 1e-12:
            rows.append((u, sig))
    _emit_grid(["u", "sigma"], rows, args)
    return EXIT_OK


def _cmd_first_zero(args) -> int:
    spec = dde.DdeSpec(args.chi0, args.chi1)
    zero = dde.first_zero(spec, tol=args.tol, u_cap=args.u_cap,
                          initial_step=args.initial_step)
    _emit_payload({"first_zero": zero}, args)
    return EXIT_OK


def _cmd_sieve_verify(args) -> int:
    table = sieve.build_table(args.limit, allow_large=args.allow_large)
    if args.report == "asymptotic":
        u_grid = [float(u) for u in args.u_grid.split(",")]
        rows = sieve.asymptotic_report(args.y, u_grid, args.q,
                                       (args.chi0, args.chi1), table)
        _emit_grid(["y", "u", "exact", "predicted", "rel_error"],
                   [(r["y"], r["u"], r["exact"], r["predicted"], r["rel_error"])
                    for r in rows], args)
        return EXIT_OK

    rng = np.random.default_rng(args.seed)
    checks = []

    spec10 = sieve.MultFuncSpec.threshold(10, 2, -2)
    checks.append(("h_sum_y10_q1",
                   sieve.h_sum(spec10, 10, 1, table) == 17.0))
    checks.append(("h_sum_y10_q6",
                   sieve.h_sum(spec10, 10, 6, table) == 5.0))

    ok_routes = True
    for _ in range(args.samples):
        y = int(rng.integers(5, 200))
        chi0 = float(rng.integers(1, 4))
        chi1 = -float(rng.integers(1, 4))
        x = float(rng.integers(10, min(table.limit, 5000)))
        spec = sieve.MultFuncSpec.threshold(max(y, 2), chi0, chi1)
        try:
            sieve.log_weighted_sum(spec, x, 1, table)
        except MaasslabError:
            ok_routes = False
            break
    checks.append(("log_weighted_dual_route", ok_routes))

    a_stream, _, _ = satake.sample_coeff_triples(200, "sato-tate", args.seed)
    b_stream, _, _ = satake.sample_coeff_triples(200, "sato-tate", args.seed + 1)
    b_table = {int(p): float(a + b) for p, a, b in
               zip(sieve.primes_upto(1000).tolist(), a_stream, b_stream)}
    b = sieve.MultFuncSpec.from_table(b_table)
    h = sieve.MultFuncSpec.threshold(50, 2, -2)
    g = sieve.MultFuncSpec.moebius_quotient(b, h)
    ok_round = all(
        sieve.dirichlet_convolve(h, g, n, table) == b.value_exact(n, table)
        for n in range(1, 200) if table.is_squarefree(n))
    checks.append(("moebius_roundtrip", ok_round))

    ok_cancel = True
    for _ in range(100):
        a1 = float(rng.normal()) * 3
        a2 = float(rng.normal()) * 3
        coeffs = sieve.local_factor_coeffs(a1, a2, 101)
        if coeffs[1] != 0:
            ok_cancel = False
            break
    checks.append(("local_factor_x1_cancellation", ok_cancel))

    payload = {"checks": [{"name": n, "passed": bool(okp)} for n, okp in checks],
               "all_passed": all(okp for _, okp in checks)}
    _emit_payload(payload, args)
    return EXIT_OK if payload["all_passed"] else EXIT_FAIL


def _cmd_density_report(args) -> int:
    if args.scan_labels:
        labels = args.scan_labels.split(",")
        records = [ingest.fetch(lab, coverage=args.coverage,
                                cache_dir=args.cache_dir) for lab in labels]
        family = density.FormFamily([r.to_form_meta() for r in records])
        report = density.exceptional_scan(family, args.x, threads=args.threads)
        _emit_payload(json.loads(report.to_json()), args)
        return EXIT_OK
    bound = density.density_lower_bound(args.m, args.formula)
    payload = {
        "m": args.m,
        "formula": args.formula,
        "density_lower_bound": f"{bound.numerator}/{bound.denominator}",
        "value": float(bound),
    }
    if args.formula == "remark":
        payload["status"] = density.REMARK_VARIANT_NOTE
    _emit_payload(payload, args)
    return EXIT_OK


def _cmd_bound(args) -> int:
    levels = [int(x) for x in args.levels.split(",")]
    ts = [float(x) for x in args.spectral.split(",")]
    if len(levels) != len(ts):
        raise InvalidInputError(
            f"{len(levels)} levels but {len(ts)} spectral parameters")
    metas = [bounds.FormMeta(level=n, spectral_parameter=t)
             for n, t in zip(levels, ts)]
    result = bounds.least_prime_bound(metas)
    _emit_payload(result.to_json_dict(), args)
    return EXIT_OK


def _cmd_identity_check(args) -> int:
    per_mode = args.samples // 2
    worst_sq = worst_cube = worst_exp = 0.0
    for mode in ("sato-tate", "non-tempered"):
        a2, a3sq, a4 = satake.sample_coeff_triples(per_mode, mode, args.seed,
                                                   nu_max=args.nu_max)
        worst_sq = max(worst_sq, float(np.max(np.abs(a2 * a2 - (a4 + a2 + 1)))))
        worst_cube = max(worst_cube,
                         float(np.max(np.abs(a2 * a4 - (a3sq - 1)))))
        b2, b3sq, b4 = satake.sample_coeff_triples(per_mode, "sato-tate",
                                                   args.seed + 1)
        u_sq = (1 + 3 * a2 + 3 * b2 + 5 * a4) ** 2
        u_exp = (-11 + 15 * a2 + 15 * b2 + 19 * a4 + 9 * b4
                 + 18 * a2 * b2 + 30 * a4 * b2 + 30 * a3sq + 25 * a4 ** 2)
        worst_exp = max(worst_exp, float(np.max(np.abs(u_sq - u_exp))))
    payload = {
        "samples": args.samples,
        "max_square_identity_residual": worst_sq,
        "max_cube_identity_residual": worst_cube,
        "max_expansion_residual": worst_exp,
        "thresholds": {"identities": 1e-10, "expansion": 1e-9},
    }
    passed = (worst_sq < 1e-10 and worst_cube < 1e-10 and worst_exp < 1e-9)
    payload["passed"] = passed
    _emit_payload(payload, args)
    return EXIT_OK if passed else EXIT_FAIL


def _cmd_fetch(args) -> int:
    record = ingest.fetch(args.label, coverage=args.coverage,
                          cache_dir=args.cache_dir, endpoint=args.endpoint)
    findings = ingest.validate(record)
    errors = [f for f in findings if f.severity == "error"]
    payload = {"record": record.to_json_dict(),
               "findings": [{"severity": f.severity, "kind": f.kind,
                             "p": f.p, "message": f.message}
                            for f in findings]}
    _emit_payload(payload, args)
    return EXIT_OK if not errors else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maasslab",
        description="Satake coefficient algebra, sieve delay differential "
                    "equations and prime-density scans")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv", "table"),
                       default=None,
                       help="output format (scalars default to json, grids to csv)")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="random seed (dimensionless integer)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker threads for partitionable scans (count)")

    p = sub.add_parser("solve-dde", help="integrate a delay differential equation")
    p.add_argument("--chi0", type=float, required=True,
                   help="weight on primes up to the cutoff (dimensionless)")
    p.add_argument("--chi1", type=float, required=True,
                   help="weight beyond the cutoff (dimensionless, negative)")
    p.add_argument("--u-max", type=float, default=3.0,
                   help="right end of the integration range (u-units)")
    p.add_argument("--step", type=float, default=1e-3,
                   help="grid step (u-units, in [1e-7, 1e-2])")
    p.add_argument("--stride", type=int, default=1,
                   help="emit every stride-th grid node (count)")
    common(p)
    p.set_defaults(func=_cmd_solve_dde)

    p = sub.add_parser("first-zero", help="first zero of sigma(u)")
    p.add_argument("--chi0", type=float, required=True,
                   help="weight on primes up to the cutoff (dimensionless)")
    p.add_argument("--chi1", type=float, required=True,
                   help="weight beyond the cutoff (dimensionless, negative)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="zero-location tolerance (u-units, >= 1e-9)")
    p.add_argument("--u-cap", type=float, default=10.0,
                   help="give up if no sign change below this u (u-units)")
    p.add_argument("--initial-step", type=float, default=1e-3,
                   help="first integration step before refinement (u-units)")
    common(p)
    p.set_defaults(func=_cmd_first_zero)

    p = sub.add_parser("sieve-verify", help="run sieve cross-checks or the "
                                            "asymptotic report")
    p.add_argument("--limit", type=int, default=10 ** 5,
                   help="factorization table limit (integer)")
    p.add_argument("--allow-large", action="store_true",
                   help="permit table limits above 10^7 (up to 2*10^8)")
    p.add_argument("--report", choices=("checks", "asymptotic"),
                   default="checks", help="which report to produce")
    p.add_argument("--samples", type=int, default=100,
                   help="random spec pairs for the dual-route check (count)")
    p.add_argument("--y", type=int, default=1000,
                   help="threshold cutoff for the asymptotic report (integer)")
    p.add_argument("--u-grid", default="0.5,1.0,1.5",
                   help="comma-separated u values (u-units)")
    p.add_argument("--q", type=int, default=1,
                   help="coprimality modulus (integer)")
    p.add_argument("--chi0", type=float, default=2.0,
                   help="weight on primes up to y (dimensionless)")
    p.add_argument("--chi1", type=float, default=-2.0,
                   help="weight beyond y (dimensionless, negative)")
    common(p)
    p.set_defaults(func=_cmd_sieve_verify)

    p = sub.add_parser("density-report", help="density lower bounds and scans")
    p.add_argument("--m", type=int, default=2,
                   help="number of forms in the family (count)")
    p.add_argument("--formula", choices=("paper", "remark"), default="paper",
                   help="which lower-bound formula to evaluate")
    p.add_argument("--scan-labels",
                   help="comma-separated record labels; triggers a prime scan")
    p.add_argument("--x", type=int, default=10 ** 4,
                   help="scan limit X: primes up to X (integer)")
    p.add_argument("--coverage", type=int, default=ingest.DEFAULT_COVERAGE,
                   help="coefficient coverage when fetching records (integer)")
    p.add_argument("--cache-dir", help="record cache directory (path)")
    common(p)
    p.set_defaults(func=_cmd_density_report)

    p = sub.add_parser("bound", help="least-prime bound pair for 2 or 3 forms")
    p.add_argument("--levels", required=True,
                   help="comma-separated levels N_i (integers)")
    p.add_argument("--spectral", required=True,
                   help="comma-separated spectral parameters t_i (real)")
    common(p)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("identity-check", help="bulk Hecke-identity sweep")
    p.add_argument("--samples", type=int, default=10 ** 5,
                   help="number of sampled local data (count)")
    p.add_argument("--nu-max", type=float, default=satake.KIM_SARNAK_NU,
                   help="largest non-tempered deviation (in (0, 7/64])")
    common(p)
    p.set_defaults(func=_cmd_identity_check)

    p = sub.add_parser("fetch", help="fetch a coefficient record")
    p.add_argument("--label", required=True, help="record label (string)")
    p.add_argument("--coverage", type=int, default=ingest.DEFAULT_COVERAGE,
                   help="largest prime to cover (integer)")
    p.add_argument("--cache-dir", help="record cache directory (path)")
    p.add_argument("--endpoint", help="remote endpoint URL (overrides env)")
    common(p)
    p.set_defaults(func=_cmd_fetch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:     # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InvalidInputError, UnsupportedRangeError) as exc:
        print(f"error: invalid-input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataGapError as exc:
        print(f"error: data-gap: {exc}", file=sys.stderr)
        return EXIT_DATA_GAP
    except ResourceLimitError as exc:
        print(f"error: resource-limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except RemoteUnavailableError as exc:
        print(f"error: network-unavailable: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except MaasslabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
