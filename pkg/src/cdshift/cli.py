"""Command-line front end.

Exit codes: 0 when the analysis ran (whatever the verdicts), 2 for input or
IO errors, 3 when a mathematical precondition fails (for example ``T - z0``
not surjective).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .basis import (
    BiorthogonalSystem,
    NonMinimalFamilyError,
    basis_diagnostics,
    biorthogonal_dual,
    build_named_example,
    verify_biorthogonal,
    verify_shift_relation,
)
from .criteria import (
    CriterionReport,
    _jsonable,
    check_markushevich_shift,
    check_onb_plain_shift,
    check_onb_weighted_shift,
    demo_no_mbasis_shift,
)
from .inverse import NotSurjectiveError, canonical_right_inverse
from .operators import (
    DEFAULT_TOL,
    OperatorSpecError,
    WindowError,
    adjoint,
    build_operator,
    kernel_basis,
    parse_complex,
)
from .sections import (
    NotInKernelError,
    canonical_section,
    orthogonality_gap,
    pseudocanonical_check,
    section_diagnostics,
)

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION = 0, 2, 3
CRITERIA = (
    "kernel_powers",
    "chain",
    "b1_disk",
    "onb_weighted_shift",
    "onb_plain_shift",
    "no_mbasis_shift",
)


class InputError(Exception):
    pass


class PreconditionError(Exception):
    pass


def parse_z(text: str) -> complex:
    """Parse ``a+bi`` (no spaces)."""
    if " " in text:
        raise InputError(f"complex literal must not contain spaces: {text!r}")
    try:
        return parse_complex(text)
    except OperatorSpecError as exc:
        raise InputError(str(exc)) from exc


def load_operator(path: str, truncation: int | None):
    try:
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"spec {path} is not valid JSON: {exc}") from exc
    try:
        return spec, build_operator(spec, truncation)
    except OperatorSpecError as exc:
        raise InputError(f"invalid operator spec: {exc}") from exc


def _initial_vector(T, z0) -> np.ndarray:
    kb = kernel_basis(T, z0)
    if kb.dim == 0:
        raise PreconditionError(f"ker(T - z0) is trivial at z0={z0}")
    u = kb.columns[:, 0]
    # fix the phase so reports do not depend on the SVD's choice
    j = int(np.argmax(np.abs(u) > 0.5 * np.abs(u).max()))
    u = u * (abs(u[j]) / u[j])
    return u / np.linalg.norm(u), kb.dim


def _section(T, z0, K):
    try:
        inv = canonical_right_inverse(T, z0)
    except NotSurjectiveError as exc:
        raise PreconditionError(str(exc)) from exc
    u, n = _initial_vector(T, z0)
    try:
        s = canonical_section(T, z0, u, K, inverse=inv)
    except (WindowError, NotInKernelError) as exc:
        raise PreconditionError(str(exc)) from exc
    return inv, s, n


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def series_csv(coefficients: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "component", "re", "im"])
    for k, fk in enumerate(coefficients):
        for j, x in enumerate(fk):
            w.writerow([k, j, repr(float(x.real)), repr(float(x.imag))])
    return buf.getvalue()


def _guarded(fn, *args, **kwargs) -> CriterionReport | dict[str, CriterionReport]:
    try:
        return fn(*args, **kwargs)
    except WindowError as exc:
        return CriterionReport(fn.__name__, "indeterminate", details={"reason": str(exc)})
    except NotSurjectiveError as exc:
        return CriterionReport(fn.__name__, "not_applicable", details={"reason": str(exc)})


def _no_mbasis(T, z0, f, n) -> CriterionReport:
    if n < 2:
        return demo_no_mbasis_shift(T, z0, None)
    try:
        chain = BiorthogonalSystem.from_pair(f, biorthogonal_dual(f))
        return demo_no_mbasis_shift(T, z0, chain)
    except (NonMinimalFamilyError, ValueError) as exc:
        return CriterionReport("no_mbasis_shift", "indeterminate", complex(z0), details={"reason": str(exc)})


def run_analysis(
    T, z0: complex, K: int, criteria: list[str], epsilon: float | None = None
) -> dict[str, Any]:
    inv, s, n = _section(T, z0, K)
    diag = section_diagnostics(T, s)
    pc = pseudocanonical_check(s)
    f = s.coefficients
    W = s.series.exact_window.rows_valid
    bd = basis_diagnostics(f, window=min(W, 16))
    reports: list[CriterionReport] = []
    kcrit = min(K, 20)
    if {"kernel_powers", "chain", "b1_disk"} & set(criteria):
        mk = _guarded(check_markushevich_shift, T, z0, kcrit, epsilon)
        if isinstance(mk, dict):
            reports.extend(mk[c] for c in ("kernel_powers", "chain", "b1_disk") if c in criteria)
        else:
            reports.append(mk)
    if "onb_weighted_shift" in criteria:
        reports.append(_guarded(check_onb_weighted_shift, T, z0, kcrit))
    if "onb_plain_shift" in criteria:
        reports.append(_guarded(check_onb_plain_shift, T, z0))
    if "no_mbasis_shift" in criteria:
        reports.append(_no_mbasis(T, z0, f, n))

    checks = {
        "right_inverse": inv.right_identity_residual <= DEFAULT_TOL,
        "range_orthogonal_to_kernel": inv.range_orthogonality_residual <= DEFAULT_TOL,
        "recurrence": diag.relative_recurrence_residual <= DEFAULT_TOL,
        "eigen_relation": diag.eigen_ok,
        "pseudocanonical": pc.passed,
    }
    for r in reports:
        checks[r.name] = r.verdict
    return {
        "kernel_dim": n,
        "canonical_inverse": {
            "right_identity_residual": inv.right_identity_residual,
            "range_orthogonality_residual": inv.range_orthogonality_residual,
            "window": inv.window,
        },
        "sections": [
            {
                "kind": s.kind,
                "order": s.order,
                "exact_window": W,
                "radius": diag.radius,
                "recurrence_residual": diag.recurrence_residual,
                "max_eigen_residual": float(diag.eigen_residuals.max()),
                "max_eigen_bound": float(diag.residual_bounds.max()),
                "pseudocanonical_residual": pc.residual,
            }
        ],
        "basis_diagnostics": {
            "f0_distance_to_tail_span": orthogonality_gap(s),
            "min_minimality_margin": float(bd.minimality_margins.min()),
            "completeness_defects": bd.completeness_defects,
            "window": bd.window,
        },
        "criteria": [r.to_dict() for r in reports],
        "checks": checks,
    }


def cmd_analyze(args) -> int:
    spec, T = load_operator(args.spec, args.truncation)
    z0 = parse_z(args.z0)
    if args.criteria == "all":
        criteria = list(CRITERIA)
    else:
        criteria = [c.strip() for c in args.criteria.split(",") if c.strip()]
        unknown = sorted(set(criteria) - set(CRITERIA))
        if unknown:
            raise InputError(f"unknown criteria: {', '.join(unknown)}")
    t0 = time.perf_counter()
    body = run_analysis(T, z0, args.order, criteria, args.epsilon)
    report = {
        "tool_version": __version__,
        "command": "analyze",
        "operator_spec": spec,
        "truncation": T.N,
        "z0": z0,
        "order": args.order,
        **body,
        "wall_time": time.perf_counter() - t0,
    }
    _write_text(args.out, json.dumps(_jsonable(report), indent=2) + "\n")
    if args.emit_csv:
        _, s, _ = _section(T, z0, args.order)
        _write_text(args.emit_csv, series_csv(s.coefficients))
    return EXIT_OK


def reproduce_report(example_id: str, N: int) -> dict[str, Any]:
    ex = build_named_example(example_id, {}, N)
    T, f, g, step = ex.T, ex.f, ex.g, ex.step
    bio = verify_biorthogonal(f, g)
    back_g = verify_shift_relation(T, 0.0, g, "backward", step)
    fwd_f = verify_shift_relation(adjoint(T), 0.0, f, "forward", step)
    K = f.shape[0]
    trend = {}
    for frac in (4, 2, 1):
        k = max(1, K // frac)
        trend[str(k)] = float(basis_diagnostics(f[:k], window=1).completeness_defects[0])
    bd = basis_diagnostics(f, window=1)
    out: dict[str, Any] = {
        "biorthogonality_residual": bio.residual,
        "g_backward_shift_residual": back_g.max_residual,
        "f_forward_shift_residual_under_adjoint": fwd_f.max_residual,
        "step": step,
        "e1_completeness_defect_by_count": trend,
        "min_minimality_margin": float(bd.minimality_margins.min()),
    }
    checks = {
        "biorthogonal": bio.residual <= 1e-12,
        "g_backward_shift": back_g.max_residual <= 1e-12,
        "f_forward_shift": fwd_f.max_residual <= 1e-12,
    }
    if example_id == "4.2":
        back_f = verify_shift_relation(T, 0.0, f, "backward", step)
        out["f_backward_shift_residual_under_T"] = back_f.max_residual
        out["f_backward_shift_worst_index"] = int(np.argmax(back_f.residuals))
    if example_id == "4.5":
        m = ex.metadata
        g_printed = m["g_printed"]
        out["printed_dual"] = {
            "biorthogonality_residual": m["printed_dual_residual"],
            "failing_pair": {"f": m["printed_dual_failing_pair"][0], "g": m["printed_dual_failing_pair"][1]},
            "value": m["printed_dual_failing_value"],
            "minus_alpha_2": -m["alpha_head"][1],
            "backward_shift_residual": verify_shift_relation(T, 0.0, g_printed, "backward", step).max_residual,
        }
        out["corrected_dual"] = {"biorthogonality_residual": m["corrected_dual_residual"]}
        out["alpha"] = {
            "source": m["alpha_source"],
            "head": m["alpha_head"],
            "partial_sum_n_alpha_sq": m["partial_sum_n_alpha_sq"],
            "partial_sum_alpha": m["partial_sum_alpha"],
        }
        checks["printed_dual_flagged"] = bool(m["dual_discrepancy"])
    out["checks"] = checks
    return out


def cmd_reproduce(args) -> int:
    try:
        build_named_example(args.example, {}, 3)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.example not in ("4.2", "4.5"):
        raise InputError(f"reproduce supports '4.2' and '4.5', got {args.example!r}")
    t0 = time.perf_counter()
    body = reproduce_report(args.example, args.n)
    report = {
        "tool_version": __version__,
        "command": "reproduce",
        "example": args.example,
        "truncation": args.n,
        **body,
        "wall_time": time.perf_counter() - t0,
    }
    _write_text(args.out, json.dumps(_jsonable(report), indent=2) + "\n")
    return EXIT_OK


def cmd_export_series(args) -> int:
    _, T = load_operator(args.spec, args.truncation)
    z0 = parse_z(args.z0)
    _, s, _ = _section(T, z0, args.order)
    _write_text(args.out, series_csv(s.coefficients))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdshift", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def operator_flags(q):
        q.add_argument("--spec", required=True, help="operator spec JSON")
        q.add_argument("--z0", default="0+0i", help="base point, a+bi without spaces")
        q.add_argument("--order", type=int, default=40, help="series order K")
        q.add_argument("--truncation", type=int, default=None, help="override the spec's truncation N")

    a = sub.add_parser("analyze", help="run sections, diagnostics and criteria")
    operator_flags(a)
    a.add_argument("--epsilon", type=float, default=None, help="disc radius for the B_1 check")
    a.add_argument("--criteria", default="all", help="'all' or a comma list of " + ",".join(CRITERIA))
    a.add_argument("--out", default=None, help="report path (default stdout)")
    a.add_argument("--emit-csv", default=None, help="also write the section coefficients as CSV")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reproduce", help="materialize and check a worked example")
    r.add_argument("example", help="4.2 or 4.5")
    r.add_argument("--n", type=int, default=64, help="truncation order")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_reproduce)

    e = sub.add_parser("export-series", help="write canonical-section coefficients as CSV")
    operator_flags(e)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_export_series)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
