"""Command-line interface: run a protocol, the tomography analyzer, or the
full acceptance suite, emitting deterministic JSON/CSV/text reports.

Exit codes: 0 all expectations met, 1 expectation mismatch, 2 usage error,
3 I/O error.  The tolerance defaults to 1e-10, may be set by the BMV_EPS
environment variable, and is overridden by --eps; it must lie in (0, 1e-6].
Reports contain no timestamps, so identical invocations produce identical
bytes.  Complex numbers serialize as [re, im] pairs and matrices as
row-major nested arrays.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .acceptance import (
    local_product_basis,
    model_checks,
    nondecomposable_target,
    run_all,
)
from .bit_antibit import run_bit_antibit_protocol
from .fermion_ssr import count_scaling_check, run_fermion_protocol
from .ising_anyon import AnyonState, run_anyon_protocol
from .statecore import EPS, in_span
from .witness import ProtocolTrace, WitnessReport

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_IO = 3

MODELS = ("fermion", "anyon", "bitantibit")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated options of the ``run`` command."""

    model: str
    mediator_bits: int = 2
    fmt: str = "text"
    out: str | None = None
    trace_steps: bool = False
    eps: float = EPS

    def __post_init__(self):
        if self.model not in MODELS:
            raise UsageError(f"unknown model {self.model!r}")
        if self.mediator_bits < 2:
            raise UsageError("--mediator-bits must be at least 2")
        if not (0.0 < self.eps <= 1e-6):
            raise UsageError(f"eps must lie in (0, 1e-6], got {self.eps:g}")
        if self.fmt not in RENDERERS:
            raise UsageError(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# serialization helpers


def _num(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _vec(v) -> list:
    return [_num(z) for z in np.asarray(v).reshape(-1)]


def _mat(m) -> list:
    return [[_num(z) for z in row] for row in np.asarray(m)]


def _witness_dict(report: WitnessReport) -> dict:
    return {
        "purity": report.purity,
        "uncorrelated": report.uncorrelated,
        "entangled": report.entangled,
        "violating_pair": list(report.violating_pair) if report.violating_pair else None,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "max_violation": report.max_violation,
        "correlations": [
            [row.index_a, row.index_b, row.expect_a, row.expect_b, row.expect_product]
            for row in report.correlations
        ],
    }


def _state_dict(state) -> dict:
    if isinstance(state, AnyonState):
        return {"partition": state.shape.value, "amplitudes": _vec(state.amps)}
    return {"amplitudes": _vec(state)}


# ---------------------------------------------------------------------------
# report builders


def build_run_report(trace: ProtocolTrace, eps: float, trace_steps: bool) -> dict:
    checks = model_checks(trace, eps)
    steps = []
    for step in trace.steps:
        entry: dict = {"label": step.label}
        if trace_steps:
            entry["state"] = _state_dict(step.state)
            entry["matter"] = _mat(step.matter)
        steps.append(entry)
    return {
        "meta": {"tool": "bmvsim", "version": __version__, "eps": eps},
        "model": trace.model,
        "steps": steps,
        "mediator_states": [_mat(step.mediator) for step in trace.steps],
        "marginals": {
            "rho_q1": _mat(trace.summary["rho_q1"]),
            "rho_q2": _mat(trace.summary["rho_q2"]),
        },
        "witness": _witness_dict(trace.report),
        "expected": [
            {"name": c.name, "expected": c.expected, "actual": c.actual, "pass": c.passed}
            for c in checks
        ],
        "pass": all(c.passed for c in checks),
    }


def build_tomography_report(k_max: int, eps: float) -> dict:
    rows = count_scaling_check(k_max)
    decomposable, residual = in_span(nondecomposable_target(), local_product_basis(), eps)
    counts_ok = all(match for *_, match in rows)
    passed = counts_ok and (not decomposable) and residual > eps
    return {
        "meta": {"tool": "bmvsim", "version": __version__, "eps": eps},
        "command": "tomography",
        "counts": [
            {"k": k, "count": count, "expected": expected, "match": match}
            for k, count, expected, match in rows
        ],
        "span_check": {
            "observable": "pair annihilator + pair creator on modes 2,3 of 5",
            "residual": residual,
            "decomposable": decomposable,
        },
        "pass": passed,
    }


def build_verify_report(eps: float) -> dict:
    results = run_all(eps)
    return {
        "meta": {"tool": "bmvsim", "version": __version__, "eps": eps},
        "command": "verify-all",
        "criteria": [
            {"index": r.index, "name": r.name, "pass": r.passed, "detail": r.detail}
            for r in results
        ],
        "pass": all(r.passed for r in results),
    }


# ---------------------------------------------------------------------------
# rendering


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _csv_rows(report: dict) -> list[tuple[str, str, str]]:
    rows: list[tuple[str, str, str]] = []

    def walk(prefix: str, value):
        if isinstance(value, dict):
            for key, sub in value.items():
                walk(f"{prefix}.{key}" if prefix else str(key), sub)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, sub in enumerate(value):
                walk(f"{prefix}[{i}]", sub)
        else:
            rows.append((prefix.split(".")[0], prefix, json.dumps(value)))

    walk("", report)
    return rows


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["section", "key", "value"])
    writer.writerows(_csv_rows(report))
    return buf.getvalue()


def render_text(report: dict) -> str:
    lines = [f"bmvsim {report['meta']['version']} (eps={report['meta']['eps']:g})"]
    if "model" in report:
        lines.append(f"model: {report['model']}")
        lines.append(f"steps: {', '.join(step['label'] for step in report['steps'])}")
        w = report["witness"]
        lines.append(
            f"witness: purity={w['purity']:.10g} uncorrelated={w['uncorrelated']} entangled={w['entangled']}"
        )
        if w["violating_pair"]:
            lines.append(
                f"  max violation at pair {tuple(w['violating_pair'])}: lhs={w['lhs']:.10g} rhs={w['rhs']:.10g}"
            )
        for check in report["expected"]:
            status = "PASS" if check["pass"] else "FAIL"
            lines.append(f"[{status}] {check['name']}: expected {check['expected']}, actual {check['actual']}")
    elif report.get("command") == "tomography":
        lines.append("k  count  2^(2k-1)  match")
        for row in report["counts"]:
            lines.append(f"{row['k']}  {row['count']}  {row['expected']}  {row['match']}")
        sc = report["span_check"]
        lines.append(f"span residual: {sc['residual']:.10g} (decomposable={sc['decomposable']})")
    elif report.get("command") == "verify-all":
        for crit in report["criteria"]:
            status = "PASS" if crit["pass"] else "FAIL"
            lines.append(f"[{status}] {crit['index']:2d} {crit['name']}: {crit['detail']}")
    lines.append("RESULT: " + ("PASS" if report["pass"] else "FAIL"))
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "text": render_text}


def _emit(report: dict, fmt: str, out: str | None) -> int:
    text = RENDERERS[fmt](report)
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling


def _resolve_eps(value: float | None) -> float:
    if value is None:
        env = os.environ.get("BMV_EPS")
        if env is not None:
            try:
                value = float(env)
            except ValueError:
                raise UsageError(f"BMV_EPS is not a number: {env!r}") from None
    if value is None:
        return EPS
    if not (0.0 < value <= 1e-6):
        raise UsageError(f"eps must lie in (0, 1e-6], got {value:g}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmvsim",
        description="Simulate entanglement mediation by locally classical mediators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one mediation protocol and check its expectations")
    run.add_argument("model_pos", nargs="?", choices=MODELS, metavar="model",
                     help="fermion | anyon | bitantibit")
    run.add_argument("--model", choices=MODELS, dest="model_flag")
    run.add_argument("--mediator-bits", type=int, default=None,
                     help="mediator register size (bitantibit only, default 2)")
    run.add_argument("--format", choices=sorted(RENDERERS), default="text")
    run.add_argument("--out", default=None, help="write the report to this path")
    run.add_argument("--trace-steps", action="store_true", help="include per-step states")
    run.add_argument("--eps", type=float, default=None)

    tomo = sub.add_parser("tomography", help="observable counting and the span analyzer")
    tomo.add_argument("--k-max", type=int, default=4)
    tomo.add_argument("--format", choices=sorted(RENDERERS), default="text")
    tomo.add_argument("--out", default=None)
    tomo.add_argument("--eps", type=float, default=None)

    verify = sub.add_parser("verify-all", help="run every acceptance criterion")
    verify.add_argument("--format", choices=sorted(RENDERERS), default="text")
    verify.add_argument("--out", default=None)
    verify.add_argument("--eps", type=float, default=None)

    return parser


def cmd_run(args) -> int:
    if (args.model_pos is None) == (args.model_flag is None):
        raise UsageError("give the model exactly once (positionally or via --model)")
    model = args.model_pos or args.model_flag
    if args.mediator_bits is not None and model != "bitantibit":
        raise UsageError("--mediator-bits applies to the bitantibit model only")
    config = RunConfig(
        model=model,
        mediator_bits=2 if args.mediator_bits is None else args.mediator_bits,
        fmt=args.format,
        out=args.out,
        trace_steps=args.trace_steps,
        eps=_resolve_eps(args.eps),
    )
    try:
        if config.model == "fermion":
            trace = run_fermion_protocol(eps=config.eps)
        elif config.model == "anyon":
            trace = run_anyon_protocol(eps=config.eps)
        else:
            trace = run_bit_antibit_protocol(config.mediator_bits, eps=config.eps)
        report = build_run_report(trace, config.eps, config.trace_steps)
    except ValueError as exc:
        print(f"expectation failure: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    code = _emit(report, config.fmt, config.out)
    if code != EXIT_OK:
        return code
    return EXIT_OK if report["pass"] else EXIT_MISMATCH


def cmd_tomography(args) -> int:
    if args.k_max > 5:
        raise UsageError("state space too large: k_max must be at most 5")
    if args.k_max < 1:
        raise UsageError("k_max must be at least 1")
    eps = _resolve_eps(args.eps)
    report = build_tomography_report(args.k_max, eps)
    code = _emit(report, args.format, args.out)
    if code != EXIT_OK:
        return code
    return EXIT_OK if report["pass"] else EXIT_MISMATCH


def cmd_verify_all(args) -> int:
    eps = _resolve_eps(args.eps)
    report = build_verify_report(eps)
    code = _emit(report, args.format, args.out)
    if code != EXIT_OK:
        return code
    return EXIT_OK if report["pass"] else EXIT_MISMATCH


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "tomography":
            return cmd_tomography(args)
        return cmd_verify_all(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
