"""Command-line front end.

Exit codes: 0 success, 1 usage/parse/type error, 2 validation or scenario
failure, 3 numerical spectrum failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import cesaro, scenarios
from . import io as mio
from . import matkernel as mk
from .eraser import DEFAULT_EIG_TOL, build_eraser
from .errors import (
    InvalidModel,
    ModeMismatch,
    NotNormalized,
    NotProjective,
    NotPSD,
    ScenarioMismatch,
    SpectrumOutOfRange,
)
from .models import (
    DEFAULT_TOL,
    Behavior,
    CommutingModel,
    QuansalModel,
    TensorModel,
    behavior_of,
    chsh_value,
    check_no_signaling,
    embed,
    quansality_residual,
    validate_behavior,
    validate_commuting,
    validate_quansal,
    validate_tensor,
    Report,
)
from .transforms import quansalize, tensorize

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_SPECTRUM = 0, 1, 2, 3

ROUNDTRIP_BEHAVIOR_TOL = 1e-8
STATE_TOL = 1e-10
CSV_VERSION = "1"


class UsageError(Exception):
    pass


def default_tol() -> float:
    value = os.environ.get("QUANSAL_TOL")
    if value is None:
        return DEFAULT_TOL
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"QUANSAL_TOL={value!r} is not a number") from None


def _load(path, *allowed):
    try:
        obj = mio.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (mio.SchemaError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if allowed and not isinstance(obj, allowed):
        names = " or ".join(a.__name__ for a in allowed)
        raise UsageError(f"{path}: expected {names}, got {type(obj).__name__}")
    return obj


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(report: dict, path=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if path:
        mio.atomic_write_text(path, text)


def validate_any(obj, tol: float) -> Report:
    if isinstance(obj, CommutingModel):
        return validate_commuting(obj, tol)
    if isinstance(obj, TensorModel):
        return validate_tensor(obj, tol)
    if isinstance(obj, QuansalModel):
        return validate_quansal(obj, tol)
    if isinstance(obj, Behavior):
        base = validate_behavior(obj, tol)
        return Report(base.checks + check_no_signaling(obj, tol).checks)
    raise TypeError(type(obj).__name__)


# ----------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    obj = _load(args.path)
    report = validate_any(obj, tol)
    print(f"{args.path}: {type(obj).__name__}")
    print(report)
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_quansalize(args) -> int:
    m = _load(args.input, CommutingModel)
    q = quansalize(m, args.mode, args.eig_tol)
    mio.save(q, args.output)
    print(f"quansality residual {quansality_residual(q.sigma_family):.3e}")
    return EXIT_OK


def cmd_tensorize(args) -> int:
    q = _load(args.input, QuansalModel)
    t = tensorize(q, args.rank_tol)
    mio.save(t, args.output)
    completeness = max(mk.frobenius_norm(sum(m.operators) - np.eye(t.dim_a)) for m in t.alice)
    print(f"alice completeness residual {completeness:.3e}")
    return EXIT_OK


def roundtrip_report(m: CommutingModel, mode: str, eig_tol: float, rank_tol: float, tol: float) -> dict:
    """Run both constructions and collect every residual of the pipeline."""
    p_in = behavior_of(m, tol=tol)
    eraser = build_eraser(m.alice, mode, eig_tol)
    q = quansalize(m, mode, eig_tol, eraser=eraser)
    t = tensorize(q, rank_tol)
    p_out = behavior_of(t, tol=tol)
    w = np.linalg.eigvalsh(mk.hermitian_part(t.rho_ab))
    ev = eraser.projector.spectrum
    checks = {
        "behavior_distance_inf": (p_out.max_abs_diff(p_in), ROUNDTRIP_BEHAVIOR_TOL),
        "quansality": (quansality_residual(q.sigma_family), ROUNDTRIP_BEHAVIOR_TOL),
        "eraser_invariance": (eraser.invariance_residual(), ROUNDTRIP_BEHAVIOR_TOL),
        "eraser_hermiticity": (mk.hermiticity_residual(eraser.average.matrix), STATE_TOL),
        "eraser_spectrum_excess": (max(0.0, ev[0] - 1.0, -ev[-1]), eig_tol),
        "rho_ab_trace": (abs(complex(np.trace(t.rho_ab)) - 1.0), STATE_TOL),
        "rho_ab_rank_excess": (float(np.sum(np.abs(w[:-1]))), STATE_TOL),
        "alice_completeness": (
            max(mk.frobenius_norm(sum(a.operators) - np.eye(t.dim_a)) for a in t.alice),
            STATE_TOL,
        ),
    }
    return {
        "checks": {k: {"residual": float(r), "tol": t_, "passed": bool(r <= t_)} for k, (r, t_) in checks.items()},
        "passed": all(r <= t_ for r, t_ in checks.values()),
        "spectrum": eraser.projector.spectrum_summary(),
        "dims": {"input": m.dim, "tensor": [t.dim_a, t.dim_b]},
    }


def cmd_roundtrip(args) -> int:
    tol = default_tol()
    m = _load(args.input, CommutingModel, TensorModel)
    if isinstance(m, TensorModel):
        m = embed(m)
    start = time.perf_counter()
    body = roundtrip_report(m, args.mode, args.eig_tol, args.rank_tol, tol)
    report = {
        "command": "roundtrip",
        "inputs": {"path": str(args.input), "sha256": _file_digest(args.input)},
        "tolerances": {"validation": tol, "eig_tol": args.eig_tol, "rank_tol": args.rank_tol, "mode": args.mode},
        **body,
    }
    if not args.no_timing:
        report["wall_time_s"] = time.perf_counter() - start
    _emit(report, args.report)
    return EXIT_OK if report["passed"] else EXIT_INVALID


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None
    if not values or min(values) < 0:
        raise UsageError(f"bad integer list {text!r}")
    return values


def sweep_csv(rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cesaro.SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(
            [r.n]
            + [repr(float(v)) for v in (r.quansality_residual, r.identity_residual, r.distance, r.scaled_distance, r.closed_form_residual)]
        )
    return buf.getvalue()


def cmd_cesaro(args) -> int:
    m = _load(args.input, CommutingModel, TensorModel)
    if isinstance(m, TensorModel):
        m = embed(m)
    if args.qa == "uniform":
        qa = None
    else:
        try:
            qa = json.loads(Path(args.qa).read_text())["qa"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read --qa file {args.qa}: {exc}") from exc
    rows = cesaro.cesaro_sweep(m, _parse_int_list(args.n_list), qa, workers=args.workers)
    text = sweep_csv(rows)
    if args.out_csv:
        mio.atomic_write_text(args.out_csv, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad dimension pair {text!r}; expected e.g. 2x3") from None
    return a, b


def cmd_generate(args) -> int:
    try:
        outcomes_a = tuple(_parse_int_list(args.outcomes_a))
        outcomes_b = tuple(_parse_int_list(args.outcomes_b))
        if args.kind == "block_sum":
            blocks = tuple(_parse_dims(b) for b in args.blocks.split(","))
            weights = (
                tuple(float(w) for w in args.weights.split(","))
                if args.weights
                else (1.0 / len(blocks),) * len(blocks)
            )
        else:
            blocks, weights = (_parse_dims(args.dims),), (1.0,)
        spec = scenarios.GeneratorSpec(args.kind, outcomes_a, outcomes_b, blocks, weights, args.seed)
        model = scenarios.generate(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mio.save(model, args.output)
    report = validate_any(model, default_tol())
    print(f"{args.output}: {type(model).__name__}")
    print(report)
    if model.scenario.outcomes_a == (2, 2) and model.scenario.outcomes_b == (2, 2):
        print(f"CHSH value {chsh_value(behavior_of(model)):.10f}")
    return EXIT_OK if report.passed else EXIT_INVALID


# ----------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quansal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a model or behavior file")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=None, help="tolerance (default: $QUANSAL_TOL or 1e-9)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("quansalize", help="commuting model -> quansal model")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=("projective", "sqrt"), default="projective")
    p.add_argument("--eig-tol", type=float, default=DEFAULT_EIG_TOL)
    p.set_defaults(func=cmd_quansalize)

    p = sub.add_parser("tensorize", help="quansal model -> tensor-product model")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--rank-tol", type=float, default=mk.DEFAULT_RANK_TOL)
    p.set_defaults(func=cmd_tensorize)

    p = sub.add_parser("roundtrip", help="commuting -> quansal -> tensor, with a residual report")
    p.add_argument("input")
    p.add_argument("--report", default=None, help="also write the JSON report here")
    p.add_argument("--mode", choices=("projective", "sqrt"), default="projective")
    p.add_argument("--eig-tol", type=float, default=DEFAULT_EIG_TOL)
    p.add_argument("--rank-tol", type=float, default=mk.DEFAULT_RANK_TOL)
    p.add_argument("--no-timing", action="store_true", help="omit wall time so reports are byte-reproducible")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("cesaro", help="Cesàro approximant sweep as CSV")
    p.add_argument("input")
    p.add_argument("--n-list", default="0,1,2,4,8,16,32,64")
    p.add_argument("--qa", default="uniform", help="'uniform' or a JSON file {\"qa\": [[...], [...]]}")
    p.add_argument("--out-csv", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_cesaro)

    p = sub.add_parser("generate", help="write a seeded fixture")
    p.add_argument("kind", choices=("tensor_embedded", "block_sum", "chsh", "random_povm"))
    p.add_argument("output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default="2x2", help="AxB factor dimensions")
    p.add_argument("--blocks", default="2x2,3x2", help="block_sum: comma-separated AxB blocks")
    p.add_argument("--weights", default=None, help="block_sum: comma-separated weights")
    p.add_argument("--outcomes-a", default="2,2")
    p.add_argument("--outcomes-b", default="2,2")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectrumOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPECTRUM
    except (InvalidModel, ScenarioMismatch, NotNormalized, NotProjective, ModeMismatch, NotPSD) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
