"""Command-line front end.

    accessorctl conditions CONFIG
    accessorctl closure CONFIG [--cap N] [--tol T] [--oracle] [--workers K]
    accessorctl decouple CONFIG
    accessorctl random --n N --m M --seed S [--out PATH]

CONFIG is a JSON file or ``builtin:<name>``.  Every command prints one JSON
report with top-level keys ``version``, ``command``, ``config``, ``result``
and ``timing``.  Wall-clock times live only in ``timing``, so reruns give
identical ``result`` blocks.

Exit codes: 0 success (feasible / controllable / all certificates pass),
1 negative answer, 2 invalid input.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .closure import controllability_verdict
from .config import ConfigError, load_config, model_to_config, random_config
from .decoupling import run_proof
from .exact import ExactError, agreement_check
from .model import check_size_condition, coupling_rank_check

SCHEMA_VERSION = 1

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID = 0, 1, 2


def _plain(obj):
    """Recursively convert to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return x
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def make_report(command, config, result, timing) -> dict:
    return {
        "version": {"tool": __version__, "schema": SCHEMA_VERSION},
        "command": command,
        "config": config,
        "result": result,
        "timing": timing,
    }


def _emit(report, out):
    out.write(dumps(report))


def _load(args):
    _, model, tol = load_config(args.config)
    return model, tol, model.notes()


def cmd_conditions(args, out) -> int:
    model, tol, notes = _load(args)
    size = check_size_condition(model.n, model.m)
    rank = coupling_rank_check(model.coupling, model.n, model.m)
    feasible = size.feasible and rank.feasible
    result = {"size": size.to_dict(), "rank": rank.to_dict(), "feasible": feasible, "notes": notes}
    _emit(make_report("conditions", model_to_config(model, tol), result, {}), out)
    return EXIT_OK if feasible else EXIT_NEGATIVE


def cmd_closure(args, out) -> int:
    model, tol, notes = _load(args)
    if args.tol is not None:
        tol = dataclasses.replace(tol, independence_tol=args.tol)
    start = time.perf_counter()
    report = controllability_verdict(model, tol, workers=args.workers, cap=args.cap)
    timing = {"closure_wall_time": report.wall_time}
    result = report.to_dict(timing=False)
    result["notes"] = notes
    if args.oracle:
        t0 = time.perf_counter()
        agree = agreement_check(model, tol)
        timing["oracle_wall_time"] = time.perf_counter() - t0
        result["oracle"] = agree.to_dict()
    timing["total_wall_time"] = time.perf_counter() - start
    config = model_to_config(model, tol)
    config["options"] = {"cap": args.cap, "oracle": bool(args.oracle), "workers": args.workers}
    _emit(make_report("closure", config, result, timing), out)
    return EXIT_OK if report.verdict == "controllable" else EXIT_NEGATIVE


def cmd_decouple(args, out) -> int:
    model, tol, notes = _load(args)
    start = time.perf_counter()
    proof = run_proof(model, tol)
    result = proof.to_dict()
    result["notes"] = notes
    timing = {"total_wall_time": time.perf_counter() - start}
    _emit(make_report("decouple", model_to_config(model, tol), result, timing), out)
    return EXIT_OK if proof.ok else EXIT_NEGATIVE


def cmd_random(args, out) -> int:
    config = random_config(args.n, args.m, args.seed)
    text = dumps(config)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        result = {"path": str(args.out), "seed": args.seed, "n": args.n, "m": args.m}
        _emit(make_report("random", config, result, {}), out)
    else:
        out.write(text)
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="accessorctl", description="Controllability through an accessor spin chain.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("conditions", help="size condition and coupling rank")
    c.add_argument("config")
    c.set_defaults(func=cmd_conditions)

    c = sub.add_parser("closure", help="dimension of the generated Lie algebra")
    c.add_argument("config")
    c.add_argument("--cap", type=_positive_int, default=None, help="stop once the basis has this many elements")
    c.add_argument("--tol", type=_positive_float, default=None, help="relative independence threshold")
    c.add_argument("--oracle", action="store_true", help="cross-check with exact rational arithmetic")
    c.add_argument("--workers", type=_positive_int, default=1, help="threads for commutator evaluation")
    c.set_defaults(func=cmd_closure)

    c = sub.add_parser("decouple", help="run the constructive decoupling procedure")
    c.add_argument("config")
    c.set_defaults(func=cmd_decouple)

    c = sub.add_parser("random", help="write a seeded random config")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_random)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 0 for --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (ConfigError, ExactError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _emit(make_report(args.command, None, {"error": str(exc)}, {}), out)
        return EXIT_INVALID


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
