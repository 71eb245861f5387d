"""Command-line front end.

Exit codes: 0 the property holds, 1 it fails (counterexample printed),
2 inconclusive at the queue bound, 3 usage, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import check, harness
from .check import AsyncOutcome
from .compose import async_compose, sync_compose
from .core import IDENT, MioError, composable, validate
from .format import ParseError, parse, serialize

OK, FAILS, INCONCLUSIVE, ERROR = 0, 1, 2, 3
DEFAULT_QUEUE_BOUND = 3
DEFAULT_SEED = 20100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def _load(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse(text)
    except ParseError as exc:
        raise UsageError("\n".join(f"{path}:{d}" for d in exc.diagnostics)) from exc


def resolve(ref: str):
    """Load the MIO addressed by ``FILE:NAME`` (or ``FILE`` holding exactly one MIO)."""
    path, _, name = ref.rpartition(":")
    if not path or not IDENT.match(name):
        path, name = ref, None
    doc = _load(path)
    if name is None:
        if len(doc.mios) != 1:
            raise UsageError(f"{path} holds {len(doc.mios)} MIOs; address one as {path}:NAME")
        return doc.mios[0]
    try:
        return doc.get(name)
    except KeyError:
        raise UsageError(f"{path} has no MIO named {name!r} (has {', '.join(doc.names())})")


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def cmd_validate(args):
    doc = _load(args.file)
    problems = {m.name: validate(m) for m in doc.mios}
    bad = any(problems.values())
    lines = [f"{args.file}:{d}" for d in doc.warnings]
    for name, errs in problems.items():
        lines.extend(f"{name}: error: {e}" for e in errs)
        if not errs:
            lines.append(f"{name}: ok")
    payload = {"command": "validate", "file": args.file, "ok": not bad,
               "mios": {n: e for n, e in problems.items()},
               "warnings": [str(d) for d in doc.warnings]}
    _emit(args, payload, "\n".join(lines))
    return ERROR if bad else OK


def cmd_compose(args):
    doc = _load(args.file)
    try:
        left, right = doc.get(args.left), doc.get(args.right)
    except KeyError as exc:
        raise UsageError(f"{args.file} has no MIO named {exc.args[0]!r}")
    if not composable(left, right):
        raise UsageError(f"{left.name} and {right.name} are not composable")
    if args.mode == "sync":
        result = sync_compose(left, right)
    else:
        result = async_compose(left, right, args.queue_bound)
    text = serialize(result)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    payload = {"command": "compose", "mode": args.mode, "name": result.name,
               "states": len(result.states), "transitions": len(result.may),
               "saturated": sorted(result.saturated), "output": args.output}
    if args.mode == "async":
        payload["queue_bound"] = args.queue_bound
    if args.json:
        if not args.output:
            payload["mio"] = text
        print(json.dumps(payload, sort_keys=True, indent=2))
    elif not args.output:
        sys.stdout.write(text)
    else:
        print(f"wrote {result.name} ({len(result.states)} states) to {args.output}")
    return OK


def cmd_refine(args):
    concrete, abstract = resolve(args.concrete), resolve(args.abstract)
    try:
        verdict = check.refines(concrete, abstract, args.mode)
    except MioError as exc:
        raise UsageError(str(exc))
    payload = {"command": "refine", "mode": args.mode, "concrete": concrete.name,
               "abstract": abstract.name, "holds": verdict.holds}
    if verdict.holds:
        payload["witness_size"] = len(verdict.witness)
        payload["witness"] = sorted(list(p) for p in verdict.witness)
        text = (f"{concrete.name} {args.mode}ly refines {abstract.name} "
                f"(witness relation of {len(verdict.witness)} pairs)")
        _emit(args, payload, text)
        return OK
    cex = verdict.counterexample
    payload["counterexample"] = asdict(cex)
    text = "\n".join([
        f"{concrete.name} does not {args.mode}ly refine {abstract.name}",
        f"  pair:      ({cex.concrete}, {cex.abstract})",
        f"  condition: {cex.condition}",
        f"  action:    {cex.action}",
        f"  trace:     {' '.join(cex.trace) or '(start pair)'}",
    ])
    _emit(args, payload, text)
    return FAILS


def _violation_lines(v):
    return [
        f"  state:     {v.state}",
        f"  direction: {v.direction}",
        f"  action:    {v.action}",
        f"  trace:     {' '.join(v.trace) or '(start state)'}",
    ]


def cmd_compat(args):
    a, b = resolve(args.left), resolve(args.right)
    if not composable(a, b):
        raise UsageError(f"{a.name} and {b.name} are not composable")
    payload = {"command": "compat", "mode": args.mode, "left": a.name, "right": b.name}
    if args.mode in ("strong", "weak"):
        fn = check.strong_compatible if args.mode == "strong" else check.weak_compatible
        verdict = fn(a, b)
        payload["compatible"] = verdict.compatible
        if verdict.compatible:
            _emit(args, payload, f"{a.name} and {b.name} are {args.mode}ly compatible")
            return OK
        payload["violation"] = asdict(verdict.violation)
        lines = [f"{a.name} and {b.name} are not {args.mode}ly compatible"]
        _emit(args, payload, "\n".join(lines + _violation_lines(verdict.violation)))
        return FAILS
    verdict = check.async_compatible(a, b, args.queue_bound)
    payload.update(outcome=verdict.outcome.value, queue_bound=verdict.capacity,
                   saturated=verdict.saturated, saturated_states=list(verdict.saturated_states))
    head = f"{a.name} / {b.name} at queue bound {verdict.capacity}: {verdict.outcome.value}"
    lines = [head]
    if verdict.violation is not None:
        payload["violation"] = asdict(verdict.violation)
        lines += _violation_lines(verdict.violation)
    if verdict.outcome is AsyncOutcome.INCONCLUSIVE:
        if verdict.unconfirmed is not None:
            payload["unconfirmed"] = asdict(verdict.unconfirmed)
            lines.append("  unconfirmed violation (receive search reached the bound):")
            lines += ["  " + x for x in _violation_lines(verdict.unconfirmed)]
        lines.append(f"  saturated states ({len(verdict.saturated_states)}):")
        lines += [f"    {s}" for s in verdict.saturated_states]
    _emit(args, payload, "\n".join(lines))
    return {AsyncOutcome.COMPATIBLE_EXACT: OK, AsyncOutcome.INCOMPATIBLE: FAILS,
            AsyncOutcome.INCONCLUSIVE: INCONCLUSIVE}[verdict.outcome]


def cmd_theorems(args):
    seed = args.seed
    if seed is None:
        env = os.environ.get("MIOCHECK_SEED")
        try:
            seed = int(env) if env else DEFAULT_SEED
        except ValueError:
            raise UsageError(f"MIOCHECK_SEED must be an integer, got {env!r}")
    cfg = harness.GenConfig(max_states=args.max_states, max_actions_per_kind=args.max_actions,
                            transition_density=args.density, must_fraction=args.must_fraction,
                            seed=seed)
    report = harness.check_theorem(args.theorem, args.iterations, cfg,
                                   capacity=args.queue_bound, target=args.applicable)
    if args.json:
        payload = report.summary()
        payload["command"] = "theorems"
        payload["failure_records"] = [{"seed": s, "clause": c, "instance": i}
                                      for s, i, c in report.failures]
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        sys.stdout.write(report.to_lines())
    return OK if report.passed else FAILS


def build_parser():
    p = _Parser(prog="miocheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="emit a structured verdict object")
        return sp

    sp = common(sub.add_parser("validate", help="parse and validate a .mio file"))
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = common(sub.add_parser("compose", help="write the product of two MIOs"))
    sp.add_argument("file")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--mode", choices=("sync", "async"), default="sync")
    sp.add_argument("--queue-bound", type=_positive, default=DEFAULT_QUEUE_BOUND)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_compose)

    sp = common(sub.add_parser("refine", help="check CONCRETE refines ABSTRACT"))
    sp.add_argument("concrete", help="FILE:NAME or FILE")
    sp.add_argument("abstract", help="FILE:NAME or FILE")
    sp.add_argument("--mode", choices=("strong", "weak"), default="weak")
    sp.set_defaults(func=cmd_refine)

    sp = common(sub.add_parser("compat", help="check compatibility of two MIOs"))
    sp.add_argument("left", help="FILE:NAME or FILE")
    sp.add_argument("right", help="FILE:NAME or FILE")
    sp.add_argument("--mode", choices=("strong", "weak", "async"), default="weak")
    sp.add_argument("--queue-bound", type=_positive, default=DEFAULT_QUEUE_BOUND)
    sp.set_defaults(func=cmd_compat)

    sp = common(sub.add_parser("theorems", help="property-test the interface theorems"))
    sp.add_argument("--theorem", choices=harness.THEOREMS, default="T1")
    sp.add_argument("--iterations", type=_positive, default=500)
    sp.add_argument("--applicable", type=_positive, default=None,
                    help="stop once this many applicable instances were checked")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--max-states", type=_positive, default=6)
    sp.add_argument("--max-actions", type=int, default=2)
    sp.add_argument("--density", type=_fraction, default=0.5)
    sp.add_argument("--must-fraction", type=_fraction, default=0.5)
    sp.add_argument("--queue-bound", type=_positive, default=DEFAULT_QUEUE_BOUND)
    sp.set_defaults(func=cmd_theorems)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MioError, ValueError) as exc:
        print(f"miocheck: error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
