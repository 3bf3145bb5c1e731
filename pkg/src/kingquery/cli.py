"""Command line entry point: ``kingquery <command> [options]``.

Exit status: 0 on success, 2 when an invariant check fails, 1 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import harness
from .constants import verify_constants
from .core import InvalidParameterError
from .template import (
    DEFAULT_EXHAUSTIVE_CUTOFF,
    TemplateParams,
    audit_template,
    edge_budget,
    format_template,
    generate_template,
    parse_template,
)

EXIT_OK, EXIT_IO, EXIT_INVARIANT = 0, 1, 2


def _experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, nargs="+", default=[27])
    p.add_argument("--kappa", type=Fraction, default=Fraction(1, 2))
    p.add_argument("--delta", type=Fraction, default=Fraction(2, 17))
    p.add_argument("--seeds", default="0", help="'7', '1,2,5' or half-open range '0:10'")
    p.add_argument("--tournament", choices=["random", "transitive", "rotational"], default="random")
    p.add_argument("--oracle", choices=["fixed", "adversary"], default="fixed")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--strict-template", action="store_true")
    p.add_argument("--audit-trials", type=int, default=200)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kingquery", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    tpl = sub.add_parser("template", help="generate or audit a template graph")
    tsub = tpl.add_subparsers(dest="action", required=True)
    for name in ("gen", "audit"):
        tp = tsub.add_parser(name)
        tp.add_argument("--n", type=int)
        tp.add_argument("--kappa", type=Fraction, default=Fraction(1, 2))
        tp.add_argument("--seed", type=int, default=0)
        tp.add_argument("--out")
        if name == "audit":
            tp.add_argument("--in", dest="infile", help="template file to audit instead of generating")
            tp.add_argument("--trials", type=int, default=10_000)
            tp.add_argument("--exhaustive-cutoff", type=int, default=DEFAULT_EXHAUSTIVE_CUTOFF)

    for name in ("run", "sweep", "baseline"):
        _experiment_args(sub.add_parser(name))

    vc = sub.add_parser("verify-constants")
    vc.add_argument("--delta", type=Fraction, default=Fraction(2, 17))
    vc.add_argument("--kappa", type=Fraction, default=Fraction(1, 4000))
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        ns=tuple(args.n), seeds=harness.parse_seeds(args.seeds), kappa=args.kappa,
        delta=args.delta, tournament=args.tournament, oracle=args.oracle,
        base_seed=args.base_seed, verify=args.verify, strict_template=args.strict_template,
        audit_trials=args.audit_trials, workers=args.workers,
    )


def _template(args) -> int:
    if args.action == "gen":
        if args.n is None:
            raise InvalidParameterError("--n is required")
        g = generate_template(TemplateParams(args.n, args.kappa, args.seed))
        _emit(format_template(g), args.out)
        return EXIT_OK
    if args.infile:
        with open(args.infile) as fh:
            g = parse_template(fh.read())
    else:
        if args.n is None:
            raise InvalidParameterError("--n or --in is required")
        g = generate_template(TemplateParams(args.n, args.kappa, args.seed))
    report = audit_template(g, args.kappa, args.trials, args.seed, args.exhaustive_cutoff)
    params = TemplateParams(g.n, args.kappa, args.seed)
    payload = {
        "n": g.n, "kappa": float(args.kappa), "edges": len(g), "edge_budget": edge_budget(params),
        "mode": report.mode, "trials": report.trials, "violations": report.violations,
        "set_size": report.set_size,
    }
    _emit(json.dumps(payload) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_INVARIANT


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "template":
            return _template(args)
        if args.command == "verify-constants":
            report = verify_constants(args.delta, args.kappa)
            print("\n".join(report.lines()))
            return EXIT_OK if report.passed else EXIT_INVARIANT
        config = _config(args)
        if args.command == "run":
            records, violated = harness.cmd_run(config)
            _emit(harness.dump_jsonl(records), args.out)
        elif args.command == "sweep":
            text, violated = harness.cmd_sweep(config)
            _emit(text, args.out)
        else:
            text, violated = harness.cmd_baseline(config)
            _emit(text, args.out)
        return EXIT_INVARIANT if violated else EXIT_OK
    except OSError as exc:
        print(f"kingquery: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidParameterError as exc:
        print(f"kingquery: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
