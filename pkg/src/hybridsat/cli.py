"""Command-line entry point: ``hybridsat <command> [options]``.

Commands: solve, rates, experiment, gen, count, trace, markov.
Options may also come from a JSON file given with ``--config``; flags given
on the command line win. ``solve`` exits 10 when a model is found and 20
otherwise; any error prints a JSON object and exits 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._config import ENUM_LIMIT_ENV
from .cnf import (
    count_solutions,
    default_clause_count,
    format_assignment,
    generate_planted,
    generate_random,
    parse_dimacs,
    serialize_dimacs,
)
from .params import ALL_SCHEMES

EXIT_FOUND = 10
EXIT_NOT_FOUND = 20
EXIT_ERROR = 1

TOOL = "hybridsat"
STOCHASTIC = {"solve", "experiment", "gen"}
EXPERIMENTS = ("fig6", "fig7", "markov-vs-empirical")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _knob(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"knob {key!r} needs a number, got {value!r}") from None


def _common(p):
    p.add_argument("--config", help="JSON file with option values; flags win")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--enum-limit", type=int, help="maximum variable count for exhaustive sweeps")


def _formula_source(p):
    p.add_argument("--cnf", help="DIMACS file")
    p.add_argument("--gen", choices=("random", "planted"), help="generate the formula instead")
    p.add_argument("-n", type=int, help="variables for --gen")
    p.add_argument("--clauses", type=int, help="clauses for --gen (default round(4.55 n))")
    p.add_argument("--unique", action="store_true", default=None, help="planted with a unique model")
    p.add_argument("--gen-seed", type=int, help="generator seed (default --seed)")


def build_parser() -> _Parser:
    parser = _Parser(prog=TOOL, description="Hybrid classical/Grover Schoening walk toolkit")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run a solving scheme on one formula")
    _common(p)
    _formula_source(p)
    p.add_argument("--scheme", choices=ALL_SCHEMES, default="classical")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--schedule", choices=("optimal", "calibrated"), default="optimal")
    p.add_argument("--knob", type=_knob, action="append", default=None, help="scheme knob KEY=VALUE")
    p.add_argument("--walks", type=int, help="classical outer loop count override")
    p.add_argument("--steps", type=int, help="walk length override")

    p = sub.add_parser("rates", help="rate trade-off curves as CSV")
    _common(p)
    p.add_argument("--scheme", action="append", choices=("classical", "GI", "GW", "FGI", "FGW", "EFG"))
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--line", action="store_true", default=None, help="include the lower-bound line")

    p = sub.add_parser("experiment", help="experiment drivers")
    _common(p)
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("-n", type=int)
    p.add_argument("-m", type=int, help="walk length (markov-vs-empirical)")
    p.add_argument("--mu", type=float, default=3.0, help="walk length ratio m/n")
    p.add_argument("--clauses", type=int)
    p.add_argument("--formulas", type=int, default=10)
    p.add_argument("--unique", action="store_true", default=None)
    p.add_argument("--table", choices=("rows", "bins"), default="rows", help="fig6 output table")
    p.add_argument("--h-max", type=int, default=6)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--walks", type=int, default=10_000)

    p = sub.add_parser("gen", help="write a generated formula plus a JSON sidecar")
    _common(p)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--planted", action="store_true", default=None)
    kind.add_argument("--random", action="store_true", default=None)
    p.add_argument("-n", type=int)
    p.add_argument("--clauses", type=int)
    p.add_argument("--unique", action="store_true", default=None)

    p = sub.add_parser("count", help="print the number of models of a DIMACS file")
    _common(p)
    p.add_argument("cnf", nargs="?")

    p = sub.add_parser("trace", help="one walk as JSON")
    _common(p)
    p.add_argument("--cnf")
    p.add_argument("--x0", help="start assignment, variable 1 first")
    p.add_argument("--tape", help="walk symbols 0/1/2")
    p.add_argument("-m", type=int, help="random tape length when --tape is absent")

    p = sub.add_parser("markov", help="integer-walk and absorbing-walk success per start distance, as CSV")
    _common(p)
    p.add_argument("-n", type=int)
    p.add_argument("-m", type=int)
    p.add_argument("--exact", action="store_true", default=None)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise AssertionError("no subcommands")


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise CliError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        sub = _subparser(parser, args.command)
        dests = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - dests - {"knobs", "command"})
        if unknown:
            raise CliError(f"unknown config keys for {args.command}: {unknown}")
        knobs = cfg.pop("knobs", None)
        cfg.pop("command", None)
        # config values become defaults, so anything typed on the command line wins
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
        if knobs is not None and hasattr(args, "knob"):
            merged = {k: float(v) for k, v in knobs.items()}
            merged.update(dict(args.knob or []))
            args.knob = sorted(merged.items())
    if args.command in STOCHASTIC and args.seed is None:
        raise CliError(f"{args.command} requires --seed")
    if args.workers < 1:
        raise CliError("--workers must be at least 1")
    return args


# -- output helpers ---------------------------------------------------------------


def _header(args) -> str:
    return f"tool={TOOL} version={__version__} seed={'none' if args.seed is None else args.seed}"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj) -> None:
    _emit(args, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _csv(args, rows, fields, comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# {_header(args)}\n")
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _base(args) -> dict:
    return {"tool": TOOL, "version": __version__, "seed": args.seed}


def _load_formula(args):
    if args.cnf and getattr(args, "gen", None):
        raise CliError("give either --cnf or --gen, not both")
    if args.cnf:
        return parse_dimacs(Path(args.cnf).read_bytes()), {"source": args.cnf}, None
    if getattr(args, "gen", None):
        if args.n is None:
            raise CliError("--gen needs -n")
        gseed = args.seed if args.gen_seed is None else args.gen_seed
        L = default_clause_count(args.n) if args.clauses is None else args.clauses
        x_star = None
        if args.gen == "planted":
            f, x_star = generate_planted(args.n, L, gseed, unique=bool(args.unique))
        else:
            f = generate_random(args.n, L, gseed)
        desc = {"source": args.gen, "gen_seed": gseed, "unique": bool(args.unique)}
        return f, desc, x_star
    raise CliError("a formula is required: --cnf PATH or --gen KIND -n N")


# -- commands ----------------------------------------------------------------------


def cmd_solve(args) -> int:
    from .hybrid import derive_params, run_scheme

    f, desc, x_star = _load_formula(args)
    knobs = dict(args.knob or [])
    if args.steps is not None:
        knobs["m"] = args.steps
    params = derive_params(args.scheme, f, args.epsilon, **knobs)
    if args.walks is not None:
        if args.scheme != "classical":
            raise CliError("--walks applies to the classical scheme only")
        params = params.with_updates(N=args.walks)
    run = run_scheme(args.scheme, f, params, seed=args.seed, schedule=args.schedule)
    report = run.to_dict()
    report["command"] = "solve"
    report["formula"] = dict(desc, n=f.n, L=f.L)
    if x_star is not None:
        report["formula"]["planted"] = format_assignment(x_star)
    _emit_json(args, report)
    return EXIT_FOUND if run.found else EXIT_NOT_FOUND


def cmd_rates(args) -> int:
    from .rates import GAMMA_C, RatePoint, _anchor_points, line_l, to_csv, tradeoff_curve

    schemes = args.scheme or ["classical", "GI", "GW", "FGI", "FGW", "EFG"]
    pts = []
    for s in dict.fromkeys(schemes):
        pts += tradeoff_curve(s, args.grid)
    if args.line:
        pts += [RatePoint("L", c, line_l(c), {}) for c in np.linspace(0, GAMMA_C / 2, args.grid)]
    pts += [RatePoint("anchor-" + a.scheme, a.chi, a.gamma, a.params) for a in _anchor_points()]
    pts = sorted(pts, key=lambda p: (p.chi, p.gamma, p.scheme))
    text = to_csv(pts, header_comment=_header(args) + f" grid={args.grid}")
    _emit(args, text)
    return 0


def cmd_experiment(args) -> int:
    from . import experiments as ex

    if args.name == "fig6":
        if args.n is None:
            raise CliError("fig6 needs -n")
        rows = ex.fig6(args.n, args.formulas, args.seed, args.mu, args.clauses, bool(args.unique), args.workers)
        if args.table == "bins":
            text = _csv(args, ex.fig6_bins(rows), ["t0_bin", "count", "median_rate", "mean_rate"])
        else:
            text = _csv(args, rows, ["index", "formula_seed", "t0", "rate", "oracle_fraction"])
    elif args.name == "fig7":
        if args.n is None:
            raise CliError("fig7 needs -n")
        rows, summary = ex.fig7(args.n, args.h_max, args.samples, args.seed, args.mu, args.clauses)
        text = _csv(
            args,
            rows,
            ["h", "estimate", "stderr", "theory", "samples"],
            comments=[f"n={summary['n']} L={summary['L']} slope={summary['slope']!r}"],
        )
    else:
        if args.n is None:
            raise CliError("markov-vs-empirical needs -n")
        m = args.m if args.m is not None else args.n
        rows = ex.markov_vs_empirical(args.n, m, args.instances, args.walks, args.seed, args.clauses, args.workers)
        text = _csv(
            args,
            rows,
            ["index", "formula_seed", "n", "m", "empirical", "stderr", "absorbing", "z_walk_bound", "z_score"],
        )
    _emit(args, text)
    return 0


def cmd_gen(args) -> int:
    if args.n is None:
        raise CliError("gen needs -n")
    if not args.out:
        raise CliError("gen needs --out")
    L = default_clause_count(args.n) if args.clauses is None else args.clauses
    side = dict(_base(args), n=args.n, L=L)
    if args.random:
        if args.unique:
            raise CliError("--unique applies to planted formulas only")
        f = generate_random(args.n, L, args.seed)
        side.update(kind="random")
    else:
        f, x_star = generate_planted(args.n, L, args.seed, unique=bool(args.unique))
        side.update(kind="planted", unique=bool(args.unique), planted=format_assignment(x_star))
    Path(args.out).write_bytes(serialize_dimacs(f))
    Path(args.out + ".json").write_text(json.dumps(side, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_count(args) -> int:
    if not args.cnf:
        raise CliError("count needs a DIMACS path")
    f = parse_dimacs(Path(args.cnf).read_bytes())
    _emit(args, f"{count_solutions(f)}\n")
    return 0


def cmd_trace(args) -> int:
    from .cnf import as_assignment
    from .rng import generator
    from .walk import schoening_walk

    if not args.cnf:
        raise CliError("trace needs --cnf")
    f = parse_dimacs(Path(args.cnf).read_bytes())
    if args.x0 is None or args.tape is None:
        if args.seed is None:
            raise CliError("a random start or tape requires --seed")
    x0 = (
        as_assignment(args.x0, f.n)
        if args.x0 is not None
        else generator(args.seed, "trace-x").integers(0, 2, size=f.n, dtype=np.uint8)
    )
    if args.tape is not None:
        w = [int(c) for c in args.tape]
    else:
        if args.m is None:
            raise CliError("trace needs --tape or -m")
        w = generator(args.seed, "trace-w").integers(0, 3, size=args.m, dtype=np.uint8)
    tr = schoening_walk(f, x0, w)
    out = dict(
        _base(args),
        n=f.n,
        tape="".join(str(int(s)) for s in w),
        states=[format_assignment(s) for s in tr.states],
        hit_step=tr.hit_step,
    )
    _emit_json(args, out)
    return 0


def cmd_markov(args) -> int:
    from .markov import absorbing_law, z_walk_success_given

    if args.n is None or args.m is None:
        raise CliError("markov needs -n and -m")
    exact = bool(args.exact)
    rows = []
    for j in range(args.n + 1):
        free = z_walk_success_given(j, args.m, exact=exact)
        absorbed = absorbing_law(j, args.m, exact=exact)[0]
        if exact:
            free, absorbed = str(free), str(absorbed)
        rows.append({"n": args.n, "m": args.m, "j": j, "probability": free, "absorbing": absorbed})
    _emit(args, _csv(args, rows, ["n", "m", "j", "probability", "absorbing"]))
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "rates": cmd_rates,
    "experiment": cmd_experiment,
    "gen": cmd_gen,
    "count": cmd_count,
    "trace": cmd_trace,
    "markov": cmd_markov,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    seed = None
    saved_limit = os.environ.get(ENUM_LIMIT_ENV)
    try:
        args = parse_args(argv)
        seed = args.seed
        if args.enum_limit is not None:
            if args.enum_limit < 1:
                raise CliError("--enum-limit must be positive")
            os.environ[ENUM_LIMIT_ENV] = str(args.enum_limit)
        return COMMANDS[args.command](args)
    except SystemExit:
        raise
    except Exception as exc:
        err = {"tool": TOOL, "version": __version__, "seed": seed, "error": type(exc).__name__, "message": str(exc)}
        sys.stdout.write(json.dumps(err, sort_keys=True) + "\n")
        return EXIT_ERROR
    finally:
        # worker processes inherit the limit while the command runs; the caller's environment is restored after
        if saved_limit is None:
            os.environ.pop(ENUM_LIMIT_ENV, None)
        else:
            os.environ[ENUM_LIMIT_ENV] = saved_limit


if __name__ == "__main__":
    sys.exit(main())
