"""``bcslab`` command line.

Exit codes: 0 success, 1 negative answer (UNSAT, failed verification,
inconclusive certificate), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from typing import List, Optional

from . import assignments, bcs, games, reductions, rewrite, solvers

EXIT_OK, EXIT_NO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str) -> dict:
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package for a CLI output kind."""
    return json.loads(resources.files("bcslab").joinpath("schemas", f"{name}.json").read_text())


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _degree(args) -> int:
    if args.degree is not None:
        return args.degree
    env = os.environ.get("BCSLAB_DEGREE_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"BCSLAB_DEGREE_CAP must be an integer, got {env!r}") from None
    return rewrite.DEFAULT_DEGREE


def _values_json(values) -> dict:
    return {v: int(x) for v, x in values.items()}


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    b = bcs.parse_bcs(_read(args.file))
    sys.stdout.write(bcs.serialize_bcs(b))
    return EXIT_OK


def _emit_bcs(b: bcs.Bcs, emit: str) -> None:
    if emit == "game":
        _emit(games.game_to_json(bcs.derive_game(b)))
    else:
        sys.stdout.write(bcs.serialize_bcs(b))


def cmd_gen(args) -> int:
    what = args.what
    if what == "magic-square":
        b = bcs.magic_square()
        if args.emit == "assignment":
            _emit(assignments.assignment_bundle(b, assignments.mermin_peres_assignment()))
        else:
            _emit_bcs(b, args.emit)
    elif what == "clifford":
        if args.rank is None:
            raise UsageError("gen clifford needs --rank")
        try:
            b, a = assignments.clifford_bcs(args.rank)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.emit in ("bcs", "game"):
            _emit_bcs(b, args.emit)
        else:
            _emit(assignments.assignment_bundle(b, a))
    elif what == "chsh":
        g = games.chsh_game()
        if args.emit == "bcs":
            sys.stdout.write(bcs.serialize_bcs(reductions.game_to_bcs(g)))
        elif args.emit == "strategy":
            _emit(games.chsh_optimal_strategy().to_json())
        else:
            _emit(games.game_to_json(g))
    elif what == "coloring-bcs":
        if not args.input:
            raise UsageError("gen coloring-bcs needs --input GRAPH")
        g = reductions.parse_graph(_read(args.input), args.k)
        _emit_bcs(reductions.coloring_to_bcs(g), args.emit)
    elif what == "ks-bcs":
        if not args.input:
            raise UsageError("gen ks-bcs needs --input SETS")
        sets, universe = [], []
        for line in _read(args.input).splitlines():
            items = line.split("#", 1)[0].split()
            if items:
                sets.append(items)
                universe.extend(x for x in items if x not in universe)
        _emit_bcs(reductions.ks_to_bcs(sets, universe), args.emit)
    return EXIT_OK


def cmd_solve(args) -> int:
    b = bcs.parse_bcs(_read(args.file))
    method = args.method or "classical"
    solver = {
        "classical": bcs.classical_solve_bruteforce,
        "2sat": solvers.solve_2sat,
        "horn": solvers.solve_hornsat,
        "parity": solvers.solve_parity_gf2,
    }[method]
    values = solver(b)
    if values is None:
        _emit({"sat": False, "method": method})
        return EXIT_NO
    _emit({"sat": True, "method": method, "assignment": _values_json(values)})
    return EXIT_OK


def cmd_reduce(args) -> int:
    b = bcs.parse_bcs(_read(args.file))
    if args.harden:
        target, trace = reductions.harden_3sat(b)
    elif args.occ_limit is not None:
        target, trace = reductions.occurrence_reduce(b, args.occ_limit)
    elif args.to == "3coloring":
        target, trace = reductions.reduce_3sat_to_3coloring(b)
    elif args.to == "1in3":
        target, trace = reductions.reduce_3sat_to_1in3(b)
    elif args.to == "3sat":
        target, trace = reductions.reduce_ksat_to_3sat(b)
    else:
        raise UsageError("reduce needs one of --to, --harden, --occ-limit")
    if args.trace:
        _emit(trace.to_json())
    elif isinstance(target, reductions.ColoringInstance):
        sys.stdout.write(reductions.serialize_graph(target))
    else:
        sys.stdout.write(bcs.serialize_bcs(target))
    return EXIT_OK


def cmd_verify(args) -> int:
    b, a = assignments.load_bundle(_read_json(args.assignment))
    if args.bcs:
        b = bcs.parse_bcs(_read(args.bcs))
    if b is None:
        raise UsageError("assignment file carries no BCS; pass --bcs FILE")
    report = assignments.verify_assignment(b, a, args.tol)
    _emit(report.to_json())
    return EXIT_OK if report.passed else EXIT_NO


_GADGETS = {
    "prism": reductions.prism_gadget,
    "onein3": reductions.onein3_gadget,
    "magic-square": bcs.magic_square,
    "triangle": reductions.triangle_bcs,
}


def cmd_certify(args) -> int:
    if args.gadget in _GADGETS:
        gadget = _GADGETS[args.gadget]()
    else:
        gadget = bcs.parse_bcs(_read(args.gadget))
    pair = tuple(p.strip() for p in args.pair.split(","))
    if len(pair) != 2 or not all(pair):
        raise UsageError("--pair expects U,V")
    kind = "anticommute" if args.anticommute else "commute"
    cert = rewrite.certify_gadget(gadget, pair, kind, _degree(args))
    if isinstance(cert, rewrite.Inconclusive):
        _emit({"inconclusive": True, "kind": kind, "pair": list(pair), "degree": cert.degree,
               "target": cert.target.to_text(), "residue": cert.residue.to_text()})
        return EXIT_NO
    _emit(cert.to_json())
    return EXIT_OK


def _load_game(path: str) -> bcs.GameSpec:
    text = _read(path)
    try:
        return games.game_from_json(json.loads(text))
    except json.JSONDecodeError:
        return bcs.derive_game(bcs.parse_bcs(text))


def cmd_simulate(args) -> int:
    data = _read_json(args.strategy)
    if "rep" in data:
        b, a = assignments.load_bundle(data)
        if b is None:
            raise UsageError("assignment bundle carries no BCS")
        strategy = games.strategy_from_assignment(b, a)
        game = _load_game(args.game) if args.game else bcs.derive_game(b)
    else:
        if not args.game:
            raise UsageError("simulate needs --game with a strategy file")
        strategy = games.Strategy.from_json(data)
        game = _load_game(args.game)
    value = games.game_value(game, strategy)
    sys.stdout.write(f"{value:.12g}\n")
    return EXIT_OK


def cmd_value(args) -> int:
    game = _load_game(args.game)
    v = solvers.classical_game_value(game)
    _emit({"value": str(v), "float": float(v)})
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcslab", description="Binary constraint system toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse a BCS file and print its canonical form")
    sp.add_argument("file", nargs="?", default="-")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("gen", help="generate built-in instances")
    sp.add_argument("what", choices=["magic-square", "clifford", "chsh", "coloring-bcs", "ks-bcs"])
    sp.add_argument("--rank", type=int)
    sp.add_argument("--input", help="graph file (coloring-bcs) or set list (ks-bcs)")
    sp.add_argument("--k", type=int, default=3, help="colour count for coloring-bcs")
    sp.add_argument("--emit", choices=["default", "bcs", "game", "assignment", "strategy"], default="default")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="decide classical satisfiability")
    sp.add_argument("file", nargs="?", default="-")
    m = sp.add_mutually_exclusive_group()
    for name in ("classical", "2sat", "horn", "parity"):
        m.add_argument(f"--{name}", dest="method", action="store_const", const=name)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("reduce", help="apply a reduction")
    sp.add_argument("file", nargs="?", default="-")
    m = sp.add_mutually_exclusive_group(required=True)
    m.add_argument("--to", choices=["3coloring", "1in3", "3sat"])
    m.add_argument("--harden", action="store_true")
    m.add_argument("--occ-limit", type=int)
    sp.add_argument("--trace", action="store_true", help="print the reduction trace as JSON")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("verify", help="verify an operator assignment")
    sp.add_argument("--assignment", required=True)
    sp.add_argument("--bcs")
    sp.add_argument("--tol", type=float, default=assignments.DEFAULT_TOL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("certify", help="certify a gadget commutation relation")
    sp.add_argument("--gadget", required=True, help="prism, onein3, magic-square, triangle or a BCS file")
    sp.add_argument("--pair", required=True)
    sp.add_argument("--anticommute", action="store_true")
    sp.add_argument("--degree", type=int)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("simulate", help="winning probability of a fixed strategy")
    sp.add_argument("--game")
    sp.add_argument("--strategy", required=True, help="strategy JSON or assignment bundle")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("value", help="exact classical value of a game")
    sp.add_argument("--classical", action="store_true", required=True)
    sp.add_argument("--game", required=True)
    sp.set_defaults(func=cmd_value)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, bcs.BcsError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"bcslab: error: {msg}\n")
        return EXIT_USAGE


def run(argv: List[str]) -> int:
    """Entry point for embedding; never raises SystemExit for argument errors."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
