"""Command line interface.

Exit codes: 0 when the checked property holds over the searched space,
1 when it is refuted (a witness is printed), 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import runs
from .documents import DocumentError, load_game, load_strategy, save_game, write_json_atomic
from .dominance import compare, complete_with_best_bets
from .engine import (
    SearchConfig,
    enumerate_pure_nash,
    semi_strong_search,
    support_enumeration_2p,
    verify_nash,
)
from .extension import Construction, ExtendedGame, ExtensionRefused, build_extension, size_table
from .game import GameError, expected_utility
from .bets import is_extended, lift
from .report import (
    AnalysisReport,
    certificate_dict,
    coverage_dict,
    deviation_dict,
    num,
    render_text,
    strategy_dict,
    verdict_dict,
)
from .scenarios import SCENARIOS

EXIT_OK, EXIT_REFUTED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _number(text: str):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _exact(args) -> bool:
    return args.arith == "rational"


def _tolerance(args):
    if args.tol is None:
        return None
    return args.tol if _exact(args) else float(args.tol)


def _load(args):
    game = load_game(args.game, _exact(args))
    sigma = _load_strategy(args.sigma, game)
    return game, sigma


def _load_strategy(path, game):
    """Strategies for an extended game may be written over base actions."""
    try:
        return load_strategy(path, game)
    except DocumentError:
        base = getattr(game, "base", None)
        if base is None:
            raise
        return lift(game.actions, load_strategy(path, base))


def _header(report: AnalysisReport, game) -> None:
    s = (game.base if isinstance(game, ExtendedGame) else game).span()
    report.span = {"m_min": num(s.m_min), "m_max": num(s.m_max), "m": num(s.m)}
    if isinstance(game, ExtendedGame):
        report.construction = game.spec.construction.value
        report.penalty_c = game.spec.penalty_c
        report.sizes = [{k: (num(v) if isinstance(v, (int, Fraction)) and not isinstance(v, bool) else v)
                         for k, v in row.items()} for row in size_table(game)]


def _emit(report: AnalysisReport, args) -> None:
    doc = report.to_dict()
    if getattr(args, "json", None):
        write_json_atomic(args.json, doc)
    print(render_text(doc))


def cmd_extend(args) -> int:
    game, sigma = _load(args)
    report = AnalysisReport(f"extend {args.game}")
    try:
        ext = build_extension(game, sigma, args.construction, args.c, tolerance=_tolerance(args))
    except ExtensionRefused as exc:
        report.verdict = "error"
        if exc.certificate is not None:
            report.nash = certificate_dict(game, exc.certificate)
        report.notes.append(str(exc))
        _emit(report, args)
        return EXIT_INPUT
    _header(report, ext)
    save_game(ext, args.out)
    report.notes.append(f"extended game written to {args.out}")
    _emit(report, args)
    return EXIT_OK


def _search_config(args) -> SearchConfig:
    return SearchConfig(grid=args.grid, tolerance=_tolerance(args), max_candidates=args.max_candidates)


def cmd_verify(args) -> int:
    game, sigma = _load(args)
    report = AnalysisReport(f"verify {args.mode}: {args.game}")
    _header(report, game)
    tol = _tolerance(args)
    cert = verify_nash(game, sigma, tol)
    report.nash = certificate_dict(game, cert)
    if args.mode == "nash":
        report.check("profile is Nash", cert.is_nash, num(cert.max_regret), 0)
        if not cert.is_nash:
            report.deviations.append({"unilateral": certificate_dict(game, cert)["players"]})
    elif args.mode == "semistrong":
        result = semi_strong_search(game, sigma, args.coalition_cap, _search_config(args))
        report.coverage.append(coverage_dict(result.coverage))
        for r in result.refutations:
            report.deviations.append(deviation_dict(game, r))
        if args.show_all:
            for r in result.reports:
                if not r.refutes:
                    report.deviations.append(deviation_dict(game, r))
        report.check("no internally stable gaining deviation in the searched space",
                     result.certified, len(result.refutations), 0)
        if result.coverage.partial:
            report.notes.append("search was partial; certification covers the evaluated candidates only")
    else:
        others = [_load_strategy(p, game) for p in args.against]
        if not others:
            others = _default_rivals(game, sigma)
            report.notes.append(f"compared against {len(others)} other pure equilibria"
                                + (" of the base game, with best bets attached" if is_extended(game.actions) else ""))
        u_sig = expected_utility(game, sigma)
        for k, other in enumerate(others):
            verdict = compare(u_sig, expected_utility(game, other), tol or 0)
            name = args.against[k] if args.against else f"rival equilibrium {k + 1}"
            report.dominance.append(verdict_dict(verdict, name))
            report.check(f"reference dominates {name}", verdict.dominates, verdict.relation)
    _emit(report, args)
    return EXIT_OK if report.all_passed else EXIT_REFUTED


def _default_rivals(game, sigma) -> list:
    """Other pure equilibria; for an extension, those of the base game played with bets."""
    if not isinstance(game, ExtendedGame):
        return [e for e in enumerate_pure_nash(game) if not e.same_as(sigma)]
    base_sigma = game.sigma
    rivals = [e for e in enumerate_pure_nash(game.base) if not e.same_as(base_sigma)]
    if game.spec.construction is Construction.PROFILE_BETS:
        everyone = range(game.n_players)
        return [complete_with_best_bets(game, e, everyone) for e in rivals]
    return [lift(game.actions, e) for e in rivals]


def cmd_enumerate(args) -> int:
    game = load_game(args.game, _exact(args))
    report = AnalysisReport(f"enumerate {args.method}: {args.game}")
    _header(report, game)
    if args.method == "pure":
        eqs = enumerate_pure_nash(game)
    else:
        result = support_enumeration_2p(game, _tolerance(args))
        eqs = list(result.equilibria)
        report.notes.append(f"{result.supports_checked} equal-size support pairs checked")
        if result.degenerate:
            report.notes.append(f"{len(result.degenerate)} degenerate support pairs; minimum-norm solutions used")
    for k, e in enumerate(eqs):
        plays = {str(game.players[i]): strategy_dict(game, i, e.dists[i]) for i in range(game.n_players)}
        utils = [num(u) for u in expected_utility(game, e)]
        report.notes.append(f"equilibrium {k + 1}: {json.dumps(plays)} utilities {json.dumps(utils)}")
    report.notes.append(f"{len(eqs)} equilibria found")
    _emit(report, args)
    return EXIT_OK


def cmd_scenarios(args) -> int:
    if args.action == "list":
        for name, sc in SCENARIOS.items():
            print(f"{name:20s} {sc.construction:26s} {sc.description}")
        return EXIT_OK
    if not args.name:
        raise InputError("scenarios run needs a scenario name or 'all'")
    if args.name != "all" and args.name not in runs.RUNNERS:
        raise InputError(f"unknown scenario {args.name!r}; try 'scenarios list'")
    report = runs.run(args.name, exact=_exact(args), seed=args.seed, n=args.n)
    _emit(report, args)
    return EXIT_OK if report.all_passed else EXIT_REFUTED


def cmd_report(args) -> int:
    try:
        with open(args.report) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", "/") from None
    if doc.get("schema_version") != 1 or "title" not in doc:
        raise DocumentError("not an analysis report", "/schema_version")
    print(render_text(doc))
    return EXIT_OK if _doc_passed(doc) else EXIT_REFUTED


def _doc_passed(doc: dict) -> bool:
    return all(c["passed"] for c in doc.get("checks", [])) and all(_doc_passed(c) for c in doc.get("children", []))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--arith", choices=("rational", "float"), default="rational")
    common.add_argument("--tol", type=_number, default=None, help="comparison tolerance (float mode default 1e-9)")
    common.add_argument("--json", metavar="PATH", help="also write the machine-readable report here")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--coalition-cap", type=int, default=None)
    search.add_argument("--grid", action="store_true", help="add two-point mixtures to the candidate space")
    search.add_argument("--max-candidates", type=int, default=200_000)
    search.add_argument("--show-all", action="store_true", help="list refuted deviations too")

    parser = argparse.ArgumentParser(prog="semistrong", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", parents=[common], help="build the betting extension around an equilibrium")
    p.add_argument("game")
    p.add_argument("sigma")
    p.add_argument("--construction", choices=[c.value for c in Construction], required=True)
    p.add_argument("--c", type=_number, default=None, help="penalty constant (default: smallest valid)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify", parents=[common, search], help="check Nash, semi-strong, or dominance")
    p.add_argument("game")
    p.add_argument("sigma")
    p.add_argument("--mode", choices=("nash", "semistrong", "dominance"), required=True)
    p.add_argument("--against", action="append", default=[], metavar="STRATEGY",
                   help="competing profile for dominance mode (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", parents=[common], help="list equilibria")
    p.add_argument("game")
    p.add_argument("--method", choices=("pure", "support"), default="pure")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("scenarios", parents=[common], help="bundled reproductions")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="truncation size for infinite-truncated")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("report", help="render a saved report")
    p.add_argument("report")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GameError, InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
