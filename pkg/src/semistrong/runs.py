"""End-to-end reproductions of the bundled scenarios as analysis reports."""

from __future__ import annotations

import random
from fractions import Fraction

from . import scenarios as sc
from .bets import ActionBet, SetBet, decorate, lift, project_base
from .dominance import (
    compare,
    complete_with_best_bets,
    set_bet_violations,
    welfare_chain_check,
)
from .engine import (
    SearchConfig,
    bet_stats,
    enumerate_pure_nash,
    evaluate_deviation,
    semi_strong_search,
    verify_nash,
)
from .extension import build_extension, expected_bet_payoff, size_table
from .game import StrategyProfile, expected_utility
from .report import (
    AnalysisReport,
    certificate_dict,
    coverage_dict,
    deviation_dict,
    num,
    verdict_dict,
)
from .sampling import random_profile


def _span(game) -> dict:
    s = game.span()
    return {"m_min": num(s.m_min), "m_max": num(s.m_max), "m": num(s.m)}


def _ext_header(report: AnalysisReport, ext) -> None:
    report.construction = ext.spec.construction.value
    report.penalty_c = ext.spec.penalty_c
    report.span = _span(ext.base)
    report.sizes = [{k: num(v) if not isinstance(v, (str, bool)) and v is not None else v
                     for k, v in row.items()} for row in size_table(ext)]


def _projects_to(base, profile, sigma) -> bool:
    proj = project_base(profile)
    if proj.actions != base.actions:
        return False
    return proj.same_as(sigma)


def run_pirates(exact: bool = True) -> AnalysisReport:
    game = sc.pirates(exact)
    sigma = sc.pirates_sigma(game)
    top = AnalysisReport("pirates")

    rep = AnalysisReport("pirates: base game")
    rep.span = _span(game)
    u = expected_utility(game, sigma)
    rep.check("all-Cooperate utilities", u == [100] * 3, u, [100, 100, 100])
    cert = verify_nash(game, sigma)
    rep.nash = certificate_dict(game, cert)
    rep.check("all-Cooperate is Nash", cert.is_nash)
    eqs = enumerate_pure_nash(game)
    rep.check("pure Nash enumeration includes all-Cooperate", any(e.same_as(sigma) for e in eqs), len(eqs))
    dev = evaluate_deviation(game, sigma, (0, 1), [
        StrategyProfile.pure(game, ["Defect"] * 3).dists[0],
        StrategyProfile.pure(game, ["Defect"] * 3).dists[1],
    ])
    rep.deviations.append(deviation_dict(game, dev))
    rep.check("pair (Defect, Defect) earns 150 each", [dev.utilities[0], dev.utilities[1]] == [150, 150],
              [dev.utilities[0], dev.utilities[1]], [150, 150])
    rep.check("pair deviation is gaining and internally stable", dev.refutes)
    search = semi_strong_search(game, sigma, 2)
    rep.coverage.append(coverage_dict(search.coverage))
    rep.check("semi-strong search refutes all-Cooperate", not search.certified, len(search.refutations))
    top.children.append(rep)

    ext = build_extension(game, sigma, "normal-form-action-bets", 601)
    rep = AnalysisReport("pirates: action-bet extension")
    _ext_header(rep, ext)
    rep.check("14 actions per player", all(len(a) == 14 for a in ext.actions), [len(a) for a in ext.actions], 14)
    rep.notes.append("extended action sets exceed the closed-form size bound |A_i|*|P|*|A|_max = 12")
    lifted = ext.lifted_sigma()
    cert = verify_nash(ext, lifted)
    rep.nash = certificate_dict(ext, cert)
    rep.check("lifted all-Cooperate is Nash", cert.is_nash and cert.max_regret == 0, num(cert.max_regret), 0)
    base_dd = lift(ext.actions, StrategyProfile.pure(game, ["Defect", "Defect", "Cooperate"]))
    dev = evaluate_deviation(ext, sigma, (0, 1), [base_dd.dists[0], base_dd.dists[1]])
    rep.deviations.append(deviation_dict(ext, dev))
    cd = dev.counter_deviation
    rep.check("(Defect, Defect) has a profitable counter-deviation", cd is not None and cd.gain > 0,
              None if cd is None else num(cd.gain), 1)
    search = semi_strong_search(ext, sigma, 2)
    rep.coverage.append(coverage_dict(search.coverage))
    gaining = [r for r in search.reports if r.all_strictly_gain]
    rep.check("no internally stable gaining deviation", search.certified, len(search.refutations), 0)
    rep.check("every gaining deviation carries a counter-deviation",
              all(r.counter_deviation is not None and r.counter_deviation.gain > 0 for r in gaining), len(gaining))
    eqs = enumerate_pure_nash(ext)
    off = [e for e in eqs if not _projects_to(game, e, sigma)]
    rep.check("every pure equilibrium projects to all-Cooperate", not off, len(eqs))
    u_sig = expected_utility(ext, lifted)
    rep.check("all-Cooperate Pareto-dominates every pure equilibrium",
              all(compare(u_sig, expected_utility(ext, e)).pareto for e in eqs))
    top.children.append(rep)
    return _roll_up(top)


def run_majority(n: int = 3, exact: bool = True) -> AnalysisReport:
    game = sc.majority(n, exact)
    sigma = sc.uniform_sigma(game)
    top = AnalysisReport(f"majority (n={n})")

    rep = AnalysisReport("majority: base game")
    rep.span = _span(game)
    u = expected_utility(game, sigma)
    rep.check("uniform voting utilities", u == [Fraction(3, 4)] * n, u, ["3/4"] * n)
    rep.check("uniform voting is Nash", verify_nash(game, sigma).is_nash)
    eqs = enumerate_pure_nash(game)
    unanimous = [StrategyProfile.pure(game, [v] * n) for v in (0, 1)]
    rep.check("unanimous profiles are pure equilibria",
              all(any(e.same_as(x) for e in eqs) for x in unanimous), len(eqs))
    search = semi_strong_search(game, sigma, 2)
    rep.coverage.append(coverage_dict(search.coverage))
    pair = next((r for r in search.refutations if r.coalition == (0, 1)
                 and all(r.profile.dists[i][0][0] == 1 for i in (0, 1))), None)
    if pair is not None:
        rep.deviations.append(deviation_dict(game, pair))
    rep.check("pair voting 0 earns 1 against 3/4",
              pair is not None and all(pair.utilities[i] == 1 for i in (0, 1)),
              None if pair is None else [pair.utilities[0], pair.utilities[1]], [1, 1])
    rep.check("semi-strong search refutes uniform voting", not search.certified)
    top.children.append(rep)

    ext = build_extension(game, sigma, "normal-form-action-bets")
    rep = AnalysisReport("majority: action-bet extension")
    _ext_header(rep, ext)
    cert = verify_nash(ext, ext.lifted_sigma())
    rep.nash = certificate_dict(ext, cert)
    rep.check("lifted uniform voting is Nash", cert.is_nash and cert.max_regret == 0)
    search = semi_strong_search(ext, sigma, n)
    rep.coverage.append(coverage_dict(search.coverage))
    gaining = [r for r in search.reports if r.all_strictly_gain]
    rep.check("every gaining deviation has a counter-deviation",
              gaining and all(r.counter_deviation is not None and r.counter_deviation.gain > 0 for r in gaining),
              len(gaining))
    rep.check("no internally stable gaining deviation", search.certified)
    deviation = next(r for r in gaining if r.coalition == (0, 1))
    rep.deviations.append(deviation_dict(ext, deviation))

    # Internal stability would force every member to bet on fellow members,
    # so the load bound is checked on each gaining deviation saturated that way.
    bound = Fraction(1, ext.base.a_max)
    loads = []
    for r in gaining:
        saturated = saturate_member_bets(ext, r.profile, r.coalition)
        loads.append(bet_stats(ext, saturated, r.coalition).max_entry()[1])
    rep.check("some target receives at least 1/|A|_max expected bets",
              bool(loads) and min(loads) >= bound, num(min(loads)) if loads else None, num(bound))
    eqs = enumerate_pure_nash(ext)
    rep.check("no pure equilibrium of the extension projects away from uniform voting",
              all(_projects_to(game, e, sigma) for e in eqs), len(eqs))
    top.children.append(rep)
    return _roll_up(top)


def saturate_member_bets(ext, profile, coalition):
    """Keep each member's base play and add its best action bet on another member."""
    base_view = project_base(profile)
    plain = lift(ext.actions, base_view)
    choice = {}
    for i in coalition:
        per_type = []
        for t in range(len(ext.base.types[i])):
            options = [ActionBet(j, a) for j in coalition if j != i for a in ext.base.actions[j]]
            values = [expected_bet_payoff(ext, plain, i, b, t) for b in options]
            per_type.append(options[max(range(len(options)), key=values.__getitem__)])
        choice[i] = per_type
    return decorate(ext.actions, base_view, choice)


def run_parity(exact: bool = True, seed: int = 0, samples: int = 100) -> AnalysisReport:
    game = sc.parity(exact)
    sigma = sc.uniform_sigma(game)
    tau = sc.parity_tau(game)
    top = AnalysisReport("parity")

    rep = AnalysisReport("parity: base game")
    rep.span = _span(game)
    us, ut = expected_utility(game, sigma), expected_utility(game, tau)
    rep.check("uniform play utilities", us == [Fraction(1, 2)] * 3, us, ["1/2"] * 3)
    rep.check("play-own-type utilities", ut == [1] * 3, ut, [1, 1, 1])
    rep.check("both profiles are Nash", verify_nash(game, sigma).is_nash and verify_nash(game, tau).is_nash)
    top.children.append(rep)

    ext = build_extension(game, sigma, "profile-bets")
    rep = AnalysisReport("parity: profile-bet extension")
    _ext_header(rep, ext)
    rep.check("10 actions per player", all(len(a) == 10 for a in ext.actions), [len(a) for a in ext.actions], 10)
    rep.check("penalty is 32", ext.spec.penalty_c == 32, ext.spec.penalty_c, 32)
    rep.check("lifted uniform play is Nash", verify_nash(ext, ext.lifted_sigma()).max_regret == 0)
    cert = verify_nash(ext, lift(ext.actions, tau))
    rep.nash = certificate_dict(ext, cert)
    rep.check("lifted play-own-type is not Nash, regret at least 1/4",
              not cert.is_nash and cert.max_regret >= Fraction(1, 4), cert.max_regret, ">= 1/4")
    everyone = tuple(range(3))
    betting_tau = complete_with_best_bets(ext, tau, everyone)
    chain = welfare_chain_check(ext, None, betting_tau, everyone)
    rep.check("welfare chain holds for play-own-type with best bets", chain.holds, chain.min_slack)
    rep.check("each player nets 1 + 1/4 - 32", all(chain.decomposition[i][3] == Fraction(-123, 4) for i in everyone),
              [chain.decomposition[i][3] for i in everyone], "-123/4")
    rng = random.Random(seed)
    failures, min_slack = 0, None
    for _ in range(samples):
        base_tau = random_profile(game, rng)
        cand = complete_with_best_bets(ext, base_tau, everyone)
        ch = welfare_chain_check(ext, None, cand, everyone)
        if not ch.holds:
            failures += 1
        if ch.min_slack is not None:
            min_slack = ch.min_slack if min_slack is None else min(min_slack, ch.min_slack)
    rep.check(f"welfare chain holds on {samples} random deviations", failures == 0, min_slack, ">= 0")
    u_sig = expected_utility(ext, ext.lifted_sigma())
    v = compare(u_sig, expected_utility(ext, betting_tau))
    rep.dominance.append(verdict_dict(v, "play-own-type with best bets"))
    rep.check("uniform play quasi-Pareto-dominates play-own-type with bets", v.quasi_pareto)
    top.children.append(rep)
    return _roll_up(top)


def run_infinite_truncated(n: int = 100, exact: bool = True, small_n: int = 3) -> AnalysisReport:
    game = sc.truncated_infinite(n, exact)
    sigma = sc.zero_sigma(game)
    tau = sc.spread_tau(game)
    top = AnalysisReport(f"infinite-truncated (N={n})")

    rep = AnalysisReport("truncated game")
    rep.span = _span(game)
    rep.check("all-zero utilities", expected_utility(game, sigma) == [0, 0], expected_utility(game, sigma), [0, 0])
    rep.check("spread utilities", expected_utility(game, tau) == [1, 1], expected_utility(game, tau), [1, 1])
    rep.check("both profiles are Nash", verify_nash(game, sigma).is_nash and verify_nash(game, tau).is_nash)
    top.children.append(rep)

    ext = build_extension(game, sigma, "set-bets")
    rep = AnalysisReport("set-bet extension")
    _ext_header(rep, ext)
    if ext.spec.capped_players:
        rep.notes.append("set families capped to the equilibrium support and its complement")
    rep.check("loss constant is the utility span plus 1", ext.spec.penalty_c == ext.base.span().m + 1, ext.spec.penalty_c)
    lifted_tau = lift(ext.actions, tau)
    spread = tuple(range(1, n + 1))
    gain = expected_bet_payoff(ext, lifted_tau, 0, SetBet(1, spread))
    rep.check("bet on the other's nonzero actions gains exactly 1", gain == 1, gain, 1)
    cert = verify_nash(ext, lifted_tau)
    rep.nash = certificate_dict(ext, cert)
    rep.check("lifted spread profile is not Nash", not cert.is_nash, cert.max_regret)
    rep.check("lifted all-zero is Nash", verify_nash(ext, ext.lifted_sigma()).max_regret == 0)
    top.children.append(rep)

    small = sc.truncated_infinite(small_n, exact)
    small_sigma = sc.zero_sigma(small)
    small_ext = build_extension(small, small_sigma, "set-bets")
    rep = AnalysisReport(f"set-bet extension, full subset family (N={small_n})")
    _ext_header(rep, small_ext)
    search = semi_strong_search(small_ext, small_sigma, 2, SearchConfig(record_all=True))
    rep.coverage.append(coverage_dict(search.coverage))
    stable = [r for r in search.reports if r.internally_stable]
    bad = [r for r in stable if set_bet_violations(small_ext, r.profile, r.coalition)]
    rep.check("stable deviations bet on sets containing over-played and avoiding under-played actions",
              not bad, len(stable))
    rep.check("no internally stable gaining deviation", search.certified)
    top.children.append(rep)
    return _roll_up(top)


def run_random_bayesian(seed: int = 0, exact: bool = True) -> AnalysisReport:
    game, sigma = sc.random_bayesian(seed=seed, exact=exact)
    top = AnalysisReport(f"random-bayesian (seed={seed})")
    ext = build_extension(game, sigma, "profile-bets")
    rep = AnalysisReport("profile-bet extension")
    _ext_header(rep, ext)
    rep.check("|A_i| + |A| actions", all(len(ext.actions[i]) == len(game.actions[i]) + game.n_profiles
                                          for i in range(game.n_players)))
    cert = verify_nash(ext, ext.lifted_sigma())
    rep.nash = certificate_dict(ext, cert)
    rep.check("lifted equilibrium is Nash", cert.max_regret == 0)
    rng = random.Random(seed)
    everyone = tuple(range(game.n_players))
    fails = 0
    for _ in range(20):
        cand = complete_with_best_bets(ext, random_profile(game, rng), everyone)
        if not welfare_chain_check(ext, None, cand, everyone).holds:
            fails += 1
    rep.check("welfare chain holds on random deviations", fails == 0, fails, 0)
    top.children.append(rep)
    return _roll_up(top)


def _roll_up(report: AnalysisReport) -> AnalysisReport:
    report.verdict = "certified" if report.all_passed else "refuted"
    return report


RUNNERS = {
    "pirates": run_pirates,
    "majority": run_majority,
    "parity": run_parity,
    "infinite-truncated": run_infinite_truncated,
    "random-bayesian": run_random_bayesian,
}


def run(name: str, **params) -> AnalysisReport:
    if name == "all":
        top = AnalysisReport("all scenarios")
        for key, fn in RUNNERS.items():
            top.children.append(fn(**_params_for(key, params)))
        return _roll_up(top)
    if name not in RUNNERS:
        raise KeyError(name)
    return RUNNERS[name](**_params_for(name, params))


def _params_for(name: str, params: dict) -> dict:
    allowed = {
        "pirates": {"exact"},
        "majority": {"exact"},
        "parity": {"exact", "seed"},
        "infinite-truncated": {"exact", "n"},
        "random-bayesian": {"exact", "seed"},
    }[name]
    out = {k: v for k, v in params.items() if k in allowed and v is not None}
    return out
