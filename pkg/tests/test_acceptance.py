"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; conftest prints them at the end of the
run.  Randomized sweeps use fixed seeds so reruns are identical.
"""

import itertools
import random
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from oracles import brute_expected_utility, reference_hit_probability, subsets_quasi_pareto
from semistrong import scenarios as sc
from semistrong.bets import ExtendedAction, SetBet, lift, project_base
from semistrong.cli import EXIT_REFUTED, main
from semistrong.documents import load_game, load_strategy
from semistrong.dominance import (
    bound_checks,
    compare,
    complete_with_best_bets,
    set_bet_violations,
    welfare_chain_check,
)
from semistrong.engine import (
    SearchConfig,
    bet_stats,
    enumerate_pure_nash,
    evaluate_deviation,
    semi_strong_search,
    verify_nash,
)
from semistrong.extension import build_extension, expected_bet_payoff, size_table
from semistrong.game import StrategyProfile, expected_utility, pure_strategy_dists
from semistrong.runs import saturate_member_bets
from semistrong.sampling import random_profile

DATA = resources.files("semistrong") / "data"
RESULTS = []


def _plain(values):
    return "[" + ", ".join(str(v) for v in values) + "]"


def verdict(number, title, ok, detail=""):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- shared extensions -------------------------------------------------------

BUNDLED = {
    "pirates": ("pirates.json", "pirates.cooperate.json"),
    "pirates-betray": ("pirates-betray.json", "pirates-betray.cooperate.json"),
    "majority": ("majority.json", "majority.uniform.json"),
    "parity": ("parity.json", "parity.uniform.json"),
    "infinite-truncated-10": ("infinite-truncated-10.json", "infinite-truncated-10.zero.json"),
    "matching-pennies": ("matching-pennies.json", "matching-pennies.uniform.json"),
    "random-bayesian": ("random-bayesian.json", "random-bayesian.equilibrium.json"),
}


@lru_cache(maxsize=None)
def bundled(name, exact=True):
    game_file, sigma_file = BUNDLED[name]
    game = load_game(DATA / game_file, exact=exact)
    return game, load_strategy(DATA / sigma_file, game)


def _constructions(game):
    out = []
    if game.is_normal_form:
        out.append("normal-form-action-bets")
    elif game.has_independent_types():
        out.append("independent-action-bets")
    out.append("profile-bets")
    return out


@lru_cache(maxsize=None)
def extensions(exact=True):
    """Every extension the criteria touch, keyed by (scenario, construction)."""
    out = {}
    for name in BUNDLED:
        game, sigma = bundled(name, exact)
        for construction in _constructions(game):
            c = 601 if name == "pirates" and construction == "normal-form-action-bets" else None
            out[(name, construction)] = build_extension(game, sigma, construction, c)
    for n in (3, 100):
        game = sc.truncated_infinite(n, exact)
        out[(f"infinite-truncated-{n}", "set-bets")] = build_extension(game, sc.zero_sigma(game), "set-bets")
    for name in ("majority", "matching-pennies"):
        game, sigma = bundled(name, exact)
        out[(name, "set-bets")] = build_extension(game, sigma, "set-bets")
    game, sigma = sc.random_bayesian(13, correlated=False, exact=exact)
    out[("random-independent", "independent-action-bets")] = build_extension(
        game, sigma, "independent-action-bets")
    return out


# -- 1 -------------------------------------------------------------------------


def test_01_pirates_reproduction(tmp_path):
    game, sigma = bundled("pirates")
    dd = StrategyProfile.pure(game, ["Defect", "Defect", "Cooperate"])
    base_dev = evaluate_deviation(game, sigma, (0, 1), [dd.dists[0], dd.dists[1]])
    base_ok = (list(base_dev.utilities[:2]) == [150, 150] and list(base_dev.reference_utilities[:2]) == [100, 100]
               and base_dev.refutes)
    code = main(["verify", str(DATA / "pirates.json"), str(DATA / "pirates.cooperate.json"),
                 "--mode", "semistrong", "--coalition-cap", "2", "--json", str(tmp_path / "r.json")])
    ext = extensions()[("pirates", "normal-form-action-bets")]
    lifted = lift(ext.actions, dd)
    ext_dev = evaluate_deviation(ext, sigma, (0, 1), [lifted.dists[0], lifted.dists[1]])
    cd = ext_dev.counter_deviation
    ok = (base_ok and code == EXIT_REFUTED and ext.spec.penalty_c == 601 and cd is not None and cd.gain > 0
          and isinstance(cd.gain, Fraction))
    verdict(1, "pirates: pair defection stable in the base game, countered with C=601", ok,
            f"base {_plain(base_dev.utilities[:2])} vs {_plain(base_dev.reference_utilities[:2])}, exit {code}, "
            f"counter gain {None if cd is None else cd.gain} by player {None if cd is None else cd.member + 1} via {None if cd is None else cd.method}")


# -- 2 -------------------------------------------------------------------------


def _identity_sweep(oracle_exts, run_exts, n_profiles, seed):
    """Compare expected bet payoffs in ``run_exts`` with the exact oracle on ``oracle_exts``."""
    rng = random.Random(seed)
    worst, failures = 0.0, []
    keys = sorted(oracle_exts)
    for k in range(n_profiles):
        key = keys[k % len(keys)]
        ext, run_ext = oracle_exts[key], run_exts[key]
        base, sigma = ext.base, ext.spec.reference_equilibrium
        prof = random_profile(ext, rng, support=rng.randint(1, 3))
        run_prof = prof if run_ext.exact else prof.to_float()
        proj = project_base(prof)
        for bettor in range(base.n_players):
            # a self-bet's win term depends on the bettor's own play, which the identity leaves out
            bets = [a.bet for a in ext.actions[bettor]
                    if a.bet is not None and getattr(a.bet, "target", None) != bettor]
            bet = rng.choice(bets)
            t = rng.randrange(len(base.types[bettor]))
            got = expected_bet_payoff(run_ext, run_prof, bettor, bet, t)
            want = (reference_hit_probability(base, proj, bettor, t, bet)
                    - reference_hit_probability(base, sigma, bettor, t, bet))
            if run_ext.exact:
                bad = got != want
            else:
                err = abs(got - float(want))
                worst = max(worst, err)
                bad = err > 1e-9
            if bad:
                failures.append((key, bettor, bet))
    return failures, worst


def test_02_bet_payoff_identity():
    exact_exts, float_exts = extensions(True), extensions(False)
    n = 1050
    fail_exact, _ = _identity_sweep(exact_exts, exact_exts, n, 2)
    fail_float, worst = _identity_sweep(exact_exts, float_exts, n, 3)
    ok = not fail_exact and not fail_float
    verdict(2, "expected bet payoff equals hit-probability shift", ok,
            f"{n} exact and {n} float profiles over {len(exact_exts)} extensions, "
            f"{len(fail_exact)} exact mismatches, max float error {worst:.2e}")


# -- 3 -------------------------------------------------------------------------


def test_03_lifted_sigma_zero_regret():
    regrets = {k: verify_nash(ext, ext.lifted_sigma()).max_regret for k, ext in extensions().items()}
    bad = {k: v for k, v in regrets.items() if v != 0}
    verdict(3, "lifted bet-free equilibrium has zero regret in every extension", not bad,
            f"{len(regrets)} extensions, nonzero: {bad or 'none'}")


# -- 4 -------------------------------------------------------------------------


def test_04_parity():
    game, sigma = bundled("parity")
    tau = sc.parity_tau(game)
    half = Fraction(1, 2)
    base_ok = expected_utility(game, sigma) == [half] * 3 and expected_utility(game, tau) == [1, 1, 1]
    ext = extensions()[("parity", "profile-bets")]
    regret = verify_nash(ext, lift(ext.actions, tau)).max_regret
    everyone = (0, 1, 2)
    chains = [welfare_chain_check(ext, None, complete_with_best_bets(ext, tau, everyone), everyone)]
    rng = random.Random(4)
    coalitions = [c for k in (2, 3) for c in itertools.combinations(everyone, k)]
    for _ in range(100):
        coalition = rng.choice(coalitions)
        dev = random_profile(game, rng, players=coalition, base=sigma, support=rng.randint(1, 2))
        chains.append(welfare_chain_check(ext, None, complete_with_best_bets(ext, dev, coalition), coalition))
    slacks = [link.slack for ch in chains for link in ch.links if link.applicable]
    ok = (base_ok and ext.spec.penalty_c == 32 and regret >= Fraction(1, 4)
          and all(ch.holds for ch in chains) and min(slacks) >= 0
          and all(ch.total <= ch.reference_total for ch in chains))
    verdict(4, "parity: values, lifted play-own-type regret, welfare chain", ok,
            f"u(sigma)={_plain(expected_utility(game, sigma))}, u(tau)={_plain(expected_utility(game, tau))}, "
            f"regret {regret}, {len(chains)} chains, min slack {min(slacks)}")


# -- 5 -------------------------------------------------------------------------


def test_05_majority():
    game, sigma = bundled("majority")
    ref = Fraction(3, 4)
    pair_gains = []
    for coalition in itertools.combinations(range(3), 2):
        for choice in itertools.product(range(2), repeat=2):
            prof = sigma
            for i, a in zip(coalition, choice):
                prof = prof.replace(i, pure_strategy_dists(game, i, (a,)))
            us = [brute_expected_utility(game, prof, i) for i in coalition]
            if all(u > ref for u in us):
                pair_gains.append(us)
    base_ok = (all(brute_expected_utility(game, sigma, i) == ref for i in range(3))
               and len(pair_gains) == 6 and all(us == [1, 1] for us in pair_gains))
    ext = extensions()[("majority", "normal-form-action-bets")]
    search = semi_strong_search(ext, sigma, 3)
    gaining = [r for r in search.reports if r.all_strictly_gain]
    countered = all(r.counter_deviation is not None and r.counter_deviation.gain > 0 for r in gaining)
    bound = Fraction(1, game.a_max)
    loads = [bet_stats(ext, saturate_member_bets(ext, r.profile, r.coalition), r.coalition).max_entry()[1]
             for r in gaining]
    ok = base_ok and bool(gaining) and countered and search.certified and min(loads) >= bound
    verdict(5, "majority: pairs gain 1 over 3/4, every gain countered, bet load >= 1/2", ok,
            f"{len(pair_gains)} gaining pure pair deviations, {len(gaining)} gaining extended deviations, "
            f"min saturated load {min(loads) if loads else None}")


# -- 6 -------------------------------------------------------------------------


def test_06_off_equilibrium_profiles():
    rng = random.Random(6)
    notes, ok = [], True
    for key in (("majority", "normal-form-action-bets"), ("pirates", "normal-form-action-bets")):
        ext = extensions()[key]
        sigma = ext.spec.reference_equilibrium
        u_sig = expected_utility(ext, ext.lifted_sigma())
        eqs = enumerate_pure_nash(ext)
        off = [e for e in eqs if not project_base(e).same_as(sigma)]
        bad_eq = [e for e in off if compare(expected_utility(ext, e), u_sig).pareto]
        tried, bad = 0, 0
        while tried < 5000:
            cand = random_profile(ext, rng, support=rng.randint(1, 3))
            if project_base(cand).same_as(sigma):
                continue
            tried += 1
            if verify_nash(ext, cand).is_nash and not compare(u_sig, expected_utility(ext, cand)).pareto:
                bad += 1
        ok = ok and not bad_eq and not bad
        notes.append(f"{key[0]}: {len(eqs)} pure NE, {len(off)} off sigma, {tried} samples, {bad} violations")
    verdict(6, "no off-equilibrium Nash profile matches or beats the equilibrium", ok, "; ".join(notes))


# -- 7 -------------------------------------------------------------------------


def test_07_bound_suite():
    rng = random.Random(7)
    counts = {"utility-gap": 0, "best-bet-gain": 0, "victim-loss": 0}
    failures, min_slack = [], None
    for key in (("parity", "profile-bets"), ("random-bayesian", "profile-bets")):
        ext = extensions()[key]
        base, sigma = ext.base, ext.spec.reference_equilibrium
        everyone = tuple(range(base.n_players))
        coalitions = [c for k in range(1, 4) for c in itertools.combinations(everyone, k)]
        for k in range(500):
            coalition = rng.choice(coalitions)
            dev = random_profile(base, rng, players=coalition, base=sigma, support=rng.randint(1, 2))
            if k % 2 == 0:
                prof = complete_with_best_bets(ext, dev, coalition)
            else:
                prof = random_profile(ext, rng, players=coalition, base=lift(ext.actions, dev), support=2)
            for i in everyone:
                for t in range(len(base.types[i])):
                    for link in bound_checks(ext, prof, i, t):
                        if not link.applicable:
                            continue
                        counts[link.name] += 1
                        min_slack = link.slack if min_slack is None else min(min_slack, link.slack)
                        if not link.holds():
                            failures.append((key[0], k, link))
    ok = not failures and all(counts.values()) and min_slack >= 0
    verdict(7, "utility-gap, best-bet-gain and victim-loss bounds on 2 x 500 Bayesian deviations", ok,
            f"links checked {counts}, min slack {min_slack}, failures {len(failures)}")


# -- 8 -------------------------------------------------------------------------


def test_08_set_bets():
    ext = extensions()[("infinite-truncated-100", "set-bets")]
    base, sigma = ext.base, ext.spec.reference_equilibrium
    n = len(base.actions[0]) - 1
    tau = sc.spread_tau(base)
    lifted = lift(ext.actions, tau)
    gains = [expected_bet_payoff(ext, lifted, i, SetBet(1 - i, tuple(range(1, n + 1)))) for i in (0, 1)]
    refuted = not verify_nash(ext, lifted).is_nash
    rng = random.Random(8)
    n_act = [len(a) for a in ext.actions]
    cands = [tuple(pure_strategy_dists(ext, i, (rng.randrange(n_act[i]),)) for i in (0, 1))
             for _ in range(1500)]
    idx = [{a: k for k, a in enumerate(ext.actions[i])} for i in (0, 1)]
    for _ in range(300):
        support = rng.sample(range(n + 1), rng.randint(1, 4))
        rows = []
        for i in (0, 1):
            bet = rng.choice([a.bet for a in ext.actions[i]])
            vec = [0] * n_act[i]
            for a in support:
                vec[idx[i][ExtendedAction(a, bet)]] = Fraction(1, len(support))
            rows.append((vec,))
        cands.append(tuple(rows))
    for bet_0 in {a.bet for a in ext.actions[0]}:
        for bet_1 in {a.bet for a in ext.actions[1]}:
            rows = []
            for i, bet in ((0, bet_0), (1, bet_1)):
                vec = [0] * n_act[i]
                for a in range(1, n + 1):
                    vec[idx[i][ExtendedAction(a, bet)]] = Fraction(1, n)
                rows.append((vec,))
            cands.append(tuple(rows))
    search = semi_strong_search(ext, sigma, 2, SearchConfig(record_all=True, candidates={(0, 1): cands}))
    stable = [r for r in search.reports if r.internally_stable]
    bad = [r for r in stable if set_bet_violations(ext, r.profile, r.coalition)]
    small = extensions()[("infinite-truncated-3", "set-bets")]
    small_search = semi_strong_search(small, small.spec.reference_equilibrium, 2, SearchConfig(record_all=True))
    small_stable = [r for r in small_search.reports if r.internally_stable]
    small_bad = [r for r in small_stable if set_bet_violations(small, r.profile, r.coalition)]
    ok = gains == [1, 1] and refuted and not bad and not small_bad and search.certified and small_search.certified
    verdict(8, "set bets: lifted spread play refuted, stable deviations respect over/under-played sets", ok,
            f"N={n} gains {_plain(gains)}, {len(cands)} searched deviations, {len(stable)} stable, {len(bad)} violations; "
            f"N=3 full family {len(small_stable)} stable, {len(small_bad)} violations")


# -- 9 -------------------------------------------------------------------------


def test_09_sizes():
    rows, bad = 0, []
    for (name, construction), ext in extensions().items():
        if construction == "set-bets":
            continue
        base = ext.base
        total = sum(len(a) for a in base.actions)
        for i, row in enumerate(size_table(ext)):
            if construction == "profile-bets":
                want = len(base.actions[i]) + base.n_profiles
                flag_ok = row["stated_bound"] == want and not row["exceeds_bound"]
            else:
                want = len(base.actions[i]) * (1 + total)
                flag_ok = row["exceeds_bound"] == (want > row["stated_bound"])
            if len(ext.actions[i]) != want or row["extended"] != want or not flag_ok:
                bad.append((name, construction, i))
            rows += 1
    pirates = size_table(extensions()[("pirates", "normal-form-action-bets")])
    flagged = all(r["exceeds_bound"] and r["extended"] == 14 and r["stated_bound"] == 12 for r in pirates)
    verdict(9, "extended action-set sizes match the closed forms", not bad and flagged,
            f"{rows} player rows checked, pirates 14 > 12 flagged: {flagged}, mismatches {bad or 'none'}")


# -- 10 ------------------------------------------------------------------------


def test_10_quasi_pareto_shortcut():
    rng = random.Random(10)
    mismatches = 0
    for k in range(10_000):
        n = rng.randint(2, 6)
        if k % 2:
            u = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
            v = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
        else:
            u = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)]
            v = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)]
        if compare(u, v).quasi_pareto != subsets_quasi_pareto(u, v):
            mismatches += 1
    verdict(10, "quasi-Pareto shortcut agrees with subset enumeration", mismatches == 0,
            f"10000 vector pairs, n in 2..6, {mismatches} mismatches")

