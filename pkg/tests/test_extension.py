import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import extended_payoff, marginal, others_profile_probability
from semistrong import scenarios as sc
from semistrong.bets import ActionBet, ExtendedAction, ProfileBet, SetBet, decorate, lift, project_base
from semistrong.engine import enumerate_pure_nash, verify_nash
from semistrong.extension import (
    Construction,
    ExtensionRefused,
    build_extension,
    default_penalty,
    expected_bet_payoff,
    loss_term,
    nonempty_proper_subsets,
    restrict_bet_free,
    size_table,
    win_term,
)
from semistrong.game import Game, GameError, StrategyProfile
from semistrong.sampling import random_profile
from strategies import small_games

HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def pirates_ext():
    g = sc.pirates()
    return build_extension(g, sc.pirates_sigma(g), "normal-form-action-bets", 601)


@pytest.fixture(scope="module")
def majority_ext():
    g = sc.majority(3)
    return build_extension(g, sc.uniform_sigma(g), "normal-form-action-bets")


@pytest.fixture(scope="module")
def parity_ext():
    g = sc.parity()
    return build_extension(g, sc.uniform_sigma(g), "profile-bets")


def E(base, bet=None):
    return ExtendedAction(base, bet)


def test_pirates_sizes_and_bound_flag(pirates_ext):
    rows = size_table(pirates_ext)
    assert [r["extended"] for r in rows] == [14, 14, 14]
    assert all(r["formula"] == 14 and r["stated_bound"] == 12 and r["exceeds_bound"] for r in rows)


def test_parity_sizes_and_penalty(parity_ext):
    rows = size_table(parity_ext)
    assert [r["extended"] for r in rows] == [10, 10, 10]
    assert all(r["stated_bound"] == 10 and not r["exceeds_bound"] for r in rows)
    assert parity_ext.spec.penalty_c == 32


def test_default_penalties():
    assert default_penalty(sc.pirates(), "normal-form-action-bets") == 301
    assert default_penalty(sc.pirates_betray(), "normal-form-action-bets") == 901
    assert default_penalty(sc.parity(), "profile-bets") == 32
    assert default_penalty(sc.majority(3), "set-bets") == 2
    flat = Game.from_payoff(["a", "b"], [(0, 1), (0, 1)], lambda i, t, a: 7)
    assert default_penalty(flat, "normal-form-action-bets") == 2


def test_penalty_invariants_enforced():
    g = sc.pirates()
    with pytest.raises(GameError):
        build_extension(g, sc.pirates_sigma(g), "normal-form-action-bets", 300)
    g = sc.parity()
    with pytest.raises(GameError):
        build_extension(g, sc.uniform_sigma(g), "profile-bets", 31)
    ext = build_extension(g, sc.uniform_sigma(g), "profile-bets", 31, strict=False)
    assert ext.spec.penalty_c == 31


def test_non_nash_reference_refused():
    g = sc.pirates()
    with pytest.raises(ExtensionRefused) as info:
        build_extension(g, StrategyProfile.pure(g, ["Defect", "Defect", "Cooperate"]), "normal-form-action-bets")
    assert info.value.certificate is not None and info.value.certificate.max_regret > 0


def test_correlated_prior_refused_for_action_and_set_bets():
    g = sc.parity()
    s = sc.uniform_sigma(g)
    for construction in ("independent-action-bets", "set-bets", "normal-form-action-bets"):
        with pytest.raises(ExtensionRefused):
            build_extension(g, s, construction)


def test_independent_action_bets_on_independent_prior():
    g, s = sc.random_bayesian(3, correlated=False)
    ext = build_extension(g, s, "independent-action-bets")
    assert verify_nash(ext, ext.lifted_sigma()).max_regret == 0


def test_win_term_examples(majority_ext):
    spec, base, sigma = majority_ext.spec, majority_ext.base, majority_ext.sigma
    bet = ActionBet(0, 0)
    assert win_term(spec, base, sigma, 1, 0, [E(0), E(0, bet), E(1)]) == HALF
    assert win_term(spec, base, sigma, 1, 0, [E(1), E(0, bet), E(1)]) == -HALF
    assert win_term(spec, base, sigma, 1, 0, [E(1), E(0), E(1)]) == 0


def test_loss_term_examples(pirates_ext, parity_ext):
    spec, base, sigma = pirates_ext.spec, pirates_ext.base, pirates_ext.sigma
    prof = [E("Defect"), E("Defect", ActionBet(0, "Defect")), E("Cooperate")]
    assert loss_term(spec, base, sigma, 0, prof) == -601
    prof = [E("Defect"), E("Defect", ActionBet(0, "Defect")), E("Cooperate", ActionBet(0, "Defect"))]
    assert loss_term(spec, base, sigma, 0, prof) == -2 * 601
    # a missed bet costs nothing
    prof = [E("Cooperate"), E("Defect", ActionBet(0, "Defect")), E("Cooperate")]
    assert loss_term(spec, base, sigma, 0, prof) == 0
    spec, base, sigma = parity_ext.spec, parity_ext.base, parity_ext.sigma
    prof = [E(0), E(1), E(1, ProfileBet((0, 1)))]
    assert [loss_term(spec, base, sigma, v, prof) for v in range(3)] == [-32, -32, 0]


def test_table_matches_term_functions(parity_ext):
    base, spec, sigma = parity_ext.base, parity_ext.spec, parity_ext.sigma
    for idx in itertools.islice(itertools.product(*[range(10)] * 3), 0, None, 7):
        labels = [parity_ext.actions[j][k] for j, k in enumerate(idx)]
        for i in range(3):
            for t in range(2):
                b = tuple(base.action_index(j, a.base) for j, a in enumerate(labels))
                want = (base.utilities[i][t][b] + win_term(spec, base, sigma, i, t, labels)
                        + loss_term(spec, base, sigma, i, labels))
                assert parity_ext.utilities[i][t][idx] == want


def _exhaustive_oracle_check(ext, stride=1):
    for idx in itertools.islice(itertools.product(*[range(len(a)) for a in ext.actions]), 0, None, stride):
        labels = [ext.actions[j][k] for j, k in enumerate(idx)]
        for i in range(ext.n_players):
            for t in range(len(ext.types[i])):
                assert ext.utilities[i][t][idx] == extended_payoff(ext, i, t, labels)


def test_pirates_table_exhaustive(pirates_ext):
    _exhaustive_oracle_check(pirates_ext)


def test_set_bet_table_exhaustive():
    g = sc.truncated_infinite(3)
    ext = build_extension(g, sc.zero_sigma(g), "set-bets")
    assert ext.spec.penalty_c == 2
    _exhaustive_oracle_check(ext)


@given(small_games(max_players=3, max_actions=2), st.sampled_from(list(Construction)), st.integers(0, 999))
def test_tables_match_oracle(game, construction, seed):
    if construction is Construction.NORMAL_FORM_ACTION_BETS and not game.is_normal_form:
        construction = Construction.PROFILE_BETS
    if construction in (Construction.INDEPENDENT_ACTION_BETS, Construction.SET_BETS) \
            and not game.has_independent_types():
        construction = Construction.PROFILE_BETS
    if construction is Construction.SET_BETS and any(len(a) < 2 for a in game.actions):
        construction = Construction.PROFILE_BETS
    sigma = random_profile(game, random.Random(seed))
    ext = build_extension(game, sigma, construction, check_nash=False)
    total = int(np.prod([len(a) for a in ext.actions]))
    _exhaustive_oracle_check(ext, stride=max(1, total // 400))


@given(small_games(max_players=3, max_actions=3), st.integers(0, 999))
def test_extension_property(game, seed):
    sigma = random_profile(game, random.Random(seed))
    ext = build_extension(game, sigma, "profile-bets", check_nash=False)
    restricted = restrict_bet_free(ext)
    for i in range(game.n_players):
        for t in range(len(game.types[i])):
            assert np.array_equal(restricted.utilities[i][t], game.utilities[i][t])


def test_nonempty_proper_subsets():
    subs = nonempty_proper_subsets((0, 1, 2))
    assert len(subs) == 6 and () not in subs and (0, 1, 2) not in subs


def test_set_bet_cap_keeps_support_and_complement():
    g = sc.truncated_infinite(20)
    ext = build_extension(g, sc.zero_sigma(g), "set-bets", extra_sets={1: [(1, 2)]})
    assert ext.spec.capped_players == (0, 1)
    assert tuple(range(1, 21)) in ext.spec.set_families[0]
    assert (0,) in ext.spec.set_families[0]
    assert (1, 2) in ext.spec.set_families[1]


def test_projection_examples(pirates_ext):
    g = pirates_ext.base
    lifted = lift(pirates_ext.actions, StrategyProfile.pure(g, ["Defect", "Cooperate", "Cooperate"]))
    bet = decorate(pirates_ext.actions, StrategyProfile.pure(g, ["Defect", "Cooperate", "Cooperate"]),
                   {0: ActionBet(1, "Defect")})
    assert project_base(bet).same_as(project_base(lifted))
    assert project_base(bet).dist(0).tolist() == [0, 1]
    # half with a bet, half without
    rows = [[0] * 14]
    free = pirates_ext.actions[0].index(E("Defect"))
    other = pirates_ext.actions[0].index(E("Defect", ActionBet(2, "Cooperate")))
    rows[0][free] = rows[0][other] = HALF
    mixed = lifted.replace(0, rows)
    assert project_base(mixed).dist(0).tolist() == [0, 1]


def test_decorated_sigma_projects_back(parity_ext):
    g = parity_ext.base
    s = sc.uniform_sigma(g)
    dec = decorate(parity_ext.actions, s, {0: ProfileBet((1, 1)), 2: [ProfileBet((0, 0)), None]})
    assert project_base(dec).same_as(s)


def test_zero_bet_neutrality_and_identities_on_bundled():
    rng = random.Random(5)
    cases = [
        (sc.pirates(), sc.pirates_sigma, "normal-form-action-bets", 601),
        (sc.majority(3), sc.uniform_sigma, "normal-form-action-bets", None),
        (sc.parity(), sc.uniform_sigma, "profile-bets", None),
        (sc.truncated_infinite(3), sc.zero_sigma, "set-bets", None),
    ]
    for game, make_sigma, construction, c in cases:
        sigma = make_sigma(game)
        ext = build_extension(game, sigma, construction, c)
        for _ in range(5):
            base_tau = random_profile(game, rng)
            bettor = rng.randrange(game.n_players)
            bet = rng.choice([a.bet for a in ext.actions[bettor]
                              if a.bet is not None and getattr(a.bet, "target", None) != bettor])
            t = rng.randrange(len(game.types[bettor]))
            # others follow sigma in base play with random bets attached
            deco = decorate(ext.actions, sigma, {j: rng.choice([a.bet for a in ext.actions[j]])
                                                 for j in range(game.n_players)})
            assert expected_bet_payoff(ext, deco, bettor, bet, t) == 0
            lifted = lift(ext.actions, base_tau)
            got = expected_bet_payoff(ext, lifted, bettor, bet, t)
            if bet.kind == "profile":
                want = (others_profile_probability(game, base_tau, bettor, t, bet.profile)
                        - others_profile_probability(game, sigma, bettor, t, bet.profile))
            else:
                acts = (bet.action,) if bet.kind == "action" else bet.actions
                m_tau, m_sig = marginal(game, base_tau, bet.target), marginal(game, sigma, bet.target)
                want = sum(m_tau[game.action_index(bet.target, a)] - m_sig[game.action_index(bet.target, a)]
                           for a in acts)
            assert got == want
        assert verify_nash(ext, ext.lifted_sigma()).max_regret == 0


def test_pure_equilibria_of_pirates_extension_project_to_sigma(pirates_ext):
    sigma = pirates_ext.sigma
    eqs = enumerate_pure_nash(pirates_ext)
    assert eqs
    assert all(project_base(e).same_as(sigma) for e in eqs)
