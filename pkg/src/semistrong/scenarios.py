"""Bundled example games and their designated equilibria."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .game import Game, GameError, StrategyProfile


def pirates(exact: bool = True) -> Game:
    """Three players split 300 coins; two lone defectors take 150 each."""

    def payoff(i, _t, acts):
        defectors = [k for k, a in enumerate(acts) if a == "Defect"]
        if len(defectors) != 2:
            return 100
        return 150 if i in defectors else 0

    return Game.from_payoff(("1", "2", "3"), [("Cooperate", "Defect")] * 3, payoff, exact=exact)


def pirates_sigma(game: Game) -> StrategyProfile:
    return StrategyProfile.pure(game, ["Cooperate"] * game.n_players)


def pirates_betray(exact: bool = True) -> Game:
    """The pirates game with a third action that kills a lone fellow defector."""

    def payoff(i, _t, acts):
        out = [k for k, a in enumerate(acts) if a != "Cooperate"]
        if len(out) != 2:
            return 100
        if i not in out:
            return 300 if all(acts[k] == "Betray" for k in out) else 0
        other = acts[out[0] if out[1] == i else out[1]]
        if acts[i] == "Defect":
            return 150 if other == "Defect" else 0
        return 300 if other == "Defect" else 0

    return Game.from_payoff(("1", "2", "3"), [("Cooperate", "Defect", "Betray")] * 3, payoff, exact=exact)


def majority(n: int = 3, exact: bool = True) -> Game:
    """Each player earns 1 when its vote is at least as common as the other."""
    if n < 2:
        raise GameError("majority needs at least two players")

    def payoff(i, _t, acts):
        same = sum(1 for a in acts if a == acts[i])
        return 1 if same >= n - same else 0

    return Game.from_payoff(tuple(str(k + 1) for k in range(n)), [(0, 1)] * n, payoff, exact=exact)


def uniform_sigma(game: Game) -> StrategyProfile:
    return StrategyProfile.uniform(game)


def parity(exact: bool = True) -> Game:
    """Three players with binary types drawn uniformly from odd-sum triples.

    Everyone earns 1 when the action sum is odd.
    """
    types = [(0, 1)] * 3
    odd = [t for t in itertools.product((0, 1), repeat=3) if sum(t) % 2 == 1]
    prior = {t: Fraction(1, len(odd)) for t in odd}

    def payoff(_i, _t, acts):
        return 1 if sum(acts) % 2 == 1 else 0

    return Game.from_payoff(("1", "2", "3"), [(0, 1)] * 3, payoff, types=types, prior=prior, exact=exact)


def parity_tau(game: Game) -> StrategyProfile:
    """Every player plays its own type."""
    return StrategyProfile.from_choices(game, [[0, 1]] * game.n_players)


def truncated_infinite(n: int = 100, exact: bool = True) -> Game:
    """Two players over actions ``0..n``; both earn 0 if anyone plays 0, else 1."""
    acts = tuple(range(n + 1))

    def payoff(_i, _t, a):
        return 0 if 0 in a else 1

    return Game.from_payoff(("1", "2"), [acts, acts], payoff, exact=exact)


def zero_sigma(game: Game) -> StrategyProfile:
    return StrategyProfile.pure(game, [0] * game.n_players)


def spread_tau(game: Game) -> StrategyProfile:
    """Both players uniform over the nonzero actions."""
    choices = []
    for acts in game.actions:
        rest = [a for a in acts if a != 0]
        choices.append({a: Fraction(1, len(rest)) for a in rest})
    return StrategyProfile.from_choices(game, choices)


def matching_pennies(exact: bool = True) -> Game:
    def payoff(i, _t, acts):
        same = acts[0] == acts[1]
        return (1 if same else -1) * (1 if i == 0 else -1)

    return Game.from_payoff(("1", "2"), [("H", "T")] * 2, payoff, exact=exact)


def random_bayesian(seed: int = 0, n_players: int = 3, n_actions: int = 2, n_types: int = 2,
                    correlated: bool = True, max_tries: int = 500, exact: bool = True):
    """A random Bayesian game together with one of its pure Nash equilibria.

    Utilities are integers in ``0..4``; the prior is random over all type
    profiles (``correlated``) or a product of random marginals.  Draws are
    repeated until a pure equilibrium exists.
    """
    from .engine import enumerate_pure_nash

    rng = random.Random(seed)
    players = tuple(str(k + 1) for k in range(n_players))
    actions = [tuple(range(n_actions))] * n_players
    types = [tuple(range(n_types))] * n_players
    for _ in range(max_tries):
        tprofs = list(itertools.product(*types))
        if correlated:
            weights = [rng.randint(1, 6) for _ in tprofs]
            total = sum(weights)
            prior = {t: Fraction(w, total) for t, w in zip(tprofs, weights)}
        else:
            margs = []
            for _ in range(n_players):
                w = [rng.randint(1, 4) for _ in range(n_types)]
                margs.append([Fraction(x, sum(w)) for x in w])
            prior = {}
            for t in tprofs:
                p = Fraction(1)
                for i, ti in enumerate(t):
                    p *= margs[i][ti]
                prior[t] = p
        table = {
            (i, t, a): rng.randint(0, 4)
            for i in range(n_players)
            for t in types[i]
            for a in itertools.product(*actions)
        }
        game = Game.from_payoff(
            players, actions, lambda i, t, a: table[(i, t, a)], types=types, prior=prior, exact=exact
        )
        eqs = enumerate_pure_nash(game)
        if eqs:
            return game, eqs[0]
    raise GameError("no random draw with a pure equilibrium")


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    build: Callable  # (exact, **params) -> (game, sigma, extra dict)
    construction: str
    params: dict = field(default_factory=dict)


def _pirates(exact=True, **_):
    g = pirates(exact)
    return g, pirates_sigma(g), {"penalty_c": 601, "coalition": (0, 1), "deviation": ("Defect", "Defect")}


def _majority(exact=True, n=3, **_):
    g = majority(n, exact)
    return g, uniform_sigma(g), {"coalition": (0, 1), "deviation": (0, 0)}


def _parity(exact=True, **_):
    g = parity(exact)
    return g, uniform_sigma(g), {"tau": parity_tau(g)}


def _truncated(exact=True, n=100, **_):
    g = truncated_infinite(n, exact)
    return g, zero_sigma(g), {"tau": spread_tau(g)}


def _random(exact=True, seed=0, **_):
    g, sig = random_bayesian(seed=seed, exact=exact)
    return g, sig, {}


SCENARIOS = {
    "pirates": Scenario(
        "pirates",
        "three-player treasure split; a pair of defectors takes everything",
        _pirates,
        "normal-form-action-bets",
    ),
    "majority": Scenario(
        "majority",
        "three-player binary vote with uniform mixing as the equilibrium",
        _majority,
        "normal-form-action-bets",
        {"n": 3},
    ),
    "parity": Scenario(
        "parity",
        "three-player correlated-type parity game; playing one's type beats uniform play",
        _parity,
        "profile-bets",
    ),
    "infinite-truncated": Scenario(
        "infinite-truncated",
        "two players over 0..N; spreading over 1..N beats the all-zero equilibrium",
        _truncated,
        "set-bets",
        {"n": 100},
    ),
    "random-bayesian": Scenario(
        "random-bayesian",
        "seeded random three-player Bayesian game around a pure equilibrium",
        _random,
        "profile-bets",
        {"seed": 0},
    ),
}
