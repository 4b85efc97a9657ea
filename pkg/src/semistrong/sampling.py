"""Seeded random strategy profiles with small rational probabilities."""

from __future__ import annotations

import random
from fractions import Fraction

from .game import Game, StrategyProfile, as_number


def random_distribution(rng: random.Random, size: int, exact: bool = True, support: int | None = None,
                        max_weight: int = 6) -> list:
    support = size if support is None else max(1, min(support, size))
    chosen = rng.sample(range(size), support)
    weights = [0] * size
    for k in chosen:
        weights[k] = rng.randint(1, max_weight)
    total = sum(weights)
    return [as_number(Fraction(w, total), exact) for w in weights]


def random_strategy(game: Game, player: int, rng: random.Random, support: int | None = None) -> tuple:
    return tuple(
        random_distribution(rng, len(game.actions[player]), game.exact, support)
        for _ in game.types[player]
    )


def random_profile(game: Game, rng: random.Random, support: int | None = None,
                   players=None, base: StrategyProfile | None = None) -> StrategyProfile:
    """Random mixed strategies for ``players`` (all by default), others from ``base``."""
    players = range(game.n_players) if players is None else players
    if base is None:
        base = StrategyProfile.uniform(game)
    out = base
    for i in players:
        out = out.replace(i, random_strategy(game, i, rng, support))
    return out
