"""Slow reference implementations used only by the tests.

Each oracle is written from the definitions with plain loops and shares no
code with the library beyond the data classes it reads.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def subsets_quasi_pareto(u_sigma, u_tau) -> bool:
    """Every coalition of two or more players weakly prefers ``u_sigma``."""
    n = len(u_sigma)
    for k in range(2, n + 1):
        for group in itertools.combinations(range(n), k):
            if sum(u_sigma[i] for i in group) < sum(u_tau[i] for i in group):
                return False
    return True


def pointwise_pareto(u_sigma, u_tau) -> bool:
    return all(a >= b for a, b in zip(u_sigma, u_tau))


def _prior(game):
    """(type index profile, probability) pairs with positive weight."""
    return [(t, q) for t, q in game.prior.items() if q != 0]


def brute_expected_utility(game, profile, player, own_type=None):
    """Sum over type profiles and action profiles, optionally conditioned on a type."""
    total, mass = 0, 0
    for tprof, q in _prior(game):
        if own_type is not None and tprof[player] != own_type:
            continue
        mass += q
        for combo in itertools.product(*[range(len(a)) for a in game.actions]):
            p = q
            for j, k in enumerate(combo):
                p *= profile.dists[j][tprof[j]][k]
                if p == 0:
                    break
            if p == 0:
                continue
            total += p * game.utilities[player][tprof[player]][combo]
    return total / mass if own_type is not None else total


def marginal(game, profile, player):
    """Prior-averaged probability of each of ``player``'s actions."""
    out = [0] * len(game.actions[player])
    for tprof, q in _prior(game):
        for k, p in enumerate(profile.dists[player][tprof[player]]):
            out[k] += q * p
    return out


def others_profile_probability(game, profile, player, own_type, others):
    """P(others play the label tuple ``others`` | player has ``own_type``)."""
    idx = [j for j in range(game.n_players) if j != player]
    num, mass = 0, 0
    for tprof, q in _prior(game):
        if tprof[player] != own_type:
            continue
        mass += q
        p = q
        for j, a in zip(idx, others):
            p *= profile.dists[j][tprof[j]][game.actions[j].index(a)]
        num += p
    return num / mass


def _hit(bettor, bet, bases):
    kind = bet.kind
    if kind == "action":
        return bases[bet.target] == bet.action
    if kind == "set":
        return bases[bet.target] in bet.actions
    return tuple(b for j, b in enumerate(bases) if j != bettor) == tuple(bet.profile)


def _victims(bettor, bet, n):
    if bet.kind == "profile":
        return [j for j in range(n) if j != bettor]
    return [bet.target]


def reference_hit_probability(base, sigma, bettor, bettor_type, bet):
    if bet.kind == "action":
        return marginal(base, sigma, bet.target)[base.actions[bet.target].index(bet.action)]
    if bet.kind == "set":
        m = marginal(base, sigma, bet.target)
        return sum(m[base.actions[bet.target].index(a)] for a in bet.actions)
    return others_profile_probability(base, sigma, bettor, bettor_type, bet.profile)


def extended_payoff(ext, player, own_type, labels):
    """Base utility plus win term plus loss term, read off the definitions."""
    base = ext.base
    sigma = ext.spec.reference_equilibrium
    bases = [a.base for a in labels]
    idx = tuple(base.actions[j].index(b) for j, b in enumerate(bases))
    value = base.utilities[player][own_type][idx]
    bet = labels[player].bet
    if bet is not None:
        p = reference_hit_probability(base, sigma, player, own_type, bet)
        value += (1 - p) if _hit(player, bet, bases) else -p
    for j, a in enumerate(labels):
        if a.bet is not None and player in _victims(j, a.bet, base.n_players) and _hit(j, a.bet, bases):
            value -= ext.spec.penalty_c
    return value


def quasi_pareto_fraction_vectors(rng, n, low=-5, high=5):
    return [Fraction(rng.randint(low, high), rng.randint(1, 3)) for _ in range(n)]
