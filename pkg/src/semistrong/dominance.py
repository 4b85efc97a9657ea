"""Pareto and quasi-Pareto comparisons, Manhattan gaps and welfare-chain audits."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .bets import ExtendedAction, ProfileBet, is_extended, lift, project_base
from .game import (
    FLOAT_TOL,
    Game,
    GameError,
    StrategyProfile,
    as_number,
    check_profile,
    conditional_utility,
    expected_utility,
    marginal_action_distribution,
    others_distribution,
)

PARETO = "pareto"
QUASI_PARETO = "quasi-pareto"
NEITHER = "neither"


@dataclass(frozen=True)
class DominanceVerdict:
    relation: str
    pareto: bool
    quasi_pareto: bool
    witness: Any = None  # failing subset for NEITHER, else worse-off player if not Pareto
    strict: bool = False  # some player strictly better under the first profile

    @property
    def dominates(self) -> bool:
        return self.relation in (PARETO, QUASI_PARETO)


def compare(u_sigma: Sequence, u_tau: Sequence, tolerance=0) -> DominanceVerdict:
    """Does the first utility vector (quasi-)Pareto-dominate the second?

    Weak inequalities throughout.  Quasi-Pareto is checked through the
    ``k`` smallest differences for each subset size ``k >= 2``.
    """
    if len(u_sigma) != len(u_tau):
        raise GameError("utility vectors differ in length")
    n = len(u_sigma)
    if n < 2:
        raise GameError("dominance needs at least two players")
    diffs = [a - b for a, b in zip(u_sigma, u_tau)]
    order = sorted(range(n), key=lambda k: (diffs[k], k))
    pareto = all(d >= -tolerance for d in diffs)
    strict = any(d > tolerance for d in diffs)
    failing = None
    running = diffs[order[0]]
    for k in range(2, n + 1):
        running += diffs[order[k - 1]]
        if running < -tolerance:
            failing = tuple(sorted(order[:k]))
            break
    quasi = failing is None
    if pareto:
        return DominanceVerdict(PARETO, True, True, None, strict)
    worse = order[0]
    if quasi:
        return DominanceVerdict(QUASI_PARETO, False, True, worse, strict)
    return DominanceVerdict(NEITHER, False, False, failing, strict)


def _base_view(game: Game, profile: StrategyProfile):
    """Base game and projected profile when ``profile`` lives in an extension."""
    if is_extended(profile.actions):
        base = getattr(game, "base", None)
        proj = project_base(profile)
        if base is None:
            raise GameError("extended profile needs the extended game")
        return base, _align(base, proj)
    base = getattr(game, "base", None)
    if base is not None and profile.actions == base.actions:
        return base, profile
    return game, profile


def _align(base: Game, proj: StrategyProfile) -> StrategyProfile:
    """Reorder projected supports to the base game's declared action order."""
    if proj.actions == base.actions:
        return proj
    dists = []
    for i, row in enumerate(proj.dists):
        out = []
        for d in row:
            vec = [0] * len(base.actions[i])
            for k, p in enumerate(d):
                vec[base.action_index(i, proj.actions[i][k])] = p
            out.append(vec)
        dists.append(tuple(out))
    return StrategyProfile(base.actions, tuple(dists), proj.exact)


def manhattan_delta(game: Game, sigma: StrategyProfile, tau: StrategyProfile, player: int,
                    own_type: int = 0):
    """L1 gap between the others' action-profile laws given ``player``'s type."""
    g1, s = _base_view(game, sigma)
    g2, t = _base_view(game, tau)
    base = g1 if g1 is g2 else g1
    ps = others_distribution(base, s, player, own_type)
    pt = others_distribution(base, t, player, own_type)
    return sum(abs(x) for x in (ps - pt).ravel())


# -- per-type bound checks -------------------------------------------------


@dataclass(frozen=True)
class BoundLink:
    name: str
    player: int
    own_type: int | None
    lhs: Any
    rhs: Any
    applicable: bool = True

    @property
    def slack(self):
        return self.rhs - self.lhs if self.applicable else None

    def holds(self, tolerance=0) -> bool:
        return not self.applicable or self.slack >= -tolerance


def _bet_gain_table(ext, profile: StrategyProfile, player: int, own_type: int):
    """``p^tau - p^sigma`` over the others' base profiles, given own type."""
    base, proj = _base_view(ext, profile)
    sigma = ext.spec.reference_equilibrium
    return (others_distribution(base, proj, player, own_type)
            - others_distribution(base, sigma, player, own_type))


def _others_labels(base: Game, player: int, idx: tuple) -> tuple:
    others = [j for j in range(base.n_players) if j != player]
    return tuple(base.actions[j][k] for j, k in zip(others, idx))


def gain_maximizing_bets(ext, profile: StrategyProfile, player: int, own_type: int) -> list:
    """Profile bets attaining ``max (p^tau - p^sigma)`` for ``player`` of ``own_type``."""
    gains = _bet_gain_table(ext, profile, player, own_type)
    top = max(gains.ravel())
    base = ext.base
    return [
        ProfileBet(_others_labels(base, player, idx))
        for idx in np.ndindex(gains.shape)
        if gains[idx] == top
    ], top


def _bet_mass(profile: StrategyProfile, ext, player: int, own_type: int) -> dict:
    out = {}
    for k, p in enumerate(profile.dists[player][own_type]):
        if p != 0:
            b = ext.actions[player][k].bet
            out[b] = out.get(b, 0) + p
    return out


def bets_are_gain_maximizing(ext, profile: StrategyProfile, player: int, own_type: int) -> bool:
    """True when the type always bets and only on gain-maximizing profiles."""
    best, _ = gain_maximizing_bets(ext, profile, player, own_type)
    mass = _bet_mass(profile, ext, player, own_type)
    return None not in mass and all(b in best for b in mass)


def expected_bet_gain(ext, profile: StrategyProfile, player: int, own_type: int):
    """Expected win payment of ``player`` given its type: ``sum_b P(b) (p^tau_b - p^sigma_b)``."""
    gains = _bet_gain_table(ext, profile, player, own_type)
    base = ext.base
    others = [j for j in range(base.n_players) if j != player]
    total = as_number(0, base.exact)
    for b, p in _bet_mass(profile, ext, player, own_type).items():
        if b is None:
            continue
        idx = tuple(base.action_index(j, a) for j, a in zip(others, b.profile))
        total += p * gains[idx]
    return total


def victim_loss(ext, profile: StrategyProfile, bettor: int, own_type: int):
    """Expected penalty each victim suffers from ``bettor``'s bets, given its type."""
    base, proj = _base_view(ext, profile)
    law = others_distribution(base, proj, bettor, own_type)
    others = [j for j in range(base.n_players) if j != bettor]
    total = as_number(0, base.exact)
    for b, p in _bet_mass(profile, ext, bettor, own_type).items():
        if b is None:
            continue
        idx = tuple(base.action_index(j, a) for j, a in zip(others, b.profile))
        total -= p * law[idx] * ext.spec.penalty_c
    return total


def bound_checks(ext, profile: StrategyProfile, player: int, own_type: int) -> list:
    """Three per-type inequalities for a profile of a profile-bet extension.

    * conditional base utility is at most its value under the reference
      equilibrium plus the Manhattan gap times the utility span;
    * the best profile-bet gain is at most the Manhattan gap;
    * under gain-maximizing bets each victim loses at least
      the gap times the penalty over ``2 |A_-i|`` (not applicable otherwise).
    """
    _require_profile_bets(ext)
    base, proj = _base_view(ext, profile)
    sigma = ext.spec.reference_equilibrium
    delta = manhattan_delta(base, sigma, proj, player, own_type)
    m = ext.spec.span.m
    c = ext.spec.penalty_c
    n_others = base.n_profiles // len(base.actions[player])
    u_tau = conditional_utility(base, proj, player, own_type)
    u_sig = conditional_utility(base, sigma, player, own_type)
    _, best_gain = gain_maximizing_bets(ext, profile, player, own_type)
    links = [
        BoundLink("utility-gap", player, own_type, u_tau, u_sig + delta * m),
        BoundLink("best-bet-gain", player, own_type, best_gain, delta),
    ]
    applicable = delta == 0 or bets_are_gain_maximizing(ext, profile, player, own_type)
    loss = victim_loss(ext, profile, player, own_type)
    links.append(
        BoundLink("victim-loss", player, own_type, loss, -delta * c / (2 * n_others), applicable)
    )
    return links


def _require_profile_bets(ext) -> None:
    spec = getattr(ext, "spec", None)
    if spec is None or spec.construction.value != "profile-bets":
        raise GameError("this check needs a profile-bet extension")


def complete_with_best_bets(ext, base_profile: StrategyProfile, coalition: Sequence[int]
                            ) -> StrategyProfile:
    """Attach each member's first gain-maximizing bet (per type) to its base play.

    Members whose best gain is not positive stay bet-free.
    """
    _require_profile_bets(ext)
    lifted = lift(ext.actions, base_profile)
    out = lifted
    for i in coalition:
        rows = []
        lookup = {a: k for k, a in enumerate(ext.actions[i])}
        for t in range(len(ext.types[i])):
            bets, top = gain_maximizing_bets(ext, lifted, i, t)
            bet = bets[0] if top > 0 else None
            vec = [0] * len(ext.actions[i])
            for k, p in enumerate(base_profile.dists[i][t]):
                if p != 0:
                    vec[lookup[ExtendedAction(base_profile.actions[i][k], bet)]] += p
            rows.append(vec)
        out = out.replace(i, rows)
    return out


# -- welfare chain ---------------------------------------------------------


@dataclass(frozen=True)
class WelfareChainReport:
    coalition: tuple
    links: tuple
    decomposition: dict  # member -> (base, win, loss, total)
    total: Any
    reference_total: Any
    tolerance: Any = 0

    @property
    def holds(self) -> bool:
        return all(link.holds(self.tolerance) for link in self.links)

    @property
    def min_slack(self):
        vals = [link.slack for link in self.links if link.applicable]
        return min(vals) if vals else None


def welfare_chain_check(ext, sigma: StrategyProfile | None, tau_s: StrategyProfile,
                        coalition: Sequence[int], tolerance=None) -> WelfareChainReport:
    """Evaluate every inequality linking the coalition's total to its total under sigma.

    ``tau_s`` is a full profile of the extended game; players outside the
    coalition are expected to play the lifted reference equilibrium.
    """
    _require_profile_bets(ext)
    coalition = tuple(coalition)
    if len(coalition) < 2:
        raise GameError("the welfare chain needs a coalition of at least two players")
    base = ext.base
    tol = (0 if base.exact else FLOAT_TOL) if tolerance is None else tolerance
    sigma = ext.spec.reference_equilibrium if sigma is None else sigma
    if is_extended(sigma.actions):
        sigma = _align(base, project_base(sigma))
    check_profile(ext, tau_s)
    _, proj = _base_view(ext, tau_s)
    for j in range(base.n_players):
        if j in coalition:
            continue
        if any(a.bet is not None and p != 0 for d in tau_s.dists[j]
               for a, p in zip(ext.actions[j], d)):
            raise GameError(f"player {j} is outside the coalition but bets")
        for t in range(len(base.types[j])):
            if any(x != y for x, y in zip(proj.dists[j][t], sigma.dists[j][t])):
                raise GameError(f"player {j} is outside the coalition but deviates")
    m = ext.spec.span.m
    c = ext.spec.penalty_c
    zero = as_number(0, base.exact)
    links = []
    decomposition = {}
    ext_u = expected_utility(ext, tau_s)
    base_u = expected_utility(base, proj)
    ref_u = expected_utility(base, sigma)
    bound_total = zero
    for i in coalition:
        win = zero
        loss_suffered = zero
        for t in range(len(base.types[i])):
            w_t = base.type_marginal(i, t)
            win += w_t * expected_bet_gain(ext, tau_s, i, t)
        for j in coalition:
            if j == i:
                continue
            for t in range(len(base.types[j])):
                loss_suffered += base.type_marginal(j, t) * victim_loss(ext, tau_s, j, t)
        decomposition[i] = (base_u[i], win, loss_suffered, ext_u[i])
        links.append(BoundLink("decomposition", i, None, ext_u[i], base_u[i] + win + loss_suffered))
        links.append(BoundLink("decomposition-reverse", i, None, base_u[i] + win + loss_suffered, ext_u[i]))
        n_others = base.n_profiles // len(base.actions[i])
        for t in range(len(base.types[i])):
            for link in bound_checks(ext, tau_s, i, t):
                links.append(link)
            delta = manhattan_delta(base, sigma, proj, i, t)
            u_sig = conditional_utility(base, sigma, i, t)
            bound_total += base.type_marginal(i, t) * (
                u_sig + delta * (m + 1) - (len(coalition) - 1) * delta * c / (2 * n_others)
            )
            links.append(
                BoundLink(
                    "penalty-outweighs-gain",
                    i,
                    t,
                    delta * (m + 1),
                    (len(coalition) - 1) * delta * c / (2 * n_others),
                )
            )
    total = sum((ext_u[i] for i in coalition), zero)
    ref_total = sum((ref_u[i] for i in coalition), zero)
    losses_bounded = all(l.applicable for l in links if l.name == "victim-loss")
    links.append(BoundLink("aggregate-bound", -1, None, total, bound_total, losses_bounded))
    links.append(BoundLink("aggregate", -1, None, bound_total, ref_total))
    return WelfareChainReport(coalition, tuple(links), decomposition, total, ref_total, tol)


# -- support split ---------------------------------------------------------


@dataclass(frozen=True)
class DeviationSupportSplit:
    """Actions (or others-profiles, per type) played more / less than under sigma."""

    mode: str
    more: dict  # player or (player, type) -> tuple of labels
    less: dict

    def is_empty(self) -> bool:
        return not any(self.more.values()) and not any(self.less.values())


def support_split(game: Game, sigma: StrategyProfile, tau: StrategyProfile,
                  mode: str = "action") -> DeviationSupportSplit:
    """Sign partition of the probability gaps between ``tau`` and ``sigma``."""
    base, s = _base_view(game, sigma)
    _, t = _base_view(game, tau)
    more, less = {}, {}
    if mode == "action":
        for i in range(base.n_players):
            ps = marginal_action_distribution(base, s, i)
            pt = marginal_action_distribution(base, t, i)
            more[i] = tuple(a for a, x, y in zip(base.actions[i], pt, ps) if x > y)
            less[i] = tuple(a for a, x, y in zip(base.actions[i], pt, ps) if x < y)
    elif mode == "profile":
        for i in range(base.n_players):
            for ti in range(len(base.types[i])):
                ps = others_distribution(base, s, i, ti)
                pt = others_distribution(base, t, i, ti)
                more[(i, ti)] = tuple(
                    _others_labels(base, i, idx) for idx in np.ndindex(ps.shape) if pt[idx] > ps[idx]
                )
                less[(i, ti)] = tuple(
                    _others_labels(base, i, idx) for idx in np.ndindex(ps.shape) if pt[idx] < ps[idx]
                )
    else:
        raise GameError(f"unknown split mode {mode!r}")
    return DeviationSupportSplit(mode, more, less)


def dominance_over(game: Game, sigma: StrategyProfile, others: Sequence[StrategyProfile],
                   tolerance=0) -> list:
    """Verdicts of ``sigma`` against each profile in ``others`` (same game)."""
    u_sig = expected_utility(game, sigma)
    return [compare(u_sig, expected_utility(game, o), tolerance) for o in others]


def set_bet_violations(ext, profile: StrategyProfile, coalition: Sequence[int]) -> list:
    """Set bets on coalition members that miss an over-played action or hit an under-played one.

    Returns ``(bettor, bet, missing, overlap)`` for each offending bet that
    is placed with positive probability.  An internally stable coalition
    deviation yields an empty list.
    """
    split = support_split(ext, ext.spec.reference_equilibrium, profile)
    members = set(coalition)
    out = []
    for j in range(ext.n_players):
        seen = set()
        for row in profile.dists[j]:
            for a, p in zip(ext.actions[j], row):
                bet = a.bet
                if p == 0 or bet is None or bet.kind != "set" or bet.target not in members:
                    continue
                if bet in seen:
                    continue
                seen.add(bet)
                missing = tuple(x for x in split.more[bet.target] if x not in bet.actions)
                overlap = tuple(x for x in split.less[bet.target] if x in bet.actions)
                if missing or overlap:
                    out.append((j, bet, missing, overlap))
    return out
