"""Bet labels carried by the actions of an extended game."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional, Union

from .game import GameError, StrategyProfile


@dataclass(frozen=True)
class ActionBet:
    """Bet that player ``target`` plays ``action``."""

    target: int
    action: Hashable

    kind = "action"

    def describe(self, players) -> str:
        return f"bet({players[self.target]}:{self.action})"


@dataclass(frozen=True)
class ProfileBet:
    """Bet on the full action profile of all other players (in player order)."""

    profile: tuple

    kind = "profile"

    def describe(self, players) -> str:
        return "bet(" + ",".join(str(a) for a in self.profile) + ")"


@dataclass(frozen=True)
class SetBet:
    """Bet that player ``target`` plays some action in ``actions``."""

    target: int
    actions: tuple

    kind = "set"

    def __contains__(self, action) -> bool:
        return action in self.actions

    def describe(self, players) -> str:
        if len(self.actions) > 6:
            body = f"{self.actions[0]}..{self.actions[-1]} ({len(self.actions)})"
        else:
            body = ",".join(str(a) for a in self.actions)
        return f"bet({players[self.target]}:{{{body}}})"


Bet = Union[ActionBet, ProfileBet, SetBet]


@dataclass(frozen=True)
class ExtendedAction:
    """A base action, optionally paired with a bet (``bet=None`` is no bet)."""

    base: Hashable
    bet: Optional[Bet] = None

    def describe(self, players) -> str:
        if self.bet is None:
            return str(self.base)
        return f"{self.base}+{self.bet.describe(players)}"

    def __str__(self) -> str:
        if self.bet is None:
            return str(self.base)
        return f"{self.base}+{self.bet}"


def is_extended(actions) -> bool:
    return all(isinstance(a, ExtendedAction) for acts in actions for a in acts)


def project_base(profile: StrategyProfile) -> StrategyProfile:
    """Push an extended profile forward onto base actions, dropping bets."""
    if not is_extended(profile.actions):
        raise GameError("profile is not over an extended game")
    base_actions = []
    for acts in profile.actions:
        seen = []
        for a in acts:
            if a.base not in seen:
                seen.append(a.base)
        base_actions.append(tuple(seen))
    dists = []
    for i, row in enumerate(profile.dists):
        pos = {b: k for k, b in enumerate(base_actions[i])}
        out_row = []
        for d in row:
            vec = [0] * len(base_actions[i])
            for k, p in enumerate(d):
                if p != 0:
                    vec[pos[profile.actions[i][k].base]] += p
            out_row.append(vec)
        dists.append(tuple(out_row))
    return StrategyProfile(tuple(base_actions), tuple(dists), profile.exact)


def bet_free_index(actions_i) -> dict:
    """Map base label -> index of its bet-free extended action."""
    return {a.base: k for k, a in enumerate(actions_i) if a.bet is None}


def lift(ext_actions, base_profile: StrategyProfile) -> StrategyProfile:
    """View a base profile in the extended game, placing no bets."""
    dists = []
    for i, row in enumerate(base_profile.dists):
        free = bet_free_index(ext_actions[i])
        out_row = []
        for d in row:
            vec = [0] * len(ext_actions[i])
            for k, p in enumerate(d):
                vec[free[base_profile.actions[i][k]]] = p
            out_row.append(vec)
        dists.append(tuple(out_row))
    return StrategyProfile(tuple(ext_actions), tuple(dists), base_profile.exact)


def decorate(ext_actions, base_profile: StrategyProfile, bets: dict) -> StrategyProfile:
    """Lift ``base_profile`` and attach bets.

    ``bets`` maps a player index to a :class:`Bet` (same bet for every type)
    or to a list of per-type bets / ``None``.  The base distribution of each
    decorated player is kept intact.
    """
    profile = lift(ext_actions, base_profile)
    for i, spec in bets.items():
        n_types = len(base_profile.dists[i])
        per_type = spec if isinstance(spec, list) else [spec] * n_types
        lookup = {a: k for k, a in enumerate(ext_actions[i])}
        rows = []
        for t, bet in enumerate(per_type):
            vec = [0] * len(ext_actions[i])
            for k, p in enumerate(base_profile.dists[i][t]):
                label = ExtendedAction(base_profile.actions[i][k], bet)
                if p != 0:
                    if label not in lookup:
                        raise GameError(f"{label} is not an action of player {i}")
                    vec[lookup[label]] += p
            rows.append(vec)
        profile = profile.replace(i, rows)
    return profile


def betting_mass(profile: StrategyProfile, player: int, type_idx: int = 0):
    """Probability that ``player`` places some bet under its type ``type_idx``."""
    d = profile.dists[player][type_idx]
    return sum((p for a, p in zip(profile.actions[player], d) if a.bet is not None), 0)
