"""Finite normal-form and Bayesian games with exact expected-utility oracles.

A normal-form game is stored as a Bayesian game in which every player has a
single type, so one enumeration path serves both.  Probabilities and
utilities are :class:`fractions.Fraction` in exact mode and ``float``
otherwise; utility tables are dense numpy arrays (``dtype=object`` when
exact) indexed by action-index profiles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

FLOAT_TOL = 1e-9


class GameError(ValueError):
    """Raised when a game or strategy profile violates its invariants."""


def as_number(value: Any, exact: bool = True):
    """Coerce ``value`` to the arithmetic of the requested mode.

    Strings such as ``"3/4"`` or ``"0.25"`` are accepted.  Floats are read
    through their shortest repr, so ``0.1`` becomes ``1/10`` in exact mode.
    """
    if isinstance(value, bool):
        raise GameError(f"not a number: {value!r}")
    if exact:
        if isinstance(value, float):
            if not np.isfinite(value):
                raise GameError(f"non-finite value {value!r}")
            return Fraction(repr(value))
        try:
            return Fraction(value)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise GameError(f"not a number: {value!r}") from exc
    try:
        out = float(Fraction(value)) if isinstance(value, str) else float(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise GameError(f"not a number: {value!r}") from exc
    if not np.isfinite(out):
        raise GameError(f"non-finite value {value!r}")
    return out


def _dtype(exact: bool):
    return object if exact else float


def _vector(values: Iterable, exact: bool) -> np.ndarray:
    return np.array([as_number(v, exact) for v in values], dtype=_dtype(exact))


def _is_one(total, exact: bool) -> bool:
    return total == 1 if exact else abs(total - 1.0) <= FLOAT_TOL


def contract(table: np.ndarray, dists: Sequence[np.ndarray], keep: int | None = None):
    """Expectation of ``table`` under the product of ``dists``.

    Axis ``keep`` (if given) is left free, so the result is the vector of
    values of each action on that axis.  Zero-probability actions are sliced
    away first, which keeps pure and sparse profiles cheap.
    """
    index = []
    weights = []
    for axis, dist in enumerate(dists):
        if axis == keep:
            index.append(np.arange(table.shape[axis]))
            weights.append(None)
        else:
            support = np.flatnonzero(dist != 0)
            index.append(support)
            weights.append(dist[support])
    sub = table[np.ix_(*index)]
    for axis in reversed(range(len(dists))):
        if axis == keep:
            continue
        sub = np.tensordot(sub, weights[axis], axes=([axis], [0]))
    if keep is None:
        return sub.item() if isinstance(sub, np.ndarray) else sub
    return sub


@dataclass(frozen=True)
class UtilitySpan:
    m_min: Any
    m_max: Any

    @property
    def m(self):
        return self.m_max - self.m_min


@dataclass(frozen=True, eq=False)
class Game:
    """A finite Bayesian game ``(P, T, q, A, U)``.

    ``prior`` maps type-index profiles to probabilities.  ``utilities[i][t]``
    is player ``i``'s table when its own type has index ``t``.
    """

    players: tuple
    actions: tuple
    types: tuple
    prior: Mapping[tuple, Any]
    utilities: tuple
    exact: bool = True
    _marginals: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.players)
        if n < 2:
            raise GameError("a game needs at least two players")
        if len(self.actions) != n or len(self.types) != n:
            raise GameError("actions and types must have one entry per player")
        for i, acts in enumerate(self.actions):
            if not acts:
                raise GameError(f"player {self.players[i]} has no actions")
            if len(set(acts)) != len(acts):
                raise GameError(f"player {self.players[i]} has duplicate action labels")
        for i, tys in enumerate(self.types):
            if not tys:
                raise GameError(f"player {self.players[i]} has no types")
        shape = self.shape
        total = 0
        prior = {}
        for tprof, prob in self.prior.items():
            tprof = tuple(tprof)
            if len(tprof) != n or any(
                not 0 <= t < len(self.types[i]) for i, t in enumerate(tprof)
            ):
                raise GameError(f"prior entry {tprof} is not a type profile")
            prob = as_number(prob, self.exact)
            if prob < 0:
                raise GameError(f"prior probability of {tprof} is negative")
            if prob != 0:
                prior[tprof] = prob
            total += prob
        if not _is_one(total, self.exact):
            raise GameError(f"prior sums to {total}, not 1")
        object.__setattr__(self, "prior", prior)
        marginals = []
        for i, tys in enumerate(self.types):
            marg = [0] * len(tys)
            for tprof, prob in prior.items():
                marg[tprof[i]] += prob
            for t, m in enumerate(marg):
                if m == 0:
                    raise GameError(
                        f"type {tys[t]!r} of player {self.players[i]} has zero probability"
                    )
            marginals.append(tuple(marg))
        object.__setattr__(self, "_marginals", tuple(marginals))
        if len(self.utilities) != n:
            raise GameError("utilities must have one entry per player")
        tables = []
        for i in range(n):
            if len(self.utilities[i]) != len(self.types[i]):
                raise GameError(f"player {self.players[i]} needs one table per type")
            row = []
            for table in self.utilities[i]:
                arr = np.asarray(table, dtype=_dtype(self.exact))
                if arr.shape != shape:
                    raise GameError(
                        f"utility table of player {self.players[i]} has shape "
                        f"{arr.shape}, expected {shape}"
                    )
                if not self.exact and not np.all(np.isfinite(arr)):
                    raise GameError("utilities must be finite")
                arr.setflags(write=False)
                row.append(arr)
            tables.append(tuple(row))
        object.__setattr__(self, "utilities", tuple(tables))

    @classmethod
    def from_payoff(
        cls,
        players: Sequence,
        actions: Sequence[Sequence[Hashable]],
        payoff: Callable[[int, Hashable, tuple], Any],
        types: Sequence[Sequence[Hashable]] | None = None,
        prior: Mapping[tuple, Any] | None = None,
        exact: bool = True,
    ) -> "Game":
        """Tabulate ``payoff(player_index, own_type_label, action_labels)``.

        ``prior`` is keyed by type-label profiles here.  With ``types``
        omitted the game is normal-form (one dummy type ``None`` each).
        """
        n = len(players)
        if types is None:
            types = [(None,)] * n
            prior = {(None,) * n: 1}
        elif prior is None:
            raise GameError("a Bayesian game needs a prior")
        types = tuple(tuple(t) for t in types)
        actions = tuple(tuple(a) for a in actions)
        index_prior = {}
        for tprof, prob in prior.items():
            try:
                key = tuple(types[i].index(t) for i, t in enumerate(tprof))
            except ValueError as exc:
                raise GameError(f"prior entry {tprof} uses an unknown type") from exc
            index_prior[key] = prob
        shape = tuple(len(a) for a in actions)
        tables = []
        for i in range(n):
            row = []
            for t in types[i]:
                arr = np.empty(shape, dtype=_dtype(exact))
                for idx in itertools.product(*(range(s) for s in shape)):
                    labels = tuple(actions[k][x] for k, x in enumerate(idx))
                    arr[idx] = as_number(payoff(i, t, labels), exact)
                row.append(arr)
            tables.append(tuple(row))
        return cls(tuple(players), actions, types, index_prior, tuple(tables), exact)

    # -- structure -----------------------------------------------------

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.actions)

    @property
    def n_profiles(self) -> int:
        return int(np.prod(self.shape))

    @property
    def a_max(self) -> int:
        return max(self.shape)

    @property
    def is_normal_form(self) -> bool:
        return all(len(t) == 1 for t in self.types)

    def action_index(self, player: int, action: Hashable) -> int:
        try:
            return self.actions[player].index(action)
        except ValueError:
            raise GameError(
                f"{action!r} is not an action of player {self.players[player]}"
            ) from None

    def type_index(self, player: int, type_label: Hashable) -> int:
        try:
            return self.types[player].index(type_label)
        except ValueError:
            raise GameError(
                f"{type_label!r} is not a type of player {self.players[player]}"
            ) from None

    def player_index(self, player) -> int:
        if isinstance(player, (int, np.integer)) and 0 <= player < self.n_players:
            return int(player)
        try:
            return self.players.index(player)
        except ValueError:
            raise GameError(f"unknown player {player!r}") from None

    def type_marginal(self, player: int, type_idx: int):
        return self._marginals[player][type_idx]

    def posterior(self, player: int, type_idx: int) -> list:
        """``[(type_profile, q(type_profile | own type)), ...]``."""
        marg = self._marginals[player][type_idx]
        return [
            (tprof, prob / marg)
            for tprof, prob in self.prior.items()
            if tprof[player] == type_idx
        ]

    def has_independent_types(self) -> bool:
        """True when the prior equals the product of its marginals."""
        for tprof in itertools.product(*(range(len(t)) for t in self.types)):
            prod = 1
            for i, t in enumerate(tprof):
                prod = prod * self._marginals[i][t]
            got = self.prior.get(tprof, 0)
            if self.exact:
                if got != prod:
                    return False
            elif abs(got - prod) > FLOAT_TOL:
                return False
        return True

    def span(self) -> UtilitySpan:
        lo = min(tab.min() for row in self.utilities for tab in row)
        hi = max(tab.max() for row in self.utilities for tab in row)
        return UtilitySpan(lo, hi)

    def utility(self, player: int, type_idx: int, action_profile: Sequence[int]):
        return self.utilities[player][type_idx][tuple(action_profile)]

    def profiles(self) -> Iterator[tuple]:
        """Action-index profiles in row-major order."""
        return itertools.product(*(range(s) for s in self.shape))

    def to_float(self) -> "Game":
        if not self.exact:
            return self
        tables = tuple(
            tuple(np.asarray(tab, dtype=float) for tab in row) for row in self.utilities
        )
        prior = {k: float(v) for k, v in self.prior.items()}
        return Game(self.players, self.actions, self.types, prior, tables, exact=False)

    def with_tables(self, actions: tuple, utilities: tuple) -> "Game":
        """Same players, types and prior over new action sets and tables."""
        return Game(self.players, actions, self.types, dict(self.prior), utilities, self.exact)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Per player, per own type, a distribution over that player's actions."""

    actions: tuple
    dists: tuple
    exact: bool = True

    def __post_init__(self):
        if len(self.actions) != len(self.dists):
            raise GameError("profile must have one strategy per player")
        dists = []
        for i, per_type in enumerate(self.dists):
            row = []
            if not per_type:
                raise GameError(f"player {i} has no per-type distributions")
            for d in per_type:
                arr = np.array(
                    [as_number(x, self.exact) for x in d], dtype=_dtype(self.exact)
                )
                if arr.shape != (len(self.actions[i]),):
                    raise GameError(f"distribution of player {i} has wrong length")
                if any(x < 0 for x in arr):
                    raise GameError(f"distribution of player {i} has negative mass")
                if not _is_one(sum(arr), self.exact):
                    raise GameError(f"distribution of player {i} does not sum to 1")
                arr.setflags(write=False)
                row.append(arr)
            dists.append(tuple(row))
        object.__setattr__(self, "dists", tuple(dists))

    # -- constructors --------------------------------------------------

    @classmethod
    def from_choices(cls, game: Game, choices: Sequence) -> "StrategyProfile":
        """Build from one entry per player.

        An entry may be an action label (pure), a ``{label: prob}`` mapping,
        or a list with one of those per type.
        """
        if len(choices) != game.n_players:
            raise GameError("need one strategy per player")
        dists = []
        for i, choice in enumerate(choices):
            n_types = len(game.types[i])
            if isinstance(choice, list):
                if len(choice) != n_types:
                    raise GameError(f"player {i} needs one entry per type")
                per_type = choice
            else:
                per_type = [choice] * n_types
            row = []
            for entry in per_type:
                vec = [0] * len(game.actions[i])
                if isinstance(entry, Mapping):
                    for label, prob in entry.items():
                        vec[game.action_index(i, label)] += as_number(prob, game.exact)
                else:
                    vec[game.action_index(i, entry)] = 1
                row.append(vec)
            dists.append(tuple(row))
        return cls(game.actions, tuple(dists), game.exact)

    @classmethod
    def pure(cls, game: Game, labels: Sequence) -> "StrategyProfile":
        return cls.from_choices(game, list(labels))

    @classmethod
    def uniform(cls, game: Game) -> "StrategyProfile":
        dists = []
        for i, acts in enumerate(game.actions):
            p = as_number(Fraction(1, len(acts)), game.exact)
            dists.append(tuple([p] * len(acts) for _ in game.types[i]))
        return cls(game.actions, tuple(dists), game.exact)

    # -- access --------------------------------------------------------

    @property
    def n_players(self) -> int:
        return len(self.actions)

    def dist(self, player: int, type_idx: int = 0) -> np.ndarray:
        return self.dists[player][type_idx]

    def distribution(self, player: int, type_idx: int = 0) -> dict:
        """Support of one mixed action as ``{label: prob}``."""
        return {
            self.actions[player][k]: p
            for k, p in enumerate(self.dists[player][type_idx])
            if p != 0
        }

    def replace(self, player: int, per_type) -> "StrategyProfile":
        dists = list(self.dists)
        dists[player] = tuple(per_type)
        return StrategyProfile(self.actions, tuple(dists), self.exact)

    def is_pure(self) -> bool:
        return all(
            sum(1 for x in d if x != 0) == 1 for row in self.dists for d in row
        )

    def same_as(self, other: "StrategyProfile", tol: float = 0.0) -> bool:
        if self.actions != other.actions:
            return False
        for a, b in zip(self.dists, other.dists):
            for x, y in zip(a, b):
                if self.exact and other.exact and tol == 0:
                    if any(p != q for p, q in zip(x, y)):
                        return False
                elif any(abs(float(p) - float(q)) > tol for p, q in zip(x, y)):
                    return False
        return True

    def to_float(self) -> "StrategyProfile":
        if not self.exact:
            return self
        return StrategyProfile(
            self.actions,
            tuple(tuple([float(x) for x in d] for d in row) for row in self.dists),
            exact=False,
        )


def check_profile(game: Game, profile: StrategyProfile) -> None:
    if profile.actions != game.actions:
        raise GameError("profile action sets do not match the game")
    for i, row in enumerate(profile.dists):
        if len(row) != len(game.types[i]):
            raise GameError(
                f"player {game.players[i]} needs {len(game.types[i])} per-type distributions"
            )


def _type_dists(profile: StrategyProfile, tprof: tuple) -> list:
    return [profile.dists[j][t] for j, t in enumerate(tprof)]


def action_values(game: Game, profile: StrategyProfile, player: int, type_idx: int) -> np.ndarray:
    """Conditional expected utility of each pure action of ``player``.

    The others play ``profile`` and ``player`` has type ``type_idx``.
    """
    check_profile(game, profile)
    out = None
    for tprof, w in game.posterior(player, type_idx):
        vals = contract(
            game.utilities[player][type_idx], _type_dists(profile, tprof), keep=player
        )
        term = vals * w
        out = term if out is None else out + term
    return out


def conditional_utility(game: Game, profile: StrategyProfile, player: int, own_type: int):
    """``E[u_i | t_i]`` with the others' types drawn from the posterior."""
    check_profile(game, profile)
    total = 0
    for tprof, w in game.posterior(player, own_type):
        total += w * contract(game.utilities[player][own_type], _type_dists(profile, tprof))
    return total


def expected_utility(game: Game, profile: StrategyProfile) -> list:
    check_profile(game, profile)
    out = []
    for i in range(game.n_players):
        total = 0
        for tprof, q in game.prior.items():
            total += q * contract(game.utilities[i][tprof[i]], _type_dists(profile, tprof))
        out.append(total)
    return out


def action_probability(game: Game, profile: StrategyProfile, player: int, action: Hashable):
    """Probability that ``player`` plays ``action``, averaged over its types."""
    check_profile(game, profile)
    k = game.action_index(player, action)
    return sum(
        game.type_marginal(player, t) * profile.dists[player][t][k]
        for t in range(len(game.types[player]))
    )


def marginal_action_distribution(game: Game, profile: StrategyProfile, player: int) -> np.ndarray:
    check_profile(game, profile)
    out = None
    for t in range(len(game.types[player])):
        term = profile.dists[player][t] * game.type_marginal(player, t)
        out = term if out is None else out + term
    return out


def others_distribution(game: Game, profile: StrategyProfile, player: int, own_type: int) -> np.ndarray:
    """Joint law of the other players' actions given ``player``'s type.

    Returned as an array whose axes are the other players in order.
    """
    check_profile(game, profile)
    shape = tuple(s for j, s in enumerate(game.shape) if j != player)
    out = np.zeros(shape, dtype=_dtype(game.exact))
    if game.exact:
        out[...] = Fraction(0)
    for tprof, w in game.posterior(player, own_type):
        joint = np.array(w, dtype=_dtype(game.exact))
        for j, t in enumerate(tprof):
            if j != player:
                joint = np.multiply.outer(joint, profile.dists[j][t])
        out = out + joint
    return out


def others_index(game: Game, player: int, others_profile: Sequence[Hashable]) -> tuple:
    others = [j for j in range(game.n_players) if j != player]
    if len(others_profile) != len(others):
        raise GameError("others_profile must name one action per other player")
    return tuple(game.action_index(j, a) for j, a in zip(others, others_profile))


def conditional_profile_probability(
    game: Game,
    profile: StrategyProfile,
    player: int,
    own_type: int,
    others_profile: Sequence[Hashable],
):
    """Probability that the others play ``others_profile`` given ``player``'s type."""
    idx = others_index(game, player, others_profile)
    return others_distribution(game, profile, player, own_type)[idx]


def pure_strategies(game: Game, player: int) -> Iterator[tuple]:
    """Every map from the player's types to action indices."""
    return itertools.product(range(len(game.actions[player])), repeat=len(game.types[player]))


def pure_strategy_dists(game: Game, player: int, choice: tuple) -> tuple:
    one = as_number(1, game.exact)
    zero = as_number(0, game.exact)
    rows = []
    for k in choice:
        vec = [zero] * len(game.actions[player])
        vec[k] = one
        rows.append(vec)
    return tuple(rows)
