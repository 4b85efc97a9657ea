"""Betting extensions of a game around a designated Nash equilibrium.

Each construction adds, for every player, copies of its base actions
paired with a bet.  The extended utility is the base utility plus a win
term and a loss term.  The win term pays the bettor one minus the hit
probability under the designated equilibrium on a hit, and minus that
probability on a miss.  The loss term charges the victims of a hitting bet
a fixed penalty.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .bets import ActionBet, ExtendedAction, ProfileBet, SetBet, project_base
from .game import (
    Game,
    GameError,
    StrategyProfile,
    UtilitySpan,
    as_number,
    check_profile,
    marginal_action_distribution,
    others_distribution,
)

DEFAULT_SUBSET_CAP = 12


class Construction(str, enum.Enum):
    NORMAL_FORM_ACTION_BETS = "normal-form-action-bets"
    INDEPENDENT_ACTION_BETS = "independent-action-bets"
    PROFILE_BETS = "profile-bets"
    SET_BETS = "set-bets"

    @property
    def uses_action_bets(self) -> bool:
        return self in (Construction.NORMAL_FORM_ACTION_BETS, Construction.INDEPENDENT_ACTION_BETS)


class ExtensionRefused(GameError):
    """The base game or equilibrium does not meet a construction's precondition."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True, eq=False)
class ExtensionSpec:
    construction: Construction
    reference_equilibrium: StrategyProfile
    span: UtilitySpan
    penalty_c: Any
    a_max: int
    set_families: tuple = ()
    capped_players: tuple = ()

    def validate(self, game: Game) -> None:
        m = self.span.m
        if self.construction.uses_action_bets:
            bound = max(m * self.a_max, 1)
            if not self.penalty_c > bound:
                raise GameError(
                    f"penalty {self.penalty_c} must exceed max(span*|A|_max, 1) = {bound}"
                )
        elif self.construction is Construction.PROFILE_BETS:
            want = 2 * game.n_profiles * (m + 1)
            if self.penalty_c != want:
                raise GameError(f"profile-bet penalty must equal 2|A|(span+1) = {want}")
        elif self.penalty_c != m + 1:
            raise GameError(f"set-bet loss constant must equal span+1 = {m + 1}")


@dataclass(frozen=True, eq=False)
class ExtendedGame(Game):
    """A :class:`Game` over :class:`ExtendedAction` labels plus its provenance."""

    base: Game = None
    spec: ExtensionSpec = None
    calibration: dict = field(default=None, repr=False)

    @property
    def sigma(self) -> StrategyProfile:
        return self.spec.reference_equilibrium

    def lifted_sigma(self) -> StrategyProfile:
        from .bets import lift

        return lift(self.actions, self.sigma)


def default_penalty(game: Game, construction: Construction | str):
    """Smallest integral-margin deterrence constant for ``construction``."""
    construction = Construction(construction)
    m = game.span().m
    if construction.uses_action_bets:
        return max(m * game.a_max, 1) + 1
    if construction is Construction.PROFILE_BETS:
        return 2 * game.n_profiles * (m + 1)
    return m + 1


def nonempty_proper_subsets(labels: Sequence) -> list:
    """All label subsets strictly between empty and full, by size then index order."""
    out = []
    for size in range(1, len(labels)):
        for combo in itertools.combinations(range(len(labels)), size):
            out.append(tuple(labels[k] for k in combo))
    return out


def _capped_family(labels: Sequence, sigma_dist, extra: Iterable = ()) -> list:
    support = tuple(a for a, p in zip(labels, sigma_dist) if p != 0)
    rest = tuple(a for a, p in zip(labels, sigma_dist) if p == 0)
    family = []
    for x in (support, rest, *extra):
        x = tuple(a for a in labels if a in set(x))
        if 0 < len(x) < len(labels) and x not in family:
            family.append(x)
    return family


class _Calibration:
    """Hit probabilities of every bet under the reference equilibrium."""

    def __init__(self, game: Game, sigma: StrategyProfile, construction: Construction):
        self.game = game
        self.construction = construction
        n = game.n_players
        if construction is Construction.PROFILE_BETS:
            self.others = [
                [others_distribution(game, sigma, i, t) for t in range(len(game.types[i]))]
                for i in range(n)
            ]
        else:
            self.marginal = [marginal_action_distribution(game, sigma, j) for j in range(n)]

    def hit_probability(self, bettor: int, bettor_type: int, bet):
        g = self.game
        if isinstance(bet, ActionBet):
            return self.marginal[bet.target][g.action_index(bet.target, bet.action)]
        if isinstance(bet, SetBet):
            return sum(
                self.marginal[bet.target][g.action_index(bet.target, a)] for a in bet.actions
            )
        others = [j for j in range(g.n_players) if j != bettor]
        idx = tuple(g.action_index(j, a) for j, a in zip(others, bet.profile))
        return self.others[bettor][bettor_type][idx]


def _check_bet_shape(game: Game, bettor: int, bet, construction: Construction) -> None:
    if isinstance(bet, ActionBet):
        if not construction.uses_action_bets:
            raise GameError("action bets belong to the action-bet constructions")
        game.action_index(bet.target, bet.action)
    elif isinstance(bet, ProfileBet):
        if construction is not Construction.PROFILE_BETS:
            raise GameError("profile bets belong to the profile-bet construction")
        if len(bet.profile) != game.n_players - 1:
            raise GameError("a profile bet names one action per other player")
    elif isinstance(bet, SetBet):
        if construction is not Construction.SET_BETS:
            raise GameError("set bets belong to the set-bet construction")
        if bet.target == bettor:
            raise GameError("set bets cannot target the bettor")
        if not 0 < len(bet.actions) < len(game.actions[bet.target]):
            raise GameError("set bets need a nonempty proper subset")


def _bet_hits(game: Game, bettor: int, bet, bases: Sequence) -> bool:
    """Did ``bet`` (placed by ``bettor``) come true on base labels ``bases``?"""
    if isinstance(bet, ActionBet):
        return bases[bet.target] == bet.action
    if isinstance(bet, SetBet):
        return bases[bet.target] in bet.actions
    others = tuple(b for j, b in enumerate(bases) if j != bettor)
    return others == tuple(bet.profile)


def _victims(game: Game, bettor: int, bet) -> tuple:
    if isinstance(bet, ProfileBet):
        return tuple(j for j in range(game.n_players) if j != bettor)
    return (bet.target,)


def _calibration(spec: ExtensionSpec, game: Game) -> _Calibration:
    cache = getattr(spec, "_calibration_cache", None)
    if cache is None or cache.game is not game:
        cache = _Calibration(game, spec.reference_equilibrium, spec.construction)
        object.__setattr__(spec, "_calibration_cache", cache)
    return cache


def _labels(extended_profile: Sequence) -> list:
    return [a if isinstance(a, ExtendedAction) else ExtendedAction(a) for a in extended_profile]


def win_term(spec: ExtensionSpec, game: Game, sigma: StrategyProfile, bettor: int,
             bettor_type: int, extended_profile: Sequence):
    """Bettor's win/lose payment on one realised extended action profile.

    ``game`` is the base game; ``sigma`` must be the extension's reference
    equilibrium.
    """
    if sigma is not spec.reference_equilibrium and not sigma.same_as(spec.reference_equilibrium):
        raise GameError("sigma differs from the extension's reference equilibrium")
    prof = _labels(extended_profile)
    bet = prof[bettor].bet
    if bet is None:
        return as_number(0, game.exact)
    _check_bet_shape(game, bettor, bet, spec.construction)
    p = _calibration(spec, game).hit_probability(bettor, bettor_type, bet)
    bases = [a.base for a in prof]
    return 1 - p if _bet_hits(game, bettor, bet, bases) else -p


def loss_term(spec: ExtensionSpec, game: Game, sigma: StrategyProfile, victim: int,
              extended_profile: Sequence, bettor: int | None = None):
    """Penalty charged to ``victim``, summed over hitting bets on it.

    With ``bettor`` given, only that player's bet is counted.
    """
    prof = _labels(extended_profile)
    bases = [a.base for a in prof]
    c = spec.penalty_c
    total = as_number(0, game.exact)
    for j, a in enumerate(prof):
        if bettor is not None and j != bettor:
            continue
        if a.bet is None:
            continue
        _check_bet_shape(game, j, a.bet, spec.construction)
        if victim in _victims(game, j, a.bet) and _bet_hits(game, j, a.bet, bases):
            total -= c
    return total


def _extended_actions(game: Game, construction: Construction, families) -> tuple:
    n = game.n_players
    out = []
    for i in range(n):
        acts = [ExtendedAction(a) for a in game.actions[i]]
        if construction.uses_action_bets:
            bets = [ActionBet(j, b) for j in range(n) for b in game.actions[j]]
        elif construction is Construction.PROFILE_BETS:
            others = [game.actions[j] for j in range(n) if j != i]
            bets = [ProfileBet(tuple(p)) for p in itertools.product(*others)]
        else:
            bets = [SetBet(j, x) for j in range(n) if j != i for x in families[j]]
        acts.extend(ExtendedAction(a, b) for a in game.actions[i] for b in bets)
        out.append(tuple(acts))
    return tuple(out)


def _expand(vec: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = len(vec)
    return vec.reshape(shape)


def _hit_arrays(game: Game, ext_actions: tuple) -> list:
    """Per bettor, a 0/1 array over extended profiles marking a hitting bet."""
    n = game.n_players
    shape = tuple(len(a) for a in ext_actions)
    out = []
    for j in range(n):
        hit = np.zeros(shape, dtype=np.int64)
        bets = [a.bet for a in ext_actions[j]]
        if any(isinstance(b, ProfileBet) for b in bets):
            acc = np.ones(shape, dtype=np.int64)
            idx_in_profile = 0
            has_bet = np.array([b is not None for b in bets], dtype=np.int64)
            acc = acc * _expand(has_bet, j, n)
            for k in range(n):
                if k == j:
                    continue
                mat = np.zeros((len(bets), len(ext_actions[k])), dtype=np.int64)
                for e, b in enumerate(bets):
                    if b is None:
                        continue
                    want = b.profile[idx_in_profile]
                    for f, a in enumerate(ext_actions[k]):
                        mat[e, f] = a.base == want
                idx_in_profile += 1
                acc = acc * _outer(mat, j, k, n)
            hit = acc
        else:
            for k in range(n):
                if k == j:
                    vec = np.array(
                        [
                            b is not None and b.target == j and _member(a.base, b)
                            for a, b in zip(ext_actions[j], bets)
                        ],
                        dtype=np.int64,
                    )
                    hit = hit + _expand(vec, j, n)
                    continue
                mat = np.zeros((len(bets), len(ext_actions[k])), dtype=np.int64)
                for e, b in enumerate(bets):
                    if b is None or b.target != k:
                        continue
                    for f, a in enumerate(ext_actions[k]):
                        mat[e, f] = _member(a.base, b)
                if mat.any():
                    hit = hit + _outer(mat, j, k, n)
        out.append(hit)
    return out


def _member(base, bet) -> bool:
    if isinstance(bet, ActionBet):
        return base == bet.action
    return base in bet.actions


def _outer(mat: np.ndarray, axis_a: int, axis_b: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis_a] = mat.shape[0]
    shape[axis_b] = mat.shape[1]
    if axis_a > axis_b:
        mat = mat.T
    return mat.reshape(shape)


def _check_preconditions(game: Game, sigma: StrategyProfile, construction: Construction,
                         check_nash: bool, tolerance) -> None:
    check_profile(game, sigma)
    if construction is Construction.NORMAL_FORM_ACTION_BETS and not game.is_normal_form:
        raise ExtensionRefused("normal-form action bets need a single type per player")
    if construction in (Construction.INDEPENDENT_ACTION_BETS, Construction.SET_BETS):
        if not game.has_independent_types():
            raise ExtensionRefused(
                f"{construction.value} needs independent types; the prior does not factorize"
            )
    if check_nash:
        from .engine import verify_nash

        cert = verify_nash(game, sigma, tolerance)
        if not cert.is_nash:
            raise ExtensionRefused(
                f"reference profile is not a Nash equilibrium (max regret {cert.max_regret})",
                certificate=cert,
            )


def build_extension(
    game: Game,
    sigma: StrategyProfile,
    construction: Construction | str,
    penalty_c=None,
    *,
    check_nash: bool = True,
    strict: bool = True,
    tolerance=None,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    extra_sets: dict | None = None,
) -> ExtendedGame:
    """Construct the betting extension of ``game`` around ``sigma``.

    ``penalty_c`` defaults to :func:`default_penalty`.  ``strict=False``
    skips the penalty invariants (for negative testing).  Set bets over a
    player with more than ``subset_cap`` actions use only the support of
    ``sigma`` and its complement, plus any ``extra_sets[player]``.
    """
    construction = Construction(construction)
    if tolerance is None:
        tolerance = 0 if game.exact else 1e-9
    _check_preconditions(game, sigma, construction, check_nash, tolerance)
    span = game.span()
    c = default_penalty(game, construction) if penalty_c is None else as_number(penalty_c, game.exact)
    families = ()
    capped = ()
    if construction is Construction.SET_BETS:
        fams, capped_l = [], []
        for j in range(game.n_players):
            if len(game.actions[j]) <= subset_cap:
                fams.append(tuple(nonempty_proper_subsets(game.actions[j])))
            else:
                capped_l.append(j)
                sig_j = marginal_action_distribution(game, sigma, j)
                extra = (extra_sets or {}).get(j, ())
                fams.append(tuple(_capped_family(game.actions[j], sig_j, extra)))
        families, capped = tuple(fams), tuple(capped_l)
    spec = ExtensionSpec(construction, sigma, span, c, game.a_max, families, capped)
    if strict:
        spec.validate(game)

    ext_actions = _extended_actions(game, construction, families)
    calib = _Calibration(game, sigma, construction)
    object.__setattr__(spec, "_calibration_cache", calib)
    n = game.n_players
    shape = tuple(len(a) for a in ext_actions)
    base_idx = [
        np.array([game.action_index(i, a.base) for a in ext_actions[i]]) for i in range(n)
    ]
    hits = _hit_arrays(game, ext_actions)
    zero = as_number(0, game.exact)
    dtype = object if game.exact else float

    # loss charged to each victim: sum of hitting bets that name it
    losses = []
    for i in range(n):
        loss = np.zeros(shape, dtype=np.int64)
        for j in range(n):
            targets = np.array(
                [a.bet is not None and i in _victims(game, j, a.bet) for a in ext_actions[j]],
                dtype=np.int64,
            )
            if targets.any():
                loss = loss + hits[j] * _expand(targets, j, n)
        losses.append(loss)

    tables = []
    for i in range(n):
        row = []
        for t in range(len(game.types[i])):
            base = game.utilities[i][t][np.ix_(*base_idx)]
            p = np.array(
                [
                    zero if a.bet is None else calib.hit_probability(i, t, a.bet)
                    for a in ext_actions[i]
                ],
                dtype=dtype,
            )
            win = hits[i].astype(dtype) - _expand(p, i, n)
            table = base + win - losses[i].astype(dtype) * c
            row.append(table)
        tables.append(tuple(row))

    return ExtendedGame(
        game.players,
        ext_actions,
        game.types,
        dict(game.prior),
        tuple(tables),
        game.exact,
        base=game,
        spec=spec,
        calibration={"construction": construction.value},
    )


def stated_size_bound(game: Game, construction: Construction | str):
    """Published size bound for ``|A_i^sigma|``, or ``None`` when there is none."""
    construction = Construction(construction)
    if construction.uses_action_bets:
        return [len(a) * game.n_players * game.a_max for a in game.actions]
    if construction is Construction.PROFILE_BETS:
        return [len(a) + game.n_profiles for a in game.actions]
    return None


def expected_sizes(game: Game, construction: Construction | str, families=()) -> list:
    """Closed-form extended action-set sizes."""
    construction = Construction(construction)
    sizes = [len(a) for a in game.actions]
    if construction.uses_action_bets:
        return [s * (1 + sum(sizes)) for s in sizes]
    if construction is Construction.PROFILE_BETS:
        return [s + game.n_profiles for s in sizes]
    return [
        s * (1 + sum(len(families[j]) for j in range(game.n_players) if j != i))
        for i, s in enumerate(sizes)
    ]


def size_table(ext: ExtendedGame) -> list:
    """Per-player rows ``{player, base, extended, formula, stated_bound, exceeds_bound}``."""
    base = ext.base
    formula = expected_sizes(base, ext.spec.construction, ext.spec.set_families)
    bound = stated_size_bound(base, ext.spec.construction)
    rows = []
    for i in range(base.n_players):
        b = None if bound is None else bound[i]
        size = len(ext.actions[i])
        rows.append(
            {
                "player": str(base.players[i]),
                "base": len(base.actions[i]),
                "extended": size,
                "formula": formula[i],
                "stated_bound": b,
                "exceeds_bound": None if b is None else size > b,
            }
        )
    return rows


def restrict_bet_free(ext: ExtendedGame) -> Game:
    """The extended game restricted to bet-free profiles, relabelled to base actions."""
    base = ext.base
    idx = [
        [k for k, a in enumerate(ext.actions[i]) if a.bet is None] for i in range(base.n_players)
    ]
    actions = tuple(tuple(ext.actions[i][k].base for k in idx[i]) for i in range(base.n_players))
    tables = tuple(
        tuple(tab[np.ix_(*idx)] for tab in row) for row in ext.utilities
    )
    return base.with_tables(actions, tables)


def expected_bet_payoff(ext: ExtendedGame, profile: StrategyProfile, bettor: int, bet,
                        bettor_type: int | None = None):
    """Expected win term of a fixed bet while the others play ``profile``.

    Computed by enumerating the others' extended actions, conditioned on
    the bettor's type when ``bettor_type`` is given.
    """
    base = ext.base
    check_profile(ext, profile)
    spec = ext.spec
    types = range(len(base.types[bettor])) if bettor_type is None else [bettor_type]
    total = as_number(0, base.exact)
    for t in types:
        weight = 1 if bettor_type is not None else base.type_marginal(bettor, t)
        for tprof, q in base.posterior(bettor, t):
            supports = []
            for j, tj in enumerate(tprof):
                if j == bettor:
                    supports.append([(ExtendedAction(base.actions[bettor][0], bet), 1)])
                else:
                    d = profile.dists[j][tj]
                    supports.append(
                        [(ext.actions[j][k], p) for k, p in enumerate(d) if p != 0]
                    )
            for combo in itertools.product(*supports):
                prob = q * weight
                for _, p in combo:
                    prob = prob * p
                labels = [a for a, _ in combo]
                total += prob * win_term(spec, base, spec.reference_equilibrium, bettor, t, labels)
    return total


def projected(profile: StrategyProfile) -> StrategyProfile:
    return project_base(profile)
