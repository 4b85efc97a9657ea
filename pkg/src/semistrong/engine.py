"""Best responses, Nash certificates, coalition-deviation search and enumeration."""

from __future__ import annotations

import itertools
import os
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .bets import ActionBet, ExtendedAction, is_extended, lift, project_base
from .game import (
    FLOAT_TOL,
    Game,
    GameError,
    StrategyProfile,
    action_values,
    as_number,
    check_profile,
    conditional_utility,
    expected_utility,
    marginal_action_distribution,
    pure_strategies,
    pure_strategy_dists,
)

WORKERS_ENV = "SEMISTRONG_WORKERS"


def default_tolerance(game: Game):
    return 0 if game.exact else FLOAT_TOL


def _argmax(values) -> int:
    best = 0
    for k in range(1, len(values)):
        if values[k] > values[best]:
            best = k
    return best


# -- best response and Nash ------------------------------------------------


@dataclass(frozen=True)
class BestResponse:
    player: int
    actions: tuple  # action index per own type
    labels: tuple
    value: Any  # ex-ante expected utility of the best response
    type_values: tuple  # conditional value per own type

    def dists(self, game: Game) -> tuple:
        return pure_strategy_dists(game, self.player, self.actions)


def best_response(game: Game, profile: StrategyProfile, player: int) -> BestResponse:
    """Best pure reply of ``player`` per own type, first index on ties."""
    check_profile(game, profile)
    acts, vals = [], []
    value = 0
    for t in range(len(game.types[player])):
        v = action_values(game, profile, player, t)
        k = _argmax(v)
        acts.append(k)
        vals.append(v[k])
        value += game.type_marginal(player, t) * v[k]
    labels = tuple(game.actions[player][k] for k in acts)
    return BestResponse(player, tuple(acts), labels, value, tuple(vals))


@dataclass(frozen=True)
class PlayerRegret:
    player: int
    best: BestResponse
    current: Any  # ex-ante utility under the profile
    type_gains: tuple  # conditional gain of the best reply, per type

    @property
    def gain(self):
        return self.best.value - self.current

    @property
    def max_type_gain(self):
        return max(self.type_gains)


@dataclass(frozen=True)
class RegretCertificate:
    entries: tuple
    tolerance: Any

    @property
    def max_regret(self):
        if not self.entries:
            return 0
        return max(e.max_type_gain for e in self.entries)

    @property
    def is_nash(self) -> bool:
        return self.max_regret <= self.tolerance

    def entry(self, player: int) -> PlayerRegret:
        for e in self.entries:
            if e.player == player:
                return e
        raise KeyError(player)

    def worst(self) -> PlayerRegret | None:
        """First player attaining the maximum regret."""
        if not self.entries:
            return None
        top = self.max_regret
        return next(e for e in self.entries if e.max_type_gain == top)


def regret_certificate(game: Game, profile: StrategyProfile, players: Iterable[int],
                       tolerance=None) -> RegretCertificate:
    if tolerance is None:
        tolerance = default_tolerance(game)
    entries = []
    for i in players:
        br = best_response(game, profile, i)
        cur_t = [conditional_utility(game, profile, i, t) for t in range(len(game.types[i]))]
        current = sum(game.type_marginal(i, t) * c for t, c in enumerate(cur_t))
        gains = tuple(b - c for b, c in zip(br.type_values, cur_t))
        entries.append(PlayerRegret(i, br, current, gains))
    return RegretCertificate(tuple(entries), tolerance)


def verify_nash(game: Game, profile: StrategyProfile, tolerance=None) -> RegretCertificate:
    """Unilateral-deviation certificate for every player."""
    return regret_certificate(game, profile, range(game.n_players), tolerance)


# -- bet statistics --------------------------------------------------------


@dataclass(frozen=True)
class BetProfileStats:
    """Expected bet counts per target ``(player, action)``.

    ``per_bettor[j][(i, a)]`` is the probability that ``j`` bets on ``(i, a)``;
    ``entries[(i, a)]`` sums that over the bettors ``j != i`` that are counted.
    """

    entries: dict
    per_bettor: dict
    events: dict  # bet -> summed probability over counted bettors, any bet kind

    def max_entry(self):
        if not self.entries:
            return None, 0
        key = max(self.entries, key=lambda k: self.entries[k])
        return key, self.entries[key]

    def bets_on(self, player: int, action) -> Any:
        return self.entries.get((player, action), 0)


def bet_stats(game: Game, profile: StrategyProfile, coalition: Sequence[int] | None = None
              ) -> BetProfileStats:
    """Per-target expected bet counts under ``profile``.

    With ``coalition`` given, only bets placed by members on members are
    counted (the sum that the pigeonhole bound is stated over).
    """
    check_profile(game, profile)
    if not is_extended(game.actions):
        raise GameError("bet_stats needs a game over extended actions")
    n = game.n_players
    members = set(range(n)) if coalition is None else set(coalition)
    zero = as_number(0, game.exact)
    entries = {}
    base_actions = [[] for _ in range(n)]
    for i in range(n):
        for a in game.actions[i]:
            if a.base not in base_actions[i]:
                base_actions[i].append(a.base)
    for i in sorted(members):
        for a in base_actions[i]:
            entries[(i, a)] = zero
    per_bettor, events = {}, {}
    for j in sorted(members):
        marg = marginal_action_distribution(game, profile, j)
        mine = {}
        for k, ext in enumerate(game.actions[j]):
            p = marg[k]
            if ext.bet is None or p == 0:
                continue
            events[ext.bet] = events.get(ext.bet, zero) + p
            if isinstance(ext.bet, ActionBet):
                key = (ext.bet.target, ext.bet.action)
                mine[key] = mine.get(key, zero) + p
                if ext.bet.target != j and ext.bet.target in members:
                    entries[key] = entries.get(key, zero) + p
        per_bettor[j] = mine
    return BetProfileStats(entries, per_bettor, events)


# -- coalition search ------------------------------------------------------


@dataclass
class SearchConfig:
    """Bounds of the coalition-deviation search.

    ``grid`` adds, per member and type, mixtures over two-action supports
    with the given weights.  ``max_candidates`` caps the joint deviations
    tried per coalition; hitting it marks the result as partial.
    """

    grid: bool = False
    grid_weights: tuple = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    max_candidates: int = 200_000
    tolerance: Any = None
    candidates: dict | None = None  # coalition tuple -> list of per-member dists
    coalitions: list | None = None
    include_pure: bool = True
    record_all: bool = False
    workers: int | None = None
    cancel: threading.Event | None = None


@dataclass(frozen=True)
class CounterDeviation:
    member: int
    strategy: tuple  # per-type distributions over the member's actions
    gain: Any
    method: str  # "reroute" or "best-response"

    def labels(self, game: Game) -> list:
        return [
            {game.actions[self.member][k]: p for k, p in enumerate(d) if p != 0}
            for d in self.strategy
        ]


@dataclass(frozen=True)
class DeviationReport:
    coalition: tuple
    deviation: dict  # member -> per-type distributions
    profile: StrategyProfile
    utilities: tuple
    reference_utilities: tuple
    all_strictly_gain: bool
    internal_stability: RegretCertificate | None
    counter_deviation: CounterDeviation | None = None

    @property
    def gains(self) -> dict:
        return {i: self.utilities[i] - self.reference_utilities[i] for i in self.coalition}

    @property
    def internally_stable(self) -> bool:
        return self.internal_stability is not None and self.internal_stability.is_nash

    @property
    def refutes(self) -> bool:
        return self.all_strictly_gain and self.internally_stable


@dataclass(frozen=True)
class SearchCoverage:
    coalition_cap: int
    coalitions: tuple
    grid: bool
    grid_weights: tuple
    candidates_evaluated: int
    truncated: tuple  # coalitions whose candidate space exceeded the cap
    cancelled: bool = False

    @property
    def partial(self) -> bool:
        return bool(self.truncated) or self.cancelled

    def describe(self) -> str:
        grid = (
            "pure joint deviations plus two-action mixtures with weights "
            + ",".join(str(w) for w in self.grid_weights)
            if self.grid
            else "pure joint deviations"
        )
        text = (
            f"searched coalitions of size 2..{self.coalition_cap} "
            f"({len(self.coalitions)} coalitions, {self.candidates_evaluated} candidates); {grid}"
        )
        if self.truncated:
            text += f"; PARTIAL: candidate cap reached for {list(self.truncated)}"
        if self.cancelled:
            text += "; PARTIAL: cancelled"
        return text


@dataclass(frozen=True)
class SearchResult:
    reports: tuple
    coverage: SearchCoverage

    @property
    def refutations(self) -> list:
        return [r for r in self.reports if r.refutes]

    @property
    def certified(self) -> bool:
        """No refuting deviation in the searched space (not an unconditional claim)."""
        return not self.refutations

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)


def coalitions_up_to(n: int, cap: int | None) -> list:
    cap = n if cap is None else min(cap, n)
    return [c for size in range(2, cap + 1) for c in itertools.combinations(range(n), size)]


def _member_options(game: Game, player: int, config: SearchConfig) -> list:
    opts = []
    if config.include_pure:
        opts.extend(pure_strategy_dists(game, player, c) for c in pure_strategies(game, player))
    if config.grid:
        n_act = len(game.actions[player])
        weights = [as_number(w, game.exact) for w in config.grid_weights]
        one = as_number(1, game.exact)
        zero = as_number(0, game.exact)
        mixes = []
        for a, b in itertools.combinations(range(n_act), 2):
            for w in weights:
                vec = [zero] * n_act
                vec[a], vec[b] = w, one - w
                mixes.append(vec)
        pures = []
        for k in range(n_act):
            vec = [zero] * n_act
            vec[k] = one
            pures.append(vec)
        per_type = [pures + mixes] * len(game.types[player])
        for combo in itertools.product(*per_type):
            if all(sum(1 for x in d if x != 0) == 1 for d in combo):
                continue  # pure combinations already covered
            opts.append(tuple(combo))
    return opts


def _product_size(sizes) -> int:
    out = 1
    for s in sizes:
        out *= s
    return out


def _reroute(game: Game, reference: StrategyProfile, profile: StrategyProfile,
             coalition: tuple, tolerance):
    """Move a loaded action's mass to an under-played action nobody bets on."""
    if not is_extended(game.actions):
        return None
    if any(a.bet is not None and not isinstance(a.bet, ActionBet) for acts in game.actions for a in acts):
        return None
    stats = bet_stats(game, profile, coalition)
    a_max = max(len({a.base for a in acts}) for acts in game.actions)
    bound = Fraction(1, a_max) if game.exact else 1.0 / a_max
    proj_ref = project_base(reference)
    proj = project_base(profile)
    base_game_actions = proj.actions
    current = expected_utility(game, profile)
    for (i, a_i), load in sorted(stats.entries.items(), key=lambda kv: -kv[1]):
        if load < bound:
            break
        p_ref = _base_marginal(game, proj_ref, i)
        p_now = _base_marginal(game, proj, i)
        k_i = base_game_actions[i].index(a_i)
        if not p_now[k_i] > p_ref[k_i]:
            continue
        for k_alt, alt in enumerate(base_game_actions[i]):
            if not p_now[k_alt] < p_ref[k_alt] or stats.bets_on(i, alt) != 0:
                continue
            lookup = {x: k for k, x in enumerate(game.actions[i])}
            rows = []
            for d in profile.dists[i]:
                vec = list(d)
                for k, ext in enumerate(game.actions[i]):
                    if ext.base == a_i and d[k] != 0:
                        target = lookup.get(ExtendedAction(alt, ext.bet))
                        if target is None:
                            break
                        vec[target] += d[k]
                        vec[k] -= d[k]
                rows.append(vec)
            trial = profile.replace(i, rows)
            gain = expected_utility(game, trial)[i] - current[i]
            if gain > tolerance:
                return CounterDeviation(i, trial.dists[i], gain, "reroute")
    return None


def _base_marginal(game: Game, projected: StrategyProfile, player: int):
    out = None
    for t, d in enumerate(projected.dists[player]):
        term = d * game.type_marginal(player, t)
        out = term if out is None else out + term
    return out


def _evaluate(game: Game, sigma: StrategyProfile, ref_u: list, coalition: tuple,
              member_dists: Sequence, tolerance, record_all: bool):
    profile = sigma
    for i, rows in zip(coalition, member_dists):
        profile = profile.replace(i, rows)
    utils = expected_utility(game, profile)
    gaining = all(utils[i] - ref_u[i] > tolerance for i in coalition)
    if not gaining and not record_all:
        return None
    cert = regret_certificate(game, profile, coalition, tolerance)
    counter = None
    if not cert.is_nash:
        counter = _reroute(game, sigma, profile, coalition, tolerance)
        if counter is None:
            w = cert.worst()
            rows = w.best.dists(game)
            trial = profile.replace(w.player, rows)
            gain = expected_utility(game, trial)[w.player] - utils[w.player]
            counter = CounterDeviation(w.player, tuple(trial.dists[w.player]), gain, "best-response")
    return DeviationReport(
        coalition,
        {i: tuple(profile.dists[i]) for i in coalition},
        profile,
        tuple(utils),
        tuple(ref_u),
        gaining,
        cert,
        counter,
    )


def _search_coalition(game, sigma, ref_u, coalition, config, tolerance):
    if config.candidates is not None and coalition in config.candidates:
        space = list(config.candidates[coalition])
        truncated = False
    else:
        options = [_member_options(game, i, config) for i in coalition]
        total = _product_size(len(o) for o in options)
        truncated = total > config.max_candidates
        space = itertools.islice(itertools.product(*options), config.max_candidates)
    reports, count = [], 0
    for member_dists in space:
        count += 1
        rep = _evaluate(game, sigma, ref_u, coalition, member_dists, tolerance, config.record_all)
        if rep is not None:
            reports.append(rep)
    return reports, count, truncated


def _worker_count(config: SearchConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def semi_strong_search(game: Game, sigma: StrategyProfile, coalition_size_cap: int | None = None,
                       config: SearchConfig | None = None) -> SearchResult:
    """Bounded search for coalition deviations against ``sigma``.

    A report is recorded for every candidate whose members all strictly
    gain.  Such a report refutes semi-strongness unless some member has a
    profitable unilateral deviation inside it; that deviation is attached
    as ``counter_deviation``.  A base profile passed for an extended game
    is lifted bet-free first.
    """
    config = config or SearchConfig()
    if is_extended(game.actions) and not is_extended(sigma.actions):
        sigma = lift(game.actions, sigma)
    check_profile(game, sigma)
    tolerance = default_tolerance(game) if config.tolerance is None else config.tolerance
    coalitions = config.coalitions or coalitions_up_to(game.n_players, coalition_size_cap)
    coalitions = [tuple(c) for c in coalitions]
    cap = coalition_size_cap if coalition_size_cap is not None else game.n_players
    ref_u = expected_utility(game, sigma)
    reports, truncated, evaluated = [], [], 0
    cancelled = False
    workers = _worker_count(config)
    if workers > 1 and len(coalitions) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = []
            for c in coalitions:
                if config.cancel is not None and config.cancel.is_set():
                    cancelled = True
                    break
                futures.append(
                    pool.submit(_search_coalition, game, sigma, ref_u, c,
                                _picklable(config), tolerance)
                )
            for c, fut in zip(coalitions, futures):
                if config.cancel is not None and config.cancel.is_set():
                    cancelled = True
                    fut.cancel()
                    continue
                reps, count, trunc = fut.result()
                reports.extend(reps)
                evaluated += count
                if trunc:
                    truncated.append(c)
    else:
        for c in coalitions:
            if config.cancel is not None and config.cancel.is_set():
                cancelled = True
                break
            reps, count, trunc = _search_coalition(game, sigma, ref_u, c, config, tolerance)
            reports.extend(reps)
            evaluated += count
            if trunc:
                truncated.append(c)
    coverage = SearchCoverage(
        cap,
        tuple(coalitions),
        config.grid,
        tuple(config.grid_weights),
        evaluated,
        tuple(truncated),
        cancelled,
    )
    return SearchResult(tuple(reports), coverage)


def _picklable(config: SearchConfig) -> SearchConfig:
    return SearchConfig(
        grid=config.grid,
        grid_weights=config.grid_weights,
        max_candidates=config.max_candidates,
        tolerance=config.tolerance,
        candidates=config.candidates,
        coalitions=config.coalitions,
        include_pure=config.include_pure,
        record_all=config.record_all,
        workers=1,
        cancel=None,
    )


def evaluate_deviation(game: Game, sigma: StrategyProfile, coalition: Sequence[int],
                       member_dists: Sequence, tolerance=None) -> DeviationReport:
    """Report for one named deviation, recorded whether or not it gains."""
    if is_extended(game.actions) and not is_extended(sigma.actions):
        sigma = lift(game.actions, sigma)
    tolerance = default_tolerance(game) if tolerance is None else tolerance
    return _evaluate(game, sigma, expected_utility(game, sigma), tuple(coalition),
                     member_dists, tolerance, True)


# -- enumeration -----------------------------------------------------------


def enumerate_pure_nash(game: Game, limit: int = 100_000) -> list:
    """All pure Nash equilibria (pure strategies map types to actions)."""
    if game.is_normal_form:
        mask = np.ones(game.shape, dtype=bool)
        for i in range(game.n_players):
            table = game.utilities[i][0]
            best = np.maximum.reduce(table, axis=i, keepdims=True)
            mask &= np.asarray(table >= best, dtype=bool)
        out = []
        for idx in zip(*np.nonzero(mask)):
            labels = [game.actions[i][int(k)] for i, k in enumerate(idx)]
            out.append(StrategyProfile.pure(game, labels))
        return out
    spaces = [list(pure_strategies(game, i)) for i in range(game.n_players)]
    total = _product_size(len(s) for s in spaces)
    if total > limit:
        raise GameError(f"{total} pure strategy profiles exceed the enumeration limit {limit}")
    out = []
    for combo in itertools.product(*spaces):
        dists = tuple(pure_strategy_dists(game, i, c) for i, c in enumerate(combo))
        prof = StrategyProfile(game.actions, dists, game.exact)
        if verify_nash(game, prof).is_nash:
            out.append(prof)
    return out


@dataclass(frozen=True)
class SupportEnumeration:
    equilibria: tuple
    degenerate: tuple  # support pairs whose indifference system was singular
    supports_checked: int


def _solve_min_norm(rows: list, rhs: list, exact: bool):
    """Minimum-norm solution of ``rows @ x = rhs`` or ``None`` if inconsistent."""
    if not exact:
        a = np.array(rows, dtype=float)
        b = np.array(rhs, dtype=float)
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        if np.max(np.abs(a @ x - b)) > 1e-9:
            return None, True
        rank = np.linalg.matrix_rank(a)
        return list(x), rank < a.shape[1]
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncol = len(rows[0])
    pivot_rows, r = [], 0
    for c in range(ncol):
        piv = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [x - f * y for x, y in zip(m[k], m[r])]
        pivot_rows.append(c)
        r += 1
    for k in range(r, len(m)):
        if m[k][-1] != 0:
            return None, r < ncol
    if r == ncol:
        return [m[pivot_rows.index(c)][-1] for c in range(ncol)], False
    # independent rows R: x = R^T (R R^T)^{-1} b
    red = [row[:-1] for row in m[:r]]
    b = [row[-1] for row in m[:r]]
    gram = [[sum(x * y for x, y in zip(u, v)) for v in red] for u in red]
    z, _ = _solve_min_norm(gram, b, True)
    x = [sum(red[k][c] * z[k] for k in range(r)) for c in range(ncol)]
    return x, True


def _indifferent_mix(payoff, rows_idx, cols_idx, exact):
    """Mix over ``cols_idx`` equalizing the rows' payoffs, min-norm if underdetermined."""
    first = rows_idx[0]
    rows = [
        [payoff[r][c] - payoff[first][c] for c in cols_idx] for r in rows_idx[1:]
    ]
    one = as_number(1, exact)
    zero = as_number(0, exact)
    rows.append([one] * len(cols_idx))
    rhs = [zero] * (len(rows) - 1) + [one]
    return _solve_min_norm(rows, rhs, exact)


def support_enumeration_2p(game: Game, tolerance=None) -> SupportEnumeration:
    """Equilibria of a two-player single-type game over equal-size supports."""
    if game.n_players != 2 or not game.is_normal_form:
        raise GameError("support enumeration needs a two-player normal-form game")
    tol = default_tolerance(game) if tolerance is None else tolerance
    a = game.utilities[0][0]
    b = game.utilities[1][0]
    n1, n2 = game.shape
    zero = as_number(0, game.exact)
    found, degenerate, checked = [], [], 0
    for size in range(1, min(n1, n2) + 1):
        for sup1 in itertools.combinations(range(n1), size):
            for sup2 in itertools.combinations(range(n2), size):
                checked += 1
                # player 2's mix makes player 1 indifferent over sup1, and vice versa
                y, deg_y = _indifferent_mix(a, sup1, sup2, game.exact)
                bt = b.T
                x, deg_x = _indifferent_mix(bt, sup2, sup1, game.exact)
                if deg_x or deg_y:
                    degenerate.append((sup1, sup2))
                if x is None or y is None:
                    continue
                if any(v < -tol for v in x) or any(v < -tol for v in y):
                    continue
                dx = [zero] * n1
                dy = [zero] * n2
                for k, v in zip(sup1, x):
                    dx[k] = max(v, zero)
                for k, v in zip(sup2, y):
                    dy[k] = max(v, zero)
                if not game.exact:
                    s1, s2 = sum(dx), sum(dy)
                    dx = [v / s1 for v in dx]
                    dy = [v / s2 for v in dy]
                prof = StrategyProfile(game.actions, ((dx,), (dy,)), game.exact)
                if not verify_nash(game, prof, tol).is_nash:
                    continue
                if not any(prof.same_as(f, 0 if game.exact else 1e-9) for f in found):
                    found.append(prof)
    return SupportEnumeration(tuple(found), tuple(degenerate), checked)
