"""Betting extensions that make a chosen Nash equilibrium coalition-proof.

The package builds extended games whose extra actions are side bets on
other players' play, and checks by exact enumeration that the chosen
equilibrium survives coalition deviations and dominates alternatives.
"""

from .bets import ActionBet, ExtendedAction, ProfileBet, SetBet, decorate, lift, project_base
from .documents import DocumentError, load_game, load_strategy, save_game, save_strategy
from .dominance import (
    PARETO,
    QUASI_PARETO,
    NEITHER,
    compare,
    manhattan_delta,
    set_bet_violations,
    support_split,
    welfare_chain_check,
)
from .engine import (
    SearchConfig,
    bet_stats,
    best_response,
    enumerate_pure_nash,
    evaluate_deviation,
    semi_strong_search,
    support_enumeration_2p,
    verify_nash,
)
from .extension import (
    Construction,
    ExtendedGame,
    ExtensionRefused,
    build_extension,
    expected_bet_payoff,
    size_table,
)
from .game import Game, GameError, StrategyProfile, expected_utility
from .report import AnalysisReport

__version__ = "0.1.0"
