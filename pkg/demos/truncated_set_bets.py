"""Two players over 0..N: spreading beats all-zero, until set bets appear.

Run with ``python3 demos/truncated_set_bets.py [N]``.
"""
import sys

from semistrong import scenarios as sc
from semistrong.bets import SetBet, lift
from semistrong.engine import SearchConfig, semi_strong_search, verify_nash
from semistrong.dominance import set_bet_violations
from semistrong.extension import build_extension, expected_bet_payoff
from semistrong.game import expected_utility


def show(values):
    return ", ".join(str(v) for v in values)


n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
game = sc.truncated_infinite(n)
zero = sc.zero_sigma(game)
spread = sc.spread_tau(game)
print(f"N={n}: all-zero ({show(expected_utility(game, zero))}), spread over 1..N ({show(expected_utility(game, spread))})")

ext = build_extension(game, zero, "set-bets")
print("set-bet families:", [len(f) for f in ext.spec.set_families],
      "(capped)" if ext.spec.capped_players else "(full)")
lifted = lift(ext.actions, spread)
bet = SetBet(1, tuple(range(1, n + 1)))
print("player 1 betting that player 2 avoids zero gains", expected_bet_payoff(ext, lifted, 0, bet))
print("lifted spread play is still Nash:", verify_nash(ext, lifted).is_nash)

# %% with N=3 every subset is a bet; inspect the stable deviations
small = sc.truncated_infinite(3)
small_ext = build_extension(small, sc.zero_sigma(small), "set-bets")
search = semi_strong_search(small_ext, sc.zero_sigma(small), 2, SearchConfig(record_all=True))
stable = [r for r in search.reports if r.internally_stable]
bad = [r for r in stable if set_bet_violations(small_ext, r.profile, r.coalition)]
print(f"N=3: {len(stable)} stable deviations, {len(bad)} bet on the wrong sets, "
      f"gaining and stable: {len(search.refutations)}")
