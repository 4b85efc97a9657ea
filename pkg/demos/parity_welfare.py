"""Parity game: playing your own type beats uniform play until bets arrive.

Run with ``python3 demos/parity_welfare.py``.
"""
from semistrong import scenarios as sc
from semistrong.bets import lift
from semistrong.dominance import compare, complete_with_best_bets, welfare_chain_check
from semistrong.engine import verify_nash
from semistrong.extension import build_extension
from semistrong.game import expected_utility


def show(values):
    return ", ".join(str(v) for v in values)


game = sc.parity()
uniform = sc.uniform_sigma(game)
own_type = sc.parity_tau(game)
print("uniform play:", show(expected_utility(game, uniform)))
print("play own type:", show(expected_utility(game, own_type)))

ext = build_extension(game, uniform, "profile-bets")
print("profile bets, penalty", ext.spec.penalty_c, "actions per player", [len(a) for a in ext.actions])

cert = verify_nash(ext, lift(ext.actions, own_type))
worst = cert.worst()
print(f"play-own-type without bets is no longer stable: player {worst.player + 1} gains {cert.max_regret}")

everyone = (0, 1, 2)
betting = complete_with_best_bets(ext, own_type, everyone)
chain = welfare_chain_check(ext, None, betting, everyone)
print("\nwith every player betting optimally:")
for i, (base, win, loss, total) in chain.decomposition.items():
    print(f"  player {i + 1}: base {base}  win {win}  loss {loss}  total {total}")
print("coalition total", chain.total, "<= uniform total", chain.reference_total)
for link in chain.links:
    if link.player == 0:
        print(f"  {link.name:<24} type {link.own_type}  {str(link.lhs):>8} <= {str(link.rhs):>8}")

verdict = compare(expected_utility(ext, ext.lifted_sigma()), expected_utility(ext, betting))
print("\nuniform play quasi-Pareto dominates:", verdict.quasi_pareto)
