"""Three pirates split a treasure; two defectors can take it all.

Run with ``python3 demos/pirates_walkthrough.py``.
"""
from semistrong import scenarios as sc
from semistrong.bets import lift
from semistrong.engine import evaluate_deviation, semi_strong_search, verify_nash
from semistrong.extension import build_extension, size_table
from semistrong.game import StrategyProfile, expected_utility


def show(values):
    return ", ".join(str(v) for v in values)


game = sc.pirates()
cooperate = sc.pirates_sigma(game)
print("everyone cooperates:", show(expected_utility(game, cooperate)))
print("no single pirate gains by leaving:", verify_nash(game, cooperate).is_nash)

# players 1 and 2 defect together
pair = StrategyProfile.pure(game, ["Defect", "Defect", "Cooperate"])
dev = evaluate_deviation(game, cooperate, (0, 1), [pair.dists[0], pair.dists[1]])
print("pair defection pays", show(dev.utilities[:2]), "and neither member wants to back out:", dev.internally_stable)

# %% add bets on each other's actions, with a penalty large enough to deter betrayal
ext = build_extension(game, cooperate, "normal-form-action-bets", 601)
for row in size_table(ext):
    print(f"player {row['player']}: {row['base']} -> {row['extended']} actions")

lifted_pair = lift(ext.actions, pair)
dev = evaluate_deviation(ext, cooperate, (0, 1), [lifted_pair.dists[0], lifted_pair.dists[1]])
counter = dev.counter_deviation
print("the same pair now has a member who profits by breaking ranks:")
move = ", ".join(f"{a.describe(game.players)} w.p. {p}" for a, p in counter.labels(ext)[0].items())
print("  player", counter.member + 1, "switches to", move, "gaining", counter.gain)

search = semi_strong_search(ext, cooperate, 2)
print(search.coverage.describe())
print("cooperation survives every searched pair deviation:", search.certified)
