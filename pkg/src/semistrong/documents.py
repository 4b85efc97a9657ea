"""JSON documents for games, extended games and strategy profiles.

Numbers are written as rational strings (``"3/4"``) in exact mode and as
JSON numbers in float mode.  Extended actions are written as structured
labels ``{"base": ..., "bet": {"kind", "target", "payload"}}``.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .bets import ActionBet, ExtendedAction, ProfileBet, SetBet
from .game import Game, GameError, StrategyProfile, UtilitySpan, as_number

SCHEMA_VERSION = 1


class DocumentError(GameError):
    """A document failed validation; ``pointer`` locates the offending element."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.detail = message


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("semistrong").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _validate(doc: Any, name: str) -> None:
    validator = jsonschema.Draft202012Validator(schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise DocumentError(err.message, _pointer(err.absolute_path))


# -- scalars ---------------------------------------------------------------


def number_to_json(value, exact: bool):
    if exact:
        value = Fraction(value)
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return float(value)


def number_from_json(value, exact: bool, pointer: str):
    if isinstance(value, str):
        value = value.replace(" ", "")
    try:
        return as_number(value, exact)
    except GameError as exc:
        raise DocumentError(str(exc), pointer) from None


def label_to_json(label, players):
    if isinstance(label, ExtendedAction):
        bet = label.bet
        if bet is None:
            out_bet = None
        elif isinstance(bet, ActionBet):
            out_bet = {"kind": "action", "target": players[bet.target], "payload": bet.action}
        elif isinstance(bet, SetBet):
            out_bet = {"kind": "set", "target": players[bet.target], "payload": list(bet.actions)}
        else:
            out_bet = {"kind": "profile", "target": None, "payload": list(bet.profile)}
        return {"base": label.base, "bet": out_bet}
    return label


def label_from_json(value, players, pointer: str):
    if isinstance(value, dict):
        bet = value.get("bet")
        if bet is None:
            return ExtendedAction(value["base"])
        kind = bet["kind"]
        if kind == "profile":
            payload = bet["payload"]
            if not isinstance(payload, list):
                raise DocumentError("profile bet payload must be a list", pointer + "/bet/payload")
            return ExtendedAction(value["base"], ProfileBet(tuple(payload)))
        if bet.get("target") not in players:
            raise DocumentError(f"unknown bet target {bet.get('target')!r}", pointer + "/bet/target")
        target = players.index(bet["target"])
        if kind == "action":
            return ExtendedAction(value["base"], ActionBet(target, bet["payload"]))
        payload = bet["payload"]
        if not isinstance(payload, list):
            raise DocumentError("set bet payload must be a list", pointer + "/bet/payload")
        return ExtendedAction(value["base"], SetBet(target, tuple(payload)))
    return value


# -- games -----------------------------------------------------------------


def game_to_document(game: Game) -> dict:
    players = list(game.players)
    exact = game.exact
    # single-type games keep their type labels unless they are the default
    bayes = not game.is_normal_form or any(t != (None,) for t in game.types)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "bayesian" if bayes else "normal-form",
        "arithmetic": "rational" if exact else "float",
        "players": players,
        "actions": [[label_to_json(a, players) for a in acts] for acts in game.actions],
    }
    if bayes:
        doc["types"] = [list(t) for t in game.types]
        doc["prior"] = [
            {
                "type_profile": [game.types[i][t] for i, t in enumerate(tprof)],
                "probability": number_to_json(p, exact),
            }
            for tprof, p in sorted(game.prior.items())
        ]
    utilities = []
    for i in range(game.n_players):
        for t, table in enumerate(game.utilities[i]):
            for idx in game.profiles():
                entry = {"player": players[i]}
                if bayes:
                    entry["type"] = game.types[i][t]
                entry["action_profile"] = [
                    label_to_json(game.actions[k][x], players) for k, x in enumerate(idx)
                ]
                entry["value"] = number_to_json(table[idx], exact)
                utilities.append(entry)
    doc["utilities"] = utilities
    spec = getattr(game, "spec", None)
    if spec is not None:
        doc["extension"] = {
            "construction": spec.construction.value,
            "penalty_c": number_to_json(spec.penalty_c, exact),
            "span": [number_to_json(spec.span.m_min, exact), number_to_json(spec.span.m_max, exact)],
            "base": game_to_document(game.base),
            "reference_equilibrium": strategy_to_document(game.base, spec.reference_equilibrium),
        }
    return doc


def _key(label):
    """Hashable form of a JSON label for lookups."""
    return json.dumps(label, sort_keys=True)


def game_from_document(doc: dict, exact: bool | None = None, _root: str = "") -> Game:
    _validate(doc, "game")
    if exact is None:
        exact = doc.get("arithmetic", "rational") == "rational"
    players = list(doc["players"])
    if len(set(map(_key, players))) != len(players):
        raise DocumentError("duplicate player identifiers", _root + "/players")
    n = len(players)
    if len(doc["actions"]) != n:
        raise DocumentError("need one action list per player", _root + "/actions")
    actions = []
    lookup = []
    for i, acts in enumerate(doc["actions"]):
        labels = [
            label_from_json(a, players, f"{_root}/actions/{i}/{k}") for k, a in enumerate(acts)
        ]
        actions.append(tuple(labels))
        keys = {}
        for k, a in enumerate(labels):
            if a in keys:
                raise DocumentError("duplicate action label", f"{_root}/actions/{i}/{k}")
            keys[a] = k
        lookup.append(keys)
    bayesian = doc["kind"] == "bayesian"
    if bayesian:
        if "types" not in doc or "prior" not in doc:
            raise DocumentError("bayesian documents need types and prior", _root or "/")
        types = [tuple(t) for t in doc["types"]]
        if len(types) != n:
            raise DocumentError("need one type list per player", _root + "/types")
        prior = {}
        total = 0
        for k, entry in enumerate(doc["prior"]):
            ptr = f"{_root}/prior/{k}"
            tp = entry["type_profile"]
            if len(tp) != n:
                raise DocumentError("type profile has the wrong length", ptr + "/type_profile")
            try:
                key = tuple(types[i].index(t) for i, t in enumerate(tp))
            except ValueError:
                raise DocumentError(f"unknown type in {tp}", ptr + "/type_profile") from None
            if key in prior:
                raise DocumentError("duplicate type profile", ptr + "/type_profile")
            prob = number_from_json(entry["probability"], exact, ptr + "/probability")
            if prob < 0:
                raise DocumentError("negative probability", ptr + "/probability")
            prior[key] = prob
            total += prob
        ok = total == 1 if exact else abs(total - 1) <= 1e-9
        if not ok:
            raise DocumentError(f"prior sums to {total}, not 1", _root + "/prior")
    else:
        types = [(None,)] * n
        prior = {(0,) * n: 1}
    shape = tuple(len(a) for a in actions)
    seen = {}
    for k, entry in enumerate(doc["utilities"]):
        ptr = f"{_root}/utilities/{k}"
        if _key(entry["player"]) not in map(_key, players):
            raise DocumentError(f"unknown player {entry['player']!r}", ptr + "/player")
        i = [_key(p) for p in players].index(_key(entry["player"]))
        if bayesian:
            if entry.get("type") not in types[i]:
                raise DocumentError(f"unknown type {entry.get('type')!r}", ptr + "/type")
            t = types[i].index(entry["type"])
        else:
            t = 0
        prof = entry["action_profile"]
        if len(prof) != n:
            raise DocumentError("action profile has the wrong length", ptr + "/action_profile")
        idx = []
        for j, a in enumerate(prof):
            pos = lookup[j].get(label_from_json(a, players, f"{ptr}/action_profile/{j}"))
            if pos is None:
                raise DocumentError(f"unknown action {a!r}", f"{ptr}/action_profile/{j}")
            idx.append(pos)
        cell = (i, t, tuple(idx))
        if cell in seen:
            raise DocumentError("duplicate utility entry", ptr)
        seen[cell] = number_from_json(entry["value"], exact, ptr + "/value")
    tables = []
    for i in range(n):
        row = []
        for t in range(len(types[i])):
            arr = np.empty(shape, dtype=object if exact else float)
            for idx in itertools.product(*(range(s) for s in shape)):
                if (i, t, idx) not in seen:
                    labels = [actions[j][x] for j, x in enumerate(idx)]
                    raise DocumentError(
                        f"missing utility for player {players[i]!r}, type {types[i][t]!r}, "
                        f"profile {labels}",
                        _root + "/utilities",
                    )
                arr[idx] = seen[(i, t, idx)]
            row.append(arr)
        tables.append(tuple(row))
    try:
        game = Game(tuple(players), tuple(actions), tuple(types), prior, tuple(tables), exact)
    except DocumentError:
        raise
    except GameError as exc:
        raise DocumentError(str(exc), _root or "/") from None
    if "extension" in doc:
        game = _attach_extension(game, doc["extension"], exact, _root + "/extension")
    return game


def _attach_extension(game: Game, block: dict, exact: bool, root: str):
    from .extension import Construction, ExtendedGame, ExtensionSpec

    base = game_from_document(block["base"], exact, root + "/base")
    sigma = strategy_from_document(block["reference_equilibrium"], base, root + "/reference_equilibrium")
    span = UtilitySpan(
        number_from_json(block["span"][0], exact, root + "/span/0"),
        number_from_json(block["span"][1], exact, root + "/span/1"),
    )
    construction = Construction(block["construction"])
    families = ()
    if construction is Construction.SET_BETS:
        fams = [[] for _ in range(base.n_players)]
        for acts in game.actions:
            for a in acts:
                if a.bet is not None and a.bet.actions not in fams[a.bet.target]:
                    fams[a.bet.target].append(a.bet.actions)
        families = tuple(tuple(f) for f in fams)
    spec = ExtensionSpec(
        construction,
        sigma,
        span,
        number_from_json(block["penalty_c"], exact, root + "/penalty_c"),
        base.a_max,
        families,
    )
    return ExtendedGame(
        game.players, game.actions, game.types, dict(game.prior), game.utilities, game.exact,
        base=base, spec=spec, calibration={"construction": construction.value},
    )


# -- strategies ------------------------------------------------------------


def strategy_to_document(game: Game, profile: StrategyProfile) -> dict:
    players = list(game.players)
    entries = []
    for i, row in enumerate(profile.dists):
        for t, d in enumerate(row):
            entry = {"player": players[i]}
            if not game.is_normal_form:
                entry["type"] = game.types[i][t]
            entry["distribution"] = [
                {
                    "action": label_to_json(profile.actions[i][k], players),
                    "probability": number_to_json(p, profile.exact),
                }
                for k, p in enumerate(d)
                if p != 0
            ]
            entries.append(entry)
    return {"schema_version": SCHEMA_VERSION, "kind": "strategy", "players": players, "strategies": entries}


def strategy_from_document(doc: dict, game: Game, _root: str = "") -> StrategyProfile:
    _validate(doc, "strategy")
    players = list(game.players)
    pkeys = [_key(p) for p in players]
    akeys = [{a: k for k, a in enumerate(acts)} for acts in game.actions]
    rows = [[None] * len(game.types[i]) for i in range(game.n_players)]
    for k, entry in enumerate(doc["strategies"]):
        ptr = f"{_root}/strategies/{k}"
        if _key(entry["player"]) not in pkeys:
            raise DocumentError(f"unknown player {entry['player']!r}", ptr + "/player")
        i = pkeys.index(_key(entry["player"]))
        if game.is_normal_form:
            type_list = [0]
        elif "type" in entry:
            if entry["type"] not in game.types[i]:
                raise DocumentError(f"unknown type {entry['type']!r}", ptr + "/type")
            type_list = [game.types[i].index(entry["type"])]
        else:
            type_list = list(range(len(game.types[i])))
        vec = [as_number(0, game.exact)] * len(game.actions[i])
        for m, item in enumerate(entry["distribution"]):
            pos = akeys[i].get(label_from_json(item["action"], players, f"{ptr}/distribution/{m}/action"))
            if pos is None:
                raise DocumentError(f"unknown action {item['action']!r}", f"{ptr}/distribution/{m}/action")
            vec[pos] += number_from_json(item["probability"], game.exact, f"{ptr}/distribution/{m}/probability")
        for t in type_list:
            if rows[i][t] is not None:
                raise DocumentError("duplicate strategy entry", ptr)
            rows[i][t] = vec
    for i, row in enumerate(rows):
        for t, d in enumerate(row):
            if d is None:
                raise DocumentError(
                    f"no strategy for player {players[i]!r}, type {game.types[i][t]!r}",
                    _root + "/strategies",
                )
    try:
        return StrategyProfile(game.actions, tuple(tuple(r) for r in rows), game.exact)
    except GameError as exc:
        raise DocumentError(str(exc), _root + "/strategies") from None


# -- files -----------------------------------------------------------------


def write_json_atomic(path, payload) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg} at line {exc.lineno}", "/") from None


def load_game(path, exact: bool | None = None) -> Game:
    return game_from_document(_read(path), exact)


def save_game(game: Game, path) -> None:
    write_json_atomic(path, game_to_document(game))


def load_strategy(path, game: Game) -> StrategyProfile:
    return strategy_from_document(_read(path), game)


def save_strategy(game: Game, profile: StrategyProfile, path) -> None:
    write_json_atomic(path, strategy_to_document(game, profile))
