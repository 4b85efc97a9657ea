"""Machine- and human-readable analysis reports.

The text rendering is produced from the JSON-ready dictionary alone, so
every number shown to a reader is also present in the machine output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

REPORT_SCHEMA_VERSION = 1


def num(value):
    """JSON-friendly number: rationals become ``"p/q"`` strings."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


def label(game, player: int, action) -> str:
    describe = getattr(action, "describe", None)
    return describe(game.players) if describe else str(action)


def distribution(game, player: int, dist) -> dict:
    return {label(game, player, game.actions[player][k]): num(p) for k, p in enumerate(dist) if p != 0}


def strategy_dict(game, player: int, per_type) -> list:
    return [distribution(game, player, d) for d in per_type]


def certificate_dict(game, cert) -> dict:
    return {
        "is_nash": cert.is_nash,
        "max_regret": num(cert.max_regret),
        "tolerance": num(cert.tolerance),
        "players": [
            {
                "player": str(game.players[e.player]),
                "gain": num(e.gain),
                "type_gains": [num(g) for g in e.type_gains],
                "best_response": [label(game, e.player, a) for a in e.best.labels],
            }
            for e in cert.entries
        ],
    }


def deviation_dict(game, rep) -> dict:
    out = {
        "coalition": [str(game.players[i]) for i in rep.coalition],
        "deviation": {str(game.players[i]): strategy_dict(game, i, rep.deviation[i]) for i in rep.coalition},
        "gains": {str(game.players[i]): num(g) for i, g in rep.gains.items()},
        "all_strictly_gain": rep.all_strictly_gain,
        "internally_stable": rep.internally_stable,
        "refutes": rep.refutes,
    }
    cd = rep.counter_deviation
    if cd is not None:
        out["counter_deviation"] = {
            "member": str(game.players[cd.member]),
            "strategy": strategy_dict(game, cd.member, cd.strategy),
            "gain": num(cd.gain),
            "method": cd.method,
        }
    return out


def verdict_dict(verdict, against: str = "") -> dict:
    return {
        "against": against,
        "relation": verdict.relation,
        "pareto": verdict.pareto,
        "quasi_pareto": verdict.quasi_pareto,
        "strict": verdict.strict,
        "witness": list(verdict.witness) if isinstance(verdict.witness, tuple) else verdict.witness,
    }


def coverage_dict(cov) -> dict:
    return {
        "coalition_cap": cov.coalition_cap,
        "coalitions": len(cov.coalitions),
        "grid": cov.grid,
        "grid_weights": [num(w) for w in cov.grid_weights],
        "candidates_evaluated": cov.candidates_evaluated,
        "partial": cov.partial,
        "truncated": [list(c) for c in cov.truncated],
        "statement": cov.describe(),
    }


@dataclass
class AnalysisReport:
    title: str
    verdict: str = "certified"  # certified | refuted | error
    construction: str | None = None
    penalty_c: Any = None
    span: dict | None = None
    sizes: list | None = None
    nash: dict | None = None
    deviations: list = field(default_factory=list)
    dominance: list = field(default_factory=list)
    coverage: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    children: list = field(default_factory=list)

    def check(self, name: str, passed: bool, observed=None, expected=None) -> bool:
        self.checks.append(
            {"name": name, "passed": bool(passed), "observed": _jsonable(observed), "expected": _jsonable(expected)}
        )
        if not passed and self.verdict == "certified":
            self.verdict = "refuted"
        return bool(passed)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks) and all(ch.all_passed for ch in self.children)

    def to_dict(self) -> dict:
        out = {"schema_version": REPORT_SCHEMA_VERSION, "title": self.title, "verdict": self.verdict}
        for key in ("construction", "penalty_c", "span", "sizes", "nash"):
            value = getattr(self, key)
            if value is not None:
                out[key] = num(value) if key == "penalty_c" else value
        for key in ("deviations", "dominance", "coverage", "checks", "notes"):
            value = getattr(self, key)
            if value:
                out[key] = value
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out

    def render(self) -> str:
        return render_text(self.to_dict())


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, str) or value is None or isinstance(value, bool):
        return value
    return num(value)


def _fmt(value) -> str:
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def render_text(doc: dict, indent: int = 0) -> str:
    pad = "  " * indent
    lines = [f"{pad}== {doc['title']} ==", f"{pad}verdict: {doc['verdict']}"]
    if "construction" in doc:
        lines.append(f"{pad}construction: {doc['construction']}")
    if "penalty_c" in doc:
        lines.append(f"{pad}penalty: {doc['penalty_c']}")
    if "span" in doc:
        s = doc["span"]
        lines.append(f"{pad}utility span: {s['m']} (min {s['m_min']}, max {s['m_max']})")
    for row in doc.get("sizes", []):
        flag = ""
        if row.get("exceeds_bound"):
            flag = f"  [exceeds stated bound {row['stated_bound']}]"
        lines.append(
            f"{pad}player {row['player']}: {row['base']} -> {row['extended']} actions "
            f"(closed form {row['formula']}){flag}"
        )
    if "nash" in doc:
        n = doc["nash"]
        lines.append(f"{pad}nash: {n['is_nash']} (max regret {n['max_regret']}, tolerance {n['tolerance']})")
        for p in n["players"]:
            lines.append(
                f"{pad}  player {p['player']}: gain {p['gain']}, per type {_fmt(p['type_gains'])}, "
                f"best {_fmt(p['best_response'])}"
            )
    for d in doc.get("deviations", []):
        lines.append(
            f"{pad}deviation by {_fmt(d['coalition'])}: {_fmt(d['deviation'])} gains {_fmt(d['gains'])}"
            f" stable={d['internally_stable']} refutes={d['refutes']}"
        )
        if "counter_deviation" in d:
            c = d["counter_deviation"]
            lines.append(
                f"{pad}  counter: player {c['member']} -> {_fmt(c['strategy'])} gain {c['gain']} ({c['method']})"
            )
    for v in doc.get("dominance", []):
        lines.append(f"{pad}dominance vs {v['against']}: {v['relation']} (witness {v['witness']})")
    for c in doc.get("coverage", []):
        lines.append(f"{pad}coverage: {c['statement']}")
    for c in doc.get("checks", []):
        mark = "PASS" if c["passed"] else "FAIL"
        extra = ""
        if c.get("observed") is not None:
            extra += f" observed={_fmt(c['observed'])}"
        if c.get("expected") is not None:
            extra += f" expected={_fmt(c['expected'])}"
        lines.append(f"{pad}[{mark}] {c['name']}{extra}")
    for note in doc.get("notes", []):
        lines.append(f"{pad}note: {note}")
    for child in doc.get("children", []):
        lines.append(render_text(child, indent + 1))
    return "\n".join(lines)
