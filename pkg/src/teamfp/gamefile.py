"""JSON on-disk formats for games, Markov games, and belief profiles.

Game document (UTF-8 JSON)::

    {
      "kind": "game",
      "teams": [[2, 2], [2, 2]],            # per-team agent action counts
      "zero_sum": true,
      "potentials": [                        # one entry per ordered team pair
        {"row_team": 0, "col_team": 1, "table": [[...], ...]}  # row-major
      ],
      "payoffs": [                           # optional explicit agent payoffs
        {"team": 0, "agent": 0, "opponent": 1, "table": [[...], ...]}
      ]
    }

Markov-game document::

    {
      "kind": "markov-game",
      "horizon": 10,
      "p0": [...],                           # length |S|
      "kernel": [[[...], ...], ...],         # |S| x |A| x |S|, global joint index
      "stage_games": [<game document>, ...]  # one per state, shared team structure
    }

Belief document: {"kind": "beliefs", "vectors": [[...], ...]} with one simplex
vector per team, or the string "uniform" accepted by the CLI directly.

Joint-action indices are mixed-radix with agent 0 least significant; the
global index has team 0 least significant.  Single matrices can also be read
from headerless CSV.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .beliefs import BeliefProfile
from .game import MultiTeamGame, TeamStructure
from .markov import MarkovTeamGame


class GameFileError(Exception):
    """Malformed or unreadable game/MG/belief document."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GameFileError(msg)


def _as_table(obj, shape, what: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as e:
        raise GameFileError(f"{what}: not a numeric table ({e})") from None
    _require(arr.shape == tuple(shape), f"{what}: shape {arr.shape} != expected {tuple(shape)}")
    _require(bool(np.all(np.isfinite(arr))), f"{what}: non-finite entries")
    return arr


def game_to_dict(game: MultiTeamGame) -> dict:
    doc = {
        "kind": "game",
        "teams": [list(t) for t in game.structure.teams],
        "zero_sum": bool(game.zero_sum),
        "potentials": [
            {"row_team": m, "col_team": l, "table": table.tolist()}
            for (m, l), table in sorted(game.potentials.items())
        ],
    }
    if game.payoffs:
        doc["payoffs"] = [
            {"team": m, "agent": i, "opponent": l, "table": table.tolist()}
            for (m, i), per_opp in sorted(game.payoffs.items())
            for l, table in sorted(per_opp.items())
        ]
    return doc


def game_from_dict(doc: dict) -> MultiTeamGame:
    _require(isinstance(doc, dict), "document is not an object")
    _require(doc.get("kind") == "game", f"kind is {doc.get('kind')!r}, expected 'game'")
    teams = doc.get("teams")
    _require(isinstance(teams, list) and teams, "missing team structure")
    try:
        st = TeamStructure.of(teams)
    except (TypeError, ValueError) as e:
        raise GameFileError(f"bad team structure: {e}") from None
    entries = doc.get("potentials")
    _require(isinstance(entries, list), "missing potentials list")
    potentials = {}
    for entry in entries:
        _require(isinstance(entry, dict), "potential entry is not an object")
        m, l = entry.get("row_team"), entry.get("col_team")
        _require(
            isinstance(m, int) and isinstance(l, int)
            and 0 <= m < st.num_teams and 0 <= l < st.num_teams and m != l,
            f"bad team pair ({m}, {l})")
        _require((m, l) not in potentials, f"duplicate potential table for pair ({m}, {l})")
        potentials[(m, l)] = _as_table(
            entry.get("table"), (st.team_size(m), st.team_size(l)),
            f"potential table ({m}, {l})")
    for m in range(st.num_teams):
        for l in range(st.num_teams):
            _require(m == l or (m, l) in potentials, f"missing potential table ({m}, {l})")
    payoffs = {}
    for entry in doc.get("payoffs", []):
        _require(isinstance(entry, dict), "payoff entry is not an object")
        m, i, l = entry.get("team"), entry.get("agent"), entry.get("opponent")
        _require(
            isinstance(m, int) and isinstance(i, int) and isinstance(l, int)
            and 0 <= m < st.num_teams and 0 <= i < st.num_agents(m)
            and 0 <= l < st.num_teams and l != m,
            f"bad payoff key (team={m}, agent={i}, opponent={l})")
        table = _as_table(entry.get("table"), (st.team_size(m), st.team_size(l)),
                          f"payoff table (team={m}, agent={i}, opponent={l})")
        payoffs.setdefault((m, i), {})[l] = table
    return MultiTeamGame(st, potentials, payoffs, zero_sum=bool(doc.get("zero_sum", False)))


def mg_to_dict(mg: MarkovTeamGame) -> dict:
    return {
        "kind": "markov-game",
        "horizon": mg.horizon,
        "p0": mg.p0.tolist(),
        "kernel": mg.kernel.tolist(),
        "stage_games": [game_to_dict(g) for g in mg.stage_games],
    }


def mg_from_dict(doc: dict) -> MarkovTeamGame:
    _require(isinstance(doc, dict), "document is not an object")
    _require(doc.get("kind") == "markov-game",
             f"kind is {doc.get('kind')!r}, expected 'markov-game'")
    horizon = doc.get("horizon")
    _require(isinstance(horizon, int) and horizon >= 1, "horizon must be a positive integer")
    stage_docs = doc.get("stage_games")
    _require(isinstance(stage_docs, list) and stage_docs, "missing stage games")
    stage_games = [game_from_dict(d) for d in stage_docs]
    S = len(stage_games)
    A = stage_games[0].structure.total_size()
    p0 = _as_table(doc.get("p0"), (S,), "initial distribution")
    kernel = _as_table(doc.get("kernel"), (S, A, S), "transition kernel")
    try:
        return MarkovTeamGame(horizon, stage_games, kernel, p0)
    except ValueError as e:
        raise GameFileError(str(e)) from None


def beliefs_to_dict(profile: BeliefProfile) -> dict:
    return {"kind": "beliefs", "vectors": [v.tolist() for v in profile.vectors]}


def beliefs_from_dict(doc: dict, structure: TeamStructure) -> BeliefProfile:
    _require(isinstance(doc, dict), "document is not an object")
    _require(doc.get("kind") == "beliefs", f"kind is {doc.get('kind')!r}, expected 'beliefs'")
    vectors = doc.get("vectors")
    _require(isinstance(vectors, list) and len(vectors) == structure.num_teams,
             f"need {structure.num_teams} belief vectors")
    profile = BeliefProfile([
        _as_table(v, (structure.team_size(m),), f"belief vector {m}")
        for m, v in enumerate(vectors)
    ])
    _require(profile.check(tol=1e-9), "belief vectors are not probability distributions")
    return profile


def stationary_from_dict(doc: dict, structure: TeamStructure) -> dict:
    """Stationary-opponent document: {"kind": "stationary", "strategies": {"<team>": [...]}}.

    Teams listed are held to the given fixed strategy; all others learn.
    """
    _require(isinstance(doc, dict), "document is not an object")
    _require(doc.get("kind") == "stationary",
             f"kind is {doc.get('kind')!r}, expected 'stationary'")
    strategies = doc.get("strategies")
    _require(isinstance(strategies, dict) and strategies, "missing strategies mapping")
    out = {}
    for key, vec in strategies.items():
        try:
            m = int(key)
        except (TypeError, ValueError):
            raise GameFileError(f"bad team index {key!r}") from None
        _require(0 <= m < structure.num_teams, f"team index {m} out of range")
        v = _as_table(vec, (structure.team_size(m),), f"stationary strategy for team {m}")
        _require(bool(np.all(v >= -1e-9)) and abs(float(v.sum()) - 1.0) <= 1e-9,
                 f"stationary strategy for team {m} is not a distribution")
        out[m] = v
    _require(len(out) < structure.num_teams, "at least one team must be left learning")
    return out


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise GameFileError(f"cannot read {path}: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise GameFileError(f"{path}: invalid JSON ({e})") from None


def _dump_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_game(path) -> MultiTeamGame:
    return game_from_dict(_load_json(path))


def save_game(game: MultiTeamGame, path) -> None:
    _dump_json(game_to_dict(game), path)


def load_mg(path) -> MarkovTeamGame:
    return mg_from_dict(_load_json(path))


def save_mg(mg: MarkovTeamGame, path) -> None:
    _dump_json(mg_to_dict(mg), path)


def load_beliefs(path, structure: TeamStructure) -> BeliefProfile:
    return beliefs_from_dict(_load_json(path), structure)


def load_stationary(path, structure: TeamStructure) -> dict:
    return stationary_from_dict(_load_json(path), structure)


def save_beliefs(profile: BeliefProfile, path) -> None:
    _dump_json(beliefs_to_dict(profile), path)


def load_document(path):
    """Load a game or Markov game, dispatching on the document's kind."""
    doc = _load_json(path)
    _require(isinstance(doc, dict), "document is not an object")
    kind = doc.get("kind")
    if kind == "game":
        return game_from_dict(doc)
    if kind == "markov-game":
        return mg_from_dict(doc)
    raise GameFileError(f"unsupported document kind {kind!r}")


def load_matrix_csv(path) -> np.ndarray:
    """Read a single headerless numeric matrix from CSV."""
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if row:
                    rows.append([float(x) for x in row])
    except OSError as e:
        raise GameFileError(f"cannot read {path}: {e}") from None
    except ValueError as e:
        raise GameFileError(f"{path}: non-numeric CSV entry ({e})") from None
    _require(bool(rows), f"{path}: empty CSV matrix")
    widths = {len(r) for r in rows}
    _require(len(widths) == 1, f"{path}: ragged CSV rows")
    return np.asarray(rows, dtype=float)
