"""Replay files: newline-delimited JSON, one record per line.

Record order in a file::

    {"record": "header", "format": 1, "engine": "wgc/<version>",
     "scenario": {<scenario document>}, "engine_seed": <int>,
     "policies": {"red": {"name", "version", "seed"}, "blue": {...}}}
    {"record": "actions", "tick": 0, "actions": {"<agent_id>": {<action>}}}
    {"record": "event", "tick": 0, "seq": 0, "kind": "...", "data": {...}}
    ...
    {"record": "end", "outcome": "...", "reason": "...", "ticks": n,
     "red_blood": x, "blue_blood": y, "digest": "<sha256 of event lines>"}

Every line is canonical JSON (sorted keys, no spaces), so identical games
produce byte-identical files and the digest (sha256 over the canonical
event lines joined by newlines) is stable.  ``verify_replay`` re-simulates
the recorded actions against the recorded seed and reports the first
divergence, which catches both engine drift and tampered files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from . import __version__
from .engine import ActionKind, AgentAction, GameState, reset, step
from .scenario import Scenario, scenario_from_document, scenario_to_document

__all__ = [
    "ReplayError",
    "ReplayWriter",
    "Replay",
    "action_to_doc",
    "action_from_doc",
    "canonical_line",
    "load_replay",
    "verify_replay",
    "VerifyResult",
]

REPLAY_FORMAT = 1


class ReplayError(ValueError):
    """Structurally invalid replay file."""


def canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def action_to_doc(action: AgentAction) -> dict:
    doc: dict = {"kind": action.kind.value}
    for key in ("direction", "target_slot", "option", "ally_slot"):
        value = getattr(action, key)
        if value is not None:
            doc[key] = value
    return doc


def action_from_doc(doc: dict) -> AgentAction:
    try:
        kind = ActionKind(doc["kind"])
    except (KeyError, ValueError):
        raise ReplayError(f"bad action record {doc!r}") from None
    return AgentAction(
        kind=kind,
        direction=doc.get("direction"),
        target_slot=doc.get("target_slot"),
        option=doc.get("option"),
        ally_slot=doc.get("ally_slot"))


def events_digest(event_records: list[dict]) -> str:
    joined = "\n".join(canonical_line(r) for r in event_records)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


class ReplayWriter:
    """Streams one game to a file-like sink as it is simulated."""

    def __init__(self, sink: IO[str], scenario: Scenario, engine_seed: int,
                 policies: dict[str, dict]) -> None:
        self._sink = sink
        self._event_records: list[dict] = []
        self._write({
            "record": "header", "format": REPLAY_FORMAT,
            "engine": f"wgc/{__version__}",
            "scenario": scenario_to_document(scenario),
            "engine_seed": engine_seed,
            "policies": policies,
        })

    def _write(self, record: dict) -> None:
        self._sink.write(canonical_line(record) + "\n")

    def record_tick(self, tick: int, actions: dict[int, AgentAction],
                    events) -> None:
        self._write({
            "record": "actions", "tick": tick,
            "actions": {str(i): action_to_doc(a)
                        for i, a in sorted(actions.items())}})
        for ev in events:
            rec = ev.to_record()
            self._event_records.append(rec)
            self._write(rec)

    def finish(self, state: GameState) -> str:
        outcome = state.outcome
        assert outcome is not None, "finish() before the game ended"
        digest = events_digest(self._event_records)
        self._write({
            "record": "end", "outcome": outcome.result,
            "reason": outcome.reason, "ticks": outcome.ticks,
            "red_blood": outcome.red_blood, "blue_blood": outcome.blue_blood,
            "digest": digest})
        return digest


@dataclass
class Replay:
    header: dict
    ticks: list[tuple[int, dict[int, AgentAction]]]   # (tick, actions)
    event_records: list[dict]
    end: dict

    @property
    def digest(self) -> str:
        return self.end["digest"]

    def scenario(self) -> Scenario:
        return scenario_from_document(self.header["scenario"])


def load_replay(source: str | Path) -> Replay:
    text = Path(source).read_text("utf-8") if isinstance(source, Path) else source
    header = None
    end = None
    ticks: list[tuple[int, dict[int, AgentAction]]] = []
    event_records: list[dict] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"line {lineno}: not JSON ({exc})") from None
        kind = record.get("record")
        if kind == "header":
            if header is not None:
                raise ReplayError(f"line {lineno}: duplicate header")
            header = record
        elif kind == "actions":
            ticks.append((record["tick"],
                          {int(i): action_from_doc(a)
                           for i, a in record["actions"].items()}))
        elif kind == "event":
            event_records.append(record)
        elif kind == "end":
            end = record
        else:
            raise ReplayError(f"line {lineno}: unknown record type {kind!r}")
    if header is None:
        raise ReplayError("missing header record")
    if end is None:
        raise ReplayError("missing end record (truncated replay)")
    if header.get("format") != REPLAY_FORMAT:
        raise ReplayError(f"unsupported format {header.get('format')!r}")
    return Replay(header=header, ticks=ticks, event_records=event_records,
                  end=end)


@dataclass
class VerifyResult:
    ok: bool
    divergence: str | None = None
    ticks: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_replay(source: str | Path) -> VerifyResult:
    """Re-simulate a replay from its recorded seed and actions; report the
    first point where the new event stream differs from the recorded one."""
    text = Path(source).read_text("utf-8") if isinstance(source, Path) else source
    try:
        replay = load_replay(text)
        scenario = replay.scenario()
    except (ReplayError, ValueError) as exc:
        return VerifyResult(ok=False, divergence=f"unreadable replay: {exc}")

    state = reset(scenario, replay.header["engine_seed"])
    cursor = 0
    recorded = replay.event_records
    for tick, actions in replay.ticks:
        if state.tick != tick:
            return VerifyResult(ok=False, ticks=state.tick, divergence=(
                f"actions record for tick {tick} arrived at engine tick "
                f"{state.tick}"))
        if state.outcome is not None:
            return VerifyResult(ok=False, ticks=state.tick, divergence=(
                f"actions recorded at tick {tick} but the game already ended"))
        try:
            events = step(state, actions)
        except Exception as exc:  # noqa: BLE001 - divergence reporting
            return VerifyResult(ok=False, ticks=tick, divergence=(
                f"tick {tick}: recorded actions rejected: {exc}"))
        for ev in events:
            if cursor >= len(recorded):
                return VerifyResult(ok=False, ticks=tick, divergence=(
                    f"tick {tick}: simulation produced extra event "
                    f"{canonical_line(ev.to_record())}"))
            got = canonical_line(ev.to_record())
            want = canonical_line(recorded[cursor])
            if got != want:
                return VerifyResult(ok=False, ticks=tick, divergence=(
                    f"tick {tick} seq {ev.seq}: recorded {want} but "
                    f"re-simulation produced {got}"))
            cursor += 1
    if cursor != len(recorded):
        return VerifyResult(ok=False, ticks=state.tick, divergence=(
            f"{len(recorded) - cursor} recorded events were never produced "
            f"(first: {canonical_line(recorded[cursor])})"))
    if state.outcome is None:
        return VerifyResult(ok=False, ticks=state.tick,
                            divergence="replay ends before the game does")

    end = replay.end
    expect_digest = events_digest(recorded)
    problems = []
    if end["outcome"] != state.outcome.result:
        problems.append(f"outcome {end['outcome']} != {state.outcome.result}")
    if end["ticks"] != state.outcome.ticks:
        problems.append(f"ticks {end['ticks']} != {state.outcome.ticks}")
    if abs(end["red_blood"] - state.outcome.red_blood) > 1e-9:
        problems.append("red_blood mismatch")
    if abs(end["blue_blood"] - state.outcome.blue_blood) > 1e-9:
        problems.append("blue_blood mismatch")
    if end["digest"] != expect_digest:
        problems.append("digest mismatch")
    if problems:
        return VerifyResult(ok=False, ticks=state.outcome.ticks,
                            divergence="end record: " + "; ".join(problems))
    return VerifyResult(ok=True, ticks=state.outcome.ticks)
