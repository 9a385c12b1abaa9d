"""Local HTTP/WS game service: live human-vs-bot play and replay review.

Endpoints (all JSON unless noted):

* ``POST /sessions``                  -- create a game: scenario, human side,
  opponent policy, seed.  Returns the session id and the initial view.
* ``GET /sessions/{id}/view``         -- renderable state for the human side:
  board, friendly detail, visible enemies, per-slot masks, queued actions,
  last-tick events, outcome.  Redaction matches the observation encoder; the
  full board is revealed only after the game ends.
* ``POST /sessions/{id}/actions``     -- queue one agent's action index.  The
  tick advances once every ready human agent has an action queued (the bot
  side is filled in server-side); busy/illegal submissions are rejected with
  the current mask.  Ticks where no human agent is ready advance on their
  own.
* ``WS /sessions/{id}/events``        -- ordered push of the session's
  redaction-surviving event records as ticks resolve.
* ``GET /replays`` / ``GET /replays/{id}`` -- finished games as verifiable
  replay logs (newline-delimited JSON).

Sessions are independent; each serializes its mutations through one lock.
Live responses never carry unredacted enemy fields; events that reference
agents the human side cannot currently see are withheld from the live
stream (they remain in the replay).
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Union

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import ENGINE_ID
from .bots import BotFrame, Policy, make_policy
from .engine import AgentAction, GameState
from .engine import reset as engine_reset
from .engine import step as engine_step
from .hexmap import GameMap
from .replay import ReplayWriter
from .rlapi import ObsLayout, TeamView, build_team_view, decode_action, layout_for, side_masks
from .rng import derive_seed
from .scenario import (
    Scenario,
    ScenarioError,
    Side,
    builtin_scenario,
    scenario_from_document,
)

__all__ = ["create_app"]


# -- live event redaction -------------------------------------------------------

def _event_agent_ids(kind: str, data: dict) -> set[int]:
    """Every operator id an event record references."""
    ids = {data[k] for k in ("agent", "attacker", "target", "blocked_by")
           if isinstance(data.get(k), int)}
    if kind == "merged":
        ids.update(data.get("from", ()))
    if kind == "split":
        ids.update(child["id"] for child in data.get("children", ()))
    return ids


def _known_ids(state: GameState, side: Side) -> set[int]:
    """Ids the human side may currently learn about: every friendly id plus
    enemies visible to a living teammate (the view's own redaction rule)."""
    known = {agent_id for agent_id in state.slots[side] if agent_id is not None}
    view = build_team_view(state, side)
    known.update(e.id for e in view.enemies)
    return known


# -- session --------------------------------------------------------------------

@dataclass
class _Session:
    id: str
    scenario: Scenario
    side: Side
    opponent: Policy
    state: GameState
    layout: ObsLayout
    opp_layout: ObsLayout
    writer: ReplayWriter
    sink: IO[str]
    replay_path: Path
    pending: dict[int, int] = field(default_factory=dict)
    stream_log: list[dict] = field(default_factory=list)
    last_events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    finished: bool = False

    @property
    def phase(self) -> str:
        return "finished" if self.finished else "awaiting_action"

    def ready_slots(self) -> set[int]:
        if self.state.outcome is not None:
            return set()
        out = set()
        for slot, agent_id in enumerate(self.state.slots[self.side]):
            if agent_id is not None and self.state.operators[agent_id].ready:
                out.add(slot)
        return out

    # -- tick machinery (caller holds the lock) --------------------------------

    def _bot_actions(self, actions: dict[int, AgentAction]) -> None:
        state = self.state
        other = self.side.opponent
        if not any(agent_id is not None and state.operators[agent_id].ready
                   for agent_id in state.slots[other]):
            return
        frame = BotFrame(side=other, tick=state.tick,
                         view=build_team_view(state, other),
                         masks=side_masks(state, other, self.opp_layout),
                         layout=self.opp_layout, game_map=self.scenario.map)
        for slot, index in self.opponent.act(frame).items():
            agent_id = state.slots[other][slot]
            actions[agent_id] = decode_action(index, self.opp_layout.actions)

    def _tick_once(self) -> None:
        state = self.state
        actions: dict[int, AgentAction] = {}
        for slot, index in self.pending.items():
            agent_id = state.slots[self.side][slot]
            actions[agent_id] = decode_action(index, self.layout.actions)
        self.pending = {}
        self._bot_actions(actions)

        known_pre = _known_ids(state, self.side)
        tick = state.tick
        events = engine_step(state, actions)
        self.writer.record_tick(tick, actions, events)
        known = known_pre | _known_ids(state, self.side)

        self.last_events = []
        for ev in events:
            record = ev.to_record()
            if ev.kind == "episode_end" or _event_agent_ids(
                    ev.kind, ev.data) <= known:
                self.stream_log.append(record)
                self.last_events.append(record)

        if state.outcome is not None:
            self.writer.finish(state)
            self.sink.close()
            self.finished = True

    def advance_while_possible(self) -> int:
        """Run ticks until the human side has a ready agent again (or the
        game ends).  The first tick consumes queued human actions."""
        advanced = 0
        while self.state.outcome is None:
            ready = self.ready_slots()
            if ready and not ready <= set(self.pending):
                break  # waiting on the human
            self._tick_once()
            advanced += 1
        return advanced

    # -- payloads ---------------------------------------------------------------

    def view(self) -> dict:
        state = self.state
        team: TeamView = build_team_view(state, self.side)
        masks = side_masks(state, self.side, self.layout)
        doc = {
            "session": self.id,
            "phase": self.phase,
            "scenario": self.scenario.scenario_id,
            "subenv": self.scenario.subenv.value,
            "side": self.side.value,
            "opponent": self.opponent.name,
            "tick": state.tick,
            "max_ticks": self.scenario.max_ticks,
            "map": _map_doc(self.scenario.map),
            "friends": [_friend_doc(f) for f in team.friends],
            "enemies": [_enemy_doc(e) for e in team.enemies],
            "masks": [[int(b) for b in m] for m in masks],
            "action_labels": _action_labels(self.layout),
            "ready": sorted(self.ready_slots()),
            "pending": {str(slot): index
                        for slot, index in sorted(self.pending.items())},
            "events": self.last_events,
            "outcome": _outcome_doc(state),
        }
        if self.finished:
            doc["full"] = [_operator_doc(op) for op in sorted(
                state.operators.values(), key=lambda o: o.id)]
        return doc


def _map_doc(game_map: GameMap) -> dict:
    hidden = sorted(game_map.hidden, key=lambda h: (h.r, h.q))
    return {"name": game_map.name, "width": game_map.width,
            "height": game_map.height,
            "size_class": game_map.size_class.value,
            "hidden": [[h.q, h.r] for h in hidden]}


def _friend_doc(f) -> dict:
    return {"slot": f.slot, "id": f.id, "type": f.type.value,
            "pos": list(f.pos), "blood": f.blood, "blood_max": f.blood_max,
            "speed": f.speed, "attacked_distance": f.attacked_distance,
            "observed_distance": f.observed_distance, "ready": f.ready,
            "moving": f.moving, "busy_ticks": f.busy_ticks,
            "cooldown": f.cooldown, "lineage": f.lineage}


def _enemy_doc(e) -> dict:
    return {"slot": e.slot, "id": e.id, "type": e.type.value,
            "pos": list(e.pos), "blood": e.blood, "blood_max": e.blood_max,
            "seen_by": list(e.seen_by)}


def _operator_doc(op) -> dict:
    return {"id": op.id, "side": op.side.value, "slot": op.slot,
            "type": op.template.type.value, "pos": [op.pos.q, op.pos.r],
            "blood": op.blood, "alive": op.alive}


def _outcome_doc(state: GameState) -> dict | None:
    outcome = state.outcome
    if outcome is None:
        return None
    return {"result": outcome.result, "reason": outcome.reason,
            "ticks": outcome.ticks, "red_blood": outcome.red_blood,
            "blue_blood": outcome.blue_blood}


def _action_labels(layout: ObsLayout) -> list[str]:
    from .hexmap import DIRECTION_NAMES
    actions = layout.actions
    labels = ["noop", "stop"]
    labels += [f"move {name}" for name in DIRECTION_NAMES]
    labels += [f"shoot slot {s}" for s in range(actions.n_enemies)]
    if actions.cmac:
        labels += ["split 3x", "split 2x"]
        labels += [f"merge slot {s}" for s in range(actions.n_allies)]
    return labels


# -- request bodies -------------------------------------------------------------

class CreateSession(BaseModel):
    scenario: Union[str, dict]
    seed: int
    side: str = "red"
    opponent: str = "kai0"
    opponent_seed: int | None = None


class SubmitAction(BaseModel):
    slot: int
    action: int


# -- app factory ----------------------------------------------------------------

def create_app(replay_dir: Path) -> FastAPI:
    replay_dir = Path(replay_dir)
    replay_dir.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="wgc service", version=ENGINE_ID.split("/")[1])
    sessions: dict[str, _Session] = {}

    def _reject(status: int, error: str, message: str, **extra):
        return JSONResponse({"error": error, "message": message, **extra},
                            status_code=status)

    def _get(session_id: str) -> _Session | None:
        return sessions.get(session_id)

    @app.get("/")
    def root():
        return {"service": ENGINE_ID,
                "endpoints": ["POST /sessions", "GET /sessions/{id}/view",
                              "POST /sessions/{id}/actions",
                              "WS /sessions/{id}/events",
                              "GET /replays", "GET /replays/{id}"]}

    @app.post("/sessions")
    def create_session(body: CreateSession):
        try:
            if isinstance(body.scenario, str):
                scenario = builtin_scenario(body.scenario)
            else:
                scenario = scenario_from_document(body.scenario)
            side = Side(body.side)
            opponent = make_policy(body.opponent)
        except (ScenarioError, ValueError) as exc:
            return _reject(400, "bad_request", str(exc))

        opponent.seed = (body.opponent_seed if body.opponent_seed is not None
                         else derive_seed(body.seed, "opponent"))
        opponent.reset(side.opponent, scenario)
        state = engine_reset(scenario, body.seed)
        session_id = uuid.uuid4().hex[:12]
        replay_path = replay_dir / f"{session_id}.jsonl"
        sink = replay_path.open("w", encoding="utf-8")
        writer = ReplayWriter(sink, scenario, body.seed, {
            side.value: {"name": "human", "version": "human", "seed": 0},
            side.opponent.value: {"name": opponent.name,
                                  "version": opponent.version,
                                  "seed": opponent.seed}})
        session = _Session(
            id=session_id, scenario=scenario, side=side, opponent=opponent,
            state=state, layout=layout_for(scenario, side),
            opp_layout=layout_for(scenario, side.opponent),
            writer=writer, sink=sink, replay_path=replay_path)
        sessions[session_id] = session
        with session.lock:
            session.advance_while_possible()  # no-op unless humans start busy
            return {"session": session_id, "view": session.view()}

    @app.get("/sessions/{session_id}/view")
    def get_view(session_id: str):
        session = _get(session_id)
        if session is None:
            return _reject(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            return session.view()

    @app.post("/sessions/{session_id}/actions")
    def submit_action(session_id: str, body: SubmitAction):
        session = _get(session_id)
        if session is None:
            return _reject(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            if session.finished:
                return _reject(409, "finished", "the game is over")
            layout = session.layout
            if not 0 <= body.slot < layout.n_allies:
                return _reject(400, "bad_slot",
                               f"slot must be in [0, {layout.n_allies})")
            masks = side_masks(session.state, session.side, layout)
            mask = [int(b) for b in masks[body.slot]]
            if body.slot not in session.ready_slots():
                return _reject(409, "not_ready",
                               f"slot {body.slot} cannot act this tick",
                               slot=body.slot, mask=mask)
            if not 0 <= body.action < layout.actions.width \
                    or not mask[body.action]:
                return _reject(409, "illegal_action",
                               f"action {body.action} is not legal for "
                               f"slot {body.slot}",
                               slot=body.slot, action=body.action, mask=mask)
            session.pending[body.slot] = body.action
            advanced = 0
            if session.ready_slots() <= set(session.pending):
                advanced = session.advance_while_possible()
            return {"ok": True, "queued": {"slot": body.slot,
                                           "action": body.action},
                    "advanced": advanced, "view": session.view()}

    @app.websocket("/sessions/{session_id}/events")
    async def stream_events(socket: WebSocket, session_id: str):
        await socket.accept()
        session = _get(session_id)
        if session is None:
            await socket.send_text(json.dumps(
                {"error": "unknown_session", "message": session_id}))
            await socket.close()
            return
        cursor = 0
        try:
            while True:
                log = session.stream_log
                while cursor < len(log):
                    await socket.send_text(json.dumps(log[cursor]))
                    cursor += 1
                if session.finished and cursor == len(session.stream_log):
                    await socket.close()
                    return
                await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return

    @app.get("/replays")
    def list_replays():
        out = []
        for path in sorted(replay_dir.glob("*.jsonl")):
            lines = path.read_text("utf-8").splitlines()
            if len(lines) < 2:
                continue
            try:
                header = json.loads(lines[0])
                end = json.loads(lines[-1])
            except json.JSONDecodeError:
                continue
            if header.get("record") != "header" or end.get("record") != "end":
                continue  # in-flight or truncated
            scenario = header.get("scenario", {})
            out.append({
                "id": path.stem,
                "scenario": f"{scenario.get('subenv')}/{scenario.get('index')}",
                "outcome": end.get("outcome"), "reason": end.get("reason"),
                "ticks": end.get("ticks"), "digest": end.get("digest")})
        return {"replays": out}

    @app.get("/replays/{replay_id}")
    def get_replay(replay_id: str):
        if "/" in replay_id or "\\" in replay_id or ".." in replay_id:
            return _reject(400, "bad_id", "malformed replay id")
        path = replay_dir / f"{replay_id}.jsonl"
        if not path.exists():
            return _reject(404, "unknown_replay", f"no replay {replay_id}")
        return PlainTextResponse(path.read_text("utf-8"),
                                 media_type="application/x-ndjson")

    return app
