"""External step protocol: newline-delimited JSON over stdio or TCP.

Each request and response is one canonical JSON line (sorted keys, compact
separators), so transcripts of equal exchanges are byte-identical.  Records
carry ``op``, ``session``, and payload fields; see docs/protocol.md for the
exact schema.

Ops:

* ``env_info``  -- layout widths for one side of a scenario: ``n_agents``,
  ``n_actions``, ``obs_shape``, ``state_shape``, ``episode_limit``.
* ``reset``     -- bind (scenario, seed, side, opponent) to the session and
  return the tick-0 frame.  The opponent side is driven server-side by a
  named policy (default ``kai0``).
* ``step``      -- advance one tick with a per-slot action index list; slots
  that are not ready must send the noop index.  Returns the next frame.
* ``close``     -- drop the session.

Violations are answered with ``{"ok": false, "error": {...}}`` records and
leave the session intact.  One game per session; sessions on one transport
multiplex via the ``session`` field and are served one request at a time.
"""

from __future__ import annotations

import json
import socketserver
import sys
from dataclasses import dataclass

from . import ENGINE_ID
from .bots import BotFrame, ConfigurationError, Policy, make_policy
from .engine import (
    AgentAction,
    GameState,
    clone_state,
    reset as engine_reset,
    step as engine_step,
)
from .replay import canonical_line
from .rlapi import (
    ObsLayout,
    build_step_frame,
    build_team_view,
    compute_reward,
    decode_action,
    layout_for,
    side_masks,
)
from .rng import derive_seed
from .scenario import (
    Scenario,
    ScenarioError,
    Side,
    builtin_scenario,
    builtin_scenario_ids,
    scenario_from_document,
)

__all__ = [
    "PROTOCOL_VERSION",
    "ProtocolServer",
    "serve_stdio",
    "make_tcp_server",
    "serve_tcp",
]

PROTOCOL_VERSION = 1


class _Violation(Exception):
    """Maps to an error record; never tears a session down."""

    def __init__(self, code: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.message = message
        self.extra = extra


@dataclass
class _Session:
    scenario: Scenario
    side: Side
    layout: ObsLayout
    opp_layout: ObsLayout
    opponent: Policy
    state: GameState


def _env_block(scenario: Scenario, side: Side, layout: ObsLayout) -> dict:
    return {
        "scenario": scenario.scenario_id,
        "side": side.value,
        "n_agents": layout.n_allies,
        "n_actions": layout.actions.width,
        "obs_shape": layout.obs_width,
        "state_shape": layout.state_width,
        "episode_limit": scenario.max_ticks,
    }


def _resolve(spec) -> Scenario:
    if isinstance(spec, str):
        return builtin_scenario(spec)
    if isinstance(spec, dict):
        return scenario_from_document(spec)
    raise _Violation("bad_scenario",
                     "scenario must be a builtin id or an inline document")


def _parse_side(payload) -> Side:
    raw = payload.get("side", "red")
    try:
        return Side(raw)
    except ValueError:
        raise _Violation("bad_side", f"side must be red or blue, got {raw!r}") \
            from None


class ProtocolServer:
    """Dispatches one transport's request records.  Not thread-safe; give
    each connection its own instance (sessions are per-connection)."""

    def __init__(self) -> None:
        self.sessions: dict[str, _Session] = {}

    # -- transport glue ---------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise _Violation("bad_record", "request must be a JSON object")
        except json.JSONDecodeError as exc:
            return canonical_line(_error(None, None, _Violation(
                "bad_json", f"request is not JSON: {exc}")))
        except _Violation as violation:
            return canonical_line(_error(None, None, violation))
        return canonical_line(self.handle(record))

    def handle(self, record: dict) -> dict:
        op = record.get("op")
        session_id = str(record.get("session", "0"))
        try:
            if op == "env_info":
                return self._op_env_info(session_id, record)
            if op == "reset":
                return self._op_reset(session_id, record)
            if op == "step":
                return self._op_step(session_id, record)
            if op == "close":
                return self._op_close(session_id)
            raise _Violation("unknown_op", f"unknown op {op!r}")
        except _Violation as violation:
            return _error(op, session_id, violation)
        except (ScenarioError, ConfigurationError, ValueError) as exc:
            return _error(op, session_id, _Violation("bad_request", str(exc)))

    # -- ops ----------------------------------------------------------------

    def _op_env_info(self, session_id: str, record: dict) -> dict:
        if "scenario" in record:
            scenario = _resolve(record["scenario"])
            side = _parse_side(record)
            layout = layout_for(scenario, side)
        elif session_id in self.sessions:
            sess = self.sessions[session_id]
            scenario, side, layout = sess.scenario, sess.side, sess.layout
        else:
            raise _Violation("no_scenario",
                             "pass a scenario or reset the session first")
        out = {"ok": True, "op": "env_info", "session": session_id,
               "engine": ENGINE_ID, "protocol": PROTOCOL_VERSION,
               "builtin_scenarios": builtin_scenario_ids()}
        out.update(_env_block(scenario, side, layout))
        return out

    def _op_reset(self, session_id: str, record: dict) -> dict:
        if "scenario" not in record:
            raise _Violation("bad_request", "reset requires a scenario")
        if "seed" not in record or not isinstance(record["seed"], int):
            raise _Violation("bad_request", "reset requires an integer seed")
        scenario = _resolve(record["scenario"])
        seed = record["seed"]
        side = _parse_side(record)
        opponent_name = record.get("opponent", "kai0")
        opponent = make_policy(opponent_name)
        opponent.seed = record.get("opponent_seed",
                                   derive_seed(seed, "opponent"))
        opponent.reset(side.opponent, scenario)

        state = engine_reset(scenario, seed)
        layout = layout_for(scenario, side)
        opp_layout = layout_for(scenario, side.opponent)
        self.sessions[session_id] = _Session(
            scenario=scenario, side=side, layout=layout,
            opp_layout=opp_layout, opponent=opponent, state=state)
        frame = build_step_frame(state, side, layout)
        out = {"ok": True, "op": "reset", "session": session_id,
               "env_info": _env_block(scenario, side, layout),
               "frame": frame.to_payload()}
        return out

    def _op_step(self, session_id: str, record: dict) -> dict:
        sess = self._session(session_id)
        state = sess.state
        if state.outcome is not None:
            raise _Violation("terminated",
                             "episode is over; reset the session")
        indices = record.get("actions")
        layout = sess.layout
        if (not isinstance(indices, list)
                or len(indices) != layout.n_allies
                or not all(isinstance(i, int) and not isinstance(i, bool)
                           for i in indices)):
            raise _Violation(
                "bad_actions",
                f"actions must be a list of {layout.n_allies} integers "
                f"(one per slot, noop={layout.actions.NOOP} for non-ready)")

        masks = side_masks(state, sess.side, layout)
        ready = {slot for slot, agent_id in enumerate(state.slots[sess.side])
                 if agent_id is not None and state.operators[agent_id].ready}
        actions: dict[int, AgentAction] = {}
        for slot, index in enumerate(indices):
            if not 0 <= index < layout.actions.width:
                raise _Violation("illegal_action",
                                 f"slot {slot}: index {index} out of range",
                                 agent=slot, index=index)
            if slot not in ready:
                if index != layout.actions.NOOP:
                    raise _Violation(
                        "illegal_action",
                        f"slot {slot} is not ready; send noop "
                        f"({layout.actions.NOOP}), got {index}",
                        agent=slot, index=index)
                continue
            if not masks[slot][index]:
                raise _Violation("illegal_action",
                                 f"slot {slot}: index {index} is mask-false",
                                 agent=slot, index=index)
            agent_id = state.slots[sess.side][slot]
            actions[agent_id] = decode_action(index, layout.actions)

        opp_view_side = sess.side.opponent
        opp_frame_needed = any(
            agent_id is not None and state.operators[agent_id].ready
            for agent_id in state.slots[opp_view_side])
        if opp_frame_needed:
            frame = BotFrame(side=opp_view_side, tick=state.tick,
                             view=build_team_view(state, opp_view_side),
                             masks=side_masks(state, opp_view_side,
                                              sess.opp_layout),
                             layout=sess.opp_layout,
                             game_map=sess.scenario.map)
            for slot, index in sess.opponent.act(frame).items():
                agent_id = state.slots[opp_view_side][slot]
                actions[agent_id] = decode_action(index,
                                                  sess.opp_layout.actions)

        prev = clone_state(state)
        engine_step(state, actions)
        reward = compute_reward(prev, state, sess.side)
        frame = build_step_frame(state, sess.side, layout, reward=reward)
        return {"ok": True, "op": "step", "session": session_id,
                "frame": frame.to_payload()}

    def _op_close(self, session_id: str) -> dict:
        self.sessions.pop(session_id, None)
        return {"ok": True, "op": "close", "session": session_id}

    def _session(self, session_id: str) -> _Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise _Violation("no_session",
                             f"session {session_id!r} has not been reset") \
                from None


def _error(op: str | None, session_id: str | None, v: _Violation) -> dict:
    error = {"code": v.code, "message": v.message}
    error.update(v.extra)
    return {"ok": False, "op": op, "session": session_id, "error": error}


def serve_stdio(stdin=None, stdout=None) -> None:
    """Serve one session stream over stdin/stdout until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    server = ProtocolServer()
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(server.handle_line(line) + "\n")
        stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server = ProtocolServer()
        for raw in self.rfile:
            line = raw.decode("utf-8")
            if not line.strip():
                continue
            self.wfile.write((server.handle_line(line) + "\n").encode("utf-8"))
            self.wfile.flush()


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def make_tcp_server(host: str = "127.0.0.1", port: int = 0) -> _TCPServer:
    """Bound but not yet serving; callers drive serve_forever()/shutdown()."""
    return _TCPServer((host, port), _Handler)


def serve_tcp(host: str = "127.0.0.1", port: int = 9180) -> None:
    with make_tcp_server(host, port) as server:
        bound = server.server_address
        print(f"step protocol listening on {bound[0]}:{bound[1]}",
              file=sys.stderr)
        server.serve_forever()
