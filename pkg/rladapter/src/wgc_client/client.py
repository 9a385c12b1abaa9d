"""RemoteEnv: the conventional reset/step/get_env_info surface over the
newline-delimited JSON step protocol.

The adapter is a pure pass-through.  Requests are canonical JSON (sorted
keys, compact separators), matching the server's own response encoding,
so a transcript of (request, response) lines is byte-identical to any
other correct client's transcript for equal inputs.  Exactly one request
is in flight per handle at any time.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
from dataclasses import dataclass


class AdapterError(Exception):
    """Base for everything this client raises."""


class ContractError(AdapterError):
    """Caller broke the client-side contract (step before reset, wrong
    action count, reuse after close)."""


class ProtocolError(AdapterError):
    """The server sent something that is not a valid protocol record."""


class ServerError(AdapterError):
    """The server answered ok=false; carries the error code and message."""

    def __init__(self, code: str, message: str, error: dict) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.error = error


def canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class StdioTransport:
    """Child process speaking the protocol over its stdin/stdout."""

    def __init__(self, command: list[str] | None = None) -> None:
        self.command = command or [sys.executable, "-m", "wgc.cli",
                                   "protocol", "--stdio"]
        self._proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1)

    def exchange(self, line: str) -> str:
        proc = self._proc
        if proc.poll() is not None:
            raise ProtocolError(
                f"protocol child exited with code {proc.returncode}")
        proc.stdin.write(line + "\n")
        proc.stdin.flush()
        reply = proc.stdout.readline()
        if not reply:
            raise ProtocolError("protocol child closed its stdout")
        return reply.rstrip("\n")

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)


class TcpTransport:
    """Line protocol over a local TCP connection."""

    def __init__(self, host: str = "127.0.0.1", port: int = 9180) -> None:
        self._sock = socket.create_connection((host, port))
        self._reader = self._sock.makefile("r", encoding="utf-8")

    def exchange(self, line: str) -> str:
        self._sock.sendall((line + "\n").encode("utf-8"))
        reply = self._reader.readline()
        if not reply:
            raise ProtocolError("server closed the connection")
        return reply.rstrip("\n")

    def close(self) -> None:
        self._reader.close()
        self._sock.close()


@dataclass(frozen=True)
class EnvInfo:
    scenario: str
    side: str
    n_agents: int
    n_actions: int
    obs_shape: int
    state_shape: int
    episode_limit: int


@dataclass(frozen=True)
class StepResult:
    obs: list[list[float]]
    state: list[float]
    masks: list[list[int]]
    reward: float
    terminated: bool
    info: dict


_ENV_FIELDS = ("scenario", "side", "n_agents", "n_actions", "obs_shape",
               "state_shape", "episode_limit")
_FRAME_FIELDS = ("side", "tick", "agent_ids", "ready", "obs", "masks",
                 "state", "reward", "terminated", "outcome")


def _env_info_from(record: dict) -> EnvInfo:
    missing = [k for k in _ENV_FIELDS if k not in record]
    if missing:
        raise ProtocolError(f"env_info record missing fields {missing}")
    return EnvInfo(**{k: record[k] for k in _ENV_FIELDS})


class RemoteEnv:
    """One environment instance behind a protocol transport.

    Typical loop::

        env = RemoteEnv()                      # spawns the engine CLI
        info = env.env_info("standard/0")
        frame = env.reset("standard/0", seed=7, opponent="random")
        while not frame.terminated:
            frame = env.step(choose(frame.masks))
        env.close()
    """

    def __init__(self, transport=None, session: str = "0") -> None:
        self._transport = transport if transport is not None else StdioTransport()
        self._session = session
        self._info: EnvInfo | None = None
        self._terminated = False
        self._closed = False
        self._busy = False
        self.transcript: list[tuple[str, str]] = []   # (sent, received) lines

    # -- plumbing -----------------------------------------------------------

    def _request(self, record: dict) -> dict:
        if self._closed:
            raise ContractError("handle is closed")
        if self._busy:
            raise ContractError("one request may be in flight per handle")
        self._busy = True
        try:
            line = canonical_line({**record, "session": self._session})
            reply = self._transport.exchange(line)
            self.transcript.append((line, reply))
        finally:
            self._busy = False
        try:
            doc = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"server reply is not JSON: {exc}") from None
        if not isinstance(doc, dict) or "ok" not in doc:
            raise ProtocolError(f"server reply is not a protocol record: {reply}")
        if doc["ok"] is not True:
            error = doc.get("error")
            if not isinstance(error, dict) or "code" not in error:
                raise ProtocolError(f"malformed error record: {reply}")
            raise ServerError(error["code"], error.get("message", ""), error)
        return doc

    def _frame(self, doc: dict) -> StepResult:
        frame = doc.get("frame")
        if not isinstance(frame, dict):
            raise ProtocolError("response carries no frame")
        missing = [k for k in _FRAME_FIELDS if k not in frame]
        if missing:
            raise ProtocolError(f"frame missing fields {missing}")
        self._terminated = bool(frame["terminated"])
        return StepResult(
            obs=frame["obs"], state=frame["state"], masks=frame["masks"],
            reward=frame["reward"], terminated=frame["terminated"],
            info={"tick": frame["tick"], "agent_ids": frame["agent_ids"],
                  "ready": frame["ready"], "outcome": frame["outcome"],
                  "side": frame["side"]})

    # -- the conventional trainer surface ------------------------------------

    def env_info(self, scenario: str | dict | None = None,
                 side: str = "red") -> EnvInfo:
        record: dict = {"op": "env_info"}
        if scenario is not None:
            record["scenario"] = scenario
            record["side"] = side
        doc = self._request(record)
        self._info = _env_info_from(doc)
        return self._info

    get_env_info = env_info

    def reset(self, scenario: str | dict, seed: int, side: str = "red",
              opponent: str | None = None,
              opponent_seed: int | None = None) -> StepResult:
        record: dict = {"op": "reset", "scenario": scenario, "seed": seed,
                        "side": side}
        if opponent is not None:
            record["opponent"] = opponent
        if opponent_seed is not None:
            record["opponent_seed"] = opponent_seed
        doc = self._request(record)
        env_block = doc.get("env_info")
        if not isinstance(env_block, dict):
            raise ProtocolError("reset response carries no env_info")
        self._info = _env_info_from(env_block)
        self._terminated = False
        return self._frame(doc)

    def step(self, actions: list[int]) -> StepResult:
        if self._info is None:
            raise ContractError("step before reset")
        if self._terminated:
            raise ContractError("episode is over; reset first")
        actions = [int(a) for a in actions]
        if len(actions) != self._info.n_agents:
            raise ContractError(
                f"expected {self._info.n_agents} actions, got {len(actions)}")
        doc = self._request({"op": "step", "actions": actions})
        return self._frame(doc)

    def close(self) -> None:
        if self._closed:
            return
        try:
            if self._info is not None:
                self._request({"op": "close"})
        finally:
            self._closed = True
            self._transport.close()

    def __enter__(self) -> "RemoteEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
