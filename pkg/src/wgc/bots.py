"""Scripted baseline policies.

Policies see exactly what an RL controller for their side would see: the
redacted :class:`~wgc.rlapi.TeamView` plus per-slot action masks.  They
return action indices per ready slot and never emit a mask-false index.

* ``kai0`` (center rush): every agent heads straight for the map center
  and shoots whenever something shootable appears, preferring the target
  with the lowest blood.
* ``kai1`` (terrain ambush): agents claim concealment cells in the middle
  third of the map (infantry sits on them, vehicles flank adjacent),
  hold, and shoot opportunistically.  On maps with no concealment the
  side forms a hold line a third of the way in.  Not defined for cmac.
* ``random``: uniform over the mask-legal indices, own seeded stream.
* ``stop``: braces every tick (the no-combat baseline).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .hexmap import GameMap, HexCoord, hex_distance
from .rlapi import ObsLayout, TeamView
from .scenario import OperatorType, Scenario, Side, SubEnv

__all__ = [
    "BotFrame",
    "Policy",
    "ConfigurationError",
    "Kai0Policy",
    "Kai1Policy",
    "RandomPolicy",
    "StopPolicy",
    "POLICY_NAMES",
    "make_policy",
    "policy_version",
]


class ConfigurationError(ValueError):
    """Scenario/policy combination that is defined to be invalid."""


@dataclass
class BotFrame:
    """Per-tick input for a scripted policy (one side's knowledge only)."""

    side: Side
    tick: int
    view: TeamView
    masks: list[np.ndarray]            # per slot
    layout: ObsLayout
    game_map: GameMap


class Policy:
    """Base: subclasses implement act() returning {slot: action_index}
    covering every ready slot in the frame."""

    name = "base"
    version = "base-v0"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def reset(self, side: Side, scenario: Scenario) -> None:
        self.side = side
        self.scenario = scenario

    def act(self, frame: BotFrame) -> dict[int, int]:
        raise NotImplementedError


def _ready_slots(frame: BotFrame) -> list[int]:
    return [f.slot for f in frame.view.friends if f.ready]


def _shoot_choice(frame: BotFrame, slot: int) -> int | None:
    """Lowest-blood visible target among mask-legal shots, tie lowest slot."""
    mask = frame.masks[slot]
    base = frame.layout.actions.shoot_base
    blood_by_slot = {e.slot: e.blood for e in frame.view.enemies}
    best: tuple[float, int] | None = None
    choice = None
    for es in range(frame.layout.actions.n_enemies):
        index = base + es
        if not mask[index]:
            continue
        key = (blood_by_slot.get(es, float("inf")), es)
        if best is None or key < best:
            best = key
            choice = index
    return choice


def _move_toward(frame: BotFrame, slot: int, pos: HexCoord,
                 goal: HexCoord) -> int | None:
    """First mask-legal direction that strictly reduces distance to goal,
    scanning in (resulting distance, direction index) order."""
    mask = frame.masks[slot]
    here = hex_distance(pos, goal)
    if here == 0:
        return None
    ranked = sorted(
        (hex_distance(pos.neighbor(d), goal), d) for d in range(6))
    for dist, d in ranked:
        if dist >= here:
            break
        if mask[frame.layout.actions.MOVE_BASE + d]:
            return frame.layout.actions.MOVE_BASE + d
    return None


class Kai0Policy(Policy):
    name = "kai0"
    version = "kai0-v1"

    def act(self, frame: BotFrame) -> dict[int, int]:
        center = frame.game_map.center()
        out: dict[int, int] = {}
        pos_by_slot = {f.slot: HexCoord(*f.pos) for f in frame.view.friends}
        for slot in _ready_slots(frame):
            shot = _shoot_choice(frame, slot)
            if shot is not None:
                out[slot] = shot
                continue
            move = _move_toward(frame, slot, pos_by_slot[slot], center)
            out[slot] = move if move is not None else frame.layout.actions.STOP
        return out


class Kai1Policy(Policy):
    name = "kai1"
    version = "kai1-v1"

    def reset(self, side: Side, scenario: Scenario) -> None:
        if scenario.subenv is SubEnv.CMAC:
            raise ConfigurationError(
                "kai1 is not defined for cmac (fresh split/merge agents have "
                "no stable waypoint identity); pair cmac with kai0 instead")
        super().reset(side, scenario)
        self._goals: dict[int, HexCoord] = {}

    def _band_cells(self, game_map: GameMap) -> list[HexCoord]:
        lo = game_map.width // 3
        hi = game_map.width - 1 - lo
        cells = [c for c in game_map.hidden if lo <= c.to_offset()[0] <= hi]
        return sorted(cells, key=lambda c: (c.to_offset()[1], c.to_offset()[0]))

    def _assign_goals(self, frame: BotFrame) -> None:
        band = self._band_cells(frame.game_map)
        taken: set[HexCoord] = set()
        # infantry picks first: it is the one that benefits from sitting
        # on concealment; vehicles flank adjacent to their cells
        friends = sorted(frame.view.friends,
                         key=lambda f: (f.type is not OperatorType.INFANTRY, f.slot))
        for f in friends:
            pos = HexCoord(*f.pos)
            free = [c for c in band if c not in taken]
            if free:
                goal = min(free, key=lambda c: (hex_distance(pos, c),
                                                c.to_offset()[1], c.to_offset()[0]))
                taken.add(goal)
            else:
                # hold line a third of the way into the board
                col, row = pos.to_offset()
                lo = frame.game_map.width // 3
                line_col = lo if self.side is Side.RED \
                    else frame.game_map.width - 1 - lo
                goal = HexCoord.from_offset(line_col, row)
            self._goals[f.slot] = goal

    def act(self, frame: BotFrame) -> dict[int, int]:
        if not self._goals:
            self._assign_goals(frame)
        out: dict[int, int] = {}
        type_by_slot = {f.slot: f.type for f in frame.view.friends}
        pos_by_slot = {f.slot: HexCoord(*f.pos) for f in frame.view.friends}
        for slot in _ready_slots(frame):
            shot = _shoot_choice(frame, slot)
            if shot is not None:
                out[slot] = shot
                continue
            goal = self._goals.get(slot)
            if goal is None:  # slot appeared after assignment (not expected)
                out[slot] = frame.layout.actions.STOP
                continue
            pos = pos_by_slot[slot]
            hold_at = 0 if type_by_slot[slot] is OperatorType.INFANTRY else 1
            if hex_distance(pos, goal) <= hold_at:
                out[slot] = frame.layout.actions.STOP
                continue
            move = _move_toward(frame, slot, pos, goal)
            out[slot] = move if move is not None else frame.layout.actions.STOP
        return out


class RandomPolicy(Policy):
    name = "random"
    version = "random-v1"

    def reset(self, side: Side, scenario: Scenario) -> None:
        super().reset(side, scenario)
        self._rng = random.Random(self.seed)

    def act(self, frame: BotFrame) -> dict[int, int]:
        out: dict[int, int] = {}
        for slot in _ready_slots(frame):
            legal = np.flatnonzero(frame.masks[slot])
            out[slot] = int(self._rng.choice(list(legal)))
        return out


class StopPolicy(Policy):
    name = "stop"
    version = "stop-v1"

    def act(self, frame: BotFrame) -> dict[int, int]:
        return {slot: frame.layout.actions.STOP for slot in _ready_slots(frame)}


_POLICIES = {
    "kai0": Kai0Policy,
    "kai1": Kai1Policy,
    "random": RandomPolicy,
    "stop": StopPolicy,
}

POLICY_NAMES = tuple(_POLICIES)


def make_policy(name: str, seed: int = 0) -> Policy:
    try:
        cls = _POLICIES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown policy {name!r}, expected one of {POLICY_NAMES}") from None
    return cls(seed=seed)


def policy_version(name: str) -> str:
    return _POLICIES[name].version
