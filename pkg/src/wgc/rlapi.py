"""RL-facing surface: observation/state vectors, action masks, rewards.

Everything is slot-indexed.  A side has a fixed number of slots for the
whole episode (cmac reserves 9 per side; other sub-environments use the
roster size), so vector widths never change mid-episode even when agents
split, merge or die.

Action index layout (per agent)::

    0                  noop        only legal choice when dead/busy/terminal
    1                  stop        brace: busy for stop_time ticks
    2 .. 7             move        hexmap direction order E,NE,NW,W,SW,SE
    8 .. 8+E-1         shoot       enemy slot 0..E-1
    8+E, 8+E+1         split       cmac only: option 0, option 1
    8+E+2 .. 8+E+2+A-1 merge       cmac only: ally slot 0..A-1

with E = enemy slots, A = ally slots.  Standard 3v3 is therefore 11 wide.

Observation vector (per agent): own block, then one block per ally slot
(the agent's own slot zeroed), then one block per enemy slot (zeros
unless that enemy is currently visible to this agent), then normalized
tick.  Dead agents read all-zero observations.  The global state vector
concatenates unredacted blocks for every slot of both sides (red slots
first) plus normalized tick; it is identical for both sides.

Block layouts (widths in parentheses, A/E of the block owner's side):

    friendly block: color(1) slot-onehot(A) id(1) type-onehot(3)
                    col(1) row(1) blood(1) move(1) cooldown(1) stop(1)
                    sees-enemy(E) can-attack(E)
    enemy block:    color(1) slot-onehot(E) id(1) type-onehot(3)
                    col(1) row(1) blood(1)

Normalization: positions by (dim-1), blood by own blood_max, timers by
the scenario-wide maxima, id by initial operator count (x4 in cmac,
clamped to 1), color red=1 blue=0, tick by max_ticks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import (
    ActionKind,
    AgentAction,
    GameState,
    OperatorState,
    is_action_legal,
    max_slots,
)
from .hexmap import hex_distance, is_visible
from .scenario import OperatorType, Scenario, Side, SubEnv

__all__ = [
    "ActionLayout",
    "ObsLayout",
    "layout_for",
    "decode_action",
    "encode_action",
    "action_mask",
    "side_masks",
    "encode_observation",
    "encode_state",
    "compute_reward",
    "StepFrame",
    "build_step_frame",
    "TeamView",
    "FriendInfo",
    "EnemyInfo",
    "build_team_view",
]

_TYPE_ORDER = (OperatorType.TANK, OperatorType.CHARIOT, OperatorType.INFANTRY)


@dataclass(frozen=True)
class ActionLayout:
    """Index arithmetic for one side's action space."""

    n_allies: int
    n_enemies: int
    cmac: bool

    NOOP: int = 0
    STOP: int = 1
    MOVE_BASE: int = 2

    @property
    def shoot_base(self) -> int:
        return 8

    @property
    def split_base(self) -> int | None:
        return 8 + self.n_enemies if self.cmac else None

    @property
    def merge_base(self) -> int | None:
        return 8 + self.n_enemies + 2 if self.cmac else None

    @property
    def width(self) -> int:
        base = 8 + self.n_enemies
        return base + 2 + self.n_allies if self.cmac else base


@dataclass(frozen=True)
class ObsLayout:
    """Vector widths and normalization constants for one side."""

    side: Side
    n_allies: int
    n_enemies: int
    actions: ActionLayout
    friend_block: int
    enemy_block: int
    obs_width: int
    state_width: int
    move_cap: int
    cooldown_cap: int
    stop_cap: int
    id_cap: int
    map_width: int
    map_height: int
    max_ticks: int


def _friend_block_width(n_allies: int, n_enemies: int) -> int:
    return 11 + n_allies + 2 * n_enemies


def _enemy_block_width(n_enemies: int) -> int:
    return 8 + n_enemies


def _state_width(scenario: Scenario) -> int:
    red = max_slots(scenario, Side.RED)
    blue = max_slots(scenario, Side.BLUE)
    return (red * _friend_block_width(red, blue)
            + blue * _friend_block_width(blue, red) + 1)


def layout_for(scenario: Scenario, side: Side) -> ObsLayout:
    n_allies = max_slots(scenario, side)
    n_enemies = max_slots(scenario, side.opponent)
    actions = ActionLayout(n_allies=n_allies, n_enemies=n_enemies,
                           cmac=scenario.subenv is SubEnv.CMAC)
    fb = _friend_block_width(n_allies, n_enemies)
    eb = _enemy_block_width(n_enemies)
    obs_width = fb * (1 + n_allies) + eb * n_enemies + 1
    templates = [e.template for r in (scenario.red, scenario.blue)
                 for e in r.entries]
    initial = len(templates)
    id_cap = initial * 4 if scenario.subenv is SubEnv.CMAC else initial
    return ObsLayout(
        side=side, n_allies=n_allies, n_enemies=n_enemies, actions=actions,
        friend_block=fb, enemy_block=eb, obs_width=obs_width,
        state_width=_state_width(scenario),
        move_cap=max(t.move_duration for t in templates),
        cooldown_cap=max(1, max(t.shoot_cooldown for t in templates)),
        stop_cap=max(1, max(t.stop_time for t in templates)),
        id_cap=max(1, id_cap),
        map_width=scenario.map.width, map_height=scenario.map.height,
        max_ticks=scenario.max_ticks)


def decode_action(index: int, layout: ActionLayout) -> AgentAction:
    """Map an action index to a concrete AgentAction (inverse of encode)."""
    if not 0 <= index < layout.width:
        raise ValueError(f"action index {index} out of range 0..{layout.width - 1}")
    if index == layout.NOOP:
        return AgentAction.noop()
    if index == layout.STOP:
        return AgentAction.stop()
    if index < layout.shoot_base:
        return AgentAction.move(index - layout.MOVE_BASE)
    if index < layout.shoot_base + layout.n_enemies:
        return AgentAction.shoot(index - layout.shoot_base)
    assert layout.cmac
    if index < layout.merge_base:
        return AgentAction.depolymerize(index - layout.split_base)
    return AgentAction.polymerize(index - layout.merge_base)


def encode_action(action: AgentAction, layout: ActionLayout) -> int:
    if action.kind is ActionKind.NOOP:
        return layout.NOOP
    if action.kind is ActionKind.STOP:
        return layout.STOP
    if action.kind is ActionKind.MOVE:
        return layout.MOVE_BASE + action.direction
    if action.kind is ActionKind.SHOOT:
        return layout.shoot_base + action.target_slot
    if not layout.cmac:
        raise ValueError(f"{action.kind.value} has no index outside cmac")
    if action.kind is ActionKind.DEPOLYMERIZE:
        return layout.split_base + action.option
    return layout.merge_base + action.ally_slot


def action_mask(state: GameState, side: Side, slot: int,
                layout: ObsLayout) -> np.ndarray:
    """Legality mask over the action indices of one slot.

    Empty, dead or busy slots (and every slot once the game has ended)
    get a noop-only mask; the engine accepts those noops as padding."""
    mask = np.zeros(layout.actions.width, dtype=bool)
    agent_id = state.slots[side][slot] if slot < len(state.slots[side]) else None
    if agent_id is None:
        mask[layout.actions.NOOP] = True
        return mask
    op = state.operators[agent_id]
    if state.outcome is not None or not op.ready:
        mask[layout.actions.NOOP] = True
        return mask
    for index in range(layout.actions.width):
        action = decode_action(index, layout.actions)
        mask[index] = is_action_legal(state, agent_id, action)
    return mask


def side_masks(state: GameState, side: Side, layout: ObsLayout) -> list[np.ndarray]:
    return [action_mask(state, side, s, layout) for s in range(layout.n_allies)]


def _encode_friend_block(out: np.ndarray, base: int, op: OperatorState,
                         state: GameState, layout: ObsLayout,
                         own_allies: int, enemy_side: Side,
                         enemy_slots: int) -> None:
    t = op.template
    i = base
    out[i] = 1.0 if op.side is Side.RED else 0.0
    i += 1
    out[i + op.slot] = 1.0
    i += own_allies
    out[i] = min(1.0, op.id / layout.id_cap)
    i += 1
    out[i + _TYPE_ORDER.index(t.type)] = 1.0
    i += 3
    col, row = op.pos.to_offset()
    out[i] = col / max(1, layout.map_width - 1)
    out[i + 1] = row / max(1, layout.map_height - 1)
    i += 2
    out[i] = op.blood / t.blood_max
    i += 1
    moving = op.is_moving
    out[i] = (op.move_remaining / layout.move_cap) if moving else 0.0
    i += 1
    out[i] = op.cooldown_remaining / layout.cooldown_cap
    i += 1
    out[i] = 0.0 if moving else op.move_remaining / layout.stop_cap
    i += 1
    game_map = state.scenario.map
    for es in range(enemy_slots):
        enemy = state.slot_of(enemy_side, es)
        if enemy is not None and enemy.alive and is_visible(op, enemy, game_map):
            out[i + es] = 1.0
            if hex_distance(op.pos, enemy.pos) <= t.attacked_distance:
                out[i + enemy_slots + es] = 1.0
    # i advances past both bitmasks implicitly; caller sized the block


def _encode_enemy_block(out: np.ndarray, base: int, enemy: OperatorState,
                        layout: ObsLayout, enemy_slots: int) -> None:
    t = enemy.template
    i = base
    out[i] = 1.0 if enemy.side is Side.RED else 0.0
    i += 1
    out[i + enemy.slot] = 1.0
    i += enemy_slots
    out[i] = min(1.0, enemy.id / layout.id_cap)
    i += 1
    out[i + _TYPE_ORDER.index(t.type)] = 1.0
    i += 3
    col, row = enemy.pos.to_offset()
    out[i] = col / max(1, layout.map_width - 1)
    out[i + 1] = row / max(1, layout.map_height - 1)
    i += 2
    out[i] = enemy.blood / t.blood_max


def encode_observation(state: GameState, side: Side, slot: int,
                       layout: ObsLayout) -> np.ndarray:
    """Per-agent observation vector; all zeros for empty/dead slots."""
    out = np.zeros(layout.obs_width, dtype=np.float64)
    agent_id = state.slots[side][slot] if slot < len(state.slots[side]) else None
    if agent_id is None:
        return out
    op = state.operators[agent_id]
    if not op.alive:
        return out
    enemy_side = side.opponent
    fb, eb = layout.friend_block, layout.enemy_block

    _encode_friend_block(out, 0, op, state, layout,
                         layout.n_allies, enemy_side, layout.n_enemies)
    for ally_slot in range(layout.n_allies):
        if ally_slot == slot:
            continue  # own slot stays zero in the ally section
        ally = state.slot_of(side, ally_slot)
        if ally is not None and ally.alive:
            _encode_friend_block(out, fb * (1 + ally_slot), ally, state, layout,
                                 layout.n_allies, enemy_side, layout.n_enemies)
    enemies_base = fb * (1 + layout.n_allies)
    game_map = state.scenario.map
    for es in range(layout.n_enemies):
        enemy = state.slot_of(enemy_side, es)
        if enemy is not None and enemy.alive and is_visible(op, enemy, game_map):
            _encode_enemy_block(out, enemies_base + eb * es, enemy, layout,
                                layout.n_enemies)
    out[-1] = state.tick / layout.max_ticks
    return out


def encode_state(state: GameState, layout: ObsLayout) -> np.ndarray:
    """Global unredacted state vector; identical for both sides."""
    out = np.zeros(layout.state_width, dtype=np.float64)
    base = 0
    for side in (Side.RED, Side.BLUE):
        allies = max_slots(state.scenario, side)
        enemies = max_slots(state.scenario, side.opponent)
        fb = _friend_block_width(allies, enemies)
        for slot in range(allies):
            op = state.slot_of(side, slot)
            if op is not None and op.alive:
                _encode_friend_block(out, base, op, state, layout,
                                     allies, side.opponent, enemies)
            base += fb
    out[-1] = state.tick / layout.max_ticks
    return out


def compute_reward(prev_state: GameState, next_state: GameState,
                   side: Side) -> float:
    """Per-tick team reward: blood exchanged this tick, normalized by the
    enemy's starting total, plus a terminal win/loss bonus of +-1."""
    from .engine import side_total_blood

    enemy = side.opponent
    ally_lost = (side_total_blood(prev_state, side)
                 - side_total_blood(next_state, side))
    enemy_lost = (side_total_blood(prev_state, enemy)
                  - side_total_blood(next_state, enemy))
    scale = next_state.scenario.roster(enemy).total_blood()
    reward = (enemy_lost - ally_lost) / scale
    if next_state.outcome is not None and next_state.outcome.winner is not None:
        reward += 1.0 if next_state.outcome.winner is side else -1.0
    return reward


@dataclass
class StepFrame:
    """Everything one side's controller receives after a tick (and at
    reset, where reward is 0)."""

    side: Side
    tick: int
    agent_ids: list[int | None]        # per slot; None = empty slot
    ready_slots: list[int]             # slots that must act next step
    obs: list[np.ndarray]              # per slot
    masks: list[np.ndarray]            # per slot, bool
    state: np.ndarray
    reward: float
    terminated: bool
    outcome: str | None

    def to_payload(self) -> dict:
        return {
            "side": self.side.value,
            "tick": self.tick,
            "agent_ids": [i if i is not None else -1 for i in self.agent_ids],
            "ready": self.ready_slots,
            "obs": [v.tolist() for v in self.obs],
            "masks": [[int(b) for b in m] for m in self.masks],
            "state": self.state.tolist(),
            "reward": self.reward,
            "terminated": self.terminated,
            "outcome": self.outcome,
        }


def build_step_frame(state: GameState, side: Side, layout: ObsLayout,
                     reward: float = 0.0) -> StepFrame:
    agent_ids: list[int | None] = list(state.slots[side])
    ready_slots = []
    if state.outcome is None:
        for slot, agent_id in enumerate(agent_ids):
            if agent_id is not None and state.operators[agent_id].ready:
                ready_slots.append(slot)
    return StepFrame(
        side=side, tick=state.tick, agent_ids=agent_ids,
        ready_slots=ready_slots,
        obs=[encode_observation(state, side, s, layout)
             for s in range(layout.n_allies)],
        masks=side_masks(state, side, layout),
        state=encode_state(state, layout),
        reward=reward,
        terminated=state.outcome is not None,
        outcome=state.outcome.result if state.outcome else None)


# --- structured team view (bots, service redaction) ---------------------------

@dataclass(frozen=True)
class FriendInfo:
    slot: int
    id: int
    type: OperatorType
    pos: tuple[int, int]               # axial (q, r)
    blood: float
    blood_max: float
    speed: float
    attacked_distance: int
    observed_distance: int
    ready: bool
    moving: bool
    busy_ticks: int
    prep: int
    cooldown: int
    lineage: int | None
    alive: bool


@dataclass(frozen=True)
class EnemyInfo:
    slot: int
    id: int
    type: OperatorType
    pos: tuple[int, int]
    blood: float
    blood_max: float
    seen_by: tuple[int, ...]           # own slots that currently see it


@dataclass(frozen=True)
class TeamView:
    """What one side legitimately knows: all friendly state plus enemies
    visible to at least one living teammate.  Exactly the information the
    observation vectors carry, in structured form."""

    side: Side
    tick: int
    friends: tuple[FriendInfo, ...]
    enemies: tuple[EnemyInfo, ...]
    terminated: bool
    outcome: str | None


def build_team_view(state: GameState, side: Side) -> TeamView:
    game_map = state.scenario.map
    friends = []
    for slot in range(len(state.slots[side])):
        op = state.slot_of(side, slot)
        if op is None or not op.alive:
            continue
        friends.append(FriendInfo(
            slot=slot, id=op.id, type=op.template.type,
            pos=(op.pos.q, op.pos.r), blood=op.blood,
            blood_max=op.template.blood_max, speed=op.template.speed,
            attacked_distance=op.template.attacked_distance,
            observed_distance=op.template.observed_distance,
            ready=op.ready, moving=op.is_moving,
            busy_ticks=op.move_remaining, prep=op.prep_remaining,
            cooldown=op.cooldown_remaining, lineage=op.lineage, alive=True))
    enemies = []
    for slot in range(len(state.slots[side.opponent])):
        enemy = state.slot_of(side.opponent, slot)
        if enemy is None or not enemy.alive:
            continue
        seen_by = tuple(f.slot for f in friends
                        if is_visible(state.operators[state.slots[side][f.slot]],
                                      enemy, game_map))
        if seen_by:
            enemies.append(EnemyInfo(
                slot=slot, id=enemy.id, type=enemy.template.type,
                pos=(enemy.pos.q, enemy.pos.r), blood=enemy.blood,
                blood_max=enemy.template.blood_max, seen_by=seen_by))
    return TeamView(
        side=side, tick=state.tick, friends=tuple(friends),
        enemies=tuple(enemies), terminated=state.outcome is not None,
        outcome=state.outcome.result if state.outcome else None)
