"""Deterministic tick-based simulation core.

One call to :func:`step` advances the game a single tick.  Within a tick,
phases run in a fixed order so that identical (scenario, seed, actions)
always produce identical states and event logs:

    (a) movement orders register (duration = round(1/speed) ticks)
    (b) all shots resolve, ascending attacker id
    (c) stop orders take effect
    (d) cmac split/merge resolve, ascending agent id
    (e) timers decrement; arrivals complete, ascending id
    (f) deaths resolve
    (g) termination check, tick advances

Simultaneity rules worth knowing:

* Shots are a simultaneous volley: every operator that legally ordered a
  shot fires, even if its own blood reached zero earlier in phase (b).
  A shot whose target already hit zero blood this tick is wasted (a
  ``nullified`` event); wasted shots consume no random draw, but the
  shooter's cooldown still starts.  Mutual annihilation is a draw.
* An operator in transit occupies its origin hex until arrival.  Two
  arrivals contending for one hex resolve ascending id; the loser's move
  is cancelled (``nullified``) and it stays put.  Position swaps are
  therefore impossible.
* All randomness flows through the state's single :class:`~wgc.rng.GameRng`
  stream in event order, which is what makes replays re-simulable.

Counter conventions: ``move_remaining`` decrements the same tick it is
set (a speed-1 move completes immediately); ``cooldown_remaining`` and
``prep_remaining`` start decrementing the following tick.  ``blood`` is
rounded to 12 decimals after every mutation so that table-valued
arithmetic lands exactly on zero.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .hexmap import HexCoord, hex_distance, is_visible
from .rng import GameRng
from .scenario import (
    CombatNoiseParams,
    OperatorTemplate,
    Scenario,
    ScenarioError,
    Side,
    SubEnv,
    validate_scenario,
)

__all__ = [
    "ActionKind",
    "AgentAction",
    "OperatorState",
    "Event",
    "Outcome",
    "GameState",
    "EngineContractError",
    "CMAC_MAX_SLOTS",
    "MIN_SPLIT_BLOOD",
    "reset",
    "ready_agents",
    "is_action_legal",
    "legal_actions",
    "step",
    "max_slots",
    "side_alive_count",
    "side_total_blood",
    "state_digest",
    "clone_state",
]

CMAC_MAX_SLOTS = 9
# a split must leave every child alive: floor(blood/3) >= 1
MIN_SPLIT_BLOOD = 3.0

_BLOOD_DECIMALS = 12


class EngineContractError(RuntimeError):
    """An action set violated the engine's contract (mask-false action,
    missing ready agent, step after termination, ...)."""


class ActionKind(str, Enum):
    NOOP = "noop"
    STOP = "stop"
    MOVE = "move"
    SHOOT = "shoot"
    DEPOLYMERIZE = "depolymerize"
    POLYMERIZE = "polymerize"


@dataclass(frozen=True, slots=True)
class AgentAction:
    """One agent's order for one tick.

    ``direction`` indexes hexmap.DIRECTIONS; ``target_slot`` is an enemy
    slot; ``option`` selects the split shape (0 = three smalls, 1 = one
    small + one medium); ``ally_slot`` names the merge partner.
    """

    kind: ActionKind
    direction: int | None = None
    target_slot: int | None = None
    option: int | None = None
    ally_slot: int | None = None

    @classmethod
    def noop(cls) -> "AgentAction":
        return cls(ActionKind.NOOP)

    @classmethod
    def stop(cls) -> "AgentAction":
        return cls(ActionKind.STOP)

    @classmethod
    def move(cls, direction: int) -> "AgentAction":
        return cls(ActionKind.MOVE, direction=direction)

    @classmethod
    def shoot(cls, target_slot: int) -> "AgentAction":
        return cls(ActionKind.SHOOT, target_slot=target_slot)

    @classmethod
    def depolymerize(cls, option: int) -> "AgentAction":
        return cls(ActionKind.DEPOLYMERIZE, option=option)

    @classmethod
    def polymerize(cls, ally_slot: int) -> "AgentAction":
        return cls(ActionKind.POLYMERIZE, ally_slot=ally_slot)

    def describe(self) -> str:
        extra = {k: v for k, v in (("direction", self.direction),
                                   ("target_slot", self.target_slot),
                                   ("option", self.option),
                                   ("ally_slot", self.ally_slot)) if v is not None}
        return f"{self.kind.value}({extra})" if extra else self.kind.value


@dataclass(slots=True)
class OperatorState:
    """Mutable per-operator simulation state."""

    id: int
    side: Side
    slot: int
    template: OperatorTemplate
    pos: HexCoord
    blood: float
    alive: bool = True
    move_remaining: int = 0          # >0 while moving or stopped (busy)
    pending_dir: int | None = None   # set while a move is in flight
    prep_remaining: int = 0          # ticks until shoot-capable after a move
    cooldown_remaining: int = 0      # ticks until the gun cycles
    lineage: int | None = None       # original roster ancestor (cmac only)

    @property
    def ready(self) -> bool:
        return self.alive and self.move_remaining == 0

    @property
    def is_moving(self) -> bool:
        return self.move_remaining > 0 and self.pending_dir is not None

    @property
    def can_shoot_now(self) -> bool:
        return self.ready and self.prep_remaining == 0 and self.cooldown_remaining == 0


@dataclass(frozen=True, slots=True)
class Event:
    tick: int
    seq: int
    kind: str
    data: dict

    def to_record(self) -> dict:
        return {"record": "event", "tick": self.tick, "seq": self.seq,
                "kind": self.kind, "data": self.data}


@dataclass(frozen=True, slots=True)
class Outcome:
    winner: Side | None              # None = draw
    reason: str                      # "annihilation" | "timeout"
    ticks: int
    red_blood: float
    blue_blood: float

    @property
    def result(self) -> str:
        if self.winner is Side.RED:
            return "red_win"
        if self.winner is Side.BLUE:
            return "blue_win"
        return "draw"


@dataclass
class GameState:
    scenario: Scenario
    rng: GameRng
    operators: dict[int, OperatorState]
    slots: dict[Side, list[int | None]]
    occupancy: dict[HexCoord, int]            # alive operators only
    initial_templates: dict[int, OperatorTemplate]
    initial_count: int
    tick: int = 0
    next_id: int = 0
    seq: int = 0
    events: list[Event] = field(default_factory=list)
    outcome: Outcome | None = None

    def alive_operators(self, side: Side | None = None):
        for op in self.operators.values():
            if op.alive and (side is None or op.side is side):
                yield op

    def slot_of(self, side: Side, slot: int) -> OperatorState | None:
        table = self.slots[side]
        if not 0 <= slot < len(table) or table[slot] is None:
            return None
        return self.operators[table[slot]]


def max_slots(scenario: Scenario, side: Side) -> int:
    if scenario.subenv is SubEnv.CMAC:
        return CMAC_MAX_SLOTS
    return len(scenario.roster(side).entries)


def _qr(c: HexCoord) -> list[int]:
    return [c.q, c.r]


def _round_blood(x: float) -> float:
    return round(x, _BLOOD_DECIMALS)


def reset(scenario: Scenario, seed: int) -> GameState:
    """Spawn a fresh game.  Red roster gets ids 0..k-1, blue continues."""
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioError(violations)
    operators: dict[int, OperatorState] = {}
    slots: dict[Side, list[int | None]] = {
        Side.RED: [None] * max_slots(scenario, Side.RED),
        Side.BLUE: [None] * max_slots(scenario, Side.BLUE),
    }
    occupancy: dict[HexCoord, int] = {}
    initial_templates: dict[int, OperatorTemplate] = {}
    next_id = 0
    for side in (Side.RED, Side.BLUE):
        for slot, entry in enumerate(scenario.roster(side).entries):
            op = OperatorState(
                id=next_id, side=side, slot=slot, template=entry.template,
                pos=entry.spawn, blood=float(entry.template.blood_max))
            operators[op.id] = op
            slots[side][slot] = op.id
            occupancy[op.pos] = op.id
            initial_templates[op.id] = entry.template
            next_id += 1
    return GameState(
        scenario=scenario, rng=GameRng(seed), operators=operators, slots=slots,
        occupancy=occupancy, initial_templates=initial_templates,
        initial_count=next_id, next_id=next_id)


def ready_agents(state: GameState) -> list[int]:
    """Ids that must submit a real (non-noop) action this tick."""
    if state.outcome is not None:
        raise EngineContractError("ready_agents called on a finished game")
    return [op.id for op in state.operators.values() if op.ready]


def _free_slot_count(state: GameState, side: Side) -> int:
    return sum(1 for s in state.slots[side] if s is None)


def _free_neighbor_count(state: GameState, pos: HexCoord) -> int:
    game_map = state.scenario.map
    return sum(1 for n in pos.neighbors()
               if game_map.in_bounds(n) and n not in state.occupancy)


def is_action_legal(state: GameState, agent_id: int, action: AgentAction) -> bool:
    """Single source of truth for legality; the rl action mask is built
    by evaluating this over every action index."""
    op = state.operators.get(agent_id)
    if op is None:
        return False
    if state.outcome is not None or not op.ready:
        return action.kind is ActionKind.NOOP
    kind = action.kind
    if kind is ActionKind.NOOP:
        return False  # ready agents must pick a real action
    if kind is ActionKind.STOP:
        return True
    if kind is ActionKind.MOVE:
        if action.direction is None or not 0 <= action.direction < 6:
            return False
        dest = op.pos.neighbor(action.direction)
        return state.scenario.map.in_bounds(dest) and dest not in state.occupancy
    if kind is ActionKind.SHOOT:
        if action.target_slot is None or not op.can_shoot_now:
            return False
        target = state.slot_of(op.side.opponent, action.target_slot)
        if target is None or not target.alive:
            return False
        if not is_visible(op, target, state.scenario.map):
            return False
        return hex_distance(op.pos, target.pos) <= op.template.attacked_distance
    if kind is ActionKind.DEPOLYMERIZE:
        if state.scenario.subenv is not SubEnv.CMAC or action.option not in (0, 1):
            return False
        if op.lineage is not None or op.blood < MIN_SPLIT_BLOOD:
            return False
        needed = 2 if action.option == 0 else 1
        if _free_neighbor_count(state, op.pos) < needed:
            return False
        return _free_slot_count(state, op.side) >= needed
    if kind is ActionKind.POLYMERIZE:
        if state.scenario.subenv is not SubEnv.CMAC or action.ally_slot is None:
            return False
        if op.lineage is None:
            return False
        ally = state.slot_of(op.side, action.ally_slot)
        if ally is None or ally.id == op.id or not ally.alive:
            return False
        if ally.lineage != op.lineage:
            return False
        return hex_distance(op.pos, ally.pos) == 1
    return False


def legal_actions(state: GameState, agent_id: int) -> list[AgentAction]:
    """Enumerate every concretely legal action for one agent."""
    out: list[AgentAction] = []
    candidates: list[AgentAction] = [AgentAction.noop(), AgentAction.stop()]
    candidates += [AgentAction.move(d) for d in range(6)]
    op = state.operators.get(agent_id)
    if op is not None:
        enemy_slots = len(state.slots[op.side.opponent])
        candidates += [AgentAction.shoot(s) for s in range(enemy_slots)]
        if state.scenario.subenv is SubEnv.CMAC:
            candidates += [AgentAction.depolymerize(0), AgentAction.depolymerize(1)]
            candidates += [AgentAction.polymerize(s)
                           for s in range(len(state.slots[op.side]))]
    for action in candidates:
        if is_action_legal(state, agent_id, action):
            out.append(action)
    return out


def _emit(state: GameState, kind: str, data: dict) -> Event:
    ev = Event(tick=state.tick, seq=state.seq, kind=kind, data=data)
    state.seq += 1
    state.events.append(ev)
    return ev


def _apply_damage(state: GameState, attacker: OperatorState,
                  target: OperatorState, amount: float, kind: str,
                  roll: float) -> None:
    amount = _round_blood(min(amount, target.blood))
    target.blood = _round_blood(target.blood - amount)
    _emit(state, kind, {
        "attacker": attacker.id, "side": target.side.value, "target": target.id,
        "amount": amount, "blood": target.blood, "roll": roll})


def _resolve_attack_standard(state: GameState, attacker: OperatorState,
                             target: OperatorState) -> None:
    roll = state.rng.uniform()
    if roll < attacker.template.p_hit_vs(target.template.type):
        dmg = attacker.template.damage_vs(target.template.type)
        _apply_damage(state, attacker, target, dmg, "damaged", roll)
    else:
        _emit(state, "nullified", {
            "what": "miss", "agent": attacker.id, "side": attacker.side.value,
            "target": target.id, "roll": roll})


def _resolve_attack_srmac(state: GameState, attacker: OperatorState,
                          target: OperatorState, params: CombatNoiseParams) -> None:
    """One-draw noise model: the single uniform picks annihilate, nullify,
    or scaled damage.  Scaled damage shrinks linearly with distance over
    the attacker's range and with the target's missing health."""
    roll = state.rng.uniform()
    if roll < params.p_annihilate:
        _apply_damage(state, attacker, target, target.blood, "annihilated", roll)
        return
    if roll < params.p_annihilate + params.p_nullify:
        _emit(state, "nullified", {
            "what": "noise", "agent": attacker.id, "side": attacker.side.value,
            "target": target.id, "roll": roll})
        return
    base = attacker.template.damage_vs(target.template.type)
    dist = hex_distance(attacker.pos, target.pos)
    reach = max(1, attacker.template.attacked_distance)
    dist_scale = 1.0 - params.dist_falloff * (dist / reach)
    health_scale = (params.health_floor
                    + (1.0 - params.health_floor) * (target.blood / target.template.blood_max))
    _apply_damage(state, attacker, target, base * dist_scale * health_scale,
                  "damaged", roll)


def resolve_attack(state: GameState, attacker: OperatorState,
                   target: OperatorState) -> None:
    """Resolve one legal shot.  Caller guarantees decision-time legality
    and that the target still has blood (wasted shots never reach here)."""
    if state.scenario.subenv is SubEnv.SRMAC:
        assert state.scenario.srmac is not None
        _resolve_attack_srmac(state, attacker, target, state.scenario.srmac)
    else:
        _resolve_attack_standard(state, attacker, target)


def _do_split(state: GameState, parent: OperatorState, option: int) -> None:
    game_map = state.scenario.map
    if parent.blood <= 0:  # shot to zero earlier this tick
        _emit(state, "nullified", {"what": "split_blocked", "agent": parent.id,
                                   "side": parent.side.value, "reason": "no_blood"})
        return
    needed = 2 if option == 0 else 1
    free = [n for n in parent.pos.neighbors()
            if game_map.in_bounds(n) and n not in state.occupancy]
    if len(free) < needed or _free_slot_count(state, parent.side) < needed:
        _emit(state, "nullified", {"what": "split_blocked", "agent": parent.id,
                                   "side": parent.side.value, "reason": "no_room"})
        return

    small = math.floor(parent.blood / 3)
    if option == 0:
        bloods = [_round_blood(parent.blood - 2 * small), float(small), float(small)]
    else:
        bloods = [_round_blood(parent.blood - small), float(small)]
    positions = [parent.pos] + free[:needed]

    coeff = parent.template.attack_reduce_coeff or 1.0
    child_template = replace(
        parent.template,
        dmg_vs_vehicle=parent.template.dmg_vs_vehicle * coeff,
        dmg_vs_infantry=parent.template.dmg_vs_infantry * coeff)
    lineage = parent.id if parent.lineage is None else parent.lineage

    # parent ceases to exist as a unit (not a death); slot frees first so
    # the first child usually inherits it
    del state.occupancy[parent.pos]
    state.slots[parent.side][parent.slot] = None
    del state.operators[parent.id]

    children = []
    for blood, pos in zip(bloods, positions):
        slot = state.slots[parent.side].index(None)
        child = OperatorState(
            id=state.next_id, side=parent.side, slot=slot,
            template=child_template, pos=pos, blood=blood, lineage=lineage)
        state.next_id += 1
        state.operators[child.id] = child
        state.slots[parent.side][slot] = child.id
        state.occupancy[pos] = child.id
        children.append(child)

    _emit(state, "split", {
        "agent": parent.id, "side": parent.side.value, "option": option,
        "lineage": lineage,
        "children": [{"id": c.id, "slot": c.slot, "at": _qr(c.pos),
                      "blood": c.blood} for c in children]})


def _do_merge(state: GameState, initiator: OperatorState, ally_slot: int) -> None:
    ally = state.slot_of(initiator.side, ally_slot)
    blocked = (
        ally is None or not ally.alive or ally.id == initiator.id
        or ally.lineage is None or ally.lineage != initiator.lineage
        or initiator.blood <= 0 or ally.blood <= 0
        or hex_distance(initiator.pos, ally.pos) != 1)
    if blocked:
        _emit(state, "nullified", {"what": "merge_failed", "agent": initiator.id,
                                   "side": initiator.side.value,
                                   "ally_slot": ally_slot})
        return

    lineage = initiator.lineage
    assert lineage is not None
    original = state.initial_templates[lineage]
    merged_blood = _round_blood(min(initiator.blood + ally.blood, original.blood_max))
    pos = initiator.pos

    for gone in (initiator, ally):
        del state.occupancy[gone.pos]
        state.slots[gone.side][gone.slot] = None
        del state.operators[gone.id]

    slot = state.slots[initiator.side].index(None)
    merged = OperatorState(
        id=state.next_id, side=initiator.side, slot=slot, template=original,
        pos=pos, blood=merged_blood, lineage=lineage)
    state.next_id += 1
    state.operators[merged.id] = merged
    state.slots[initiator.side][slot] = merged.id
    state.occupancy[pos] = merged.id

    _emit(state, "merged", {
        "agent": merged.id, "side": merged.side.value,
        "from": [initiator.id, ally.id], "slot": slot, "at": _qr(pos),
        "blood": merged_blood, "lineage": lineage})


def side_alive_count(state: GameState, side: Side) -> int:
    return sum(1 for _ in state.alive_operators(side))


def side_total_blood(state: GameState, side: Side) -> float:
    return _round_blood(sum(op.blood for op in state.alive_operators(side)))


def _check_termination(state: GameState) -> None:
    red_alive = side_alive_count(state, Side.RED)
    blue_alive = side_alive_count(state, Side.BLUE)
    red_blood = side_total_blood(state, Side.RED)
    blue_blood = side_total_blood(state, Side.BLUE)

    outcome: Outcome | None = None
    if red_alive == 0 or blue_alive == 0:
        if red_alive == blue_alive:  # both zero: mutual annihilation
            winner = None
        else:
            winner = Side.RED if blue_alive == 0 else Side.BLUE
        outcome = Outcome(winner=winner, reason="annihilation", ticks=state.tick,
                          red_blood=red_blood, blue_blood=blue_blood)
    elif state.tick >= state.scenario.max_ticks:
        r, b = round(red_blood, 9), round(blue_blood, 9)
        winner = Side.RED if r > b else Side.BLUE if b > r else None
        outcome = Outcome(winner=winner, reason="timeout", ticks=state.tick,
                          red_blood=red_blood, blue_blood=blue_blood)

    if outcome is not None:
        _emit(state, "episode_end", {
            "outcome": outcome.result, "reason": outcome.reason,
            "ticks": outcome.ticks, "red_blood": red_blood,
            "blue_blood": blue_blood})
        state.outcome = outcome


def step(state: GameState, actions: dict[int, AgentAction]) -> list[Event]:
    """Advance one tick.  ``actions`` must contain a legal action for every
    ready agent; noop entries for non-ready agents are tolerated padding.
    Returns the events this tick appended (also kept on the state)."""
    if state.outcome is not None:
        raise EngineContractError("step called on a finished game")

    ready = set()
    for op in state.operators.values():
        if op.ready:
            ready.add(op.id)
            if op.id not in actions:
                raise EngineContractError(
                    f"ready agent {op.id} ({op.side.value} slot {op.slot}) "
                    "has no action this tick")
    for agent_id, action in actions.items():
        if not isinstance(action, AgentAction):
            raise EngineContractError(
                f"agent {agent_id}: expected AgentAction, got {type(action).__name__}")
        if agent_id not in ready:
            if action.kind is not ActionKind.NOOP:
                raise EngineContractError(
                    f"agent {agent_id} is not ready but was ordered "
                    f"{action.describe()}")
            continue
        if not is_action_legal(state, agent_id, action):
            raise EngineContractError(
                f"illegal action for agent {agent_id}: {action.describe()}")

    first_event = len(state.events)
    ordered = sorted((agent_id, actions[agent_id]) for agent_id in ready)
    cooldown_set_now: set[int] = set()

    # (a) movement orders register
    for agent_id, action in ordered:
        if action.kind is ActionKind.MOVE:
            op = state.operators[agent_id]
            op.pending_dir = action.direction
            op.move_remaining = op.template.move_duration
            _emit(state, "move_started", {
                "agent": op.id, "side": op.side.value, "from": _qr(op.pos),
                "to": _qr(op.pos.neighbor(action.direction)),
                "direction": action.direction, "duration": op.move_remaining})

    # (b) simultaneous volley, ascending attacker id
    for agent_id, action in ordered:
        if action.kind is ActionKind.SHOOT:
            attacker = state.operators[agent_id]
            target = state.slot_of(attacker.side.opponent, action.target_slot)
            assert target is not None  # validated at decision time
            if target.blood <= 0:
                _emit(state, "nullified", {
                    "what": "shot_wasted", "agent": attacker.id,
                    "side": attacker.side.value, "target": target.id})
            else:
                resolve_attack(state, attacker, target)
            if attacker.template.shoot_cooldown > 0:
                attacker.cooldown_remaining = attacker.template.shoot_cooldown
                cooldown_set_now.add(attacker.id)

    # (c) stops
    for agent_id, action in ordered:
        if action.kind is ActionKind.STOP:
            op = state.operators[agent_id]
            op.move_remaining = op.template.stop_time
            op.pending_dir = None
            _emit(state, "stopped", {"agent": op.id, "side": op.side.value,
                                     "duration": op.move_remaining})

    # (d) cmac split/merge, ascending id; mid-tick invalidation fizzles
    for agent_id, action in ordered:
        if action.kind in (ActionKind.DEPOLYMERIZE, ActionKind.POLYMERIZE):
            op = state.operators.get(agent_id)
            if op is None:
                continue  # consumed by an earlier merge this tick
            if action.kind is ActionKind.DEPOLYMERIZE:
                _do_split(state, op, action.option)
            else:
                _do_merge(state, op, action.ally_slot)

    # (e) timers; arrivals ascending id with occupancy re-check
    arrivals: list[OperatorState] = []
    for op in state.operators.values():
        if not op.alive:
            continue
        if op.cooldown_remaining > 0 and op.id not in cooldown_set_now:
            op.cooldown_remaining -= 1
        if op.prep_remaining > 0:
            op.prep_remaining -= 1
        if op.move_remaining > 0:
            op.move_remaining -= 1
            if op.move_remaining == 0 and op.pending_dir is not None:
                arrivals.append(op)
    for op in sorted(arrivals, key=lambda o: o.id):
        dest = op.pos.neighbor(op.pending_dir)
        if dest in state.occupancy:
            _emit(state, "nullified", {
                "what": "move_blocked", "agent": op.id, "side": op.side.value,
                "from": _qr(op.pos), "to": _qr(dest),
                "blocked_by": state.occupancy[dest]})
        else:
            src = op.pos
            del state.occupancy[src]
            state.occupancy[dest] = op.id
            op.pos = dest
            op.prep_remaining = op.template.shoot_prep
            _emit(state, "moved", {"agent": op.id, "side": op.side.value,
                                   "from": _qr(src), "to": _qr(dest)})
        op.pending_dir = None

    # (f) deaths
    for op in state.operators.values():
        if op.alive and op.blood <= 0:
            op.alive = False
            op.blood = 0.0
            op.pending_dir = None
            op.move_remaining = 0
            del state.occupancy[op.pos]
            _emit(state, "died", {"agent": op.id, "side": op.side.value,
                                  "at": _qr(op.pos)})

    # (g) advance and check termination
    state.tick += 1
    _check_termination(state)
    return state.events[first_event:]


def state_digest(state: GameState) -> str:
    """sha256 over the canonical event log (the replay digest)."""
    lines = [json.dumps(ev.to_record(), sort_keys=True, separators=(",", ":"))
             for ev in state.events]
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def clone_state(state: GameState) -> GameState:
    """Deep-enough copy for look-ahead probes; the original is untouched."""
    ops = {i: replace(op) for i, op in state.operators.items()}
    return GameState(
        scenario=state.scenario, rng=state.rng.clone(), operators=ops,
        slots={s: list(t) for s, t in state.slots.items()},
        occupancy=dict(state.occupancy),
        initial_templates=dict(state.initial_templates),
        initial_count=state.initial_count, tick=state.tick,
        next_id=state.next_id, seq=state.seq, events=list(state.events),
        outcome=state.outcome)
