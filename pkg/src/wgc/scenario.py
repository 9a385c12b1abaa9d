"""Scenario configuration: operator templates, rosters, sub-environments.

A scenario pins everything a game needs before the first tick: which
sub-environment rules apply, the map, both sides' operator templates and
spawn hexes, the episode length, and (for srmac) the combat-noise
parameters.  Fifteen builtin scenarios exist: five sub-environments
(standard, poac, cmac, amac, srmac) crossed with three maps indexed
0=small, 1=medium, 2=large.

Scenario documents are JSON; ``save_scenario(load_scenario(text))`` is a
semantic identity (canonical key order, so it is also byte-stable for
normalized input).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path

from .hexmap import GameMap, HexCoord, builtin_map, load_map, save_map

__all__ = [
    "Side",
    "OperatorType",
    "SubEnv",
    "OperatorTemplate",
    "CombatNoiseParams",
    "RosterEntry",
    "Roster",
    "Scenario",
    "ScenarioError",
    "builtin_scenario",
    "builtin_scenario_ids",
    "parse_scenario_id",
    "validate_scenario",
    "load_scenario",
    "save_scenario",
    "scenario_to_document",
    "scenario_from_document",
    "resolve_scenario",
    "VEHICLE_TYPES",
]


class Side(str, enum.Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def opponent(self) -> "Side":
        return Side.BLUE if self is Side.RED else Side.RED


class OperatorType(str, enum.Enum):
    TANK = "tank"
    CHARIOT = "chariot"
    INFANTRY = "infantry"


VEHICLE_TYPES = frozenset({OperatorType.TANK, OperatorType.CHARIOT})


class SubEnv(str, enum.Enum):
    STANDARD = "standard"
    POAC = "poac"        # asynchronous action durations
    CMAC = "cmac"        # split/merge (changeable number of agents)
    AMAC = "amac"        # asymmetric rosters and attributes
    SRMAC = "srmac"      # stochastic combat noise model


@dataclass(frozen=True, slots=True)
class OperatorTemplate:
    """Immutable per-type attribute sheet.

    speed is hexes per tick; a move takes round(1/speed) ticks.  Damage and
    hit probability are split by target class (vehicle = tank or chariot,
    infantry otherwise).  attack_reduce_coeff only applies in cmac: split
    children deal coeff * damage.
    """

    type: OperatorType
    blood_max: float
    speed: float
    observed_distance: int
    attacked_distance: int
    dmg_vs_vehicle: float
    p_hit_vehicle: float
    dmg_vs_infantry: float
    p_hit_infantry: float
    shoot_cooldown: int = 0
    shoot_prep: int = 0
    stop_time: int = 1
    attack_reduce_coeff: float | None = None

    @property
    def move_duration(self) -> int:
        return max(1, round(1.0 / self.speed))

    def damage_vs(self, target_type: OperatorType) -> float:
        return self.dmg_vs_vehicle if target_type in VEHICLE_TYPES else self.dmg_vs_infantry

    def p_hit_vs(self, target_type: OperatorType) -> float:
        return self.p_hit_vehicle if target_type in VEHICLE_TYPES else self.p_hit_infantry


@dataclass(frozen=True, slots=True)
class CombatNoiseParams:
    """srmac one-draw combat noise model parameters."""

    p_annihilate: float = 0.05
    p_nullify: float = 0.15
    dist_falloff: float = 0.5
    health_floor: float = 0.5


@dataclass(frozen=True, slots=True)
class RosterEntry:
    template: OperatorTemplate
    spawn: HexCoord


@dataclass(frozen=True, slots=True)
class Roster:
    side: Side
    entries: tuple[RosterEntry, ...]

    def total_blood(self) -> float:
        return sum(e.template.blood_max for e in self.entries)


@dataclass(frozen=True)
class Scenario:
    subenv: SubEnv
    index: int                      # map index: 0=small, 1=medium, 2=large
    map: GameMap
    red: Roster
    blue: Roster
    max_ticks: int = 600
    srmac: CombatNoiseParams | None = None

    @property
    def scenario_id(self) -> str:
        return f"{self.subenv.value}/{self.index}"

    def roster(self, side: Side) -> Roster:
        return self.red if side is Side.RED else self.blue


class ScenarioError(ValueError):
    """Invalid scenario document or configuration; carries all violations."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


# --- builtin attribute tables -------------------------------------------------
# Column order everywhere: blood_max, speed, observed_distance,
# attacked_distance, dmg_vs_vehicle, p_hit_vehicle, dmg_vs_infantry,
# p_hit_infantry, shoot_cooldown, shoot_prep.

def _t(kind: OperatorType, row: tuple, coeff: float | None = None) -> OperatorTemplate:
    (blood, speed, obs, atk, dv, pv, di, pi, cd, prep) = row
    return OperatorTemplate(
        type=kind, blood_max=float(blood), speed=float(speed),
        observed_distance=obs, attacked_distance=atk,
        dmg_vs_vehicle=float(dv), p_hit_vehicle=float(pv),
        dmg_vs_infantry=float(di), p_hit_infantry=float(pi),
        shoot_cooldown=cd, shoot_prep=prep,
        attack_reduce_coeff=coeff,
    )


STANDARD_TEMPLATES: dict[OperatorType, OperatorTemplate] = {
    OperatorType.TANK:     _t(OperatorType.TANK,     (10, 1.0, 10, 7, 1.2, 0.8, 0.6, 0.6, 0, 0)),
    OperatorType.CHARIOT:  _t(OperatorType.CHARIOT,  (8,  1.0, 10, 7, 1.5, 0.7, 0.8, 0.6, 0, 0)),
    OperatorType.INFANTRY: _t(OperatorType.INFANTRY, (7,  1.0, 5,  3, 0.8, 0.7, 0.8, 0.6, 0, 0)),
}

POAC_TEMPLATES: dict[OperatorType, OperatorTemplate] = {
    OperatorType.TANK:     _t(OperatorType.TANK,     (10, 1.0, 10, 7, 1.2, 0.8, 0.6, 0.4, 0, 0)),
    OperatorType.CHARIOT:  _t(OperatorType.CHARIOT,  (8,  1.0, 10, 7, 1.5, 0.6, 0.8, 0.6, 1, 2)),
    OperatorType.INFANTRY: _t(OperatorType.INFANTRY, (7,  0.2, 5,  3, 0.8, 0.6, 0.8, 0.6, 1, 2)),
}

CMAC_TEMPLATES: dict[OperatorType, OperatorTemplate] = {
    OperatorType.TANK:     _t(OperatorType.TANK,     (10, 1.0, 10, 7, 1.2, 0.8, 0.6, 0.6, 0, 0), 0.8),
    OperatorType.CHARIOT:  _t(OperatorType.CHARIOT,  (8,  1.0, 10, 7, 1.5, 0.7, 0.8, 0.6, 0, 0), 0.8),
    OperatorType.INFANTRY: _t(OperatorType.INFANTRY, (7,  1.0, 5,  3, 0.8, 0.6, 0.8, 0.6, 0, 0), 0.8),
}

AMAC_RED_TEMPLATES: dict[OperatorType, OperatorTemplate] = {
    OperatorType.TANK:     _t(OperatorType.TANK,     (10, 1.0, 10, 7, 1.5, 0.8, 0.8, 0.6, 0, 0)),
    OperatorType.CHARIOT:  _t(OperatorType.CHARIOT,  (8,  1.0, 10, 7, 1.5, 0.7, 0.8, 0.6, 0, 0)),
    OperatorType.INFANTRY: _t(OperatorType.INFANTRY, (7,  1.0, 5,  3, 0.8, 0.7, 0.8, 0.6, 0, 0)),
}

AMAC_BLUE_TEMPLATES: dict[OperatorType, OperatorTemplate] = {
    OperatorType.TANK:     _t(OperatorType.TANK,     (10, 1.0, 10, 7, 1.2, 0.8, 0.6, 0.6, 0, 0)),
    OperatorType.CHARIOT:  _t(OperatorType.CHARIOT,  (8,  1.0, 10, 7, 1.5, 0.6, 0.8, 0.6, 0, 0)),
    OperatorType.INFANTRY: _t(OperatorType.INFANTRY, (7,  1.0, 5,  3, 0.8, 0.6, 0.8, 0.6, 0, 0)),
}

SRMAC_TEMPLATES = STANDARD_TEMPLATES

_MAP_FOR_INDEX = {0: "small", 1: "medium", 2: "large"}

_BASIC_ORDER = (OperatorType.TANK, OperatorType.CHARIOT, OperatorType.INFANTRY)
_AMAC_RED_ORDER = (OperatorType.TANK, OperatorType.TANK, OperatorType.CHARIOT,
                   OperatorType.CHARIOT, OperatorType.INFANTRY)


def _spawn_rows(height: int, count: int) -> list[int]:
    center = height // 2
    offsets = range(-(count - 1), count, 2)  # -2,0,2 for 3; -4..4 for 5
    return [center + o for o in offsets]


def _make_roster(side: Side, order: tuple[OperatorType, ...],
                 templates: dict[OperatorType, OperatorTemplate],
                 game_map: GameMap) -> Roster:
    rows = _spawn_rows(game_map.height, len(order))
    entries = []
    for kind, row in zip(order, rows):
        spawn = HexCoord.from_offset(0, row)
        if side is Side.BLUE:
            spawn = game_map.mirror(spawn)
        entries.append(RosterEntry(template=templates[kind], spawn=spawn))
    return Roster(side=side, entries=tuple(entries))


def builtin_scenario_ids() -> list[str]:
    return [f"{s.value}/{i}" for s in SubEnv for i in range(3)]


def parse_scenario_id(scenario_id: str) -> tuple[SubEnv, int]:
    try:
        name, _, idx = scenario_id.partition("/")
        subenv = SubEnv(name)
        index = int(idx)
    except ValueError:
        raise ScenarioError(
            [f"unknown scenario id {scenario_id!r}, expected '<subenv>/<index>' "
             f"with subenv in {[s.value for s in SubEnv]} and index in 0..2"]) from None
    if index not in _MAP_FOR_INDEX:
        raise ScenarioError([f"scenario index {index} out of range 0..2"])
    return subenv, index


def builtin_scenario(scenario_id: str) -> Scenario:
    """Build one of the fifteen builtin scenarios, e.g. 'standard/0'."""
    subenv, index = parse_scenario_id(scenario_id)
    game_map = builtin_map(_MAP_FOR_INDEX[index])
    if subenv is SubEnv.AMAC:
        red = _make_roster(Side.RED, _AMAC_RED_ORDER, AMAC_RED_TEMPLATES, game_map)
        blue = _make_roster(Side.BLUE, _BASIC_ORDER, AMAC_BLUE_TEMPLATES, game_map)
    else:
        templates = {
            SubEnv.STANDARD: STANDARD_TEMPLATES,
            SubEnv.POAC: POAC_TEMPLATES,
            SubEnv.CMAC: CMAC_TEMPLATES,
            SubEnv.SRMAC: SRMAC_TEMPLATES,
        }[subenv]
        red = _make_roster(Side.RED, _BASIC_ORDER, templates, game_map)
        blue = _make_roster(Side.BLUE, _BASIC_ORDER, templates, game_map)
    srmac = CombatNoiseParams() if subenv is SubEnv.SRMAC else None
    return Scenario(subenv=subenv, index=index, map=game_map,
                    red=red, blue=blue, max_ticks=600, srmac=srmac)


# --- validation ---------------------------------------------------------------

def validate_scenario(sc: Scenario) -> list[str]:
    """Return all contract violations (empty list means valid)."""
    errs: list[str] = []
    if sc.max_ticks < 1:
        errs.append(f"max_ticks must be >= 1, got {sc.max_ticks}")
    if sc.subenv is SubEnv.SRMAC:
        if sc.srmac is None:
            errs.append("srmac scenario requires combat-noise params")
        else:
            p = sc.srmac
            for name, v in (("p_annihilate", p.p_annihilate), ("p_nullify", p.p_nullify),
                            ("dist_falloff", p.dist_falloff), ("health_floor", p.health_floor)):
                if not 0.0 <= v <= 1.0:
                    errs.append(f"srmac.{name} must be in [0,1], got {v}")
            if p.p_annihilate + p.p_nullify > 1.0:
                errs.append("srmac.p_annihilate + p_nullify must be <= 1")
    elif sc.srmac is not None:
        errs.append(f"combat-noise params only apply to srmac, not {sc.subenv.value}")

    seen: set[HexCoord] = set()
    for roster in (sc.red, sc.blue):
        if not roster.entries:
            errs.append(f"{roster.side.value} roster is empty")
        for i, entry in enumerate(roster.entries):
            t = entry.template
            where = f"{roster.side.value}[{i}]"
            if t.blood_max <= 0:
                errs.append(f"{where}: blood_max must be positive")
            if t.speed <= 0:
                errs.append(f"{where}: speed must be positive")
            if t.observed_distance < 0 or t.attacked_distance < 0:
                errs.append(f"{where}: distances must be non-negative")
            for name, v in (("p_hit_vehicle", t.p_hit_vehicle),
                            ("p_hit_infantry", t.p_hit_infantry)):
                if not 0.0 <= v <= 1.0:
                    errs.append(f"{where}: {name} must be in [0,1], got {v}")
            if t.dmg_vs_vehicle < 0 or t.dmg_vs_infantry < 0:
                errs.append(f"{where}: damage must be non-negative")
            if t.shoot_cooldown < 0 or t.shoot_prep < 0 or t.stop_time < 1:
                errs.append(f"{where}: timers out of range")
            if t.attack_reduce_coeff is not None and not 0.0 < t.attack_reduce_coeff <= 1.0:
                errs.append(f"{where}: attack_reduce_coeff must be in (0,1]")
            if sc.subenv is SubEnv.CMAC and t.attack_reduce_coeff is None:
                errs.append(f"{where}: cmac templates need attack_reduce_coeff")
            if not sc.map.in_bounds(entry.spawn):
                errs.append(f"{where}: spawn {entry.spawn.to_offset()} out of bounds")
            elif entry.spawn in seen:
                errs.append(f"{where}: spawn {entry.spawn.to_offset()} already occupied")
            seen.add(entry.spawn)

    if sc.subenv is SubEnv.CMAC:
        for roster in (sc.red, sc.blue):
            if len(roster.entries) > 3:
                errs.append(f"cmac {roster.side.value} roster exceeds 3 operators "
                            "(split capacity would exceed the 9-slot bound)")
    return errs


# --- document IO --------------------------------------------------------------

def _template_to_doc(t: OperatorTemplate) -> dict:
    doc = {
        "type": t.type.value,
        "blood_max": t.blood_max,
        "speed": t.speed,
        "observed_distance": t.observed_distance,
        "attacked_distance": t.attacked_distance,
        "dmg_vs_vehicle": t.dmg_vs_vehicle,
        "p_hit_vehicle": t.p_hit_vehicle,
        "dmg_vs_infantry": t.dmg_vs_infantry,
        "p_hit_infantry": t.p_hit_infantry,
        "shoot_cooldown": t.shoot_cooldown,
        "shoot_prep": t.shoot_prep,
        "stop_time": t.stop_time,
    }
    if t.attack_reduce_coeff is not None:
        doc["attack_reduce_coeff"] = t.attack_reduce_coeff
    return doc


_TEMPLATE_REQUIRED = (
    "type", "blood_max", "speed", "observed_distance", "attacked_distance",
    "dmg_vs_vehicle", "p_hit_vehicle", "dmg_vs_infantry", "p_hit_infantry",
)
_TEMPLATE_OPTIONAL = {"shoot_cooldown": 0, "shoot_prep": 0, "stop_time": 1,
                      "attack_reduce_coeff": None}


def _template_from_doc(doc: dict, where: str, errs: list[str]) -> OperatorTemplate | None:
    if not isinstance(doc, dict):
        errs.append(f"{where}: template must be an object")
        return None
    missing = [k for k in _TEMPLATE_REQUIRED if k not in doc]
    if missing:
        errs.append(f"{where}: missing template fields {missing}")
        return None
    unknown = [k for k in doc
               if k not in _TEMPLATE_REQUIRED and k not in _TEMPLATE_OPTIONAL]
    if unknown:
        errs.append(f"{where}: unknown template fields {unknown}")
        return None
    try:
        kind = OperatorType(doc["type"])
    except ValueError:
        errs.append(f"{where}: unknown operator type {doc['type']!r}")
        return None
    try:
        return OperatorTemplate(
            type=kind,
            blood_max=float(doc["blood_max"]),
            speed=float(doc["speed"]),
            observed_distance=int(doc["observed_distance"]),
            attacked_distance=int(doc["attacked_distance"]),
            dmg_vs_vehicle=float(doc["dmg_vs_vehicle"]),
            p_hit_vehicle=float(doc["p_hit_vehicle"]),
            dmg_vs_infantry=float(doc["dmg_vs_infantry"]),
            p_hit_infantry=float(doc["p_hit_infantry"]),
            shoot_cooldown=int(doc.get("shoot_cooldown", 0)),
            shoot_prep=int(doc.get("shoot_prep", 0)),
            stop_time=int(doc.get("stop_time", 1)),
            attack_reduce_coeff=(None if doc.get("attack_reduce_coeff") is None
                                 else float(doc["attack_reduce_coeff"])),
        )
    except (TypeError, ValueError) as exc:
        errs.append(f"{where}: bad template value ({exc})")
        return None


def _roster_to_doc(r: Roster) -> list[dict]:
    out = []
    for e in r.entries:
        col, row = e.spawn.to_offset()
        doc = _template_to_doc(e.template)
        doc["spawn"] = [col, row]
        out.append(doc)
    return out


def _roster_from_doc(doc, side: Side, errs: list[str]) -> Roster:
    entries: list[RosterEntry] = []
    if not isinstance(doc, list):
        errs.append(f"{side.value}: roster must be a list")
        return Roster(side=side, entries=())
    for i, entry_doc in enumerate(doc):
        where = f"{side.value}[{i}]"
        if not isinstance(entry_doc, dict) or "spawn" not in entry_doc:
            errs.append(f"{where}: entry needs a 'spawn' field")
            continue
        spawn_doc = entry_doc["spawn"]
        tdoc = {k: v for k, v in entry_doc.items() if k != "spawn"}
        template = _template_from_doc(tdoc, where, errs)
        if (not isinstance(spawn_doc, list) or len(spawn_doc) != 2
                or not all(isinstance(v, int) for v in spawn_doc)):
            errs.append(f"{where}: spawn must be [col, row] integers")
            continue
        if template is not None:
            entries.append(RosterEntry(
                template=template,
                spawn=HexCoord.from_offset(spawn_doc[0], spawn_doc[1])))
    return Roster(side=side, entries=tuple(entries))


def scenario_to_document(sc: Scenario) -> dict:
    if sc.map.name in _MAP_FOR_INDEX.values() and builtin_map(sc.map.name) == sc.map:
        map_doc: dict = {"builtin": sc.map.name}
    else:
        map_doc = {"inline": save_map(sc.map), "name": sc.map.name}
    doc = {
        "subenv": sc.subenv.value,
        "index": sc.index,
        "map": map_doc,
        "red": _roster_to_doc(sc.red),
        "blue": _roster_to_doc(sc.blue),
        "max_ticks": sc.max_ticks,
    }
    if sc.srmac is not None:
        doc["srmac"] = {
            "p_annihilate": sc.srmac.p_annihilate,
            "p_nullify": sc.srmac.p_nullify,
            "dist_falloff": sc.srmac.dist_falloff,
            "health_floor": sc.srmac.health_floor,
        }
    return doc


def scenario_from_document(doc: dict, base_dir: Path | None = None) -> Scenario:
    errs: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioError(["scenario document must be a JSON object"])
    for key in ("subenv", "map", "red", "blue"):
        if key not in doc:
            errs.append(f"missing required field '{key}'")
    if errs:
        raise ScenarioError(errs)

    try:
        subenv = SubEnv(doc["subenv"])
    except ValueError:
        raise ScenarioError([f"unknown subenv {doc['subenv']!r}"]) from None

    map_doc = doc["map"]
    game_map: GameMap | None = None
    if not isinstance(map_doc, dict):
        errs.append("map must be an object with 'builtin', 'inline' or 'path'")
    elif "builtin" in map_doc:
        try:
            game_map = builtin_map(map_doc["builtin"])
        except ValueError as exc:
            errs.append(str(exc))
    elif "inline" in map_doc:
        try:
            game_map = load_map(map_doc["inline"], name=map_doc.get("name", "inline"))
        except ValueError as exc:
            errs.append(f"map: {exc}")
    elif "path" in map_doc:
        if base_dir is None:
            errs.append("map.path requires loading from a file location")
        else:
            target = base_dir / map_doc["path"]
            try:
                game_map = load_map(target.read_text("utf-8"), name=target.stem)
            except OSError as exc:
                errs.append(f"map.path: cannot read {target} ({exc})")
            except ValueError as exc:
                errs.append(f"map: {exc}")
    else:
        errs.append("map must contain 'builtin', 'inline' or 'path'")

    red = _roster_from_doc(doc["red"], Side.RED, errs)
    blue = _roster_from_doc(doc["blue"], Side.BLUE, errs)

    max_ticks = doc.get("max_ticks", 600)
    if not isinstance(max_ticks, int):
        errs.append(f"max_ticks must be an integer, got {max_ticks!r}")
        max_ticks = 600
    index = doc.get("index", 0)
    if not isinstance(index, int):
        errs.append(f"index must be an integer, got {index!r}")
        index = 0

    srmac = None
    if "srmac" in doc:
        sdoc = doc["srmac"]
        if not isinstance(sdoc, dict):
            errs.append("srmac must be an object")
        else:
            defaults = CombatNoiseParams()
            unknown = [k for k in sdoc if not hasattr(defaults, k)]
            if unknown:
                errs.append(f"srmac: unknown fields {unknown}")
            else:
                try:
                    srmac = replace(defaults, **{k: float(v) for k, v in sdoc.items()})
                except (TypeError, ValueError) as exc:
                    errs.append(f"srmac: bad value ({exc})")
    elif subenv is SubEnv.SRMAC:
        srmac = CombatNoiseParams()

    if errs or game_map is None:
        raise ScenarioError(errs or ["map missing"])

    sc = Scenario(subenv=subenv, index=index, map=game_map, red=red, blue=blue,
                  max_ticks=max_ticks, srmac=srmac)
    contract = validate_scenario(sc)
    if contract:
        raise ScenarioError(contract)
    return sc


def load_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"not valid JSON: {exc}"]) from None
    return scenario_from_document(doc, base_dir=base_dir)


def save_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_document(sc), indent=2, sort_keys=True) + "\n"


def resolve_scenario(spec: str, base_dir: Path | None = None) -> Scenario:
    """Accept a builtin id ('poac/1') or a path to a scenario JSON file."""
    if "/" in spec and not spec.endswith(".json"):
        prefix = spec.split("/", 1)[0]
        if prefix in {s.value for s in SubEnv}:
            return builtin_scenario(spec)
    path = Path(spec)
    if path.exists():
        return load_scenario(path.read_text("utf-8"),
                             base_dir=path.resolve().parent)
    raise ScenarioError(
        [f"{spec!r} is neither a builtin scenario id {builtin_scenario_ids()} "
         "nor a readable scenario file"])
