"""Shared test fixtures: compact scenario builders and a scripted rng."""

from __future__ import annotations

from dataclasses import replace

from wgc.hexmap import HexCoord, load_map
from wgc.scenario import (
    CMAC_TEMPLATES,
    POAC_TEMPLATES,
    STANDARD_TEMPLATES,
    CombatNoiseParams,
    OperatorTemplate,
    OperatorType,
    Roster,
    RosterEntry,
    Scenario,
    Side,
    SubEnv,
)

_TEMPLATE_SETS = {
    SubEnv.STANDARD: STANDARD_TEMPLATES,
    SubEnv.POAC: POAC_TEMPLATES,
    SubEnv.CMAC: CMAC_TEMPLATES,
    SubEnv.SRMAC: STANDARD_TEMPLATES,
}


def open_map(width: int = 10, height: int = 10, hidden: list[tuple[int, int]] = ()):
    rows = []
    hidden_set = set(hidden)
    for r in range(height):
        rows.append("".join("H" if (c, r) in hidden_set else "."
                            for c in range(width)))
    return load_map(f"wgcmap v1 {width} {height}\n" + "\n".join(rows) + "\n",
                    name="test")


def place(side: Side, spec: list, subenv: SubEnv = SubEnv.STANDARD) -> Roster:
    """spec items: (OperatorType, col, row) or (OperatorTemplate, col, row)."""
    entries = []
    for kind, col, row in spec:
        template = kind if isinstance(kind, OperatorTemplate) \
            else _TEMPLATE_SETS[subenv][kind]
        entries.append(RosterEntry(template=template,
                                   spawn=HexCoord.from_offset(col, row)))
    return Roster(side=side, entries=tuple(entries))


def custom_scenario(red_spec, blue_spec, *, subenv: SubEnv = SubEnv.STANDARD,
                    game_map=None, max_ticks: int = 600,
                    srmac: CombatNoiseParams | None = None) -> Scenario:
    if game_map is None:
        game_map = open_map()
    if subenv is SubEnv.SRMAC and srmac is None:
        srmac = CombatNoiseParams()
    return Scenario(
        subenv=subenv, index=0, map=game_map,
        red=place(Side.RED, red_spec, subenv),
        blue=place(Side.BLUE, blue_spec, subenv),
        max_ticks=max_ticks, srmac=srmac)


def tweak(template: OperatorTemplate, **kwargs) -> OperatorTemplate:
    return replace(template, **kwargs)


class ScriptedRng:
    """Stands in for GameRng with a fixed list of uniforms."""

    def __init__(self, values):
        self.values = list(values)
        self.draws = 0
        self.seed = -1

    def uniform(self) -> float:
        self.draws += 1
        return self.values.pop(0)

    def clone(self):
        c = ScriptedRng(self.values)
        c.draws = self.draws
        return c
