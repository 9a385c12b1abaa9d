"""Hexagonal board geometry, terrain, and the map text format.

Coordinates are axial (q, r) on a pointy-top hex lattice stored row-by-row
in odd-r offset layout.  The six movement directions are indexed

    0=E (+1,0)  1=NE (+1,-1)  2=NW (0,-1)  3=W (-1,0)  4=SW (-1,+1)  5=SE (0,+1)

and this order is load-bearing: action indices, split-placement scans and
the web client all use it.

Map text format (``.map`` files)::

    wgcmap v1 <width> <height>
    <height> rows of <width> characters, '.'=open, 'H'=hidden

Lines starting with ``#`` are comments and are skipped anywhere after the
header.  ``save_map(load_map(text))`` is byte-stable for normalized input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, TYPE_CHECKING

if TYPE_CHECKING:  # only for annotations; engine imports this module
    from .engine import OperatorState

__all__ = [
    "DIRECTIONS",
    "DIRECTION_NAMES",
    "HexCoord",
    "Terrain",
    "SizeClass",
    "GameMap",
    "MapParseError",
    "hex_distance",
    "effective_observed_distance",
    "is_visible",
    "load_map",
    "save_map",
    "builtin_map",
    "BUILTIN_MAP_NAMES",
]

DIRECTIONS: tuple[tuple[int, int], ...] = (
    (1, 0),   # E
    (1, -1),  # NE
    (0, -1),  # NW
    (-1, 0),  # W
    (-1, 1),  # SW
    (0, 1),   # SE
)
DIRECTION_NAMES: tuple[str, ...] = ("E", "NE", "NW", "W", "SW", "SE")

BUILTIN_MAP_NAMES: tuple[str, ...] = ("small", "medium", "large")


@dataclass(frozen=True, slots=True)
class HexCoord:
    """Axial hex coordinate (pointy-top, odd-r offset storage)."""

    q: int
    r: int

    def neighbor(self, direction: int) -> "HexCoord":
        dq, dr = DIRECTIONS[direction]
        return HexCoord(self.q + dq, self.r + dr)

    def neighbors(self) -> tuple["HexCoord", ...]:
        return tuple(self.neighbor(d) for d in range(6))

    @classmethod
    def from_offset(cls, col: int, row: int) -> "HexCoord":
        # odd-r: odd rows shove right by half a hex
        return cls(col - (row - (row & 1)) // 2, row)

    def to_offset(self) -> tuple[int, int]:
        col = self.q + (self.r - (self.r & 1)) // 2
        return col, self.r


def hex_distance(a: HexCoord, b: HexCoord) -> int:
    """Hex grid distance (axial): (|dq| + |dr| + |dq+dr|) / 2."""
    dq = a.q - b.q
    dr = a.r - b.r
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


class Terrain(enum.Enum):
    OPEN = "."
    HIDDEN = "H"


class SizeClass(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


class MapParseError(ValueError):
    """Raised on malformed map text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 0) -> None:
        super().__init__(f"line {line}, column {column}: {message}" if column
                         else f"line {line}: {message}")
        self.line = line
        self.column = column


@dataclass(eq=True)
class GameMap:
    """A rectangular board of hexes with open/hidden terrain."""

    name: str
    width: int
    height: int
    hidden: frozenset[HexCoord] = field(default_factory=frozenset)

    @property
    def size_class(self) -> SizeClass:
        # derived, not stored: small maps are exactly the terrainless ones
        if not self.hidden:
            return SizeClass.SMALL
        if max(self.width, self.height) <= 14:
            return SizeClass.MEDIUM
        return SizeClass.LARGE

    def in_bounds(self, c: HexCoord) -> bool:
        col, row = c.to_offset()
        return 0 <= col < self.width and 0 <= row < self.height

    def terrain(self, c: HexCoord) -> Terrain:
        if not self.in_bounds(c):
            raise ValueError(f"coordinate {c} out of bounds for {self.name}")
        return Terrain.HIDDEN if c in self.hidden else Terrain.OPEN

    def neighbors_in_bounds(self, c: HexCoord) -> list[HexCoord]:
        return [n for n in c.neighbors() if self.in_bounds(n)]

    def center(self) -> HexCoord:
        return HexCoord.from_offset(self.width // 2, self.height // 2)

    def mirror(self, c: HexCoord) -> HexCoord:
        """Point reflection through the board center (offset space)."""
        col, row = c.to_offset()
        return HexCoord.from_offset(self.width - 1 - col, self.height - 1 - row)

    def cells(self) -> Iterator[HexCoord]:
        for row in range(self.height):
            for col in range(self.width):
                yield HexCoord.from_offset(col, row)


def effective_observed_distance(target: "OperatorState", game_map: GameMap) -> int:
    """Distance from which *target* can be spotted.

    The target's own observed_distance, halved (floor) while it sits on
    hidden terrain.  Spotting range belongs to the target, not the viewer:
    concealment shrinks the target's signature.
    """
    base = target.template.observed_distance
    if game_map.terrain(target.pos) is Terrain.HIDDEN:
        return base // 2
    return base


def is_visible(viewer: "OperatorState", target: "OperatorState",
               game_map: GameMap) -> bool:
    """True iff *viewer* currently sees *target*.

    Both must be alive.  Allies always see each other; an enemy is seen
    iff its distance is at most its effective observed distance.
    """
    if not (viewer.alive and target.alive):
        return False
    if viewer.side == target.side:
        return True
    dist = hex_distance(viewer.pos, target.pos)
    return dist <= effective_observed_distance(target, game_map)


def load_map(text: str, name: str = "custom") -> GameMap:
    """Parse map text into a GameMap, raising MapParseError on bad input."""
    rows: list[tuple[int, str]] = []  # (1-based line number, row text)
    header: tuple[int, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if line.startswith("#"):
            continue
        if header is None:
            header = (lineno, line)
        else:
            rows.append((lineno, line))

    if header is None:
        raise MapParseError("missing header", 1)
    hline, htext = header
    parts = htext.split()
    if len(parts) != 4 or parts[0] != "wgcmap" or parts[1] != "v1":
        raise MapParseError(f"malformed header {htext!r}, "
                            "expected 'wgcmap v1 <width> <height>'", hline)
    try:
        width, height = int(parts[2]), int(parts[3])
    except ValueError:
        raise MapParseError(f"non-integer dimensions in header {htext!r}", hline) from None
    if width < 1 or height < 1:
        raise MapParseError(f"dimensions must be positive, got {width}x{height}", hline)

    if len(rows) != height:
        where = rows[-1][0] if rows else hline
        raise MapParseError(f"expected {height} rows, found {len(rows)}", where)

    hidden: set[HexCoord] = set()
    for row_idx, (lineno, line) in enumerate(rows):
        if len(line) != width:
            raise MapParseError(
                f"row has {len(line)} cells, expected {width}", lineno, len(line) + 1)
        for col_idx, ch in enumerate(line):
            if ch == Terrain.HIDDEN.value:
                hidden.add(HexCoord.from_offset(col_idx, row_idx))
            elif ch != Terrain.OPEN.value:
                raise MapParseError(f"unknown terrain code {ch!r}",
                                    lineno, col_idx + 1)
    return GameMap(name=name, width=width, height=height, hidden=frozenset(hidden))


def save_map(game_map: GameMap) -> str:
    """Serialize a GameMap to normalized map text (inverse of load_map)."""
    lines = [f"wgcmap v1 {game_map.width} {game_map.height}"]
    for row in range(game_map.height):
        chars = []
        for col in range(game_map.width):
            c = HexCoord.from_offset(col, row)
            chars.append(Terrain.HIDDEN.value if c in game_map.hidden
                         else Terrain.OPEN.value)
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


def builtin_map(name: str) -> GameMap:
    """Load one of the bundled maps: small, medium or large."""
    if name not in BUILTIN_MAP_NAMES:
        raise ValueError(f"unknown builtin map {name!r}, "
                         f"expected one of {BUILTIN_MAP_NAMES}")
    text = resources.files("wgc").joinpath(f"maps/{name}.map").read_text("utf-8")
    return load_map(text, name=name)
