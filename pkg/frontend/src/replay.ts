// Replay folding: turn the flat record stream into one board snapshot
// per tick for the scrubber.  This is presentation bookkeeping only --
// every blood value and position comes out of the recorded events, and
// the engine's end record cross-checks the fold (see tests).

import type { Axial } from "./hex.js";
import { offsetToAxial } from "./hex.js";
import type {
  BoardMap,
  EndRecord,
  EventRecord,
  HeaderRecord,
  ReplayRecord,
  ScenarioDocument,
  SideName,
} from "./api.js";

export interface ReplayUnit {
  id: number;
  side: SideName;
  slot: number;
  type: string;
  pos: Axial;
  blood: number;
  bloodMax: number;
  alive: boolean;
  moving: boolean;
}

export interface ReplaySnapshot {
  index: number; // state after this many ticks
  units: ReplayUnit[];
  events: EventRecord[]; // the events that produced this state
}

export interface ReplayModel {
  header: HeaderRecord;
  end: EndRecord;
  ticks: number;
  snapshots: ReplaySnapshot[];
}

export class ReplayFormatError extends Error {}

function axial(pair: [number, number]): Axial {
  return { q: pair[0], r: pair[1] };
}

function cloneUnits(units: Map<number, ReplayUnit>): ReplayUnit[] {
  return [...units.values()]
    .sort((a, b) => a.id - b.id)
    .map((u) => ({ ...u, pos: { ...u.pos } }));
}

export function foldReplay(records: ReplayRecord[]): ReplayModel {
  if (records.length < 2 || records[0].record !== "header") {
    throw new ReplayFormatError("replay must start with a header record");
  }
  const header = records[0] as HeaderRecord;
  const last = records[records.length - 1];
  if (last.record !== "end") {
    throw new ReplayFormatError("replay must finish with an end record");
  }
  const end = last as EndRecord;

  // initial roster: red slots then blue slots, ids assigned in order
  const units = new Map<number, ReplayUnit>();
  const rootType = new Map<number, string>();
  const rootBloodMax = new Map<number, number>();
  let id = 0;
  for (const side of ["red", "blue"] as SideName[]) {
    const roster = header.scenario[side];
    roster.forEach((entry, slot) => {
      units.set(id, {
        id,
        side,
        slot,
        type: entry.type,
        pos: offsetToAxial({ col: entry.spawn[0], row: entry.spawn[1] }),
        blood: entry.blood_max,
        bloodMax: entry.blood_max,
        alive: true,
        moving: false,
      });
      rootType.set(id, entry.type);
      rootBloodMax.set(id, entry.blood_max);
      id += 1;
    });
  }

  const byTick = new Map<number, EventRecord[]>();
  for (const record of records) {
    if (record.record !== "event") continue;
    const group = byTick.get(record.tick);
    if (group === undefined) {
      byTick.set(record.tick, [record]);
    } else {
      group.push(record);
    }
  }

  const apply = (event: EventRecord): void => {
    const data = event.data;
    switch (event.kind) {
      case "move_started": {
        const u = units.get(data.agent);
        if (u) u.moving = true;
        break;
      }
      case "moved": {
        const u = units.get(data.agent);
        if (u) {
          u.pos = axial(data.to);
          u.moving = false;
        }
        break;
      }
      case "damaged": {
        const u = units.get(data.target);
        if (u) u.blood = data.blood;
        break;
      }
      case "annihilated": {
        const u = units.get(data.target);
        if (u) u.blood = 0;
        break;
      }
      case "nullified": {
        if (data.what === "move_blocked") {
          const u = units.get(data.agent);
          if (u) u.moving = false;
        }
        break;
      }
      case "split": {
        const parent = units.get(data.agent);
        if (!parent) throw new ReplayFormatError(`split of unknown unit ${data.agent}`);
        units.delete(data.agent);
        for (const child of data.children as { id: number; slot: number; at: [number, number]; blood: number }[]) {
          units.set(child.id, {
            id: child.id,
            side: data.side,
            slot: child.slot,
            type: rootType.get(data.lineage) ?? parent.type,
            pos: axial(child.at),
            blood: child.blood,
            bloodMax: rootBloodMax.get(data.lineage) ?? parent.bloodMax,
            alive: true,
            moving: false,
          });
        }
        break;
      }
      case "merged": {
        const [a, b] = data.from as [number, number];
        units.delete(a);
        units.delete(b);
        units.set(data.agent, {
          id: data.agent,
          side: data.side,
          slot: data.slot,
          type: rootType.get(data.lineage) ?? "tank",
          pos: axial(data.at),
          blood: data.blood,
          bloodMax: rootBloodMax.get(data.lineage) ?? data.blood,
          alive: true,
          moving: false,
        });
        break;
      }
      case "died": {
        const u = units.get(data.agent);
        if (u) {
          u.alive = false;
          u.blood = 0;
          u.pos = axial(data.at);
        }
        break;
      }
      default:
        // stopped, other nullified variants, episode_end: no board change
        break;
    }
  };

  const snapshots: ReplaySnapshot[] = [{ index: 0, units: cloneUnits(units), events: [] }];
  for (let tick = 0; tick < end.ticks; tick++) {
    const group = byTick.get(tick) ?? [];
    for (const event of group) apply(event);
    // episode_end is stamped one past the final simulated tick
    const events = tick === end.ticks - 1 ? [...group, ...(byTick.get(end.ticks) ?? [])] : group;
    snapshots.push({ index: tick + 1, units: cloneUnits(units), events });
  }
  return { header, end, ticks: end.ticks, snapshots };
}

// sum of living blood per side in one snapshot; mirrors the engine's
// timeout bookkeeping so tests can check the fold against the end record
export function bloodTotals(snapshot: ReplaySnapshot): { red: number; blue: number } {
  let red = 0;
  let blue = 0;
  for (const u of snapshot.units) {
    if (!u.alive) continue;
    if (u.side === "red") red += u.blood;
    else blue += u.blood;
  }
  return { red, blue };
}

// Inline map text ("wgcmap v1 W H" plus terrain rows).  Builtin map
// references carry no terrain; resolve those through the service
// (ApiClient.mapViaSession) instead.
export function parseMapText(text: string): BoardMap {
  const lines = text
    .split("\n")
    .map((l) => l.trimEnd())
    .filter((l) => l !== "" && !l.startsWith("#"));
  if (lines.length === 0) throw new ReplayFormatError("empty map text");
  const header = lines[0].split(/\s+/);
  if (header[0] !== "wgcmap" || header[1] !== "v1" || header.length !== 4) {
    throw new ReplayFormatError(`bad map header: ${lines[0]}`);
  }
  const width = Number(header[2]);
  const height = Number(header[3]);
  if (!Number.isInteger(width) || !Number.isInteger(height) || lines.length - 1 !== height) {
    throw new ReplayFormatError("map text does not match its declared size");
  }
  const hidden: Axial[] = [];
  for (let row = 0; row < height; row++) {
    const cells = lines[1 + row];
    if (cells.length !== width) {
      throw new ReplayFormatError(`map row ${row} has width ${cells.length}, expected ${width}`);
    }
    for (let col = 0; col < width; col++) {
      if (cells[col] === "H") hidden.push(offsetToAxial({ col, row }));
    }
  }
  return { width, height, hidden };
}

export function mapFromScenario(scenario: ScenarioDocument): BoardMap | null {
  if (scenario.map.inline !== undefined) return parseMapText(scenario.map.inline);
  return null; // builtin or path reference: ask the service
}
