// HTTP/WS client for the game service.  Every shape here mirrors the
// service payloads field for field; this module is the only place that
// talks to the network.

import type { Axial } from "./hex.js";

// -- wire types -------------------------------------------------------------

export type SideName = "red" | "blue";

export interface MapPayload {
  name: string;
  width: number;
  height: number;
  size_class: string;
  hidden: [number, number][]; // axial [q, r]
}

export interface FriendEntry {
  slot: number;
  id: number;
  type: string;
  pos: [number, number];
  blood: number;
  blood_max: number;
  speed: number;
  attacked_distance: number;
  observed_distance: number;
  ready: boolean;
  moving: boolean;
  busy_ticks: number;
  cooldown: number;
  lineage: number | null;
}

export interface EnemyEntry {
  slot: number;
  id: number;
  type: string;
  pos: [number, number];
  blood: number;
  blood_max: number;
  seen_by: number[];
}

export interface OutcomePayload {
  result: string;
  reason: string;
  ticks: number;
  red_blood: number;
  blue_blood: number;
}

export interface FullEntry {
  id: number;
  side: SideName;
  slot: number;
  type: string;
  pos: [number, number];
  blood: number;
  alive: boolean;
}

export interface View {
  session: string;
  phase: "awaiting_action" | "finished";
  scenario: string;
  subenv: string;
  side: SideName;
  opponent: string;
  tick: number;
  max_ticks: number;
  map: MapPayload;
  friends: FriendEntry[];
  enemies: EnemyEntry[];
  masks: number[][];
  action_labels: string[];
  ready: number[];
  pending: Record<string, number>;
  events: EventRecord[];
  outcome: OutcomePayload | null;
  full?: FullEntry[];
}

export interface CreateSessionRequest {
  scenario: string | ScenarioDocument;
  seed: number;
  side?: SideName;
  opponent?: string;
  opponent_seed?: number;
}

export interface CreateSessionResponse {
  session: string;
  view: View;
}

export interface ActResponse {
  ok: true;
  queued: { slot: number; action: number };
  advanced: number;
  view: View;
}

export interface ReplaySummary {
  id: string;
  scenario: string;
  outcome: string;
  reason: string;
  ticks: number;
  digest: string;
}

// -- replay records ----------------------------------------------------------

export interface RosterEntry {
  type: string;
  blood_max: number;
  spawn: [number, number]; // offset [col, row]
  [extra: string]: unknown;
}

export interface ScenarioDocument {
  subenv: string;
  index?: number;
  map: { builtin?: string; inline?: string; name?: string; path?: string };
  red: RosterEntry[];
  blue: RosterEntry[];
  max_ticks?: number;
  srmac?: Record<string, number>;
}

export interface HeaderRecord {
  record: "header";
  format: number;
  engine: string;
  scenario: ScenarioDocument;
  engine_seed: number;
  policies: Record<string, { name: string; version: string; seed: number }>;
}

export interface ActionsRecord {
  record: "actions";
  tick: number;
  actions: Record<string, { kind: string; [param: string]: unknown }>;
}

export interface EventRecord {
  record: "event";
  tick: number;
  seq: number;
  kind: string;
  data: Record<string, any>;
}

export interface EndRecord {
  record: "end";
  outcome: string;
  reason: string;
  ticks: number;
  red_blood: number;
  blue_blood: number;
  digest: string;
}

export type ReplayRecord = HeaderRecord | ActionsRecord | EventRecord | EndRecord;

export function parseNdjson(text: string): ReplayRecord[] {
  const records: ReplayRecord[] = [];
  for (const line of text.split("\n")) {
    if (line.trim() === "") continue;
    records.push(JSON.parse(line) as ReplayRecord);
  }
  return records;
}

// -- board map normalization ---------------------------------------------------

export interface BoardMap {
  width: number;
  height: number;
  hidden: Axial[];
}

export function toBoardMap(payload: MapPayload): BoardMap {
  return {
    width: payload.width,
    height: payload.height,
    hidden: payload.hidden.map(([q, r]) => ({ q, r })),
  };
}

// -- client -------------------------------------------------------------------

export type Fetcher = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly extras: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

const JSON_HEADERS = { "content-type": "application/json" };

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: Fetcher = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    const text = await res.text();
    if (!res.ok) {
      let body: Record<string, unknown> = {};
      try {
        body = JSON.parse(text) as Record<string, unknown>;
      } catch {
        // non-JSON error body; fall through with the status text
      }
      throw new ApiError(
        res.status,
        typeof body.error === "string" ? body.error : "http_error",
        typeof body.message === "string" ? body.message : res.statusText,
        body,
      );
    }
    return JSON.parse(text) as T;
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.request<CreateSessionResponse>("/sessions", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify(req),
    });
  }

  view(session: string): Promise<View> {
    return this.request<View>(`/sessions/${session}/view`);
  }

  act(session: string, slot: number, action: number): Promise<ActResponse> {
    return this.request<ActResponse>(`/sessions/${session}/actions`, {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ slot, action }),
    });
  }

  async listReplays(): Promise<ReplaySummary[]> {
    const body = await this.request<{ replays: ReplaySummary[] }>("/replays");
    return body.replays;
  }

  async fetchReplay(id: string): Promise<ReplayRecord[]> {
    // raw newline-delimited JSON, not a JSON body
    const res = await this.fetchFn(`${this.base}/replays/${encodeURIComponent(id)}`);
    if (!res.ok) {
      throw new ApiError(res.status, "http_error", `replay ${id}: ${res.statusText}`);
    }
    return parseNdjson(await res.text());
  }

  // Builtin-map replays carry only a map name, and the service has the
  // terrain; a throwaway session against the recorded scenario document
  // recovers the board without duplicating map data client-side.
  async mapViaSession(scenario: ScenarioDocument): Promise<BoardMap> {
    const created = await this.createSession({ scenario, seed: 0, opponent: "stop" });
    return toBoardMap(created.view.map);
  }

  eventsUrl(session: string): string {
    const root = this.base !== ""
      ? this.base
      : `${window.location.protocol}//${window.location.host}`;
    return `${root.replace(/^http/, "ws")}/sessions/${session}/events`;
  }

  openEvents(session: string, onEvent: (ev: EventRecord) => void): WebSocket {
    const socket = new WebSocket(this.eventsUrl(session));
    socket.onmessage = (msg) => onEvent(JSON.parse(msg.data as string) as EventRecord);
    return socket;
  }
}
