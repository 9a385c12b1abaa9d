// DOM wiring: live play against a service bot, plus the replay scrubber.

import { ApiClient, ApiError, toBoardMap } from "./api.js";
import type { BoardMap, EventRecord, View } from "./api.js";
import { BoardRenderer } from "./board.js";
import type { RenderUnit, Scene } from "./board.js";
import { buttonActions, clickResult, legalMoves, legalShots } from "./controller.js";
import { foldReplay, mapFromScenario } from "./replay.js";
import type { ReplayModel } from "./replay.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function describeEvent(ev: EventRecord): string {
  const d = ev.data;
  switch (ev.kind) {
    case "move_started":
      return `#${d.agent} moves ${JSON.stringify(d.from)} -> ${JSON.stringify(d.to)}`;
    case "moved":
      return `#${d.agent} arrived at ${JSON.stringify(d.to)}`;
    case "stopped":
      return `#${d.agent} braces for ${d.duration}`;
    case "damaged":
      return `#${d.attacker} hits #${d.target} for ${Number(d.amount).toFixed(2)} (${Number(d.blood).toFixed(2)} left)`;
    case "annihilated":
      return `#${d.attacker} annihilates #${d.target}`;
    case "nullified":
      return `#${d.agent ?? "?"} ${d.what}`;
    case "split":
      return `#${d.agent} splits into ${(d.children as unknown[]).length}`;
    case "merged":
      return `#${d.from[0]} + #${d.from[1]} merge into #${d.agent}`;
    case "died":
      return `#${d.agent} died at ${JSON.stringify(d.at)}`;
    case "episode_end":
      return `game over: ${d.outcome} by ${d.reason} after ${d.ticks} ticks`;
    default:
      return ev.kind;
  }
}

// -- live play -----------------------------------------------------------------

const liveBoard = new BoardRenderer(el<HTMLCanvasElement>("board"), 24);
let view: View | null = null;
let selectedSlot: number | null = null;
let socket: WebSocket | null = null;

function setStatus(text: string): void {
  el("status").textContent = text;
}

function appendLog(text: string): void {
  const log = el("log");
  const line = document.createElement("div");
  line.textContent = text;
  log.appendChild(line);
  log.scrollTop = log.scrollHeight;
}

function liveScene(v: View): Scene {
  const map: BoardMap = toBoardMap(v.map);
  const units: RenderUnit[] = [];
  if (v.phase === "finished" && v.full) {
    for (const op of v.full) {
      units.push({
        id: op.id,
        side: op.side,
        type: op.type,
        pos: { q: op.pos[0], r: op.pos[1] },
        blood: op.blood,
        bloodMax: Math.max(op.blood, 1),
        alive: op.alive,
      });
    }
  } else {
    for (const f of v.friends) {
      units.push({
        id: f.id,
        side: v.side,
        type: f.type,
        pos: { q: f.pos[0], r: f.pos[1] },
        blood: f.blood,
        bloodMax: f.blood_max,
        alive: true,
        ready: f.ready,
      });
    }
    const enemySide = v.side === "red" ? "blue" : "red";
    for (const e of v.enemies) {
      units.push({
        id: e.id,
        side: enemySide,
        type: e.type,
        pos: { q: e.pos[0], r: e.pos[1] },
        blood: e.blood,
        bloodMax: e.blood_max,
        alive: true,
      });
    }
  }

  const selected = selectedSlot !== null
    ? v.friends.find((f) => f.slot === selectedSlot)
    : undefined;
  const canAct = selected !== undefined && v.ready.includes(selected.slot);
  return {
    width: map.width,
    height: map.height,
    hidden: map.hidden,
    units,
    selected: selected ? { q: selected.pos[0], r: selected.pos[1] } : null,
    moveTargets: canAct ? legalMoves(v, selected.slot).map((m) => m.target) : [],
    shootTargets: canAct ? legalShots(v, selected.slot).map((s) => s.target) : [],
  };
}

function renderLive(): void {
  if (!view) return;
  liveBoard.fit(view.map.width, view.map.height);
  liveBoard.render(liveScene(view));

  const v = view;
  const outcome = v.outcome
    ? ` | ${v.outcome.result} by ${v.outcome.reason} (red ${v.outcome.red_blood.toFixed(1)} / blue ${v.outcome.blue_blood.toFixed(1)})`
    : "";
  setStatus(
    `${v.scenario} as ${v.side} vs ${v.opponent} | tick ${v.tick}/${v.max_ticks} | ${v.phase}${outcome}`,
  );

  const actions = el("actions");
  actions.textContent = "";
  if (selectedSlot !== null && v.phase === "awaiting_action" && v.ready.includes(selectedSlot)) {
    for (const option of buttonActions(v, selectedSlot)) {
      const button = document.createElement("button");
      button.textContent = option.label;
      button.onclick = () => submit(option.action);
      actions.appendChild(button);
    }
  }

  const info = el("unit-info");
  const friend = v.friends.find((f) => f.slot === selectedSlot);
  info.textContent = friend
    ? `slot ${friend.slot} #${friend.id} ${friend.type} | blood ${friend.blood.toFixed(1)}/${friend.blood_max}` +
      ` | cooldown ${friend.cooldown} | ${friend.ready ? "ready" : friend.moving ? "moving" : "busy"}`
    : "click a friendly unit";
}

async function submit(action: number): Promise<void> {
  if (!view || selectedSlot === null) return;
  try {
    const result = await api.act(view.session, selectedSlot, action);
    view = result.view;
    renderLive();
  } catch (err) {
    if (err instanceof ApiError) {
      setStatus(`rejected: ${err.code} - ${err.message}`);
    } else {
      throw err;
    }
  }
}

el<HTMLCanvasElement>("board").addEventListener("click", (ev) => {
  if (!view) return;
  const rect = el<HTMLCanvasElement>("board").getBoundingClientRect();
  const at = liveBoard.screenToAxial(ev.clientX - rect.left, ev.clientY - rect.top);
  const result = clickResult(view, selectedSlot, at);
  if (result.kind === "select") {
    selectedSlot = result.slot;
    renderLive();
  } else if (result.kind === "act") {
    void submit(result.action);
  }
});

el("new-game").onclick = async () => {
  const scenario = el<HTMLSelectElement>("scenario").value;
  const seedText = el<HTMLInputElement>("seed").value;
  const seed = seedText === "" ? Math.floor(Math.random() * 1_000_000) : Number(seedText);
  const side = el<HTMLSelectElement>("side").value as "red" | "blue";
  const opponent = el<HTMLSelectElement>("opponent").value;
  try {
    const created = await api.createSession({ scenario, seed, side, opponent });
    view = created.view;
    selectedSlot = null;
    el("log").textContent = "";
    socket?.close();
    socket = api.openEvents(created.session, (event) => appendLog(`[${event.tick}] ${describeEvent(event)}`));
    renderLive();
  } catch (err) {
    setStatus(err instanceof ApiError ? `error: ${err.code} - ${err.message}` : String(err));
  }
};

// -- replay scrubber -------------------------------------------------------------

const replayBoard = new BoardRenderer(el<HTMLCanvasElement>("replay-board"), 24);
let replay: ReplayModel | null = null;
let replayMap: BoardMap | null = null;

function renderReplay(): void {
  if (!replay || !replayMap) return;
  const index = Number(el<HTMLInputElement>("scrub").value);
  const snapshot = replay.snapshots[index];
  el("scrub-label").textContent = `tick ${index}/${replay.ticks}`;
  replayBoard.fit(replayMap.width, replayMap.height);
  replayBoard.render({
    width: replayMap.width,
    height: replayMap.height,
    hidden: replayMap.hidden,
    units: snapshot.units,
    selected: null,
    moveTargets: [],
    shootTargets: [],
  });
  const panel = el("replay-events");
  panel.textContent = "";
  for (const event of snapshot.events) {
    const line = document.createElement("div");
    line.textContent = describeEvent(event);
    panel.appendChild(line);
  }
}

el("refresh-replays").onclick = async () => {
  const select = el<HTMLSelectElement>("replay-list");
  select.textContent = "";
  for (const summary of await api.listReplays()) {
    const option = document.createElement("option");
    option.value = summary.id;
    option.textContent = `${summary.id} | ${summary.scenario} | ${summary.outcome} in ${summary.ticks}`;
    select.appendChild(option);
  }
};

el("load-replay").onclick = async () => {
  const id = el<HTMLSelectElement>("replay-list").value;
  if (id === "") return;
  const records = await api.fetchReplay(id);
  replay = foldReplay(records);
  replayMap = mapFromScenario(replay.header.scenario) ?? (await api.mapViaSession(replay.header.scenario));
  const scrub = el<HTMLInputElement>("scrub");
  scrub.max = String(replay.ticks);
  scrub.value = "0";
  renderReplay();
};

el("scrub").oninput = renderReplay;
el("prev-tick").onclick = () => {
  const scrub = el<HTMLInputElement>("scrub");
  scrub.value = String(Math.max(0, Number(scrub.value) - 1));
  renderReplay();
};
el("next-tick").onclick = () => {
  const scrub = el<HTMLInputElement>("scrub");
  scrub.value = String(Math.min(Number(scrub.max), Number(scrub.value) + 1));
  renderReplay();
};

setStatus("no game yet");
