// Selection and click-to-action mapping for live play.  Pure functions
// over the view payload: the mask decides legality, the labels decide
// indices, and nothing here re-derives game rules.

import type { Axial } from "./hex.js";
import { DIRECTION_NAMES, axialEq, neighbor } from "./hex.js";
import type { EnemyEntry, FriendEntry, View } from "./api.js";

export function actionIndex(labels: string[], label: string): number {
  return labels.indexOf(label);
}

export interface MoveOption {
  direction: number;
  action: number;
  target: Axial;
}

export interface ShootOption {
  enemySlot: number;
  enemyId: number;
  action: number;
  target: Axial;
}

export interface ButtonOption {
  action: number;
  label: string;
}

function maskTrue(view: View, slot: number, action: number): boolean {
  return action >= 0 && view.masks[slot]?.[action] === 1;
}

export function friendAt(view: View, at: Axial): FriendEntry | undefined {
  return view.friends.find((f) => axialEq({ q: f.pos[0], r: f.pos[1] }, at));
}

export function enemyAt(view: View, at: Axial): EnemyEntry | undefined {
  return view.enemies.find((e) => axialEq({ q: e.pos[0], r: e.pos[1] }, at));
}

export function legalMoves(view: View, slot: number): MoveOption[] {
  const friend = view.friends.find((f) => f.slot === slot);
  if (!friend) return [];
  const origin: Axial = { q: friend.pos[0], r: friend.pos[1] };
  const options: MoveOption[] = [];
  for (let direction = 0; direction < 6; direction++) {
    const action = actionIndex(view.action_labels, `move ${DIRECTION_NAMES[direction]}`);
    if (maskTrue(view, slot, action)) {
      options.push({ direction, action, target: neighbor(origin, direction) });
    }
  }
  return options;
}

export function legalShots(view: View, slot: number): ShootOption[] {
  const options: ShootOption[] = [];
  for (const enemy of view.enemies) {
    const action = actionIndex(view.action_labels, `shoot slot ${enemy.slot}`);
    if (maskTrue(view, slot, action)) {
      options.push({
        enemySlot: enemy.slot,
        enemyId: enemy.id,
        action,
        target: { q: enemy.pos[0], r: enemy.pos[1] },
      });
    }
  }
  return options;
}

// everything that is not board-driven (moves, shots) becomes a button:
// noop, stop, split options, merges
export function buttonActions(view: View, slot: number): ButtonOption[] {
  const mask = view.masks[slot] ?? [];
  const options: ButtonOption[] = [];
  mask.forEach((legal, action) => {
    if (legal !== 1) return;
    const label = view.action_labels[action];
    if (label.startsWith("move ") || label.startsWith("shoot ")) return;
    options.push({ action, label });
  });
  return options;
}

export type ClickResult =
  | { kind: "select"; slot: number }
  | { kind: "act"; slot: number; action: number }
  | { kind: "none" };

// click priority: act with the current selection if the hex is a legal
// target, otherwise reselect a friendly unit, otherwise nothing
export function clickResult(view: View, selected: number | null, at: Axial): ClickResult {
  if (selected !== null && view.ready.includes(selected)) {
    for (const shot of legalShots(view, selected)) {
      if (axialEq(shot.target, at)) return { kind: "act", slot: selected, action: shot.action };
    }
    for (const move of legalMoves(view, selected)) {
      if (axialEq(move.target, at)) return { kind: "act", slot: selected, action: move.action };
    }
  }
  const friend = friendAt(view, at);
  if (friend) return { kind: "select", slot: friend.slot };
  return { kind: "none" };
}
