// Canvas renderer for the hex board.  Stateless apart from the canvas
// handle: callers hand over a complete scene every frame.

import type { Axial, Point } from "./hex.js";
import { axialKey, axialToPixel, hexCorners, offsetToAxial, pixelToAxial } from "./hex.js";

export interface RenderUnit {
  id: number;
  side: "red" | "blue";
  type: string;
  pos: Axial;
  blood: number;
  bloodMax: number;
  alive: boolean;
  ready?: boolean;
}

export interface Scene {
  width: number;
  height: number;
  hidden: Axial[];
  units: RenderUnit[];
  selected: Axial | null;
  moveTargets: Axial[];
  shootTargets: Axial[];
}

const COLORS = {
  open: "#1d232b",
  hidden: "#2a3324",
  grid: "#3a4350",
  move: "rgba(96, 170, 255, 0.30)",
  shoot: "rgba(255, 96, 96, 0.35)",
  selected: "#ffd75e",
  red: "#d9534f",
  blue: "#3f8fd2",
  dead: "#555b63",
  bloodBack: "#30363d",
  bloodFill: "#5cb85c",
  glyph: "#f0f3f6",
};

export class BoardRenderer {
  private margin: number;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly size: number = 24,
  ) {
    this.margin = size * 1.5;
  }

  // canvas pixels for a board of w x h offset cells
  fit(width: number, height: number): void {
    const sqrt3 = Math.sqrt(3);
    this.canvas.width = Math.ceil(this.size * sqrt3 * (width + 0.5) + 2 * this.margin);
    this.canvas.height = Math.ceil(this.size * (1.5 * (height - 1) + 2) + 2 * this.margin);
  }

  private center(at: Axial): Point {
    const p = axialToPixel(at, this.size);
    return { x: p.x + this.margin + this.size, y: p.y + this.margin + this.size };
  }

  screenToAxial(sx: number, sy: number): Axial {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = this.canvas.width / rect.width;
    const scaleY = this.canvas.height / rect.height;
    return pixelToAxial(
      {
        x: sx * scaleX - this.margin - this.size,
        y: sy * scaleY - this.margin - this.size,
      },
      this.size,
    );
  }

  render(scene: Scene): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    const hidden = new Set(scene.hidden.map(axialKey));
    const moveTargets = new Set(scene.moveTargets.map(axialKey));
    const shootTargets = new Set(scene.shootTargets.map(axialKey));

    for (let row = 0; row < scene.height; row++) {
      for (let col = 0; col < scene.width; col++) {
        const at = offsetToAxial({ col, row });
        const key = axialKey(at);
        let fill = hidden.has(key) ? COLORS.hidden : COLORS.open;
        this.hexPath(ctx, at);
        ctx.fillStyle = fill;
        ctx.fill();
        if (moveTargets.has(key) || shootTargets.has(key)) {
          ctx.fillStyle = moveTargets.has(key) ? COLORS.move : COLORS.shoot;
          ctx.fill();
        }
        ctx.strokeStyle = COLORS.grid;
        ctx.lineWidth = 1;
        ctx.stroke();
      }
    }

    if (scene.selected) {
      this.hexPath(ctx, scene.selected);
      ctx.strokeStyle = COLORS.selected;
      ctx.lineWidth = 2.5;
      ctx.stroke();
    }

    for (const unit of scene.units) {
      this.drawUnit(ctx, unit);
    }
  }

  private hexPath(ctx: CanvasRenderingContext2D, at: Axial): void {
    const c = this.center(at);
    const corners = hexCorners(c.x, c.y, this.size);
    ctx.beginPath();
    ctx.moveTo(corners[0].x, corners[0].y);
    for (let i = 1; i < 6; i++) ctx.lineTo(corners[i].x, corners[i].y);
    ctx.closePath();
  }

  private drawUnit(ctx: CanvasRenderingContext2D, unit: RenderUnit): void {
    const c = this.center(unit.pos);
    const radius = this.size * 0.55;
    ctx.beginPath();
    ctx.arc(c.x, c.y, radius, 0, Math.PI * 2);
    ctx.fillStyle = unit.alive ? COLORS[unit.side] : COLORS.dead;
    ctx.fill();
    if (unit.ready) {
      ctx.strokeStyle = COLORS.glyph;
      ctx.lineWidth = 2;
      ctx.stroke();
    }

    ctx.fillStyle = COLORS.glyph;
    ctx.font = `bold ${Math.round(this.size * 0.7)}px system-ui, sans-serif`;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(unit.type.charAt(0).toUpperCase(), c.x, c.y + 1);

    if (unit.alive) {
      const barWidth = this.size * 1.4;
      const barHeight = 4;
      const x = c.x - barWidth / 2;
      const y = c.y - radius - barHeight - 3;
      ctx.fillStyle = COLORS.bloodBack;
      ctx.fillRect(x, y, barWidth, barHeight);
      ctx.fillStyle = COLORS.bloodFill;
      const frac = unit.bloodMax > 0 ? Math.max(0, Math.min(1, unit.blood / unit.bloodMax)) : 0;
      ctx.fillRect(x, y, barWidth * frac, barHeight);
    }
  }
}
