// Hex geometry for a pointy-top axial lattice stored odd-r offset.
// Matches the engine's conventions exactly: direction order, offset
// conversion, and distance must agree with what the service sends.

export interface Axial {
  q: number;
  r: number;
}

export interface Offset {
  col: number;
  row: number;
}

export interface Point {
  x: number;
  y: number;
}

// index order is load-bearing: action indices 2..7 map onto this
export const DIRECTIONS: ReadonlyArray<Axial> = [
  { q: 1, r: 0 },   // E
  { q: 1, r: -1 },  // NE
  { q: 0, r: -1 },  // NW
  { q: -1, r: 0 },  // W
  { q: -1, r: 1 },  // SW
  { q: 0, r: 1 },   // SE
];

export const DIRECTION_NAMES: ReadonlyArray<string> = ["E", "NE", "NW", "W", "SW", "SE"];

export function neighbor(at: Axial, direction: number): Axial {
  const d = DIRECTIONS[direction];
  return { q: at.q + d.q, r: at.r + d.r };
}

export function axialEq(a: Axial, b: Axial): boolean {
  return a.q === b.q && a.r === b.r;
}

export function axialKey(a: Axial): string {
  return `${a.q},${a.r}`;
}

export function hexDistance(a: Axial, b: Axial): number {
  const dq = a.q - b.q;
  const dr = a.r - b.r;
  return (Math.abs(dq) + Math.abs(dr) + Math.abs(dq + dr)) / 2;
}

// odd-r offset: odd rows shove right by half a hex
export function offsetToAxial(at: Offset): Axial {
  return { q: at.col - Math.floor((at.row - (at.row & 1)) / 2), r: at.row };
}

export function axialToOffset(at: Axial): Offset {
  return { col: at.q + Math.floor((at.r - (at.r & 1)) / 2), row: at.r };
}

// pointy-top placement: hex width size*sqrt(3), vertical pitch size*1.5
export function axialToPixel(at: Axial, size: number): Point {
  return {
    x: size * Math.sqrt(3) * (at.q + at.r / 2),
    y: size * 1.5 * at.r,
  };
}

export function pixelToAxial(p: Point, size: number): Axial {
  const fq = ((Math.sqrt(3) / 3) * p.x - (1 / 3) * p.y) / size;
  const fr = ((2 / 3) * p.y) / size;
  return cubeRound(fq, fr);
}

// round fractional axial to the nearest hex via cube coordinates
export function cubeRound(fq: number, fr: number): Axial {
  const fs = -fq - fr;
  let q = Math.round(fq);
  let r = Math.round(fr);
  const s = Math.round(fs);
  const dq = Math.abs(q - fq);
  const dr = Math.abs(r - fr);
  const ds = Math.abs(s - fs);
  if (dq > dr && dq > ds) {
    q = -r - s;
  } else if (dr > ds) {
    r = -q - s;
  }
  // Math.round can yield -0, which breaks key strings and deep equality
  return { q: q === 0 ? 0 : q, r: r === 0 ? 0 : r };
}

// six corners of a pointy-top hex centered at (cx, cy)
export function hexCorners(cx: number, cy: number, size: number): Point[] {
  const corners: Point[] = [];
  for (let i = 0; i < 6; i++) {
    const angle = (Math.PI / 180) * (60 * i - 30);
    corners.push({ x: cx + size * Math.cos(angle), y: cy + size * Math.sin(angle) });
  }
  return corners;
}
