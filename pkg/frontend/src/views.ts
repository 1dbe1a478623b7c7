/**
 * Pure renderers: view payload in, display list out.
 *
 * Both functions return a flat list of tagged draw operations instead of
 * touching a canvas, so the role contracts are assertable: the influencer
 * list never contains a gate or score element, the coach list never
 * contains a circle, and the cart color rule is a plain property of the
 * output. main.ts paints the lists 1:1.
 */
import type { CoachViewPayload, InfluencerViewPayload } from "./schema.js";

export interface Screen {
  width: number;
  height: number;
}

export type DrawOp =
  | { shape: "line"; tag: string; x1: number; y1: number; x2: number; y2: number; color: string; width: number; dashed?: boolean }
  | { shape: "rect"; tag: string; x: number; y: number; w: number; h: number; fill: string }
  | { shape: "circle"; tag: string; x: number; y: number; r: number; stroke: string; fill: string | null; dashed: boolean }
  | { shape: "text"; tag: string; x: number; y: number; text: string; color: string; size: number };

// Palette and proportions. The cart on the influencer screen never changes
// color; green/red is coach-only information.
export const NEUTRAL_CART = "#2f2f2f";
export const CORRECT_GREEN = "#3fa34d";
export const WRONG_RED = "#d84a3a";
export const TRACK_COLOR = "#9a9a9a";
export const POLE_COLOR = "#8a5a2b";
export const GATE_COLORS = { blue: "#3a6fd8", red: "#d84a3a" } as const;
export const CIRCLE_COLORS = { left: "#7a4fd0", right: "#2a9d8f" } as const;
export const INACTIVE_CIRCLE = "#9a9a9a";

export const MIN_CIRCLE_RADIUS = 6;
export const CIRCLE_RADIUS_SCALE = 70;

const WORLD_HALF_WIDTH = 2.6; // track limit 2.4 plus a margin so exits stay visible

function sx(x: number, screen: Screen): number {
  return screen.width / 2 + (x / WORLD_HALF_WIDTH) * (screen.width / 2);
}

function trackY(screen: Screen): number {
  return screen.height * 0.72;
}

function cartAndPole(x: number, theta: number, screen: Screen, cartFill: string): DrawOp[] {
  const y = trackY(screen);
  const cx = sx(x, screen);
  const cartW = screen.width * 0.07;
  const cartH = screen.height * 0.035;
  const poleLen = screen.height * 0.28;
  const topY = y - cartH;
  return [
    { shape: "line", tag: "track", x1: 0, y1: y, x2: screen.width, y2: y, color: TRACK_COLOR, width: 2 },
    { shape: "rect", tag: "cart", x: cx - cartW / 2, y: topY, w: cartW, h: cartH, fill: cartFill },
    {
      shape: "line",
      tag: "pole",
      x1: cx,
      y1: topY,
      x2: cx + Math.sin(theta) * poleLen,
      y2: topY - Math.cos(theta) * poleLen,
      color: POLE_COLOR,
      width: 5,
    },
  ];
}

export function circleRadius(intensity: number): number {
  return Math.max(MIN_CIRCLE_RADIUS, CIRCLE_RADIUS_SCALE * intensity);
}

export function renderInfluencerView(view: InfluencerViewPayload, screen: Screen): DrawOp[] {
  const ops = cartAndPole(view.x, view.theta, screen, NEUTRAL_CART);
  for (const side of ["left", "right"] as const) {
    const circle = view.influences[side];
    const active = circle.intensity > 0;
    ops.push({
      shape: "circle",
      tag: `circle-${side}`,
      x: sx(circle.center_x, screen),
      y: trackY(screen) - circle.center_y * screen.height * 0.4,
      r: circleRadius(circle.intensity),
      stroke: active ? CIRCLE_COLORS[side] : INACTIVE_CIRCLE,
      fill: active ? CIRCLE_COLORS[side] + "33" : null,
      dashed: !active,
    });
  }
  ops.push({
    shape: "text",
    tag: "level",
    x: 12,
    y: 24,
    text: `level ${view.level}`,
    color: NEUTRAL_CART,
    size: 16,
  });
  return ops;
}

export function renderCoachView(view: CoachViewPayload, screen: Screen): DrawOp[] {
  const cartFill = view.cart_correctness === "correct" ? CORRECT_GREEN : WRONG_RED;
  const ops = cartAndPole(view.x, view.theta, screen, cartFill);
  if (view.gate !== null) {
    // The gate marker climbs as it fills: progress 0 sits on the bottom
    // edge, progress 1 is leaving through the top.
    const gx = sx(view.gate.line_x, screen);
    const gy = screen.height * (1 - view.gate.progress);
    const half = screen.width * 0.045;
    ops.push({
      shape: "line",
      tag: "gate",
      x1: gx - half,
      y1: gy,
      x2: gx + half,
      y2: gy,
      color: GATE_COLORS[view.gate.color],
      width: 6,
    });
  }
  ops.push({
    shape: "text",
    tag: "score-panel",
    x: 12,
    y: 24,
    text: `score ${view.score}  best ${view.best}  level ${view.level}`,
    color: NEUTRAL_CART,
    size: 16,
  });
  return ops;
}
