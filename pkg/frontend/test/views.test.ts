import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import type { CoachViewPayload, InfluencerViewPayload } from "../src/schema.js";
import {
  CIRCLE_RADIUS_SCALE,
  CORRECT_GREEN,
  MIN_CIRCLE_RADIUS,
  NEUTRAL_CART,
  renderCoachView,
  renderInfluencerView,
  WRONG_RED,
  type DrawOp,
} from "../src/views.js";

const SCREEN = { width: 960, height: 540 };

const goldenPath = fileURLToPath(new URL("./golden/coach_snapshots.json", import.meta.url));
const golden: { name: string; expect_cart: "green" | "red"; view: CoachViewPayload }[] =
  JSON.parse(readFileSync(goldenPath, "utf-8"));

function influencerSnapshot(overrides: Partial<InfluencerViewPayload> = {}): InfluencerViewPayload {
  return {
    kind: "influencer_view",
    x: 0.4,
    theta: 0.1,
    level: 1,
    influences: {
      left: { center_x: -1.8, center_y: 0.3, intensity: 0.5 },
      right: { center_x: 1.8, center_y: 0.3, intensity: 0.9 },
    },
    ...overrides,
  };
}

function byTag(ops: DrawOp[], tag: string): DrawOp[] {
  return ops.filter((op) => op.tag === tag);
}

describe("influencer view", () => {
  it("draws track, cart, pole and both circles, nothing goal-shaped", () => {
    const ops = renderInfluencerView(influencerSnapshot(), SCREEN);
    for (const tag of ["track", "cart", "pole", "circle-left", "circle-right", "level"]) {
      expect(byTag(ops, tag)).toHaveLength(1);
    }
    expect(byTag(ops, "gate")).toHaveLength(0);
    expect(byTag(ops, "score-panel")).toHaveLength(0);
    for (const op of ops) {
      if (op.shape === "text") expect(op.text).not.toMatch(/score|best/);
    }
  });

  it("keeps the cart neutral-colored no matter the pose", () => {
    for (const x of [-2.0, 0.0, 1.7]) {
      const ops = renderInfluencerView(influencerSnapshot({ x }), SCREEN);
      const cart = byTag(ops, "cart")[0];
      expect(cart.shape === "rect" && cart.fill).toBe(NEUTRAL_CART);
    }
  });

  it("scales circle radius with intensity, never below the visible floor", () => {
    const ops = renderInfluencerView(influencerSnapshot(), SCREEN);
    const left = byTag(ops, "circle-left")[0];
    const right = byTag(ops, "circle-right")[0];
    if (left.shape !== "circle" || right.shape !== "circle") throw new Error("not circles");
    expect(left.r).toBeCloseTo(0.5 * CIRCLE_RADIUS_SCALE);
    expect(right.r).toBeCloseTo(0.9 * CIRCLE_RADIUS_SCALE);
    expect(left.dashed).toBe(false);
    expect(left.fill).not.toBeNull();
  });

  it("draws an intensity-zero circle at the minimum radius with inactive styling", () => {
    const snap = influencerSnapshot();
    snap.influences = {
      left: { center_x: -1.8, center_y: 0.3, intensity: 0.0 },
      right: { center_x: 1.8, center_y: 0.3, intensity: 0.0 },
    };
    const ops = renderInfluencerView(snap, SCREEN);
    for (const side of ["circle-left", "circle-right"]) {
      const circle = byTag(ops, side)[0];
      if (circle.shape !== "circle") throw new Error("not a circle");
      expect(circle.r).toBe(MIN_CIRCLE_RADIUS);
      expect(circle.dashed).toBe(true);
      expect(circle.fill).toBeNull();
    }
  });

  it("renders a pole at +80 degrees nearly horizontal", () => {
    const theta = (80 * Math.PI) / 180;
    const ops = renderInfluencerView(influencerSnapshot({ theta }), SCREEN);
    const pole = byTag(ops, "pole")[0];
    if (pole.shape !== "line") throw new Error("not a line");
    const dx = Math.abs(pole.x2 - pole.x1);
    const dy = Math.abs(pole.y2 - pole.y1);
    expect(dy).toBeLessThan(0.2 * dx);
  });

  it("renders an upright pole nearly vertical", () => {
    const ops = renderInfluencerView(influencerSnapshot({ theta: 0.0 }), SCREEN);
    const pole = byTag(ops, "pole")[0];
    if (pole.shape !== "line") throw new Error("not a line");
    expect(Math.abs(pole.x2 - pole.x1)).toBeLessThan(1e-9);
  });
});

describe("coach view", () => {
  it("renders the cart green iff correctness says correct, over the golden set", () => {
    for (const entry of golden) {
      const ops = renderCoachView(entry.view, SCREEN);
      const cart = byTag(ops, "cart")[0];
      if (cart.shape !== "rect") throw new Error("not a rect");
      const want = entry.expect_cart === "green" ? CORRECT_GREEN : WRONG_RED;
      expect(cart.fill, entry.name).toBe(want);
      expect(cart.fill === CORRECT_GREEN, entry.name).toBe(entry.view.cart_correctness === "correct");
    }
  });

  it("never renders influence circles", () => {
    for (const entry of golden) {
      const ops = renderCoachView(entry.view, SCREEN);
      expect(ops.filter((op) => op.shape === "circle")).toHaveLength(0);
      expect(ops.filter((op) => op.tag.startsWith("circle"))).toHaveLength(0);
    }
  });

  it("raises the gate marker with progress: bottom at 0, leaving the top at 1", () => {
    const base = golden[0].view;
    const at = (progress: number) => {
      const view = { ...base, gate: { ...base.gate!, progress } };
      const gate = byTag(renderCoachView(view, SCREEN), "gate")[0];
      if (gate.shape !== "line") throw new Error("not a line");
      return gate.y1;
    };
    expect(at(0.0)).toBe(SCREEN.height);
    expect(at(0.5)).toBe(SCREEN.height / 2);
    expect(at(1.0)).toBe(0);
  });

  it("skips the gate marker between games and shows the score panel", () => {
    const view = { ...golden[0].view, gate: null, cart_correctness: null };
    const ops = renderCoachView(view, SCREEN);
    expect(byTag(ops, "gate")).toHaveLength(0);
    const panel = byTag(ops, "score-panel")[0];
    if (panel.shape !== "text") throw new Error("not text");
    expect(panel.text).toContain("score 0");
    expect(panel.text).toContain("best 0");
    expect(panel.text).toContain("level 1");
  });
});
