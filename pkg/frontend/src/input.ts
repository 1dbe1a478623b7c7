/**
 * Turns key events into wire messages.
 *
 * Held command keys repeat at a fixed client-side rate so holding "grow"
 * keeps growing; the tick clock is passed in (the browser feeds animation
 * frame timestamps, tests feed numbers) so the repeat cadence is exact and
 * testable. The pause key toggles: it sends pause or resume depending on
 * what the server last told us. Everything this module can ever emit is a
 * command, a pause or a resume; there is no other vocabulary.
 */
import {
  commandMessage,
  pauseMessage,
  resumeMessage,
  type CircleSide,
  type ClientMessage,
  type CommandOp,
} from "./schema.js";
import type { KeyBindings } from "./bindings.js";

export const REPEATS_PER_SECOND = 10;

interface HeldKey {
  op: CommandOp;
  circle: CircleSide; // pinned at press time; reselection affects the next press
  nextAt: number;
}

export class InputLoop {
  private readonly bindings: KeyBindings;
  private readonly send: (message: ClientMessage) => void;
  private readonly isPaused: () => boolean;
  private readonly periodMs = 1000 / REPEATS_PER_SECOND;
  private readonly down = new Set<string>();
  private readonly held = new Map<string, HeldKey>();
  private selected: CircleSide = "left";

  constructor(
    bindings: KeyBindings,
    send: (message: ClientMessage) => void,
    isPaused: () => boolean,
  ) {
    this.bindings = bindings;
    this.send = send;
    this.isPaused = isPaused;
  }

  get selectedCircle(): CircleSide {
    return this.selected;
  }

  keyDown(key: string, now: number): void {
    if (this.down.has(key)) return; // browser auto-repeat; we do our own
    this.down.add(key);
    const action = this.bindings.get(key);
    if (action === undefined) return;
    switch (action.kind) {
      case "select":
        this.selected = this.selected === "left" ? "right" : "left";
        return;
      case "pause":
        this.send(this.isPaused() ? resumeMessage() : pauseMessage());
        return;
      case "op":
        this.send(commandMessage(action.op, this.selected));
        this.held.set(key, { op: action.op, circle: this.selected, nextAt: now + this.periodMs });
        return;
    }
  }

  keyUp(key: string): void {
    this.down.delete(key);
    this.held.delete(key);
  }

  /** Emit repeats that came due; call once per animation frame. */
  tick(now: number): void {
    for (const entry of this.held.values()) {
      if (now >= entry.nextAt) {
        this.send(commandMessage(entry.op, entry.circle));
        entry.nextAt = now + this.periodMs;
      }
    }
  }
}
