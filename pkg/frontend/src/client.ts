/**
 * Connection-side state. Holds exactly what arrived over the socket; the
 * renderers read the latest snapshot from here and nothing simulates
 * locally, so a reconnect picks up cleanly at the next server frame.
 */
import { parseServerFrame, WireError, type ViewPayload } from "./schema.js";

export type Phase = "connecting" | "live" | "closed";

export class ClientState {
  phase: Phase = "connecting";
  role: string | null = null;
  lastAckTick = 0;
  snapshot: ViewPayload | null = null;
  snapshotTick = 0;
  paused = false;
  banner: string | null = null;
  lastEvent: string | null = null;

  socketOpened(): void {
    this.phase = "live";
    this.banner = null;
  }

  socketClosed(): void {
    this.phase = "closed";
  }

  /**
   * Feed one raw frame. A frame that fails validation never touches the
   * snapshot; it raises the banner instead, which is the protocol-leak
   * canary the tests fire on purpose.
   */
  onMessage(text: string): void {
    let frame;
    try {
      frame = parseServerFrame(text);
    } catch (err) {
      if (err instanceof WireError) {
        this.banner = `rejected server frame: ${err.message}`;
        return;
      }
      throw err;
    }
    switch (frame.type) {
      case "view":
        this.snapshot = frame.payload;
        this.snapshotTick = frame.tick;
        return;
      case "ack":
        this.lastAckTick = frame.payload.effective_tick;
        if (frame.payload.role !== null) this.role = frame.payload.role;
        return;
      case "event":
        this.lastEvent = frame.payload.event;
        if (frame.payload.event === "paused") this.paused = true;
        if (frame.payload.event === "resumed") this.paused = false;
        return;
      case "error":
        this.banner = `${frame.payload.code}: ${frame.payload.message}`;
        return;
    }
  }
}

/** Session id and seat requested through the page URL. */
export function sessionFromQuery(search: string): { session: string; role: string | null } {
  const params = new URLSearchParams(search);
  return {
    session: params.get("session") ?? "default",
    role: params.get("role"),
  };
}

export function socketUrl(origin: string, session: string, role: string | null): string {
  const base = origin.replace(/^http/, "ws");
  const id = encodeURIComponent(session);
  if (role === "observer") return `${base}/session/${id}/watch`;
  if (role === null) return `${base}/session/${id}/join`;
  return `${base}/session/${id}/join?role=${encodeURIComponent(role)}`;
}
