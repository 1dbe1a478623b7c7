/**
 * Strict wire schemas for the session socket, client side.
 *
 * Every inbound frame is validated field-for-field before anything renders.
 * Unknown fields are rejected, which is what makes the role separation
 * testable: a coach frame smuggling circle data, or an influencer frame
 * smuggling score data, fails validation here instead of quietly drawing.
 */
import { z, ZodError } from "zod";

export const PROTOCOL_VERSION = 1;

// --- client to server ------------------------------------------------------

export type CommandOp =
  | "grow"
  | "shrink"
  | "move_left"
  | "move_right"
  | "move_up"
  | "move_down";

export type CircleSide = "left" | "right";

export const COMMAND_OPS: readonly CommandOp[] = [
  "grow",
  "shrink",
  "move_left",
  "move_right",
  "move_up",
  "move_down",
];

export type ClientMessage =
  | { type: "command"; op: CommandOp; circle: CircleSide }
  | { type: "pause" }
  | { type: "resume" };

export function commandMessage(op: CommandOp, circle: CircleSide): ClientMessage {
  return { type: "command", op, circle };
}

export function pauseMessage(): ClientMessage {
  return { type: "pause" };
}

export function resumeMessage(): ClientMessage {
  return { type: "resume" };
}

// --- server to client ------------------------------------------------------

const Influence = z
  .object({
    center_x: z.number(),
    center_y: z.number(),
    intensity: z.number(),
  })
  .strict();

const Influences = z.object({ left: Influence, right: Influence }).strict();

export const InfluencerViewSchema = z
  .object({
    kind: z.literal("influencer_view"),
    x: z.number(),
    theta: z.number(),
    level: z.number().int(),
    influences: Influences,
  })
  .strict();

const Gate = z
  .object({
    color: z.enum(["blue", "red"]),
    line_x: z.number(),
    progress: z.number(),
  })
  .strict();

export const CoachViewSchema = z
  .object({
    kind: z.literal("coach_view"),
    x: z.number(),
    x_dot: z.number(),
    theta: z.number(),
    theta_dot: z.number(),
    level: z.number().int(),
    score: z.number().int(),
    best: z.number().int(),
    gate: Gate.nullable(),
    cart_correctness: z.enum(["correct", "incorrect"]).nullable(),
  })
  .strict();

const EventSchema = z
  .object({
    event: z.string(),
    cause: z.string().nullable(),
    level: z.number().int().nullable(),
  })
  .strict();

const AckSchema = z
  .object({
    seq: z.number().int().nullable(),
    effective_tick: z.number().int(),
    role: z.string().nullable(),
  })
  .strict();

const ErrorSchema = z
  .object({
    code: z.string(),
    message: z.string(),
    field: z.string().nullable(),
  })
  .strict();

export type InfluencerViewPayload = z.infer<typeof InfluencerViewSchema>;
export type CoachViewPayload = z.infer<typeof CoachViewSchema>;
export type ViewPayload = InfluencerViewPayload | CoachViewPayload;
export type EventPayload = z.infer<typeof EventSchema>;
export type AckPayload = z.infer<typeof AckSchema>;
export type ErrorPayload = z.infer<typeof ErrorSchema>;

export type ServerFrame =
  | { v: 1; type: "view"; tick: number; payload: ViewPayload }
  | { v: 1; type: "event"; tick: number; payload: EventPayload }
  | { v: 1; type: "ack"; tick: number; payload: AckPayload }
  | { v: 1; type: "error"; tick: number; payload: ErrorPayload };

// The envelope is parsed first so payload dispatch can follow type/kind, the
// same two-stage shape the server uses for our messages.
const Envelope = z
  .object({
    v: z.number().int(),
    type: z.enum(["view", "event", "ack", "error"]),
    tick: z.number().int(),
    payload: z.record(z.unknown()),
  })
  .strict();

export class WireError extends Error {
  readonly field: string | null;

  constructor(message: string, field: string | null = null) {
    super(message);
    this.name = "WireError";
    this.field = field;
  }
}

function offendingField(error: ZodError): string | null {
  for (const issue of error.issues) {
    // An injected extra key is the interesting name, not its parent object.
    if (issue.code === "unrecognized_keys" && issue.keys.length > 0) {
      return issue.keys[0];
    }
    const named = issue.path.filter((part): part is string => typeof part === "string");
    if (named.length > 0) {
      return named[named.length - 1];
    }
  }
  return null;
}

export function parseServerFrame(text: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new WireError("frame is not valid JSON");
  }
  const env = Envelope.safeParse(doc);
  if (!env.success) {
    const field = offendingField(env.error);
    throw new WireError(`invalid envelope field '${field ?? "?"}'`, field);
  }
  if (env.data.v !== PROTOCOL_VERSION) {
    throw new WireError(`protocol version ${env.data.v} not supported`, "v");
  }

  const { type, tick, payload } = env.data;
  let checked;
  if (type === "view") {
    const kind = payload["kind"];
    if (kind === "influencer_view") {
      checked = InfluencerViewSchema.safeParse(payload);
    } else if (kind === "coach_view") {
      checked = CoachViewSchema.safeParse(payload);
    } else {
      throw new WireError(`unknown view kind '${String(kind)}'`, "kind");
    }
  } else if (type === "event") {
    checked = EventSchema.safeParse(payload);
  } else if (type === "ack") {
    checked = AckSchema.safeParse(payload);
  } else {
    checked = ErrorSchema.safeParse(payload);
  }
  if (!checked.success) {
    const field = offendingField(checked.error);
    throw new WireError(`invalid payload field '${field ?? "?"}'`, field);
  }
  return { v: 1, type, tick, payload: checked.data } as ServerFrame;
}
