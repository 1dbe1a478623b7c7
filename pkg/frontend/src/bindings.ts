/**
 * Keyboard layout: which key emits which circle command.
 *
 * Bindings stay abstract (an op, not an op+circle) because the influencer
 * works on one selected circle at a time and flips the selection with a
 * dedicated key. Validation guarantees the whole command surface is
 * reachable and that no key means two things.
 */
import { COMMAND_OPS, type CommandOp } from "./schema.js";

export type BoundAction =
  | { kind: "op"; op: CommandOp }
  | { kind: "select" }
  | { kind: "pause" };

export type KeyBindings = ReadonlyMap<string, BoundAction>;

export function defaultBindings(): KeyBindings {
  return new Map<string, BoundAction>([
    ["ArrowLeft", { kind: "op", op: "move_left" }],
    ["ArrowRight", { kind: "op", op: "move_right" }],
    ["ArrowUp", { kind: "op", op: "move_up" }],
    ["ArrowDown", { kind: "op", op: "move_down" }],
    ["+", { kind: "op", op: "grow" }],
    ["-", { kind: "op", op: "shrink" }],
    ["Tab", { kind: "select" }],
    [" ", { kind: "pause" }],
  ]);
}

/** Returns the problems with a layout; an empty list means it is usable. */
export function validateBindings(bindings: KeyBindings): string[] {
  const problems: string[] = [];
  const boundOps = new Set<CommandOp>();
  let hasSelect = false;
  let hasPause = false;
  for (const action of bindings.values()) {
    if (action.kind === "op") boundOps.add(action.op);
    if (action.kind === "select") hasSelect = true;
    if (action.kind === "pause") hasPause = true;
  }
  for (const op of COMMAND_OPS) {
    if (!boundOps.has(op)) problems.push(`command '${op}' is unreachable`);
  }
  if (!hasSelect) problems.push("no key selects the other circle");
  if (!hasPause) problems.push("no key pauses");
  return problems;
}

/**
 * Maps never hold duplicate keys, so duplicates can only appear in the raw
 * pair list a custom layout is built from. Build through here to catch them.
 */
export function bindingsFromPairs(pairs: readonly (readonly [string, BoundAction])[]): KeyBindings {
  const seen = new Set<string>();
  for (const [key] of pairs) {
    if (seen.has(key)) throw new Error(`key '${key}' is bound twice`);
    seen.add(key);
  }
  const bindings = new Map(pairs.map(([k, a]) => [k, a] as [string, BoundAction]));
  const problems = validateBindings(bindings);
  if (problems.length > 0) throw new Error(problems.join("; "));
  return bindings;
}
