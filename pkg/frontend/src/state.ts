// Pure session state for the restoration explorer. Everything here is
// synchronous and deterministic so it can be unit-tested without a DOM or
// a network; the controller layers fetching on top.

import type { GapMarginal, WireToken } from "./api.js";

export type Slot =
  | { kind: "sign"; sign: number }
  | { kind: "gap" }
  | { kind: "committed"; sign: number };

export interface InputError {
  field: string;
  index: number;
  reason: "not_a_sign" | "out_of_vocabulary";
}

export interface ParsedInput {
  slots: Slot[];
  errors: InputError[];
}

/** Parse a free-text entry like "267 ? 342"; bad fields are reported,
 * never silently dropped or submitted. */
export function parseInput(text: string, vocabularySize: number): ParsedInput {
  const slots: Slot[] = [];
  const errors: InputError[] = [];
  const fields = text.split(/\s+/).filter((field) => field.length > 0);
  fields.forEach((field, index) => {
    if (field === "?") {
      slots.push({ kind: "gap" });
      return;
    }
    if (!/^\d+$/.test(field)) {
      errors.push({ field, index, reason: "not_a_sign" });
      return;
    }
    const sign = Number(field);
    if (sign < 1 || sign > vocabularySize) {
      errors.push({ field, index, reason: "out_of_vocabulary" });
      return;
    }
    slots.push({ kind: "sign", sign });
  });
  return { slots, errors };
}

export interface SessionState {
  slots: Slot[];
  errors: InputError[];
  committed: ReadonlyMap<number, number>;
  panels: GapMarginal[];
  score: number | null;
  undoStack: Snapshot[];
  redoStack: Snapshot[];
}

interface Snapshot {
  committed: ReadonlyMap<number, number>;
  panels: GapMarginal[];
  score: number | null;
}

export function emptySession(): SessionState {
  return {
    slots: [],
    errors: [],
    committed: new Map(),
    panels: [],
    score: null,
    undoStack: [],
    redoStack: [],
  };
}

/** Start a fresh text; commitments and history belong to the old text. */
export function withInput(state: SessionState, parsed: ParsedInput): SessionState {
  return {
    ...emptySession(),
    slots: parsed.slots,
    errors: parsed.errors,
  };
}

/** Positions of every gap slot (committed ones included). */
export function gapPositions(state: SessionState): number[] {
  const positions: number[] = [];
  state.slots.forEach((slot, index) => {
    if (slot.kind === "gap") positions.push(index);
  });
  return positions;
}

export function unresolvedPositions(state: SessionState): number[] {
  return gapPositions(state).filter((position) => !state.committed.has(position));
}

/** Tokens for the wire: fixed signs plus "?" at every gap position; the
 * committed map travels separately so the service does the conditioning. */
export function wireText(state: SessionState): WireToken[] {
  return state.slots.map((slot) =>
    slot.kind === "gap" ? "?" : slot.sign,
  );
}

export function wireCommitted(state: SessionState): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [position, sign] of state.committed) out[String(position)] = sign;
  return out;
}

/** The display text with commitments substituted and open gaps as "?". */
export function displayTokens(state: SessionState): (number | "?")[] {
  return state.slots.map((slot, index) => {
    if (slot.kind !== "gap") return slot.sign;
    const committed = state.committed.get(index);
    return committed === undefined ? "?" : committed;
  });
}

/** Best full completion: commitments win, open gaps take their top-ranked
 * candidate. Null until every open gap has a panel with candidates. */
export function bestCompletion(state: SessionState): number[] | null {
  const byPosition = new Map(state.panels.map((panel) => [panel.position, panel]));
  const tokens: number[] = [];
  for (const [index, slot] of state.slots.entries()) {
    if (slot.kind !== "gap") {
      tokens.push(slot.sign);
      continue;
    }
    const committed = state.committed.get(index);
    if (committed !== undefined) {
      tokens.push(committed);
      continue;
    }
    const top = byPosition.get(index)?.candidates[0];
    if (!top) return null;
    tokens.push(top.sign);
  }
  return tokens;
}

export function applyMarginals(state: SessionState, panels: GapMarginal[]): SessionState {
  return { ...state, panels };
}

export function applyScore(state: SessionState, score: number | null): SessionState {
  return { ...state, score };
}

function snapshot(state: SessionState): Snapshot {
  return { committed: state.committed, panels: state.panels, score: state.score };
}

/** Commit a candidate at a gap. Only signs from the gap's candidate list
 * are accepted; history records the pre-commit state for lossless undo. */
export function commitCandidate(
  state: SessionState,
  position: number,
  sign: number,
): SessionState {
  const slot = state.slots[position];
  if (!slot || slot.kind !== "gap" || state.committed.has(position)) {
    throw new Error(`position ${position} is not an open gap`);
  }
  const panel = state.panels.find((candidate) => candidate.position === position);
  if (!panel || !panel.candidates.some((candidate) => candidate.sign === sign)) {
    throw new Error(`sign ${sign} is not a listed candidate at position ${position}`);
  }
  const committed = new Map(state.committed);
  committed.set(position, sign);
  return {
    ...state,
    committed,
    undoStack: [...state.undoStack, snapshot(state)],
    redoStack: [],
  };
}

export function canUndo(state: SessionState): boolean {
  return state.undoStack.length > 0;
}

export function canRedo(state: SessionState): boolean {
  return state.redoStack.length > 0;
}

export function undo(state: SessionState): SessionState {
  const previous = state.undoStack[state.undoStack.length - 1];
  if (!previous) return state;
  return {
    ...state,
    committed: previous.committed,
    panels: previous.panels,
    score: previous.score,
    undoStack: state.undoStack.slice(0, -1),
    redoStack: [...state.redoStack, snapshot(state)],
  };
}

export function redo(state: SessionState): SessionState {
  const next = state.redoStack[state.redoStack.length - 1];
  if (!next) return state;
  return {
    ...state,
    committed: next.committed,
    panels: next.panels,
    score: next.score,
    undoStack: [...state.undoStack, snapshot(state)],
    redoStack: state.redoStack.slice(0, -1),
  };
}
