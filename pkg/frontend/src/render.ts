// Pure view-model construction from server state messages.
//
// Everything here is deterministic data-in data-out so the rendering rules
// can be unit tested without a DOM; console.ts applies the view model to
// actual elements.

import { StatePayload } from './types.js';
import { Viewport, workspaceToCanvas } from './transform.js';

export const CLEARANCE_WARN_MM = 100; // barrier threshold: below it, warn

export interface BarView {
  index: number;
  fraction: number;   // bar height in [0, 1]
  dominant: boolean;
}

export interface ViewModel {
  status: 'warming_up' | 'ok' | 'error';
  bars: BarView[];
  pathPx: [number, number][];   // projected end-effector path
  clearanceMm: number | null;
  clearanceLevel: 'none' | 'ok' | 'warning';
  seq: number;
  argmax: number | null;
}

export function descriptorBars(p: number[]): BarView[] {
  const top = p.indexOf(Math.max(...p));
  return p.map((v, i) => ({ index: i, fraction: v, dominant: i === top }));
}

export function clearanceLevel(mm: number | null): 'none' | 'ok' | 'warning' {
  if (mm === null || mm === undefined) return 'none';
  return mm < CLEARANCE_WARN_MM ? 'warning' : 'ok';
}

export function projectPath(v: Viewport, path: number[][]): [number, number][] {
  return path.map((pos) => workspaceToCanvas(v, pos));
}

export function isStateMessage(msg: unknown): msg is StatePayload {
  if (typeof msg !== 'object' || msg === null) return false;
  const m = msg as Record<string, unknown>;
  if (m.type !== 'state' || typeof m.seq !== 'number') return false;
  if (m.p !== null && !Array.isArray(m.p)) return false;
  if (m.path !== null && m.path !== undefined && !Array.isArray(m.path)) return false;
  return true;
}

/**
 * Build the next view model. A malformed message yields an error view that
 * keeps the previous model's content so the console never blanks out.
 */
export function buildViewModel(
  viewport: Viewport, msg: unknown, previous?: ViewModel,
): ViewModel {
  if (!isStateMessage(msg)) {
    return {
      ...(previous ?? emptyViewModel()),
      status: 'error',
    };
  }
  const p = msg.p ?? [];
  const bars = p.length ? descriptorBars(p) : previous?.bars ?? [];
  return {
    status: msg.status === 'ok' ? 'ok' : 'warming_up',
    bars,
    pathPx: msg.path ? projectPath(viewport, msg.path) : previous?.pathPx ?? [],
    clearanceMm: msg.clearance_mm,
    clearanceLevel: clearanceLevel(msg.clearance_mm),
    seq: msg.seq,
    argmax: p.length ? bars.findIndex((b) => b.dominant) : previous?.argmax ?? null,
  };
}

export function emptyViewModel(): ViewModel {
  return {
    status: 'warming_up',
    bars: [],
    pathPx: [],
    clearanceMm: null,
    clearanceLevel: 'none',
    seq: 0,
    argmax: null,
  };
}

/** Dominant-bar history: appended only when the argmax changes. */
export function updateIntentionHistory(
  history: { seq: number; argmax: number }[], model: ViewModel,
): { seq: number; argmax: number }[] {
  if (model.argmax === null) return history;
  const last = history[history.length - 1];
  if (last !== undefined && last.argmax === model.argmax) return history;
  return [...history, { seq: model.seq, argmax: model.argmax }];
}
