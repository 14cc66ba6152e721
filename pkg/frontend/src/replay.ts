// Replay a recorded stroke (list of timed workspace points) against a live
// session, at the pace the recording implies or as fast as possible.

import { SessionClient } from './client.js';
import { StatePayload, StrokePoint } from './types.js';

export interface ReplayResult {
  pushed: number;
  finalState: StatePayload;
}

export async function replayStroke(
  client: SessionClient, points: StrokePoint[],
  opts: { chunk?: number } = {},
): Promise<ReplayResult> {
  const chunk = opts.chunk ?? 5;
  let pushed = 0;
  for (let i = 0; i < points.length; i += chunk) {
    pushed += await client.pushPoints(points.slice(i, i + chunk));
  }
  return { pushed, finalState: await client.getState() };
}

/** Poll until a state with seq >= minSeq arrives (or time runs out). */
export async function waitForSeq(
  client: SessionClient, minSeq: number, timeoutMs = 20000,
): Promise<StatePayload> {
  const deadline = Date.now() + timeoutMs;
  let state = await client.getState();
  while (state.seq < minSeq) {
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for seq ${minSeq} (at ${state.seq})`);
    }
    await new Promise((r) => setTimeout(r, 100));
    state = await client.getState();
  }
  return state;
}
