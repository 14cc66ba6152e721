// HTTP + websocket client for the session service.
//
// The console is a pure client: it only reads state and appends points or
// obstacles; closing it never mutates server-side sessions.

import {
  ObstacleSpec, OpenSessionResponse, StatePayload, StrokePoint,
} from './types.js';

export interface SessionClientOptions {
  baseUrl: string;               // e.g. http://127.0.0.1:8700
  replanPeriodS?: number;
  nSamples?: number;
  seed?: number;
}

export class SessionClient {
  readonly baseUrl: string;
  sessionId: string | null = null;
  descriptorDim = 0;
  private readonly openBody: Record<string, unknown>;

  constructor(opts: SessionClientOptions) {
    this.baseUrl = opts.baseUrl.replace(/\/$/, '');
    this.openBody = {
      replan_period_s: opts.replanPeriodS ?? 2.0,
      n_samples: opts.nSamples,
      seed: opts.seed ?? 0,
    };
  }

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async open(obstacles: ObstacleSpec[] = []): Promise<OpenSessionResponse> {
    const res = await fetch(this.url('/session'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ ...this.openBody, obstacles }),
    });
    if (!res.ok) throw new Error(`open failed: ${res.status}`);
    const body = (await res.json()) as OpenSessionResponse;
    this.sessionId = body.id;
    this.descriptorDim = body.k;
    return body;
  }

  private requireSession(): string {
    if (!this.sessionId) throw new Error('session not open');
    return this.sessionId;
  }

  async pushPoints(points: StrokePoint[]): Promise<number> {
    const id = this.requireSession();
    const res = await fetch(this.url(`/session/${id}/points`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ points }),
    });
    if (res.status === 409) {
      const detail = (await res.json()) as { detail: { accepted: number } };
      return detail.detail.accepted;
    }
    if (!res.ok) throw new Error(`push failed: ${res.status}`);
    const body = (await res.json()) as { accepted: number };
    return body.accepted;
  }

  async getState(): Promise<StatePayload> {
    const id = this.requireSession();
    const res = await fetch(this.url(`/session/${id}/state`));
    if (!res.ok) throw new Error(`state failed: ${res.status}`);
    return (await res.json()) as StatePayload;
  }

  async setObstacles(obstacles: ObstacleSpec[]): Promise<void> {
    const id = this.requireSession();
    const res = await fetch(this.url(`/session/${id}/obstacles`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ obstacles }),
    });
    if (!res.ok) throw new Error(`obstacles failed: ${res.status}`);
  }

  async close(): Promise<void> {
    const id = this.requireSession();
    await fetch(this.url(`/session/${id}`), { method: 'DELETE' });
    this.sessionId = null;
  }

  streamUrl(): string {
    const id = this.requireSession();
    return `${this.baseUrl.replace(/^http/, 'ws')}/session/${id}/stream`;
  }
}

/**
 * Subscribe to state snapshots; returns an unsubscribe function. Uses the
 * provided WebSocket constructor (browser global or the `ws` package).
 */
export function subscribeState(
  client: SessionClient,
  WebSocketCtor: new (url: string) => {
    onmessage: ((ev: { data: unknown }) => void) | null;
    onerror: ((ev: unknown) => void) | null;
    close(): void;
  },
  onState: (state: StatePayload) => void,
  onError?: (err: unknown) => void,
): () => void {
  const ws = new WebSocketCtor(client.streamUrl());
  ws.onmessage = (ev) => {
    try {
      onState(JSON.parse(String(ev.data)) as StatePayload);
    } catch (err) {
      onError?.(err);
    }
  };
  ws.onerror = (err) => onError?.(err);
  return () => ws.close();
}
