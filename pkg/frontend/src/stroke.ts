// Stroke capture: throttle pointer samples to the service sample rate,
// map them into workspace coordinates, and post them in order.
//
// Points survive transient network failures in a FIFO buffer, so the
// monotone-timestamp contract is preserved across retries.

import { SessionClient } from './client.js';
import { CanvasSample, StrokePoint } from './types.js';
import { Viewport, canvasToWorkspace } from './transform.js';

export interface StrokeStreamerOptions {
  sampleRateHz?: number;   // default 10
  maxRetries?: number;
}

export class StrokeStreamer {
  readonly sampleRateHz: number;
  private readonly client: SessionClient;
  private readonly viewport: Viewport;
  private readonly maxRetries: number;
  private pending: StrokePoint[] = [];
  private lastAcceptedT = -Infinity;
  private lastSampleMs = -Infinity;
  private t0Ms: number | null = null;
  sent = 0;

  constructor(client: SessionClient, viewport: Viewport,
              opts: StrokeStreamerOptions = {}) {
    this.client = client;
    this.viewport = viewport;
    this.sampleRateHz = opts.sampleRateHz ?? 10;
    this.maxRetries = opts.maxRetries ?? 3;
  }

  /**
   * Offer a raw pointer sample. Returns the queued stroke point when the
   * sample passes the rate throttle, null when it is dropped. An idle pen
   * (no samples offered) sends nothing.
   */
  offer(sample: CanvasSample): StrokePoint | null {
    const minGapMs = 1000 / this.sampleRateHz;
    if (sample.tMs - this.lastSampleMs < minGapMs - 1e-9) {
      return null;
    }
    this.lastSampleMs = sample.tMs;
    if (this.t0Ms === null) this.t0Ms = sample.tMs;
    const t = (sample.tMs - this.t0Ms) / 1000;
    if (t <= this.lastAcceptedT) return null;
    this.lastAcceptedT = t;
    const point: StrokePoint = {
      t,
      x: canvasToWorkspace(this.viewport, sample.px, sample.py, sample.z),
    };
    this.pending.push(point);
    return point;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  /** Post everything queued, in order; retries keep the buffer intact. */
  async flush(): Promise<number> {
    if (this.pending.length === 0) return 0;
    let lastError: unknown = null;
    for (let attempt = 0; attempt <= this.maxRetries; attempt += 1) {
      const batch = this.pending;
      try {
        const accepted = await this.client.pushPoints(batch);
        this.pending = batch.slice(accepted);
        this.sent += accepted;
        if (this.pending.length === 0) return accepted;
        lastError = new Error(`partial acceptance: ${accepted}/${batch.length}`);
      } catch (err) {
        lastError = err;   // network failure: buffer untouched, retry
      }
    }
    throw lastError;
  }
}
