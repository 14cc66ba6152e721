// Browser entry: wire the drawing canvas, descriptor bars, path overlay,
// clearance readout and intention timeline to a live session.

import { SessionClient, subscribeState } from './client.js';
import {
  ViewModel, buildViewModel, emptyViewModel, updateIntentionHistory,
} from './render.js';
import { StrokeStreamer } from './stroke.js';
import { DEFAULT_VIEWPORT, canvasToWorkspace, metersToPixels, workspaceToCanvas } from './transform.js';
import { ObstacleSpec } from './types.js';

const viewport = DEFAULT_VIEWPORT;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const canvas = el<HTMLCanvasElement>('workspace');
  const ctx = canvas.getContext('2d')!;
  const bars = el<HTMLDivElement>('descriptor-bars');
  const clearanceOut = el<HTMLSpanElement>('clearance');
  const statusOut = el<HTMLSpanElement>('status');
  const timeline = el<HTMLDivElement>('intention-timeline');
  const zSlider = el<HTMLInputElement>('z-slider');
  const errorBanner = el<HTMLDivElement>('error-banner');

  const client = new SessionClient({
    baseUrl: (window as unknown as { FLOWCOOP_URL?: string }).FLOWCOOP_URL
      ?? 'http://127.0.0.1:8700',
    replanPeriodS: 2.0,
  });
  await client.open();

  const streamer = new StrokeStreamer(client, viewport);
  let model: ViewModel = emptyViewModel();
  let history: { seq: number; argmax: number }[] = [];
  let stroke: [number, number][] = [];
  let obstacles: ObstacleSpec[] = [];
  let drawing = false;

  function repaint(): void {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = '#888';
    ctx.strokeRect(0, 0, canvas.width, canvas.height);

    for (const obs of obstacles) {
      const [cx, cy] = workspaceToCanvas(viewport, obs.center);
      ctx.beginPath();
      ctx.fillStyle = 'rgba(200, 60, 60, 0.35)';
      ctx.arc(cx, cy, metersToPixels(viewport, obs.radius_m), 0, 2 * Math.PI);
      ctx.fill();
    }

    if (stroke.length > 1) {
      ctx.beginPath();
      ctx.strokeStyle = '#2266cc';
      ctx.lineWidth = 2;
      stroke.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
      ctx.stroke();
    }

    if (model.pathPx.length > 1) {
      ctx.beginPath();
      ctx.strokeStyle = '#22aa55';
      ctx.lineWidth = 3;
      model.pathPx.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
      ctx.stroke();
    }
  }

  function renderModel(): void {
    statusOut.textContent = model.status;
    bars.innerHTML = '';
    for (const bar of model.bars) {
      const div = document.createElement('div');
      div.className = `bar${bar.dominant ? ' dominant' : ''}`;
      div.style.height = `${Math.round(bar.fraction * 100)}%`;
      div.title = `cluster ${bar.index}: ${bar.fraction.toFixed(3)}`;
      bars.appendChild(div);
    }
    clearanceOut.textContent = model.clearanceMm === null
      ? 'n/a' : `${model.clearanceMm.toFixed(0)} mm`;
    clearanceOut.className = model.clearanceLevel;
    timeline.textContent = history
      .map((h) => `#${h.seq}: cluster ${h.argmax}`)
      .join(' → ');
    errorBanner.style.display = model.status === 'error' ? 'block' : 'none';
    repaint();
  }

  subscribeState(client, WebSocket as never, (msg) => {
    model = buildViewModel(viewport, msg, model);
    history = updateIntentionHistory(history, model);
    renderModel();
  }, () => {
    model = { ...model, status: 'error' };
    renderModel();
  });

  canvas.addEventListener('pointerdown', (ev) => {
    drawing = true;
    stroke = [];
    void handlePointer(ev);
  });
  canvas.addEventListener('pointermove', (ev) => {
    if (drawing) void handlePointer(ev);
  });
  window.addEventListener('pointerup', () => {
    drawing = false;
    void streamer.flush().catch(() => undefined);
  });

  async function handlePointer(ev: PointerEvent): Promise<void> {
    const rect = canvas.getBoundingClientRect();
    const px = ev.clientX - rect.left;
    const py = ev.clientY - rect.top;
    stroke.push([px, py]);
    const queued = streamer.offer({
      tMs: performance.now(),
      px,
      py,
      z: parseFloat(zSlider.value),
    });
    if (queued) {
      await streamer.flush().catch(() => undefined);
    }
    repaint();
  }

  canvas.addEventListener('contextmenu', (ev) => {
    // right click places an obstacle at the pointer, posted before the next re-plan
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    const center = canvasToWorkspace(
      viewport, ev.clientX - rect.left, ev.clientY - rect.top,
      parseFloat(zSlider.value));
    obstacles = [...obstacles, { center, radius_m: 0.05 }];
    void client.setObstacles(obstacles);
    repaint();
  });
}

void start();
