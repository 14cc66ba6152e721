// Viewport mapping between canvas pixels and workspace meters.
//
// The canvas shows a top-down view: canvas x maps to workspace y (left
// positive) and canvas y maps to workspace x (away from the robot base).
// Height comes from the z slider, not the canvas.

export interface Viewport {
  widthPx: number;
  heightPx: number;
  // workspace window shown by the canvas, meters
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export const DEFAULT_VIEWPORT: Viewport = {
  widthPx: 600,
  heightPx: 600,
  xMin: 0.1,
  xMax: 0.8,
  yMin: -0.35,
  yMax: 0.35,
};

export function checkViewport(v: Viewport): void {
  if (v.widthPx <= 0 || v.heightPx <= 0 || v.xMax <= v.xMin || v.yMax <= v.yMin) {
    throw new Error('viewport transform is not invertible');
  }
}

/** Canvas pixel -> workspace meters (z supplied by the slider). */
export function canvasToWorkspace(
  v: Viewport, px: number, py: number, z: number,
): number[] {
  checkViewport(v);
  const y = v.yMax - (px / v.widthPx) * (v.yMax - v.yMin);
  const x = v.xMin + (py / v.heightPx) * (v.xMax - v.xMin);
  return [x, y, z];
}

/** Workspace meters -> canvas pixel (drops z). */
export function workspaceToCanvas(v: Viewport, pos: number[]): [number, number] {
  checkViewport(v);
  const px = ((v.yMax - pos[1]) / (v.yMax - v.yMin)) * v.widthPx;
  const py = ((pos[0] - v.xMin) / (v.xMax - v.xMin)) * v.heightPx;
  return [px, py];
}

/** Meters -> pixels scale factor for radii (uses the x axis). */
export function metersToPixels(v: Viewport, meters: number): number {
  checkViewport(v);
  return (meters / (v.xMax - v.xMin)) * v.heightPx;
}
