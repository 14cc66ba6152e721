// Wire types matching the session service's JSON schema.

export interface StatePayload {
  type: 'state';
  status: 'warming_up' | 'ok';
  p: number[] | null;
  path: number[][] | null;      // combined end-effector path, meters
  joints: number[][] | null;    // combined joint path, radians
  clearance_mm: number | null;
  seq: number;
  n_points?: number;
}

export interface StrokePoint {
  t: number;        // seconds, strictly increasing per session
  x: number[];      // workspace position, meters
}

export interface ObstacleSpec {
  center: number[];
  radius_m: number;
}

export interface OpenSessionResponse {
  id: string;
  k: number;        // number of flow models / descriptor dimension
}

export interface CanvasSample {
  tMs: number;      // wall-clock milliseconds
  px: number;       // canvas x, pixels
  py: number;       // canvas y, pixels
  z: number;        // workspace height from the slider, meters
}
