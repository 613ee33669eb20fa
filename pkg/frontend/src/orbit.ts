// Orbit camera state driven by pointer drags and wheel zoom.

export interface OrbitState {
  azimuth: number; // degrees, wrapped to [0, 360)
  elevation: number; // degrees, clamped so "up" never degenerates
  distance: number | null; // null = let the server frame the volume
}

export const DEFAULT_ORBIT: OrbitState = { azimuth: 45, elevation: 25, distance: null };

const ELEVATION_LIMIT = 89;

function wrap360(deg: number): number {
  const w = deg % 360;
  return w < 0 ? w + 360 : w;
}

export function applyDrag(
  state: OrbitState,
  dxPixels: number,
  dyPixels: number,
  degreesPerPixel = 0.4,
): OrbitState {
  if (dxPixels === 0 && dyPixels === 0) {
    return state;
  }
  const azimuth = wrap360(state.azimuth - dxPixels * degreesPerPixel);
  const elevation = Math.max(
    -ELEVATION_LIMIT,
    Math.min(ELEVATION_LIMIT, state.elevation + dyPixels * degreesPerPixel),
  );
  return { ...state, azimuth, elevation };
}

export function applyZoom(state: OrbitState, wheelDeltaY: number, baseDistance: number): OrbitState {
  const current = state.distance ?? baseDistance;
  const factor = Math.pow(1.1, wheelDeltaY / 100);
  const distance = Math.max(1, current * factor);
  return { ...state, distance };
}
