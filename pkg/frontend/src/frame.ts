// Engine frame (right-handed, +Z up) <-> renderer frame (three.js, +Y up).
// This is the single place where the conversion happens; everything above
// the renderer speaks engine coordinates, everything below speaks three's.

import type { Vec3 } from "./types.js";

/** Engine position (x, y, z-up) to renderer position (x, y-up, z). */
export function enginePosToRender(p: Vec3): Vec3 {
  return [p[0], p[2], -p[1]];
}

/** Renderer position back to engine position. */
export function renderPosToEngine(p: Vec3): Vec3 {
  return [p[0], -p[2], p[1]];
}

/** Engine yaw (about +Z) equals renderer rotation about +Y under this mapping. */
export function engineYawToRender(yaw: number): number {
  return yaw;
}

/** Box full sizes: engine (sx, sy, sz-up) to renderer (sx, sy-up, sz). */
export function engineSizeToRender(size: Vec3): Vec3 {
  return [size[0], size[2], size[1]];
}

/** Ground-plane drag delta in renderer coords (dx, dz) to engine (dx, dy). */
export function renderGroundDeltaToEngine(dx: number, dz: number): [number, number] {
  return [dx, -dz];
}
