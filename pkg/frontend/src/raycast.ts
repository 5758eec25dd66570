// Picking: turn a viewport click into a point on the model surface.

import {
  Camera,
  Vec3,
  add,
  cross,
  dot,
  matTVec,
  normalize,
  scale,
  sub,
  cameraCenter,
} from './geometry.js';
import { Mesh } from './obj.js';

export type Ray = {
  origin: Vec3;
  dir: Vec3;
};

export type SurfaceHit = {
  point: Vec3;
  triangle: number;
  distance: number;
};

/** Ray through a pixel, in the camera's world frame. */
export function pixelRay(cam: Camera, u: number, v: number): Ray {
  const dirCam: Vec3 = [(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1];
  return {
    origin: cameraCenter(cam),
    dir: normalize(matTVec(cam.r, dirCam)),
  };
}

const EPS = 1e-12;

/**
 * Moller-Trumbore ray/triangle intersection. Returns the ray parameter
 * of the hit or null. Both triangle sides count, the caller keeps the
 * nearest hit anyway.
 */
export function rayTriangle(ray: Ray, a: Vec3, b: Vec3, c: Vec3): number | null {
  const e1 = sub(b, a);
  const e2 = sub(c, a);
  const p = cross(ray.dir, e2);
  const det = dot(e1, p);
  if (Math.abs(det) < EPS) {
    return null; // ray parallel to the triangle plane
  }
  const inv = 1 / det;
  const s = sub(ray.origin, a);
  const u = dot(s, p) * inv;
  if (u < 0 || u > 1) {
    return null;
  }
  const q = cross(s, e1);
  const v = dot(ray.dir, q) * inv;
  if (v < 0 || u + v > 1) {
    return null;
  }
  const t = dot(e2, q) * inv;
  return t > EPS ? t : null;
}

/** Nearest surface point the ray hits, or null for a miss. */
export function pickSurface(mesh: Mesh, ray: Ray): SurfaceHit | null {
  let best: SurfaceHit | null = null;
  for (let i = 0; i < mesh.triangles.length; i++) {
    const [ia, ib, ic] = mesh.triangles[i];
    const t = rayTriangle(ray, mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]);
    if (t !== null && (best === null || t < best.distance)) {
      best = {
        point: add(ray.origin, scale(ray.dir, t)),
        triangle: i,
        distance: t,
      };
    }
  }
  return best;
}
