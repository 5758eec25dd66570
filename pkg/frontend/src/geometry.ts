// Pinhole camera and 9-DoF pose math.
//
// This must agree with the service to the last bit: a world point is
// R * (S ⊙ p) + T, a camera point is Rc * p_world + tc, and pixels are
// u = fx * x / z + cx, v = fy * y / z + cy with +z in front of the
// camera and +y pointing down in the image.

import { CameraFrameJson, PoseJson } from './types.js';

export type Vec2 = [number, number];
export type Vec3 = [number, number, number];
export type Mat3 = [
  number, number, number,
  number, number, number,
  number, number, number,
];

export type Pose = {
  t: Vec3;
  r: Mat3;
  s: Vec3;
};

export type Camera = {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  r: Mat3;
  t: Vec3;
  width: number;
  height: number;
};

export const IDENTITY: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, k: number): Vec3 {
  return [a[0] * k, a[1] * k, a[2] * k];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) {
    throw new Error('cannot normalize a zero vector');
  }
  return [a[0] / n, a[1] / n, a[2] / n];
}

export function matVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

/** Apply the transpose, which for a rotation is the inverse. */
export function matTVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[3] * v[1] + m[6] * v[2],
    m[1] * v[0] + m[4] * v[1] + m[7] * v[2],
    m[2] * v[0] + m[5] * v[1] + m[8] * v[2],
  ];
}

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array<number>(9);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[3 * i + j] =
        a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    }
  }
  return out as Mat3;
}

export function poseFromJson(p: PoseJson): Pose {
  if (p.R.length !== 9) {
    throw new Error(`pose rotation must have 9 values, got ${p.R.length}`);
  }
  return {
    t: [p.T[0], p.T[1], p.T[2]],
    r: p.R.slice() as Mat3,
    s: [p.S[0], p.S[1], p.S[2]],
  };
}

export function cameraFromJson(f: CameraFrameJson): Camera {
  const e = f.extrinsics;
  if (e.length !== 12) {
    throw new Error(`extrinsics must have 12 values, got ${e.length}`);
  }
  return {
    fx: f.intrinsics[0],
    fy: f.intrinsics[1],
    cx: f.intrinsics[2],
    cy: f.intrinsics[3],
    r: [e[0], e[1], e[2], e[4], e[5], e[6], e[8], e[9], e[10]],
    t: [e[3], e[7], e[11]],
    width: f.image_size[0],
    height: f.image_size[1],
  };
}

/** Model point to world coordinates through scale, rotation, translation. */
export function applyPose(pose: Pose, p: Vec3): Vec3 {
  const sp: Vec3 = [p[0] * pose.s[0], p[1] * pose.s[1], p[2] * pose.s[2]];
  return add(matVec(pose.r, sp), pose.t);
}

/** World point in the camera frame. */
export function cameraPoint(cam: Camera, pWorld: Vec3): Vec3 {
  return add(matVec(cam.r, pWorld), cam.t);
}

/**
 * Project a world point to pixel coordinates.
 *
 * Returns null for points at or behind the camera plane. The pixel may
 * fall outside the image bounds; callers decide what to do with that.
 */
export function projectPoint(cam: Camera, pWorld: Vec3): Vec2 | null {
  const pc = cameraPoint(cam, pWorld);
  if (pc[2] <= 0) {
    return null;
  }
  return [
    (cam.fx * pc[0]) / pc[2] + cam.cx,
    (cam.fy * pc[1]) / pc[2] + cam.cy,
  ];
}

/** Camera position in world coordinates, -R^T t. */
export function cameraCenter(cam: Camera): Vec3 {
  const c = matTVec(cam.r, cam.t);
  return [-c[0], -c[1], -c[2]];
}

/** Relative rotation angle between two rotations, in degrees. */
export function rotationAngleDeg(a: Mat3, b: Mat3): number {
  // trace(A B^T) = 1 + 2 cos(theta)
  let tr = 0;
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      tr += a[3 * i + j] * b[3 * i + j];
    }
  }
  const c = Math.min(1, Math.max(-1, (tr - 1) / 2));
  return (Math.acos(c) * 180) / Math.PI;
}
