// Flat-shaded mesh painting on a 2d canvas context. A full rasterizer
// is overkill for an annotation tool; painter's algorithm with
// per-face depth sorting matches how the service renders its own
// previews and keeps the draw path trivially portable.

import {
  Camera,
  Pose,
  Vec2,
  Vec3,
  applyPose,
  cameraPoint,
  cross,
  dot,
  norm,
  normalize,
  sub,
} from './geometry.js';
import { Mesh } from './obj.js';

export type DrawStyle = {
  fill: string;
  outline?: string;
  // 0 disables shading, 1 is full lambert contrast
  shading?: number;
};

type FaceJob = {
  px: Vec2[];
  depth: number;
  lambert: number;
};

function shade(hex: string, k: number): string {
  const m = /^#?([0-9a-f]{6})$/i.exec(hex);
  if (!m) {
    return hex;
  }
  const v = parseInt(m[1], 16);
  const r = Math.round(((v >> 16) & 0xff) * k);
  const g = Math.round(((v >> 8) & 0xff) * k);
  const b = Math.round((v & 0xff) * k);
  return `rgb(${r},${g},${b})`;
}

/**
 * Project the mesh through an optional pose into the camera and return
 * paintable faces, far to near. Faces with any vertex at or behind the
 * camera plane are dropped.
 */
export function projectFaces(mesh: Mesh, pose: Pose | null, cam: Camera): FaceJob[] {
  const world: Vec3[] = pose
    ? mesh.vertices.map((v) => applyPose(pose, v))
    : mesh.vertices;
  const inCam = world.map((p) => cameraPoint(cam, p));
  const forward: Vec3 = [cam.r[6], cam.r[7], cam.r[8]];
  const jobs: FaceJob[] = [];
  for (const [a, b, c] of mesh.triangles) {
    const za = inCam[a][2];
    const zb = inCam[b][2];
    const zc = inCam[c][2];
    if (za <= 1e-6 || zb <= 1e-6 || zc <= 1e-6) {
      continue;
    }
    const n = cross(sub(world[b], world[a]), sub(world[c], world[a]));
    const len = norm(n);
    if (len < 1e-12) {
      continue;
    }
    const lambert = 0.45 + 0.55 * Math.abs(dot(normalize(n), forward));
    const px: Vec2[] = [a, b, c].map((i) => {
      const p = inCam[i];
      return [
        (cam.fx * p[0]) / p[2] + cam.cx,
        (cam.fy * p[1]) / p[2] + cam.cy,
      ] as Vec2;
    });
    jobs.push({ px, depth: (za + zb + zc) / 3, lambert });
  }
  jobs.sort((x, y) => y.depth - x.depth);
  return jobs;
}

export function drawMesh(
  ctx: CanvasRenderingContext2D,
  mesh: Mesh,
  pose: Pose | null,
  cam: Camera,
  style: DrawStyle,
): void {
  const shading = style.shading ?? 1;
  for (const job of projectFaces(mesh, pose, cam)) {
    const k = 1 - shading + shading * job.lambert;
    ctx.beginPath();
    ctx.moveTo(job.px[0][0], job.px[0][1]);
    ctx.lineTo(job.px[1][0], job.px[1][1]);
    ctx.lineTo(job.px[2][0], job.px[2][1]);
    ctx.closePath();
    ctx.fillStyle = shade(style.fill, k);
    ctx.fill();
    if (style.outline) {
      ctx.strokeStyle = shade(style.outline, k);
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }
}
