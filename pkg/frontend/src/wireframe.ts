// Wireframe overlay: the model's unique edges projected into a scene
// camera with a solved pose. The verification view draws these over
// the video frames.

import { Camera, Pose, Vec2, applyPose, projectPoint } from './geometry.js';
import { Mesh } from './obj.js';

export type Segment = {
  a: Vec2;
  b: Vec2;
};

/** Unique undirected edges of the mesh, as sorted vertex index pairs. */
export function meshEdges(mesh: Mesh): Array<[number, number]> {
  const seen = new Set<number>();
  const edges: Array<[number, number]> = [];
  const n = mesh.vertices.length;
  for (const [a, b, c] of mesh.triangles) {
    for (const [i, j] of [[a, b], [b, c], [c, a]] as Array<[number, number]>) {
      const lo = Math.min(i, j);
      const hi = Math.max(i, j);
      const key = lo * n + hi;
      if (!seen.has(key)) {
        seen.add(key);
        edges.push([lo, hi]);
      }
    }
  }
  return edges;
}

/**
 * Project the mesh wireframe through a pose into a camera. Edges with
 * an endpoint behind the camera are dropped rather than clipped; for
 * verification overlays that is good enough.
 */
export function projectedSegments(mesh: Mesh, pose: Pose, cam: Camera): Segment[] {
  const pixels: Array<Vec2 | null> = mesh.vertices.map((v) =>
    projectPoint(cam, applyPose(pose, v)),
  );
  const out: Segment[] = [];
  for (const [i, j] of meshEdges(mesh)) {
    const a = pixels[i];
    const b = pixels[j];
    if (a !== null && b !== null) {
      out.push({ a, b });
    }
  }
  return out;
}
