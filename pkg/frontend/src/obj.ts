// Wavefront OBJ parsing and the mirror operation used by the flip
// toggle. Only vertices and faces matter here; the service emits plain
// "v x y z" and 1-based "f i j k" lines.

import { Vec3 } from './geometry.js';

export type Triangle = [number, number, number];

export type Mesh = {
  vertices: Vec3[];
  triangles: Triangle[];
};

export class ObjError extends Error {}

function parseIndex(tok: string, nVertices: number): number {
  // A face token may carry texture and normal indices, f v/vt/vn.
  const head = tok.split('/')[0];
  const idx = parseInt(head, 10);
  if (Number.isNaN(idx) || idx === 0) {
    throw new ObjError(`bad face index '${tok}'`);
  }
  // Negative indices count back from the end of the vertex list.
  const zeroBased = idx > 0 ? idx - 1 : nVertices + idx;
  if (zeroBased < 0 || zeroBased >= nVertices) {
    throw new ObjError(`face index ${idx} out of range for ${nVertices} vertices`);
  }
  return zeroBased;
}

export function parseObj(text: string): Mesh {
  const vertices: Vec3[] = [];
  const triangles: Triangle[] = [];
  for (const rawLine of text.split('\n')) {
    const line = rawLine.trim();
    if (line === '' || line.startsWith('#')) {
      continue;
    }
    const parts = line.split(/\s+/);
    const tag = parts[0];
    if (tag === 'v') {
      if (parts.length < 4) {
        throw new ObjError(`vertex line needs 3 coordinates: '${line}'`);
      }
      const v = parts.slice(1, 4).map(Number);
      if (v.some(Number.isNaN)) {
        throw new ObjError(`bad vertex line: '${line}'`);
      }
      vertices.push(v as Vec3);
    } else if (tag === 'f') {
      if (parts.length < 4) {
        throw new ObjError(`face line needs at least 3 indices: '${line}'`);
      }
      const idx = parts.slice(1).map((t) => parseIndex(t, vertices.length));
      // Fan triangulation keeps winding for convex polygons.
      for (let k = 1; k + 1 < idx.length; k++) {
        triangles.push([idx[0], idx[k], idx[k + 1]]);
      }
    }
    // vt, vn, usemtl and friends are ignored.
  }
  if (vertices.length === 0 || triangles.length === 0) {
    throw new ObjError('mesh has no geometry');
  }
  return { vertices, triangles };
}

/** Mirror a point across the model's x = 0 plane. */
export function mirrorX(p: Vec3): Vec3 {
  return [-p[0], p[1], p[2]];
}

/**
 * Mirrored copy of a mesh: x is negated and the triangle winding is
 * reversed so faces keep their orientation. This matches what the
 * solver does with a flipped correspondence set, so what the annotator
 * sees is what gets posed.
 */
export function flipMesh(mesh: Mesh): Mesh {
  return {
    vertices: mesh.vertices.map(mirrorX),
    triangles: mesh.triangles.map(([a, b, c]) => [a, c, b] as Triangle),
  };
}

export function meshBounds(mesh: Mesh): { min: Vec3; max: Vec3 } {
  const min: Vec3 = [Infinity, Infinity, Infinity];
  const max: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const v of mesh.vertices) {
    for (let i = 0; i < 3; i++) {
      if (v[i] < min[i]) min[i] = v[i];
      if (v[i] > max[i]) max[i] = v[i];
    }
  }
  return { min, max };
}

export function meshCenter(mesh: Mesh): Vec3 {
  const { min, max } = meshBounds(mesh);
  return [(min[0] + max[0]) / 2, (min[1] + max[1]) / 2, (min[2] + max[2]) / 2];
}

/** Radius of the bounding sphere around the bounds center. */
export function meshRadius(mesh: Mesh): number {
  const c = meshCenter(mesh);
  let r = 0;
  for (const v of mesh.vertices) {
    const d = Math.hypot(v[0] - c[0], v[1] - c[1], v[2] - c[2]);
    if (d > r) r = d;
  }
  return r;
}
