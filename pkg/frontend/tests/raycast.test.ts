import { describe, expect, it } from 'vitest';
import { projectPoint } from '../src/geometry.js';
import { parseObj } from '../src/obj.js';
import { drag, frameMesh, orbitCamera, zoom } from '../src/orbit.js';
import { pickSurface, pixelRay, rayTriangle } from '../src/raycast.js';
import { projectFaces } from '../src/viewport.js';
import { meshEdges } from '../src/wireframe.js';

const VIEW = { width: 400, height: 300, focal: 350 };

// a unit cube centered at the origin, quads fan-triangulated
const CUBE = parseObj(`
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 -0.5 0.5
v -0.5 -0.5 0.5
v -0.5 0.5 -0.5
v 0.5 0.5 -0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
f 1 2 3 4
f 8 7 6 5
f 1 5 6 2
f 2 6 7 3
f 3 7 8 4
f 4 8 5 1
`);

describe('rayTriangle', () => {
  const a: [number, number, number] = [0, 0, 5];
  const b: [number, number, number] = [1, 0, 5];
  const c: [number, number, number] = [0, 1, 5];

  it('hits inside the triangle with the right distance', () => {
    const t = rayTriangle({ origin: [0.2, 0.2, 0], dir: [0, 0, 1] }, a, b, c);
    expect(t).toBeCloseTo(5, 12);
  });

  it('misses outside the edges', () => {
    expect(rayTriangle({ origin: [0.8, 0.8, 0], dir: [0, 0, 1] }, a, b, c)).toBeNull();
    expect(rayTriangle({ origin: [-0.1, 0.2, 0], dir: [0, 0, 1] }, a, b, c)).toBeNull();
  });

  it('ignores hits behind the origin', () => {
    expect(rayTriangle({ origin: [0.2, 0.2, 6], dir: [0, 0, 1] }, a, b, c)).toBeNull();
  });

  it('hits back faces too', () => {
    // winding reversed relative to the ray
    expect(rayTriangle({ origin: [0.2, 0.2, 0], dir: [0, 0, 1] }, a, c, b)).toBeCloseTo(5, 12);
  });
});

describe('pickSurface', () => {
  it('returns the nearest of stacked triangles', () => {
    const mesh = parseObj(`
v 0 0 3
v 1 0 3
v 0 1 3
v 0 0 7
v 1 0 7
v 0 1 7
f 1 2 3
f 4 5 6
`);
    const hit = pickSurface(mesh, { origin: [0.2, 0.2, 0], dir: [0, 0, 1] });
    expect(hit).not.toBeNull();
    expect(hit!.triangle).toBe(0);
    expect(hit!.point[2]).toBeCloseTo(3, 12);
  });

  it('misses cleanly', () => {
    expect(pickSurface(CUBE, { origin: [5, 5, -5], dir: [0, 0, 1] })).toBeNull();
  });
});

describe('orbit camera', () => {
  it('frames the whole mesh inside the viewport', () => {
    const state = frameMesh(CUBE, VIEW);
    const cam = orbitCamera(state, VIEW);
    for (const v of CUBE.vertices) {
      const px = projectPoint(cam, v);
      expect(px).not.toBeNull();
      expect(px![0]).toBeGreaterThanOrEqual(0);
      expect(px![0]).toBeLessThanOrEqual(VIEW.width);
      expect(px![1]).toBeGreaterThanOrEqual(0);
      expect(px![1]).toBeLessThanOrEqual(VIEW.height);
    }
  });

  it('keeps the target at the principal point', () => {
    const state = frameMesh(CUBE, VIEW);
    const px = projectPoint(orbitCamera(state, VIEW), state.target);
    expect(px![0]).toBeCloseTo(VIEW.width / 2, 6);
    expect(px![1]).toBeCloseTo(VIEW.height / 2, 6);
  });

  it('is a proper rotation at any drag position', () => {
    let state = frameMesh(CUBE, VIEW);
    state = drag(state, 123, -45);
    const { r } = orbitCamera(state, VIEW);
    // det(R) = 1 for a proper rotation
    const det =
      r[0] * (r[4] * r[8] - r[5] * r[7]) -
      r[1] * (r[3] * r[8] - r[5] * r[6]) +
      r[2] * (r[3] * r[7] - r[4] * r[6]);
    expect(det).toBeCloseTo(1, 9);
  });

  it('maps drag to azimuth and clamps elevation', () => {
    let state = frameMesh(CUBE, VIEW);
    const a0 = state.azimuth;
    state = drag(state, 50, 0);
    expect(state.azimuth).toBeGreaterThan(a0);
    for (let i = 0; i < 100; i++) {
      state = drag(state, 0, 1000);
    }
    expect(state.elevation).toBeLessThanOrEqual(1.35);
    expect(orbitCamera(state, VIEW)).toBeDefined();
  });

  it('zoom shortens and lengthens the distance', () => {
    const state = frameMesh(CUBE, VIEW);
    expect(zoom(state, 0.5).distance).toBeCloseTo(state.distance / 2, 12);
    expect(zoom(state, 2).distance).toBeCloseTo(state.distance * 2, 12);
  });

  it('click in the viewport picks the facing surface', () => {
    const state = frameMesh(CUBE, VIEW);
    const cam = orbitCamera(state, VIEW);
    const ray = pixelRay(cam, VIEW.width / 2, VIEW.height / 2);
    const hit = pickSurface(CUBE, ray);
    expect(hit).not.toBeNull();
    // the hit must sit on the cube surface
    const onSurface = hit!.point.some((c) => Math.abs(Math.abs(c) - 0.5) < 1e-9);
    expect(onSurface).toBe(true);
    // and re-projecting it lands back on the clicked pixel
    const px = projectPoint(cam, hit!.point);
    expect(px![0]).toBeCloseTo(VIEW.width / 2, 6);
    expect(px![1]).toBeCloseTo(VIEW.height / 2, 6);
  });
});

describe('viewport faces and wireframe', () => {
  it('culls faces behind the camera and sorts far to near', () => {
    const state = frameMesh(CUBE, VIEW);
    const cam = orbitCamera(state, VIEW);
    const jobs = projectFaces(CUBE, null, cam);
    expect(jobs.length).toBeGreaterThan(0);
    expect(jobs.length).toBeLessThanOrEqual(CUBE.triangles.length);
    for (let i = 1; i < jobs.length; i++) {
      expect(jobs[i - 1].depth).toBeGreaterThanOrEqual(jobs[i].depth);
    }
  });

  it('a cube has 18 unique edges after fan triangulation', () => {
    // 12 box edges plus one diagonal per face
    expect(meshEdges(CUBE).length).toBe(18);
  });
});
