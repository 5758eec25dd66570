// Orbit camera for the model viewport. Dragging maps to azimuth and
// elevation around a target point; the result is expressed as the same
// pinhole camera type used for scene frames, so the projection and
// picking code is shared with the rest of the app.

import {
  Camera,
  Mat3,
  Vec3,
  cross,
  normalize,
  scale,
  sub,
  matVec,
} from './geometry.js';
import { Mesh, meshCenter, meshRadius } from './obj.js';

export type OrbitState = {
  azimuth: number; // radians around the model's vertical axis
  elevation: number; // radians above the horizon
  distance: number;
  target: Vec3;
};

export type ViewportSpec = {
  width: number;
  height: number;
  focal: number;
};

const MODEL_UP: Vec3 = [0, 1, 0];
const MAX_ELEVATION = 1.35; // keep away from the poles where the basis degenerates
const DRAG_RATE = 0.01; // radians per pixel

export function eyePosition(state: OrbitState): Vec3 {
  const ce = Math.cos(state.elevation);
  const offset: Vec3 = [
    Math.sin(state.azimuth) * ce,
    Math.sin(state.elevation),
    Math.cos(state.azimuth) * ce,
  ];
  return [
    state.target[0] + state.distance * offset[0],
    state.target[1] + state.distance * offset[1],
    state.target[2] + state.distance * offset[2],
  ];
}

/**
 * Pinhole camera looking from the orbit eye at the target, image y
 * pointing down. The rotation rows are the camera axes in model
 * coordinates, forming a proper rotation.
 */
export function orbitCamera(state: OrbitState, view: ViewportSpec): Camera {
  const eye = eyePosition(state);
  const z = normalize(sub(state.target, eye));
  const x = normalize(cross(z, MODEL_UP));
  const y = cross(z, x);
  const r: Mat3 = [x[0], x[1], x[2], y[0], y[1], y[2], z[0], z[1], z[2]];
  const t = scale(matVec(r, eye), -1);
  return {
    fx: view.focal,
    fy: view.focal,
    cx: view.width / 2,
    cy: view.height / 2,
    r,
    t,
    width: view.width,
    height: view.height,
  };
}

export function drag(state: OrbitState, dx: number, dy: number): OrbitState {
  const elevation = Math.min(
    MAX_ELEVATION,
    Math.max(-MAX_ELEVATION, state.elevation + dy * DRAG_RATE),
  );
  return { ...state, azimuth: state.azimuth + dx * DRAG_RATE, elevation };
}

export function zoom(state: OrbitState, factor: number): OrbitState {
  return { ...state, distance: Math.max(1e-3, state.distance * factor) };
}

/**
 * Initial orbit state that frames the whole mesh with some margin.
 * The distance is chosen so the bounding sphere fits the narrower
 * viewport axis.
 */
export function frameMesh(mesh: Mesh, view: ViewportSpec): OrbitState {
  const radius = Math.max(meshRadius(mesh), 1e-6);
  const halfExtent = Math.min(view.width, view.height) / 2;
  const distance = (1.25 * radius * view.focal) / halfExtent + radius;
  return {
    azimuth: 0.6,
    elevation: 0.4,
    distance,
    target: meshCenter(mesh),
  };
}
