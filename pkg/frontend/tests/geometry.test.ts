// Golden-file agreement between the browser projection math and the
// service. The fixtures were produced by the service's own projection
// code; see scripts/make_projection_fixtures.py.

import { readFileSync, readdirSync } from 'node:fs';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';
import {
  Camera,
  Mat3,
  applyPose,
  cameraCenter,
  cameraFromJson,
  cameraPoint,
  poseFromJson,
  projectPoint,
  rotationAngleDeg,
} from '../src/geometry.js';
import { mirrorX } from '../src/obj.js';
import { CameraFrameJson, PoseJson } from '../src/types.js';

const FIXTURE_DIR = join(fileURLToPath(new URL('.', import.meta.url)), 'fixtures');
const MAX_ERR_PX = 0.5;

type ProjectionFixture = {
  name: string;
  flipped: boolean;
  vertices: Array<[number, number, number]>;
  pose: PoseJson;
  frames: CameraFrameJson[];
  expected: Array<Array<[number, number] | null>>;
};

function loadFixtures(): ProjectionFixture[] {
  return readdirSync(FIXTURE_DIR)
    .filter((f) => f.startsWith('projection_') && f.endsWith('.json'))
    .sort()
    .map((f) => JSON.parse(readFileSync(join(FIXTURE_DIR, f), 'utf-8')));
}

describe('projection golden files', () => {
  const fixtures = loadFixtures();

  it('found the three fixture scenes', () => {
    expect(fixtures.length).toBe(3);
  });

  for (const fx of loadFixtures()) {
    it(`matches the service within ${MAX_ERR_PX}px on ${fx.name}`, () => {
      const pose = poseFromJson(fx.pose);
      let worst = 0;
      let checked = 0;
      fx.frames.forEach((frameJson, fi) => {
        const cam = cameraFromJson(frameJson);
        fx.vertices.forEach((v, vi) => {
          const p = fx.flipped ? mirrorX(v) : v;
          const got = projectPoint(cam, applyPose(pose, p));
          const want = fx.expected[fi][vi];
          if (want === null) {
            expect(got, `vertex ${vi} frame ${fi} should be behind the camera`).toBeNull();
            return;
          }
          expect(got, `vertex ${vi} frame ${fi} should project`).not.toBeNull();
          const err = Math.hypot(got![0] - want[0], got![1] - want[1]);
          worst = Math.max(worst, err);
          checked += 1;
        });
      });
      expect(checked).toBeGreaterThan(0);
      expect(worst).toBeLessThanOrEqual(MAX_ERR_PX);
    });
  }
});

describe('projection basics', () => {
  const cam: Camera = {
    fx: 100, fy: 120, cx: 320, cy: 240,
    r: [1, 0, 0, 0, 1, 0, 0, 0, 1] as Mat3,
    t: [0, 0, 2],
    width: 640, height: 480,
  };

  it('projects the optical axis to the principal point', () => {
    expect(projectPoint(cam, [0, 0, 1])).toEqual([320, 240]);
  });

  it('applies focal lengths per axis', () => {
    const px = projectPoint(cam, [1, 1, 0]); // depth 2 in camera frame
    expect(px![0]).toBeCloseTo(320 + (100 * 1) / 2, 12);
    expect(px![1]).toBeCloseTo(240 + (120 * 1) / 2, 12);
  });

  it('returns null at and behind the camera plane', () => {
    expect(projectPoint(cam, [0, 0, -2])).toBeNull();
    expect(projectPoint(cam, [0.5, 0.5, -2.5])).toBeNull();
  });

  it('recovers the camera center', () => {
    const c = cameraCenter(cam);
    expect(c).toEqual([-0, -0, -2]);
    expect(cameraPoint(cam, c)[2]).toBeCloseTo(0, 12);
  });

  it('scales before rotating when applying a pose', () => {
    const pose = poseFromJson({
      T: [0, 0, 0],
      // 90 degrees about z: x -> y
      R: [0, -1, 0, 1, 0, 0, 0, 0, 1],
      S: [2, 3, 1],
    });
    const w = applyPose(pose, [1, 0, 0]);
    expect(w[0]).toBeCloseTo(0, 12);
    expect(w[1]).toBeCloseTo(2, 12); // scaled by sx first, then rotated
    expect(w[2]).toBeCloseTo(0, 12);
  });

  it('measures rotation differences in degrees', () => {
    const id: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];
    const quarter: Mat3 = [0, -1, 0, 1, 0, 0, 0, 0, 1];
    expect(rotationAngleDeg(id, id)).toBeCloseTo(0, 9);
    expect(rotationAngleDeg(id, quarter)).toBeCloseTo(90, 9);
  });
});
