import { describe, expect, it } from 'vitest';
import {
  CorrespondenceBuilder,
  MAX_PAIRS_PER_FRAME,
  MIN_PAIRS_PER_FRAME,
} from '../src/corr.js';
import { pickKeyframes } from '../src/keyframes.js';

function builderWith(frames: number[] = [0, 10, 20]): CorrespondenceBuilder {
  return new CorrespondenceBuilder('t-007', 'm-003', frames);
}

function fill(b: CorrespondenceBuilder, frameId: number, n: number): void {
  for (let i = 0; i < n; i++) {
    b.setModelPoint([0.1 * i, 0.2, 0.3]);
    const res = b.placeImagePoint(frameId, [100 + i, 200 + i]);
    expect(res.ok).toBe(true);
  }
}

describe('pickKeyframes', () => {
  it('returns everything when there are few frames', () => {
    expect(pickKeyframes([3, 1, 2])).toEqual([1, 2, 3]);
  });

  it('spaces six frames regularly and keeps the ends', () => {
    const ids = Array.from({ length: 100 }, (_, i) => i);
    expect(pickKeyframes(ids)).toEqual([0, 20, 40, 59, 79, 99]);
  });

  it('drops duplicates', () => {
    expect(pickKeyframes([5, 5, 5, 2])).toEqual([2, 5]);
  });
});

describe('pair collection', () => {
  it('needs a model point before an image point', () => {
    const b = builderWith();
    const res = b.placeImagePoint(0, [10, 10]);
    expect(res).toEqual({ ok: false, reason: 'no-model-point' });
  });

  it('builds a pair from two clicks and clears the pending point', () => {
    const b = builderWith();
    b.setModelPoint([0.5, 0.1, -0.2]);
    expect(b.pendingDisplayed()).toEqual([0.5, 0.1, -0.2]);
    const res = b.placeImagePoint(10, [320.5, 112.25]);
    expect(res.ok).toBe(true);
    expect(b.pendingDisplayed()).toBeNull();
    expect(b.count(10)).toBe(1);
    expect(b.pairsFor(10)[0].qPixel).toEqual([320.5, 112.25]);
  });

  it('caps a frame at the maximum pair count', () => {
    const b = builderWith();
    fill(b, 0, MAX_PAIRS_PER_FRAME);
    b.setModelPoint([1, 1, 1]);
    const res = b.placeImagePoint(0, [5, 5]);
    expect(res).toEqual({ ok: false, reason: 'frame-full' });
    expect(b.count(0)).toBe(MAX_PAIRS_PER_FRAME);
  });

  it('deletes by frame index and supports restore for undo', () => {
    const b = builderWith();
    fill(b, 0, 3);
    const removed = b.deletePair(0, 1);
    expect(removed).not.toBeNull();
    expect(b.count(0)).toBe(2);
    expect(b.deletePair(0, 9)).toBeNull();
    b.restorePair(removed!);
    expect(b.count(0)).toBe(3);
  });
});

describe('flip handling', () => {
  it('stores canonical coordinates while flipped', () => {
    const b = builderWith();
    b.toggleFlip();
    // the annotator clicks the mirrored surface at displayed x = -0.4
    b.setModelPoint([-0.4, 0.2, 0.1]);
    expect(b.pendingDisplayed()).toEqual([-0.4, 0.2, 0.1]);
    b.placeImagePoint(0, [50, 60]);
    // canonical storage holds the unmirrored point
    expect(b.pairsFor(0)[0].pModel).toEqual([0.4, 0.2, 0.1]);
    expect(b.toFile().flipped).toBe(true);
    expect(b.toFile().items[0].p_model).toEqual([0.4, 0.2, 0.1]);
  });

  it('re-displays stored pairs mirrored after a toggle', () => {
    const b = builderWith();
    b.setModelPoint([0.4, 0.2, 0.1]);
    b.placeImagePoint(0, [50, 60]);
    expect(b.displayedModelPoints(0)).toEqual([[0.4, 0.2, 0.1]]);
    b.toggleFlip();
    expect(b.displayedModelPoints(0)).toEqual([[-0.4, 0.2, 0.1]]);
  });

  it('toggling clears the pending point', () => {
    const b = builderWith();
    b.setModelPoint([1, 2, 3]);
    b.toggleFlip();
    expect(b.pendingDisplayed()).toBeNull();
  });
});

describe('submission gating', () => {
  it('blocks until every visited frame has 4 to 6 pairs', () => {
    const b = builderWith();
    b.visit(0);
    b.visit(10);
    fill(b, 0, MIN_PAIRS_PER_FRAME);
    expect(b.isSubmittable()).toBe(false);
    expect(b.blockers().join(' ')).toContain('frame 10');
    fill(b, 10, MIN_PAIRS_PER_FRAME);
    expect(b.isSubmittable()).toBe(true);
  });

  it('requires at least two annotated frames', () => {
    const b = builderWith();
    b.visit(0);
    fill(b, 0, 5);
    expect(b.isSubmittable()).toBe(false);
    expect(b.blockers().join(' ')).toContain('frames annotated');
  });

  it('a frame becomes visited by annotating it', () => {
    const b = builderWith();
    fill(b, 20, 2);
    expect(b.visitedFrames()).toEqual([20]);
    expect(b.blockers()[0]).toContain('frame 20 has 2');
  });
});

describe('wire format', () => {
  it('sorts items by frame and never includes orientation', () => {
    const b = builderWith();
    fill(b, 20, 4);
    fill(b, 0, 4);
    const file = b.toFile();
    expect(file.track_id).toBe('t-007');
    expect(file.model_id).toBe('m-003');
    const frames = file.items.map((it) => it.frame_id);
    expect(frames).toEqual(frames.slice().sort((a, z) => a - z));
    expect(file.items.length).toBe(8);
    for (const item of file.items) {
      expect(Object.keys(item).sort()).toEqual(['frame_id', 'p_model', 'q_pixel']);
    }
  });
});
