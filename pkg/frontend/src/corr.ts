// Correspondence collection state. A pair is born in two clicks: one
// on the model surface, one on the video frame. The builder tracks
// per-keyframe progress and enforces the click budget before a set can
// be submitted.

import { Vec2, Vec3 } from './geometry.js';
import { mirrorX } from './obj.js';
import { CorrespondenceFileJson, CorrespondenceItemJson } from './types.js';

export const MIN_PAIRS_PER_FRAME = 4;
export const MAX_PAIRS_PER_FRAME = 6;
export const MIN_ANNOTATED_FRAMES = 2;

export type Pair = {
  frameId: number;
  // Model point in canonical (unflipped) coordinates; this is what
  // gets submitted.
  pModel: Vec3;
  qPixel: Vec2;
};

export type PlaceResult =
  | { ok: true; pair: Pair }
  | { ok: false; reason: 'no-model-point' | 'frame-full' };

export class CorrespondenceBuilder {
  readonly trackId: string;
  readonly modelId: string;
  readonly keyframes: number[];
  flipped = false;

  private pairs: Pair[] = [];
  private pendingCanonical: Vec3 | null = null;
  private visited = new Set<number>();

  constructor(trackId: string, modelId: string, keyframes: number[]) {
    this.trackId = trackId;
    this.modelId = modelId;
    this.keyframes = keyframes.slice();
  }

  /** Mark a keyframe as opened; opened frames must be annotated. */
  visit(frameId: number): void {
    this.visited.add(frameId);
  }

  visitedFrames(): number[] {
    return Array.from(this.visited).sort((a, b) => a - b);
  }

  /**
   * Record a click on the model surface. The point arrives in
   * displayed coordinates; with the flip toggle on it is mirrored back
   * to the canonical frame for storage.
   */
  setModelPoint(displayed: Vec3): void {
    this.pendingCanonical = this.flipped ? mirrorX(displayed) : displayed;
  }

  /** Pending model point in displayed coordinates, for the marker. */
  pendingDisplayed(): Vec3 | null {
    if (this.pendingCanonical === null) {
      return null;
    }
    return this.flipped ? mirrorX(this.pendingCanonical) : this.pendingCanonical;
  }

  clearPending(): void {
    this.pendingCanonical = null;
  }

  /** Complete the pending pair with an image click. */
  placeImagePoint(frameId: number, qPixel: Vec2): PlaceResult {
    if (this.pendingCanonical === null) {
      return { ok: false, reason: 'no-model-point' };
    }
    if (this.count(frameId) >= MAX_PAIRS_PER_FRAME) {
      return { ok: false, reason: 'frame-full' };
    }
    const pair: Pair = {
      frameId,
      pModel: this.pendingCanonical,
      qPixel: [qPixel[0], qPixel[1]],
    };
    this.pairs.push(pair);
    this.pendingCanonical = null;
    this.visited.add(frameId);
    return { ok: true, pair };
  }

  pairsFor(frameId: number): Pair[] {
    return this.pairs.filter((p) => p.frameId === frameId);
  }

  /** Model points of a frame's pairs in displayed coordinates. */
  displayedModelPoints(frameId: number): Vec3[] {
    return this.pairsFor(frameId).map((p) =>
      this.flipped ? mirrorX(p.pModel) : p.pModel,
    );
  }

  deletePair(frameId: number, index: number): Pair | null {
    const frame = this.pairsFor(frameId);
    if (index < 0 || index >= frame.length) {
      return null;
    }
    const victim = frame[index];
    this.pairs.splice(this.pairs.indexOf(victim), 1);
    return victim;
  }

  /** Re-insert a previously deleted pair (undo support). */
  restorePair(pair: Pair): void {
    this.pairs.push(pair);
    this.visited.add(pair.frameId);
  }

  /**
   * Toggle the mirror state. Stored pairs keep their canonical model
   * coordinates; the solver applies the mirror to all of them based on
   * the flag, so a mid-session toggle changes the meaning of earlier
   * clicks. The view re-draws their markers mirrored so the annotator
   * can spot and delete stale ones.
   */
  toggleFlip(): boolean {
    this.flipped = !this.flipped;
    this.pendingCanonical = null;
    return this.flipped;
  }

  count(frameId: number): number {
    return this.pairsFor(frameId).length;
  }

  frameComplete(frameId: number): boolean {
    const n = this.count(frameId);
    return n >= MIN_PAIRS_PER_FRAME && n <= MAX_PAIRS_PER_FRAME;
  }

  /** Frames blocking submission, with the reason. */
  blockers(): string[] {
    const out: string[] = [];
    for (const f of this.visitedFrames()) {
      const n = this.count(f);
      if (n < MIN_PAIRS_PER_FRAME) {
        out.push(`frame ${f} has ${n} of ${MIN_PAIRS_PER_FRAME} required pairs`);
      } else if (n > MAX_PAIRS_PER_FRAME) {
        out.push(`frame ${f} has ${n} pairs, at most ${MAX_PAIRS_PER_FRAME} allowed`);
      }
    }
    const annotated = new Set(this.pairs.map((p) => p.frameId)).size;
    if (annotated < MIN_ANNOTATED_FRAMES) {
      out.push(`only ${annotated} frames annotated, need ${MIN_ANNOTATED_FRAMES}`);
    }
    return out;
  }

  isSubmittable(): boolean {
    return this.blockers().length === 0;
  }

  /**
   * Wire format of the collected set. Only surface points and pixels
   * leave the builder; the viewing orientation stays local.
   */
  toFile(): CorrespondenceFileJson {
    const items: CorrespondenceItemJson[] = this.pairs
      .slice()
      .sort((a, b) => a.frameId - b.frameId)
      .map((p) => ({
        frame_id: p.frameId,
        p_model: [p.pModel[0], p.pModel[1], p.pModel[2]],
        q_pixel: [p.qPixel[0], p.qPixel[1]],
      }));
    return {
      track_id: this.trackId,
      model_id: this.modelId,
      flipped: this.flipped,
      items,
    };
  }
}
