// Keyframe selection. Annotation happens on a small set of regularly
// spaced frames rather than every frame of the video.

export const KEYFRAME_COUNT = 6;

/**
 * Pick up to `count` frame ids spread evenly over the input. The first
 * and last frames are always included; with few frames all of them are
 * returned. Input order does not matter, duplicates are dropped.
 */
export function pickKeyframes(frameIds: number[], count = KEYFRAME_COUNT): number[] {
  const ids = Array.from(new Set(frameIds)).sort((a, b) => a - b);
  if (ids.length <= count) {
    return ids;
  }
  const picked = new Set<number>();
  for (let i = 0; i < count; i++) {
    const pos = Math.round((i * (ids.length - 1)) / (count - 1));
    picked.add(ids[pos]);
  }
  return Array.from(picked).sort((a, b) => a - b);
}
