// Wire types for the annotation service. Field names follow the JSON
// emitted by the server, so everything here is snake_case.

export type Stage =
  | 'TRACKED'
  | 'CAD_SELECTED'
  | 'REJECTED_NO_MATCH'
  | 'CORRESPONDED'
  | 'POSED'
  | 'VERIFIED_OK'
  | 'VERIFIED_BAD';

export type CameraFrameJson = {
  frame_id: number;
  timestamp: number;
  // fx, fy, cx, cy
  intrinsics: [number, number, number, number];
  // 12 row-major values of the 3x4 world-to-camera matrix [R|t]
  extrinsics: number[];
  // width, height
  image_size: [number, number];
  image?: string | null;
};

export type SceneJson = {
  scene_id: string;
  split: string;
  world_up: [number, number, number];
  frames: CameraFrameJson[];
};

export type DetectionJson = {
  frame_id: number;
  box: [number, number, number, number];
  category: string;
  score: number;
  descriptor: number[];
};

export type TrackJson = {
  track_id: string;
  category: string;
  source: string;
  detections: DetectionJson[];
};

export type TrackDocJson = {
  scene_id: string;
  track: TrackJson;
};

export type TaskJson = {
  task_id: string;
  track_id: string;
  stage: Stage;
  version: number;
  model_id: string;
};

export type CandidateEntryJson = {
  model_id: string;
  score: number;
};

export type CandidateListJson = {
  track_id: string;
  entries: CandidateEntryJson[];
};

export type PoseJson = {
  T: [number, number, number];
  R: number[]; // 9 row-major values
  S: [number, number, number];
};

export type SolveResultJson = {
  pose: PoseJson;
  mean_reproj_px: number;
  per_frame_residuals: Record<string, number>;
  converged: boolean;
  chosen_symmetry_index: number;
  scale_mode: string;
  final_losses: Record<string, number>;
  // Whether the pose applies to the mirrored model.
  flipped: boolean;
};

export type CorrespondenceItemJson = {
  frame_id: number;
  p_model: [number, number, number];
  q_pixel: [number, number];
};

export type CorrespondenceFileJson = {
  track_id: string;
  model_id: string;
  flipped: boolean;
  items: CorrespondenceItemJson[];
};

// Payload of a task submission. The kind decides which stage transition
// the server applies.
export type ResultPayload =
  | { kind: 'choice'; index: number }
  | { kind: 'no_match' }
  | { kind: 'correspondences'; data: CorrespondenceFileJson }
  | { kind: 'solve' }
  | { kind: 'verdict'; ok: boolean };

/** Stage a task lands in when the given payload is accepted. */
export function stageAfter(payload: ResultPayload): Stage {
  switch (payload.kind) {
    case 'choice':
      return 'CAD_SELECTED';
    case 'no_match':
      return 'REJECTED_NO_MATCH';
    case 'correspondences':
      return 'CORRESPONDED';
    case 'solve':
      return 'POSED';
    case 'verdict':
      return payload.ok ? 'VERIFIED_OK' : 'VERIFIED_BAD';
  }
}
