// Candidate selection: retrieved models rendered next to the track's
// keyframes. The annotator picks the matching model or flags that none
// of them fit.

import { ApiClient } from '../api.js';
import { StatusLine, clear, el } from '../dom.js';
import { pickKeyframes } from '../keyframes.js';
import { parseObj } from '../obj.js';
import { frameMesh, orbitCamera } from '../orbit.js';
import { UiSession } from '../session.js';
import { SceneJson, TaskJson, TrackDocJson } from '../types.js';
import { drawMesh } from '../viewport.js';
import { drawFrameImage, drawTrackBox } from './frames.js';

const MAX_SHOWN = 10;
const CARD_W = 180;
const CARD_H = 140;

export type ViewDone = (summary: string) => void;

export async function createCandidateView(
  session: UiSession,
  task: TaskJson,
  onDone: ViewDone,
): Promise<HTMLElement> {
  const api = session.api;
  const doc = await api.getTrack(task.track_id);
  const scene = await api.getScene(doc.scene_id);
  const candidates = await api.getCandidates(task.track_id);
  const entries = candidates.entries.slice(0, MAX_SHOWN);

  const root = el('div', { class: 'view candidate-view' });
  const status = new StatusLine();
  let selected: number | null = null;

  root.append(
    el('h2', { text: `Pick a model for ${task.track_id} (${doc.track.category})` }),
  );
  root.append(buildKeyframeStrip(api, scene, doc));

  const grid = el('div', { class: 'candidate-grid' });
  const cards: HTMLElement[] = [];
  entries.forEach((entry, index) => {
    const card = el('div', { class: 'candidate-card' });
    const canvas = el('canvas', {
      width: String(CARD_W),
      height: String(CARD_H),
    });
    card.append(canvas, el('div', {
      class: 'candidate-label',
      text: `${entry.model_id}  ${entry.score.toFixed(3)}`,
    }));
    card.addEventListener('click', () => {
      selected = index;
      cards.forEach((c, i) => c.classList.toggle('selected', i === index));
    });
    cards.push(card);
    grid.append(card);
    void renderCandidate(api, entry.model_id, canvas);
  });
  root.append(grid);

  const submitBtn = el('button', { text: 'Use selected model' });
  submitBtn.addEventListener('click', () => {
    if (selected === null) {
      status.show('pick a candidate first, or flag none-match', 'warn');
      return;
    }
    void finish({ kind: 'choice', index: selected });
  });
  const noneBtn = el('button', { text: 'None of these match' });
  noneBtn.addEventListener('click', () => void finish({ kind: 'no_match' }));
  root.append(el('div', { class: 'button-row' }, [submitBtn, noneBtn]), status.el);

  async function finish(payload: { kind: 'choice'; index: number } | { kind: 'no_match' }) {
    submitBtn.disabled = true;
    noneBtn.disabled = true;
    try {
      const outcome = await session.submitWithRetry(payload);
      if (outcome.status === 'conflict') {
        status.show(
          `someone else advanced this task (now ${outcome.task.stage}); pick the next one`,
          'error', 8000,
        );
        return;
      }
      onDone(`task ${task.task_id} is now ${outcome.task.stage}`);
    } catch (err) {
      status.show(String(err), 'error', 8000);
    } finally {
      submitBtn.disabled = false;
      noneBtn.disabled = false;
    }
  }

  return root;
}

function buildKeyframeStrip(
  api: ApiClient,
  scene: SceneJson,
  doc: TrackDocJson,
): HTMLElement {
  const strip = el('div', { class: 'keyframe-strip' });
  const frames = pickKeyframes(doc.track.detections.map((d) => d.frame_id));
  for (const frameId of frames) {
    const canvas = el('canvas', { width: '200', height: '150' });
    strip.append(canvas);
    void paintKeyframe(api, scene, doc, frameId, canvas);
  }
  return strip;
}

async function paintKeyframe(
  api: ApiClient,
  scene: SceneJson,
  doc: TrackDocJson,
  frameId: number,
  canvas: HTMLCanvasElement,
): Promise<void> {
  const ctx = canvas.getContext('2d');
  if (!ctx) {
    return;
  }
  const frame = scene.frames.find((f) => f.frame_id === frameId);
  await drawFrameImage(ctx, api, scene.scene_id, frameId, frame);
  const det = doc.track.detections.find((d) => d.frame_id === frameId);
  if (det && frame) {
    drawTrackBox(ctx, det.box, frame.image_size, '#ffb000', String(frameId));
  }
}

async function renderCandidate(
  api: ApiClient,
  modelId: string,
  canvas: HTMLCanvasElement,
): Promise<void> {
  const ctx = canvas.getContext('2d');
  if (!ctx) {
    return;
  }
  try {
    const mesh = parseObj(await api.getMesh(modelId));
    const view = { width: canvas.width, height: canvas.height, focal: 160 };
    const cam = orbitCamera(frameMesh(mesh, view), view);
    ctx.fillStyle = '#f2f2ef';
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    drawMesh(ctx, mesh, null, cam, { fill: '#7a9acc', outline: '#41567a' });
  } catch (err) {
    ctx.fillStyle = '#888';
    ctx.fillText(`mesh unavailable: ${err}`, 4, 14);
  }
}
