// Manual track drawing. The annotator loads a scene, draws a box
// around one object on each keyframe, and submits the result as a new
// manual-source track. Automatic tracks are drawn underneath so the
// annotator can see what detection already found.

import { StatusLine, clear, el } from '../dom.js';
import { pickKeyframes } from '../keyframes.js';
import { UiSession } from '../session.js';
import { DetectionJson, SceneJson, TrackDocJson } from '../types.js';
import { drawFrameImage, drawTrackBox, imageToCanvasScale } from './frames.js';
import { ViewDone } from './candidates.js';

const AUTO_COLORS = ['#5ad', '#da5', '#a5d', '#5da', '#d55', '#55d'];
const FALLBACK_DESCRIPTOR_DIM = 8;

type BoxDraft = [number, number, number, number];

export async function createTrackDrawingView(
  session: UiSession,
  onDone: ViewDone,
): Promise<HTMLElement> {
  const api = session.api;
  const root = el('div', { class: 'view track-view' });
  const status = new StatusLine();

  const sceneInput = el('input', { placeholder: 'scene id', value: '' });
  const loadBtn = el('button', { text: 'Load scene' });
  const header = el('div', { class: 'button-row' }, [sceneInput, loadBtn]);
  const body = el('div', {});
  root.append(el('h2', { text: 'Draw a new track' }), header, body, status.el);

  loadBtn.addEventListener('click', () => {
    const sceneId = sceneInput.value.trim();
    if (!sceneId) {
      status.show('enter a scene id', 'warn');
      return;
    }
    void loadScene(sceneId);
  });

  async function loadScene(sceneId: string): Promise<void> {
    clear(body);
    let scene: SceneJson;
    let autoTracks: TrackDocJson[];
    try {
      scene = await api.getScene(sceneId);
      autoTracks = await api.getSceneTracks(sceneId);
    } catch (err) {
      status.show(String(err), 'error', 8000);
      return;
    }

    const keyframes = pickKeyframes(scene.frames.map((f) => f.frame_id));
    const drafts = new Map<number, BoxDraft>();

    const categoryInput = el('input', { placeholder: 'category (e.g. chair)' });
    const trackIdInput = el('input', {
      value: `manual-${Date.now().toString(36)}`,
    });
    const strip = el('div', { class: 'keyframe-strip wide' });

    for (const frameId of keyframes) {
      const cell = el('div', { class: 'draw-cell' });
      const canvas = el('canvas', { width: '320', height: '240' });
      const clearBtn = el('button', { text: `clear ${frameId}`, class: 'small' });
      cell.append(canvas, clearBtn);
      strip.append(cell);
      wireDrawing(canvas, frameId);
      clearBtn.addEventListener('click', () => {
        drafts.delete(frameId);
        void repaint(canvas, frameId);
      });
      void repaint(canvas, frameId);

      function wireDrawing(target: HTMLCanvasElement, fid: number): void {
        let start: [number, number] | null = null;
        target.addEventListener('mousedown', (ev) => {
          start = canvasToImage(target, fid, ev);
        });
        target.addEventListener('mousemove', (ev) => {
          if (!start) return;
          const cur = canvasToImage(target, fid, ev);
          drafts.set(fid, orderedBox(start, cur));
          void repaint(target, fid);
        });
        window.addEventListener('mouseup', () => {
          start = null;
        });
      }

      function canvasToImage(
        target: HTMLCanvasElement,
        fid: number,
        ev: MouseEvent,
      ): [number, number] {
        const frame = scene.frames.find((f) => f.frame_id === fid);
        const rect = target.getBoundingClientRect();
        const x = ((ev.clientX - rect.left) / rect.width) * target.width;
        const y = ((ev.clientY - rect.top) / rect.height) * target.height;
        if (!frame) return [x, y];
        const [sx, sy] = imageToCanvasScale(target, frame.image_size);
        return [x / sx, y / sy];
      }

      async function repaint(target: HTMLCanvasElement, fid: number): Promise<void> {
        const ctx = target.getContext('2d');
        if (!ctx) return;
        const frame = scene.frames.find((f) => f.frame_id === fid);
        await drawFrameImage(ctx, api, sceneId, fid, frame);
        if (!frame) return;
        autoTracks.forEach((docJson, i) => {
          const det = docJson.track.detections.find((d) => d.frame_id === fid);
          if (det) {
            drawTrackBox(
              ctx, det.box, frame.image_size,
              AUTO_COLORS[i % AUTO_COLORS.length], docJson.track.track_id,
            );
          }
        });
        const draft = drafts.get(fid);
        if (draft) {
          drawTrackBox(ctx, draft, frame.image_size, '#ff3366', 'new');
        }
      }
    }

    const submitBtn = el('button', { text: 'Submit manual track' });
    submitBtn.addEventListener('click', () => void submit());
    body.append(
      el('div', { class: 'button-row' }, [
        el('label', { text: 'category ' }), categoryInput,
        el('label', { text: ' track id ' }), trackIdInput,
      ]),
      strip,
      el('div', { class: 'button-row' }, [submitBtn]),
    );

    async function submit(): Promise<void> {
      const category = categoryInput.value.trim();
      if (!category) {
        status.show('give the object a category', 'warn');
        return;
      }
      if (drafts.size < 2) {
        status.show('draw the box on at least two keyframes', 'warn');
        return;
      }
      const descriptor = manualDescriptor(autoTracks);
      const detections: DetectionJson[] = Array.from(drafts.entries())
        .sort((a, b) => a[0] - b[0])
        .map(([frameId, box]) => ({
          frame_id: frameId,
          box,
          category,
          score: 1.0,
          descriptor,
        }));
      const doc: TrackDocJson = {
        scene_id: sceneId,
        track: {
          track_id: trackIdInput.value.trim(),
          category,
          source: 'manual',
          detections,
        },
      };
      try {
        const created = await api.postTrack(doc);
        onDone(`track ${created.track_id} created, task ${created.task.task_id} queued`);
      } catch (err) {
        status.show(String(err), 'error', 8000);
      }
    }
  }

  return root;
}

function orderedBox(a: [number, number], b: [number, number]): BoxDraft {
  const x0 = Math.min(a[0], b[0]);
  const y0 = Math.min(a[1], b[1]);
  const x1 = Math.max(a[0], b[0]);
  const y1 = Math.max(a[1], b[1]);
  // degenerate boxes are rejected server-side; nudge to a minimal size
  return [x0, y0, Math.max(x1, x0 + 1), Math.max(y1, y0 + 1)];
}

/**
 * Manual tracks have no appearance embedding. A fixed unit vector of
 * the dataset's descriptor dimensionality keeps them valid for the
 * retrieval stage, which then ranks mostly by category.
 */
export function manualDescriptor(autoTracks: TrackDocJson[]): number[] {
  let dim = FALLBACK_DESCRIPTOR_DIM;
  for (const doc of autoTracks) {
    const det = doc.track.detections[0];
    if (det && det.descriptor.length > 0) {
      dim = det.descriptor.length;
      break;
    }
  }
  const d = new Array<number>(dim).fill(0);
  d[0] = 1;
  return d;
}
