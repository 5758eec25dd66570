// Correspondence collection view. Left pane: the chosen model in an
// orbitable viewport. Right pane: one keyframe at a time. A pair is
// clicked model-first, image-second; the builder enforces the per-frame
// budget and the flip toggle mirrors the displayed model while keeping
// submissions in canonical model coordinates.

import { CorrespondenceBuilder } from '../corr.js';
import { StatusLine, canvasPoint, clear, el } from '../dom.js';
import { Camera, Vec3, projectPoint } from '../geometry.js';
import { pickKeyframes } from '../keyframes.js';
import { Mesh, flipMesh, parseObj } from '../obj.js';
import { OrbitState, drag, frameMesh, orbitCamera, zoom } from '../orbit.js';
import { pickSurface, pixelRay } from '../raycast.js';
import { UiSession } from '../session.js';
import { TaskJson } from '../types.js';
import { drawMesh } from '../viewport.js';
import { drawFrameImage, drawTrackBox, imageToCanvasScale } from './frames.js';
import { ViewDone } from './candidates.js';

const MODEL_W = 420;
const MODEL_H = 360;
const IMAGE_W = 640;
const IMAGE_H = 480;
const DELETE_RADIUS_PX = 9;

const PAIR_COLORS = ['#e6194b', '#3cb44b', '#4363d8', '#f58231', '#911eb4', '#46f0f0'];

export async function createCorrespondenceView(
  session: UiSession,
  task: TaskJson,
  onDone: ViewDone,
): Promise<HTMLElement> {
  const api = session.api;
  const doc = await api.getTrack(task.track_id);
  const scene = await api.getScene(doc.scene_id);
  const canonical = parseObj(await api.getMesh(task.model_id));
  const keyframes = pickKeyframes(doc.track.detections.map((d) => d.frame_id));
  const builder = new CorrespondenceBuilder(task.track_id, task.model_id, keyframes);

  let displayed: Mesh = canonical;
  const viewSpec = { width: MODEL_W, height: MODEL_H, focal: 420 };
  let orbit: OrbitState = frameMesh(canonical, viewSpec);
  let activeFrame = keyframes[0];
  builder.visit(activeFrame);

  const root = el('div', { class: 'view correspond-view' });
  const status = new StatusLine();
  root.append(el('h2', {
    text: `Click matching points: ${task.model_id} on ${task.track_id}`,
  }));

  const modelCanvas = el('canvas', {
    width: String(MODEL_W), height: String(MODEL_H), class: 'model-canvas',
  });
  const imageCanvas = el('canvas', {
    width: String(IMAGE_W), height: String(IMAGE_H), class: 'image-canvas',
  });

  const flipBtn = el('button', { text: 'Flip model' });
  const undoBtn = el('button', { text: 'Undo' });
  const resetBtn = el('button', { text: 'Reset view' });
  const frameTabs = el('div', { class: 'frame-tabs' });
  const countsRow = el('div', { class: 'counts-row' });
  const submitBtn = el('button', { text: 'Submit correspondences' });

  root.append(
    el('div', { class: 'correspond-panes' }, [
      el('div', { class: 'pane' }, [
        modelCanvas,
        el('div', { class: 'button-row' }, [flipBtn, undoBtn, resetBtn]),
      ]),
      el('div', { class: 'pane' }, [frameTabs, imageCanvas]),
    ]),
    countsRow,
    el('div', { class: 'button-row' }, [submitBtn]),
    status.el,
  );

  // -- model viewport ------------------------------------------------

  function modelCam(): Camera {
    return orbitCamera(orbit, viewSpec);
  }

  function redrawModel(): void {
    const ctx = modelCanvas.getContext('2d');
    if (!ctx) return;
    ctx.fillStyle = '#1d2430';
    ctx.fillRect(0, 0, MODEL_W, MODEL_H);
    const cam = modelCam();
    drawMesh(ctx, displayed, null, cam, { fill: '#8fb0d8', outline: '#4b618a' });
    // markers for this frame's already-placed model points
    builder.displayedModelPoints(activeFrame).forEach((p, i) => {
      drawModelMarker(ctx, cam, p, PAIR_COLORS[i % PAIR_COLORS.length], String(i + 1));
    });
    const pending = builder.pendingDisplayed();
    if (pending) {
      drawModelMarker(ctx, cam, pending, '#ffffff', '?');
    }
    if (builder.flipped) {
      ctx.fillStyle = '#ffb000';
      ctx.font = '12px sans-serif';
      ctx.fillText('mirrored', 8, MODEL_H - 10);
    }
  }

  function drawModelMarker(
    ctx: CanvasRenderingContext2D,
    cam: Camera,
    p: Vec3,
    color: string,
    label: string,
  ): void {
    const px = projectPoint(cam, p);
    if (!px) return;
    ctx.beginPath();
    ctx.arc(px[0], px[1], 5, 0, 2 * Math.PI);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.font = '11px sans-serif';
    ctx.fillText(label, px[0] + 7, px[1] - 5);
  }

  let dragging = false;
  let moved = 0;
  let last: [number, number] = [0, 0];
  modelCanvas.addEventListener('mousedown', (ev) => {
    dragging = true;
    moved = 0;
    last = [ev.clientX, ev.clientY];
  });
  window.addEventListener('mousemove', (ev) => {
    if (!dragging) return;
    const dx = ev.clientX - last[0];
    const dy = ev.clientY - last[1];
    moved += Math.abs(dx) + Math.abs(dy);
    last = [ev.clientX, ev.clientY];
    orbit = drag(orbit, dx, dy);
    redrawModel();
  });
  window.addEventListener('mouseup', (ev) => {
    if (!dragging) return;
    dragging = false;
    if (moved > 4) {
      return; // it was an orbit drag, not a pick
    }
    const [u, v] = canvasPoint(modelCanvas, ev);
    const hit = pickSurface(displayed, pixelRay(modelCam(), u, v));
    if (!hit) {
      status.show('missed the model surface, click on the shaded mesh', 'warn');
      return;
    }
    builder.setModelPoint(hit.point);
    status.show('surface point set, now click the matching image point');
    redrawModel();
  });
  modelCanvas.addEventListener('wheel', (ev) => {
    ev.preventDefault();
    orbit = zoom(orbit, ev.deltaY > 0 ? 1.12 : 1 / 1.12);
    redrawModel();
  });

  flipBtn.addEventListener('click', () => {
    const flipped = builder.toggleFlip();
    displayed = flipped ? flipMesh(canonical) : canonical;
    const before = builder.pairsFor(activeFrame).length;
    status.show(
      flipped
        ? 'model mirrored; existing markers moved with it, delete any that look wrong'
        : 'mirror off',
      before > 0 ? 'warn' : 'info',
    );
    redrawModel();
    refreshCounts();
  });

  resetBtn.addEventListener('click', () => {
    orbit = frameMesh(canonical, viewSpec);
    redrawModel();
  });

  undoBtn.addEventListener('click', () => {
    if (!session.undo()) {
      status.show('nothing to undo', 'info');
      return;
    }
    redrawAll();
  });

  // -- image pane ----------------------------------------------------

  function rebuildTabs(): void {
    clear(frameTabs);
    for (const frameId of keyframes) {
      const n = builder.count(frameId);
      const tab = el('button', {
        class: frameId === activeFrame ? 'tab active' : 'tab',
        text: `frame ${frameId} (${n})`,
      });
      tab.addEventListener('click', () => {
        activeFrame = frameId;
        builder.visit(frameId);
        builder.clearPending();
        redrawAll();
      });
      frameTabs.append(tab);
    }
  }

  async function redrawImage(): Promise<void> {
    const ctx = imageCanvas.getContext('2d');
    if (!ctx) return;
    const frame = scene.frames.find((f) => f.frame_id === activeFrame);
    await drawFrameImage(ctx, api, scene.scene_id, activeFrame, frame);
    const det = doc.track.detections.find((d) => d.frame_id === activeFrame);
    if (det && frame) {
      drawTrackBox(ctx, det.box, frame.image_size, '#ffb000');
    }
    if (!frame) return;
    const [sx, sy] = imageToCanvasScale(imageCanvas, frame.image_size);
    builder.pairsFor(activeFrame).forEach((pair, i) => {
      const color = PAIR_COLORS[i % PAIR_COLORS.length];
      const x = pair.qPixel[0] * sx;
      const y = pair.qPixel[1] * sy;
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.font = '11px sans-serif';
      ctx.fillText(String(i + 1), x + 7, y - 5);
    });
  }

  imageCanvas.addEventListener('click', (ev) => {
    const frame = scene.frames.find((f) => f.frame_id === activeFrame);
    if (!frame) {
      status.show(`frame ${activeFrame} has no camera`, 'error');
      return;
    }
    const [cx, cy] = canvasPoint(imageCanvas, ev);
    const [sx, sy] = imageToCanvasScale(imageCanvas, frame.image_size);
    const u = cx / sx;
    const v = cy / sy;

    // Clicks near an existing marker delete that pair instead of
    // placing a new point.
    const pairs = builder.pairsFor(activeFrame);
    for (let i = 0; i < pairs.length; i++) {
      const dx = (pairs[i].qPixel[0] - u) * sx;
      const dy = (pairs[i].qPixel[1] - v) * sy;
      if (Math.hypot(dx, dy) <= DELETE_RADIUS_PX) {
        const removed = builder.deletePair(activeFrame, i);
        if (removed) {
          session.pushUndo(() => builder.restorePair(removed));
          status.show(`deleted pair ${i + 1} on frame ${activeFrame}`);
          redrawAll();
        }
        return;
      }
    }

    const frameIdAtPlace = activeFrame;
    const placed = builder.placeImagePoint(activeFrame, [u, v]);
    if (!placed.ok) {
      status.show(
        placed.reason === 'no-model-point'
          ? 'click a point on the model first'
          : `frame ${activeFrame} already has the maximum of 6 pairs`,
        'warn',
      );
      return;
    }
    session.pushUndo(() => {
      const idx = builder.pairsFor(frameIdAtPlace).indexOf(placed.pair);
      if (idx >= 0) {
        builder.deletePair(frameIdAtPlace, idx);
      }
    });
    redrawAll();
  });

  // -- submission ----------------------------------------------------

  function refreshCounts(): void {
    clear(countsRow);
    for (const frameId of keyframes) {
      const n = builder.count(frameId);
      const visited = builder.visitedFrames().includes(frameId);
      const cls = !visited ? 'count' : builder.frameComplete(frameId) ? 'count ok' : 'count bad';
      countsRow.append(el('span', { class: cls, text: `f${frameId}: ${n}/4-6` }));
    }
    submitBtn.disabled = !builder.isSubmittable();
  }

  submitBtn.addEventListener('click', () => {
    const blockers = builder.blockers();
    if (blockers.length > 0) {
      status.show(blockers.join('; '), 'warn', 8000);
      return;
    }
    submitBtn.disabled = true;
    void (async () => {
      try {
        const outcome = await session.submitWithRetry({
          kind: 'correspondences',
          data: builder.toFile(),
        });
        if (outcome.status === 'conflict') {
          status.show(
            `someone else advanced this task (now ${outcome.task.stage})`,
            'error', 8000,
          );
          return;
        }
        onDone(`correspondences stored, ${task.task_id} is now ${outcome.task.stage}`);
      } catch (err) {
        status.show(String(err), 'error', 8000);
        submitBtn.disabled = false;
      }
    })();
  });

  function redrawAll(): void {
    redrawModel();
    rebuildTabs();
    refreshCounts();
    void redrawImage();
  }

  redrawAll();
  return root;
}
