// Verification: the solved model drawn as a wireframe over every
// keyframe. Accept only when the overlay hugs the object in all of
// them; one bad frame means reject.

import { StatusLine, el } from '../dom.js';
import { cameraFromJson, poseFromJson } from '../geometry.js';
import { pickKeyframes } from '../keyframes.js';
import { flipMesh, parseObj } from '../obj.js';
import { UiSession } from '../session.js';
import { TaskJson } from '../types.js';
import { projectedSegments } from '../wireframe.js';
import { drawFrameImage } from './frames.js';
import { ViewDone } from './candidates.js';

export async function createVerificationView(
  session: UiSession,
  task: TaskJson,
  onDone: ViewDone,
): Promise<HTMLElement> {
  const api = session.api;
  const root = el('div', { class: 'view verify-view' });
  const status = new StatusLine();

  const result = await api.getSolveResult(task.track_id);
  if (result === null) {
    // Solving has not produced a pose yet. Offer a refresh rather than
    // blocking the session.
    root.append(
      el('h2', { text: `Verify ${task.track_id}` }),
      el('p', { text: 'No solved pose yet. The solve stage has not finished for this track.' }),
    );
    const again = el('button', { text: 'Check again' });
    again.addEventListener('click', () => {
      void createVerificationView(session, task, onDone).then((fresh) => {
        root.replaceWith(fresh);
      });
    });
    root.append(again, status.el);
    return root;
  }

  const doc = await api.getTrack(task.track_id);
  const scene = await api.getScene(doc.scene_id);
  const canonical = parseObj(await api.getMesh(task.model_id));
  const mesh = result.flipped ? flipMesh(canonical) : canonical;
  const pose = poseFromJson(result.pose);
  const keyframes = pickKeyframes(doc.track.detections.map((d) => d.frame_id));

  root.append(el('h2', {
    text: `Verify ${task.model_id} on ${task.track_id}`,
  }));
  root.append(el('p', {
    class: 'residual-note',
    text: `mean reprojection ${result.mean_reproj_px.toFixed(2)} px, `
      + `${result.converged ? 'converged' : 'did not converge'}, `
      + `scale mode ${result.scale_mode}`,
  }));

  const strip = el('div', { class: 'keyframe-strip wide' });
  for (const frameId of keyframes) {
    const canvas = el('canvas', { width: '320', height: '240' });
    strip.append(canvas);
    void paintOverlay(canvas, frameId);
  }
  root.append(strip);

  async function paintOverlay(canvas: HTMLCanvasElement, frameId: number): Promise<void> {
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const frame = scene.frames.find((f) => f.frame_id === frameId);
    await drawFrameImage(ctx, api, scene.scene_id, frameId, frame);
    if (!frame) return;
    const cam = cameraFromJson(frame);
    const sx = canvas.width / cam.width;
    const sy = canvas.height / cam.height;
    ctx.strokeStyle = '#28d47a';
    ctx.lineWidth = 1.25;
    ctx.beginPath();
    for (const seg of projectedSegments(mesh, pose, cam)) {
      ctx.moveTo(seg.a[0] * sx, seg.a[1] * sy);
      ctx.lineTo(seg.b[0] * sx, seg.b[1] * sy);
    }
    ctx.stroke();
    ctx.fillStyle = '#28d47a';
    ctx.font = '11px sans-serif';
    ctx.fillText(`frame ${frameId}`, 6, canvas.height - 8);
  }

  const acceptBtn = el('button', { text: 'Aligned in all keyframes' });
  const rejectBtn = el('button', { text: 'Misaligned somewhere' });
  root.append(
    el('p', { text: 'Accept only if the wireframe matches the object in every keyframe above.' }),
    el('div', { class: 'button-row' }, [acceptBtn, rejectBtn]),
    status.el,
  );

  async function finish(ok: boolean): Promise<void> {
    acceptBtn.disabled = true;
    rejectBtn.disabled = true;
    try {
      const outcome = await session.submitWithRetry({ kind: 'verdict', ok });
      if (outcome.status === 'conflict') {
        status.show(
          `someone else advanced this task (now ${outcome.task.stage})`,
          'error', 8000,
        );
        return;
      }
      onDone(`verdict stored, ${task.task_id} is now ${outcome.task.stage}`);
    } catch (err) {
      status.show(String(err), 'error', 8000);
    } finally {
      acceptBtn.disabled = false;
      rejectBtn.disabled = false;
    }
  }

  acceptBtn.addEventListener('click', () => void finish(true));
  rejectBtn.addEventListener('click', () => void finish(false));
  return root;
}
