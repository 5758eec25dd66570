// Shared helpers for painting video frames and track boxes onto view
// canvases. Frames may be missing on disk (datasets generated without
// rendering); a flat placeholder keeps the geometry usable.

import { ApiClient } from '../api.js';
import { CameraFrameJson } from '../types.js';

export function loadImage(url: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.crossOrigin = 'anonymous';
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error(`image failed to load: ${url}`));
    img.src = url;
  });
}

/**
 * Draw a scene frame scaled into the canvas. Falls back to a neutral
 * placeholder when the image is unavailable.
 */
export async function drawFrameImage(
  ctx: CanvasRenderingContext2D,
  api: ApiClient,
  sceneId: string,
  frameId: number,
  frame: CameraFrameJson | undefined,
): Promise<void> {
  const canvas = ctx.canvas;
  try {
    const img = await loadImage(api.frameImageUrl(sceneId, frameId));
    ctx.drawImage(img, 0, 0, canvas.width, canvas.height);
  } catch {
    ctx.fillStyle = '#d8d8d4';
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = '#666';
    ctx.fillText(`frame ${frameId} (no image)`, 6, 16);
  }
  if (frame) {
    ctx.strokeStyle = '#bbb';
    ctx.strokeRect(0.5, 0.5, canvas.width - 1, canvas.height - 1);
  }
}

/** Scale factor from image pixels to canvas pixels. */
export function imageToCanvasScale(
  canvas: HTMLCanvasElement,
  imageSize: [number, number],
): [number, number] {
  return [canvas.width / imageSize[0], canvas.height / imageSize[1]];
}

export function drawTrackBox(
  ctx: CanvasRenderingContext2D,
  box: [number, number, number, number],
  imageSize: [number, number],
  color: string,
  label?: string,
): void {
  const [sx, sy] = imageToCanvasScale(ctx.canvas, imageSize);
  const [x0, y0, x1, y1] = box;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.strokeRect(x0 * sx, y0 * sy, (x1 - x0) * sx, (y1 - y0) * sy);
  if (label) {
    ctx.fillStyle = color;
    ctx.font = '11px sans-serif';
    ctx.fillText(label, x0 * sx + 2, y0 * sy + 12);
  }
}
