// Small DOM helpers so the views stay readable without a framework.

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Array<HTMLElement | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === 'class') {
      node.className = value;
    } else if (key === 'text') {
      node.textContent = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

/** Canvas-relative pixel coordinates of a mouse event, in canvas units. */
export function canvasPoint(canvas: HTMLCanvasElement, ev: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const x = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  return [x, y];
}

/** Transient status line used for click feedback and errors. */
export class StatusLine {
  readonly el: HTMLElement;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(className = 'status-line') {
    this.el = el('div', { class: className });
  }

  show(message: string, kind: 'info' | 'warn' | 'error' = 'info', ms = 4000): void {
    this.el.textContent = message;
    this.el.dataset.kind = kind;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.el.textContent = '';
      delete this.el.dataset.kind;
    }, ms);
  }
}
