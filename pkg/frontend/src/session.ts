// Annotation session: who is annotating, which task is open, and the
// submission protocol with its version handshake.

import { ApiClient, ApiError } from './api.js';
import { ResultPayload, Stage, TaskJson, stageAfter } from './types.js';

export type SubmitOutcome =
  | { status: 'ok'; task: TaskJson }
  | { status: 'conflict'; task: TaskJson };

export class UiSession {
  readonly api: ApiClient;
  readonly annotatorId: string;
  current: TaskJson | null = null;

  private undoStack: Array<() => void> = [];

  constructor(api: ApiClient, annotatorId: string) {
    this.api = api;
    this.annotatorId = annotatorId;
  }

  /** Fetch the oldest open task at a stage and make it current. */
  async loadNext(stage: Stage): Promise<TaskJson | null> {
    const task = await this.api.nextTask(stage);
    this.current = task;
    this.clearUndo();
    return task;
  }

  async refresh(): Promise<TaskJson | null> {
    if (this.current === null) {
      return null;
    }
    this.current = await this.api.getTask(this.current.task_id);
    return this.current;
  }

  pushUndo(fn: () => void): void {
    this.undoStack.push(fn);
  }

  /** Run the most recent undo action. Returns false on an empty stack. */
  undo(): boolean {
    const fn = this.undoStack.pop();
    if (fn === undefined) {
      return false;
    }
    fn();
    return true;
  }

  clearUndo(): void {
    this.undoStack = [];
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  /**
   * Submit a result for the current task, carrying the version the
   * task was fetched at. A 409 means somebody advanced the task in the
   * meantime; the refreshed task is returned so the view can show a
   * conflict banner and re-render.
   */
  async submit(payload: ResultPayload): Promise<SubmitOutcome> {
    if (this.current === null) {
      throw new Error('no task loaded');
    }
    const sent = this.current;
    try {
      const task = await this.api.submitResult(
        sent.task_id,
        sent.version,
        payload,
        this.annotatorId,
      );
      this.current = task;
      this.clearUndo();
      return { status: 'ok', task };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const task = await this.api.getTask(sent.task_id);
        this.current = task;
        if (appliedByThisSubmission(sent, payload, task)) {
          // The server applied our write but the response got lost and
          // the retry saw a stale version. Same final state either way.
          this.clearUndo();
          return { status: 'ok', task };
        }
        return { status: 'conflict', task };
      }
      throw err;
    }
  }

  /**
   * Submit with retries over flaky transport. Retrying a submission
   * that already landed resolves to ok through the 409 path above, so
   * a retry never double-applies.
   */
  async submitWithRetry(payload: ResultPayload, attempts = 3): Promise<SubmitOutcome> {
    let lastErr: unknown = null;
    for (let i = 0; i < attempts; i++) {
      try {
        return await this.submit(payload);
      } catch (err) {
        if (err instanceof ApiError) {
          throw err; // the server spoke; only transport errors retry
        }
        lastErr = err;
      }
    }
    throw lastErr instanceof Error ? lastErr : new Error(String(lastErr));
  }
}

/**
 * After a 409, decide whether the task state is exactly what our own
 * submission would have produced: one version ahead and at the stage
 * the payload leads to.
 */
function appliedByThisSubmission(
  sent: TaskJson,
  payload: ResultPayload,
  now: TaskJson,
): boolean {
  return now.version === sent.version + 1 && now.stage === stageAfter(payload);
}
