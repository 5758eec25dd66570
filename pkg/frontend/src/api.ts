// Typed client for the annotation service. Every interaction of the UI
// with the rest of the system goes through this class and therefore
// through HTTP.

import {
  CandidateListJson,
  ResultPayload,
  SceneJson,
  SolveResultJson,
  Stage,
  TaskJson,
  TrackDocJson,
} from './types.js';

export class ApiError extends Error {
  status: number;
  detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.detail === 'string') {
      return body.detail;
    }
    return JSON.stringify(body);
  } catch {
    return res.statusText;
  }
}

export class ApiClient {
  readonly baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    // Bind so a bare window.fetch keeps its receiver.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return (await res.json()) as T;
  }

  getScene(sceneId: string): Promise<SceneJson> {
    return this.getJson(`/api/scenes/${sceneId}`);
  }

  frameImageUrl(sceneId: string, frameId: number): string {
    return `${this.baseUrl}/api/scenes/${sceneId}/frames/${frameId}/image`;
  }

  async getSceneTracks(sceneId: string): Promise<TrackDocJson[]> {
    const body = await this.getJson<{ tracks: TrackDocJson[] }>(
      `/api/scenes/${sceneId}/tracks`,
    );
    return body.tracks;
  }

  getTrack(trackId: string): Promise<TrackDocJson> {
    return this.getJson(`/api/tracks/${trackId}`);
  }

  postTrack(doc: TrackDocJson): Promise<{ track_id: string; task: TaskJson }> {
    return this.postJson('/api/tracks', doc);
  }

  getCandidates(trackId: string): Promise<CandidateListJson> {
    return this.getJson(`/api/tracks/${trackId}/candidates`);
  }

  /** OBJ text of a model mesh. */
  async getMesh(modelId: string): Promise<string> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/models/${modelId}/mesh`);
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return res.text();
  }

  /** Solved pose for a track, or null while no solve has run. */
  async getSolveResult(trackId: string): Promise<SolveResultJson | null> {
    try {
      return await this.getJson<SolveResultJson>(`/api/tracks/${trackId}/solve-result`);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        return null;
      }
      throw err;
    }
  }

  /** Oldest open task at a stage, or null when the queue is empty. */
  async nextTask(stage: Stage): Promise<TaskJson | null> {
    try {
      return await this.getJson<TaskJson>(`/api/tasks/next?stage=${stage}`);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        return null;
      }
      throw err;
    }
  }

  getTask(taskId: string): Promise<TaskJson> {
    return this.getJson(`/api/tasks/${taskId}`);
  }

  /**
   * Submit a stage result. The version must be the one the task was
   * fetched at; the server rejects anything stale with a 409.
   */
  submitResult(
    taskId: string,
    version: number,
    payload: ResultPayload,
    annotatorId?: string,
  ): Promise<TaskJson> {
    const body: Record<string, unknown> = { version, payload };
    if (annotatorId) {
      body.annotator_id = annotatorId;
    }
    return this.postJson(`/api/tasks/${taskId}/result`, body);
  }
}
