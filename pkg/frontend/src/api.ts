/**
 * Typed client for the /api/v1 annotation endpoints.
 *
 * The fetch implementation is injectable so tests can run against an
 * in-memory server. Server-side rejections surface as ApiError with the
 * server's detail text verbatim; network failures surface as the
 * original TypeError so the caller can queue the submission.
 */

import {
  AnnotationTask,
  CueEntryView,
  LabelPayload,
  ProgressRow,
  SubmitAck,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ExhaustedError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ExhaustedError";
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.url(path));
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }

  /** Next task for the annotator; ExhaustedError when nothing remains. */
  async nextTask(annotator: string): Promise<AnnotationTask> {
    const path = `/api/v1/tasks/next?annotator=${encodeURIComponent(annotator)}`;
    const response = await this.fetchImpl(this.url(path));
    if (response.status === 404) {
      throw new ExhaustedError(await detailOf(response));
    }
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as AnnotationTask;
  }

  async submitLabel(payload: LabelPayload): Promise<SubmitAck> {
    return this.postJson<SubmitAck>("/api/v1/labels", payload);
  }

  async defer(sentenceId: string, annotator: string): Promise<void> {
    await this.postJson("/api/v1/tasks/defer", {
      sentence_id: sentenceId,
      annotator,
    });
  }

  async listCues(): Promise<CueEntryView[]> {
    const body = await this.getJson<{ phrases: CueEntryView[] }>("/api/v1/cues");
    return body.phrases;
  }

  async addCue(phrase: string, syntacticType = "conjunction"): Promise<boolean> {
    const body = await this.postJson<{ added: boolean }>("/api/v1/cues", {
      phrase,
      syntactic_type: syntacticType,
    });
    return body.added;
  }

  async progress(annotator: string): Promise<ProgressRow> {
    const body = await this.getJson<Record<string, ProgressRow>>(
      `/api/v1/progress?annotator=${encodeURIComponent(annotator)}`,
    );
    const row = body[annotator];
    if (!row) throw new ApiError(404, `no progress for ${annotator}`);
    return row;
  }

  async exportLabels(): Promise<string> {
    const body = await this.getJson<{ labels: string }>("/api/v1/export");
    return body.labels;
  }
}
