// Typed client for the prediction service. Every number shown in the UI
// comes from these responses; the client never post-processes scores.

import type {
  ApiErrorBody,
  ModelInfo,
  PredictRequest,
  PredictResponse,
  RepurposeResponse,
} from "./types.js";

export class ValidationError extends Error {
  readonly body: ApiErrorBody;

  constructor(body: ApiErrorBody) {
    super(body.message);
    this.body = body;
  }
}

export class HttpError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body?.message ?? `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (response.status === 422) {
      throw new ValidationError(body as ApiErrorBody);
    }
    if (!response.ok) {
      throw new HttpError(response.status, body as ApiErrorBody | null);
    }
    return body as T;
  }

  predict(request: PredictRequest): Promise<PredictResponse> {
    return this.request<PredictResponse>("/api/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  models(): Promise<ModelInfo[]> {
    return this.request<ModelInfo[]>("/api/models");
  }

  repurpose(sequence: string, libraryId: string, ensemble?: string[]): Promise<RepurposeResponse> {
    return this.request<RepurposeResponse>("/api/repurpose", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ sequence, library_id: libraryId, ensemble }),
    });
  }
}
