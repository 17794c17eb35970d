// Typed client for the reviewd HTTP API. Every server interaction in the
// UI goes through this module; nothing else touches the network.

import type {
  CorrectionBody,
  MutationResponse,
  VideoEventsResponse,
  VideoListResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(message, 409);
  }
}

/** 422 from the server: a correction violated a manifest invariant. */
export class ValidationRejection extends ApiError {
  constructor(message: string, readonly invariant: string) {
    super(message, 422);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let detail: unknown = null;
  try {
    detail = (await response.json()).detail;
  } catch {
    // non-JSON error body
  }
  if (response.status === 409) {
    throw new ConflictError(typeof detail === 'string' ? detail : 'revision conflict');
  }
  if (response.status === 422 && detail && typeof detail === 'object') {
    const d = detail as { message?: string; invariant?: string };
    throw new ValidationRejection(d.message ?? 'validation failed', d.invariant ?? 'unknown');
  }
  const text = typeof detail === 'string' ? detail : response.statusText;
  throw new ApiError(`${response.status}: ${text}`, response.status);
}

export class ReviewApi {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await raiseFor(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) await raiseFor(response);
    return (await response.json()) as T;
  }

  listVideos(state?: string, pageToken?: string, pageSize = 50): Promise<VideoListResponse> {
    const params = new URLSearchParams({ page_size: String(pageSize) });
    if (state) params.set('state', state);
    if (pageToken) params.set('page_token', pageToken);
    return this.get(`/videos?${params}`);
  }

  getEvents(videoId: string): Promise<VideoEventsResponse> {
    return this.get(`/videos/${encodeURIComponent(videoId)}/events`);
  }

  flag(eventKey: string, reason: string, baseRevision: number): Promise<MutationResponse> {
    return this.post(`/events/${encodeURIComponent(eventKey)}/flag`, {
      reason,
      base_revision: baseRevision,
    });
  }

  correct(eventKey: string, body: CorrectionBody): Promise<MutationResponse> {
    return this.post(`/events/${encodeURIComponent(eventKey)}/correction`, body);
  }

  approve(eventKey: string, baseRevision: number): Promise<MutationResponse> {
    return this.post(`/events/${encodeURIComponent(eventKey)}/approve`, {
      base_revision: baseRevision,
    });
  }

  async exportManifest(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/export`);
    if (!response.ok) await raiseFor(response);
    return response.text();
  }
}
