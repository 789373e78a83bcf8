/** Thin typed client over the /v1 endpoints; the UI performs no local
 * re-derivation of any score, every number displayed round-trips the server. */

import type {
  ApiError,
  DatasetInfo,
  ExplainRequest,
  ExplanationSet,
  IndividualRow,
  Prediction,
  Schema,
} from './types';

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiError;

  constructor(status: number, body: ApiError) {
    super(body.error || `request failed (${status})`);
    this.status = status;
    this.body = body;
  }
}

export class Client {
  constructor(readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      headers: { 'content-type': 'application/json' },
      ...init,
    });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiRequestError(resp.status, body as ApiError);
    }
    return body as T;
  }

  datasets(): Promise<DatasetInfo[]> {
    return this.request('/v1/datasets');
  }

  schema(dataset: string): Promise<Schema> {
    return this.request(`/v1/datasets/${encodeURIComponent(dataset)}/schema`);
  }

  individuals(dataset: string, label = 'positive', limit = 25): Promise<IndividualRow[]> {
    const params = new URLSearchParams({ label, limit: String(limit) });
    return this.request(`/v1/datasets/${encodeURIComponent(dataset)}/individuals?${params}`);
  }

  probe(dataset: string, record: Record<string, number | string>, model?: string): Promise<Prediction> {
    return this.request('/v1/probe', {
      method: 'POST',
      body: JSON.stringify({ dataset, record, model }),
    });
  }

  explain(req: ExplainRequest): Promise<ExplanationSet> {
    return this.request('/v1/explain', { method: 'POST', body: JSON.stringify(req) });
  }
}
