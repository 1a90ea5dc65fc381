/**
 * HTTP client for the engine. Every call returns both the parsed body
 * and the raw response text: displayed numbers are lifted verbatim
 * from the raw bytes so nothing the analyst reads was re-serialized
 * (or worse, re-computed) in the browser.
 */

import type {
  FitStartResponse,
  FitStatusResponse,
  InterventionSpec,
  McmcPayload,
  MonthCount,
  PredictionPayload,
  PriorsPayload,
  RecoverResponse,
  SeriesResponse,
} from './types.js';

export interface ApiResult<T> {
  payload: T;
  raw: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<ApiResult<T>> {
    const init: RequestInit = { method, headers: { 'content-type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const raw = await res.text();
    if (!res.ok) {
      let detail = raw;
      try {
        const parsed = JSON.parse(raw);
        if (parsed && parsed.detail !== undefined) {
          detail = typeof parsed.detail === 'string' ? parsed.detail : JSON.stringify(parsed.detail);
        }
      } catch {
        // keep the raw body as the detail
      }
      throw new ApiError(res.status, detail);
    }
    return { payload: JSON.parse(raw) as T, raw };
  }

  health(): Promise<ApiResult<{ status: string; engine_version: string }>> {
    return this.request('GET', '/health');
  }

  uploadSeries(classId: string, months: MonthCount[]): Promise<ApiResult<SeriesResponse>> {
    return this.request('POST', '/series', { class_id: classId, months });
  }

  synthesizeSeries(
    classId: string,
    quarterly: { quarter: string; count: number }[],
    seed: number,
  ): Promise<ApiResult<SeriesResponse>> {
    return this.request('POST', '/series', { class_id: classId, quarterly, seed });
  }

  startFit(
    seriesId: string,
    priors: PriorsPayload,
    mcmc: McmcPayload,
  ): Promise<ApiResult<FitStartResponse>> {
    return this.request('POST', '/fit', { series_id: seriesId, priors, mcmc });
  }

  fitStatus(sessionId: string): Promise<ApiResult<FitStatusResponse>> {
    return this.request('GET', `/fit/${sessionId}`);
  }

  predict(
    sessionId: string,
    horizons: number[],
    mode: 'long_term' | 'short_term',
    actuals?: MonthCount[],
  ): Promise<ApiResult<PredictionPayload>> {
    const body: Record<string, unknown> = { session_id: sessionId, horizons, mode };
    if (actuals !== undefined) {
      body.actuals = actuals;
    }
    return this.request('POST', '/predict', body);
  }

  scenario(
    sessionId: string,
    horizons: number[],
    intervention: InterventionSpec,
  ): Promise<ApiResult<PredictionPayload>> {
    return this.request('POST', '/scenario', {
      session_id: sessionId,
      horizons,
      ...interventionBody(intervention),
    });
  }

  recover(params: {
    lam: number;
    E_S: number;
    alpha: number;
    n: number;
    k?: number;
    intervention?: { scale_lambda?: number; pause_then_resume?: number };
  }): Promise<ApiResult<RecoverResponse>> {
    return this.request('POST', '/recover', params);
  }
}

function interventionBody(spec: InterventionSpec): Record<string, unknown> {
  if ('E_S_new' in spec) {
    return { switch: { E_S_new: spec.E_S_new } };
  }
  if ('lambda_scale' in spec) {
    return { lambda_scale: spec.lambda_scale };
  }
  return { pause: true };
}

/**
 * Literal numeric tokens of a JSON array field, exactly as they appear
 * in the raw response text. Keeps the on-screen digits byte-identical
 * to what the engine sent.
 */
export function arrayLiterals(raw: string, key: string): string[] {
  const match = raw.match(new RegExp(`"${key}"\\s*:\\s*\\[([^\\]]*)\\]`));
  if (!match) {
    return [];
  }
  const inner = match[1].trim();
  if (inner === '') {
    return [];
  }
  return inner.split(',').map((tok) => tok.trim());
}

/** Literal token of a scalar JSON field in the raw response text. */
export function scalarLiteral(raw: string, key: string): string | null {
  const match = raw.match(new RegExp(`"${key}"\\s*:\\s*(-?[0-9][0-9eE+.-]*|null|true|false)`));
  return match ? match[1] : null;
}
