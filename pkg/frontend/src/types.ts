/**
 * Wire types mirroring the engine's published JSON schemas. The UI
 * never derives these numbers itself; it only carries them from the
 * API to the screen.
 */

export interface SeriesResponse {
  series_id: string;
  class_id: string;
  months: [number, number][];
  provenance: 'observed' | 'synthesized';
  engine_version: string;
  seed: number | null;
}

export interface FitStartResponse {
  session_id: string;
  status: 'running' | 'done' | 'failed';
  engine_version: string;
  seed: number | null;
}

export interface FitStatusResponse {
  session_id: string;
  status: 'running' | 'done' | 'failed';
  diagnostics?: {
    r_hat: Record<string, number>;
    ess: Record<string, number>;
    acceptance_rate: number[];
  };
  detail?: string;
  engine_version: string;
  seed: number | null;
}

export interface PredictionPayload {
  tau: number;
  horizons: number[];
  mean: number[];
  sd: number[];
  lo: number[];
  hi: number[];
  mode: string;
  class_id: string | null;
  intervention?: InterventionSpec;
  engine_version: string;
  seed: number | null;
}

export type InterventionSpec =
  | { E_S_new: number }
  | { lambda_scale: number }
  | { pause: true };

export interface RecoverResponse {
  nu: number;
  n: number;
  k: number;
  beta_months: number;
  intervention: null | {
    scale_lambda?: number;
    pause_then_resume?: number;
    beta_months?: number;
    schedule?: {
      phases: { label: string; duration: number; from_level: number; to_level: number }[];
      total: number;
    };
  };
  engine_version: string;
  seed: number | null;
}

export interface MonthCount {
  month: string;
  count: number;
}

export interface PriorsPayload {
  beta0: [number, number];
  beta1: [number, number];
  mean_service: number;
}

export interface McmcPayload {
  chains?: number;
  iterations?: number;
  warmup?: number | null;
  seed?: number;
}
