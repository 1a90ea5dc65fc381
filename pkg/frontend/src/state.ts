/**
 * Explorer session state and its reducer.
 *
 * The state is a plain serializable value: scenario cards are frozen
 * snapshots carrying the API payload plus the raw response text they
 * came from, so reloading a stored session reproduces the exact same
 * charts. The baseline card is created when the fit's first forecast
 * arrives and can never be edited or removed.
 */

import type { InterventionSpec, PredictionPayload, RecoverResponse } from './types.js';

export const BASELINE_ID = 'baseline';

export interface ScenarioCard {
  id: string;
  label: string;
  intervention: InterventionSpec | null; // null marks the baseline
  series: PredictionPayload;
  raw: string;
  color: string;
}

export interface RecoveryView {
  payload: RecoverResponse;
  raw: string;
}

export interface ExplorerState {
  seriesId: string | null;
  sessionId: string | null;
  fitStatus: 'idle' | 'running' | 'done' | 'failed';
  fitDetail: string | null;
  mode: 'long_term' | 'short_term';
  cards: ScenarioCard[];
  recovery: RecoveryView | null;
  banner: string | null;
  seed: number | null;
  engineVersion: string | null;
}

export type Action =
  | { type: 'series-loaded'; seriesId: string }
  | { type: 'fit-started'; sessionId: string }
  | { type: 'fit-status'; status: 'running' | 'done' | 'failed'; detail?: string }
  | { type: 'baseline-loaded'; payload: PredictionPayload; raw: string }
  | { type: 'card-added'; card: ScenarioCard }
  | { type: 'card-removed'; id: string }
  | { type: 'mode-toggled' }
  | { type: 'recovery-loaded'; payload: RecoverResponse; raw: string }
  | { type: 'api-error'; message: string }
  | { type: 'banner-cleared' };

export function initialState(): ExplorerState {
  return {
    seriesId: null,
    sessionId: null,
    fitStatus: 'idle',
    fitDetail: null,
    mode: 'long_term',
    cards: [],
    recovery: null,
    banner: null,
    seed: null,
    engineVersion: null,
  };
}

const CARD_COLORS = ['#d62728', '#2ca02c', '#1f77b4', '#9467bd', '#8c564b', '#e377c2'];

export function makeCard(
  id: string,
  label: string,
  intervention: InterventionSpec | null,
  payload: PredictionPayload,
  raw: string,
  index: number,
): ScenarioCard {
  return Object.freeze({
    id,
    label,
    intervention,
    series: payload,
    raw,
    color: intervention === null ? '#444444' : CARD_COLORS[index % CARD_COLORS.length],
  });
}

/** Pure state transition; invalid actions surface as banners, never throws. */
export function exploreSession(state: ExplorerState, action: Action): ExplorerState {
  switch (action.type) {
    case 'series-loaded':
      return {
        ...initialState(),
        seriesId: action.seriesId,
        engineVersion: state.engineVersion,
      };

    case 'fit-started':
      return {
        ...state,
        sessionId: action.sessionId,
        fitStatus: 'running',
        fitDetail: null,
        cards: [],
        banner: null,
      };

    case 'fit-status': {
      const banner =
        action.status === 'failed'
          ? `Fit did not converge: ${action.detail ?? 'no detail'}. Scenario actions are blocked.`
          : state.banner;
      return { ...state, fitStatus: action.status, fitDetail: action.detail ?? null, banner };
    }

    case 'baseline-loaded': {
      const baseline = makeCard(
        BASELINE_ID,
        'Baseline forecast',
        null,
        action.payload,
        action.raw,
        0,
      );
      const rest = state.cards.filter((c) => c.id !== BASELINE_ID);
      return {
        ...state,
        cards: [baseline, ...rest],
        seed: action.payload.seed,
        engineVersion: action.payload.engine_version,
      };
    }

    case 'card-added': {
      if (action.card.id === BASELINE_ID) {
        return { ...state, banner: 'The baseline card cannot be replaced.' };
      }
      if (state.fitStatus !== 'done') {
        return {
          ...state,
          banner: 'Scenarios need a converged fit; wait for the fit to finish.',
        };
      }
      // reconcile by id: a card re-posed with the same id is replaced
      const cards = state.cards.filter((c) => c.id !== action.card.id);
      return { ...state, cards: [...cards, action.card], banner: null };
    }

    case 'card-removed':
      if (action.id === BASELINE_ID) {
        return { ...state, banner: 'The baseline card cannot be removed.' };
      }
      return { ...state, cards: state.cards.filter((c) => c.id !== action.id) };

    case 'mode-toggled':
      return { ...state, mode: state.mode === 'long_term' ? 'short_term' : 'long_term' };

    case 'recovery-loaded':
      return { ...state, recovery: { payload: action.payload, raw: action.raw } };

    case 'api-error':
      return { ...state, banner: action.message };

    case 'banner-cleared':
      return { ...state, banner: null };
  }
}

export function baselineCard(state: ExplorerState): ScenarioCard | null {
  return state.cards.find((c) => c.id === BASELINE_ID) ?? null;
}
