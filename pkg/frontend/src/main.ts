/**
 * DOM glue: wires the controls to the API client and re-renders on
 * every state transition. All numerical content comes from the engine.
 */

import { ApiClient, ApiError } from './api.js';
import {
  Action,
  ExplorerState,
  exploreSession,
  initialState,
  makeCard,
} from './state.js';
import { renderApp } from './render.js';
import type { MonthCount } from './types.js';

const STORAGE_KEY = 'occq-explorer-session';

function restore(): ExplorerState {
  try {
    const stored = window.localStorage.getItem(STORAGE_KEY);
    if (stored) {
      return JSON.parse(stored) as ExplorerState;
    }
  } catch {
    // fall through to a fresh session
  }
  return initialState();
}

export function startApp(root: HTMLElement, apiBase: string): void {
  const client = new ApiClient(apiBase);
  let state = restore();
  let cardCounter = 0;

  const view = document.createElement('div');
  view.className = 'explorer';
  root.appendChild(view);

  function dispatch(action: Action): void {
    state = exploreSession(state, action);
    window.localStorage.setItem(STORAGE_KEY, JSON.stringify(state));
    view.innerHTML = renderApp(state);
  }

  function onError(err: unknown): void {
    const message =
      err instanceof ApiError ? `API error ${err.status}: ${err.message}` : String(err);
    dispatch({ type: 'api-error', message });
  }

  async function pollFit(sessionId: string): Promise<void> {
    for (;;) {
      const { payload } = await client.fitStatus(sessionId);
      dispatch({ type: 'fit-status', status: payload.status, detail: payload.detail });
      if (payload.status !== 'running') {
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, 500));
    }
  }

  const horizons = [1, 2, 3, 4, 5, 6, 7, 8];

  const controls = document.createElement('div');
  controls.className = 'controls';
  controls.innerHTML = `
    <textarea id="series-input" rows="4"
      placeholder='[{"month": "2019-01", "count": 5000}, ...]'></textarea>
    <input id="mean-service" type="number" value="5.22" step="0.01" min="0.1">
    <button id="load-fit">Load series &amp; fit</button>
    <label>new mean service time
      <input id="es-slider" type="range" min="1" max="12" step="0.01" value="5.22">
      <span id="es-value">5.22</span>
    </label>
    <button id="add-scenario">Add scenario card</button>
    <button id="toggle-mode">Toggle long/short term</button>
    <fieldset class="recovery">
      <input id="rec-lam" type="number" value="10"> <input id="rec-es" type="number" value="3">
      <input id="rec-alpha" type="number" value="3"> <input id="rec-n" type="number" value="60">
      <input id="rec-k" type="number" value="31">
      <label><input id="rec-scale" type="checkbox"> scale arrivals by 0.8</label>
      <button id="run-recovery">Recovery time</button>
    </fieldset>
  `;
  root.insertBefore(controls, view);

  const $ = <T extends HTMLElement>(sel: string): T => {
    const el = controls.querySelector(sel);
    if (!el) {
      throw new Error(`missing control ${sel}`);
    }
    return el as T;
  };

  $('#es-slider').addEventListener('input', () => {
    $('#es-value').textContent = $<HTMLInputElement>('#es-slider').value;
  });

  $('#load-fit').addEventListener('click', async () => {
    try {
      const months = JSON.parse($<HTMLTextAreaElement>('#series-input').value) as MonthCount[];
      const meanService = Number($<HTMLInputElement>('#mean-service').value);
      const series = await client.uploadSeries('series', months);
      dispatch({ type: 'series-loaded', seriesId: series.payload.series_id });
      const fit = await client.startFit(
        series.payload.series_id,
        { beta0: [920, 80], beta1: [-6, 4], mean_service: meanService },
        { chains: 2, iterations: 10000, seed: 0 },
      );
      dispatch({ type: 'fit-started', sessionId: fit.payload.session_id });
      await pollFit(fit.payload.session_id);
      if (state.fitStatus === 'done') {
        const baseline = await client.predict(fit.payload.session_id, horizons, state.mode);
        dispatch({ type: 'baseline-loaded', payload: baseline.payload, raw: baseline.raw });
      }
    } catch (err) {
      onError(err);
    }
  });

  $('#add-scenario').addEventListener('click', async () => {
    if (!state.sessionId || state.fitStatus !== 'done') {
      dispatch({
        type: 'api-error',
        message: 'Scenarios need a converged fit; load a series and fit first.',
      });
      return;
    }
    try {
      const esNew = Number($<HTMLInputElement>('#es-slider').value);
      const result = await client.scenario(state.sessionId, horizons, { E_S_new: esNew });
      cardCounter += 1;
      dispatch({
        type: 'card-added',
        card: makeCard(
          `scenario-${cardCounter}`,
          `mean service ${esNew} months`,
          { E_S_new: esNew },
          result.payload,
          result.raw,
          cardCounter,
        ),
      });
    } catch (err) {
      onError(err);
    }
  });

  $('#toggle-mode').addEventListener('click', () => dispatch({ type: 'mode-toggled' }));

  $('#run-recovery').addEventListener('click', async () => {
    try {
      const params = {
        lam: Number($<HTMLInputElement>('#rec-lam').value),
        E_S: Number($<HTMLInputElement>('#rec-es').value),
        alpha: Number($<HTMLInputElement>('#rec-alpha').value),
        n: Number($<HTMLInputElement>('#rec-n').value),
        k: Number($<HTMLInputElement>('#rec-k').value),
        ...($<HTMLInputElement>('#rec-scale').checked
          ? { intervention: { scale_lambda: 0.8 } }
          : {}),
      };
      const result = await client.recover(params);
      dispatch({ type: 'recovery-loaded', payload: result.payload, raw: result.raw });
    } catch (err) {
      onError(err);
    }
  });

  view.innerHTML = renderApp(state);
}
