/**
 * Pure HTML/SVG string rendering.
 *
 * Every number an analyst reads is a literal token lifted from the raw
 * API response (see arrayLiterals/scalarLiteral); parsed values are
 * used only to place pixels. Mean paths are solid, the +/- 2 sd band
 * edges are dashed.
 */

import { arrayLiterals, scalarLiteral } from './api.js';
import type { ExplorerState, ScenarioCard } from './state.js';

const WIDTH = 640;
const HEIGHT = 320;
const MARGIN = 42;

function escapeHtml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export interface CardNumbers {
  horizons: string[];
  mean: string[];
  sd: string[];
  lo: string[];
  hi: string[];
}

/** Literal display tokens for one card, straight from the response bytes. */
export function cardNumbers(card: ScenarioCard): CardNumbers {
  return {
    horizons: arrayLiterals(card.raw, 'horizons'),
    mean: arrayLiterals(card.raw, 'mean'),
    sd: arrayLiterals(card.raw, 'sd'),
    lo: arrayLiterals(card.raw, 'lo'),
    hi: arrayLiterals(card.raw, 'hi'),
  };
}

export function renderCardTable(card: ScenarioCard): string {
  const nums = cardNumbers(card);
  const rows = nums.horizons
    .map(
      (h, i) =>
        `<tr><td>${h}</td><td>${nums.mean[i]}</td><td>${nums.sd[i]}</td>` +
        `<td>${nums.lo[i]}</td><td>${nums.hi[i]}</td></tr>`,
    )
    .join('');
  return (
    `<table class="card-table" data-card="${escapeHtml(card.id)}">` +
    `<caption>${escapeHtml(card.label)}</caption>` +
    '<thead><tr><th>horizon</th><th>mean</th><th>sd</th><th>lo</th><th>hi</th></tr></thead>' +
    `<tbody>${rows}</tbody></table>`
  );
}

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) {
    return (outLo + outHi) / 2;
  }
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

function pathFor(
  xs: number[],
  ys: number[],
  xDomain: [number, number],
  yDomain: [number, number],
): string {
  return xs
    .map((x, i) => {
      const px = scale(x, xDomain[0], xDomain[1], MARGIN, WIDTH - MARGIN);
      const py = scale(ys[i], yDomain[0], yDomain[1], HEIGHT - MARGIN, MARGIN);
      return `${i === 0 ? 'M' : 'L'}${px.toFixed(1)},${py.toFixed(1)}`;
    })
    .join(' ');
}

/** Forecast fan: solid means, dashed +/- 2 sd edges, one color per card. */
export function renderFanChart(cards: ScenarioCard[]): string {
  if (cards.length === 0) {
    return '<svg class="fan-chart" viewBox="0 0 640 320"></svg>';
  }
  const allH = cards.flatMap((c) => c.series.horizons);
  const allLo = cards.flatMap((c) => c.series.lo);
  const allHi = cards.flatMap((c) => c.series.hi);
  const xDomain: [number, number] = [Math.min(...allH), Math.max(...allH)];
  const yDomain: [number, number] = [Math.min(...allLo), Math.max(...allHi)];

  const parts = cards.map((card) => {
    const s = card.series;
    const mean = pathFor(s.horizons, s.mean, xDomain, yDomain);
    const lo = pathFor(s.horizons, s.lo, xDomain, yDomain);
    const hi = pathFor(s.horizons, s.hi, xDomain, yDomain);
    return (
      `<g data-card="${escapeHtml(card.id)}">` +
      `<path d="${mean}" fill="none" stroke="${card.color}" stroke-width="2"/>` +
      `<path d="${lo}" fill="none" stroke="${card.color}" stroke-dasharray="5,4"/>` +
      `<path d="${hi}" fill="none" stroke="${card.color}" stroke-dasharray="5,4"/>` +
      '</g>'
    );
  });
  return (
    `<svg class="fan-chart" viewBox="0 0 ${WIDTH} ${HEIGHT}">` +
    `<rect x="${MARGIN}" y="${MARGIN}" width="${WIDTH - 2 * MARGIN}" ` +
    `height="${HEIGHT - 2 * MARGIN}" fill="none" stroke="#ccc"/>` +
    parts.join('') +
    '</svg>'
  );
}

export function renderRecoveryPanel(state: ExplorerState): string {
  if (!state.recovery) {
    return '<div class="recovery-panel" data-empty="true"></div>';
  }
  const raw = state.recovery.raw;
  const beta = scalarLiteral(raw, 'beta_months');
  const nu = scalarLiteral(raw, 'nu');
  const k = scalarLiteral(raw, 'k');
  const n = scalarLiteral(raw, 'n');
  const intervention = state.recovery.payload.intervention;
  let aided = '';
  if (intervention && intervention.beta_months !== undefined) {
    const tokens = findAllLiterals(raw, 'beta_months');
    const aidedToken = tokens.length > 1 ? tokens[1] : tokens[0];
    aided = `<p>with intervention: <strong data-field="beta-aided">${aidedToken}</strong> months</p>`;
  }
  return (
    '<div class="recovery-panel">' +
    `<p>steady-state mean <span data-field="nu">${nu}</span>, congestion ` +
    `<span data-field="n">${n}</span>, target <span data-field="k">${k}</span></p>` +
    `<p>recovery time: <strong data-field="beta">${beta}</strong> months</p>` +
    aided +
    '</div>'
  );
}

function findAllLiterals(raw: string, key: string): string[] {
  const out: string[] = [];
  const re = new RegExp(`"${key}"\\s*:\\s*(-?[0-9][0-9eE+.-]*)`, 'g');
  let m: RegExpExecArray | null;
  while ((m = re.exec(raw)) !== null) {
    out.push(m[1]);
  }
  return out;
}

export function renderBanner(state: ExplorerState): string {
  if (!state.banner) {
    return '';
  }
  return `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>`;
}

export function renderFooter(state: ExplorerState): string {
  const seed = state.seed === null ? 'n/a' : String(state.seed);
  const version = state.engineVersion ?? 'unknown';
  return (
    `<footer>engine ${escapeHtml(version)} · seed ${escapeHtml(seed)} · ` +
    `mode ${state.mode}</footer>`
  );
}

/** Whole-app render; a stored session re-renders to the identical string. */
export function renderApp(state: ExplorerState): string {
  const tables = state.cards.map(renderCardTable).join('');
  return (
    renderBanner(state) +
    renderFanChart(state.cards) +
    tables +
    renderRecoveryPanel(state) +
    renderFooter(state)
  );
}
