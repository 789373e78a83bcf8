/** Debounced what-if probe: live score/label refresh while feature values
 * are dragged, with crossing flagged and a stale badge on network failure. */

import { Client } from './api';
import type { Prediction } from './types';

export const PROBE_DEBOUNCE_MS = 150;

export interface ProbeView {
  update(p: Prediction): void;
  stale(retry: () => void): void;
}

export class WhatIfProbe {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = 0;
  private lastApplied = 0;

  constructor(
    private readonly client: Client,
    private readonly view: ProbeView,
    private readonly debounceMs: number = PROBE_DEBOUNCE_MS,
  ) {}

  /** Schedule a probe of the edited record; rapid edits collapse into one. */
  schedule(dataset: string, record: Record<string, number | string>, model?: string): void {
    if (this.timer) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(dataset, record, model);
    }, this.debounceMs);
  }

  private async fire(dataset: string, record: Record<string, number | string>, model?: string) {
    const ticket = ++this.inFlight;
    try {
      const prediction = await this.client.probe(dataset, record, model);
      if (ticket >= this.lastApplied) {
        this.lastApplied = ticket;
        this.view.update(prediction);
      }
    } catch {
      this.view.stale(() => void this.fire(dataset, record, model));
    }
  }
}

export function renderPrediction(root: HTMLElement, p: Prediction, psi: number): void {
  root.textContent = '';
  root.classList.remove('stale');
  const score = document.createElement('span');
  score.className = 'probe-score';
  score.textContent = p.score.toFixed(4);
  const label = document.createElement('span');
  label.className = p.label === 1 ? 'probe-label positive' : 'probe-label negative';
  label.textContent = p.label === 1 ? 'positive outcome' : 'crossed the boundary';
  root.append(score, label);
  root.classList.toggle('boundary-crossed', p.score <= psi);
}
