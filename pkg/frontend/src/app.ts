/** Explorer wiring: dataset/individual selection, constraint editing,
 * explanation requests (one in flight at a time), and the live what-if
 * probe panel. */

import { ApiRequestError, Client } from './api';
import { renderConstraintEditor } from './constraints';
import { renderExplanation, renderPinned } from './explanationView';
import { WhatIfProbe, renderPrediction } from './probe';
import { Session } from './state';
import type { DatasetInfo, IndividualRow, Schema } from './types';

interface Elements {
  dataset: HTMLSelectElement;
  model: HTMLSelectElement;
  individual: HTMLSelectElement;
  method: HTMLSelectElement;
  m: HTMLInputElement;
  seed: HTMLInputElement;
  explain: HTMLButtonElement;
  status: HTMLElement;
  constraints: HTMLElement;
  explanation: HTMLElement;
  pinned: HTMLElement;
  whatif: HTMLElement;
  probe: HTMLElement;
  reset: HTMLButtonElement;
}

const NONCAUSAL_METHODS = ['sgen', 'dice_star', 'piece_star', 'dser_star'];
const CAUSAL_METHODS = ['sgen', 'karimi_star', 'dominguez_star'];

export class App {
  private schema: Schema | null = null;
  private datasets: DatasetInfo[] = [];
  private individuals: IndividualRow[] = [];
  private baseline: Record<string, number | string> = {};
  private edited: Record<string, number | string> = {};
  private busy = false;
  private probe: WhatIfProbe;

  constructor(
    private readonly client: Client,
    private readonly session: Session,
    private readonly el: Elements,
  ) {
    this.probe = new WhatIfProbe(client, {
      update: (p) => renderPrediction(this.el.probe, p, this.schema?.psi ?? 0.5),
      stale: (retry) => {
        this.el.probe.classList.add('stale');
        const btn = document.createElement('button');
        btn.textContent = 'retry';
        btn.addEventListener('click', retry);
        this.el.probe.appendChild(btn);
      },
    });
  }

  async start(): Promise<void> {
    this.datasets = await this.client.datasets();
    fillSelect(this.el.dataset, this.datasets.map((d) => d.id));
    if (this.session.dataset && this.datasets.some((d) => d.id === this.session.dataset)) {
      this.el.dataset.value = this.session.dataset;
    }
    this.el.dataset.addEventListener('change', () => void this.onDataset());
    this.el.individual.addEventListener('change', () => this.onIndividual());
    this.el.explain.addEventListener('click', () => void this.onExplain());
    this.el.reset.addEventListener('click', () => this.resetEdits());
    await this.onDataset();
  }

  private info(): DatasetInfo | undefined {
    return this.datasets.find((d) => d.id === this.el.dataset.value);
  }

  private async onDataset(): Promise<void> {
    const id = this.el.dataset.value;
    this.session.dataset = id;
    this.session.overrides = {};
    this.session.persist();
    this.schema = await this.client.schema(id);
    const info = this.info();
    fillSelect(this.el.model, info?.models ?? []);
    if (info) this.el.model.value = info.default_model;
    fillSelect(this.el.method, info?.causal ? CAUSAL_METHODS : NONCAUSAL_METHODS);
    this.individuals = await this.client.individuals(id, 'positive', 25);
    fillSelect(this.el.individual, this.individuals.map((i) => `${i.id} (score ${i.score.toFixed(3)})`),
               this.individuals.map((i) => i.id));
    if (this.session.individual && this.individuals.some((i) => i.id === this.session.individual)) {
      this.el.individual.value = this.session.individual;
    }
    renderConstraintEditor(this.el.constraints, this.schema, this.session, () => this.syncControls());
    this.onIndividual();
  }

  private onIndividual(): void {
    this.session.individual = this.el.individual.value || null;
    this.session.persist();
    const row = this.individuals.find((i) => i.id === this.session.individual);
    this.baseline = row ? { ...row.record } : {};
    this.resetEdits();
    this.syncControls();
  }

  private syncControls(): void {
    this.el.explain.disabled = this.busy || !this.schema || !this.session.individual;
  }

  private async onExplain(): Promise<void> {
    if (this.busy || !this.schema) return; // single in-flight request per session
    const built = this.session.buildRequest(this.schema, {
      method: this.el.method.value,
      m: Number(this.el.m.value) || 1,
      seed: Number(this.el.seed.value) || 0,
      model: this.el.model.value || undefined,
    });
    if (!built.request) {
      this.el.status.textContent = built.error ?? 'invalid request';
      return;
    }
    this.busy = true;
    this.syncControls();
    this.el.status.textContent = 'searching…';
    try {
      const response = await this.client.explain(built.request);
      this.session.record(built.request, response);
      this.el.status.textContent = '';
      renderExplanation(this.el.explanation, this.schema, response, (idx) => {
        this.session.pin(this.session.history[0], idx);
        this.renderPins();
      });
    } catch (err) {
      if (err instanceof ApiRequestError && err.body.kind === 'no-effective-semifactual') {
        renderExplanation(this.el.explanation, this.schema, null);
        this.el.status.textContent = '';
      } else {
        this.el.status.textContent = err instanceof Error ? err.message : 'request failed';
      }
    } finally {
      this.busy = false;
      this.syncControls();
    }
  }

  private renderPins(): void {
    if (!this.schema) return;
    renderPinned(this.el.pinned, this.schema, this.session.pinned, (i) => {
      this.session.unpin(i);
      this.renderPins();
    });
  }

  private resetEdits(): void {
    this.edited = { ...this.baseline };
    this.renderWhatIf();
    if (this.session.dataset && Object.keys(this.edited).length) {
      this.probe.schedule(this.session.dataset, this.edited, this.el.model.value || undefined);
    }
  }

  private renderWhatIf(): void {
    const root = this.el.whatif;
    root.textContent = '';
    if (!this.schema) return;
    for (const spec of this.schema.features) {
      const row = document.createElement('label');
      row.className = 'whatif-row';
      const name = document.createElement('span');
      name.textContent = spec.name;
      row.appendChild(name);
      if (spec.kind === 'continuous') {
        const input = document.createElement('input');
        input.type = 'range';
        const [lo, hi] = spec.scale ?? spec.bounds ?? [0, 1];
        input.min = String(lo);
        input.max = String(hi);
        input.step = String((Number(hi) - Number(lo)) / 200);
        input.value = String(this.edited[spec.name] ?? lo);
        input.addEventListener('input', () => {
          this.edited[spec.name] = Number(input.value);
          this.scheduleProbe();
        });
        row.appendChild(input);
      } else {
        const select = document.createElement('select');
        for (const level of spec.levels ?? []) {
          const opt = document.createElement('option');
          opt.value = level;
          opt.textContent = level;
          select.appendChild(opt);
        }
        select.value = String(this.edited[spec.name] ?? '');
        select.addEventListener('change', () => {
          this.edited[spec.name] = select.value;
          this.scheduleProbe();
        });
        row.appendChild(select);
      }
      root.appendChild(row);
    }
  }

  private scheduleProbe(): void {
    if (this.session.dataset) {
      this.probe.schedule(this.session.dataset, this.edited, this.el.model.value || undefined);
    }
  }
}

function fillSelect(select: HTMLSelectElement, labels: string[], values?: string[]): void {
  select.textContent = '';
  labels.forEach((label, i) => {
    const opt = document.createElement('option');
    opt.value = values ? values[i] : label;
    opt.textContent = label;
    select.appendChild(opt);
  });
}

export function bootstrap(baseUrl = ''): App {
  const byId = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
  const app = new App(new Client(baseUrl), Session.load(window.localStorage), {
    dataset: byId('dataset'),
    model: byId('model'),
    individual: byId('individual'),
    method: byId('method'),
    m: byId('m'),
    seed: byId('seed'),
    explain: byId('explain'),
    status: byId('status'),
    constraints: byId('constraints'),
    explanation: byId('explanation'),
    pinned: byId('pinned'),
    whatif: byId('whatif'),
    probe: byId('probe'),
    reset: byId('reset'),
  });
  void app.start();
  return app;
}

declare global {
  interface Window {
    evenifBootstrap: typeof bootstrap;
  }
}

if (typeof window !== 'undefined') {
  window.evenifBootstrap = bootstrap;
}
