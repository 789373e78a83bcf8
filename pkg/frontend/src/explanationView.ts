/** Rendering of a returned explanation set: per-item deltas in raw units
 * (signed, polarity-colored), score badges, the set diversity, and the
 * rendered "Even if ..." sentences.  All numbers are server values. */

import type { ExplanationSet, FeatureSpec, Schema } from './types';

export function deltaClass(spec: FeatureSpec, delta: number): string {
  if (Math.abs(delta) < 1e-12) return 'delta-none';
  const sign = Math.sign(delta);
  if (spec.polarity === 'neutral') return 'delta-neutral';
  const positive = spec.polarity === 'positive' ? sign > 0 : sign < 0;
  return positive ? 'delta-positive' : 'delta-negative';
}

export function formatValue(value: number | string): string {
  if (typeof value === 'number') {
    return Number.isInteger(value) ? String(value) : value.toFixed(3).replace(/0+$/, '').replace(/\.$/, '');
  }
  return String(value);
}

export function renderExplanation(
  root: HTMLElement,
  schema: Schema,
  expl: ExplanationSet | null,
  onPin?: (itemIndex: number) => void,
): void {
  root.textContent = '';
  if (!expl || expl.items.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent =
      'No effective semifactual: every allowed change would cross the decision boundary.';
    root.appendChild(empty);
    return;
  }

  const summary = document.createElement('p');
  summary.className = 'set-summary';
  summary.textContent =
    `${expl.items.length} suggestion(s) via ${expl.method}, seed ${expl.seed}; ` +
    `set diversity ${expl.diversity.toFixed(4)}`;
  root.appendChild(summary);

  const table = document.createElement('table');
  table.className = 'explanation-table';
  const head = table.createTHead().insertRow();
  for (const text of ['#', ...schema.features.map((f) => f.name),
                      'gain', 'plausibility', 'robustness', 'kept label', 'pin']) {
    const th = document.createElement('th');
    th.textContent = text;
    head.appendChild(th);
  }
  const body = table.createTBody();
  expl.items.forEach((item, idx) => {
    const row = body.insertRow();
    row.insertCell().textContent = String(idx + 1);
    for (const spec of schema.features) {
      const cell = row.insertCell();
      const before = expl.individual_record[spec.name];
      const after = item.semifactual[spec.name];
      const changed = spec.kind === 'continuous'
        ? Math.abs(Number(after) - Number(before)) > 1e-9
        : String(after) !== String(before);
      if (!changed) {
        // unchanged features are rendered, never omitted
        cell.textContent = formatValue(after);
        cell.className = 'delta-none';
      } else if (spec.kind === 'continuous') {
        const delta = Number(after) - Number(before);
        cell.textContent = `${formatValue(before)} → ${formatValue(after)} (${delta > 0 ? '+' : ''}${formatValue(delta)})`;
        cell.className = deltaClass(spec, delta);
      } else {
        const levels = spec.levels ?? [];
        const delta = levels.indexOf(String(after)) - levels.indexOf(String(before));
        cell.textContent = `${before} → ${after}`;
        cell.className = deltaClass(spec, delta);
      }
    }
    badge(row.insertCell(), item.gain.toFixed(4), 'gain');
    badge(row.insertCell(), item.plausibility.toFixed(3), 'plausibility');
    badge(row.insertCell(), item.robustness_mc.toFixed(2), 'robustness');
    badge(row.insertCell(), item.robustness_abs === 1 ? 'yes' : 'NO', 'kept');
    const pinCell = row.insertCell();
    if (onPin) {
      const btn = document.createElement('button');
      btn.textContent = 'pin';
      btn.className = 'pin-button';
      btn.addEventListener('click', () => onPin(idx));
      pinCell.appendChild(btn);
    }
  });
  root.appendChild(table);

  const sentences = document.createElement('ul');
  sentences.className = 'sentences';
  for (const s of expl.sentences ?? []) {
    const li = document.createElement('li');
    li.textContent = s;
    sentences.appendChild(li);
  }
  root.appendChild(sentences);
}

function badge(cell: HTMLTableCellElement, text: string, kind: string): void {
  const span = document.createElement('span');
  span.className = `badge badge-${kind}`;
  span.textContent = text;
  cell.appendChild(span);
}

/** Side-by-side diff of pinned items from (possibly) different runs. */
export function renderPinned(
  root: HTMLElement,
  schema: Schema,
  pinned: { item: ExplanationSet['items'][number]; method: string; seed: number }[],
  onUnpin?: (index: number) => void,
): void {
  root.textContent = '';
  if (!pinned.length) return;
  const table = document.createElement('table');
  table.className = 'pinned-table';
  const head = table.createTHead().insertRow();
  head.appendChild(document.createElement('th')).textContent = 'feature';
  pinned.forEach((p, i) => {
    const th = document.createElement('th');
    th.textContent = `${p.method} #${i + 1} (seed ${p.seed})`;
    if (onUnpin) {
      const btn = document.createElement('button');
      btn.textContent = 'x';
      btn.className = 'unpin-button';
      btn.addEventListener('click', () => onUnpin(i));
      th.appendChild(btn);
    }
    head.appendChild(th);
  });
  const body = table.createTBody();
  for (const spec of schema.features) {
    const row = body.insertRow();
    row.insertCell().textContent = spec.name;
    for (const p of pinned) {
      row.insertCell().textContent = formatValue(p.item.semifactual[spec.name]);
    }
  }
  const gains = body.insertRow();
  gains.insertCell().textContent = 'gain';
  for (const p of pinned) gains.insertCell().textContent = p.item.gain.toFixed(4);
  root.appendChild(table);
}
