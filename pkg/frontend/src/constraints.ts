/** Constraint editor: per-feature actionability, direction, bounds and
 * gain-polarity controls, with invalid combinations unreachable. */

import type { ConstraintOverride, Direction, FeatureSpec, Polarity, Schema } from './types';
import { Session, allowedDirections } from './state';

const DIRECTION_LABELS: Record<Direction, string> = {
  increase: 'increase only',
  decrease: 'decrease only',
  both: 'either way',
  frozen: 'frozen',
};

const POLARITIES: Polarity[] = ['positive', 'negative', 'neutral'];

export function effectiveSpec(spec: FeatureSpec, override?: ConstraintOverride): FeatureSpec {
  if (!override) return spec;
  return {
    ...spec,
    actionable: override.actionable ?? spec.actionable,
    direction: override.direction ?? spec.direction,
    bounds: override.bounds ?? spec.bounds,
    polarity: override.polarity ?? spec.polarity,
  };
}

function sliderStep(spec: FeatureSpec): number {
  if (spec.kind === 'categorical') return 1;
  const [lo, hi] = spec.bounds ?? [0, 1];
  return Math.max((hi - lo) / 200, 1e-6);
}

export function renderConstraintEditor(
  root: HTMLElement,
  schema: Schema,
  session: Session,
  onChange: () => void,
): void {
  root.textContent = '';
  for (const spec of schema.features) {
    root.appendChild(featureRow(spec, schema, session, onChange));
  }
}

function featureRow(
  spec: FeatureSpec,
  schema: Schema,
  session: Session,
  onChange: () => void,
): HTMLElement {
  const override = session.overrides[spec.name] ?? {};
  const current = effectiveSpec(spec, override);
  const row = document.createElement('div');
  row.className = 'constraint-row';
  row.dataset.feature = spec.name;

  const name = document.createElement('span');
  name.className = 'feature-name';
  name.textContent = spec.name;
  row.appendChild(name);

  const actionable = document.createElement('input');
  actionable.type = 'checkbox';
  actionable.className = 'actionable-toggle';
  actionable.checked = current.actionable;
  actionable.title = 'actionable';

  const direction = document.createElement('select');
  direction.className = 'direction-select';
  for (const d of allowedDirections(spec)) {
    const opt = document.createElement('option');
    opt.value = d;
    opt.textContent = DIRECTION_LABELS[d];
    if (d === 'frozen' && current.actionable) opt.disabled = true; // unreachable combo
    direction.appendChild(opt);
  }
  direction.value = current.direction;

  const polarity = document.createElement('select');
  polarity.className = 'polarity-select';
  for (const p of POLARITIES) {
    const opt = document.createElement('option');
    opt.value = p;
    opt.textContent = `${p} gain`;
    polarity.appendChild(opt);
  }
  polarity.value = current.polarity;

  const bounds = spec.bounds ?? [0, 1];
  const lo = document.createElement('input');
  const hi = document.createElement('input');
  for (const [input, value] of [[lo, bounds[0]], [hi, bounds[1]]] as const) {
    input.type = 'range';
    input.min = String(bounds[0]);
    input.max = String(bounds[1]);
    input.step = String(sliderStep(spec));
    input.value = String((current.bounds ?? bounds)[input === lo ? 0 : 1] ?? value);
  }
  lo.className = 'bound-lo';
  hi.className = 'bound-hi';

  const readout = document.createElement('span');
  readout.className = 'bound-readout';

  const sync = () => {
    // paired sliders can never cross: each clamps against the other
    if (Number(lo.value) >= Number(hi.value)) {
      if (document.activeElement === lo) lo.value = String(Number(hi.value) - sliderStep(spec));
      else hi.value = String(Number(lo.value) + sliderStep(spec));
    }
    readout.textContent = `[${lo.value}, ${hi.value}]`;
    const frozen = direction.value === 'frozen';
    actionable.checked = actionable.checked && !frozen;
    lo.disabled = hi.disabled = frozen || !actionable.checked;
    const override: ConstraintOverride = {};
    if (actionable.checked !== spec.actionable) override.actionable = actionable.checked;
    if (direction.value !== spec.direction) override.direction = direction.value as Direction;
    if (polarity.value !== spec.polarity) override.polarity = polarity.value as Polarity;
    const loV = Number(lo.value);
    const hiV = Number(hi.value);
    if (!frozen && (loV !== bounds[0] || hiV !== bounds[1])) override.bounds = [loV, hiV];
    const error = session.setOverride(spec, override);
    row.classList.toggle('invalid', error !== null);
    row.title = error ?? '';
    if (!error) onChange();
  };

  actionable.addEventListener('change', () => {
    if (!actionable.checked && direction.value !== 'frozen') {
      direction.value = 'frozen';
    } else if (actionable.checked && direction.value === 'frozen') {
      direction.value = 'both';
    }
    sync();
  });
  direction.addEventListener('change', () => {
    if (direction.value === 'frozen') actionable.checked = false;
    else actionable.checked = true;
    sync();
  });
  polarity.addEventListener('change', sync);
  lo.addEventListener('input', sync);
  hi.addEventListener('input', sync);

  readout.textContent = `[${lo.value}, ${hi.value}]`;
  lo.disabled = hi.disabled = current.direction === 'frozen' || !current.actionable;

  row.append(actionable, direction, polarity, lo, hi, readout);
  return row;
}
