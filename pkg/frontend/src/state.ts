/** Session state: working constraints, request history, pinned items.
 *
 * Persistence lives entirely in browser local storage (the server is
 * stateless); history is capped so storage cannot grow without bound.
 */

import type {
  ConstraintOverride,
  Direction,
  ExplainRequest,
  ExplanationSet,
  FeatureSpec,
  Schema,
} from './types';

export const HISTORY_LIMIT = 50;

export interface HistoryEntry {
  request: ExplainRequest;
  response: ExplanationSet;
  at: number;
}

export interface PinnedItem {
  runAt: number;
  method: string;
  seed: number;
  itemIndex: number;
  item: ExplanationSet['items'][number];
  sentence: string;
}

export interface SessionSnapshot {
  dataset: string | null;
  individual: string | null;
  overrides: Record<string, ConstraintOverride>;
  history: HistoryEntry[];
  pinned: PinnedItem[];
}

/** Directions a feature may be switched to; bounds edits and frozen are
 * mutually exclusive, which the editor enforces by construction. */
export function allowedDirections(spec: FeatureSpec): Direction[] {
  return spec.kind === 'continuous' || (spec.levels && spec.levels.length > 1)
    ? ['increase', 'decrease', 'both', 'frozen']
    : ['frozen'];
}

export function validateOverride(
  spec: FeatureSpec,
  override: ConstraintOverride,
): string | null {
  const direction = override.direction ?? spec.direction;
  const actionable = override.actionable ?? spec.actionable;
  if (actionable && direction === 'frozen') {
    return `${spec.name}: an actionable feature cannot be frozen`;
  }
  if (override.bounds) {
    const [lo, hi] = override.bounds;
    if (!(hi > lo)) {
      return `${spec.name}: bounds must satisfy low < high`;
    }
    if (direction === 'frozen') {
      return `${spec.name}: cannot adjust bounds while freezing the feature`;
    }
    if (spec.kind === 'categorical' && spec.levels) {
      if (lo < 0 || hi > spec.levels.length - 1) {
        return `${spec.name}: bounds outside the level range`;
      }
    }
  }
  return null;
}

export class Session {
  dataset: string | null = null;
  individual: string | null = null;
  overrides: Record<string, ConstraintOverride> = {};
  history: HistoryEntry[] = [];
  pinned: PinnedItem[] = [];

  constructor(private readonly storage?: Storage, private readonly key = 'evenif-session') {}

  static load(storage?: Storage): Session {
    const session = new Session(storage);
    if (!storage) return session;
    try {
      const raw = storage.getItem(session.key);
      if (raw) {
        const snap = JSON.parse(raw) as SessionSnapshot;
        session.dataset = snap.dataset;
        session.individual = snap.individual;
        session.overrides = snap.overrides ?? {};
        session.history = (snap.history ?? []).slice(0, HISTORY_LIMIT);
        session.pinned = snap.pinned ?? [];
      }
    } catch {
      // a corrupt snapshot resets the session rather than breaking the app
    }
    return session;
  }

  persist(): void {
    if (!this.storage) return;
    const snap: SessionSnapshot = {
      dataset: this.dataset,
      individual: this.individual,
      overrides: this.overrides,
      history: this.history,
      pinned: this.pinned,
    };
    this.storage.setItem(this.key, JSON.stringify(snap));
  }

  setOverride(spec: FeatureSpec, override: ConstraintOverride): string | null {
    const error = validateOverride(spec, override);
    if (error) return error;
    if (Object.keys(override).length === 0) {
      delete this.overrides[spec.name];
    } else {
      this.overrides[spec.name] = override;
    }
    this.persist();
    return null;
  }

  clearOverride(name: string): void {
    delete this.overrides[name];
    this.persist();
  }

  /** Schema-valid request or an error string; the UI refuses to send
   * anything that fails this check. */
  buildRequest(
    schema: Schema,
    options: { method: string; m: number; seed: number; model?: string },
  ): { request?: ExplainRequest; error?: string } {
    if (!this.dataset) return { error: 'no dataset selected' };
    if (!this.individual) return { error: 'no individual selected' };
    if (options.m < 1) return { error: 'm must be at least 1' };
    for (const spec of schema.features) {
      const override = this.overrides[spec.name];
      if (!override) continue;
      const problem = validateOverride(spec, override);
      if (problem) return { error: problem };
    }
    const request: ExplainRequest = {
      dataset: this.dataset,
      individual: this.individual,
      method: options.method,
      m: options.m,
      seed: options.seed,
    };
    if (options.model) request.model = options.model;
    if (Object.keys(this.overrides).length) request.overrides = { ...this.overrides };
    return { request };
  }

  record(request: ExplainRequest, response: ExplanationSet): void {
    this.history.unshift({ request, response, at: Date.now() });
    if (this.history.length > HISTORY_LIMIT) {
      this.history.length = HISTORY_LIMIT;
    }
    this.persist();
  }

  pin(entry: HistoryEntry, itemIndex: number): void {
    const item = entry.response.items[itemIndex];
    if (!item) return;
    this.pinned.push({
      runAt: entry.at,
      method: entry.response.method,
      seed: entry.response.seed,
      itemIndex,
      item,
      sentence: entry.response.sentences?.[itemIndex] ?? '',
    });
    this.persist();
  }

  unpin(index: number): void {
    this.pinned.splice(index, 1);
    this.persist();
  }
}
