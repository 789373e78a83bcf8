/** Wire types mirrored from the /v1 API. */

export type FeatureKind = 'continuous' | 'categorical';
export type Direction = 'increase' | 'decrease' | 'both' | 'frozen';
export type Polarity = 'positive' | 'negative' | 'neutral';

export interface FeatureSpec {
  name: string;
  kind: FeatureKind;
  levels?: string[];
  actionable: boolean;
  direction: Direction;
  bounds: [number, number] | null;
  polarity: Polarity;
  scale?: [number, number];
}

export interface Schema {
  features: FeatureSpec[];
  label: string;
  psi: number;
  positive_label_meaning: string;
}

export interface DatasetInfo {
  id: string;
  rows: number;
  encoding: 'onehot' | 'ordinal';
  causal: boolean;
  models: string[];
  default_model: string;
  positive_label_meaning: string;
}

export interface IndividualRow {
  id: string;
  record: Record<string, number | string>;
  score: number;
  label: 0 | 1;
}

export interface Prediction {
  score: number;
  label: 0 | 1;
}

/** Per-feature overrides sent with an explain request. */
export interface ConstraintOverride {
  actionable?: boolean;
  direction?: Direction;
  bounds?: [number, number];
  polarity?: Polarity;
}

export interface ExplainRequest {
  dataset: string;
  individual: string | Record<string, number | string>;
  method: string;
  m: number;
  seed: number;
  model?: string;
  overrides?: Record<string, ConstraintOverride>;
  config?: Record<string, unknown>;
}

export interface ExplanationItem {
  action: Record<string, number>;
  semifactual: Record<string, number | string>;
  gain: number;
  plausibility: number;
  robustness_mc: number;
  robustness_abs: number;
  score: number;
  note?: string;
}

export interface ExplanationSet {
  method: string;
  seed: number;
  m: number;
  individual: string;
  diversity: number;
  items: ExplanationItem[];
  config: Record<string, unknown>;
  individual_record: Record<string, number | string>;
  sentences: string[];
}

export interface ApiError {
  error: string;
  kind: string;
  field?: string;
  diagnostics?: Record<string, unknown>;
}
