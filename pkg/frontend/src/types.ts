// Payload shapes mirroring the service API (docs/http_api.md). The dashboard
// renders these fields verbatim; it never recomputes constraint logic.

export interface RateSet {
  delivery_rate: string;
  commonsense_micro: string;
  commonsense_macro: string;
  hard_micro: string;
  hard_macro: string;
  final_pass_rate: string;
}

export const RATE_FIELDS: (keyof RateSet)[] = [
  'delivery_rate',
  'commonsense_micro',
  'commonsense_macro',
  'hard_micro',
  'hard_macro',
  'final_pass_rate',
];

export type RunStatus = 'running' | 'done' | 'failed';

export interface RunSummary {
  run_id: string;
  status: RunStatus;
  timestamp?: string;
  split?: string;
  revision_index?: number;
  backend_fingerprint?: string;
  n_plans?: number;
  rates?: RateSet;
  error?: string | null;
}

export type EvidenceRow = [number, string, string]; // [day, field, detail]

export interface FailureItem {
  query_id: string;
  plan_text: string;
  delivered: boolean;
  message: string;
  evidence: EvidenceRow[];
}

export interface FailureGroup {
  constraint_id: string;
  category: string;
  count: number;
  items: FailureItem[];
}

export interface FailuresPayload {
  run_id: string;
  groups: FailureGroup[];
}

export interface TimelinePoint {
  revision_index: number;
  run_id: string;
  rates: RateSet;
}

export interface TimelinePayload {
  points: TimelinePoint[];
  converged_at: number | null;
}

export interface QueryRecord {
  id: string;
  origin: string;
  destinations: string[];
  start_date: string;
  n_days: number;
  n_people: number;
  budget: string;
  house_rules: string[];
  room_types: string[];
  cuisines: string[];
  transport_prefs: string[];
  split: string;
}

export interface ExemplarRequest {
  run_id: string;
  query_id: string;
  corrected_plan_text: string;
  note?: string;
  idempotency_key?: string;
}

export interface ViolationDetail {
  error: 'exemplar-invariant-violation' | 'parse-failure' | string;
  still_failing?: string[];
  reason?: string;
}

export interface RevisionInfo {
  index: number;
  parent: number | null;
  exemplar_ids: string[];
  metrics_snapshot: Record<string, string> | null;
}
