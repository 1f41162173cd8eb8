// Iteration timeline: one row per prompt revision with its six rates and
// the delta against the previous revision, plus pending rows for runs that
// have not resolved yet and a marker where the loop converged.

import { formatDelta, subtractRates } from '../rates.js';
import type { RateSet, TimelinePayload } from '../types.js';
import { RATE_FIELDS } from '../types.js';

const COLUMN_LABELS: Record<keyof RateSet, string> = {
  delivery_rate: 'Delivery',
  commonsense_micro: 'CS Micro',
  commonsense_macro: 'CS Macro',
  hard_micro: 'Hard Micro',
  hard_macro: 'Hard Macro',
  final_pass_rate: 'Final',
};

export interface PendingPoint {
  revision_index: number;
  run_id: string;
  status: string;
}

export function renderTimeline(
  container: HTMLElement,
  payload: TimelinePayload,
  pending: PendingPoint[] = [],
): void {
  container.replaceChildren();
  const table = document.createElement('table');
  table.className = 'timeline';
  table.dataset.testid = 'timeline';

  const head = document.createElement('tr');
  for (const label of ['Revision', 'Run', ...RATE_FIELDS.map((f) => COLUMN_LABELS[f])]) {
    const th = document.createElement('th');
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);

  let previous: RateSet | null = null;
  for (const point of payload.points) {
    const row = document.createElement('tr');
    row.dataset.testid = 'timeline-row';
    row.dataset.revisionIndex = String(point.revision_index);
    if (payload.converged_at === point.revision_index) {
      row.classList.add('converged');
      row.dataset.converged = 'true';
    }
    const rev = document.createElement('td');
    rev.textContent = `R${point.revision_index}`;
    const run = document.createElement('td');
    run.textContent = point.run_id;
    row.append(rev, run);

    const deltas = previous === null ? null : subtractRates(previous, point.rates);
    for (const field of RATE_FIELDS) {
      const td = document.createElement('td');
      const value = document.createElement('span');
      value.dataset.testid = `rate-${field}`;
      value.textContent = point.rates[field];
      td.appendChild(value);
      if (deltas !== null) {
        const delta = document.createElement('span');
        delta.className = 'delta';
        delta.dataset.testid = `delta-${field}`;
        delta.textContent = ` ${formatDelta(deltas[field])}`;
        td.appendChild(delta);
      }
      row.appendChild(td);
    }
    table.appendChild(row);
    previous = point.rates;
  }

  for (const handle of pending) {
    const row = document.createElement('tr');
    row.className = 'pending';
    row.dataset.testid = 'timeline-pending';
    const rev = document.createElement('td');
    rev.textContent = `R${handle.revision_index}`;
    const run = document.createElement('td');
    run.textContent = handle.run_id;
    const status = document.createElement('td');
    status.colSpan = RATE_FIELDS.length;
    status.textContent = handle.status === 'failed' ? 'failed' : 'evaluating...';
    row.append(rev, run, status);
    table.appendChild(row);
  }

  container.appendChild(table);

  if (payload.converged_at !== null) {
    const note = document.createElement('p');
    note.className = 'convergence-note';
    note.dataset.testid = 'convergence-note';
    note.textContent = `Converged at R${payload.converged_at}: consecutive reports moved less than the threshold.`;
    container.appendChild(note);
  }
}
