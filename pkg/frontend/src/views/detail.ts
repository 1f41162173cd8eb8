// Selected-item detail: the query, the plan rendered day by day with the
// outcome evidence highlighted inline, and the raw evidence rows.

import type { EvidenceRow, FailureItem, QueryRecord } from '../types.js';

function lineField(line: string): string | null {
  const idx = line.indexOf(':');
  if (idx < 0) {
    return null;
  }
  return line.slice(0, idx).trim().toLowerCase().replace(/\s+/g, '_');
}

const MEAL_FIELDS = new Set(['breakfast', 'lunch', 'dinner']);

function lineMatchesEvidence(day: number, field: string | null, evidence: EvidenceRow[]): EvidenceRow | null {
  if (field === null) {
    return null;
  }
  for (const row of evidence) {
    const [eDay, eField] = row;
    if (eDay !== day) {
      continue;
    }
    if (eField === field) {
      return row;
    }
    if (eField === 'meals' && MEAL_FIELDS.has(field)) {
      return row;
    }
    if (eField === 'current_city' && field === 'current_city') {
      return row;
    }
  }
  return null;
}

export function renderPlanText(container: HTMLElement, planText: string, evidence: EvidenceRow[]): void {
  container.replaceChildren();
  const pre = document.createElement('div');
  pre.className = 'plan-text';
  let currentDay = 0;
  for (const line of planText.split('\n')) {
    const div = document.createElement('div');
    div.className = 'plan-line';
    div.textContent = line === '' ? ' ' : line;
    const dayMatch = /^day\s+(\d+):/i.exec(line.trim());
    if (dayMatch) {
      currentDay = parseInt(dayMatch[1], 10);
      div.classList.add('plan-day-header');
    }
    const hit = lineMatchesEvidence(currentDay, lineField(line), evidence);
    if (hit) {
      div.classList.add('evidence-hit');
      div.dataset.testid = 'evidence-hit';
      div.title = hit[2];
    }
    pre.appendChild(div);
  }
  container.appendChild(pre);
}

function describeQuery(query: QueryRecord): string {
  const parts = [
    `${query.origin} -> ${query.destinations.join(' -> ')}`,
    `${query.n_days} days from ${query.start_date}`,
    `${query.n_people} traveller(s)`,
    `budget $${query.budget}`,
  ];
  if (query.house_rules.length) parts.push(`house rules: ${query.house_rules.join(', ')}`);
  if (query.room_types.length) parts.push(`room types: ${query.room_types.join(', ')}`);
  if (query.cuisines.length) parts.push(`cuisines: ${query.cuisines.join(', ')}`);
  if (query.transport_prefs.length) parts.push(`transport: ${query.transport_prefs.join(', ')}`);
  return parts.join(' | ');
}

export function renderItemDetail(
  container: HTMLElement,
  item: FailureItem,
  query?: QueryRecord,
): void {
  container.replaceChildren();

  const heading = document.createElement('h3');
  heading.textContent = item.query_id;
  container.appendChild(heading);

  if (query) {
    const summary = document.createElement('p');
    summary.className = 'query-summary';
    summary.dataset.testid = 'query-summary';
    summary.textContent = describeQuery(query);
    container.appendChild(summary);
  }

  const message = document.createElement('p');
  message.className = 'failure-message';
  message.textContent = item.message;
  container.appendChild(message);

  const evidenceList = document.createElement('ul');
  evidenceList.className = 'evidence-list';
  for (const [day, field, detail] of item.evidence) {
    const li = document.createElement('li');
    li.dataset.testid = 'evidence-row';
    li.textContent = day > 0 ? `day ${day} / ${field}: ${detail}` : `${field}: ${detail}`;
    evidenceList.appendChild(li);
  }
  container.appendChild(evidenceList);

  const planBox = document.createElement('div');
  container.appendChild(planBox);
  if (item.delivered) {
    renderPlanText(planBox, item.plan_text, item.evidence);
  } else {
    const note = document.createElement('p');
    note.className = 'not-delivered';
    note.textContent = `Plan was not delivered. Raw agent output:`;
    planBox.appendChild(note);
    const raw = document.createElement('pre');
    raw.textContent = item.plan_text || '(empty output)';
    planBox.appendChild(raw);
  }
}
