// Failure-group board: one card per constraint, heaviest first (the service
// already sorts; we render in payload order). Every number shown comes
// straight from a payload field.

import type { FailureGroup, FailureItem, FailuresPayload } from '../types.js';

export type ItemSelectHandler = (group: FailureGroup, item: FailureItem) => void;

export function renderFailureGroups(
  container: HTMLElement,
  payload: FailuresPayload,
  onSelect?: ItemSelectHandler,
): void {
  container.replaceChildren();

  if (payload.groups.length === 0) {
    const empty = document.createElement('div');
    empty.className = 'empty-state';
    empty.dataset.testid = 'empty-state';
    empty.textContent = 'All constraints satisfied - nothing to triage.';
    container.appendChild(empty);
    return;
  }

  for (const group of payload.groups) {
    const card = document.createElement('section');
    card.className = 'failure-group';
    card.dataset.testid = 'failure-group';
    card.dataset.constraintId = group.constraint_id;

    const header = document.createElement('header');
    const title = document.createElement('h3');
    title.textContent = group.constraint_id;
    const category = document.createElement('span');
    category.className = `badge badge-${group.category}`;
    category.textContent = group.category;
    const count = document.createElement('span');
    count.className = 'count';
    count.dataset.testid = 'group-count';
    count.textContent = String(group.count);
    header.append(title, category, count);
    card.appendChild(header);

    const list = document.createElement('ul');
    list.className = 'failure-items';
    for (const item of group.items) {
      const li = document.createElement('li');
      const button = document.createElement('button');
      button.type = 'button';
      button.className = 'failure-item';
      button.dataset.testid = 'failure-item';
      button.textContent = item.delivered
        ? item.query_id
        : `${item.query_id} (not delivered)`;
      button.addEventListener('click', () => onSelect?.(group, item));
      li.appendChild(button);
      list.appendChild(li);
    }
    card.appendChild(list);
    container.appendChild(card);
  }
}
