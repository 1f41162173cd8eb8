// Dashboard wiring: run picker, failure board, item detail with the
// exemplar editor, prompt viewer, and the iteration timeline. Single user,
// poll-based refresh, no state beyond what the service returns.

import { ApiClient } from './api.js';
import { advanceIteration, pollRun } from './flow.js';
import type { FailureItem, FailuresPayload, RunSummary } from './types.js';
import { renderFailureGroups } from './views/dashboard.js';
import { renderItemDetail } from './views/detail.js';
import { createExemplarEditor } from './views/editor.js';
import { renderTimeline, type PendingPoint } from './views/timeline.js';

interface AppState {
  selectedRun: string | null;
  submittedExemplars: string[];
  pending: PendingPoint[];
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function createApp(root: HTMLElement, api: ApiClient): { refresh(): Promise<void> } {
  const state: AppState = { selectedRun: null, submittedExemplars: [], pending: [] };

  root.replaceChildren();
  const header = el('header');
  header.appendChild(el('h1', undefined, 'Plan triage'));
  const refreshButton = el('button', undefined, 'Refresh') as HTMLButtonElement;
  header.appendChild(refreshButton);
  root.appendChild(header);

  const errorBar = el('div', 'error-bar');
  errorBar.hidden = true;
  root.appendChild(errorBar);

  const timelineBox = el('section', 'timeline-box');
  const runsBox = el('section', 'runs-box');
  const groupsBox = el('section', 'groups-box');
  const detailBox = el('section', 'detail-box');
  const actionBox = el('section', 'action-box');
  root.append(timelineBox, runsBox, groupsBox, detailBox, actionBox);

  function showError(message: string, retry: () => void): void {
    errorBar.replaceChildren();
    errorBar.hidden = false;
    errorBar.appendChild(el('span', undefined, message));
    const button = el('button', undefined, 'Retry') as HTMLButtonElement;
    button.addEventListener('click', () => {
      errorBar.hidden = true;
      retry();
    });
    errorBar.appendChild(button);
  }

  function renderRunPicker(runs: RunSummary[]): void {
    runsBox.replaceChildren();
    runsBox.appendChild(el('h2', undefined, 'Runs'));
    const list = el('ul', 'run-list');
    for (const run of runs) {
      const li = el('li');
      const button = el(
        'button',
        'run-link',
        `${run.run_id} [${run.status}]` +
          (run.rates ? ` final ${run.rates.final_pass_rate}` : ''),
      ) as HTMLButtonElement;
      button.addEventListener('click', () => void selectRun(run.run_id));
      li.appendChild(button);
      list.appendChild(li);
    }
    runsBox.appendChild(list);
  }

  async function selectRun(runId: string): Promise<void> {
    state.selectedRun = runId;
    detailBox.replaceChildren();
    try {
      const failures = await api.getFailures(runId);
      renderBoard(failures);
    } catch {
      showError(`Could not load failures for ${runId}.`, () => void selectRun(runId));
    }
  }

  function renderBoard(failures: FailuresPayload): void {
    groupsBox.replaceChildren();
    groupsBox.appendChild(el('h2', undefined, `Failures in ${failures.run_id}`));
    const board = el('div');
    groupsBox.appendChild(board);
    renderFailureGroups(board, failures, (group, item) => void showDetail(failures.run_id, item));
  }

  async function showDetail(runId: string, item: FailureItem): Promise<void> {
    detailBox.replaceChildren();
    const detail = el('div');
    detailBox.appendChild(detail);
    let query;
    try {
      query = await api.getQuery(item.query_id);
    } catch {
      query = undefined;
    }
    renderItemDetail(detail, item, query);

    const editor = createExemplarEditor(api, runId, item, (exemplarId) => {
      if (!state.submittedExemplars.includes(exemplarId)) {
        state.submittedExemplars.push(exemplarId);
      }
      renderActions();
    });
    detailBox.appendChild(editor.element);
  }

  function renderActions(): void {
    actionBox.replaceChildren();
    actionBox.appendChild(el('h2', undefined, 'Next iteration'));
    const list = el('ul', 'exemplar-list');
    const selected = new Set<string>(state.submittedExemplars);
    for (const exemplarId of state.submittedExemplars) {
      const li = el('li');
      const label = el('label') as HTMLLabelElement;
      const checkbox = document.createElement('input');
      checkbox.type = 'checkbox';
      checkbox.checked = true;
      checkbox.addEventListener('change', () => {
        if (checkbox.checked) selected.add(exemplarId);
        else selected.delete(exemplarId);
        advance.disabled = selected.size === 0;
      });
      label.append(checkbox, document.createTextNode(` ${exemplarId}`));
      li.appendChild(label);
      list.appendChild(li);
    }
    actionBox.appendChild(list);

    // prompt preview plus optional free-text re-organization of the rule
    // blocks before the revision is committed
    const promptPanel = el('div', 'prompt-panel');
    const viewPrompt = el('button', undefined, 'View latest prompt') as HTMLButtonElement;
    viewPrompt.addEventListener('click', () => {
      void (async () => {
        try {
          const revisions = await api.listRevisions();
          const latest = revisions.revisions[revisions.revisions.length - 1];
          const text = await api.getRevisionPrompt(latest ? latest.index : 0);
          promptView.hidden = false;
          promptView.textContent = text;
        } catch {
          showError('Could not load the prompt.', () => viewPrompt.click());
        }
      })();
    });
    const promptView = el('pre', 'prompt-view') as HTMLPreElement;
    promptView.hidden = true;
    const ruleEditor = document.createElement('textarea');
    ruleEditor.className = 'rule-editor';
    ruleEditor.rows = 4;
    ruleEditor.placeholder =
      'Optional: replacement rule blocks, one per line (leave empty to keep the current rules)';
    promptPanel.append(viewPrompt, promptView, ruleEditor);
    actionBox.appendChild(promptPanel);

    const advance = el('button', undefined, 'Create revision and re-evaluate') as HTMLButtonElement;
    advance.dataset.testid = 'advance-iteration';
    advance.disabled = selected.size === 0;
    advance.addEventListener('click', () => {
      void (async () => {
        advance.disabled = true;
        try {
          const edited = ruleEditor.value
            .split('\n')
            .map((line) => line.trim())
            .filter((line) => line.length > 0);
          const handle = await advanceIteration(api, [...selected], {
            ruleBlocks: edited.length ? edited : undefined,
          });
          state.pending.push({
            revision_index: handle.revisionIndex,
            run_id: handle.runId,
            status: 'running',
          });
          await drawTimeline();
          const summary = await pollRun(api, handle.runId);
          state.pending = state.pending.filter((p) => p.run_id !== handle.runId);
          if (summary.status === 'failed') {
            showError(`Run ${handle.runId} failed: ${summary.error ?? 'unknown error'}`, () =>
              void refresh(),
            );
          }
          await refresh();
        } catch (error) {
          showError(`Could not advance the iteration: ${String(error)}`, () => void refresh());
          advance.disabled = false;
        }
      })();
    });
    actionBox.appendChild(advance);
  }

  async function drawTimeline(): Promise<void> {
    const timeline = await api.getTimeline();
    timelineBox.replaceChildren();
    timelineBox.appendChild(el('h2', undefined, 'Iterations'));
    const box = el('div');
    timelineBox.appendChild(box);
    renderTimeline(box, timeline, state.pending);
  }

  async function refresh(): Promise<void> {
    try {
      const [runs] = await Promise.all([api.listRuns(), drawTimeline()]);
      renderRunPicker(runs.runs);
      renderActions();
      if (state.selectedRun) {
        await selectRun(state.selectedRun);
      }
    } catch {
      showError('Could not reach the evaluation service.', () => void refresh());
    }
  }

  refreshButton.addEventListener('click', () => void refresh());
  return { refresh };
}

declare global {
  interface Window {
    __tripcraftBooted?: boolean;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app') && !window.__tripcraftBooted) {
  window.__tripcraftBooted = true;
  const app = createApp(document.getElementById('app') as HTMLElement, new ApiClient());
  void app.refresh();
}
