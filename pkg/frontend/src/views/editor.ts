// Exemplar editor: edit the failed plan into a correction and submit it.
// Validation failures render inline without touching the edits; network
// failures offer a retry that reuses the same idempotency key, so a
// double-send can never create a duplicate exemplar.

import { ApiClient, ApiError } from '../api.js';
import type { FailureItem, ViolationDetail } from '../types.js';

function newIdempotencyKey(): string {
  const rand =
    globalThis.crypto && 'randomUUID' in globalThis.crypto
      ? globalThis.crypto.randomUUID()
      : `${Date.now()}-${Math.random().toString(36).slice(2)}`;
  return `ui-${rand}`;
}

export interface ExemplarEditor {
  element: HTMLElement;
  textarea: HTMLTextAreaElement;
  noteInput: HTMLInputElement;
  submit(): Promise<void>;
  readonly exemplarId: string | null;
  readonly idempotencyKey: string;
}

export function createExemplarEditor(
  api: ApiClient,
  runId: string,
  item: FailureItem,
  onSubmitted?: (exemplarId: string) => void,
): ExemplarEditor {
  const element = document.createElement('div');
  element.className = 'exemplar-editor';

  const heading = document.createElement('h4');
  heading.textContent = `Author a correction for ${item.query_id}`;
  element.appendChild(heading);

  const textarea = document.createElement('textarea');
  textarea.className = 'plan-editor';
  textarea.rows = 20;
  textarea.value = item.plan_text;
  element.appendChild(textarea);

  const noteInput = document.createElement('input');
  noteInput.type = 'text';
  noteInput.placeholder = 'Note for the prompt (optional)';
  noteInput.className = 'note-input';
  element.appendChild(noteInput);

  const submitButton = document.createElement('button');
  submitButton.type = 'button';
  submitButton.textContent = 'Submit correction';
  submitButton.dataset.testid = 'submit-exemplar';
  element.appendChild(submitButton);

  const feedback = document.createElement('div');
  feedback.className = 'editor-feedback';
  feedback.dataset.testid = 'editor-feedback';
  element.appendChild(feedback);

  const idempotencyKey = newIdempotencyKey();
  let exemplarId: string | null = null;

  function showViolations(detail: ViolationDetail): void {
    feedback.replaceChildren();
    const intro = document.createElement('p');
    intro.className = 'error';
    intro.textContent =
      detail.error === 'parse-failure'
        ? `The correction does not parse: ${detail.reason ?? 'unknown reason'}`
        : 'The correction still violates:';
    feedback.appendChild(intro);
    if (detail.still_failing?.length) {
      const list = document.createElement('ul');
      list.className = 'violation-list';
      list.dataset.testid = 'violation-list';
      for (const constraintId of detail.still_failing) {
        const li = document.createElement('li');
        li.textContent = constraintId;
        list.appendChild(li);
      }
      feedback.appendChild(list);
    }
  }

  function showRetry(message: string): void {
    feedback.replaceChildren();
    const p = document.createElement('p');
    p.className = 'error';
    p.textContent = message;
    feedback.appendChild(p);
    const retry = document.createElement('button');
    retry.type = 'button';
    retry.textContent = 'Retry submission';
    retry.dataset.testid = 'retry-submit';
    retry.addEventListener('click', () => void submit());
    feedback.appendChild(retry);
  }

  async function submit(): Promise<void> {
    submitButton.disabled = true;
    try {
      const response = await api.submitExemplar({
        run_id: runId,
        query_id: item.query_id,
        corrected_plan_text: textarea.value,
        note: noteInput.value,
        idempotency_key: idempotencyKey,
      });
      exemplarId = response.exemplar_id;
      feedback.replaceChildren();
      const ok = document.createElement('p');
      ok.className = 'success';
      ok.dataset.testid = 'submit-success';
      ok.textContent = `Stored as ${response.exemplar_id}`;
      feedback.appendChild(ok);
      onSubmitted?.(response.exemplar_id);
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        showViolations((error.detail ?? {}) as ViolationDetail);
      } else {
        showRetry('Submission failed (network or server error).');
      }
    } finally {
      submitButton.disabled = false;
    }
  }

  submitButton.addEventListener('click', () => void submit());

  return {
    element,
    textarea,
    noteInput,
    submit,
    get exemplarId() {
      return exemplarId;
    },
    idempotencyKey,
  };
}
