// The advance-iteration flow: cut revision R_{i+1} from the selected
// exemplars, trigger its evaluation, and poll the run handle to resolution.

import { ApiClient } from './api.js';
import type { RunSummary } from './types.js';

export interface IterationHandle {
  revisionIndex: number;
  runId: string;
}

export async function advanceIteration(
  api: ApiClient,
  exemplarIds: string[],
  options: {
    split?: string;
    backend?: Record<string, unknown>;
    // human-edited rule text replacing the inherited blocks verbatim
    ruleBlocks?: string[];
  } = {},
): Promise<IterationHandle> {
  if (exemplarIds.length === 0) {
    throw new Error('select at least one exemplar before advancing');
  }
  const revision = await api.createRevision(exemplarIds, options.ruleBlocks);
  const run = await api.triggerRun({
    split: options.split ?? 'train',
    revision: revision.revision_index,
    backend: options.backend,
  });
  return { revisionIndex: revision.revision_index, runId: run.run_id };
}

export async function pollRun(
  api: ApiClient,
  runId: string,
  options: { intervalMs?: number; timeoutMs?: number; sleep?: (ms: number) => Promise<void> } = {},
): Promise<RunSummary> {
  const intervalMs = options.intervalMs ?? 500;
  const timeoutMs = options.timeoutMs ?? 120_000;
  const sleep =
    options.sleep ?? ((ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms)));
  const started = Date.now();
  for (;;) {
    const summary = await api.getRun(runId);
    if (summary.status === 'done' || summary.status === 'failed') {
      return summary;
    }
    if (Date.now() - started > timeoutMs) {
      throw new Error(`run ${runId} did not resolve within ${timeoutMs}ms`);
    }
    await sleep(intervalMs);
  }
}
