// Advancing an iteration: revision creation, run trigger, pending point,
// resolution by polling. Mirrors the recorded R0 -> R1 improvement.

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { advanceIteration, pollRun } from '../src/flow.js';
import { toCents } from '../src/rates.js';
import { renderTimeline } from '../src/views/timeline.js';
import type { RunSummary, TimelinePayload } from '../src/types.js';
import { fixture, stubFetch } from './helpers.js';

const timeline = fixture<TimelinePayload>('timeline.json');
const revisionResponse = fixture<{ revision_index: number }>('revision_response.json');
const run1Summary = fixture<RunSummary>('run1_summary.json');

describe('advanceIteration', () => {
  it('refuses an empty selection', async () => {
    const api = new ApiClient('', stubFetch({}).fetchFn);
    await expect(advanceIteration(api, [])).rejects.toThrow(/at least one exemplar/);
  });

  it('creates the next revision then triggers its evaluation', async () => {
    const { fetchFn, calls } = stubFetch({
      'POST /api/revisions': () => ({ body: revisionResponse }),
      'POST /api/runs': () => ({
        status: 202,
        body: { run_id: 'run-0077', status: 'running' },
      }),
    });
    const api = new ApiClient('', fetchFn);
    const handle = await advanceIteration(api, ['ex-run-0001-train-0000']);
    expect(handle.revisionIndex).toBe(revisionResponse.revision_index);
    expect(handle.runId).toBe('run-0077');
    expect(calls[0].key).toBe('POST /api/revisions');
    expect(calls[1].key).toBe('POST /api/runs');
    expect((calls[1].body as { revision: number }).revision).toBe(
      revisionResponse.revision_index,
    );
  });

  it('passes human-edited rule blocks through to the revision', async () => {
    const { fetchFn, calls } = stubFetch({
      'POST /api/revisions': () => ({ body: revisionResponse }),
      'POST /api/runs': () => ({ status: 202, body: { run_id: 'run-0078', status: 'running' } }),
    });
    const api = new ApiClient('', fetchFn);
    await advanceIteration(api, ['ex-1'], {
      ruleBlocks: ['Stay under budget.', 'Do not repeat attractions.'],
    });
    const body = calls[0].body as { rule_blocks: string[] };
    expect(body.rule_blocks).toEqual(['Stay under budget.', 'Do not repeat attractions.']);
  });

  it('polls the handle until the run resolves', async () => {
    let polls = 0;
    const { fetchFn } = stubFetch({
      [`GET /api/runs/${run1Summary.run_id}`]: () => {
        polls += 1;
        if (polls < 3) {
          return { body: { run_id: run1Summary.run_id, status: 'running' } };
        }
        return { body: run1Summary };
      },
    });
    const api = new ApiClient('', fetchFn);
    const resolved = await pollRun(api, run1Summary.run_id, {
      intervalMs: 1,
      sleep: async () => {},
    });
    expect(polls).toBe(3);
    expect(resolved.status).toBe('done');
    expect(resolved.rates).toEqual(run1Summary.rates);
  });

  it('recorded loop fixture: R1 final strictly above R0 final on the timeline', () => {
    const [r0, r1] = timeline.points;
    expect(toCents(r1.rates.final_pass_rate)).toBeGreaterThan(
      toCents(r0.rates.final_pass_rate),
    );
    // a pending point appears while the next run is evaluating, then resolves
    const container = document.createElement('div');
    renderTimeline(container, timeline, [
      { revision_index: 2, run_id: 'run-next', status: 'running' },
    ]);
    expect(container.querySelector('[data-testid="timeline-pending"]')).not.toBeNull();
    renderTimeline(container, timeline, []);
    expect(container.querySelector('[data-testid="timeline-pending"]')).toBeNull();
  });
});
