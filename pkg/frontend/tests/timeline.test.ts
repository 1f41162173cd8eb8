// Timeline contract tests: rates render field-identically to the recorded
// payload and the deltas equal the service's own report differencing.

import { describe, expect, it } from 'vitest';

import { formatDelta, fromCents, subtractRate, subtractRates, toCents } from '../src/rates.js';
import { renderTimeline } from '../src/views/timeline.js';
import type { RateSet, TimelinePayload } from '../src/types.js';
import { RATE_FIELDS } from '../src/types.js';
import { fixture } from './helpers.js';

const timeline = fixture<TimelinePayload>('timeline.json');
const expectedDeltas = fixture<RateSet>('timeline_expected_deltas.json');

describe('rate arithmetic', () => {
  it('round-trips cents exactly', () => {
    for (const value of ['0.00', '2.78', '100.00', '87.50', '5.56']) {
      expect(fromCents(toCents(value))).toBe(value);
    }
  });

  it('subtracts without floating point drift', () => {
    expect(subtractRate('2.78', '6.67')).toBe('3.89');
    expect(subtractRate('6.67', '2.78')).toBe('-3.89');
    expect(subtractRate('0.10', '0.30')).toBe('0.20');
  });

  it('formats deltas with an explicit sign', () => {
    expect(formatDelta('3.89')).toBe('(+3.89)');
    expect(formatDelta('-0.50')).toBe('(-0.50)');
    expect(formatDelta('0.00')).toBe('(+0.00)');
  });
});

describe('timeline', () => {
  it('renders every revision in order with payload-identical rates', () => {
    const container = document.createElement('div');
    renderTimeline(container, timeline);
    const rows = [...container.querySelectorAll('[data-testid="timeline-row"]')];
    expect(rows.length).toBe(timeline.points.length);
    rows.forEach((row, i) => {
      const point = timeline.points[i];
      expect(row.getAttribute('data-revision-index')).toBe(String(point.revision_index));
      for (const field of RATE_FIELDS) {
        expect(row.querySelector(`[data-testid="rate-${field}"]`)?.textContent).toBe(
          point.rates[field],
        );
      }
    });
    const indices = rows.map((r) => Number(r.getAttribute('data-revision-index')));
    expect(indices).toEqual([...indices].sort((a, b) => a - b));
  });

  it('renders adjacent-revision deltas equal to the service diff values', () => {
    // the fixture deltas were produced by the service's own report
    // differencing between R0 and R1
    const computed = subtractRates(timeline.points[0].rates, timeline.points[1].rates);
    expect(computed).toEqual(expectedDeltas);

    const container = document.createElement('div');
    renderTimeline(container, timeline);
    const secondRow = container.querySelectorAll('[data-testid="timeline-row"]')[1];
    for (const field of RATE_FIELDS) {
      expect(secondRow.querySelector(`[data-testid="delta-${field}"]`)?.textContent).toBe(
        ` ${formatDelta(expectedDeltas[field])}`,
      );
    }
  });

  it('first revision has no delta column content', () => {
    const container = document.createElement('div');
    renderTimeline(container, timeline);
    const firstRow = container.querySelectorAll('[data-testid="timeline-row"]')[0];
    expect(firstRow.querySelector('[data-testid="delta-final_pass_rate"]')).toBeNull();
  });

  it('marks the converged revision when the payload says so', () => {
    const converged: TimelinePayload = { ...timeline, converged_at: 1 };
    const container = document.createElement('div');
    renderTimeline(container, converged);
    const marked = container.querySelector('[data-converged="true"]');
    expect(marked?.getAttribute('data-revision-index')).toBe('1');
    expect(container.querySelector('[data-testid="convergence-note"]')).not.toBeNull();
  });

  it('renders pending points while a run resolves', () => {
    const container = document.createElement('div');
    renderTimeline(container, timeline, [
      { revision_index: 2, run_id: 'run-0099', status: 'running' },
    ]);
    const pending = container.querySelector('[data-testid="timeline-pending"]');
    expect(pending?.textContent).toContain('run-0099');
    expect(pending?.textContent).toContain('evaluating');
  });
});
