// Exact string arithmetic over "12.34"-style percentage rates. Floats never
// touch the numbers the service sent; deltas are computed in integer
// hundredths so they match the service's own report differencing.

import type { RateSet } from './types.js';
import { RATE_FIELDS } from './types.js';

export function toCents(rate: string): number {
  const match = /^(-?)(\d+)(?:\.(\d{1,2}))?$/.exec(rate.trim());
  if (!match) {
    throw new Error(`not a rate: ${rate}`);
  }
  const sign = match[1] === '-' ? -1 : 1;
  const whole = parseInt(match[2], 10);
  const frac = (match[3] ?? '').padEnd(2, '0');
  return sign * (whole * 100 + (frac ? parseInt(frac, 10) : 0));
}

export function fromCents(cents: number): string {
  const sign = cents < 0 ? '-' : '';
  const abs = Math.abs(cents);
  const whole = Math.floor(abs / 100);
  const frac = String(abs % 100).padStart(2, '0');
  return `${sign}${whole}.${frac}`;
}

export function subtractRate(prev: string, cur: string): string {
  return fromCents(toCents(cur) - toCents(prev));
}

export function subtractRates(prev: RateSet, cur: RateSet): RateSet {
  const out = {} as RateSet;
  for (const field of RATE_FIELDS) {
    out[field] = subtractRate(prev[field], cur[field]);
  }
  return out;
}

export function formatDelta(delta: string): string {
  return delta.startsWith('-') ? `(${delta})` : `(+${delta})`;
}
