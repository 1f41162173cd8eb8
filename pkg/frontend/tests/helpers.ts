// Test support: fixture loading and a scriptable fetch stub.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8')) as T;
}

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURES, name), 'utf-8');
}

export type Route = (init?: RequestInit) => { status?: number; body?: unknown } | 'network-error';

/** A fetch stub driven by a {method path -> handler} table; records calls. */
export function stubFetch(routes: Record<string, Route>) {
  const calls: { key: string; body: unknown }[] = [];
  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? 'GET').toUpperCase();
    const path = input.replace(/^https?:\/\/[^/]+/, '');
    const key = `${method} ${path}`;
    const handler = routes[key];
    if (!handler) {
      throw new Error(`unstubbed request: ${key}`);
    }
    const parsedBody = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ key, body: parsedBody });
    const result = handler(init);
    if (result === 'network-error') {
      throw new TypeError('network down');
    }
    const status = result.status ?? 200;
    return new Response(JSON.stringify(result.body ?? {}), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  };
  return { fetchFn, calls };
}
