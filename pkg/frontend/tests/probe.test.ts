import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { Client } from '../src/api';
import { WhatIfProbe } from '../src/probe';
import type { Prediction } from '../src/types';

function clientWith(fn: (record: Record<string, unknown>) => Promise<Prediction>): Client {
  const client = new Client('');
  client.probe = ((_: string, record: Record<string, number | string>) =>
    fn(record)) as Client['probe'];
  return client;
}

describe('what-if probe', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('debounces rapid edits into a single request', async () => {
    let calls = 0;
    const client = clientWith(async () => {
      calls += 1;
      return { score: 0.9, label: 1 };
    });
    const seen: Prediction[] = [];
    const probe = new WhatIfProbe(client, { update: (p) => seen.push(p), stale: () => {} }, 150);
    for (let i = 0; i < 10; i += 1) {
      probe.schedule('credit', { v: i });
      vi.advanceTimersByTime(30);
    }
    vi.advanceTimersByTime(200);
    await vi.runAllTimersAsync();
    expect(calls).toBe(1);
    expect(seen.length).toBe(1);
  });

  it('marks the view stale on network failure and supports retry', async () => {
    let fail = true;
    const client = clientWith(async () => {
      if (fail) throw new Error('offline');
      return { score: 0.7, label: 1 };
    });
    const seen: Prediction[] = [];
    let retryFn: (() => void) | null = null;
    const probe = new WhatIfProbe(client, {
      update: (p) => seen.push(p),
      stale: (retry) => { retryFn = retry; },
    }, 10);
    probe.schedule('credit', { v: 1 });
    await vi.runAllTimersAsync();
    expect(retryFn).not.toBeNull();
    expect(seen.length).toBe(0);
    fail = false;
    retryFn!();
    await vi.runAllTimersAsync();
    expect(seen.length).toBe(1);
    expect(seen[0].score).toBe(0.7);
  });
});
