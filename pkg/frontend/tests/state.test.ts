import { describe, expect, it } from 'vitest';

import type { Api, SummaryResponse } from '../src/api';
import { EMPTY_SELECTION_MESSAGE, SummaryStore, ViewState } from '../src/state';

function response(aspects: string[]): SummaryResponse {
  return {
    entity_id: 'h1',
    codes: aspects.map((_, i) => i),
    aspects,
    sentences: [
      { text: 'A sentence.', review_id: 'h1-r1', sentence_index: 0, salience: 0.5 },
    ],
    token_count: 2,
    model_version: 'deadbeef',
  };
}

interface FakeApi {
  api: Api;
  calls: string[][];
  resolveNext: (r: SummaryResponse) => void;
}

function manualApi(): FakeApi {
  const calls: string[][] = [];
  const resolvers: Array<(r: SummaryResponse) => void> = [];
  const api = {
    summarize(_entity: string, aspects: string[]) {
      calls.push([...aspects]);
      return new Promise<SummaryResponse>((resolve) => resolvers.push(resolve));
    },
  } as unknown as Api;
  return {
    api,
    calls,
    resolveNext: (r) => {
      const next = resolvers.shift();
      if (next === undefined) {
        throw new Error('no request in flight');
      }
      next(r);
    },
  };
}

const flush = () => new Promise((resolve) => setTimeout(resolve, 0));

describe('selection set semantics', () => {
  it('issues the same request regardless of toggle order', async () => {
    const a = manualApi();
    const b = manualApi();
    const first = new SummaryStore(a.api);
    const second = new SummaryStore(b.api);
    await first.selectEntity('h1');
    await second.selectEntity('h1');

    void first.toggle('rooms');
    a.resolveNext(response(['rooms']));
    await flush();
    void first.toggle('location');
    a.resolveNext(response(['location', 'rooms']));
    await flush();

    void second.toggle('location');
    b.resolveNext(response(['location']));
    await flush();
    void second.toggle('rooms');
    b.resolveNext(response(['location', 'rooms']));
    await flush();

    expect(first.sortedSelection()).toEqual(['location', 'rooms']);
    expect(second.sortedSelection()).toEqual(['location', 'rooms']);
    expect(a.calls[a.calls.length - 1]).toEqual(['location', 'rooms']);
    expect(b.calls[b.calls.length - 1]).toEqual(['location', 'rooms']);
  });

  it('toggling twice removes the aspect again', async () => {
    const fake = manualApi();
    const store = new SummaryStore(fake.api);
    await store.selectEntity('h1');
    void store.toggle('rooms');
    fake.resolveNext(response(['rooms']));
    await flush();
    await store.toggle('rooms');
    expect(store.sortedSelection()).toEqual([]);
    expect(store.state.message).toBe(EMPTY_SELECTION_MESSAGE);
  });
});

describe('empty selection', () => {
  it('shows the message and issues no request', async () => {
    const fake = manualApi();
    const store = new SummaryStore(fake.api);
    await store.selectEntity('h1');
    expect(fake.calls.length).toBe(0);
    expect(store.state.message).toBe(EMPTY_SELECTION_MESSAGE);
    expect(store.state.response).toBeNull();
  });
});

describe('trailing-edge coalescing', () => {
  it('queues exactly one refresh during a request', async () => {
    const fake = manualApi();
    const store = new SummaryStore(fake.api);
    await store.selectEntity('h1');

    void store.toggle('location'); // request 1 starts
    expect(fake.calls.length).toBe(1);
    void store.toggle('rooms'); // in flight: queued
    void store.toggle('cleanliness'); // still exactly one queued
    void store.toggle('food');
    expect(fake.calls.length).toBe(1);

    fake.resolveNext(response(['location']));
    await flush();
    // the queued refresh fires once, with the selection as it stands now
    expect(fake.calls.length).toBe(2);
    expect(fake.calls[1]).toEqual(['cleanliness', 'food', 'location', 'rooms']);

    fake.resolveNext(response(['cleanliness', 'food', 'location', 'rooms']));
    await flush();
    expect(fake.calls.length).toBe(2);
  });

  it('a queued refresh with an emptied selection becomes the message', async () => {
    const fake = manualApi();
    const store = new SummaryStore(fake.api);
    await store.selectEntity('h1');
    void store.toggle('rooms'); // request 1
    void store.toggle('rooms'); // queued refresh; selection now empty
    fake.resolveNext(response(['rooms']));
    await flush();
    expect(fake.calls.length).toBe(1);
    expect(store.state.message).toBe(EMPTY_SELECTION_MESSAGE);
  });

  it('reports request failures without fabricating a summary', async () => {
    const calls: string[][] = [];
    const api = {
      summarize(_e: string, aspects: string[]) {
        calls.push(aspects);
        return Promise.reject(new Error('service unreachable'));
      },
    } as unknown as Api;
    const store = new SummaryStore(api);
    await store.selectEntity('h1');
    await store.toggle('rooms');
    expect(store.state.response).toBeNull();
    expect(store.state.message).toBe('service unreachable');
  });
});

describe('listener notifications', () => {
  it('emits in-flight and settled states', async () => {
    const fake = manualApi();
    const seen: Array<{ inFlight: boolean; hasResponse: boolean }> = [];
    const store = new SummaryStore(fake.api, (state: ViewState) =>
      seen.push({ inFlight: state.inFlight, hasResponse: state.response !== null }),
    );
    await store.selectEntity('h1');
    void store.toggle('rooms');
    fake.resolveNext(response(['rooms']));
    await flush();
    expect(seen.some((s) => s.inFlight)).toBe(true);
    expect(seen[seen.length - 1]).toEqual({ inFlight: false, hasResponse: true });
  });
});
