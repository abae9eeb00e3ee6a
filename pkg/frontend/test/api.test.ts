import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { QueryScheduler, ServiceClient, type FetchLike } from "../src/api.js";
import { defaultState, queryBodyForState } from "../src/state.js";

function body(tol: number) {
  const state = defaultState();
  state.tolerancePx = tol;
  return queryBodyForState(state, 960, 640);
}

function makeFetch(delayMs = 0) {
  const calls: { url: string; body: string; signal?: AbortSignal }[] = [];
  const fetchImpl: FetchLike = (url, init) => {
    calls.push({ url, body: init?.body ?? "", signal: init?.signal });
    return new Promise((resolve, reject) => {
      const done = () =>
        resolve({
          ok: true,
          status: 200,
          json: async () => ({ polylines: [], stats: { includedPoints: 0, visibleSegments: 0, reductionPct: 0 } }),
        });
      if (init?.signal?.aborted) {
        reject(Object.assign(new Error("aborted"), { name: "AbortError" }));
        return;
      }
      init?.signal?.addEventListener("abort", () =>
        reject(Object.assign(new Error("aborted"), { name: "AbortError" })),
      );
      if (delayMs === 0) done();
      else setTimeout(done, delayMs);
    });
  };
  return { calls, fetchImpl };
}

describe("query scheduler", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("stays silent while idle and before the debounce window", async () => {
    const { calls, fetchImpl } = makeFetch();
    const scheduler = new QueryScheduler(
      new ServiceClient("", fetchImpl),
      { onResult: () => {}, onError: () => {} },
      80,
    );
    scheduler.schedule(body(1));
    await vi.advanceTimersByTimeAsync(60);
    expect(calls).toHaveLength(0);
    await vi.advanceTimersByTimeAsync(40);
    expect(calls).toHaveLength(1);
    await vi.advanceTimersByTimeAsync(1000); // idle afterwards: no traffic
    expect(calls).toHaveLength(1);
  });

  it("collapses a burst of interactions into one request for the newest state", async () => {
    const { calls, fetchImpl } = makeFetch();
    const results: string[] = [];
    const scheduler = new QueryScheduler(
      new ServiceClient("", fetchImpl),
      { onResult: (b) => results.push(JSON.stringify(b.tolerancePx)), onError: () => {} },
      80,
    );
    for (let tol = 0; tol < 10; tol++) {
      scheduler.schedule(body(tol));
      await vi.advanceTimersByTimeAsync(10);
    }
    await vi.advanceTimersByTimeAsync(200);
    expect(calls).toHaveLength(1);
    expect(JSON.parse(calls[0].body).tolerancePx).toBe(9);
    expect(results).toEqual(["9"]);
  });

  it("aborts the in-flight request when a newer one fires", async () => {
    const { calls, fetchImpl } = makeFetch(500);
    const results: number[] = [];
    const errors: unknown[] = [];
    const scheduler = new QueryScheduler(
      new ServiceClient("", fetchImpl),
      { onResult: (b) => results.push(b.tolerancePx), onError: (e) => errors.push(e) },
      10,
    );
    scheduler.schedule(body(1));
    await vi.advanceTimersByTimeAsync(20); // first request now in flight
    scheduler.schedule(body(2));
    await vi.advanceTimersByTimeAsync(20); // second fires, aborting the first
    expect(calls).toHaveLength(2);
    expect(calls[0].signal?.aborted).toBe(true);
    await vi.advanceTimersByTimeAsync(1000);
    expect(results).toEqual([2]); // only the newest response is delivered
    expect(errors).toEqual([]); // aborts are not surfaced as errors
  });

  it("reports failures without dropping the scheduler", async () => {
    const failing: FetchLike = async () => ({
      ok: false,
      status: 500,
      json: async () => ({}),
    });
    const errors: unknown[] = [];
    const scheduler = new QueryScheduler(
      new ServiceClient("", failing),
      { onResult: () => {}, onError: (e) => errors.push(e) },
      10,
    );
    scheduler.schedule(body(1));
    await vi.advanceTimersByTimeAsync(50);
    expect(errors).toHaveLength(1);
    expect(scheduler.busy).toBe(false);
  });
});
