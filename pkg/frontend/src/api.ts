/** Service client: /meta once at startup, debounced /query on interaction.
 *
 * At most one query is in flight; scheduling a newer one aborts the older
 * request and drops its pending debounce timer.  All simplification math
 * stays on the server — the client only relays state and draws responses.
 */

import type { QueryBody } from "./state.js";

export interface LineTypeMeta {
  id: number;
  name: string;
  priority: number;
  baseWidth: number;
}

export interface Meta {
  bbox: [number, number, number, number];
  pointCount: number;
  segmentCount: number;
  origSegmentCount: number;
  polylineCount: number;
  lineTypes: LineTypeMeta[];
}

export interface QueryPolyline {
  type: number;
  points: [number, number][];
}

export interface QueryStats {
  includedPoints: number;
  visibleSegments: number;
  reductionPct: number;
}

export interface QueryResponse {
  polylines: QueryPolyline[];
  stats: QueryStats;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string; signal?: AbortSignal },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  async meta(): Promise<Meta> {
    const res = await this.fetchImpl(`${this.baseUrl}/meta`);
    if (!res.ok) throw new Error(`meta failed: ${res.status}`);
    return (await res.json()) as Meta;
  }

  async query(body: QueryBody, signal?: AbortSignal): Promise<QueryResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!res.ok) throw new Error(`query failed: ${res.status}`);
    return (await res.json()) as QueryResponse;
  }
}

export interface SchedulerHooks {
  onResult: (body: QueryBody, response: QueryResponse) => void;
  onError: (err: unknown) => void;
  /** fired when a fetch starts / settles, for the spinner */
  onBusy?: (busy: boolean) => void;
}

/** Debounces query bodies and keeps at most one request in flight. */
export class QueryScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight: AbortController | null = null;
  private pending: QueryBody | null = null;
  private generation = 0;

  constructor(
    private client: ServiceClient,
    private hooks: SchedulerHooks,
    private debounceMs = 80,
  ) {}

  schedule(body: QueryBody): void {
    this.pending = body;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  /** true while a debounce timer or request is outstanding */
  get busy(): boolean {
    return this.timer !== null || this.inFlight !== null;
  }

  private async fire(): Promise<void> {
    const body = this.pending;
    if (body === null) return;
    this.pending = null;
    if (this.inFlight !== null) this.inFlight.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const gen = ++this.generation;
    this.hooks.onBusy?.(true);
    try {
      const response = await this.client.query(body, controller.signal);
      if (gen === this.generation) this.hooks.onResult(body, response);
    } catch (err) {
      const aborted = err instanceof Error && err.name === "AbortError";
      if (gen === this.generation && !aborted) this.hooks.onError(err);
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
        this.hooks.onBusy?.(false);
      }
    }
  }
}
