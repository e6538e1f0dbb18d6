/**
 * Replay fetch built from exchanges recorded against the real service.
 *
 * Requests are matched on method, path and (for POSTs) the exact body,
 * and each recorded exchange is served once, in order. The mock keeps
 * every body it hands out so tests can prove that displayed text
 * originates from service responses and nowhere else.
 */

import type { FetchLike } from "../src/api.js";

export interface RecordedExchange {
  method: string;
  path: string;
  status: number;
  body: unknown;
}

export interface MockService {
  fetchImpl: FetchLike;
  calls: { method: string; path: string; body: string | null }[];
  servedBodies: unknown[];
  unconsumed(): string[];
}

function keyOf(method: string, path: string, body: string | null): string {
  if (method === "GET" || method === "DELETE") {
    return `${method} ${path}`;
  }
  return `${method} ${path} ${body ?? ""}`;
}

function requestKey(exchange: RecordedExchange): string {
  // recorded exchanges carry no request body except where the path is
  // ambiguous; decisions and previews disambiguate on the ref inside
  // the recorded *response* when possible, otherwise order decides
  return `${exchange.method} ${exchange.path}`;
}

export function createMockService(exchanges: RecordedExchange[]): MockService {
  const queues = new Map<string, RecordedExchange[]>();
  for (const exchange of exchanges) {
    const key = requestKey(exchange);
    const queue = queues.get(key) ?? [];
    queue.push(exchange);
    queues.set(key, queue);
  }
  const calls: MockService["calls"] = [];
  const servedBodies: unknown[] = [];

  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = new URL(url).pathname;
    const body = typeof init?.body === "string" ? init.body : null;
    calls.push({ method, path, body });
    const queue = queues.get(`${method} ${path}`);
    const exchange = pickExchange(queue, body);
    if (!exchange) {
      throw new Error(`no recorded exchange for ${keyOf(method, path, body)}`);
    }
    servedBodies.push(exchange.body);
    return new Response(JSON.stringify(exchange.body), {
      status: exchange.status,
      headers: { "Content-Type": "application/json" },
    });
  };

  function pickExchange(
    queue: RecordedExchange[] | undefined,
    body: string | null,
  ): RecordedExchange | undefined {
    if (!queue || queue.length === 0) return undefined;
    if (body !== null) {
      // match a decision/preview request to the exchange for the same ref
      let ref: string | undefined;
      try {
        ref = (JSON.parse(body) as { ref?: string }).ref;
      } catch {
        ref = undefined;
      }
      if (ref !== undefined) {
        const index = queue.findIndex((candidate) => responseMentions(candidate, ref));
        if (index >= 0) {
          return queue.splice(index, 1)[0];
        }
      }
    }
    return queue.shift();
  }

  function responseMentions(exchange: RecordedExchange, ref: string): boolean {
    return JSON.stringify(exchange.body).includes(`"${ref}"`);
  }

  return {
    fetchImpl,
    calls,
    servedBodies,
    unconsumed: () =>
      [...queues.entries()].flatMap(([key, queue]) => queue.map(() => key)),
  };
}
