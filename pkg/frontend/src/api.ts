/**
 * Thin typed client for the famvar service.
 *
 * Requests are sequenced: one in flight per client, matching the single
 * active session a wizard tab owns. The fetch implementation is
 * injectable so tests can replay recorded service responses.
 */

import type {
  ConsequenceJson,
  DecisionAction,
  DecisionResponse,
  FinalizeResponse,
  ModelUploaded,
  ModelViewJson,
  RetractResponse,
  SessionOpened,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiFailure extends Error {
  readonly status: number;
  readonly body: unknown;

  constructor(status: number, body: unknown) {
    super(`service responded ${status}`);
    this.status = status;
    this.body = body;
  }
}

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private queue: Promise<unknown> = Promise.resolve();

  constructor(baseUrl: string, fetchImpl: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private request<T>(method: string, path: string, body?: string, contentType?: string): Promise<T> {
    const run = async (): Promise<T> => {
      const init: RequestInit = { method };
      if (body !== undefined) {
        init.body = body;
        init.headers = { "Content-Type": contentType ?? "application/json" };
      }
      const response = await this.fetchImpl(this.baseUrl + path, init);
      const payload: unknown = await response.json();
      if (!response.ok) {
        throw new ApiFailure(response.status, payload);
      }
      return payload as T;
    };
    const next = this.queue.then(run, run);
    this.queue = next.catch(() => undefined); // keep the chain alive after failures
    return next;
  }

  uploadModel(xml: string): Promise<ModelUploaded> {
    return this.request("POST", "/models", xml, "application/xml");
  }

  getModelView(modelId: string): Promise<{ model: ModelViewJson }> {
    return this.request("GET", `/models/${modelId}`);
  }

  openSession(
    modelId: string,
    area: string,
    pins: string[],
    excludes: string[],
  ): Promise<SessionOpened> {
    return this.request(
      "POST",
      "/sessions",
      JSON.stringify({ modelId, area, pins, excludes }),
    );
  }

  decide(sessionId: string, action: DecisionAction, ref: string): Promise<DecisionResponse> {
    return this.request(
      "POST",
      `/sessions/${sessionId}/decisions`,
      JSON.stringify({ action, ref }),
    );
  }

  preview(
    sessionId: string,
    action: DecisionAction,
    ref: string,
  ): Promise<{ consequences: ConsequenceJson[] }> {
    return this.request(
      "POST",
      `/sessions/${sessionId}/preview`,
      JSON.stringify({ action, ref }),
    );
  }

  retract(sessionId: string, ref: string): Promise<RetractResponse> {
    return this.request("DELETE", `/sessions/${sessionId}/decisions/${ref}`);
  }

  finalize(sessionId: string): Promise<FinalizeResponse> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }
}
