// Thin client over the gateway's HTTP + WebSocket API. The fetch and
// WebSocket constructors are injectable so tests can run against fakes.

import type {
  Outcome,
  SessionCreateBody,
  SessionState,
  TrajectoryGeometry,
  WireEvent,
} from "./types";

export class GatewayError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "GatewayError";
  }
}

export interface WebSocketLike {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;
export type WebSocketFactory = (url: string) => WebSocketLike;

export interface GatewayOptions {
  fetchFn?: FetchLike;
  wsFactory?: WebSocketFactory;
}

export class GatewayClient {
  constructor(readonly baseUrl: string, private readonly options: GatewayOptions = {}) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const fetchFn = this.options.fetchFn ?? fetch.bind(globalThis);
    let response: Response;
    try {
      response = await fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new GatewayError(0, `gateway unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (body as { detail?: unknown }).detail;
      throw new GatewayError(response.status, typeof detail === "string" ? detail : response.statusText);
    }
    return body;
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(body: SessionCreateBody): Promise<{ id: string; state: SessionState }> {
    return this.post("/sessions", body) as Promise<{ id: string; state: SessionState }>;
  }

  state(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}/state`) as Promise<SessionState>;
  }

  trajectory(id: string): Promise<TrajectoryGeometry> {
    return this.request(`/sessions/${id}/trajectory`) as Promise<TrajectoryGeometry>;
  }

  log(id: string): Promise<{ events: WireEvent[] }> {
    return this.request(`/sessions/${id}/log`) as Promise<{ events: WireEvent[] }>;
  }

  sendUtterance(id: string, text: string): Promise<Outcome> {
    return this.post(`/sessions/${id}/utterance`, { text }) as Promise<Outcome>;
  }

  sendClarification(id: string, text: string): Promise<Outcome> {
    return this.post(`/sessions/${id}/clarification`, { text }) as Promise<Outcome>;
  }

  stop(id: string): Promise<{ phase: string }> {
    return this.post(`/sessions/${id}/stop`, {}) as Promise<{ phase: string }>;
  }

  openEvents(id: string): WebSocketLike {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const factory =
      this.options.wsFactory ?? ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    return factory(`${wsBase}/sessions/${id}/events`);
  }
}
