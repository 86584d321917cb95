// In-memory stand-in for the gateway, faithful to docs/api.md: same routes,
// payload shapes, event ordering, and mock-grammar behavior for the phrases
// the tests use. Exposes fetchFn / wsFactory for GatewayClient injection.

import type { WebSocketLike } from "../src/gateway";
import type { Outcome, SessionCreateBody, WireEvent } from "../src/types";

export class FakeWebSocket implements WebSocketLike {
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  closed = false;

  constructor(private readonly onCloseByClient: (ws: FakeWebSocket) => void) {}

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.onCloseByClient(this);
    this.onclose?.({});
  }

  push(message: unknown): void {
    if (!this.closed) this.onmessage?.({ data: JSON.stringify(message) });
  }

  dropFromServer(): void {
    this.closed = true;
    this.onclose?.({});
  }
}

interface FakeSession {
  id: string;
  mode: string;
  phase: string;
  hash: string;
  originalHash: string;
  hashCounter: number;
  pendingQuestion: string | null;
  progress: number;
  events: WireEvent[];
  sockets: Set<FakeWebSocket>;
  body: SessionCreateBody;
  current: SessionCreateBody["trajectory"];
}

const QUESTION = "Could you tell me more about what you'd like me to change?";

export class FakeGateway {
  sessions = new Map<string, FakeSession>();
  private counter = 0;

  readonly fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    return this.route(path, init?.method ?? "GET", body);
  };

  readonly wsFactory = (url: string): WebSocketLike => {
    const match = url.match(/\/sessions\/([^/]+)\/events$/);
    const session = match ? this.sessions.get(match[1]) : undefined;
    if (!session) {
      const orphan = new FakeWebSocket(() => undefined);
      queueMicrotask(() => orphan.dropFromServer());
      return orphan;
    }
    const socket = new FakeWebSocket((ws) => session.sockets.delete(ws));
    session.sockets.add(socket);
    queueMicrotask(() => {
      for (const event of session.events) socket.push({ type: "event", event });
      socket.push({ type: "state", state: this.stateOf(session) });
    });
    return socket;
  };

  private respond(status: number, payload: unknown): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private route(path: string, method: string, body: unknown): Response {
    if (path === "/sessions" && method === "POST") {
      return this.createSession(body as SessionCreateBody);
    }
    const match = path.match(/^\/sessions\/([^/]+)\/(state|log|trajectory|utterance|clarification|stop)$/);
    if (!match) return this.respond(404, { detail: "no such route" });
    const session = this.sessions.get(match[1]);
    if (!session) return this.respond(404, { detail: `unknown session '${match[1]}'` });
    switch (match[2]) {
      case "state":
        return this.respond(200, this.stateOf(session));
      case "log":
        return this.respond(200, { events: session.events });
      case "trajectory":
        return this.respond(200, {
          trajectory_hash: session.hash,
          current: session.current,
          original: session.body.trajectory,
          landmarks: session.body.landmarks,
        });
      case "utterance":
        return this.utterance(session, (body as { text: string }).text);
      case "clarification":
        return this.clarification(session, (body as { text: string }).text);
      case "stop":
        session.phase = "stopped";
        this.emit(session, "stop", {});
        this.broadcastState(session);
        return this.respond(200, { phase: "stopped" });
    }
    return this.respond(404, { detail: "no such route" });
  }

  private createSession(body: SessionCreateBody): Response {
    if (body.trajectory.length < 2) {
      return this.respond(422, { detail: "invalid trajectory: at least 2 waypoints" });
    }
    const id = `fake-${++this.counter}`;
    const session: FakeSession = {
      id,
      mode: body.mode,
      phase: "running",
      hash: `hash-${id}-0`,
      originalHash: `hash-${id}-0`,
      hashCounter: 0,
      pendingQuestion: null,
      progress: 0,
      events: [],
      sockets: new Set(),
      body,
      current: body.trajectory,
    };
    this.sessions.set(id, session);
    return this.respond(201, { id, state: this.stateOf(session) });
  }

  private stateOf(session: FakeSession) {
    const first = session.current[0];
    return {
      phase: session.phase,
      mode: session.mode,
      progress_time: 0,
      progress: session.progress,
      executor: { pos: first.pos, vel: first.vel, force: first.force },
      trajectory_hash: session.hash,
      original_hash: session.originalHash,
      pending_question: session.pendingQuestion,
      event_count: session.events.length,
    };
  }

  private emit(session: FakeSession, kind: string, payload: Record<string, unknown>): void {
    const event: WireEvent = {
      seq: session.events.length,
      wall_time: session.events.length,
      progress: session.progress,
      kind,
      mode: session.mode,
      payload,
    };
    session.events.push(event);
    for (const socket of session.sockets) socket.push({ type: "event", event });
  }

  broadcastState(session: FakeSession): void {
    for (const socket of session.sockets) {
      socket.push({ type: "state", state: this.stateOf(session) });
    }
  }

  private applyChange(session: FakeSession, factor: number): void {
    session.hashCounter += 1;
    session.hash = `hash-${session.id}-${session.hashCounter}`;
    session.current = session.current.map((wp) => ({
      ...wp,
      vel: Math.min(wp.vel * factor, 0.1),
    }));
  }

  private interpretFactor(text: string): number | null {
    const lowered = text.toLowerCase();
    if (/(faster|closer|harder)/.test(lowered)) return 2.0;
    if (/(slower|softer|gentler|away)/.test(lowered)) return 0.5;
    return null;
  }

  private utterance(session: FakeSession, text: string): Response {
    if (session.phase === "awaiting_clarification") return this.clarification(session, text);
    if (session.phase !== "running" && session.phase !== "paused") {
      return this.respond(409, { detail: `cannot accept an utterance in phase ${session.phase}` });
    }
    if (!text.trim()) return this.respond(422, { detail: "utterance must be nonempty" });
    this.emit(session, "utterance", { text });

    if (session.mode === "no_modification") {
      this.emit(session, "ignored", { reason: "no_modification" });
      this.broadcastState(session);
      return this.respond(200, this.outcome(null, false, session));
    }
    const factor = this.interpretFactor(text);
    if (factor === null) {
      if (session.mode === "bidirectional") {
        session.phase = "awaiting_clarification";
        session.pendingQuestion = QUESTION;
        this.emit(session, "question", { text: QUESTION });
        this.broadcastState(session);
        return this.respond(200, this.outcome(QUESTION, false, session));
      }
      this.emit(session, "ignored", { reason: "unclear" });
      this.broadcastState(session);
      return this.respond(200, this.outcome(null, false, session));
    }
    this.applyChange(session, factor);
    const assurance = factor > 1 ? "I'm increasing the speed." : "I'm decreasing the speed.";
    this.emit(session, "modification", {
      spec_yaml: "global:\n    clarification: false\n    velocity: 2.0\n",
      interpret_s: 0.001,
      apply_s: 0.0,
      trajectory_hash: session.hash,
    });
    const feedback = session.mode === "bidirectional" ? assurance : null;
    if (feedback) this.emit(session, "assurance", { text: feedback });
    this.broadcastState(session);
    return this.respond(200, this.outcome(feedback, true, session));
  }

  private clarification(session: FakeSession, text: string): Response {
    if (session.phase !== "awaiting_clarification") {
      return this.respond(409, { detail: `no clarification pending in phase ${session.phase}` });
    }
    this.emit(session, "utterance", { text, answers: session.pendingQuestion });
    const factor = this.interpretFactor(text);
    if (factor === null) {
      this.emit(session, "question", { text: QUESTION });
      this.broadcastState(session);
      return this.respond(200, this.outcome(QUESTION, false, session));
    }
    session.phase = "running";
    session.pendingQuestion = null;
    this.applyChange(session, factor);
    const assurance = factor > 1 ? "I'm increasing the speed." : "I'm decreasing the speed.";
    this.emit(session, "modification", {
      spec_yaml: "global:\n    clarification: false\n    velocity: 2.0\n",
      interpret_s: 0.001,
      apply_s: 0.0,
      trajectory_hash: session.hash,
    });
    this.emit(session, "assurance", { text: assurance });
    this.broadcastState(session);
    return this.respond(200, this.outcome(assurance, true, session));
  }

  private outcome(feedback: string | null, modified: boolean, session: FakeSession): Outcome {
    return { feedback, modified, phase: session.phase };
  }
}
