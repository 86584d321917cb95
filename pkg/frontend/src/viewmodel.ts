// Stream-ordered reducer: every mutation of the view state comes from the
// ordered WebSocket stream (events + state snapshots), so the transcript
// always matches the server's event order.

import type { ExecutorState, WireMessage } from "./types";

export type BubbleRole = "user" | "assurance" | "question";

export interface Bubble {
  role: BubbleRole;
  text: string;
  seq: number;
  awaiting: boolean; // question still waiting for the user's answer
}

export interface TimelineEntry {
  seq: number;
  progress: number;
  kind: string;
}

export class SessionViewModel {
  sessionId = "";
  phase = "disconnected";
  mode = "";
  progress = 0;
  executor: ExecutorState | null = null;
  trajectoryHash = "";
  originalHash = "";
  pendingQuestion: string | null = null;
  transcript: Bubble[] = [];
  timeline: TimelineEntry[] = [];
  lastSeq = -1;
  gapDetected = false;

  reset(sessionId: string): void {
    this.sessionId = sessionId;
    this.phase = "connecting";
    this.mode = "";
    this.progress = 0;
    this.executor = null;
    this.trajectoryHash = "";
    this.originalHash = "";
    this.pendingQuestion = null;
    this.transcript = [];
    this.timeline = [];
    this.lastSeq = -1;
    this.gapDetected = false;
  }

  get awaitingAnswer(): boolean {
    return this.phase === "awaiting_clarification";
  }

  applyMessage(message: WireMessage): void {
    if (message.type === "state") {
      const s = message.state;
      this.phase = s.phase;
      this.mode = s.mode;
      this.progress = s.progress;
      this.executor = s.executor;
      this.trajectoryHash = s.trajectory_hash;
      this.originalHash = s.original_hash;
      this.pendingQuestion = s.pending_question;
      if (s.phase !== "awaiting_clarification") {
        for (const bubble of this.transcript) bubble.awaiting = false;
      }
      return;
    }

    const event = message.event;
    if (event.seq <= this.lastSeq) return; // backlog replay after reconnect
    if (event.seq > this.lastSeq + 1) this.gapDetected = true;
    this.lastSeq = event.seq;
    this.mode = this.mode || event.mode;
    this.timeline.push({ seq: event.seq, progress: event.progress, kind: event.kind });

    const text = typeof event.payload.text === "string" ? event.payload.text : "";
    if (event.kind === "utterance" && text) {
      this.transcript.push({ role: "user", text, seq: event.seq, awaiting: false });
    } else if (event.kind === "assurance" && text && event.mode === "bidirectional") {
      this.transcript.push({ role: "assurance", text, seq: event.seq, awaiting: false });
    } else if (event.kind === "question" && text && event.mode === "bidirectional") {
      for (const bubble of this.transcript) bubble.awaiting = false;
      this.transcript.push({ role: "question", text, seq: event.seq, awaiting: true });
    }
  }

  feedbackBubbles(): Bubble[] {
    return this.transcript.filter((b) => b.role !== "user");
  }
}
