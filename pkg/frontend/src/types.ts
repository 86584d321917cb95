// Wire types mirroring the gateway API (see docs/api.md in the repo root).

export interface WaypointRecord {
  t: number;
  pos: number[];
  vel: number;
  force: number;
}

export interface ExecutorState {
  pos: number[];
  vel: number;
  force: number;
}

export interface SessionState {
  phase: string;
  mode: string;
  progress_time: number;
  progress: number;
  executor: ExecutorState;
  trajectory_hash: string;
  original_hash: string;
  pending_question: string | null;
  event_count: number;
}

export interface WireEvent {
  seq: number;
  wall_time: number;
  progress: number;
  kind: string;
  mode: string;
  payload: Record<string, unknown>;
}

export type WireMessage =
  | { type: "event"; event: WireEvent }
  | { type: "state"; state: SessionState };

export interface Outcome {
  feedback: string | null;
  modified: boolean;
  phase: string;
}

export interface TrajectoryGeometry {
  trajectory_hash: string;
  current: WaypointRecord[];
  original: WaypointRecord[];
  landmarks: Record<string, number[]>;
}

export interface SessionCreateBody {
  mode: string;
  trajectory: WaypointRecord[];
  landmarks: Record<string, number[]>;
  params?: Record<string, number>;
  pause_s?: number;
}
