// Built-in feeding-style demo motion for the "new session" button, matching
// data/feeding_trajectory.yaml in the repository.

import type { SessionCreateBody } from "./types";

export const DEMO_LANDMARKS: Record<string, number[]> = {
  "left wrist": [0.4, 0.2, 0.75],
  "left elbow": [0.62, 0.25, 0.78],
  "left shoulder": [0.8, 0.3, 1.05],
  "right wrist": [0.4, -0.2, 0.75],
  "right elbow": [0.62, -0.25, 0.78],
  "right shoulder": [0.8, -0.3, 1.05],
  mouth: [0.85, 0.0, 1.3],
};

const positions: [number, number, number][] = [
  [0.3, 0.0, 0.9],
  [0.4, 0.0, 1.0],
  [0.55, 0.0, 1.1],
  [0.7, 0.0, 1.22],
  [0.8, 0.0, 1.28],
  [0.7, 0.0, 1.22],
  [0.55, 0.0, 1.1],
  [0.35, 0.0, 0.95],
];
const speeds = [0.02, 0.025, 0.03, 0.025, 0.02, 0.025, 0.03, 0.02];

function retimed(): { t: number; pos: number[]; vel: number; force: number }[] {
  const records = [];
  let t = 0;
  for (let i = 0; i < positions.length; i++) {
    if (i > 0) {
      const [ax, ay, az] = positions[i - 1];
      const [bx, by, bz] = positions[i];
      const length = Math.hypot(bx - ax, by - ay, bz - az);
      t += length / ((speeds[i - 1] + speeds[i]) / 2);
    }
    records.push({ t, pos: [...positions[i]], vel: speeds[i], force: 0.5 });
  }
  return records;
}

export function demoSession(mode: string): SessionCreateBody {
  return { mode, trajectory: retimed(), landmarks: DEMO_LANDMARKS };
}
