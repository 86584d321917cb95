// Canvas drawing of the scene: original vs current polylines, landmark
// markers, and the executor position. Drawing goes through a narrow 2D
// interface so tests can record calls without a real canvas.

import { Plane, Viewport, fitViewport, project, toPixel } from "./projection";

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

export interface Scene {
  original: number[][];
  current: number[][];
  landmarks: Record<string, number[]>;
  executor: number[] | null;
  plane: Plane;
}

function polyline(ctx: Draw2D, points: number[][], plane: Plane, vp: Viewport): void {
  if (points.length === 0) return;
  ctx.beginPath();
  points.forEach((p, i) => {
    const [x, y] = toPixel(project(p, plane), vp);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function dot(ctx: Draw2D, p: number[], plane: Plane, vp: Viewport, radius: number): void {
  const [x, y] = toPixel(project(p, plane), vp);
  ctx.beginPath();
  ctx.arc(x, y, radius, 0, 2 * Math.PI);
  ctx.fill();
}

export function sceneViewport(scene: Scene, width: number, height: number): Viewport {
  const points: [number, number][] = [];
  for (const p of scene.original) points.push(project(p, scene.plane));
  for (const p of scene.current) points.push(project(p, scene.plane));
  for (const p of Object.values(scene.landmarks)) points.push(project(p, scene.plane));
  return fitViewport(points, width, height);
}

export function drawScene(ctx: Draw2D, width: number, height: number, scene: Scene): void {
  ctx.clearRect(0, 0, width, height);
  const vp = sceneViewport(scene, width, height);

  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = "#9aa0a6";
  ctx.lineWidth = 1.5;
  polyline(ctx, scene.original, scene.plane, vp);

  ctx.setLineDash([]);
  ctx.strokeStyle = "#1a73e8";
  ctx.lineWidth = 2.5;
  polyline(ctx, scene.current, scene.plane, vp);

  ctx.fillStyle = "#d93025";
  ctx.font = "12px sans-serif";
  for (const [name, pos] of Object.entries(scene.landmarks)) {
    dot(ctx, pos, scene.plane, vp, 4);
    const [x, y] = toPixel(project(pos, scene.plane), vp);
    ctx.fillText(name, x + 6, y - 6);
  }

  if (scene.executor) {
    ctx.fillStyle = "#188038";
    dot(ctx, scene.executor, scene.plane, vp, 6);
  }
}
