// 2D orthographic projection of desk-scale 3D paths onto a selectable plane.

export type Plane = "xy" | "xz" | "yz";

export function project(p: number[], plane: Plane): [number, number] {
  switch (plane) {
    case "xy":
      return [p[0], p[1]];
    case "xz":
      return [p[0], p[2]];
    case "yz":
      return [p[1], p[2]];
  }
}

export interface Viewport {
  scale: number; // pixels per meter, uniform on both axes
  u0: number; // plane coords mapped to the canvas center
  v0: number;
  width: number;
  height: number;
}

export function fitViewport(
  points: [number, number][],
  width: number,
  height: number,
  margin = 30,
): Viewport {
  if (points.length === 0) {
    return { scale: 1, u0: 0, v0: 0, width, height };
  }
  let uMin = Infinity;
  let uMax = -Infinity;
  let vMin = Infinity;
  let vMax = -Infinity;
  for (const [u, v] of points) {
    uMin = Math.min(uMin, u);
    uMax = Math.max(uMax, u);
    vMin = Math.min(vMin, v);
    vMax = Math.max(vMax, v);
  }
  const uSpan = Math.max(uMax - uMin, 1e-6);
  const vSpan = Math.max(vMax - vMin, 1e-6);
  const scale = Math.min((width - 2 * margin) / uSpan, (height - 2 * margin) / vSpan);
  return { scale, u0: (uMin + uMax) / 2, v0: (vMin + vMax) / 2, width, height };
}

export function toPixel([u, v]: [number, number], vp: Viewport): [number, number] {
  // v axis points up on screen
  return [vp.width / 2 + (u - vp.u0) * vp.scale, vp.height / 2 - (v - vp.v0) * vp.scale];
}
