// Wireframe renderer for one frame of a flex path. Drawing goes through a
// small surface interface so tests can record commands instead of rasterizing.
// Color conventions: the equator loop is blue, intersecting face pairs are
// tinted red, phantom pairs are dashed ghost edges.

import type { MeshPayload } from "./types.js";

export const EQUATOR_COLOR = "#1f4fd8";
export const TINT_COLOR = "#d62728";
export const PHANTOM_COLOR = "#777777";
export const EDGE_COLOR = "#222222";
export const FACE_FILL = "#d8d8e8";

export interface DrawSurface {
  width: number;
  height: number;
  clear(): void;
  polygon(points: [number, number][], fill: string, alpha: number): void;
  line(
    a: [number, number],
    b: [number, number],
    color: string,
    width: number,
    dashed: boolean,
  ): void;
}

export interface ViewAngles {
  yaw: number;
  pitch: number;
  zoom: number;
}

export interface OverlayData {
  equator: number[] | null;
  phantomPairs: number[][];
  intersectingFaces: Set<number>;
  showEquator: boolean;
  showIntersections: boolean;
  showPhantoms: boolean;
}

function rotate(v: number[], yaw: number, pitch: number): [number, number, number] {
  const cy = Math.cos(yaw), sy = Math.sin(yaw);
  const cp = Math.cos(pitch), sp = Math.sin(pitch);
  const x = cy * v[0] + sy * v[2];
  const z0 = -sy * v[0] + cy * v[2];
  const y = cp * v[1] - sp * z0;
  const z = sp * v[1] + cp * z0;
  return [x, y, z];
}

export function projectVertices(
  vertices: number[][],
  view: ViewAngles,
  width: number,
  height: number,
): { pts: [number, number][]; depth: number[] } {
  const rotated = vertices.map((v) => rotate(v, view.yaw, view.pitch));
  let maxAbs = 1e-12;
  for (const [x, y] of rotated) maxAbs = Math.max(maxAbs, Math.abs(x), Math.abs(y));
  const scale = (0.42 * Math.min(width, height) * view.zoom) / maxAbs;
  const cx = width / 2;
  const cyn = height / 2;
  return {
    pts: rotated.map(([x, y]) => [cx + scale * x, cyn - scale * y] as [number, number]),
    depth: rotated.map(([, , z]) => z),
  };
}

export function renderFrame(
  surface: DrawSurface,
  mesh: MeshPayload,
  vertices: number[][],
  overlays: OverlayData,
  view: ViewAngles,
): void {
  surface.clear();
  const { pts, depth } = projectVertices(vertices, view, surface.width, surface.height);

  // painter's order: far faces first
  const order = mesh.faces
    .map((f, i) => ({ i, z: (depth[f[0]] + depth[f[1]] + depth[f[2]]) / 3 }))
    .sort((a, b) => a.z - b.z)
    .map((e) => e.i);

  for (const fi of order) {
    const [a, b, c] = mesh.faces[fi];
    const poly: [number, number][] = [pts[a], pts[b], pts[c]];
    const tinted = overlays.showIntersections && overlays.intersectingFaces.has(fi);
    surface.polygon(poly, tinted ? TINT_COLOR : FACE_FILL, tinted ? 0.55 : 0.75);
    surface.line(pts[a], pts[b], EDGE_COLOR, 1, false);
    surface.line(pts[b], pts[c], EDGE_COLOR, 1, false);
    surface.line(pts[c], pts[a], EDGE_COLOR, 1, false);
  }

  if (overlays.showEquator && overlays.equator && overlays.equator.length >= 2) {
    const loop = overlays.equator;
    for (let k = 0; k < loop.length; k++) {
      const a = loop[k];
      const b = loop[(k + 1) % loop.length];
      surface.line(pts[a], pts[b], EQUATOR_COLOR, 3, false);
    }
  }

  if (overlays.showPhantoms) {
    for (const [u, v] of overlays.phantomPairs) {
      surface.line(pts[u], pts[v], PHANTOM_COLOR, 2, true);
    }
  }
}

export function overlaysFor(
  mesh: MeshPayload,
  pairs: number[][],
  toggles: { equator: boolean; intersections: boolean; phantoms: boolean },
): OverlayData {
  const faces = new Set<number>();
  for (const [f1, f2] of pairs) {
    faces.add(f1);
    faces.add(f2);
  }
  return {
    equator: mesh.equator ?? null,
    phantomPairs: mesh.phantom_pairs ?? [],
    intersectingFaces: faces,
    showEquator: toggles.equator,
    showIntersections: toggles.intersections,
    showPhantoms: toggles.phantoms,
  };
}
