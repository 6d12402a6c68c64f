// Session state and the design-loop workflow. All geometry-derived numbers
// shown to the user come straight out of service payloads; this module only
// stores, validates and selects them.

import { ApiError, ExplorerApi } from "./api.js";
import type {
  CheckFrameRow,
  CheckPathPayload,
  FramesPayload,
  MeshPayload,
  ModelSchema,
} from "./types.js";

export interface Overlays {
  equator: boolean;
  intersections: boolean;
  phantoms: boolean;
}

export interface LoadedPath {
  mesh: MeshPayload;
  frames: FramesPayload;
  check: CheckPathPayload;
}

export interface SessionState {
  catalog: ModelSchema[];
  catalogError: string | null;
  selectedModel: string | null;
  paramValues: Record<string, number>;
  paramErrors: Record<string, string>;
  path: LoadedPath | null;
  frameIndex: number;
  overlays: Overlays;
  busy: boolean;
  statusMessage: string;
}

export function initialState(): SessionState {
  return {
    catalog: [],
    catalogError: null,
    selectedModel: null,
    paramValues: {},
    paramErrors: {},
    path: null,
    frameIndex: 0,
    overlays: { equator: true, intersections: true, phantoms: true },
    busy: false,
    statusMessage: "pick a model",
  };
}

export function schemaOf(state: SessionState, model?: string): ModelSchema | null {
  const name = model ?? state.selectedModel;
  return state.catalog.find((m) => m.name === name) ?? null;
}

export function selectModel(state: SessionState, name: string): void {
  const schema = state.catalog.find((m) => m.name === name);
  if (!schema) throw new Error(`model ${name} is not in the catalog`);
  state.selectedModel = name;
  state.paramValues = Object.fromEntries(schema.params.map((p) => [p.name, p.default]));
  state.paramErrors = {};
}

/** Inline range validation straight from the catalog schema; an offending
 * value is recorded (for the UI to flag) and submission is blocked. */
export function setParam(state: SessionState, name: string, value: number): void {
  const schema = schemaOf(state);
  if (!schema) throw new Error("no model selected");
  const spec = schema.params.find((p) => p.name === name);
  if (!spec) throw new Error(`model has no parameter ${name}`);
  state.paramValues[name] = value;
  if (!Number.isFinite(value) || value < spec.lo || value > spec.hi) {
    state.paramErrors[name] = `${name} must lie in [${spec.lo}, ${spec.hi}]`;
  } else {
    delete state.paramErrors[name];
  }
}

export function paramsValid(state: SessionState): boolean {
  return Object.keys(state.paramErrors).length === 0 && state.selectedModel !== null;
}

export function clampFrame(state: SessionState, index: number): number {
  if (!state.path) return 0;
  const n = state.path.frames.frames.length;
  return Math.min(Math.max(0, Math.round(index)), n - 1);
}

/** Scrubbing is pure selection: no requests, no recomputation. */
export function scrub(state: SessionState, index: number): void {
  state.frameIndex = clampFrame(state, index);
}

export function currentCheckRow(state: SessionState): CheckFrameRow | null {
  if (!state.path) return null;
  return state.path.check.frames[state.frameIndex] ?? null;
}

export interface FrameReadout {
  frame: number;
  total: number;
  driver: number | null;
  edgeErr: number | null;
  volume: number | null;
  symResidual: number | null;
  embedded: boolean | null;
  intersections: number;
}

/** Numbers for the status readouts, all lifted from service payloads. */
export function frameReadout(state: SessionState): FrameReadout | null {
  if (!state.path) return null;
  const frame = state.path.frames.frames[state.frameIndex];
  const row = currentCheckRow(state);
  const t = Array.isArray(frame.t) ? frame.t[0] : frame.t;
  return {
    frame: state.frameIndex,
    total: state.path.frames.frames.length,
    driver: t ?? null,
    edgeErr: frame.diag.edge_err,
    volume: frame.diag.volume,
    symResidual: frame.diag.sym_residual,
    embedded: row ? row.embedded : null,
    intersections: row ? row.intersections : 0,
  };
}

export interface PathSummary {
  frames: number;
  status: string;
  lockReason: string | null;
  maxEdgeErr: number;
  volumeDrift: number | null;
  embeddedFrames: number;
  embeddedRunNote: string;
}

export function pathSummary(path: LoadedPath): PathSummary {
  const frames = path.frames.frames;
  let maxErr = 0;
  const vols: number[] = [];
  for (const f of frames) {
    maxErr = Math.max(maxErr, f.diag.edge_err);
    if (f.diag.volume !== null) vols.push(f.diag.volume);
  }
  const embedded = path.check.frames.filter((r) => r.embedded).length;
  return {
    frames: frames.length,
    status: path.frames.status,
    lockReason: path.frames.lock_reason,
    maxEdgeErr: maxErr,
    volumeDrift: vols.length ? Math.max(...vols) - Math.min(...vols) : null,
    embeddedFrames: embedded,
    embeddedRunNote: `${embedded}/${frames.length} frames embedded`,
  };
}

export async function loadCatalog(state: SessionState, api: ExplorerApi): Promise<void> {
  try {
    state.catalog = await api.loadCatalog();
    state.catalogError = null;
    state.statusMessage = state.catalog.length
      ? "catalog loaded"
      : "catalog is empty; controls disabled";
  } catch (err) {
    state.catalog = [];
    state.catalogError = err instanceof Error ? err.message : String(err);
    state.statusMessage = "service unreachable";
  }
}

/** Build + flex + check round trip. The previous path stays on screen until
 * the replacement has fully arrived; a solver failure (422 flavour) leaves
 * prior state intact and surfaces the reason. Only one job runs at a time. */
export async function rebuildAndFlex(
  state: SessionState,
  api: ExplorerApi,
  frames = 100,
): Promise<boolean> {
  if (!paramsValid(state) || !state.selectedModel) {
    state.statusMessage = "fix parameter errors before submitting";
    return false;
  }
  if (state.busy) {
    state.statusMessage = "a flex job is already running";
    return false;
  }
  state.busy = true;
  state.statusMessage = "building and flexing...";
  try {
    const mesh = await api.build(state.selectedModel, state.paramValues);
    const job = await api.submitFlex(state.selectedModel, state.paramValues, frames);
    const rec = await api.pollJob(job);
    if (rec.status === "failed") {
      state.statusMessage = `solver failed: ${rec.error?.message ?? "unknown"} (${rec.error?.reason ?? "?"})`;
      return false;
    }
    const framesPayload = await api.fetchFrames(job);
    const check = await api.checkPath(mesh, framesPayload.frames);
    state.path = { mesh, frames: framesPayload, check };
    state.frameIndex = 0;
    const summary = pathSummary(state.path);
    const note = summary.status === "locked"
      ? ` (locked early: ${summary.lockReason ?? "motion range boundary"})`
      : "";
    state.statusMessage =
      `edge err ${summary.maxEdgeErr.toExponential(1)}, ` +
      `volume drift ${summary.volumeDrift === null ? "n/a" : summary.volumeDrift.toExponential(1)}, ` +
      `${summary.embeddedRunNote}${note}`;
    return true;
  } catch (err) {
    if (err instanceof ApiError) {
      state.statusMessage = `request failed: ${err.message} (${err.reason})`;
    } else {
      state.statusMessage = `request failed: ${err instanceof Error ? err.message : err}`;
    }
    return false; // prior path untouched
  } finally {
    state.busy = false;
  }
}
