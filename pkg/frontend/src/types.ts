// Payload shapes of the twinflex service. The explorer displays these
// verbatim; it never derives geometric quantities of its own.

export interface ParamSchema {
  name: string;
  default: number;
  lo: number;
  hi: number;
  doc: string;
}

export interface ModelSchema {
  name: string;
  returns: string;
  doc: string;
  params: ParamSchema[];
  driver: [string, string] | null;
}

export interface MeshPayload {
  vertices: number[][];
  faces: number[][];
  labels?: Record<string, number>;
  kind?: string;
  twin_type?: string;
  equator?: number[];
  pairing?: Record<string, number>;
  boundary?: number[];
  phantom_pairs?: number[][];
  model?: string;
  params?: Record<string, number>;
}

export interface FrameDiag {
  edge_err: number;
  volume: number | null;
  sym_residual: number | null;
  min_sv: number;
  phantoms: number[];
}

export interface Frame {
  t: number | number[];
  vertices: number[][];
  diag: FrameDiag;
}

export interface FramesPayload {
  driver: (string | number)[][];
  status: string;
  lock_reason: string | null;
  frames: Frame[];
  mesh?: MeshPayload;
  range?: [number, number];
}

export interface JobRecord {
  job: string;
  status: "pending" | "running" | "done" | "failed";
  request?: unknown;
  error?: { message: string; reason: string } | null;
}

export interface CheckFrameRow {
  frame: number;
  t: number | number[] | null;
  edge_err: number | null;
  volume: number | null;
  sym_residual: number | null;
  min_sv: number | null;
  embedded: boolean;
  intersections: number;
  pairs: number[][];
}

export interface CheckPathPayload {
  mesh_check: Record<string, unknown>;
  frames: CheckFrameRow[];
}

export interface ServiceError {
  error: { message: string; reason: string };
}
