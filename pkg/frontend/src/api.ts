// Thin typed client for the twinflex service. The transport is injectable so
// contract tests can replay recorded fixtures without a network.

import type {
  CheckPathPayload,
  Frame,
  FramesPayload,
  JobRecord,
  MeshPayload,
  ModelSchema,
} from "./types.js";

export interface TransportResponse {
  status: number;
  body: unknown;
}

export type Transport = (
  method: "GET" | "POST",
  path: string,
  body?: unknown,
) => Promise<TransportResponse>;

export class ApiError extends Error {
  status: number;
  reason: string;

  constructor(status: number, message: string, reason: string) {
    super(message);
    this.status = status;
    this.reason = reason;
  }
}

export function httpTransport(baseUrl: string): Transport {
  return async (method, path, body) => {
    const resp = await fetch(baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = text;
    }
    return { status: resp.status, body: parsed };
  };
}

function unwrap<T>(resp: TransportResponse): T {
  if (resp.status >= 400) {
    const err = resp.body as { error?: { message?: string; reason?: string } } | null;
    throw new ApiError(
      resp.status,
      err?.error?.message ?? `service answered ${resp.status}`,
      err?.error?.reason ?? "unknown",
    );
  }
  return resp.body as T;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class ExplorerApi {
  private transport: Transport;
  pollIntervalMs = 150;

  constructor(transport: Transport) {
    this.transport = transport;
  }

  async loadCatalog(): Promise<ModelSchema[]> {
    const resp = await this.transport("GET", "/models");
    return unwrap<{ models: ModelSchema[] }>(resp).models;
  }

  async build(model: string, params: Record<string, number>): Promise<MeshPayload> {
    return unwrap<MeshPayload>(await this.transport("POST", "/build", { model, params }));
  }

  async submitFlex(
    model: string,
    params: Record<string, number>,
    frames: number,
  ): Promise<string> {
    const resp = await this.transport("POST", "/flex", { model, params, frames, range: "auto" });
    return unwrap<{ job: string }>(resp).job;
  }

  async pollJob(jobId: string, timeoutMs = 120_000): Promise<JobRecord> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const rec = unwrap<JobRecord>(await this.transport("GET", `/jobs/${jobId}`));
      if (rec.status === "done" || rec.status === "failed") return rec;
      if (Date.now() > deadline) throw new ApiError(408, "flex job timed out", "timeout");
      await sleep(this.pollIntervalMs);
    }
  }

  async fetchFrames(jobId: string): Promise<FramesPayload> {
    return unwrap<FramesPayload>(await this.transport("GET", `/jobs/${jobId}/frames`));
  }

  async checkPath(mesh: MeshPayload, frames: Frame[]): Promise<CheckPathPayload> {
    return unwrap<CheckPathPayload>(await this.transport("POST", "/check", { mesh, frames }));
  }
}
