// Replay transport: serves the recorded service fixtures and logs every
// request so tests can assert what was (not) sent.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { Transport, TransportResponse } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "..", "fixtures", name), "utf-8")) as T;
}

export interface RecordedCall {
  method: string;
  path: string;
  body?: unknown;
}

export interface ReplayOptions {
  failCatalog?: boolean;
  emptyCatalog?: boolean;
  failJob?: boolean;
  pendingPolls?: number;
}

export function replayTransport(calls: RecordedCall[], opts: ReplayOptions = {}): Transport {
  let polls = 0;
  return async (method, path, body): Promise<TransportResponse> => {
    calls.push({ method, path, body });
    if (path === "/models") {
      if (opts.failCatalog) return { status: 503, body: { error: { message: "down", reason: "down" } } };
      if (opts.emptyCatalog) return { status: 200, body: { models: [] } };
      return { status: 200, body: fixture("models.json") };
    }
    if (path === "/build" && method === "POST") {
      return { status: 200, body: fixture("build_bricard1.json") };
    }
    if (path === "/flex" && method === "POST") {
      return { status: 202, body: { job: "job-1", status: "pending" } };
    }
    if (path === "/jobs/job-1") {
      if (opts.failJob) return { status: 200, body: fixture("job_failed.json") };
      if (polls++ < (opts.pendingPolls ?? 1)) {
        return { status: 200, body: { job: "job-1", status: "running" } };
      }
      return { status: 200, body: fixture("job_done.json") };
    }
    if (path === "/jobs/job-1/frames") {
      return { status: 200, body: fixture("frames_bricard1.json") };
    }
    if (path === "/check" && method === "POST") {
      return { status: 200, body: fixture("check_bricard1_path.json") };
    }
    return { status: 404, body: { error: { message: `no fixture for ${path}`, reason: "unknown_endpoint" } } };
  };
}
