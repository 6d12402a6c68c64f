"""Local HTTP service exposing build/flex/check/net to scripts and the explorer.

Loopback-only by default, no auth: a desk tool. Flex jobs run asynchronously
in worker threads and are polled via /jobs/{id}; build, check and net answer
synchronously. Responses reuse the same payload builders as the CLI, so both
interfaces return byte-identical JSON for identical requests.
"""

from __future__ import annotations

import json
import threading
import traceback
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import report as report_mod
from .catalog import MODELS, catalog, model_schemas
from .errors import (
    CatalogError,
    ConstructionError,
    MeshError,
    NetError,
    SolveError,
    SymmetryError,
)
from .flexion import find_motion_range, problem_for, trace
from .meshio import dump_payload, object_from_payload, object_payload
from .netexport import export_svg, unfold
from .twinning import Crinkle, Twin

VALIDATION_ERRORS = (CatalogError, MeshError, SymmetryError, ConstructionError, NetError, ValueError, KeyError, TypeError)


class _JobStore:
    """In-memory job records; concurrent reads, exclusive mutation per job."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}
        self._counter = 0

    def create(self, request: dict) -> str:
        with self._lock:
            self._counter += 1
            job_id = f"job-{self._counter}"
            self._jobs[job_id] = {"job": job_id, "status": "pending", "request": request,
                                  "result": None, "error": None}
        return job_id

    def update(self, job_id: str, **fields):
        with self._lock:
            self._jobs[job_id].update(fields)

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            rec = self._jobs.get(job_id)
            return dict(rec) if rec else None


def _mesh_of(obj):
    return obj.mesh if isinstance(obj, (Twin, Crinkle)) else obj


def _object_from_request(body: dict):
    if "model" in body:
        name = body["model"]
        if name not in MODELS:
            raise LookupError(f"unknown model {name!r}")
        return catalog(name, body.get("params") or {})
    if "mesh" in body:
        return object_from_payload(body["mesh"])
    raise ValueError("request needs 'model' or 'mesh'")


def _drivers_from_request(body: dict, obj):
    from .cli import _resolve_driver

    spec = body.get("driver", "auto")
    if isinstance(spec, (list, tuple)):
        from .flexion import DistanceDriver

        i, j = (int(x) for x in spec)
        return [DistanceDriver(i, j)]
    return _resolve_driver(spec, obj)


def run_flex_request(body: dict) -> dict:
    """Shared by the async job worker and tests: build, trace, package frames."""
    obj = _object_from_request(body)
    problem = problem_for(obj, drivers=_drivers_from_request(body, obj))
    rng = body.get("range", "auto")
    if rng == "auto" or rng is None:
        lo, hi = find_motion_range(problem)
        if hi <= lo:
            raise SolveError("no motion found in either direction", "locked")
    else:
        lo, hi = float(rng[0]), float(rng[1])
    frames = int(body.get("frames", 100))
    if not 2 <= frames <= 100000:
        raise ValueError("frames must be between 2 and 100000")
    path = trace(problem, np.linspace(lo, hi, frames))
    payload = path.to_dict()
    payload["mesh"] = object_payload(obj)
    payload["range"] = [lo, hi]
    return payload


class Handler(BaseHTTPRequestHandler):
    server_version = "twinflex/0.1"
    protocol_version = "HTTP/1.1"

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send(self, code: int, body: bytes, content_type="application/json"):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, payload: dict):
        self._send(code, dump_payload(payload).encode())

    def _fail(self, code: int, message: str, reason: str = "invalid_request"):
        self._send_json(code, {"error": {"message": message, "reason": reason}})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ValueError("empty request body")
        body = json.loads(raw)
        if not isinstance(body, dict):
            raise ValueError("request body must be a JSON object")
        return body

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- routes -------------------------------------------------------------

    def do_GET(self):
        try:
            if self.path == "/models":
                self._send_json(200, {"models": model_schemas()})
            elif self.path.startswith("/jobs/"):
                parts = self.path.strip("/").split("/")
                rec = self.server.jobs.get(parts[1]) if len(parts) >= 2 else None
                if rec is None:
                    self._fail(404, f"no such job {parts[1] if len(parts) >= 2 else ''!r}", "unknown_job")
                elif len(parts) == 2:
                    self._send_json(200, {k: rec[k] for k in ("job", "status", "request", "error")})
                elif len(parts) == 3 and parts[2] == "frames":
                    if rec["status"] != "done":
                        self._fail(404, f"job {parts[1]} is {rec['status']}, frames not available", "job_not_done")
                    else:
                        self._send_json(200, rec["result"])
                else:
                    self._fail(404, "unknown endpoint", "unknown_endpoint")
            else:
                self._fail(404, "unknown endpoint", "unknown_endpoint")
        except Exception as exc:  # defensive: a handler crash must answer
            self._fail(500, f"internal error: {exc}", "internal")

    def do_POST(self):
        try:
            body = self._read_body()
        except (ValueError, json.JSONDecodeError) as exc:
            self._fail(400, f"malformed body: {exc}", "malformed_body")
            return
        try:
            if self.path == "/build":
                self._handle_build(body)
            elif self.path == "/flex":
                self._handle_flex(body)
            elif self.path == "/check":
                self._handle_check(body)
            elif self.path == "/net":
                self._handle_net(body)
            else:
                self._fail(404, "unknown endpoint", "unknown_endpoint")
        except LookupError as exc:
            self._fail(404, str(exc), "unknown_model")
        except SolveError as exc:
            self._fail(422, str(exc), exc.reason)
        except VALIDATION_ERRORS as exc:
            self._fail(400, f"{type(exc).__name__}: {exc}", "validation")
        except Exception:
            self._fail(500, traceback.format_exc(limit=3), "internal")

    def _handle_build(self, body: dict):
        obj = _object_from_request(body)
        payload = object_payload(obj, model=body.get("model"), params=body.get("params"))
        self._send_json(200, payload)

    def _handle_flex(self, body: dict):
        # validate eagerly so bad requests fail now, not inside the job
        _object_from_request(body)
        job_id = self.server.jobs.create(body)

        def work():
            self.server.jobs.update(job_id, status="running")
            try:
                result = run_flex_request(body)
            except SolveError as exc:
                self.server.jobs.update(job_id, status="failed",
                                        error={"message": str(exc), "reason": exc.reason})
            except Exception as exc:
                self.server.jobs.update(job_id, status="failed",
                                        error={"message": str(exc), "reason": "internal"})
            else:
                self.server.jobs.update(job_id, status="done", result=result)

        threading.Thread(target=work, daemon=True).start()
        self._send_json(202, {"job": job_id, "status": "pending"})

    def _handle_check(self, body: dict):
        obj = _object_from_request(body)
        mesh = _mesh_of(obj)
        if "frames" in body:
            rep = report_mod.check_path(mesh, body["frames"])
        else:
            coords = body.get("coordinates")
            if coords is not None:
                mesh = mesh.with_vertices(np.asarray(coords, dtype=float))
            rep = report_mod.check_mesh(mesh)
        self._send_json(200, rep)

    def _handle_net(self, body: dict):
        obj = _object_from_request(body)
        mesh = _mesh_of(obj)
        coords = None
        if body.get("frame") is not None:
            frames = body.get("frames")
            if not frames:
                raise ValueError("'frame' given without 'frames'")
            coords = np.asarray(frames[int(body["frame"])]["vertices"], dtype=float)
        net = unfold(mesh, coords, root=body.get("root"))
        svg = export_svg(net, unit_mm=float(body.get("scale", 20.0)))
        self._send(200, svg.encode(), content_type="image/svg+xml")


def make_server(host: str = "127.0.0.1", port: int = 8753, verbose: bool = False) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), Handler)
    server.jobs = _JobStore()
    server.verbose = verbose
    return server


def serve(host: str = "127.0.0.1", port: int = 8753) -> None:
    server = make_server(host, port, verbose=True)
    print(f"twinflex service on http://{host}:{port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
