// DOM wiring: the one file that touches the document. Everything it shows is
// selected from service payloads by state.ts and drawn by render.ts.

import { ExplorerApi, httpTransport } from "./api.js";
import {
  frameReadout,
  initialState,
  loadCatalog,
  paramsValid,
  pathSummary,
  rebuildAndFlex,
  schemaOf,
  scrub,
  selectModel,
  setParam,
} from "./state.js";
import { DrawSurface, overlaysFor, renderFrame } from "./render.js";

const SERVICE = (window as unknown as { TWINFLEX_URL?: string }).TWINFLEX_URL
  ?? "http://127.0.0.1:8753";

const api = new ExplorerApi(httpTransport(SERVICE));
const state = initialState();
const view = { yaw: 0.7, pitch: 0.35, zoom: 1.0 };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const picker = el<HTMLSelectElement>("model-picker");
const paramBox = el<HTMLDivElement>("params");
const flexButton = el<HTMLButtonElement>("flex-button");
const slider = el<HTMLInputElement>("frame-slider");
const status = el<HTMLDivElement>("status");
const readout = el<HTMLDivElement>("readout");
const banner = el<HTMLDivElement>("banner");
const canvas = el<HTMLCanvasElement>("view");

function canvasSurface(ctx: CanvasRenderingContext2D): DrawSurface {
  return {
    width: canvas.width,
    height: canvas.height,
    clear: () => {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
    },
    polygon: (points, fill, alpha) => {
      ctx.save();
      ctx.globalAlpha = alpha;
      ctx.fillStyle = fill;
      ctx.beginPath();
      ctx.moveTo(points[0][0], points[0][1]);
      for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
      ctx.closePath();
      ctx.fill();
      ctx.restore();
    },
    line: (a, b, color, width, dashed) => {
      ctx.save();
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.setLineDash(dashed ? [6, 4] : []);
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
      ctx.restore();
    },
  };
}

function draw(): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || !state.path) return;
  const frame = state.path.frames.frames[state.frameIndex];
  const row = state.path.check.frames[state.frameIndex];
  const overlays = overlaysFor(state.path.mesh, row?.pairs ?? [], state.overlays);
  renderFrame(canvasSurface(ctx), state.path.mesh, frame.vertices, overlays, view);
}

function fmt(x: number | null, digits = 3): string {
  if (x === null || x === undefined) return "n/a";
  if (x !== 0 && (Math.abs(x) < 1e-3 || Math.abs(x) >= 1e4)) return x.toExponential(digits);
  return x.toFixed(digits);
}

function refreshReadout(): void {
  const r = frameReadout(state);
  if (!r) {
    readout.textContent = "no path loaded";
    return;
  }
  readout.innerHTML =
    `frame ${r.frame + 1}/${r.total} &middot; driver ${fmt(r.driver)} &middot; ` +
    `volume ${fmt(r.volume)} &middot; symmetry residual ${fmt(r.symResidual)} &middot; ` +
    `edge err ${fmt(r.edgeErr)} &middot; ` +
    (r.embedded === null ? "" : r.embedded ? "embedded" : `${r.intersections} intersecting pair(s)`);
}

function refreshParams(): void {
  paramBox.innerHTML = "";
  const schema = schemaOf(state);
  if (!schema) return;
  for (const p of schema.params) {
    const row = document.createElement("label");
    row.className = "param-row";
    const name = document.createElement("span");
    name.textContent = p.name;
    name.title = p.doc;
    const input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.value = String(state.paramValues[p.name]);
    input.addEventListener("input", () => {
      setParam(state, p.name, Number(input.value));
      err.textContent = state.paramErrors[p.name] ?? "";
      flexButton.disabled = !paramsValid(state) || state.busy;
    });
    const err = document.createElement("span");
    err.className = "param-error";
    err.textContent = state.paramErrors[p.name] ?? "";
    row.append(name, input, err);
    paramBox.append(row);
  }
}

function refreshControls(): void {
  picker.disabled = state.catalog.length === 0;
  flexButton.disabled = !paramsValid(state) || state.busy || state.catalog.length === 0;
  slider.disabled = !state.path;
  if (state.path) {
    slider.max = String(state.path.frames.frames.length - 1);
    slider.value = String(state.frameIndex);
  }
  status.textContent = state.statusMessage;
  banner.style.display = state.catalogError ? "block" : "none";
  banner.textContent = state.catalogError
    ? `service unreachable: ${state.catalogError} `
    : "";
  if (state.catalogError) {
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void boot());
    banner.append(retry);
  }
}

async function boot(): Promise<void> {
  await loadCatalog(state, api);
  picker.innerHTML = "";
  for (const m of state.catalog) {
    const opt = document.createElement("option");
    opt.value = m.name;
    opt.textContent = `${m.name} [${m.returns}]`;
    picker.append(opt);
  }
  if (state.catalog.length) {
    selectModel(state, state.catalog.some((m) => m.name === "bricard1")
      ? "bricard1"
      : state.catalog[0].name);
    picker.value = state.selectedModel!;
  }
  refreshParams();
  refreshControls();
}

picker.addEventListener("change", () => {
  selectModel(state, picker.value);
  refreshParams();
  refreshControls();
});

flexButton.addEventListener("click", () => {
  void (async () => {
    refreshControls();
    const ok = await rebuildAndFlex(state, api);
    if (ok && state.path) {
      const summary = pathSummary(state.path);
      slider.max = String(summary.frames - 1);
      slider.value = "0";
    }
    refreshControls();
    refreshReadout();
    draw();
  })();
});

slider.addEventListener("input", () => {
  scrub(state, Number(slider.value));
  refreshReadout();
  draw();
});

for (const key of ["equator", "intersections", "phantoms"] as const) {
  el<HTMLInputElement>(`toggle-${key}`).addEventListener("change", (ev) => {
    state.overlays[key] = (ev.target as HTMLInputElement).checked;
    draw();
  });
}

let dragging = false;
let last: [number, number] = [0, 0];
canvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  last = [ev.clientX, ev.clientY];
});
window.addEventListener("mouseup", () => {
  dragging = false;
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  view.yaw += (ev.clientX - last[0]) * 0.01;
  view.pitch += (ev.clientY - last[1]) * 0.01;
  last = [ev.clientX, ev.clientY];
  draw();
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  view.zoom *= ev.deltaY < 0 ? 1.1 : 0.9;
  draw();
});

void boot();
