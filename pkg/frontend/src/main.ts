// DOM wiring for the studio. All state transitions live in state.ts; this
// module only moves data between the API, the view model, and the page.

import { Api, ApiError } from "./api.js";
import { pollRun } from "./poll.js";
import { computeViewBox, drawScene, type Draw2D, type ViewBox } from "./render.js";
import {
  canContinue,
  canSubmit,
  checkColumns,
  initialState,
  requestFailed,
  runFailed,
  runLoaded,
  scoringRows,
  selectMap,
  setCursor,
  submitStarted,
  withMaps,
  type ViewModel,
} from "./state.js";
import type { RunRecord } from "./types.js";

const api = new Api((url, init) => fetch(url, init));

let vm: ViewModel = initialState();
let viewBox: ViewBox | null = null;
let playing = false;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const mapSelect = el<HTMLSelectElement>("map-select");
const promptBox = el<HTMLTextAreaElement>("prompt");
const submitBtn = el<HTMLButtonElement>("submit");
const continueBox = el<HTMLTextAreaElement>("continue-prompt");
const continueBtn = el<HTMLButtonElement>("continue");
const seedBox = el<HTMLInputElement>("seed");
const scrubber = el<HTMLInputElement>("scrubber");
const playBtn = el<HTMLButtonElement>("play");
const banner = el<HTMLDivElement>("banner");
const breadcrumbBar = el<HTMLDivElement>("breadcrumb");
const statusLine = el<HTMLDivElement>("status-line");
const scoresTable = el<HTMLTableElement>("scores");
const planView = el<HTMLPreElement>("plan-view");
const canvas = el<HTMLCanvasElement>("scene");

function redraw() {
  const ctx = canvas.getContext("2d") as unknown as Draw2D | null;
  if (!ctx || !vm.digest) return;
  const frame = vm.frames[vm.cursor] ?? null;
  drawScene(ctx, vm.digest, frame, canvas.width, canvas.height, viewBox ?? undefined);
}

function renderScores() {
  const selection = vm.activeRun?.artifacts.selection;
  const rows = scoringRows(selection ?? null);
  const columns = checkColumns(selection ?? null);
  const header =
    "<tr><th>road</th>" +
    columns.map((c) => `<th>${c}</th>`).join("") +
    "<th>total</th></tr>";
  const body = rows
    .map((row) => {
      const cells = columns
        .map((c) => `<td>${row.checks[c] ? "✓" : ""}</td>`)
        .join("");
      const cls = row.isMax ? (row.isChosen ? "max chosen" : "max") : "";
      return `<tr class="${cls}"><td>${row.road}</td>${cells}<td>${row.total}</td></tr>`;
    })
    .join("");
  scoresTable.innerHTML = header + body;
}

function renderBreadcrumb() {
  breadcrumbBar.innerHTML = "";
  vm.breadcrumb.forEach((id, i) => {
    const button = document.createElement("button");
    button.textContent = `#${i + 1} ${id.slice(0, 6)}`;
    button.disabled = vm.activeRun?.id === id;
    button.addEventListener("click", () => void loadRun(id));
    breadcrumbBar.appendChild(button);
  });
}

function sync() {
  submitBtn.disabled = !canSubmit(vm, promptBox.value);
  continueBtn.disabled = !canContinue(vm) || continueBox.value.trim().length === 0;
  continueBtn.title = canContinue(vm)
    ? ""
    : "continuation needs a finished run";
  banner.textContent = vm.error ?? "";
  banner.style.display = vm.error ? "block" : "none";
  scrubber.max = String(Math.max(0, vm.frames.length - 1));
  scrubber.value = String(vm.cursor);
  const run = vm.activeRun;
  if (run && run.status === "done") {
    const frame = vm.frames[vm.cursor];
    statusLine.textContent =
      `run ${run.id} | road ${run.artifacts.selection?.chosen ?? "?"} | ` +
      `${run.outcome?.kind ?? ""} | tick ${frame ? frame.tick : 0}/${vm.frames.length - 1}`;
  } else if (run) {
    statusLine.textContent = `run ${run.id}: ${run.status}`;
  } else {
    statusLine.textContent = "no run yet";
  }
  planView.textContent = run?.artifacts.plan
    ? JSON.stringify(run.artifacts.plan, null, 1)
    : "";
  renderScores();
  renderBreadcrumb();
  redraw();
}

async function loadRun(id: string) {
  const run = await pollRun(api, id);
  if (run.status !== "done") {
    vm = runFailed(vm, run);
    sync();
    return;
  }
  if (vm.selectedMap !== run.request.map || !vm.digest) {
    const digest = await api.mapDigest(run.request.map);
    vm = selectMap(vm, run.request.map, digest);
    viewBox = computeViewBox(digest);
    mapSelect.value = run.request.map;
  }
  const [frames, lineage] = await Promise.all([api.frames(run.id), api.lineage(run.id)]);
  vm = runLoaded(vm, run, frames, lineage);
  sync();
}

async function handle(action: () => Promise<RunRecord>) {
  vm = submitStarted(vm);
  sync();
  try {
    const run = await action();
    await loadRun(run.id);
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    vm = requestFailed(vm, message);
    sync();
  }
}

async function boot() {
  const maps = await api.listMaps();
  vm = withMaps(vm, maps);
  mapSelect.innerHTML = maps
    .map((m) => `<option value="${m.name}">${m.name} (${m.roads} roads)</option>`)
    .join("");
  if (vm.selectedMap) {
    const digest = await api.mapDigest(vm.selectedMap);
    vm = selectMap(vm, vm.selectedMap, digest);
    viewBox = computeViewBox(digest);
  }
  sync();
}

mapSelect.addEventListener("change", () => {
  void (async () => {
    const digest = await api.mapDigest(mapSelect.value);
    vm = selectMap(vm, mapSelect.value, digest);
    viewBox = computeViewBox(digest);
    sync();
  })();
});

promptBox.addEventListener("input", sync);
continueBox.addEventListener("input", sync);

submitBtn.addEventListener("click", () => {
  const prompt = promptBox.value;
  if (!canSubmit(vm, prompt) || !vm.selectedMap) return;
  void handle(() => api.createRun(prompt, vm.selectedMap as string, Number(seedBox.value) || 0));
});

continueBtn.addEventListener("click", () => {
  const run = vm.activeRun;
  if (!run || !canContinue(vm)) return;
  void handle(() => api.continueRun(run.id, continueBox.value, Number(seedBox.value) || 0));
});

scrubber.addEventListener("input", () => {
  vm = setCursor(vm, Number(scrubber.value));
  sync();
});

playBtn.addEventListener("click", () => {
  playing = !playing;
  playBtn.textContent = playing ? "pause" : "play";
});

setInterval(() => {
  if (!playing || vm.frames.length === 0) return;
  const next = vm.cursor + 1;
  if (next >= vm.frames.length) {
    playing = false;
    playBtn.textContent = "play";
    return;
  }
  vm = setCursor(vm, next);
  sync();
}, 100);

void boot();
