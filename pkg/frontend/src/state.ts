// View model for the studio: pure state transitions, no I/O. Every number
// shown in the UI comes from server payloads carried in this state.

import type { Frame, MapDigest, MapInfo, RunRecord, Selection } from "./types.js";

export interface ViewModel {
  maps: MapInfo[];
  selectedMap: string | null;
  digest: MapDigest | null;
  activeRun: RunRecord | null;
  frames: Frame[];
  cursor: number;
  breadcrumb: string[];
  error: string | null;
  busy: boolean;
}

export function initialState(): ViewModel {
  return {
    maps: [],
    selectedMap: null,
    digest: null,
    activeRun: null,
    frames: [],
    cursor: 0,
    breadcrumb: [],
    error: null,
    busy: false,
  };
}

export function withMaps(vm: ViewModel, maps: MapInfo[]): ViewModel {
  const selectedMap = vm.selectedMap ?? (maps.length ? maps[0].name : null);
  return { ...vm, maps, selectedMap };
}

export function selectMap(vm: ViewModel, name: string, digest: MapDigest): ViewModel {
  return { ...vm, selectedMap: name, digest };
}

export function submitStarted(vm: ViewModel): ViewModel {
  return { ...vm, busy: true, error: null };
}

export function runLoaded(
  vm: ViewModel,
  run: RunRecord,
  frames: Frame[],
  lineage: string[],
): ViewModel {
  return {
    ...vm,
    busy: false,
    activeRun: run,
    frames,
    cursor: 0,
    breadcrumb: lineage,
    error: null,
  };
}

export function runFailed(vm: ViewModel, run: RunRecord): ViewModel {
  const error = run.error
    ? `failed at ${run.error.stage}: ${run.error.type}: ${run.error.message}`
    : "run failed";
  return { ...vm, busy: false, activeRun: run, frames: [], cursor: 0, error };
}

export function requestFailed(vm: ViewModel, message: string): ViewModel {
  return { ...vm, busy: false, error: message };
}

export function setCursor(vm: ViewModel, tick: number): ViewModel {
  const max = Math.max(0, vm.frames.length - 1);
  const cursor = Math.min(Math.max(0, Math.round(tick)), max);
  return { ...vm, cursor };
}

/** The continuation control is enabled only for a finished parent run. */
export function canContinue(vm: ViewModel): boolean {
  return !vm.busy && vm.activeRun !== null && vm.activeRun.status === "done";
}

export function canSubmit(vm: ViewModel, prompt: string): boolean {
  return !vm.busy && vm.selectedMap !== null && prompt.trim().length > 0;
}

export interface ScoreRow {
  road: string;
  total: number;
  checks: Record<string, boolean>;
  isMax: boolean;
  isChosen: boolean;
}

/** Rows for the scoring panel, straight from the server's selection payload. */
export function scoringRows(selection: Selection | undefined | null): ScoreRow[] {
  if (!selection) return [];
  const entries = Object.entries(selection.scores);
  const best = Math.max(...entries.map(([, entry]) => entry.total));
  return entries
    .map(([road, entry]) => ({
      road,
      total: entry.total,
      checks: entry.per_check,
      isMax: entry.total === best,
      isChosen: road === selection.chosen,
    }))
    .sort((a, b) => b.total - a.total || a.road.localeCompare(b.road));
}

export function checkColumns(selection: Selection | undefined | null): string[] {
  if (!selection) return [];
  const names = new Set<string>();
  for (const entry of Object.values(selection.scores)) {
    for (const name of Object.keys(entry.per_check)) names.add(name);
  }
  return [...names].sort();
}
