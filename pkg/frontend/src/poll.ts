// Poll a run until it leaves the pending/running states.

import type { Api } from "./api.js";
import type { RunRecord } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  maxPolls?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollRun(api: Api, id: string, options: PollOptions = {}): Promise<RunRecord> {
  const intervalMs = options.intervalMs ?? 500;
  const maxPolls = options.maxPolls ?? 600;
  const sleep = options.sleep ?? defaultSleep;
  let run = await api.getRun(id);
  let polls = 1;
  while (run.status === "pending" || run.status === "running") {
    if (polls >= maxPolls) throw new Error(`run ${id} still ${run.status} after ${polls} polls`);
    await sleep(intervalMs);
    run = await api.getRun(id);
    polls += 1;
  }
  return run;
}
