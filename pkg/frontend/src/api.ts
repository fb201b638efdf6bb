// Thin typed client over the service API. The fetch function is injected so
// contract tests can run against a mocked server.

import type { Frame, MapDigest, MapInfo, RunRecord } from "./types.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class Api {
  constructor(private fetchFn: FetchFn, private base = "") {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + url, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listMaps(): Promise<MapInfo[]> {
    return this.json<MapInfo[]>("/maps");
  }

  mapDigest(name: string): Promise<MapDigest> {
    return this.json<MapDigest>(`/maps/${encodeURIComponent(name)}`);
  }

  createRun(prompt: string, map: string, seed: number): Promise<RunRecord> {
    return this.json<RunRecord>("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt, map, seed, backend: "mock" }),
    });
  }

  getRun(id: string): Promise<RunRecord> {
    return this.json<RunRecord>(`/runs/${id}`);
  }

  continueRun(id: string, prompt: string, seed: number): Promise<RunRecord> {
    return this.json<RunRecord>(`/runs/${id}/continue`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt, seed, backend: "mock" }),
    });
  }

  lineage(id: string): Promise<string[]> {
    return this.json<string[]>(`/runs/${id}/lineage`);
  }

  async frames(id: string, start?: number, end?: number): Promise<Frame[]> {
    const params = new URLSearchParams();
    if (start !== undefined) params.set("start", String(start));
    if (end !== undefined) params.set("end", String(end));
    const suffix = params.size ? `?${params.toString()}` : "";
    const response = await this.fetchFn(`${this.base}/runs/${id}/frames${suffix}`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as Frame);
  }
}
