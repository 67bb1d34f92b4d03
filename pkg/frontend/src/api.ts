/** Typed client for the scenario-miner service.
 *
 * Every number the UI shows comes back through this client; nothing is
 * computed locally.  The fetch implementation is injectable for tests.
 */
import type {
  ExportedFile,
  FramesResponse,
  QueryJson,
  SearchRequest,
  SearchResponse,
  UploadResponse,
} from "./types.js";

export type FetchLike = typeof fetch;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly rawResponse: string | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorFrom(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  let raw: string | null = null;
  try {
    const body = await resp.json();
    if (typeof body.detail === "string") detail = body.detail;
    if (typeof body.raw_response === "string") raw = body.raw_response;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(detail, resp.status, raw);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string = "default",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string, params: Record<string, string> = {}): string {
    const u = new URL(path, this.baseUrl);
    u.searchParams.set("session_id", this.sessionId);
    for (const [key, value] of Object.entries(params)) {
      u.searchParams.set(key, value);
    }
    return u.toString();
  }

  private async json<T>(resp: Response): Promise<T> {
    if (!resp.ok) throw await errorFrom(resp);
    return (await resp.json()) as T;
  }

  async uploadRecording(
    csvText: string,
    filename: string,
    recordingId?: string,
    frameRate?: number,
  ): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", new Blob([csvText], { type: "text/csv" }), filename);
    if (recordingId !== undefined) form.append("recording_id", recordingId);
    if (frameRate !== undefined) form.append("frame_rate", String(frameRate));
    const resp = await this.fetchImpl(this.url("/api/recordings"), {
      method: "POST",
      body: form,
    });
    return this.json<UploadResponse>(resp);
  }

  async interpret(
    description: string,
    provider: "offline" | "remote" = "offline",
  ): Promise<QueryJson> {
    const resp = await this.fetchImpl(this.url("/api/interpret"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ description, provider }),
    });
    return this.json<QueryJson>(resp);
  }

  async search(request: SearchRequest): Promise<SearchResponse> {
    const resp = await this.fetchImpl(this.url("/api/search"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return this.json<SearchResponse>(resp);
  }

  async frames(scenarioId: string, stride = 1): Promise<FramesResponse> {
    const resp = await this.fetchImpl(
      this.url(`/api/scenarios/${scenarioId}/frames`, {
        stride: String(stride),
      }),
    );
    return this.json<FramesResponse>(resp);
  }

  async exportScenario(
    scenarioId: string,
    format: "xosc" | "cmtxt",
  ): Promise<ExportedFile> {
    const resp = await this.fetchImpl(
      this.url(`/api/scenarios/${scenarioId}/export`, { format }),
    );
    if (!resp.ok) throw await errorFrom(resp);
    const disposition = resp.headers.get("content-disposition") ?? "";
    const match = /filename="([^"]+)"/.exec(disposition);
    return {
      filename: match?.[1] ?? `${scenarioId}.${format === "xosc" ? "xosc" : "txt"}`,
      mediaType: resp.headers.get("content-type") ?? "application/octet-stream",
      content: await resp.text(),
    };
  }
}
