/** Typed fetch client for the review service. */

import type {
  ExportPayload,
  NodeDetail,
  Progress,
  ReportPage,
  StoredVerdict,
  VerdictSubmission,
} from "./types.js";

/** Service error with the HTTP status (0 when the service is unreachable). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** What the app needs from the service; ApiClient is the live implementation. */
export interface ReviewApi {
  reportPage(offset: number, limit: number): Promise<ReportPage>;
  nodeDetail(nodeId: number): Promise<NodeDetail>;
  submitVerdict(v: VerdictSubmission): Promise<StoredVerdict>;
  progress(): Promise<Progress>;
  exportClean(): Promise<ExportPayload>;
}

type FetchLike = typeof fetch;

export class ApiClient implements ReviewApi {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? fetch.bind(globalThis);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach the review service: ${String(err)}`);
    }
    const body = await response.text();
    let parsed: unknown = null;
    if (body !== "") {
      try {
        parsed = JSON.parse(body);
      } catch {
        throw new ApiError(response.status, `non-JSON reply (HTTP ${response.status})`);
      }
    }
    if (!response.ok) {
      const message =
        typeof parsed === "object" && parsed !== null && "error" in parsed
          ? String((parsed as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return parsed as T;
  }

  reportPage(offset: number, limit: number): Promise<ReportPage> {
    return this.request(`/api/report?offset=${offset}&limit=${limit}`);
  }

  nodeDetail(nodeId: number): Promise<NodeDetail> {
    return this.request(`/api/node/${nodeId}`);
  }

  async submitVerdict(v: VerdictSubmission): Promise<StoredVerdict> {
    const reply = await this.request<{ ok: boolean; verdict: StoredVerdict }>(
      "/api/verdict",
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(v),
      },
    );
    return reply.verdict;
  }

  progress(): Promise<Progress> {
    return this.request("/api/progress");
  }

  exportClean(): Promise<ExportPayload> {
    return this.request("/api/export");
  }
}
