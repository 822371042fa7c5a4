/** Typed client for the review service. The UI talks to nothing else. */

import type {
  ApiErrorBody,
  CaseSummary,
  MetricsSummary,
  PreliminaryResponse,
  ReviewResponse,
  ReviewStateToken,
  ReviewSubmission,
  RocPayload,
} from "./types.js";

/** The service could not be reached at all; worth a retry. */
export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "ServiceUnreachableError";
  }
}

/** The service answered with a structured error body. */
export class ApiRequestError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(status: number, body: ApiErrorBody["error"]) {
    super(body.message);
    this.name = "ApiRequestError";
    this.code = body.code;
    this.status = status;
    this.details = body.details ?? {};
  }
}

/** Optimistic-concurrency rejection; carries the version the store is at now. */
export class ConflictError extends ApiRequestError {
  readonly currentVersion: number | null;

  constructor(status: number, body: ApiErrorBody["error"]) {
    super(status, body);
    this.name = "ConflictError";
    const v = body.details?.["current_version"];
    this.currentVersion = typeof v === "number" ? v : null;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly reviewerId: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: "GET" | "POST", path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: {
          "Content-Type": "application/json",
          "X-Reviewer-Id": this.reviewerId,
        },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ServiceUnreachableError(cause);
    }
    const payload = (await response.json()) as T | ApiErrorBody;
    if (!response.ok) {
      const error = (payload as ApiErrorBody).error ?? {
        code: "internal" as const,
        message: `HTTP ${response.status}`,
        details: {},
      };
      if (error.code === "conflict") {
        throw new ConflictError(response.status, error);
      }
      throw new ApiRequestError(response.status, error);
    }
    return payload as T;
  }

  async worklist(state: ReviewStateToken = "unreviewed"): Promise<CaseSummary[]> {
    const body = await this.request<{ cases: CaseSummary[] }>(
      "GET",
      `/worklist?state=${encodeURIComponent(state)}`,
    );
    return body.cases;
  }

  preliminary(caseId: string): Promise<PreliminaryResponse> {
    return this.request("GET", `/case/${encodeURIComponent(caseId)}/preliminary`);
  }

  submitReview(caseId: string, submission: ReviewSubmission): Promise<ReviewResponse> {
    return this.request("POST", `/case/${encodeURIComponent(caseId)}/review`, submission);
  }

  metricsSummary(): Promise<MetricsSummary> {
    return this.request("GET", "/metrics/summary");
  }

  rocPoints(): Promise<RocPayload> {
    return this.request("GET", "/metrics/roc");
  }
}
