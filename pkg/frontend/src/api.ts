// Typed client for the restoration service. Every probability shown in the
// UI comes straight out of these responses; the client never computes one.

export interface MetaResponse {
  api_version: number;
  vocabulary_size: number;
  order: number;
  smoothing: string;
  corpus_label: string;
}

export interface Candidate {
  sign: number;
  prob: number;
  cum_prob: number;
  in_coverage_set: boolean;
}

export interface GapMarginal {
  position: number;
  coverage_size: number;
  candidates: Candidate[];
}

export interface MarginalsResponse {
  coverage: number;
  committed: Record<string, number>;
  gaps: GapMarginal[];
}

export interface RestoreAssignment {
  filling: number[];
  log2_prob: number;
  probability: number;
}

export interface RestoreResponse {
  method: string;
  gap_positions: number[];
  assignments: RestoreAssignment[];
}

export interface ScoreResponse {
  tokens: number[];
  log2_prob: number;
}

export interface RowFollower {
  token: number | "</s>";
  prob: number;
}

export interface RowResponse {
  context: number;
  followers: RowFollower[];
}

export type WireToken = number | "?";

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as ApiErrorBody;
        code = body.error.code;
        message = body.error.message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  meta(): Promise<MetaResponse> {
    return this.request<MetaResponse>("/api/meta");
  }

  marginals(
    text: WireToken[],
    committed: Record<string, number>,
    options?: { coverage?: number; topK?: number; signal?: AbortSignal },
  ): Promise<MarginalsResponse> {
    const body: Record<string, unknown> = { text, committed };
    if (options?.coverage !== undefined) body.coverage = options.coverage;
    if (options?.topK !== undefined) body.top_k = options.topK;
    return this.request<MarginalsResponse>("/api/marginals", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal: options?.signal,
    });
  }

  restore(text: WireToken[], topK = 10): Promise<RestoreResponse> {
    return this.request<RestoreResponse>("/api/restore", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text, top_k: topK }),
    });
  }

  score(text: number[], signal?: AbortSignal): Promise<ScoreResponse> {
    return this.request<ScoreResponse>("/api/score", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
      signal,
    });
  }

  row(context: number, topK = 15): Promise<RowResponse> {
    return this.request<RowResponse>(
      `/api/row?context=${context}&top_k=${topK}`,
    );
  }
}
