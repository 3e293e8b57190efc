/**
 * Typed client for the clustering service.
 *
 * Every call maps to exactly one endpoint. Mutating calls accept an
 * optional idempotency key so a retried request replays the stored
 * response instead of re-applying the op.
 */

import type {
  ApplyResponse,
  ClusterResponse,
  Coords,
  DemonstrationOp,
  OpLog,
  OpResponse,
  Pending,
  Recommendations,
  Selection,
  SessionCreated,
  Subcluster,
  TablePage,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly errorType: string;

  constructor(status: number, errorType: string, detail: string) {
    super(`${errorType}: ${detail}`);
    this.status = status;
    this.errorType = errorType;
  }
}

export interface RecommendationPoll {
  status: number;
  recs: Recommendations | null;
  pending: Pending | null;
}

interface RequestOptions {
  method?: string;
  body?: unknown;
  idempotencyKey?: string;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, options: RequestOptions = {}): Promise<T> {
    const headers: Record<string, string> = {};
    let payload: string | undefined;
    if (options.body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(options.body);
    }
    if (options.idempotencyKey) {
      headers["Idempotency-Key"] = options.idempotencyKey;
    }
    const response = await fetch(this.baseUrl + path, {
      method: options.method ?? (options.body !== undefined ? "POST" : "GET"),
      headers,
      body: payload,
    });
    if (!response.ok) {
      throw await this.toError(response);
    }
    return (await response.json()) as T;
  }

  private async toError(response: Response): Promise<ApiError> {
    let errorType = "HttpError";
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string; detail?: string };
      if (body.error) errorType = body.error;
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    return new ApiError(response.status, errorType, detail);
  }

  /** Upload a CSV and open a session. */
  async createSession(csv: string, filename = "data.csv"): Promise<SessionCreated> {
    // Multipart is assembled by hand so the client works identically under
    // a browser, jsdom, and bare node without depending on FormData quirks.
    const boundary = "----clusterscout" + Math.random().toString(36).slice(2);
    const body = [
      `--${boundary}`,
      `Content-Disposition: form-data; name="file"; filename="${filename}"`,
      "Content-Type: text/csv",
      "",
      csv,
      `--${boundary}--`,
      "",
    ].join("\r\n");
    const response = await fetch(this.baseUrl + "/sessions", {
      method: "POST",
      headers: { "Content-Type": `multipart/form-data; boundary=${boundary}` },
      body,
    });
    if (!response.ok) {
      throw await this.toError(response);
    }
    return (await response.json()) as SessionCreated;
  }

  tablePage(sid: string, offset = 0, limit = 50): Promise<TablePage> {
    return this.request(`/sessions/${sid}/table?offset=${offset}&limit=${limit}`);
  }

  selectSimilar(
    sid: string,
    itemId: number,
    column: string,
    intersectWith?: number[],
  ): Promise<Selection> {
    return this.request(`/sessions/${sid}/select/similar`, {
      body: { item_id: itemId, column, intersect_with: intersectWith ?? null },
    });
  }

  runCluster(
    sid: string,
    options: {
      features?: string[];
      weights?: number[];
      desiredK?: number;
      seed?: number;
      topF?: number;
    } = {},
    idempotencyKey?: string,
  ): Promise<ClusterResponse> {
    return this.request(`/sessions/${sid}/cluster`, {
      body: {
        features: options.features ?? null,
        weights: options.weights ?? null,
        desired_k: options.desiredK ?? null,
        seed: options.seed ?? null,
        top_f: options.topF ?? null,
      },
      idempotencyKey,
    });
  }

  submitOp(
    sid: string,
    op: DemonstrationOp,
    expectedGeneration: number | null,
    rerank = true,
    idempotencyKey?: string,
  ): Promise<OpResponse> {
    return this.request(`/sessions/${sid}/ops`, {
      body: { op, expected_generation: expectedGeneration, rerank },
      idempotencyKey,
    });
  }

  opLog(sid: string): Promise<OpLog> {
    return this.request(`/sessions/${sid}/ops`);
  }

  /** One poll step: 202 while a search is still running, 200 with results. */
  async recommendations(sid: string, generation: number): Promise<RecommendationPoll> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sid}/recommendations?generation=${generation}`,
    );
    if (response.status === 202) {
      return { status: 202, recs: null, pending: (await response.json()) as Pending };
    }
    if (!response.ok) {
      throw await this.toError(response);
    }
    return {
      status: 200,
      recs: (await response.json()) as Recommendations,
      pending: null,
    };
  }

  applyRecommendation(
    sid: string,
    rank: number,
    idempotencyKey?: string,
  ): Promise<ApplyResponse> {
    return this.request(`/sessions/${sid}/recommendations/${rank}/apply`, {
      method: "POST",
      body: {},
      idempotencyKey,
    });
  }

  subcluster(
    sid: string,
    clusterId: number,
    feature: string,
    rotate: boolean,
  ): Promise<Subcluster> {
    return this.request(`/sessions/${sid}/clusters/${clusterId}/subcluster`, {
      body: { feature, rotate },
    });
  }

  async exportCsv(sid: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${sid}/export.csv`);
    if (!response.ok) {
      throw await this.toError(response);
    }
    return response.text();
  }
}
