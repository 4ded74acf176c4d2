// Typed client for the annotation service JSON API. The UI touches the
// backend exclusively through this module; no direct file access.

export interface DatasetInfo {
  name: string;
  tweets: number;
  summary_budget: number;
  topics: string[];
}

export interface SessionView {
  session_id: string;
  dataset: string;
  annotator_id: string;
  mode: "GroundTruth" | "QualityAssessment";
  budget: number;
  remaining: number;
  state: "Open" | "Finalized";
  shuffle_seed: number;
  // per-topic candidate ids, already shuffled server-side; render order
  // must follow this payload exactly
  candidates: Record<string, string[]>;
  selections: Record<string, string[]>;
  order: [string, string][];
  texts: Record<string, string>;
}

export interface SummaryRecord {
  method: string;
  dataset: string;
  budget: number;
  tweet_ids: string[];
}

export interface FinalizeResult {
  record: SummaryRecord;
  replay: boolean;
}

export interface RatingSubmission {
  rater_id: string;
  coverage: number;
  relevance: number;
  diversity: number;
  qa_score?: number;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let code = "http_error";
    let message = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(resp.status, code, message);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string) {}

  listDatasets(): Promise<DatasetInfo[]> {
    return request(this.base, "/datasets");
  }

  openSession(body: {
    dataset: string;
    annotator_id: string;
    mode: string;
    budget?: number;
    shuffle_seed?: number;
  }): Promise<SessionView> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.base, `/sessions/${sessionId}`);
  }

  toggle(sessionId: string, topic: string, tweetId: string): Promise<SessionView> {
    return request(this.base, `/sessions/${sessionId}/toggle`, {
      method: "POST",
      body: JSON.stringify({ topic, tweet_id: tweetId }),
    });
  }

  finalize(sessionId: string): Promise<FinalizeResult> {
    return request(this.base, `/sessions/${sessionId}/finalize`, { method: "POST" });
  }

  submitRating(sessionId: string, rating: RatingSubmission): Promise<{ ok: boolean; count: number }> {
    return request(this.base, `/sessions/${sessionId}/ratings`, {
      method: "POST",
      body: JSON.stringify(rating),
    });
  }

  report(dataset: string): Promise<Record<string, unknown>> {
    return request(this.base, `/reports/${dataset}`);
  }
}
