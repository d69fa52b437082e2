import type {
  BandJson,
  BlocksJson,
  DurationRow,
  HealthInfo,
  HistogramsJson,
  LabelAck,
  MatchPage,
  PhraseRule,
  RescanJob,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** Thrown when fetch itself fails; the UI shows the offline banner for these. */
export class OfflineError extends Error {
  constructor(cause: unknown) {
    super("service unreachable");
    this.name = "OfflineError";
    this.cause = cause;
  }
}

export interface MatchQuery {
  status?: string;
  rule?: string;
  journal?: string;
  page?: number;
  page_size?: number;
}

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    public token: string = "",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new OfflineError(err);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  listMatches(query: MatchQuery = {}): Promise<MatchPage> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    return this.request("GET", qs ? `/matches?${qs}` : "/matches");
  }

  label(matchId: string, verdict: Verdict, reviewer: string, note = ""): Promise<LabelAck> {
    return this.request("POST", `/matches/${encodeURIComponent(matchId)}/label`, {
      verdict,
      reviewer,
      note,
    });
  }

  listPhrases(): Promise<{ rules: PhraseRule[] }> {
    return this.request("GET", "/phrases");
  }

  propose(pattern: string, expected: string, note = "", id = ""): Promise<PhraseRule> {
    return this.request("POST", "/phrases", { pattern, expected, note, id });
  }

  promote(ruleId: string): Promise<{ id: string; status: string; notice?: string }> {
    return this.request("POST", `/phrases/${encodeURIComponent(ruleId)}/promote`);
  }

  startRescan(): Promise<{ job_id: string; state: string }> {
    return this.request("POST", "/rescan");
  }

  rescanStatus(jobId: string): Promise<RescanJob> {
    return this.request("GET", `/rescan/${encodeURIComponent(jobId)}`);
  }

  ecdfSets(): Promise<{ sets: string[] }> {
    return this.request("GET", "/stats/ecdf");
  }

  ecdfBand(set: string): Promise<BandJson> {
    return this.request("GET", `/stats/ecdf?set=${encodeURIComponent(set)}`);
  }

  histograms(): Promise<HistogramsJson> {
    return this.request("GET", "/stats/histogram");
  }

  durations(): Promise<DurationRow[]> {
    return this.request("GET", "/stats/durations");
  }

  blocks(): Promise<BlocksJson> {
    return this.request("GET", "/stats/blocks");
  }
}
