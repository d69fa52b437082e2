/** Replay stub for the review service.
 *
 * Serves the JSON bodies recorded by record_fixtures.py. Listings are
 * replayed as a sequence: each GET /matches (or /phrases) consumes the
 * next recorded state, clamping at the last one, which matches how the
 * UI refetches after every acknowledged mutation.
 */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import type { LabelAck, MatchPage, PhraseRule } from "../src/types.js";

export const FIXTURE_DIR = resolve(process.cwd(), "tests/fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(resolve(FIXTURE_DIR, `${name}.json`), "utf-8")) as T;
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

interface Scripted {
  status: number;
  body: unknown;
}

export interface StubOptions {
  /** successive GET /matches responses; the last one repeats */
  matches?: MatchPage[];
  /** successive POST label responses; exhausting them is an error */
  labelAcks?: LabelAck[];
  /** fail this many label POSTs at the network level before succeeding */
  failLabels?: number;
  /** successive GET /phrases responses; the last one repeats */
  phrases?: { rules: PhraseRule[] }[];
  /** successive POST /phrases responses */
  proposals?: Scripted[];
  /** serve stats endpoints; false replays the 404 for an unconfigured dir */
  stats?: boolean;
  /** take the whole service offline: every fetch rejects */
  offline?: boolean;
}

export class RecordedStub {
  readonly requests: RecordedRequest[] = [];
  offline: boolean;
  failLabels: number;

  private matchesCursor = 0;
  private labelCursor = 0;
  private phrasesCursor = 0;
  private proposalCursor = 0;

  private readonly matches: MatchPage[];
  private readonly labelAcks: LabelAck[];
  private readonly phrases: { rules: PhraseRule[] }[];
  private readonly proposals: Scripted[];
  private readonly stats: boolean;

  constructor(options: StubOptions = {}) {
    this.matches = options.matches ?? [fixture<MatchPage>("matches_initial")];
    this.labelAcks = options.labelAcks ?? fixture<LabelAck[]>("label_acks");
    this.phrases = options.phrases ?? [fixture<{ rules: PhraseRule[] }>("phrases")];
    this.proposals = options.proposals ?? [
      { status: 201, body: fixture("propose_created") },
    ];
    this.stats = options.stats ?? true;
    this.offline = options.offline ?? false;
    this.failLabels = options.failLabels ?? 0;
  }

  install(): void {
    globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) =>
      this.dispatch(input, init)) as typeof fetch;
  }

  private async dispatch(input: RequestInfo | URL, init?: RequestInit): Promise<Response> {
    const raw = typeof input === "string" ? input : input instanceof URL ? input.href : input.url;
    const url = new URL(raw, "http://stub.test");
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path: url.pathname + url.search, body });

    if (this.offline) {
      throw new TypeError("fetch failed");
    }
    return this.route(method, url, body);
  }

  private route(method: string, url: URL, body: unknown): Response {
    const path = url.pathname;

    if (method === "GET" && path === "/health") {
      return jsonResponse(200, fixture("health"));
    }

    if (method === "GET" && path === "/matches") {
      const page = this.matches[Math.min(this.matchesCursor, this.matches.length - 1)]!;
      this.matchesCursor += 1;
      return jsonResponse(200, page);
    }

    const label = path.match(/^\/matches\/(.+)\/label$/);
    if (method === "POST" && label) {
      if (this.failLabels > 0) {
        this.failLabels -= 1;
        throw new TypeError("fetch failed");
      }
      const ack = this.labelAcks[this.labelCursor];
      if (!ack) throw new Error(`stub: no recorded ack for label #${this.labelCursor + 1}`);
      this.labelCursor += 1;
      return jsonResponse(200, ack);
    }

    if (method === "GET" && path === "/phrases") {
      const listing = this.phrases[Math.min(this.phrasesCursor, this.phrases.length - 1)]!;
      this.phrasesCursor += 1;
      return jsonResponse(200, listing);
    }

    if (method === "POST" && path === "/phrases") {
      const scripted = this.proposals[Math.min(this.proposalCursor, this.proposals.length - 1)];
      if (!scripted) throw new Error("stub: no scripted proposal response");
      this.proposalCursor += 1;
      return jsonResponse(scripted.status, scripted.body);
    }

    if (method === "POST" && /^\/phrases\/[^/]+\/promote$/.test(path)) {
      return jsonResponse(200, fixture("promote_ack"));
    }

    if (method === "POST" && path === "/rescan") {
      return jsonResponse(202, fixture("rescan_started"));
    }

    if (method === "GET" && /^\/rescan\/[^/]+$/.test(path)) {
      return jsonResponse(200, fixture("rescan_done"));
    }

    if (method === "GET" && path.startsWith("/stats/")) {
      if (!this.stats) {
        return jsonResponse(404, fixture("stats_missing"));
      }
      if (path === "/stats/ecdf") {
        const set = url.searchParams.get("set");
        if (!set) return jsonResponse(200, fixture("stats_sets"));
        return jsonResponse(200, fixture(`band_${set}`));
      }
      if (path === "/stats/histogram") return jsonResponse(200, fixture("histograms"));
      if (path === "/stats/durations") return jsonResponse(200, fixture("durations"));
      if (path === "/stats/blocks") return jsonResponse(200, fixture("blocks"));
    }

    return jsonResponse(404, { detail: `stub: unhandled ${method} ${path}` });
  }
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** The recorded triage session end to end, for the acceptance test. */
export function fullSessionStub(): RecordedStub {
  return new RecordedStub({
    matches: [
      fixture("matches_initial"),
      fixture("matches_after_label1"),
      fixture("matches_after_label2"),
      fixture("matches_after_label3"),
      fixture("matches_after_rescan"),
    ],
    phrases: [
      fixture("phrases"),
      fixture("phrases_after_propose"),
      fixture("phrases_after_promote"),
    ],
    proposals: [{ status: 201, body: fixture("propose_created") }],
  });
}
