/** Phrase workbench: the snowballing side of the loop.
 *
 * Reviewers type a rule line (`pattern -> expected wording`), get grammar
 * feedback on every keystroke with a caret under the offending column,
 * and submit it as a candidate. Promoting a candidate kicks off a rescan,
 * polled until the job settles; the queue view is told to refresh when
 * new matches may exist.
 */

import { ApiError, OfflineError, ReviewApi } from "./api.js";
import { validateRuleLine, type GrammarCheck } from "./grammar.js";
import { esc } from "./render.js";
import type { PhraseRule, RescanJob } from "./types.js";

interface RescanUiState {
  jobId: string;
  state: "running" | "done" | "failed";
  before: number;
  after: number | null;
  error?: string;
}

export class WorkbenchView {
  rules: PhraseRule[] = [];
  line = "";
  note = "";
  check: GrammarCheck | null = null;
  serverError = "";
  offline = false;
  rescan: RescanUiState | null = null;
  /** called after a rescan completes so the queue can refetch */
  onQueueChanged: (() => void) | null = null;
  pollMs = 250;

  constructor(
    private readonly api: ReviewApi,
    private readonly container: HTMLElement,
  ) {
    this.container.addEventListener("click", (event) => this.onClick(event));
    this.container.addEventListener("input", (event) => this.onInput(event));
  }

  async load(): Promise<void> {
    try {
      const result = await this.api.listPhrases();
      this.rules = result.rules;
      this.offline = false;
    } catch (err) {
      if (err instanceof OfflineError) this.offline = true;
      else this.serverError = String((err as Error).message ?? err);
    }
    this.render();
  }

  async propose(): Promise<void> {
    if (!this.check?.ok) return;
    const { pattern, expected, id, note } = this.check.proposal;
    this.serverError = "";
    try {
      await this.api.propose(pattern, expected, note || this.note, id);
      this.line = "";
      this.note = "";
      this.check = null;
      await this.load();
    } catch (err) {
      if (err instanceof OfflineError) {
        this.offline = true;
      } else if (err instanceof ApiError) {
        this.serverError = err.message;
      } else {
        this.serverError = String((err as Error).message ?? err);
      }
      this.render();
    }
  }

  async promote(ruleId: string): Promise<void> {
    this.serverError = "";
    try {
      await this.api.promote(ruleId);
      const started = await this.api.startRescan();
      this.rescan = {
        jobId: started.job_id,
        state: "running",
        before: 0,
        after: null,
      };
      this.render();
      await this.pollRescan(started.job_id);
    } catch (err) {
      if (err instanceof OfflineError) this.offline = true;
      else this.serverError = String((err as Error).message ?? err);
      this.render();
    }
  }

  private async pollRescan(jobId: string): Promise<void> {
    for (;;) {
      await new Promise((resolve) => setTimeout(resolve, this.pollMs));
      let job: RescanJob;
      try {
        job = await this.api.rescanStatus(jobId);
      } catch (err) {
        if (err instanceof OfflineError) this.offline = true;
        else this.serverError = String((err as Error).message ?? err);
        this.rescan = null;
        this.render();
        return;
      }
      this.rescan = {
        jobId,
        state: job.state,
        before: job.matches_before,
        after: job.matches_after,
        error: job.error,
      };
      if (job.state !== "running") break;
      this.render();
    }
    await this.load();
    if (this.rescan?.state === "done" && this.onQueueChanged) {
      this.onQueueChanged();
    }
  }

  render(): void {
    const banner = this.offline
      ? `<div class="banner offline" role="alert">Service unreachable. Nothing was saved.</div>`
      : "";
    const serverError = this.serverError
      ? `<div class="banner notice">${esc(this.serverError)}</div>`
      : "";

    const rows = this.rules
      .map(
        (rule) => `
        <tr data-rule="${esc(rule.id)}">
          <td class="mono">${esc(rule.id)}</td>
          <td class="mono">${esc(rule.pattern)}</td>
          <td>${esc(rule.expected)}</td>
          <td><span class="status ${rule.status}">${rule.status}</span></td>
          <td>${
            rule.status === "candidate"
              ? `<button data-action="promote" data-rule="${esc(rule.id)}">Promote + rescan</button>`
              : ""
          }</td>
        </tr>`,
      )
      .join("");

    this.container.innerHTML = `
      ${banner}${serverError}
      <form class="propose" data-action="propose-form">
        <label for="rule-line">New rule</label>
        <input id="rule-line" type="text" spellcheck="false"
               placeholder="(huge | enormous) information -> big data"
               value="${esc(this.line)}" data-field="line">
        <input id="rule-note" type="text" placeholder="note (optional)"
               value="${esc(this.note)}" data-field="note">
        <button type="submit" data-action="propose"${this.check?.ok ? "" : " disabled"}>Propose</button>
        <div id="grammar-feedback">${this.renderFeedback()}</div>
      </form>
      <div id="rescan-status">${this.renderRescan()}</div>
      <table class="phrases">
        <thead><tr><th>id</th><th>pattern</th><th>expected wording</th><th>status</th><th></th></tr></thead>
        <tbody>${rows || `<tr><td colspan="5" class="empty">No rules loaded.</td></tr>`}</tbody>
      </table>`;
  }

  private renderFeedback(): string {
    if (this.check === null) return "";
    if (this.check.ok) {
      const p = this.check.proposal;
      return `<p class="valid">ok: <code>${esc(p.pattern)}</code> &rarr; ${esc(p.expected)}</p>`;
    }
    const caret = " ".repeat(this.check.position) + "^";
    return `
      <p class="invalid">col ${this.check.position + 1}: ${esc(this.check.message)}</p>
      <pre class="caret">${esc(this.line)}\n${caret}</pre>`;
  }

  private renderRescan(): string {
    if (!this.rescan) return "";
    if (this.rescan.state === "running") {
      return `<p class="spinner" role="status">Rescanning&hellip; job ${esc(this.rescan.jobId)}</p>`;
    }
    if (this.rescan.state === "failed") {
      return `<p class="invalid">Rescan failed: ${esc(this.rescan.error ?? "unknown error")}</p>`;
    }
    return `<p class="valid">Rescan done: ${this.rescan.before} &rarr; ${this.rescan.after} matches.</p>`;
  }

  private onInput(event: Event): void {
    const target = event.target as HTMLInputElement;
    const field = target.getAttribute("data-field");
    if (field === "line") {
      this.line = target.value;
      this.check = this.line.trim() ? validateRuleLine(this.line) : null;
      const feedback = this.container.querySelector("#grammar-feedback");
      if (feedback) feedback.innerHTML = this.renderFeedback();
      const button = this.container.querySelector<HTMLButtonElement>("[data-action=propose]");
      if (button) button.disabled = !this.check?.ok;
    } else if (field === "note") {
      this.note = target.value;
    }
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!target) return;
    const action = target.getAttribute("data-action");
    if (action === "propose") {
      event.preventDefault();
      void this.propose();
    } else if (action === "promote") {
      const ruleId = target.getAttribute("data-rule");
      if (ruleId) void this.promote(ruleId);
    }
  }
}
