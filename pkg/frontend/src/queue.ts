/** Review queue: keyboard-first triage of scan matches.
 *
 * J/K (or arrows) move the selection, A/R/U record a verdict. Labeling is
 * optimistic: the card leaves the pending list immediately, the POST runs
 * in the background, and a failure puts the card back where it was. After
 * a successful ack the whole page is refetched so client state never
 * drifts from the server.
 */

import { OfflineError, ReviewApi } from "./api.js";
import { esc, highlightContext } from "./render.js";
import type { MatchItem, Verdict } from "./types.js";

const KEY_VERDICTS: Record<string, Verdict> = {
  a: "true_positive",
  r: "false_positive",
  u: "unsure",
};

const STATUS_FILTERS = ["pending", "true_positive", "false_positive", "unsure", "all"] as const;

export class QueueView {
  items: MatchItem[] = [];
  selected = 0;
  page = 1;
  total = 0;
  totalPages = 1;
  statusFilter: (typeof STATUS_FILTERS)[number] = "pending";
  offline = false;
  notice = "";
  reviewer = "";
  /** match ids with an in-flight label POST */
  inFlight = new Set<string>();

  constructor(
    private readonly api: ReviewApi,
    private readonly container: HTMLElement,
  ) {
    this.container.addEventListener("click", (event) => this.onClick(event));
    this.container.addEventListener("change", (event) => this.onChange(event));
  }

  async load(page = this.page): Promise<void> {
    try {
      const query: { page: number; page_size: number; status?: string } = {
        page,
        page_size: 50,
      };
      if (this.statusFilter !== "all") query.status = this.statusFilter;
      const result = await this.api.listMatches(query);
      this.items = result.items;
      this.page = result.page;
      this.total = result.total;
      this.totalPages = result.total_pages;
      this.offline = false;
      if (this.selected >= this.items.length) {
        this.selected = Math.max(0, this.items.length - 1);
      }
    } catch (err) {
      if (err instanceof OfflineError) {
        this.offline = true;
      } else {
        this.notice = String((err as Error).message ?? err);
      }
    }
    this.render();
  }

  handleKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (target && /^(INPUT|TEXTAREA|SELECT)$/.test(target.tagName)) return;
    if (event.metaKey || event.ctrlKey || event.altKey) return;
    const key = event.key.toLowerCase();
    if (key === "j" || event.key === "ArrowDown") {
      this.select(this.selected + 1);
      event.preventDefault();
    } else if (key === "k" || event.key === "ArrowUp") {
      this.select(this.selected - 1);
      event.preventDefault();
    } else if (key in KEY_VERDICTS) {
      void this.submit(KEY_VERDICTS[key]!);
      event.preventDefault();
    }
  }

  select(index: number): void {
    if (!this.items.length) return;
    this.selected = Math.min(Math.max(index, 0), this.items.length - 1);
    this.render();
  }

  async submit(verdict: Verdict): Promise<void> {
    const item = this.items[this.selected];
    if (!item || this.inFlight.has(item.match_id)) return;

    // Optimistic removal; on failure the card goes back where it was.
    const index = this.selected;
    this.inFlight.add(item.match_id);
    this.items.splice(index, 1);
    if (this.selected >= this.items.length) {
      this.selected = Math.max(0, this.items.length - 1);
    }
    this.notice = "";
    this.render();

    try {
      await this.api.label(item.match_id, verdict, this.reviewer);
      this.inFlight.delete(item.match_id);
      await this.load();
    } catch (err) {
      this.inFlight.delete(item.match_id);
      this.items.splice(Math.min(index, this.items.length), 0, item);
      this.selected = index;
      if (err instanceof OfflineError) {
        this.offline = true;
      } else {
        this.notice = String((err as Error).message ?? err);
      }
      this.render();
    }
  }

  render(): void {
    const banner = this.offline
      ? `<div class="banner offline" role="alert">Service unreachable. Nothing was saved.
           <button data-action="retry">Retry</button></div>`
      : "";
    const notice = this.notice ? `<div class="banner notice">${esc(this.notice)}</div>` : "";
    const options = STATUS_FILTERS.map(
      (s) => `<option value="${s}"${s === this.statusFilter ? " selected" : ""}>${s}</option>`,
    ).join("");
    const pager =
      this.totalPages > 1
        ? `<button data-action="prev-page"${this.page <= 1 ? " disabled" : ""}>&laquo;</button>
           page ${this.page}/${this.totalPages}
           <button data-action="next-page"${this.page >= this.totalPages ? " disabled" : ""}>&raquo;</button>`
        : "";

    const cards = this.items.length
      ? this.items.map((item, i) => this.renderCard(item, i)).join("")
      : `<p class="empty">No ${this.statusFilter === "all" ? "" : this.statusFilter + " "}matches.</p>`;

    this.container.innerHTML = `
      ${banner}${notice}
      <div class="toolbar">
        <label>status <select data-action="filter">${options}</select></label>
        <span class="count">${this.total} match${this.total === 1 ? "" : "es"}</span>
        <span class="pager">${pager}</span>
        <span class="keys">j/k move &middot; a accept &middot; r reject &middot; u unsure</span>
      </div>
      <div class="cards">${cards}</div>`;
  }

  private renderCard(item: MatchItem, index: number): string {
    const selected = index === this.selected ? " selected" : "";
    const saving = this.inFlight.has(item.match_id) ? " saving" : "";
    const journal = item.journal ? ` &middot; ${esc(item.journal)}` : "";
    return `
      <article class="card match${selected}${saving}" data-index="${index}" data-match="${esc(item.match_id)}">
        <header>
          <span class="rule">${esc(item.rule_id)}</span>
          <span class="doc">${esc(item.doc_id)} / ${esc(item.field)}${journal}</span>
          <span class="status ${esc(item.status)}">${esc(item.status)}</span>
        </header>
        <p class="context">&hellip;${highlightContext(item.context, item.highlight)}&hellip;</p>
        <footer>
          <span class="expected">expected: <strong>${esc(item.expected)}</strong></span>
          <span class="actions">
            <button data-action="accept">Accept</button>
            <button data-action="reject">Reject</button>
            <button data-action="unsure">Unsure</button>
          </span>
        </footer>
      </article>`;
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!target) {
      const card = (event.target as HTMLElement).closest<HTMLElement>(".card[data-index]");
      if (card) this.select(Number(card.dataset.index));
      return;
    }
    const card = target.closest<HTMLElement>(".card[data-index]");
    if (card) this.selected = Number(card.dataset.index);
    switch (target.getAttribute("data-action")) {
      case "accept":
        void this.submit("true_positive");
        break;
      case "reject":
        void this.submit("false_positive");
        break;
      case "unsure":
        void this.submit("unsure");
        break;
      case "retry":
        void this.load();
        break;
      case "prev-page":
        void this.load(this.page - 1);
        break;
      case "next-page":
        void this.load(this.page + 1);
        break;
    }
  }

  private onChange(event: Event): void {
    const target = event.target as HTMLElement;
    if (target.getAttribute("data-action") === "filter") {
      this.statusFilter = (target as HTMLSelectElement).value as QueueView["statusFilter"];
      this.selected = 0;
      void this.load(1);
    }
  }
}
