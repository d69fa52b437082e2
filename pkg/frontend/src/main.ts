/** App shell: tab navigation, auth token plumbing, health footer. */

import { OfflineError, ReviewApi } from "./api.js";
import { ChartsView } from "./charts.js";
import { esc } from "./render.js";
import { QueueView } from "./queue.js";
import { WorkbenchView } from "./workbench.js";

const VIEW_NAMES = ["queue", "phrases", "charts"] as const;
type ViewName = (typeof VIEW_NAMES)[number];

export class App {
  readonly queue: QueueView;
  readonly workbench: WorkbenchView;
  readonly charts: ChartsView;
  active: ViewName = "queue";

  constructor(
    private readonly root: HTMLElement,
    readonly api: ReviewApi = new ReviewApi(),
  ) {
    root.innerHTML = `
      <header class="top">
        <h1>Match review</h1>
        <nav role="tablist">
          <button role="tab" data-view="queue" aria-selected="true">Queue</button>
          <button role="tab" data-view="phrases" aria-selected="false">Phrases</button>
          <button role="tab" data-view="charts" aria-selected="false">Charts</button>
        </nav>
        <span class="session">
          <input id="reviewer" type="text" placeholder="reviewer" autocomplete="off">
          <input id="token" type="password" placeholder="API token" autocomplete="off">
        </span>
      </header>
      <main>
        <div id="view-queue" class="view"></div>
        <div id="view-phrases" class="view" hidden></div>
        <div id="view-charts" class="view" hidden></div>
      </main>
      <footer id="health" class="health"></footer>`;

    this.queue = new QueueView(api, root.querySelector("#view-queue")!);
    this.workbench = new WorkbenchView(api, root.querySelector("#view-phrases")!);
    this.charts = new ChartsView(api, root.querySelector("#view-charts")!);
    this.workbench.onQueueChanged = () => void this.queue.load();

    root.querySelector("nav")!.addEventListener("click", (event) => {
      const button = (event.target as HTMLElement).closest("[data-view]");
      if (button) void this.activate(button.getAttribute("data-view") as ViewName);
    });

    const tokenInput = root.querySelector<HTMLInputElement>("#token")!;
    tokenInput.value = localStorage.getItem("review-token") ?? "";
    this.api.token = tokenInput.value;
    tokenInput.addEventListener("change", () => {
      this.api.token = tokenInput.value;
      localStorage.setItem("review-token", tokenInput.value);
      void this.activate(this.active);
      void this.refreshHealth();
    });

    const reviewerInput = root.querySelector<HTMLInputElement>("#reviewer")!;
    reviewerInput.value = localStorage.getItem("review-reviewer") ?? "";
    this.queue.reviewer = reviewerInput.value;
    reviewerInput.addEventListener("change", () => {
      this.queue.reviewer = reviewerInput.value;
      localStorage.setItem("review-reviewer", reviewerInput.value);
    });

    document.addEventListener("keydown", (event) => {
      if (this.active === "queue") this.queue.handleKey(event);
    });
  }

  async start(): Promise<void> {
    await this.refreshHealth();
    await this.activate("queue");
  }

  async activate(view: ViewName): Promise<void> {
    this.active = view;
    for (const name of VIEW_NAMES) {
      const pane = this.root.querySelector<HTMLElement>(`#view-${name}`)!;
      pane.hidden = name !== view;
      const tab = this.root.querySelector(`[data-view="${name}"]`)!;
      tab.setAttribute("aria-selected", String(name === view));
    }
    if (view === "queue") await this.queue.load();
    else if (view === "phrases") await this.workbench.load();
    else await this.charts.load();
  }

  async refreshHealth(): Promise<void> {
    const footer = this.root.querySelector("#health")!;
    try {
      const health = await this.api.health();
      footer.innerHTML =
        `${health.documents} documents &middot; ${health.rules} rules &middot; ` +
        `${health.matches} matches &middot; ${health.orphaned_labels} orphaned labels`;
    } catch (err) {
      footer.innerHTML =
        err instanceof OfflineError
          ? `<span class="offline">service unreachable</span>`
          : `<span class="offline">${esc(String((err as Error).message ?? err))}</span>`;
    }
  }
}

const rootElement = document.getElementById("app");
if (rootElement) {
  void new App(rootElement).start();
}
