import { beforeEach, describe, expect, it } from "vitest";
import { ReviewApi } from "../src/api.js";
import { QueueView } from "../src/queue.js";
import type { MatchPage } from "../src/types.js";
import { fixture, RecordedStub } from "./stub.js";

function tick(ms = 0): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function key(name: string): KeyboardEvent {
  return new KeyboardEvent("keydown", { key: name });
}

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = `<div id="host"></div>`;
  container = document.getElementById("host")!;
});

function makeQueue(stub: RecordedStub): QueueView {
  stub.install();
  const queue = new QueueView(new ReviewApi("", "sesame"), container);
  queue.reviewer = "rec";
  return queue;
}

describe("queue rendering", () => {
  it("shows one card per recorded pending match with the hit marked", async () => {
    const queue = makeQueue(new RecordedStub());
    await queue.load();

    const cards = container.querySelectorAll(".card.match");
    expect(cards).toHaveLength(4);
    expect(cards[0]!.getAttribute("data-match")).toBe("d01|title|ai|0-25");
    expect(cards[0]!.querySelector("mark")!.textContent).toBe("Counterfeit consciousness");
    expect(cards[0]!.querySelector(".expected")!.textContent).toContain(
      "artificial intelligence (AI)",
    );
    expect(cards[0]!.classList.contains("selected")).toBe(true);
    expect(container.querySelector(".count")!.textContent).toBe("4 matches");
  });

  it("sends the bearer token with every request", async () => {
    new RecordedStub().install();
    // the stub records paths; headers only cross fetch, so wrap it
    let seen = "";
    const inner = globalThis.fetch;
    globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) => {
      seen = (init?.headers as Record<string, string>)["Authorization"] ?? "";
      return inner(input, init);
    }) as typeof fetch;
    await new ReviewApi("", "sesame").listMatches();
    expect(seen).toBe("Bearer sesame");
  });
});

describe("keyboard triage", () => {
  it("moves the selection with j and k", async () => {
    const queue = makeQueue(new RecordedStub());
    await queue.load();

    queue.handleKey(key("j"));
    expect(container.querySelector(".card.selected")!.getAttribute("data-index")).toBe("1");
    queue.handleKey(key("j"));
    queue.handleKey(key("k"));
    expect(container.querySelector(".card.selected")!.getAttribute("data-index")).toBe("1");
    queue.handleKey(key("ArrowUp"));
    expect(container.querySelector(".card.selected")!.getAttribute("data-index")).toBe("0");
  });

  it("ignores keys typed into form fields", async () => {
    const stub = new RecordedStub();
    const queue = makeQueue(stub);
    await queue.load();

    const input = document.createElement("input");
    document.body.append(input);
    const event = new KeyboardEvent("keydown", { key: "a", bubbles: true });
    input.dispatchEvent(event);
    queue.handleKey(event);
    await tick();

    expect(stub.requests.filter((r) => r.method === "POST")).toHaveLength(0);
    expect(queue.items).toHaveLength(4);
  });

  it("labels optimistically, then refetches the listing on ack", async () => {
    const stub = new RecordedStub({
      matches: [fixture<MatchPage>("matches_initial"), fixture<MatchPage>("matches_after_label1")],
    });
    const queue = makeQueue(stub);
    await queue.load();

    queue.handleKey(key("a"));
    // optimistic: the card is gone before the POST resolves
    expect(container.querySelectorAll(".card.match")).toHaveLength(3);
    await tick();

    const post = stub.requests.find((r) => r.method === "POST")!;
    expect(decodeURIComponent(post.path)).toBe("/matches/d01|title|ai|0-25/label");
    expect(post.body).toEqual({ verdict: "true_positive", reviewer: "rec", note: "" });

    // the listing now reflects the server, not the optimistic splice
    expect(queue.total).toBe(3);
    expect(container.querySelectorAll(".card.match")[0]!.getAttribute("data-match")).toBe(
      "d02|abstract|forest|4-24",
    );
  });

  it("puts the card back and shows the offline banner when the POST dies", async () => {
    const stub = new RecordedStub({ failLabels: 1 });
    const queue = makeQueue(stub);
    await queue.load();

    queue.handleKey(key("r"));
    expect(container.querySelectorAll(".card.match")).toHaveLength(3);
    await tick();

    expect(container.querySelectorAll(".card.match")).toHaveLength(4);
    expect(container.querySelector(".card.selected")!.getAttribute("data-match")).toBe(
      "d01|title|ai|0-25",
    );
    const banner = container.querySelector(".banner.offline")!;
    expect(banner.textContent).toContain("Nothing was saved");

    // retry reloads and clears the banner
    (banner.querySelector("[data-action=retry]") as HTMLButtonElement).click();
    await tick();
    expect(container.querySelector(".banner.offline")).toBeNull();
    expect(container.querySelectorAll(".card.match")).toHaveLength(4);
  });
});

describe("toolbar", () => {
  it("labels through the card buttons too", async () => {
    const stub = new RecordedStub({
      matches: [fixture<MatchPage>("matches_initial"), fixture<MatchPage>("matches_after_label1")],
    });
    const queue = makeQueue(stub);
    await queue.load();

    const second = container.querySelectorAll(".card.match")[1]!;
    (second.querySelector("[data-action=unsure]") as HTMLButtonElement).click();
    await tick();

    const post = stub.requests.find((r) => r.method === "POST")!;
    expect(decodeURIComponent(post.path)).toBe("/matches/d02|abstract|forest|4-24/label");
    expect((post.body as { verdict: string }).verdict).toBe("unsure");
  });

  it("drops the status filter from the query when 'all' is picked", async () => {
    const stub = new RecordedStub();
    const queue = makeQueue(stub);
    await queue.load();
    expect(stub.requests[0]!.path).toContain("status=pending");

    const select = container.querySelector<HTMLSelectElement>("[data-action=filter]")!;
    select.value = "all";
    select.dispatchEvent(new Event("change", { bubbles: true }));
    await tick();

    const last = stub.requests[stub.requests.length - 1]!;
    expect(last.path).toBe("/matches?page=1&page_size=50");
  });

  it("pages with the arrows when the server reports more pages", async () => {
    const base = fixture<MatchPage>("matches_initial");
    const stub = new RecordedStub({
      matches: [
        { ...base, page: 1, total_pages: 3 },
        { ...base, page: 2, total_pages: 3 },
      ],
    });
    const queue = makeQueue(stub);
    await queue.load();

    expect(container.querySelector(".pager")!.textContent).toContain("page 1/3");
    (container.querySelector("[data-action=next-page]") as HTMLButtonElement).click();
    await tick();

    expect(container.querySelector(".pager")!.textContent).toContain("page 2/3");
    expect(stub.requests[stub.requests.length - 1]!.path).toContain("page=2");
  });
});
