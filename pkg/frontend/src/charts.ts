/** Charts: ECDF bands, score histograms, duration spans, block table.
 *
 * Every plotted value comes straight from a stats endpoint; this module
 * only maps served numbers to pixels. The step rows arrive as
 * [x, lower, F(x), upper] with envelopes already clamped server-side, so
 * drawing is pure coordinate transformation. Sections render an
 * empty-state message when their endpoint has nothing to serve.
 */

import { ApiError, OfflineError, ReviewApi } from "./api.js";
import { esc, num } from "./render.js";
import type { BandJson, BlocksJson, DurationRow, HistogramsJson } from "./types.js";

const W = 640;
const H = 300;
const PAD = 42;

const PALETTE = ["#1d4ed8", "#b45309", "#15803d", "#b91c1c", "#6d28d9", "#0e7490", "#9d174d"];

type Section<T> =
  | { kind: "loading" }
  | { kind: "data"; value: T }
  | { kind: "empty"; message: string };

function sectionOf<T>(value: T): Section<T> {
  return { kind: "data", value };
}

async function fetchSection<T>(call: () => Promise<T>): Promise<Section<T>> {
  try {
    return sectionOf(await call());
  } catch (err) {
    if (err instanceof ApiError) return { kind: "empty", message: err.message };
    if (err instanceof OfflineError) return { kind: "empty", message: "service unreachable" };
    throw err;
  }
}

// -- scales ----------------------------------------------------------------

function sx(x: number, domainMax = 1): number {
  return PAD + (x / domainMax) * (W - 2 * PAD);
}

function sy(p: number, domainMax = 1): number {
  return H - PAD - (p / domainMax) * (H - 2 * PAD);
}

/** Right-continuous staircase through (x_i, v_i): hold the old value until each jump. */
function staircasePoints(
  steps: readonly (readonly number[])[],
  column: number,
): [number, number][] {
  const points: [number, number][] = [];
  let previous: number | null = null;
  for (const row of steps) {
    const x = row[0]!;
    const v = row[column]!;
    if (previous !== null) points.push([x, previous]);
    points.push([x, v]);
    previous = v;
  }
  return points;
}

function toPath(points: [number, number][], domainMaxY = 1): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${sx(x).toFixed(1)},${sy(y, domainMaxY).toFixed(1)}`)
    .join(" ");
}

function axes(yLabels: [number, string][], xLabels: [number, string][], xMax = 1): string {
  const yTicks = yLabels
    .map(
      ([v, label]) => `
      <line x1="${PAD}" y1="${sy(v)}" x2="${W - PAD}" y2="${sy(v)}" class="grid"></line>
      <text x="${PAD - 6}" y="${sy(v) + 4}" text-anchor="end" class="tick">${label}</text>`,
    )
    .join("");
  const xTicks = xLabels
    .map(
      ([v, label]) => `
      <text x="${sx(v, xMax)}" y="${H - PAD + 16}" text-anchor="middle" class="tick">${label}</text>`,
    )
    .join("");
  return `${yTicks}${xTicks}
    <line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"></line>
    <line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" class="axis"></line>`;
}

// -- chart builders (exported for the snapshot tests) ----------------------

export function ecdfSvg(bands: [string, BandJson][]): string {
  const layers = bands
    .map(([name, band], i) => {
      const color = PALETTE[i % PALETTE.length]!;
      const upper = staircasePoints(band.steps, 3);
      const lower = staircasePoints(band.steps, 1).reverse();
      const polygon = [...upper, ...lower]
        .map(([x, y]) => `${sx(x).toFixed(1)},${sy(y).toFixed(1)}`)
        .join(" ");
      const mid = toPath(staircasePoints(band.steps, 2));
      return `
      <g class="band" data-set="${esc(name)}">
        <polygon points="${polygon}" fill="${color}" opacity="0.14"></polygon>
        <path d="${mid}" fill="none" stroke="${color}" stroke-width="1.6"></path>
      </g>`;
    })
    .join("");
  const legend = bands
    .map(([name, band], i) => {
      const color = PALETTE[i % PALETTE.length]!;
      return `<span class="key"><i style="background:${color}"></i>${esc(name)}
        (n ${num(band.n)}, &epsilon; ${num(band.epsilon)})</span>`;
    })
    .join(" ");
  return `
    <svg viewBox="0 0 ${W} ${H}" role="img" aria-label="ECDF with confidence bands">
      ${axes(
        [
          [0, "0"],
          [0.5, "0.5"],
          [1, "1"],
        ],
        [
          [0, "0"],
          [0.5, "0.5"],
          [1, "1"],
        ],
      )}
      ${layers}
    </svg>
    <div class="legend">${legend}</div>`;
}

export function histogramSvg(histograms: HistogramsJson): string {
  const names = Object.keys(histograms);
  if (!names.length) return `<p class="empty">No histogram data.</p>`;
  const plotW = W - 2 * PAD;
  const binW = plotW / 10;
  const barW = (binW * 0.8) / names.length;
  const bars = names
    .map((name, s) => {
      const color = PALETTE[s % PALETTE.length]!;
      const set = histograms[name]!;
      const rects = set.percentages
        .map((pct, bin) => {
          const x = PAD + bin * binW + binW * 0.1 + s * barW;
          const y = sy(pct, 100);
          const height = H - PAD - y;
          return `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${barW.toFixed(1)}"
            height="${height.toFixed(1)}" fill="${color}"><title>${esc(name)} bin ${bin}: ${num(pct)}%</title></rect>`;
        })
        .join("");
      return `<g data-set="${esc(name)}">${rects}</g>`;
    })
    .join("");
  const xLabels = Array.from({ length: 10 }, (_, i) => {
    const x = PAD + i * binW + binW / 2;
    return `<text x="${x.toFixed(1)}" y="${H - PAD + 16}" text-anchor="middle" class="tick">.${i}</text>`;
  }).join("");
  const legend = names
    .map((name, i) => {
      const set = histograms[name]!;
      return `<span class="key"><i style="background:${PALETTE[i % PALETTE.length]}"></i>${esc(name)} (n ${num(set.n)})</span>`;
    })
    .join(" ");
  return `
    <svg viewBox="0 0 ${W} ${H}" role="img" aria-label="score histogram, percent per decile">
      ${axes(
        [
          [0, "0%"],
          [0.5, "50%"],
          [1, "100%"],
        ],
        [],
      )}
      ${xLabels}
      ${bars}
    </svg>
    <div class="legend">${legend}</div>`;
}

export function durationRows(rows: DurationRow[]): string {
  const populated = rows.filter((r) => r.n > 0);
  const domainMax = Math.max(1, ...populated.map((r) => r.max ?? 0));
  const body = rows
    .map((row) => {
      if (row.n === 0 || row.min === undefined) {
        return `
        <tr class="duration" data-period="${esc(row.period)}">
          <th>${esc(row.period)}</th>
          <td class="n">0</td>
          <td colspan="5" class="empty">no articles</td>
          <td></td>
        </tr>`;
      }
      const track = `
        <svg viewBox="0 0 240 18" class="span" preserveAspectRatio="none">
          <line x1="${(240 * row.min!) / domainMax}" y1="9" x2="${(240 * row.max!) / domainMax}" y2="9"
                class="range"></line>
          <line x1="${(240 * row.median!) / domainMax}" y1="3" x2="${(240 * row.median!) / domainMax}" y2="15"
                class="median"></line>
          <circle cx="${(240 * row.avg!) / domainMax}" cy="9" r="3" class="avg"></circle>
        </svg>`;
      return `
        <tr class="duration" data-period="${esc(row.period)}">
          <th>${esc(row.period)}</th>
          <td class="n">${num(row.n)}</td>
          <td>${num(row.min)}</td>
          <td>${num(row.avg)}</td>
          <td>${num(row.stddev)}</td>
          <td>${num(row.median)}</td>
          <td>${num(row.max)}</td>
          <td>${track}</td>
        </tr>`;
    })
    .join("");
  return `
    <table class="durations">
      <thead><tr><th>period</th><th>n</th><th>min</th><th>avg</th><th>stddev</th><th>median</th><th>max</th><th>days 0&ndash;${num(domainMax)}</th></tr></thead>
      <tbody>${body}</tbody>
    </table>`;
}

export function blocksTable(blocks: BlocksJson): string {
  const rows = blocks.blocks
    .map((block) => {
      const preview = block.member_ids.slice(0, 5).map(esc).join(", ");
      const more = block.member_ids.length > 5 ? ", &hellip;" : "";
      return `
      <tr>
        <td class="mono">${block.anchor.map(esc).join(" / ")}</td>
        <td class="n">${num(block.size)}</td>
        <td class="mono members">${preview}${more}</td>
      </tr>`;
    })
    .join("");
  return `
    <p class="meta">blocks of ${num(blocks.min_size)}+ articles sharing submission/revision/acceptance
      dates within a day (${num(blocks.excluded_missing_revision)} records without a revision date excluded)</p>
    <table class="blocks">
      <thead><tr><th>anchor dates</th><th>size</th><th>members</th></tr></thead>
      <tbody>${rows || `<tr><td colspan="3" class="empty">No blocks at this size.</td></tr>`}</tbody>
    </table>`;
}

// -- the view --------------------------------------------------------------

export class ChartsView {
  bands: Section<[string, BandJson][]> = { kind: "loading" };
  histograms: Section<HistogramsJson> = { kind: "loading" };
  durations: Section<DurationRow[]> = { kind: "loading" };
  blocks: Section<BlocksJson> = { kind: "loading" };

  constructor(
    private readonly api: ReviewApi,
    private readonly container: HTMLElement,
  ) {}

  async load(): Promise<void> {
    this.bands = await fetchSection(async () => {
      const { sets } = await this.api.ecdfSets();
      const loaded: [string, BandJson][] = [];
      for (const name of sets) {
        loaded.push([name, await this.api.ecdfBand(name)]);
      }
      return loaded;
    });
    this.histograms = await fetchSection(() => this.api.histograms());
    this.durations = await fetchSection(() => this.api.durations());
    this.blocks = await fetchSection(() => this.api.blocks());
    this.render();
  }

  render(): void {
    this.container.innerHTML = `
      <section id="chart-ecdf">
        <h2>Score ECDFs with confidence bands</h2>
        ${this.renderSection(this.bands, (bands) =>
          bands.length ? ecdfSvg(bands) : `<p class="empty">No band files served.</p>`,
        )}
      </section>
      <section id="chart-histogram">
        <h2>Score histograms</h2>
        ${this.renderSection(this.histograms, histogramSvg)}
      </section>
      <section id="chart-durations">
        <h2>Editorial assessment durations</h2>
        ${this.renderSection(this.durations, durationRows)}
      </section>
      <section id="chart-blocks">
        <h2>Same-date blocks</h2>
        ${this.renderSection(this.blocks, blocksTable)}
      </section>`;
  }

  private renderSection<T>(section: Section<T>, body: (value: T) => string): string {
    if (section.kind === "loading") return `<p class="empty">Loading&hellip;</p>`;
    if (section.kind === "empty") return `<p class="empty">${esc(section.message)}</p>`;
    return body(section.value);
  }
}
