// View assembly: pure functions from machine state to HTML/SVG strings.
// The DOM layer in app.ts only injects these and delegates clicks, so
// everything visible is testable without a browser.

import type { Averages, GameInfo, SessionView } from "./api.js";
import {
  constraintSegment,
  hullBBox,
  makeScales,
  polylinePath,
  toChart,
  type ChartPt,
  type Viewport,
} from "./geometry.js";
import type { RoundEntry, SessionMachine } from "./state.js";

export const VIEWPORT: Viewport = { width: 520, height: 420, margin: 45 };

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Short display form; full precision stays in data attributes. */
export function fmt(x: number): string {
  if (Number.isInteger(x)) return String(x);
  return String(Math.round(x * 10000) / 10000);
}

export function renderChart(
  session: SessionView,
  rounds: RoundEntry[],
): string {
  const hull = session.region.hull;
  const box = hullBBox(hull);
  const sc = makeScales(box, VIEWPORT);
  const hullPx = hull.map(toChart).map(
    (p): readonly [number, number] => [sc.px(p[0]), sc.py(p[1])],
  );
  const hullPath = polylinePath(hullPx) + " Z";

  const line = constraintSegment(session.constraint, box);
  let linePart = "";
  if (line.segment) {
    const [a, b] = line.segment;
    const cls = line.kind === "constraint" ? "zd-line" : "diag-line";
    linePart =
      `<line class="${cls}" x1="${sc.px(a[0])}" y1="${sc.py(a[1])}"` +
      ` x2="${sc.px(b[0])}" y2="${sc.py(b[1])}"/>`;
  }

  const traj: ChartPt[] = rounds.map((r) => [
    r.runningAverages.y,
    r.runningAverages.x,
  ]);
  let trajPart = "";
  if (traj.length > 1) {
    const px = traj.map(
      (p): readonly [number, number] => [sc.px(p[0]), sc.py(p[1])],
    );
    trajPart = `<path class="avg-trail" d="${polylinePath(px)}"/>`;
  }
  let pointPart = "";
  const last = traj[traj.length - 1];
  if (last) {
    pointPart =
      `<circle class="avg-point" r="5" cx="${r2(sc.px(last[0]))}"` +
      ` cy="${r2(sc.py(last[1]))}" data-h="${last[0]}" data-v="${last[1]}"/>`;
  }

  const x0 = VIEWPORT.margin;
  const x1 = VIEWPORT.width - VIEWPORT.margin;
  const y0 = VIEWPORT.height - VIEWPORT.margin;
  const y1 = VIEWPORT.margin;
  const legend =
    line.kind === "constraint"
      ? "ZD constraint line"
      : "fair-split diagonal (chi = 1)";

  return (
    `<svg viewBox="0 0 ${VIEWPORT.width} ${VIEWPORT.height}" class="board-chart" role="img">` +
    `<rect class="frame" x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}"/>` +
    `<path class="hull" d="${hullPath}"/>` +
    linePart +
    trajPart +
    pointPart +
    `<text class="axis-label" x="${(x0 + x1) / 2}" y="${VIEWPORT.height - 8}">machine average</text>` +
    `<text class="axis-label vertical" x="14" y="${(y0 + y1) / 2}" transform="rotate(-90 14 ${(y0 + y1) / 2})">your average</text>` +
    `<text class="tick" x="${x0}" y="${y0 + 16}">${fmt(box.hMin)}</text>` +
    `<text class="tick" x="${x1}" y="${y0 + 16}">${fmt(box.hMax)}</text>` +
    `<text class="tick" x="${x0 - 6}" y="${y0}" text-anchor="end">${fmt(box.vMin)}</text>` +
    `<text class="tick" x="${x0 - 6}" y="${y1 + 4}" text-anchor="end">${fmt(box.vMax)}</text>` +
    `<text class="legend" x="${x1}" y="${y1 - 6}" text-anchor="end">${legend}</text>` +
    `</svg>`
  );
}

export function renderMatrix(game: GameInfo): string {
  const cell = (o: number) =>
    `<td>you ${fmt(game.sx[o]!)}, machine ${fmt(game.sy[o]!)}</td>`;
  return (
    `<table class="matrix"><caption>stage payoffs (${escapeHtml(game.name)})</caption>` +
    `<tr><th></th><th>machine up</th><th>machine down</th></tr>` +
    `<tr><th>you up</th>${cell(0)}${cell(1)}</tr>` +
    `<tr><th>you down</th>${cell(2)}${cell(3)}</tr>` +
    `</table>`
  );
}

export function renderLog(rounds: RoundEntry[], limit = 12): string {
  if (rounds.length === 0) return `<p class="log-empty">no rounds yet</p>`;
  const recent = rounds.slice(-limit).reverse();
  const rows = recent
    .map(
      (r) =>
        `<tr><td>${r.round}</td><td>${escapeHtml(r.humanAction)}</td>` +
        `<td>${escapeHtml(r.machineAction)}</td>` +
        `<td>${fmt(r.stagePayoffs.x)}, ${fmt(r.stagePayoffs.y)}</td>` +
        `<td>${fmt(r.runningAverages.x)}, ${fmt(r.runningAverages.y)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="round-log">` +
    `<tr><th>round</th><th>you</th><th>machine</th><th>stage</th><th>average</th></tr>` +
    rows +
    `</table>`
  );
}

export function renderDisclosure(session: SessionView): string {
  const info = session.disclosed_info;
  const kind = String(info["type"] ?? "?");
  const params = Object.entries(info)
    .filter(([k]) => k !== "type" && k !== "side" && k !== "probs")
    .map(([k, v]) => `${escapeHtml(k)}=${escapeHtml(String(v))}`)
    .join(" ");
  return (
    `<p class="disclosure">machine plays <b>${escapeHtml(kind)}</b>` +
    (params ? ` ${params}` : "") +
    ` <span class="seed">(seed ${session.seed})</span></p>`
  );
}

export function renderStatus(m: SessionMachine): string {
  const avg = lastAverages(m.rounds);
  const avgText = avg
    ? `running average: you ${fmt(avg.x)}, machine ${fmt(avg.y)}`
    : "no rounds played";
  const check = m.validationOk
    ? ""
    : `<span class="check-fail">numbers disagree with disclosed game</span>`;
  return (
    `<p class="status">round <b class="round-no">${m.round}</b>` +
    ` | ${avgText} ${check}</p>`
  );
}

function lastAverages(rounds: RoundEntry[]): Averages | null {
  const last = rounds[rounds.length - 1];
  return last ? last.runningAverages : null;
}

export function renderBanner(banner: string | null): string {
  if (!banner) return "";
  return (
    `<div class="banner">${escapeHtml(banner)}` +
    ` <button data-act="retry">retry now</button></div>`
  );
}

export function renderError(error: string | null): string {
  if (!error) return "";
  return `<div class="error">${escapeHtml(error)}</div>`;
}

export function renderControls(m: SessionMachine): string {
  const live = m.phase === "active";
  const dis = live ? "" : " disabled";
  return (
    `<div class="controls">` +
    `<button data-act="up"${dis}>up</button>` +
    `<button data-act="down"${dis}>down</button>` +
    `<button data-act="close"${m.phase === "closed" ? " disabled" : ""}>close session</button>` +
    `<button data-act="new">new session</button>` +
    `</div>`
  );
}

/** Everything below the setup form. */
export function renderBoard(m: SessionMachine): string {
  if (!m.session) return renderError(m.error);
  return (
    renderError(m.error) +
    renderBanner(m.banner) +
    renderDisclosure(m.session) +
    renderStatus(m) +
    renderControls(m) +
    renderChart(m.session, m.rounds) +
    renderMatrix(m.session.game) +
    renderLog(m.rounds)
  );
}

function r2(x: number): number {
  return Math.round(x * 100) / 100;
}
