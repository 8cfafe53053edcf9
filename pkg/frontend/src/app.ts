// DOM wiring: reads the static setup form, owns one SessionMachine per
// tab, and re-renders the board on every state change. All markup the
// board shows comes from render.ts.

import { PlayClient } from "./api.js";
import { renderBoard, renderError } from "./render.js";
import { SessionMachine } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function num(id: string): number {
  const raw = el<HTMLInputElement>(id).value.trim();
  const x = Number(raw);
  if (raw === "" || !Number.isFinite(x)) throw new Error(`bad number in #${id}`);
  return x;
}

function buildStrategy(): string | Record<string, unknown> {
  const kind = el<HTMLSelectElement>("opp-select").value;
  switch (kind) {
    case "extortion":
      return {
        extortion: { delta: num("p-delta"), chi: num("p-chi"), phi: num("p-phi") },
      };
    case "mischief":
      return { mischief: { target: num("p-target"), beta: num("p-beta") } };
    case "random":
      return { random: { prob: num("p-prob") } };
    default:
      return kind;
  }
}

let machine: SessionMachine | null = null;

function paint(): void {
  const board = el<HTMLDivElement>("board");
  if (machine && machine.session) {
    el<HTMLDivElement>("form-error").innerHTML = "";
    board.innerHTML = renderBoard(machine);
  } else {
    board.innerHTML = "";
    el<HTMLDivElement>("form-error").innerHTML = renderError(
      machine ? machine.error : null,
    );
  }
}

async function startSession(): Promise<void> {
  const url = el<HTMLInputElement>("service-url").value.trim().replace(/\/$/, "");
  const seedRaw = el<HTMLInputElement>("seed").value.trim();
  let strategy: string | Record<string, unknown>;
  try {
    strategy = buildStrategy();
  } catch (err) {
    el<HTMLDivElement>("form-error").innerHTML = renderError(String(err));
    return;
  }
  const client = new PlayClient(url);
  machine = new SessionMachine(client);
  machine.onChange(paint);
  const body: Parameters<SessionMachine["start"]>[0] = {
    game: el<HTMLSelectElement>("game-select").value,
    strategy,
  };
  if (seedRaw !== "") body.seed = Number(seedRaw);
  await machine.start(body);
}

function toggleParamGroups(): void {
  const kind = el<HTMLSelectElement>("opp-select").value;
  for (const group of document.querySelectorAll<HTMLElement>(".pgroup")) {
    group.style.display = group.dataset["kind"] === kind ? "" : "none";
  }
}

async function annotateGames(): Promise<void> {
  // Best effort: the static options already cover the canonical games.
  const url = el<HTMLInputElement>("service-url").value.trim().replace(/\/$/, "");
  try {
    const games = await new PlayClient(url).listGames();
    const select = el<HTMLSelectElement>("game-select");
    select.innerHTML = games
      .map((g) => {
        const s = g.game.sx.map(String).join(",");
        return `<option value="${g.name}">${g.name} (${s})</option>`;
      })
      .join("");
  } catch {
    // service not up yet; leave the built-in list
  }
}

function onBoardClick(ev: Event): void {
  const target = ev.target as HTMLElement | null;
  const act = target?.dataset?.["act"];
  if (!act || !machine) return;
  if (act === "up" || act === "down") void machine.submit(act);
  else if (act === "retry") void machine.retry();
  else if (act === "close") void machine.close();
  else if (act === "new") {
    machine.reset();
    machine = null;
    paint();
  }
}

export function init(): void {
  el<HTMLButtonElement>("start-btn").addEventListener("click", () => {
    void startSession();
  });
  el<HTMLSelectElement>("opp-select").addEventListener("change", toggleParamGroups);
  el<HTMLDivElement>("board").addEventListener("click", onBoardClick);
  toggleParamGroups();
  void annotateGames();
}

init();
