// Session state machine. One active session per instance; submissions
// are serialized and carry a per-round idempotency token so a retry
// after a dropped connection can never double-play a round.

import {
  ApiError,
  NetworkError,
  type Averages,
  type CreateSessionBody,
  type MoveResult,
  type PlayApi,
  type SessionView,
} from "./api.js";

export type Phase = "idle" | "creating" | "active" | "submitting" | "retrying" | "closed";

export interface RoundEntry {
  round: number;
  humanAction: string;
  machineAction: string;
  stagePayoffs: Averages;
  runningAverages: Averages;
}

export interface MachineOptions {
  /** Waits between automatic retries, in ms; length caps the attempts. */
  retryDelays?: number[];
  sleep?: (ms: number) => Promise<void>;
}

const DEFAULT_DELAYS = [500, 1000, 2000];

function defaultSleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Stage payoffs implied by the two actions, from the disclosed game.
    Outcome order is (uu, ud, du, dd) seen from the human's seat. */
export function expectedStagePayoffs(
  sx: number[],
  sy: number[],
  humanAction: string,
  machineAction: string,
): Averages {
  const o =
    (humanAction === "up" ? 0 : 2) + (machineAction === "up" ? 0 : 1);
  return { x: sx[o]!, y: sy[o]! };
}

export class SessionMachine {
  phase: Phase = "idle";
  /** Service error text, surfaced verbatim. */
  error: string | null = null;
  /** Non-null while a move is being retried after connection loss. */
  banner: string | null = null;
  session: SessionView | null = null;
  rounds: RoundEntry[] = [];
  /** False if the service's numbers ever disagree with the disclosed
      game by more than 1e-9. Never expected to trip. */
  validationOk = true;

  private pending: { action: "up" | "down"; round: number } | null = null;
  private listeners: Array<() => void> = [];
  private readonly delays: number[];
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly client: PlayApi,
    opts: MachineOptions = {},
  ) {
    this.delays = opts.retryDelays ?? DEFAULT_DELAYS;
    this.sleep = opts.sleep ?? defaultSleep;
  }

  /** Local round counter; must equal the service's after every exchange. */
  get round(): number {
    return this.rounds.length;
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  async start(body: CreateSessionBody): Promise<void> {
    if (this.phase !== "idle" && this.phase !== "closed") return;
    this.phase = "creating";
    this.error = null;
    this.notify();
    try {
      const view = await this.client.createSession(body);
      this.session = view;
      this.rounds = [];
      this.validationOk = true;
      this.phase = "active";
    } catch (err) {
      this.session = null;
      this.phase = "idle";
      this.error = err instanceof ApiError ? err.detail : describe(err);
    }
    this.notify();
  }

  /** Submit one move. Ignored unless the session is active, so a
      double click cannot queue a second request for the same round. */
  async submit(action: "up" | "down"): Promise<void> {
    if (this.phase !== "active" || !this.session) return;
    this.phase = "submitting";
    this.error = null;
    this.pending = { action, round: this.round + 1 };
    this.notify();
    await this.drive();
  }

  /** Resume a move stuck behind a dead connection (banner button). */
  async retry(): Promise<void> {
    if (this.phase !== "retrying" || !this.pending) return;
    this.phase = "submitting";
    this.notify();
    await this.drive();
  }

  private async drive(): Promise<void> {
    if (!this.pending || !this.session) return;
    const { action, round } = this.pending;
    let attempt = 0;
    for (;;) {
      try {
        const result = await this.client.submitMove(
          this.session.session_id,
          action,
          round,
        );
        this.applyMove(result);
        this.pending = null;
        this.banner = null;
        this.phase = "active";
        this.notify();
        return;
      } catch (err) {
        if (err instanceof NetworkError && attempt < this.delays.length) {
          // The request may have landed before the connection died; the
          // round token makes resending it safe.
          this.banner = `connection lost, retrying round ${round}`;
          this.phase = "retrying";
          this.notify();
          await this.sleep(this.delays[attempt]!);
          attempt += 1;
          continue;
        }
        if (err instanceof NetworkError) {
          this.banner = `connection lost, round ${round} not confirmed`;
          this.phase = "retrying";
        } else {
          this.pending = null;
          this.banner = null;
          this.error = err instanceof ApiError ? err.detail : describe(err);
          this.phase = "active";
        }
        this.notify();
        return;
      }
    }
  }

  private applyMove(result: MoveResult): void {
    this.rounds.push({
      round: result.round,
      humanAction: result.human_action,
      machineAction: result.machine_action,
      stagePayoffs: result.stage_payoffs,
      runningAverages: result.running_averages,
    });
    this.validationOk = this.validationOk && this.checkMove(result);
  }

  /** Display validation only: the service's numbers must match what the
      disclosed game implies, to 1e-9. The service stays authoritative. */
  private checkMove(result: MoveResult): boolean {
    if (!this.session) return true;
    if (result.round !== this.rounds.length) return false;
    const { sx, sy } = this.session.game;
    const stage = expectedStagePayoffs(
      sx,
      sy,
      result.human_action,
      result.machine_action,
    );
    let sumX = 0;
    let sumY = 0;
    for (const r of this.rounds) {
      sumX += r.stagePayoffs.x;
      sumY += r.stagePayoffs.y;
    }
    const n = this.rounds.length;
    return (
      Math.abs(stage.x - result.stage_payoffs.x) <= 1e-9 &&
      Math.abs(stage.y - result.stage_payoffs.y) <= 1e-9 &&
      Math.abs(sumX / n - result.running_averages.x) <= 1e-9 &&
      Math.abs(sumY / n - result.running_averages.y) <= 1e-9
    );
  }

  async close(): Promise<void> {
    if (!this.session || this.phase === "closed") return;
    try {
      await this.client.closeSession(this.session.session_id);
      this.phase = "closed";
    } catch (err) {
      this.error = err instanceof ApiError ? err.detail : describe(err);
    }
    this.notify();
  }

  /** Back to the setup form, keeping nothing. */
  reset(): void {
    this.phase = "idle";
    this.session = null;
    this.rounds = [];
    this.pending = null;
    this.error = null;
    this.banner = null;
    this.validationOk = true;
    this.notify();
  }
}

function describe(err: unknown): string {
  if (err instanceof NetworkError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}
