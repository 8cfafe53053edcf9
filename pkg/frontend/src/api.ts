// Typed client for the play service. All numbers shown in the UI come
// from these responses; the client never recomputes payoffs except to
// cross-check what the service sent.

export interface Point {
  piX: number;
  piY: number;
}

export interface GameInfo {
  schema: string;
  name: string;
  kind: string;
  sx: number[];
  sy: number[];
}

export interface ConstraintView {
  kind: string;
  side: string;
  line: Point[] | null;
  [param: string]: unknown;
}

export interface Averages {
  x: number;
  y: number;
}

export interface HistoryEntry {
  round: number;
  human_action: string;
  machine_action: string;
  outcome: string;
  stage_payoffs: Averages;
}

export interface SessionView {
  session_id: string;
  status: string;
  round: number;
  game: GameInfo;
  disclosed_info: Record<string, unknown>;
  constraint: ConstraintView | null;
  region: { hull: Point[] };
  seed: number;
  created_at: string;
  running_averages: Averages | null;
  history?: HistoryEntry[];
}

export interface MoveResult {
  round: number;
  machine_action: string;
  human_action: string;
  stage_payoffs: Averages;
  running_averages: Averages;
}

export interface GamesEntry {
  name: string;
  game: GameInfo;
  hull: Point[];
}

export interface CreateSessionBody {
  game: string | Record<string, unknown>;
  strategy: string | Record<string, unknown>;
  seed?: number;
}

/** Non-2xx response; `detail` carries the service message verbatim. */
export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

/** fetch itself failed: connection refused, dropped, DNS. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super("service unreachable");
    this.name = "NetworkError";
    this.cause = cause;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function readDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `${res.status} ${res.statusText}`;
  }
}

/** What the session machine needs from the service. */
export interface PlayApi {
  createSession(body: CreateSessionBody): Promise<SessionView>;
  submitMove(
    sessionId: string,
    action: "up" | "down",
    round: number,
  ): Promise<MoveResult>;
  closeSession(
    sessionId: string,
  ): Promise<{ session_id: string; status: string; round: number }>;
}

export class PlayClient implements PlayApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(err);
    }
    if (!res.ok) throw new ApiError(res.status, await readDetail(res));
    return (await res.json()) as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionView> {
    return this.request("POST", "/sessions", body);
  }

  /** `round` is the idempotency token: the service replays its cached
      response when the same (round, action) arrives twice. */
  submitMove(
    sessionId: string,
    action: "up" | "down",
    round: number,
  ): Promise<MoveResult> {
    return this.request("POST", `/sessions/${sessionId}/moves`, {
      action,
      round,
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  closeSession(
    sessionId: string,
  ): Promise<{ session_id: string; status: string; round: number }> {
    return this.request("POST", `/sessions/${sessionId}/close`);
  }

  async listGames(): Promise<GamesEntry[]> {
    const res = await this.request<{ games: GamesEntry[] }>("GET", "/games");
    return res.games;
  }
}
