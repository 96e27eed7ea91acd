/**
 * Typed client for the trainer HTTP service.
 *
 * Mirrors the service contract exactly: JSON bodies both ways, every error
 * shaped as { error, code }. The client adds nothing on top; correctness
 * verdicts in particular always come from the service.
 */

export interface Participant {
  id?: string;
  age?: number;
  musical_background?: boolean;
}

export interface SessionInfo {
  id: string;
  section: number;
  item_count: number;
  created: string;
}

export type ItemKind = "object" | "cell" | "object-set";

export interface Item {
  id: string;
  kind: ItemKind;
  prompt: string;
  /** Stimulus path on the service, e.g. "/stimuli/<digest>". */
  stimulus: string;
  index: number;
  total: number;
}

export type NextResponse =
  | { status: "in-progress"; item: Item }
  | { status: "complete"; answered: number };

export type AnswerPayload =
  | { class_name: string }
  | { row: number; col: number }
  | { classes: string[] };

export interface Verdict {
  correct: boolean;
  truth: Record<string, unknown>;
  answered: number;
  total: number;
}

export interface Report {
  session_id: string;
  section: number;
  participant: Participant;
  total_items: number;
  answered: number;
  correct: number;
  accuracy_percent?: number;
}

/** Service-reported failure; code 0 means the request never got through. */
export class ApiError extends Error {
  readonly code: number;

  constructor(message: string, code: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class TrainerApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  /** Absolute URL for a service path such as an item's stimulus. */
  url(path: string): string {
    return this.base + (path.startsWith("/") ? path : "/" + path);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.url(path), init);
    } catch (err) {
      throw new ApiError(`cannot reach service: ${String(err)}`, 0);
    }
    if (!response.ok) {
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (typeof body.error === "string") message = body.error;
      } catch {
        // Non-JSON error body: keep the status text.
      }
      throw new ApiError(message, response.status);
    }
    return (await response.json()) as T;
  }

  createSession(
    section: number,
    participant: Participant,
    seed?: number,
  ): Promise<SessionInfo> {
    const body: Record<string, unknown> = { section, participant };
    if (seed !== undefined) body.seed = seed;
    return this.request<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  nextItem(sessionId: string): Promise<NextResponse> {
    return this.request<NextResponse>(`/sessions/${sessionId}/next`);
  }

  submitAnswer(
    sessionId: string,
    itemId: string,
    answer: AnswerPayload,
  ): Promise<Verdict> {
    return this.request<Verdict>(`/sessions/${sessionId}/answers`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ item_id: itemId, answer }),
    });
  }

  report(sessionId: string): Promise<Report> {
    return this.request<Report>(`/sessions/${sessionId}/report`);
  }

  async reportCsv(): Promise<string> {
    let response: Response;
    try {
      response = await this.fetchFn(this.url("/report.csv"));
    } catch (err) {
      throw new ApiError(`cannot reach service: ${String(err)}`, 0);
    }
    if (!response.ok) throw new ApiError(`${response.status}`, response.status);
    return response.text();
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request<{ status: string; sessions: number }>("/healthz");
  }
}
