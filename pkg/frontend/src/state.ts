/**
 * View-state machine for one training or test session.
 *
 * The machine owns the session lifecycle (create, fetch item, collect a
 * draft answer, submit, show the verdict, advance, report) and enforces
 * two invariants: the draft widget kind always matches the current item's
 * question kind, and correctness only ever comes from the service verdict.
 * A failed request parks the machine in an error phase with the pending
 * operation retained, so retry resumes without losing the draft.
 */

import {
  AnswerPayload,
  ApiError,
  Item,
  ItemKind,
  Participant,
  Report,
  SessionInfo,
  TrainerApi,
  Verdict,
} from "./api.js";

export type Draft =
  | { kind: "object"; class_name: string | null }
  | { kind: "cell"; row: number | null; col: number | null }
  | { kind: "object-set"; classes: string[] };

export function draftFor(kind: ItemKind): Draft {
  switch (kind) {
    case "object":
      return { kind, class_name: null };
    case "cell":
      return { kind, row: null, col: null };
    case "object-set":
      return { kind, classes: [] };
  }
}

/** Complete drafts become wire payloads; incomplete ones yield null. */
export function payloadFrom(draft: Draft): AnswerPayload | null {
  switch (draft.kind) {
    case "object":
      return draft.class_name === null ? null : { class_name: draft.class_name };
    case "cell":
      return draft.row === null || draft.col === null
        ? null
        : { row: draft.row, col: draft.col };
    case "object-set":
      return draft.classes.length === 0 ? null : { classes: [...draft.classes] };
  }
}

export type Phase =
  | "idle"
  | "loading"
  | "question"
  | "feedback"
  | "complete"
  | "error";

export interface Score {
  answered: number;
  correct: number;
}

export interface MachineState {
  phase: Phase;
  practice: boolean;
  session: SessionInfo | null;
  item: Item | null;
  draft: Draft | null;
  verdict: Verdict | null;
  report: Report | null;
  score: Score;
  error: string | null;
}

export class SessionMachine {
  private readonly api: TrainerApi;
  private readonly onChange: (state: MachineState) => void;
  private pending: (() => Promise<void>) | null = null;
  private current: MachineState = {
    phase: "idle",
    practice: false,
    session: null,
    item: null,
    draft: null,
    verdict: null,
    report: null,
    score: { answered: 0, correct: 0 },
    error: null,
  };

  constructor(api: TrainerApi, onChange?: (state: MachineState) => void) {
    this.api = api;
    this.onChange = onChange ?? (() => undefined);
  }

  get state(): MachineState {
    return this.current;
  }

  private update(patch: Partial<MachineState>): void {
    this.current = { ...this.current, ...patch };
    this.onChange(this.current);
  }

  /** Run one service operation; on failure park it for retry. */
  private async run(op: () => Promise<void>): Promise<void> {
    try {
      await op();
      this.pending = null;
    } catch (err) {
      const message =
        err instanceof ApiError ? err.message : String(err);
      this.pending = op;
      this.update({ phase: "error", error: message });
    }
  }

  async start(
    section: number,
    participant: Participant,
    options: { practice?: boolean; seed?: number } = {},
  ): Promise<void> {
    this.current = {
      phase: "loading",
      practice: options.practice ?? false,
      session: null,
      item: null,
      draft: null,
      verdict: null,
      report: null,
      score: { answered: 0, correct: 0 },
      error: null,
    };
    this.onChange(this.current);
    // Two separate retryable steps so a failed item fetch never re-creates
    // the session.
    await this.run(async () => {
      const session = await this.api.createSession(
        section,
        participant,
        options.seed,
      );
      this.update({ session });
    });
    if (this.current.phase !== "error") {
      await this.run(() => this.fetchNext());
    }
  }

  private async fetchNext(): Promise<void> {
    const session = this.current.session;
    if (session === null) throw new ApiError("no active session", 0);
    const next = await this.api.nextItem(session.id);
    if (next.status === "complete") {
      const report = await this.api.report(session.id);
      this.update({
        phase: "complete",
        item: null,
        draft: null,
        verdict: null,
        report,
      });
      return;
    }
    this.update({
      phase: "question",
      item: next.item,
      draft: draftFor(next.item.kind),
      verdict: null,
    });
  }

  /** Absolute stimulus URL for the current item, if any. */
  stimulusUrl(): string | null {
    const item = this.current.item;
    return item === null ? null : this.api.url(item.stimulus);
  }

  setClass(name: string): void {
    const draft = this.current.draft;
    if (draft === null || draft.kind !== "object") return;
    this.update({ draft: { kind: "object", class_name: name } });
  }

  setCell(row: number, col: number): void {
    const draft = this.current.draft;
    if (draft === null || draft.kind !== "cell") return;
    this.update({ draft: { kind: "cell", row, col } });
  }

  toggleClass(name: string): void {
    const draft = this.current.draft;
    if (draft === null || draft.kind !== "object-set") return;
    const classes = draft.classes.includes(name)
      ? draft.classes.filter((c) => c !== name)
      : [...draft.classes, name];
    this.update({ draft: { kind: "object-set", classes } });
  }

  canSubmit(): boolean {
    return (
      this.current.phase === "question" &&
      this.current.draft !== null &&
      payloadFrom(this.current.draft) !== null
    );
  }

  /** Submit the draft; false when there is nothing valid to submit. */
  async submit(): Promise<boolean> {
    if (!this.canSubmit()) return false;
    const { session, item, draft } = this.current;
    if (session === null || item === null || draft === null) return false;
    const payload = payloadFrom(draft);
    if (payload === null) return false;
    await this.run(async () => {
      let verdict: Verdict;
      try {
        verdict = await this.api.submitAnswer(session.id, item.id, payload);
      } catch (err) {
        if (err instanceof ApiError && err.code === 409) {
          // The answer already landed (a retry after a lost response);
          // move on instead of failing.
          await this.fetchNext();
          return;
        }
        throw err;
      }
      this.update({
        phase: "feedback",
        verdict,
        score: {
          answered: verdict.answered,
          correct: this.current.score.correct + (verdict.correct ? 1 : 0),
        },
      });
    });
    return true;
  }

  /** Leave the feedback view: next item, or the report when done. */
  async advance(): Promise<void> {
    if (this.current.phase !== "feedback") return;
    await this.run(() => this.fetchNext());
  }

  /** Re-run the operation that failed; no-op outside the error phase. */
  async retry(): Promise<void> {
    if (this.current.phase !== "error" || this.pending === null) return;
    const op = this.pending;
    this.update({ phase: "loading", error: null });
    await this.run(op);
  }
}
