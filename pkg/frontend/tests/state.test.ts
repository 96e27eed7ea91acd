import { describe, expect, it } from "vitest";

import { AnswerPayload, FetchLike, Item, ItemKind, TrainerApi } from "../src/api.js";
import { SessionMachine, draftFor, payloadFrom } from "../src/state.js";

interface FakeItem {
  id: string;
  kind: ItemKind;
  truth: Record<string, unknown>;
}

/**
 * In-memory stand-in for the trainer service speaking its exact wire
 * protocol. Verdicts are scripted, not derived from the truth, so tests
 * can prove the machine never judges answers itself.
 */
class FakeService {
  answers = new Map<string, AnswerPayload>();
  failures = 0;
  verdictScript: ((itemId: string, payload: AnswerPayload) => boolean) | null = null;

  constructor(private items: FakeItem[]) {}

  private judge(item: FakeItem, payload: AnswerPayload): boolean {
    if (this.verdictScript !== null) return this.verdictScript(item.id, payload);
    return JSON.stringify(payload) === JSON.stringify(item.truth);
  }

  get fetch(): FetchLike {
    return async (url, init) => {
      if (this.failures > 0) {
        this.failures -= 1;
        throw new TypeError("fetch failed");
      }
      const path = new URL(url).pathname;
      const json = (status: number, body: unknown) =>
        new Response(JSON.stringify(body), { status });

      if (path === "/sessions" && init?.method === "POST") {
        return json(200, {
          id: "s1",
          section: 1,
          item_count: this.items.length,
          created: "now",
        });
      }
      if (path === "/sessions/s1/next") {
        const open = this.items.filter((i) => !this.answers.has(i.id));
        const item = open[0];
        if (item === undefined) {
          return json(200, { status: "complete", answered: this.answers.size });
        }
        const index = this.items.indexOf(item) + 1;
        const publicItem: Item = {
          id: item.id,
          kind: item.kind,
          prompt: "?",
          stimulus: `/stimuli/${item.id}`,
          index,
          total: this.items.length,
        };
        return json(200, { status: "in-progress", item: publicItem });
      }
      if (path === "/sessions/s1/answers" && init?.method === "POST") {
        const body = JSON.parse(String(init.body)) as {
          item_id: string;
          answer: AnswerPayload;
        };
        const item = this.items.find((i) => i.id === body.item_id);
        if (item === undefined) return json(404, { error: "no item", code: 404 });
        if (this.answers.has(item.id)) {
          return json(409, { error: "already answered", code: 409 });
        }
        this.answers.set(item.id, body.answer);
        return json(200, {
          correct: this.judge(item, body.answer),
          truth: item.truth,
          answered: this.answers.size,
          total: this.items.length,
        });
      }
      if (path === "/sessions/s1/report") {
        const answered = this.answers.size;
        const correct = [...this.answers.entries()].filter(([id, payload]) => {
          const item = this.items.find((i) => i.id === id);
          return item !== undefined && this.judge(item, payload);
        }).length;
        const report: Record<string, unknown> = {
          session_id: "s1",
          section: 1,
          participant: {},
          total_items: this.items.length,
          answered,
          correct,
        };
        if (answered > 0) {
          report.accuracy_percent =
            Math.round((1000 * correct) / answered) / 10;
        }
        return json(200, report);
      }
      return json(404, { error: `no route ${path}`, code: 404 });
    };
  }
}

const OBJECT_ITEMS: FakeItem[] = [
  { id: "i1", kind: "object", truth: { class_name: "dog" } },
  { id: "i2", kind: "object", truth: { class_name: "cup" } },
];

function machineFor(service: FakeService): SessionMachine {
  return new SessionMachine(new TrainerApi("http://svc", service.fetch));
}

describe("draft helpers", () => {
  it("builds the draft kind the item asks for", () => {
    expect(draftFor("object")).toEqual({ kind: "object", class_name: null });
    expect(draftFor("cell")).toEqual({ kind: "cell", row: null, col: null });
    expect(draftFor("object-set")).toEqual({ kind: "object-set", classes: [] });
  });

  it("yields payloads only for complete drafts", () => {
    expect(payloadFrom({ kind: "object", class_name: null })).toBeNull();
    expect(payloadFrom({ kind: "object", class_name: "cat" })).toEqual({
      class_name: "cat",
    });
    expect(payloadFrom({ kind: "cell", row: 3, col: null })).toBeNull();
    expect(payloadFrom({ kind: "cell", row: 3, col: 5 })).toEqual({ row: 3, col: 5 });
    expect(payloadFrom({ kind: "object-set", classes: [] })).toBeNull();
    expect(payloadFrom({ kind: "object-set", classes: ["dog", "cat"] })).toEqual({
      classes: ["dog", "cat"],
    });
  });
});

describe("SessionMachine", () => {
  it("starts into the first question with a matching draft", async () => {
    const machine = machineFor(new FakeService(OBJECT_ITEMS));
    await machine.start(1, {});
    expect(machine.state.phase).toBe("question");
    expect(machine.state.item?.id).toBe("i1");
    expect(machine.state.draft?.kind).toBe("object");
    expect(machine.stimulusUrl()).toBe("http://svc/stimuli/i1");
  });

  it("keeps the draft kind matched to the item kind", async () => {
    const items: FakeItem[] = [
      { id: "i1", kind: "cell", truth: { row: 2, col: 5 } },
      { id: "i2", kind: "object-set", truth: { classes: ["dog"] } },
    ];
    const machine = machineFor(new FakeService(items));
    await machine.start(4, {});
    expect(machine.state.draft?.kind).toBe("cell");
    // Wrong-kind edits are ignored rather than corrupting the draft.
    machine.setClass("dog");
    machine.toggleClass("dog");
    expect(machine.state.draft).toEqual({ kind: "cell", row: null, col: null });
    machine.setCell(2, 5);
    await machine.submit();
    await machine.advance();
    expect(machine.state.draft?.kind).toBe("object-set");
    machine.setCell(1, 1);
    expect(machine.state.draft).toEqual({ kind: "object-set", classes: [] });
  });

  it("refuses to submit an incomplete draft", async () => {
    const machine = machineFor(new FakeService(OBJECT_ITEMS));
    await machine.start(1, {});
    expect(machine.canSubmit()).toBe(false);
    expect(await machine.submit()).toBe(false);
    expect(machine.state.phase).toBe("question");
    machine.setClass("dog");
    expect(machine.canSubmit()).toBe(true);
  });

  it("takes correctness from the service, never computing it locally", async () => {
    const service = new FakeService(OBJECT_ITEMS);
    // The service calls this obviously wrong answer correct; the machine
    // must believe it.
    service.verdictScript = () => true;
    const machine = machineFor(service);
    await machine.start(1, {});
    machine.setClass("horse");
    await machine.submit();
    expect(machine.state.phase).toBe("feedback");
    expect(machine.state.verdict?.correct).toBe(true);
    expect(machine.state.score).toEqual({ answered: 1, correct: 1 });
  });

  it("walks every item and lands on the service report", async () => {
    const service = new FakeService(OBJECT_ITEMS);
    const machine = machineFor(service);
    await machine.start(1, {});
    machine.setClass("dog");
    await machine.submit();
    expect(machine.state.verdict?.correct).toBe(true);
    await machine.advance();
    expect(machine.state.item?.id).toBe("i2");
    machine.setClass("horse");
    await machine.submit();
    expect(machine.state.verdict?.correct).toBe(false);
    await machine.advance();
    expect(machine.state.phase).toBe("complete");
    expect(machine.state.report).toEqual({
      session_id: "s1",
      section: 1,
      participant: {},
      total_items: 2,
      answered: 2,
      correct: 1,
      accuracy_percent: 50,
    });
    expect(machine.state.score).toEqual({ answered: 2, correct: 1 });
  });

  it("toggles object-set choices on and off", async () => {
    const items: FakeItem[] = [
      { id: "i1", kind: "object-set", truth: { classes: ["cat", "dog"] } },
    ];
    const machine = machineFor(new FakeService(items));
    await machine.start(5, {});
    machine.toggleClass("dog");
    machine.toggleClass("cat");
    machine.toggleClass("dog");
    expect(machine.state.draft).toEqual({ kind: "object-set", classes: ["cat"] });
  });

  it("parks on error with the draft preserved, then retries", async () => {
    const service = new FakeService(OBJECT_ITEMS);
    const machine = machineFor(service);
    await machine.start(1, {});
    machine.setClass("dog");
    service.failures = 1;
    await machine.submit();
    expect(machine.state.phase).toBe("error");
    expect(machine.state.error).toContain("cannot reach service");
    expect(machine.state.draft).toEqual({ kind: "object", class_name: "dog" });
    await machine.retry();
    expect(machine.state.phase).toBe("feedback");
    expect(machine.state.verdict?.correct).toBe(true);
  });

  it("recovers from a duplicate-answer conflict by moving on", async () => {
    const service = new FakeService(OBJECT_ITEMS);
    const machine = machineFor(service);
    await machine.start(1, {});
    expect(machine.state.item?.id).toBe("i1");
    machine.setClass("dog");
    // The answer landed on the service but the response was lost; the
    // retried submit conflicts and the machine moves to the next item.
    service.answers.set("i1", { class_name: "dog" });
    await machine.submit();
    expect(machine.state.phase).toBe("question");
    expect(machine.state.item?.id).toBe("i2");
  });

  it("reports an empty session as complete immediately", async () => {
    const machine = machineFor(new FakeService([]));
    await machine.start(1, {});
    expect(machine.state.phase).toBe("complete");
    expect(machine.state.report?.answered).toBe(0);
    expect(machine.state.report?.accuracy_percent).toBeUndefined();
  });
});
