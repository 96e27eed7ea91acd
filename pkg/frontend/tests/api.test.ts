import { describe, expect, it } from "vitest";

import { ApiError, FetchLike, TrainerApi } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function jsonFetch(
  status: number,
  body: unknown,
  calls: Call[] = [],
): FetchLike {
  return async (url, init) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
}

describe("TrainerApi", () => {
  it("posts the session body and returns the parsed info", async () => {
    const calls: Call[] = [];
    const api = new TrainerApi(
      "http://svc:8000",
      jsonFetch(200, { id: "s1", section: 1, item_count: 7, created: "t" }, calls),
    );
    const info = await api.createSession(1, { age: 30, musical_background: true }, 42);
    expect(info.id).toBe("s1");
    expect(info.item_count).toBe(7);
    expect(calls[0]?.url).toBe("http://svc:8000/sessions");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      section: 1,
      participant: { age: 30, musical_background: true },
      seed: 42,
    });
  });

  it("omits the seed field when not given", async () => {
    const calls: Call[] = [];
    const api = new TrainerApi(
      "http://svc:8000",
      jsonFetch(200, { id: "s1", section: 1, item_count: 7, created: "t" }, calls),
    );
    await api.createSession(1, {});
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      section: 1,
      participant: {},
    });
  });

  it("hits the next, answer, and report routes for a session", async () => {
    const calls: Call[] = [];
    const api = new TrainerApi(
      "http://svc:8000",
      jsonFetch(200, { status: "complete", answered: 0 }, calls),
    );
    await api.nextItem("s1");
    await api.submitAnswer("s1", "i1", { class_name: "dog" }).catch(() => undefined);
    await api.report("s1").catch(() => undefined);
    expect(calls.map((c) => c.url)).toEqual([
      "http://svc:8000/sessions/s1/next",
      "http://svc:8000/sessions/s1/answers",
      "http://svc:8000/sessions/s1/report",
    ]);
    expect(JSON.parse(String(calls[1]?.init?.body))).toEqual({
      item_id: "i1",
      answer: { class_name: "dog" },
    });
  });

  it("strips trailing slashes and roots relative paths", () => {
    const api = new TrainerApi("http://svc:8000///");
    expect(api.url("/stimuli/abc")).toBe("http://svc:8000/stimuli/abc");
    expect(api.url("healthz")).toBe("http://svc:8000/healthz");
  });

  it("turns a service error body into an ApiError with its code", async () => {
    const api = new TrainerApi(
      "http://svc:8000",
      jsonFetch(409, { error: "item 'i1' already answered", code: 409 }),
    );
    const err = await api
      .submitAnswer("s1", "i1", { class_name: "dog" })
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe(409);
    expect((err as ApiError).message).toContain("already answered");
  });

  it("keeps the status when the error body is not JSON", async () => {
    const api = new TrainerApi("http://svc:8000", async () => {
      return new Response("<html>nope</html>", { status: 502 });
    });
    const err = await api.nextItem("s1").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe(502);
  });

  it("maps a network failure to code 0", async () => {
    const api = new TrainerApi("http://svc:8000", async () => {
      throw new TypeError("fetch failed");
    });
    const err = await api.health().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe(0);
    expect((err as ApiError).message).toContain("cannot reach service");
  });

  it("returns the CSV body as text", async () => {
    const api = new TrainerApi("http://svc:8000", async () => {
      return new Response("age,MB,Test1,Test2,Test3,Test4,Test5\n", {
        status: 200,
        headers: { "content-type": "text/csv" },
      });
    });
    expect(await api.reportCsv()).toContain("age,MB,Test1");
  });
});
