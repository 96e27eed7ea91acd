/**
 * Trainer app shell: participant form, session loop, practice mode.
 *
 * Rendering is keyed by (phase, item id) so selection clicks update only
 * the picker, never tearing down the playing audio element. Focus moves to
 * the primary action after each phase change and verdicts are announced
 * through a live region, keeping the whole flow usable by keyboard and
 * screen reader alone.
 */

import { Participant, TrainerApi } from "./api.js";
import { MachineState, SessionMachine, payloadFrom } from "./state.js";
import {
  TRAINER_CLASSES,
  classPicker,
  codewordChart,
  describeTruth,
  el,
  gridOverlay,
  gridPicker,
  multiPicker,
} from "./widgets.js";

const SECTION_LABELS: readonly string[] = [
  "Test 1: recognize the object (fixed placement)",
  "Test 2: recognize the object (any location)",
  "Test 3: recognize the object (any size)",
  "Test 4: locate the grid cell",
  "Test 5: name every object you hear",
];

function defaultServer(): string {
  if (location.protocol.startsWith("http") && location.hostname !== "") {
    return `${location.protocol}//${location.hostname}:8000`;
  }
  return "http://127.0.0.1:8000";
}

class App {
  private readonly root: HTMLElement;
  private readonly live: HTMLElement;
  private readonly panel: HTMLElement;
  private machine: SessionMachine | null = null;
  private api: TrainerApi | null = null;
  private audio: HTMLAudioElement | null = null;
  private pickerSlot: HTMLElement | null = null;
  private submitButton: HTMLButtonElement | null = null;
  private renderedKey = "";

  constructor(root: HTMLElement) {
    this.root = root;
    this.live = el("p", { class: "live", role: "status", "aria-live": "polite" });
    this.panel = el("main", { class: "panel" });
    root.replaceChildren(
      el("h1", {}, "gridtone trainer"),
      this.live,
      this.panel,
    );
    this.showSetup();
  }

  private announce(text: string): void {
    this.live.textContent = text;
  }

  // -- setup ---------------------------------------------------------------

  private showSetup(): void {
    this.renderedKey = "setup";
    const server = el("input", {
      type: "text",
      id: "server",
      value: defaultServer(),
    }) as HTMLInputElement;
    const pid = el("input", { type: "text", id: "pid", autocomplete: "off" }) as HTMLInputElement;
    const age = el("input", { type: "number", id: "age", min: "0" }) as HTMLInputElement;
    const mb = el("input", { type: "checkbox", id: "mb" }) as HTMLInputElement;
    const section = el("select", { id: "section" }) as HTMLSelectElement;
    SECTION_LABELS.forEach((label, i) => {
      section.append(el("option", { value: String(i + 1) }, label));
    });
    const practice = el("input", { type: "checkbox", id: "practice" }) as HTMLInputElement;
    const start = el(
      "button",
      {
        type: "submit",
        class: "primary",
      },
      "Start",
    ) as HTMLButtonElement;

    const form = el(
      "form",
      {
        class: "setup",
        onsubmit: (event: Event) => {
          event.preventDefault();
          const participant: Participant = {};
          if (pid.value.trim() !== "") participant.id = pid.value.trim();
          if (age.value !== "") participant.age = Number(age.value);
          participant.musical_background = mb.checked;
          this.startSession(
            server.value,
            Number(section.value),
            participant,
            practice.checked,
          );
        },
      },
      field("Trainer service URL", server),
      field("Participant id (optional)", pid),
      field("Age (optional)", age),
      checkboxField(mb, "I have a musical background"),
      field("Section", section),
      checkboxField(practice, "Practice mode (untimed, with answer reveal)"),
      start,
    );
    this.panel.replaceChildren(form);
    server.focus();
  }

  private startSession(
    serverUrl: string,
    section: number,
    participant: Participant,
    practice: boolean,
  ): void {
    this.api = new TrainerApi(serverUrl);
    this.machine = new SessionMachine(this.api, (state) => this.render(state));
    this.announce("Starting session.");
    void this.machine.start(section, participant, { practice });
  }

  // -- rendering -----------------------------------------------------------

  private render(state: MachineState): void {
    const key = `${state.phase}:${state.item?.id ?? ""}`;
    if (key === this.renderedKey) {
      this.renderDynamic(state);
      return;
    }
    this.renderedKey = key;
    switch (state.phase) {
      case "loading":
        this.panel.replaceChildren(el("p", {}, "Loading..."));
        break;
      case "question":
        this.renderQuestion(state);
        break;
      case "feedback":
        this.renderFeedback(state);
        break;
      case "complete":
        this.renderReport(state);
        break;
      case "error":
        this.renderError(state);
        break;
      case "idle":
        this.showSetup();
        break;
    }
  }

  /** Draft changed within the same item: update picker and submit only. */
  private renderDynamic(state: MachineState): void {
    if (state.phase !== "question" || state.draft === null) return;
    if (this.pickerSlot !== null) {
      this.pickerSlot.replaceChildren(this.buildPicker(state));
    }
    if (this.submitButton !== null) {
      this.submitButton.disabled = payloadFrom(state.draft) === null;
    }
  }

  private buildPicker(state: MachineState): HTMLElement {
    const machine = this.machine;
    const draft = state.draft;
    if (machine === null || draft === null) return el("div");
    switch (draft.kind) {
      case "object":
        return classPicker(TRAINER_CLASSES, draft.class_name, (name) =>
          machine.setClass(name),
        );
      case "cell":
        return gridPicker(
          draft.row !== null && draft.col !== null
            ? { row: draft.row, col: draft.col }
            : null,
          (row, col) => machine.setCell(row, col),
        );
      case "object-set":
        return multiPicker(TRAINER_CLASSES, draft.classes, (name) =>
          machine.toggleClass(name),
        );
    }
  }

  private renderQuestion(state: MachineState): void {
    const machine = this.machine;
    const item = state.item;
    if (machine === null || item === null) return;
    const url = machine.stimulusUrl();
    this.audio = el("audio", { preload: "auto" }) as HTMLAudioElement;
    if (url !== null) this.audio.src = url;
    const play = el(
      "button",
      {
        type: "button",
        class: "primary",
        onclick: () => this.replay(),
      },
      "Play sound",
    ) as HTMLButtonElement;
    this.pickerSlot = el("div", { class: "picker-slot" });
    this.pickerSlot.append(this.buildPicker(state));
    this.submitButton = el(
      "button",
      {
        type: "button",
        class: "primary",
        onclick: () => void machine.submit(),
      },
      "Submit answer",
    ) as HTMLButtonElement;
    this.submitButton.disabled = !machine.canSubmit();

    const children: (HTMLElement | string)[] = [
      el("h2", {}, `Item ${item.index} of ${item.total}`),
      el("p", { class: "prompt" }, item.prompt),
      el("div", { class: "audio-row" }, play, this.audio),
      this.pickerSlot,
      this.submitButton,
    ];
    if (!state.practice) {
      children.push(
        el(
          "p",
          { class: "score" },
          `Score so far: ${state.score.correct} of ${state.score.answered}`,
        ),
      );
    } else {
      children.push(codewordChart());
    }
    this.panel.replaceChildren(...children);
    this.announce(`Item ${item.index} of ${item.total}. ${item.prompt}`);
    play.focus();
    void this.audio.play().catch(() => {
      // Autoplay may be blocked; the play button stays focused.
    });
  }

  private replay(): void {
    if (this.audio === null) return;
    this.audio.currentTime = 0;
    void this.audio.play().catch(() => undefined);
  }

  private renderFeedback(state: MachineState): void {
    const machine = this.machine;
    const verdict = state.verdict;
    if (machine === null || verdict === null) return;
    const heading = verdict.correct ? "Correct!" : "Not quite.";
    const next = el(
      "button",
      {
        type: "button",
        class: "primary",
        onclick: () => void machine.advance(),
      },
      verdict.answered === verdict.total ? "Show report" : "Next item",
    ) as HTMLButtonElement;
    const children: (HTMLElement | string)[] = [el("h2", {}, heading)];
    if (state.practice) {
      const truth = verdict.truth;
      children.push(el("p", {}, describeTruth(truth)));
      if (typeof truth.row === "number" && typeof truth.col === "number") {
        children.push(
          gridOverlay([{ row: truth.row as number, col: truth.col as number }]),
        );
      }
      const replay = el(
        "button",
        { type: "button", onclick: () => this.replay() },
        "Replay sound",
      );
      children.push(replay, codewordChart());
    } else {
      children.push(
        el(
          "p",
          { class: "score" },
          `Score so far: ${state.score.correct} of ${state.score.answered}`,
        ),
      );
    }
    children.push(next);
    this.panel.replaceChildren(...children);
    this.announce(heading);
    next.focus();
  }

  private renderReport(state: MachineState): void {
    const api = this.api;
    const report = state.report;
    if (api === null || report === null) return;
    const lines: HTMLElement[] = [
      el("h2", {}, "Session report"),
      el("p", {}, `Section ${report.section}: ${report.correct} of ${report.answered} correct.`),
    ];
    if (report.accuracy_percent !== undefined) {
      lines.push(el("p", { class: "accuracy" }, `Accuracy: ${report.accuracy_percent}%`));
    }
    const again = el(
      "button",
      { type: "button", class: "primary", onclick: () => this.showSetup() },
      "New session",
    ) as HTMLButtonElement;
    lines.push(
      el("p", {}, el("a", { href: api.url("/report.csv") }, "Download all results (CSV)")),
      again,
    );
    this.panel.replaceChildren(...lines);
    this.announce("Session complete.");
    again.focus();
  }

  private renderError(state: MachineState): void {
    const machine = this.machine;
    if (machine === null) return;
    const retry = el(
      "button",
      {
        type: "button",
        class: "primary",
        onclick: () => void machine.retry(),
      },
      "Retry",
    ) as HTMLButtonElement;
    this.panel.replaceChildren(
      el("div", { class: "banner", role: "alert" },
        el("p", {}, `Connection problem: ${state.error ?? "unknown error"}`),
        el("p", {}, "Your answer is kept; retry when the service is back."),
        retry,
      ),
    );
    retry.focus();
  }
}

function field(label: string, control: HTMLElement): HTMLElement {
  const id = control.getAttribute("id") ?? "";
  return el("div", { class: "field" }, el("label", { for: id }, label), control);
}

function checkboxField(box: HTMLElement, label: string): HTMLElement {
  const id = box.getAttribute("id") ?? "";
  return el("div", { class: "field check-row" }, box, el("label", { for: id }, label));
}

document.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (root !== null) new App(root);
});
