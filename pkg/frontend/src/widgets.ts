/**
 * DOM builders for the trainer views: answer pickers, the codeword study
 * chart, and the feedback reveal. All builders are pure functions of their
 * inputs plus callbacks; state lives in the session machine.
 *
 * Accessibility: every interactive element is a native button or checkbox,
 * labels are explicit, and pressed state is mirrored in aria-pressed so
 * screen readers track selection.
 */

/** Note letter for each codeword digit, low to high. */
export const NOTE_NAMES: Record<number, string> = {
  1: "A",
  2: "B",
  3: "C",
  4: "D",
  5: "E",
  6: "F",
  7: "G",
};

/** Published class codewords, the study-chart content. */
export const CODEWORDS: ReadonlyMap<string, readonly [number, number, number]> =
  new Map([
    ["apple", [7, 7, 2]],
    ["banana", [4, 4, 4]],
    ["bed", [7, 4, 1]],
    ["book", [1, 4, 3]],
    ["cat", [1, 5, 7]],
    ["chair", [7, 3, 6]],
    ["cup", [2, 2, 7]],
    ["dog", [3, 1, 3]],
    ["horse", [7, 7, 7]],
    ["person", [1, 5, 1]],
  ]);

/** Classes offered by the default trainer, picker order. */
export const TRAINER_CLASSES: readonly string[] = [...CODEWORDS.keys()];

export const GRID_SIDE = 8;

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

/** Small hyperscript helper: el("button", {onclick}, "label"). */
export function el(
  tag: string,
  attrs: Attrs = {},
  ...children: (Node | string)[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

export function digitsLabel(digits: readonly number[]): string {
  return digits
    .map((d) => `${d} (${NOTE_NAMES[d] ?? "?"})`)
    .join(", ");
}

/** One-of-N class choice for single-object questions. */
export function classPicker(
  classes: readonly string[],
  selected: string | null,
  onPick: (name: string) => void,
): HTMLElement {
  const group = el("div", { class: "picker", role: "group", "aria-label": "object choices" });
  for (const name of classes) {
    group.append(
      el(
        "button",
        {
          type: "button",
          class: selected === name ? "choice selected" : "choice",
          "aria-pressed": selected === name ? "true" : "false",
          onclick: () => onPick(name),
        },
        name,
      ),
    );
  }
  return group;
}

/** Independent multi-select for object-set questions. */
export function multiPicker(
  classes: readonly string[],
  selected: readonly string[],
  onToggle: (name: string) => void,
): HTMLElement {
  const group = el("div", { class: "picker", role: "group", "aria-label": "object choices, pick all you hear" });
  for (const name of classes) {
    const box = el("input", {
      type: "checkbox",
      id: `pick-${name}`,
      onchange: () => onToggle(name),
    }) as HTMLInputElement;
    box.checked = selected.includes(name);
    group.append(
      el("div", { class: "check-row" }, box, el("label", { for: `pick-${name}` }, name)),
    );
  }
  return group;
}

/**
 * 8x8 cell choice. Grid row 1 is the bottom of the image, so the visual
 * top row is row 8; each button spells its coordinates out loud.
 */
export function gridPicker(
  selected: { row: number; col: number } | null,
  onPick: (row: number, col: number) => void,
): HTMLElement {
  const grid = el("div", { class: "grid", role: "group", "aria-label": "grid cells, row 1 is the bottom" });
  for (let row = GRID_SIDE; row >= 1; row--) {
    const line = el("div", { class: "grid-row" });
    for (let col = 1; col <= GRID_SIDE; col++) {
      const isSelected =
        selected !== null && selected.row === row && selected.col === col;
      line.append(
        el(
          "button",
          {
            type: "button",
            class: isSelected ? "cell selected" : "cell",
            "aria-pressed": isSelected ? "true" : "false",
            "aria-label": `row ${row}, column ${col}`,
            onclick: () => onPick(row, col),
          },
          isSelected ? "x" : "",
        ),
      );
    }
    grid.append(line);
  }
  return grid;
}

/** Static grid with marked cells, used in practice reveals. */
export function gridOverlay(cells: readonly { row: number; col: number }[]): HTMLElement {
  const marked = new Set(cells.map((c) => `${c.row}:${c.col}`));
  const grid = el("div", { class: "grid readonly", role: "img", "aria-label": overlayLabel(cells) });
  for (let row = GRID_SIDE; row >= 1; row--) {
    const line = el("div", { class: "grid-row" });
    for (let col = 1; col <= GRID_SIDE; col++) {
      const on = marked.has(`${row}:${col}`);
      line.append(el("span", { class: on ? "cell selected" : "cell" }, on ? "x" : ""));
    }
    grid.append(line);
  }
  return grid;
}

function overlayLabel(cells: readonly { row: number; col: number }[]): string {
  if (cells.length === 0) return "empty grid";
  const parts = cells.map((c) => `row ${c.row} column ${c.col}`);
  return `grid with ${parts.join(" and ")} marked`;
}

/**
 * Study chart: one 7-row staff per class, notes read left to right, plus
 * the digit spelling. Mirrors how the codewords sound: higher digit,
 * higher pitch.
 */
export function codewordChart(): HTMLElement {
  const chart = el("section", { class: "chart", "aria-label": "codeword chart" });
  chart.append(el("h3", {}, "Codeword chart"));
  for (const [name, digits] of CODEWORDS) {
    const staff = el("div", {
      class: "staff",
      role: "img",
      "aria-label": `${name}: notes ${digitsLabel(digits)}`,
    });
    for (let pitch = 7; pitch >= 1; pitch--) {
      const line = el("div", { class: "staff-row" });
      for (const digit of digits) {
        line.append(
          el("span", { class: digit === pitch ? "note on" : "note" },
            digit === pitch ? NOTE_NAMES[digit] ?? "?" : ""),
        );
      }
      staff.append(line);
    }
    chart.append(
      el(
        "div",
        { class: "chart-row" },
        el("span", { class: "chart-name" }, name),
        staff,
        el("span", { class: "chart-digits" }, digits.join(" ")),
      ),
    );
  }
  return chart;
}

/** Human-readable truth description for practice reveals. */
export function describeTruth(truth: Record<string, unknown>): string {
  if (typeof truth.class_name === "string") {
    const digits = CODEWORDS.get(truth.class_name);
    return digits === undefined
      ? `It was ${truth.class_name}.`
      : `It was ${truth.class_name}: notes ${digitsLabel(digits)}.`;
  }
  if (typeof truth.row === "number" && typeof truth.col === "number") {
    return `The object was at row ${truth.row}, column ${truth.col}.`;
  }
  if (Array.isArray(truth.classes)) {
    return `You heard: ${(truth.classes as string[]).join(", ")}.`;
  }
  return "";
}
