/**
 * DOM rendering for the annotation screen.
 *
 * Layout: context strip (predecessor dimmed, current highlighted,
 * successor dimmed; "—" at document boundaries), causal toggle, the six
 * dependent toggles, segmented three-way selectors for relationship and
 * temporality, the cue picker (known phrases + free text), a progress
 * counter, and the submit/defer buttons. All controls funnel through
 * the FormState, so the view cannot bypass the dependent-field gating.
 */

import { FormState } from "./form-state.js";
import {
  AnnotationTask,
  ApiSentence,
  BINARY_DEPENDENT_FIELDS,
  RELATIONSHIP_VALUES,
  TEMPORALITY_VALUES,
} from "./types.js";

export interface ViewCallbacks {
  onSubmit: () => void;
  onDefer: () => void;
  onAddCue: (phrase: string) => void;
}

const EMPTY_SLOT = "—"; // em dash placeholder at document boundaries

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function contextSlot(doc: Document, sentence: ApiSentence | null, kind: string): HTMLElement {
  const slot = el(doc, "div", `context-slot ${kind}`);
  slot.textContent = sentence ? sentence.text : EMPTY_SLOT;
  return slot;
}

export class TaskView {
  private doc: Document;

  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: ViewCallbacks,
  ) {
    this.doc = root.ownerDocument;
  }

  render(task: AnnotationTask, state: FormState, statusText = ""): void {
    const doc = this.doc;
    this.root.textContent = "";

    const context = el(doc, "div", "context");
    context.append(
      contextSlot(doc, task.predecessor, "predecessor"),
      contextSlot(doc, task.sentence, "current"),
      contextSlot(doc, task.successor, "successor"),
    );
    this.root.append(context);

    const progress = el(
      doc,
      "div",
      "progress",
      `${task.remaining} sentence(s) remaining`,
    );
    this.root.append(progress);

    const causalRow = el(doc, "div", "causal-row");
    for (const [label, value, key] of [
      ["causal (c)", true, "causal"],
      ["not causal (n)", false, "not-causal"],
    ] as const) {
      const button = el(doc, "button", `causal-button ${key}`, label);
      button.dataset.role = key;
      if (state.getCausal() === value) button.classList.add("selected");
      button.addEventListener("click", () => {
        state.setCausal(value);
        this.render(task, state, statusText);
      });
      causalRow.append(button);
    }
    this.root.append(causalRow);

    const enabled = state.dependentsEnabled();
    const dependents = el(doc, "div", "dependents");
    if (!enabled) dependents.classList.add("disabled");
    for (const field of BINARY_DEPENDENT_FIELDS) {
      const row = el(doc, "div", "binary-row");
      row.append(el(doc, "span", "field-name", field.replace(/_/g, " ")));
      for (const value of [true, false]) {
        const button = el(doc, "button", "binary-button", value ? "yes" : "no");
        button.dataset.role = `${field}:${value}`;
        button.disabled = !enabled;
        if (state.getBinary(field) === value) button.classList.add("selected");
        button.addEventListener("click", () => {
          state.setBinary(field, value);
          this.render(task, state, statusText);
        });
        row.append(button);
      }
      dependents.append(row);
    }
    for (const [name, values, get, set] of [
      [
        "relationship",
        RELATIONSHIP_VALUES,
        () => state.getRelationship(),
        (v: string) => state.setRelationship(v as never),
      ],
      [
        "temporality",
        TEMPORALITY_VALUES,
        () => state.getTemporality(),
        (v: string) => state.setTemporality(v as never),
      ],
    ] as const) {
      const row = el(doc, "div", "ternary-row");
      row.append(el(doc, "span", "field-name", name));
      const segmented = el(doc, "div", "segmented");
      for (const value of values) {
        const button = el(doc, "button", "segment", value);
        button.dataset.role = `${name}:${value}`;
        button.disabled = !enabled;
        if (get() === value) button.classList.add("selected");
        button.addEventListener("click", () => {
          set(value);
          this.render(task, state, statusText);
        });
        segmented.append(button);
      }
      row.append(segmented);
      dependents.append(row);
    }

    const cueBox = el(doc, "div", "cue-box");
    cueBox.append(el(doc, "span", "field-name", "cue phrases"));
    const cueList = el(doc, "div", "cue-list");
    for (const phrase of task.known_cues) {
      const chip = el(doc, "button", "cue-chip", phrase);
      chip.dataset.role = `cue:${phrase}`;
      chip.disabled = !enabled;
      if (state.getCues().includes(phrase)) chip.classList.add("selected");
      chip.addEventListener("click", () => {
        state.toggleCue(phrase);
        this.render(task, state, statusText);
      });
      cueList.append(chip);
    }
    cueBox.append(cueList);
    const cueInput = el(doc, "input", "cue-input") as HTMLInputElement;
    cueInput.placeholder = "add a new cue phrase";
    cueInput.dataset.role = "cue-input";
    cueInput.disabled = !enabled;
    const cueAdd = el(doc, "button", "cue-add", "add");
    cueAdd.dataset.role = "cue-add";
    cueAdd.disabled = !enabled;
    cueAdd.addEventListener("click", () => {
      if (cueInput.value.trim()) this.callbacks.onAddCue(cueInput.value);
    });
    cueBox.append(cueInput, cueAdd);
    dependents.append(cueBox);
    this.root.append(dependents);

    const actions = el(doc, "div", "actions");
    const submit = el(doc, "button", "submit", "submit");
    submit.dataset.role = "submit";
    submit.disabled = !state.canSubmit();
    submit.addEventListener("click", () => this.callbacks.onSubmit());
    const defer = el(doc, "button", "defer", "defer");
    defer.dataset.role = "defer";
    defer.addEventListener("click", () => this.callbacks.onDefer());
    actions.append(submit, defer);
    if (!state.canSubmit()) {
      actions.append(el(doc, "span", "blockers", state.blockers().join("; ")));
    }
    this.root.append(actions);

    if (statusText) {
      this.root.append(el(doc, "div", "status", statusText));
    }
  }

  renderMessage(message: string): void {
    this.root.textContent = "";
    this.root.append(el(this.doc, "div", "message", message));
  }
}

/** Keyboard shortcuts: c = causal, n = not causal, Enter = submit. */
export function bindShortcuts(
  doc: Document,
  state: () => FormState | null,
  rerender: () => void,
  submit: () => void,
): void {
  doc.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "INPUT") return;
    const current = state();
    if (!current) return;
    if (event.key === "c") {
      current.setCausal(true);
      rerender();
    } else if (event.key === "n") {
      current.setCausal(false);
      rerender();
    } else if (event.key === "Enter" && current.canSubmit()) {
      submit();
    }
  });
}
