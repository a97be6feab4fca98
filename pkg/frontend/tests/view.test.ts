// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { FormState } from "../src/form-state.js";
import { TaskView } from "../src/view.js";
import { AnnotationTask, BINARY_DEPENDENT_FIELDS } from "../src/types.js";
import { makeSentences } from "./mock-server.js";

function taskFor(index: number, sentences = makeSentences(3)): AnnotationTask {
  return {
    sentence: sentences[index]!,
    predecessor: sentences[index - 1] ?? null,
    successor: sentences[index + 1] ?? null,
    categories: {},
    known_cues: ["if", "because"],
    remaining: 3,
  };
}

describe("TaskView", () => {
  let root: HTMLElement;
  let submitted: number;
  let view: TaskView;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    submitted = 0;
    view = new TaskView(root, {
      onSubmit: () => {
        submitted += 1;
      },
      onDefer: () => {},
      onAddCue: () => {},
    });
  });

  it("renders three context slots with the middle highlighted", () => {
    view.render(taskFor(1), new FormState("s1", "a1"));
    const slots = root.querySelectorAll(".context-slot");
    expect(slots.length).toBe(3);
    expect(slots[0]!.textContent).toContain("unit 0");
    expect(slots[1]!.className).toContain("current");
    expect(slots[2]!.textContent).toContain("unit 2");
  });

  it("document boundaries degrade to an em-dash placeholder", () => {
    view.render(taskFor(0), new FormState("s0", "a1"));
    const slots = root.querySelectorAll(".context-slot");
    expect(slots[0]!.textContent).toBe("—");
    view.render(taskFor(2), new FormState("s2", "a1"));
    const slots2 = root.querySelectorAll(".context-slot");
    expect(slots2[2]!.textContent).toBe("—");
  });

  it("dependent controls are disabled until causal is selected", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    const marked = root.querySelector<HTMLButtonElement>('[data-role="marked:true"]')!;
    expect(marked.disabled).toBe(true);
    root.querySelector<HTMLButtonElement>('[data-role="causal"]')!.click();
    const markedAfter = root.querySelector<HTMLButtonElement>('[data-role="marked:true"]')!;
    expect(markedAfter.disabled).toBe(false);
  });

  it("selecting not-causal clears dependent selections in the DOM", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    root.querySelector<HTMLButtonElement>('[data-role="causal"]')!.click();
    root.querySelector<HTMLButtonElement>('[data-role="marked:true"]')!.click();
    expect(
      root.querySelector('[data-role="marked:true"]')!.className,
    ).toContain("selected");
    root.querySelector<HTMLButtonElement>('[data-role="not-causal"]')!.click();
    const marked = root.querySelector<HTMLButtonElement>('[data-role="marked:true"]')!;
    expect(marked.className).not.toContain("selected");
    expect(marked.disabled).toBe(true);
  });

  it("submit stays disabled until the selection is complete", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    expect(root.querySelector<HTMLButtonElement>('[data-role="submit"]')!.disabled).toBe(
      true,
    );
    root.querySelector<HTMLButtonElement>('[data-role="causal"]')!.click();
    expect(root.querySelector<HTMLButtonElement>('[data-role="submit"]')!.disabled).toBe(
      true,
    );
    for (const field of BINARY_DEPENDENT_FIELDS) {
      root.querySelector<HTMLButtonElement>(`[data-role="${field}:true"]`)!.click();
    }
    const submit = root.querySelector<HTMLButtonElement>('[data-role="submit"]')!;
    expect(submit.disabled).toBe(false);
    submit.click();
    expect(submitted).toBe(1);
  });

  it("not-causal alone is submittable", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    root.querySelector<HTMLButtonElement>('[data-role="not-causal"]')!.click();
    expect(root.querySelector<HTMLButtonElement>('[data-role="submit"]')!.disabled).toBe(
      false,
    );
  });

  it("cue chips toggle selection when enabled", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    root.querySelector<HTMLButtonElement>('[data-role="causal"]')!.click();
    root.querySelector<HTMLButtonElement>('[data-role="cue:if"]')!.click();
    expect(state.getCues()).toEqual(["if"]);
    expect(root.querySelector('[data-role="cue:if"]')!.className).toContain("selected");
  });

  it("ternary selectors render as segmented controls", () => {
    const state = new FormState("s1", "a1");
    view.render(taskFor(1), state);
    const segments = root.querySelectorAll('[data-role^="relationship:"]');
    expect(segments.length).toBe(3);
  });
});
