/**
 * Application wiring: fetch task -> render -> submit -> advance.
 *
 * Optimistic advance: a submission that the server acknowledges (or that
 * the offline queue parked) moves to the next task; a server rejection
 * keeps the current selection on screen with the rejection text
 * verbatim. The queue flushes on the browser's online event.
 */

import { ApiClient, ExhaustedError } from "./api.js";
import { FormState } from "./form-state.js";
import { OfflineQueue } from "./queue.js";
import { AnnotationTask } from "./types.js";
import { TaskView, bindShortcuts } from "./view.js";

export class AnnotatorApp {
  private state: FormState | null = null;
  private task: AnnotationTask | null = null;
  private view: TaskView;
  private queue: OfflineQueue;

  constructor(
    private readonly client: ApiClient,
    private readonly annotator: string,
    root: HTMLElement,
  ) {
    this.queue = new OfflineQueue(client);
    this.view = new TaskView(root, {
      onSubmit: () => void this.submitAndAdvance(),
      onDefer: () => void this.defer(),
      onAddCue: (phrase) => void this.addCue(phrase),
    });
  }

  currentState(): FormState | null {
    return this.state;
  }

  async start(): Promise<void> {
    bindShortcuts(
      document,
      () => this.state,
      () => this.rerender(),
      () => void this.submitAndAdvance(),
    );
    window.addEventListener("online", () => void this.flushQueue());
    await this.advance();
  }

  private rerender(statusText = ""): void {
    if (this.task && this.state) {
      this.view.render(this.task, this.state, statusText);
    }
  }

  async advance(): Promise<void> {
    try {
      this.task = await this.client.nextTask(this.annotator);
      this.state = new FormState(this.task.sentence.id, this.annotator);
      this.rerender();
    } catch (error) {
      if (error instanceof ExhaustedError) {
        this.view.renderMessage("All assigned sentences are labeled. Thank you!");
        this.task = null;
        this.state = null;
        return;
      }
      this.view.renderMessage(`Could not load the next task: ${String(error)}`);
    }
  }

  async submitAndAdvance(): Promise<void> {
    if (!this.state || !this.state.canSubmit()) return;
    const outcome = await this.queue.submit(this.state.buildPayload());
    if (outcome.kind === "rejected") {
      // selection stays on screen for correction
      this.rerender(`rejected by server: ${outcome.detail}`);
      return;
    }
    if (outcome.kind === "queued") {
      this.rerender(`offline: queued (${outcome.pending} pending)`);
    }
    await this.advance();
  }

  async defer(): Promise<void> {
    if (!this.task) return;
    try {
      await this.client.defer(this.task.sentence.id, this.annotator);
    } catch {
      // defer is best-effort; advancing is what the annotator asked for
    }
    await this.advance();
  }

  async addCue(phrase: string): Promise<void> {
    try {
      const added = await this.client.addCue(phrase);
      if (this.task && added) {
        this.task.known_cues.push(phrase.trim().toLowerCase().replace(/\s+/g, " "));
      }
      this.state?.toggleCue(phrase);
      this.rerender(added ? `added cue "${phrase}"` : `cue already known`);
    } catch (error) {
      this.rerender(`could not add cue: ${String(error)}`);
    }
  }

  async flushQueue(): Promise<void> {
    const { delivered, rejected } = await this.queue.flush();
    if (delivered || rejected.length) {
      this.rerender(
        `reconnected: delivered ${delivered}, rejected ${rejected.length}`,
      );
    }
  }
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const annotator = params.get("annotator") ?? "a1";
  const base = params.get("api") ?? "";
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new AnnotatorApp(new ApiClient(base), annotator, root);
  void app.start();
}

declare global {
  interface Window {
    __CAUSALREQ_TEST__?: boolean;
  }
}

if (typeof window !== "undefined" && !window.__CAUSALREQ_TEST__) {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", bootstrap);
  } else {
    bootstrap();
  }
}
