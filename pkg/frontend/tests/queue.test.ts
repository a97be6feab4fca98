import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { OfflineQueue } from "../src/queue.js";
import { FormState } from "../src/form-state.js";
import { LabelPayload } from "../src/types.js";
import { MockServer, makeSentences } from "./mock-server.js";

function notCausal(sentenceId: string): LabelPayload {
  const state = new FormState(sentenceId, "a1");
  state.setCausal(false);
  return state.buildPayload();
}

describe("OfflineQueue", () => {
  it("delivers immediately when online", async () => {
    const server = new MockServer(makeSentences(2));
    const queue = new OfflineQueue(new ApiClient("", server.fetch));
    const outcome = await queue.submit(notCausal("s0"));
    expect(outcome.kind).toBe("accepted");
    expect(queue.size).toBe(0);
  });

  it("queues on network failure and flushes on reconnect in order", async () => {
    const server = new MockServer(makeSentences(3));
    const queue = new OfflineQueue(new ApiClient("", server.fetch));
    server.offline = true;
    expect((await queue.submit(notCausal("s0"))).kind).toBe("queued");
    expect((await queue.submit(notCausal("s1"))).kind).toBe("queued");
    expect(queue.size).toBe(2);
    expect(server.labels.size).toBe(0);

    server.offline = false;
    const result = await queue.flush();
    expect(result.delivered).toBe(2);
    expect(result.rejected).toEqual([]);
    expect(queue.size).toBe(0);
    expect(server.labels.size).toBe(2);
  });

  it("does not queue server-side rejections", async () => {
    const server = new MockServer(makeSentences(1));
    const queue = new OfflineQueue(new ApiClient("", server.fetch));
    const invalid = {
      ...notCausal("s0"),
      marked: true,
    } as LabelPayload;
    const outcome = await queue.submit(invalid);
    expect(outcome.kind).toBe("rejected");
    expect(queue.size).toBe(0);
  });

  it("stops flushing when still offline", async () => {
    const server = new MockServer(makeSentences(2));
    const queue = new OfflineQueue(new ApiClient("", server.fetch));
    server.offline = true;
    await queue.submit(notCausal("s0"));
    const result = await queue.flush();
    expect(result.delivered).toBe(0);
    expect(queue.size).toBe(1);
  });
});
