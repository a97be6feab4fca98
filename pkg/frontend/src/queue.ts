/**
 * Offline submission queue.
 *
 * Network failures (fetch TypeError) park the payload locally and keep
 * order; flush() retries in order on reconnect. Server-side rejections
 * are NOT queued: the label is wrong, not the connection, so the caller
 * keeps the selection on screen for correction.
 */

import { ApiClient, ApiError } from "./api.js";
import { LabelPayload, SubmitAck } from "./types.js";

export type SubmitOutcome =
  | { kind: "accepted"; ack: SubmitAck }
  | { kind: "queued"; pending: number }
  | { kind: "rejected"; detail: string };

export class OfflineQueue {
  private pending: LabelPayload[] = [];

  constructor(private readonly client: ApiClient) {}

  get size(): number {
    return this.pending.length;
  }

  snapshot(): readonly LabelPayload[] {
    return [...this.pending];
  }

  /** Submit now, or queue on network failure. */
  async submit(payload: LabelPayload): Promise<SubmitOutcome> {
    try {
      const ack = await this.client.submitLabel(payload);
      return { kind: "accepted", ack };
    } catch (error) {
      if (error instanceof ApiError) {
        return { kind: "rejected", detail: error.detail };
      }
      this.pending.push(payload);
      return { kind: "queued", pending: this.pending.length };
    }
  }

  /**
   * Retry queued submissions in order. Stops at the first network
   * failure (still offline); server rejections are dropped from the
   * queue and reported.
   */
  async flush(): Promise<{ delivered: number; rejected: string[] }> {
    let delivered = 0;
    const rejected: string[] = [];
    while (this.pending.length > 0) {
      const payload = this.pending[0] as LabelPayload;
      try {
        await this.client.submitLabel(payload);
        this.pending.shift();
        delivered += 1;
      } catch (error) {
        if (error instanceof ApiError) {
          this.pending.shift();
          rejected.push(error.detail);
          continue;
        }
        break;
      }
    }
    return { delivered, rejected };
  }
}
