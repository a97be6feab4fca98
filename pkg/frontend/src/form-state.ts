/**
 * Form state for one annotation task.
 *
 * The state machine owns the dependent-field rule: the six binary
 * sub-categories (and the two ternary selectors and the cue picker) are
 * writable only while the sentence is marked causal, and flipping to
 * not-causal clears them all. buildPayload() therefore cannot emit a
 * payload carrying a dependent field on a non-causal label, and
 * submission stays blocked until the selection is complete.
 */

import {
  BINARY_DEPENDENT_FIELDS,
  BinaryDependentField,
  LabelPayload,
  Relationship,
  RELATIONSHIP_VALUES,
  Temporality,
  TEMPORALITY_VALUES,
} from "./types.js";

export class FormState {
  private causal: boolean | null = null;
  private binary: Map<BinaryDependentField, boolean> = new Map();
  private relationship: Relationship | null = null;
  private temporality: Temporality | null = null;
  private cues: string[] = [];

  constructor(
    readonly sentenceId: string,
    readonly annotator: string,
  ) {}

  getCausal(): boolean | null {
    return this.causal;
  }

  /** Dependent controls stay disabled until the sentence is marked causal. */
  dependentsEnabled(): boolean {
    return this.causal === true;
  }

  setCausal(value: boolean): void {
    this.causal = value;
    if (!value) {
      this.binary.clear();
      this.relationship = null;
      this.temporality = null;
      this.cues = [];
    }
  }

  getBinary(field: BinaryDependentField): boolean | null {
    return this.binary.has(field) ? (this.binary.get(field) as boolean) : null;
  }

  setBinary(field: BinaryDependentField, value: boolean): boolean {
    if (!this.dependentsEnabled()) return false;
    this.binary.set(field, value);
    return true;
  }

  getRelationship(): Relationship | null {
    return this.relationship;
  }

  setRelationship(value: Relationship | null): boolean {
    if (!this.dependentsEnabled()) return false;
    if (value !== null && !RELATIONSHIP_VALUES.includes(value)) return false;
    this.relationship = value;
    return true;
  }

  getTemporality(): Temporality | null {
    return this.temporality;
  }

  setTemporality(value: Temporality | null): boolean {
    if (!this.dependentsEnabled()) return false;
    if (value !== null && !TEMPORALITY_VALUES.includes(value)) return false;
    this.temporality = value;
    return true;
  }

  getCues(): readonly string[] {
    return this.cues;
  }

  toggleCue(phrase: string): boolean {
    if (!this.dependentsEnabled()) return false;
    const cleaned = phrase.trim().toLowerCase().replace(/\s+/g, " ");
    if (!cleaned) return false;
    const index = this.cues.indexOf(cleaned);
    if (index >= 0) {
      this.cues.splice(index, 1);
    } else {
      this.cues.push(cleaned);
    }
    return true;
  }

  /**
   * Submission gate: a decision must exist, and a causal decision needs
   * every binary sub-category answered. The ternary selectors may stay
   * unset (they are labeled in a separate pass server-side).
   */
  canSubmit(): boolean {
    if (this.causal === null) return false;
    if (this.causal === false) return true;
    return BINARY_DEPENDENT_FIELDS.every((field) => this.binary.has(field));
  }

  /** Human-readable reasons submission is still blocked. */
  blockers(): string[] {
    const out: string[] = [];
    if (this.causal === null) {
      out.push("decide causal / not causal");
      return out;
    }
    if (this.causal) {
      for (const field of BINARY_DEPENDENT_FIELDS) {
        if (!this.binary.has(field)) out.push(`set ${field.replace(/_/g, " ")}`);
      }
    }
    return out;
  }

  /** The invariant-safe wire payload; throws while submission is blocked. */
  buildPayload(): LabelPayload {
    if (!this.canSubmit()) {
      throw new Error(`selection incomplete: ${this.blockers().join(", ")}`);
    }
    if (this.causal === false) {
      return {
        sentence_id: this.sentenceId,
        annotator: this.annotator,
        causal: false,
        cue_phrases: [],
      };
    }
    const payload: LabelPayload = {
      sentence_id: this.sentenceId,
      annotator: this.annotator,
      causal: true,
      cue_phrases: [...this.cues],
    };
    for (const field of BINARY_DEPENDENT_FIELDS) {
      payload[field] = this.binary.get(field) as boolean;
    }
    if (this.relationship !== null) payload.relationship = this.relationship;
    if (this.temporality !== null) payload.temporality = this.temporality;
    return payload;
  }
}

/** Standalone invariant check used by tests and the submission path. */
export function payloadRespectsInvariant(payload: LabelPayload): boolean {
  const dependents: (keyof LabelPayload)[] = [
    ...BINARY_DEPENDENT_FIELDS,
    "relationship",
    "temporality",
  ];
  if (payload.causal) {
    return BINARY_DEPENDENT_FIELDS.every((f) => typeof payload[f] === "boolean");
  }
  return dependents.every((f) => payload[f] === undefined);
}
