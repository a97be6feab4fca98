/** Shared types mirroring the /api/v1 wire formats. */

export interface ApiSentence {
  id: string;
  text: string;
  document_id: string;
  domain: string;
  position: number;
}

export type CategoryKind = "binary" | "ternary";

export interface CategorySchema {
  kind: CategoryKind;
  depends_on?: string;
  values?: string[];
}

export interface AnnotationTask {
  sentence: ApiSentence;
  predecessor: ApiSentence | null;
  successor: ApiSentence | null;
  categories: Record<string, CategorySchema>;
  known_cues: string[];
  remaining: number;
}

/** The six binary sub-categories gated on the causal flag. */
export const BINARY_DEPENDENT_FIELDS = [
  "explicit",
  "marked",
  "single_sentence",
  "single_cause",
  "single_effect",
  "event_chain",
] as const;

export type BinaryDependentField = (typeof BINARY_DEPENDENT_FIELDS)[number];

export const RELATIONSHIP_VALUES = ["cause", "enable", "prevent"] as const;
export const TEMPORALITY_VALUES = ["before", "overlap", "during"] as const;

export type Relationship = (typeof RELATIONSHIP_VALUES)[number];
export type Temporality = (typeof TEMPORALITY_VALUES)[number];

/** Label payload POSTed to /api/v1/labels. Dependent fields appear only
 * on causal payloads; the form state machine enforces that statically
 * and dynamically. */
export interface LabelPayload {
  sentence_id: string;
  annotator: string;
  causal: boolean;
  explicit?: boolean;
  marked?: boolean;
  single_sentence?: boolean;
  single_cause?: boolean;
  single_effect?: boolean;
  event_chain?: boolean;
  relationship?: Relationship;
  temporality?: Temporality;
  cue_phrases: string[];
}

export interface SubmitAck {
  status: "accepted" | "replaced";
}

export interface CueEntryView {
  phrase: string;
  canonical: string;
  syntactic_type: string;
  relationship_class: string | null;
}

export interface ProgressRow {
  assigned: number;
  labeled: number;
  remaining: number;
}
