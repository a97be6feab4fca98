"""Corpus model: label taxonomy, ingestion, stratification, balancing, folds.

A corpus is a collection of sentences plus per-annotator label records.
Every record is validated against the dependent-field rule: the six
binary sub-categories (explicit, marked, single_sentence, single_cause,
single_effect, event_chain) are present if and only if the sentence was
labeled causal. The two ternary categories (relationship, temporality)
may be absent on causal records because they are labeled in a separate
pass, but are never allowed on non-causal records.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

RELATIONSHIP_VALUES = ("cause", "enable", "prevent")
TEMPORALITY_VALUES = ("before", "overlap", "during")

#: Binary sub-categories that must be present exactly when causal=True.
BINARY_DEPENDENT_FIELDS = (
    "explicit",
    "marked",
    "single_sentence",
    "single_cause",
    "single_effect",
    "event_chain",
)

#: Ternary sub-categories, optional on causal records.
TERNARY_DEPENDENT_FIELDS = ("relationship", "temporality")

DEPENDENT_FIELDS = BINARY_DEPENDENT_FIELDS + TERNARY_DEPENDENT_FIELDS


class CorpusError(ValueError):
    """Raised when a corpus file or record violates the schema."""


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str
    document_id: str
    domain: str
    position: int

    def __post_init__(self) -> None:
        if not self.text:
            raise CorpusError(f"sentence {self.id!r}: empty text")
        if self.position < 0:
            raise CorpusError(f"sentence {self.id!r}: negative position")


@dataclass(frozen=True)
class CausalLabelRecord:
    sentence_id: str
    annotator: str
    causal: bool
    explicit: Optional[bool] = None
    marked: Optional[bool] = None
    single_sentence: Optional[bool] = None
    single_cause: Optional[bool] = None
    single_effect: Optional[bool] = None
    event_chain: Optional[bool] = None
    relationship: Optional[str] = None
    temporality: Optional[str] = None
    cue_phrases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in BINARY_DEPENDENT_FIELDS:
            value = getattr(self, name)
            if self.causal and value is None:
                raise CorpusError(
                    f"sentence {self.sentence_id!r}: causal record missing "
                    f"dependent field {name!r}"
                )
            if not self.causal and value is not None:
                raise CorpusError(
                    f"sentence {self.sentence_id!r}: dependent field {name!r} "
                    "on non-causal record"
                )
        for name in TERNARY_DEPENDENT_FIELDS:
            value = getattr(self, name)
            if not self.causal and value is not None:
                raise CorpusError(
                    f"sentence {self.sentence_id!r}: dependent field {name!r} "
                    "on non-causal record"
                )
        if self.relationship is not None and self.relationship not in RELATIONSHIP_VALUES:
            raise CorpusError(
                f"sentence {self.sentence_id!r}: relationship must be one of "
                f"{RELATIONSHIP_VALUES}, got {self.relationship!r}"
            )
        if self.temporality is not None and self.temporality not in TEMPORALITY_VALUES:
            raise CorpusError(
                f"sentence {self.sentence_id!r}: temporality must be one of "
                f"{TEMPORALITY_VALUES}, got {self.temporality!r}"
            )


@dataclass(frozen=True)
class DocumentMeta:
    id: str
    domain: str
    year: Optional[int] = None


@dataclass(frozen=True)
class FoldPlan:
    """A repeated k-fold partition of sentence ids, stratified by class."""

    k: int
    repetitions: int
    seed: int
    assignments: tuple[tuple[tuple[str, ...], ...], ...]

    def folds(self, repetition: int) -> tuple[tuple[str, ...], ...]:
        return self.assignments[repetition]


class LabeledCorpus:
    """Immutable sentence collection with label records and metadata."""

    def __init__(
        self,
        sentences: Iterable[Sentence],
        labels: Iterable[CausalLabelRecord],
        documents: Iterable[DocumentMeta] = (),
    ) -> None:
        self.sentences: tuple[Sentence, ...] = tuple(sentences)
        self.labels: tuple[CausalLabelRecord, ...] = tuple(labels)
        self._by_id: dict[str, Sentence] = {}
        for s in self.sentences:
            if s.id in self._by_id:
                raise CorpusError(f"duplicate sentence id {s.id!r}")
            self._by_id[s.id] = s
        positions: set[tuple[str, int]] = set()
        for s in self.sentences:
            key = (s.document_id, s.position)
            if key in positions:
                raise CorpusError(
                    f"duplicate position {s.position} in document {s.document_id!r}"
                )
            positions.add(key)
        self._labels_by_sentence: dict[str, list[CausalLabelRecord]] = {}
        seen: set[tuple[str, str]] = set()
        for rec in self.labels:
            if rec.sentence_id not in self._by_id:
                raise CorpusError(f"label references unknown sentence {rec.sentence_id!r}")
            key = (rec.sentence_id, rec.annotator)
            if key in seen:
                raise CorpusError(
                    f"duplicate label for sentence {rec.sentence_id!r} "
                    f"by annotator {rec.annotator!r}"
                )
            seen.add(key)
            self._labels_by_sentence.setdefault(rec.sentence_id, []).append(rec)
        if documents:
            self.documents: tuple[DocumentMeta, ...] = tuple(documents)
        else:
            by_doc: dict[str, str] = {}
            for s in self.sentences:
                by_doc.setdefault(s.document_id, s.domain)
            self.documents = tuple(
                DocumentMeta(id=d, domain=dom) for d, dom in sorted(by_doc.items())
            )

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def sentence(self, sentence_id: str) -> Sentence:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise KeyError(f"unknown sentence id {sentence_id!r}") from None

    def has_sentence(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id

    def labels_for(self, sentence_id: str) -> tuple[CausalLabelRecord, ...]:
        return tuple(self._labels_by_sentence.get(sentence_id, ()))

    def gold_label(self, sentence_id: str) -> Optional[CausalLabelRecord]:
        """The primary label of a sentence: its first record in file order."""
        recs = self._labels_by_sentence.get(sentence_id)
        return recs[0] if recs else None

    def gold_causal(self) -> dict[str, bool]:
        """Map of sentence id to the primary causal flag (labeled sentences only)."""
        out = {}
        for s in self.sentences:
            rec = self.gold_label(s.id)
            if rec is not None:
                out[s.id] = rec.causal
        return out

    def domains(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for s in self.sentences:
            seen.setdefault(s.domain, None)
        return tuple(seen)

    def subset(self, sentence_ids: Iterable[str]) -> "LabeledCorpus":
        """A new corpus restricted to the given ids, preserving order."""
        keep = set(sentence_ids)
        sentences = [s for s in self.sentences if s.id in keep]
        labels = [r for r in self.labels if r.sentence_id in keep]
        docs = {s.document_id for s in sentences}
        return LabeledCorpus(
            sentences, labels, [d for d in self.documents if d.id in docs]
        )

    def neighbors(
        self, sentence_id: str
    ) -> tuple[Optional[Sentence], Optional[Sentence]]:
        """Predecessor and successor in the same document, if any."""
        s = self.sentence(sentence_id)
        pred = succ = None
        for other in self.sentences:
            if other.document_id != s.document_id:
                continue
            if other.position == s.position - 1:
                pred = other
            elif other.position == s.position + 1:
                succ = other
        return pred, succ


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

_LABEL_KEYS = {
    "annotator",
    "causal",
    "explicit",
    "marked",
    "single_sentence",
    "single_cause",
    "single_effect",
    "event_chain",
    "relationship",
    "temporality",
    "cue_phrases",
}


def _record_from_dict(sentence_id: str, obj: dict, where: str) -> CausalLabelRecord:
    unknown = set(obj) - _LABEL_KEYS
    if unknown:
        raise CorpusError(f"{where}: unknown label fields {sorted(unknown)}")
    if "annotator" not in obj or "causal" not in obj:
        raise CorpusError(f"{where}: label requires 'annotator' and 'causal'")
    try:
        return CausalLabelRecord(
            sentence_id=sentence_id,
            annotator=str(obj["annotator"]),
            causal=bool(obj["causal"]),
            explicit=obj.get("explicit"),
            marked=obj.get("marked"),
            single_sentence=obj.get("single_sentence"),
            single_cause=obj.get("single_cause"),
            single_effect=obj.get("single_effect"),
            event_chain=obj.get("event_chain"),
            relationship=obj.get("relationship"),
            temporality=obj.get("temporality"),
            cue_phrases=tuple(obj.get("cue_phrases") or ()),
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def _sentence_from_dict(obj: dict, where: str) -> Sentence:
    for key in ("id", "text", "document_id", "domain", "position"):
        if key not in obj:
            raise CorpusError(f"{where}: missing field {key!r}")
    try:
        return Sentence(
            id=str(obj["id"]),
            text=str(obj["text"]),
            document_id=str(obj["document_id"]),
            domain=str(obj["domain"]),
            position=int(obj["position"]),
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def load_corpus(path: str, format: str = "jsonl") -> LabeledCorpus:
    """Load a corpus from JSONL (one object per sentence) or CSV.

    JSONL schema per line:
        {"id","text","document_id","domain","position",
         "labels":[{annotator, causal, explicit?, ..., cue_phrases:[...]}]}

    The CSV form mirrors these columns, one row per (sentence, label);
    cue phrases are '|'-separated. Violations are reported with the
    offending line number.
    """
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise CorpusError(f"unknown corpus format {format!r}")


def _load_jsonl(path: str) -> LabeledCorpus:
    sentences: list[Sentence] = []
    labels: list[CausalLabelRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{where}: expected a JSON object")
            sent = _sentence_from_dict(obj, where)
            sentences.append(sent)
            for lab in obj.get("labels", ()):
                labels.append(_record_from_dict(sent.id, lab, where))
    return LabeledCorpus(sentences, labels)


def _parse_opt_bool(raw: str, where: str, column: str) -> Optional[bool]:
    if raw is None or raw == "":
        return None
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise CorpusError(f"{where}: column {column!r} is not a boolean: {raw!r}")


def _load_csv(path: str) -> LabeledCorpus:
    sentences: dict[str, Sentence] = {}
    order: list[str] = []
    labels: list[CausalLabelRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            sent = _sentence_from_dict(row, where)
            if sent.id not in sentences:
                sentences[sent.id] = sent
                order.append(sent.id)
            elif sentences[sent.id] != sent:
                raise CorpusError(f"{where}: conflicting duplicate of sentence {sent.id!r}")
            if not row.get("annotator"):
                continue
            obj: dict = {"annotator": row["annotator"]}
            causal = _parse_opt_bool(row.get("causal"), where, "causal")
            if causal is None:
                raise CorpusError(f"{where}: column 'causal' is required with a label")
            obj["causal"] = causal
            for name in BINARY_DEPENDENT_FIELDS:
                obj[name] = _parse_opt_bool(row.get(name), where, name)
            for name in TERNARY_DEPENDENT_FIELDS:
                obj[name] = row.get(name) or None
            raw_cues = row.get("cue_phrases") or ""
            obj["cue_phrases"] = [c for c in raw_cues.split("|") if c]
            labels.append(_record_from_dict(sent.id, obj, where))
    return LabeledCorpus((sentences[i] for i in order), labels)


# ---------------------------------------------------------------------------
# Stratification, balancing, folds
# ---------------------------------------------------------------------------


def stratify(corpus: LabeledCorpus, min_count: int) -> dict[str, LabeledCorpus]:
    """Per-domain sub-corpora, keeping only domains with >= min_count sentences."""
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    by_domain: dict[str, list[str]] = {}
    for s in corpus.sentences:
        by_domain.setdefault(s.domain, []).append(s.id)
    return {
        domain: corpus.subset(ids)
        for domain, ids in by_domain.items()
        if len(ids) >= min_count
    }


def random_undersample(corpus: LabeledCorpus, seed: int) -> LabeledCorpus:
    """Balance classes by randomly discarding majority-class sentences.

    Classes are the primary causal flags. The minority class is kept in
    full; the majority class is sampled without replacement down to the
    minority size. Deterministic for a fixed seed.
    """
    gold = corpus.gold_causal()
    pos = [sid for sid, causal in gold.items() if causal]
    neg = [sid for sid, causal in gold.items() if not causal]
    if not pos or not neg:
        raise ValueError("undersampling requires both classes to be present")
    rng = np.random.default_rng(seed)
    if len(pos) > len(neg):
        keep_majority = rng.choice(len(pos), size=len(neg), replace=False)
        kept = set(neg) | {pos[i] for i in keep_majority}
    elif len(neg) > len(pos):
        keep_majority = rng.choice(len(neg), size=len(pos), replace=False)
        kept = set(pos) | {neg[i] for i in keep_majority}
    else:
        kept = set(pos) | set(neg)
    return corpus.subset(kept)


def split_kfold(
    corpus: LabeledCorpus, k: int, repetitions: int, seed: int
) -> FoldPlan:
    """Repeated stratified k-fold split of the corpus sentence ids.

    Folds are stratified by the primary causal flag. Classes are dealt
    round-robin with a rotating starting fold so that overall fold sizes
    also stay within one of each other.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    gold = corpus.gold_causal()
    ids = [s.id for s in corpus.sentences if s.id in gold]
    if len(ids) < k:
        raise ValueError(f"k={k} exceeds corpus size {len(ids)}")
    rng = np.random.default_rng(seed)
    assignments = []
    for _ in range(repetitions):
        folds: list[list[str]] = [[] for _ in range(k)]
        offset = 0
        for cls in (True, False):
            members = [sid for sid in ids if gold[sid] is cls]
            perm = rng.permutation(len(members))
            for j, idx in enumerate(perm):
                folds[(offset + j) % k].append(members[idx])
            offset += len(members)
        assignments.append(tuple(tuple(f) for f in folds))
    return FoldPlan(k=k, repetitions=repetitions, seed=seed, assignments=tuple(assignments))
