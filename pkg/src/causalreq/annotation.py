"""Annotation task assignment: unique quotas plus pairwise overlap batches.

Every annotator receives a personal batch of unique sentences plus, for
every other annotator, a shared overlap batch, so that agreement can be
assessed between every pair. Assignment order follows document order
unless randomization is requested.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import LabeledCorpus, Sentence
from .store import LabelStore

#: Category schema served to annotation clients.
CATEGORY_SCHEMA = {
    "causal": {"kind": "binary"},
    "explicit": {"kind": "binary", "depends_on": "causal"},
    "marked": {"kind": "binary", "depends_on": "causal"},
    "single_sentence": {"kind": "binary", "depends_on": "causal"},
    "single_cause": {"kind": "binary", "depends_on": "causal"},
    "single_effect": {"kind": "binary", "depends_on": "causal"},
    "event_chain": {"kind": "binary", "depends_on": "causal"},
    "relationship": {
        "kind": "ternary",
        "depends_on": "causal",
        "values": ["cause", "enable", "prevent"],
    },
    "temporality": {
        "kind": "ternary",
        "depends_on": "causal",
        "values": ["before", "overlap", "during"],
    },
}


class AssignmentError(ValueError):
    """Raised on unknown annotators or exhausted assignments."""


@dataclass(frozen=True)
class AnnotationTask:
    sentence: Sentence
    predecessor: Optional[Sentence]
    successor: Optional[Sentence]
    categories: dict
    known_cues: tuple[str, ...]
    remaining: int

    def to_dict(self) -> dict:
        def sent(s: Optional[Sentence]) -> Optional[dict]:
            if s is None:
                return None
            return {
                "id": s.id,
                "text": s.text,
                "document_id": s.document_id,
                "domain": s.domain,
                "position": s.position,
            }

        return {
            "sentence": sent(self.sentence),
            "predecessor": sent(self.predecessor),
            "successor": sent(self.successor),
            "categories": self.categories,
            "known_cues": list(self.known_cues),
            "remaining": self.remaining,
        }


class AssignmentPlan:
    """Deterministic sentence assignment for a set of annotators."""

    def __init__(
        self,
        corpus: LabeledCorpus,
        annotators: Sequence[str],
        unique_per_annotator: int,
        overlap_per_pair: int,
        seed: int = 0,
        randomize: bool = False,
    ) -> None:
        if len(annotators) < 1:
            raise AssignmentError("at least one annotator is required")
        if len(set(annotators)) != len(annotators):
            raise AssignmentError("annotator identifiers must be unique")
        self.corpus = corpus
        self.annotators = tuple(annotators)
        ids = [s.id for s in corpus.sentences]
        if randomize:
            rng = np.random.default_rng(seed)
            ids = [ids[i] for i in rng.permutation(len(ids))]
        pairs = list(itertools.combinations(self.annotators, 2))
        need = overlap_per_pair * len(pairs) + unique_per_annotator * len(self.annotators)
        if need > len(ids):
            raise AssignmentError(
                f"plan needs {need} sentences but the corpus has {len(ids)}"
            )
        cursor = 0
        assignment: dict[str, list[str]] = {a: [] for a in self.annotators}
        for a, b in pairs:
            batch = ids[cursor : cursor + overlap_per_pair]
            cursor += overlap_per_pair
            assignment[a].extend(batch)
            assignment[b].extend(batch)
        for annotator in self.annotators:
            batch = ids[cursor : cursor + unique_per_annotator]
            cursor += unique_per_annotator
            assignment[annotator].extend(batch)
        self._assignment = {a: tuple(v) for a, v in assignment.items()}

    def assigned_to(self, annotator: str) -> tuple[str, ...]:
        try:
            return self._assignment[annotator]
        except KeyError:
            raise AssignmentError(f"unknown annotator {annotator!r}") from None

    def next_task(
        self,
        annotator: str,
        store: LabelStore,
        known_cues: Sequence[str] = (),
        include_deferred: bool = True,
    ) -> AnnotationTask:
        """The next unlabeled assigned sentence, with document context.

        Deferred sentences are visited again only after everything else;
        a sentence already labeled by this annotator is never served
        unless the client asks for it explicitly via relabeling.
        """
        assigned = self.assigned_to(annotator)
        labeled = store.labeled_by(annotator)
        deferred = store.deferred_by(annotator)
        pending = [sid for sid in assigned if sid not in labeled and sid not in deferred]
        if not pending and include_deferred:
            pending = [sid for sid in assigned if sid not in labeled]
        if not pending:
            raise AssignmentError(f"assignment exhausted for {annotator!r}")
        sid = pending[0]
        sentence = self.corpus.sentence(sid)
        predecessor, successor = self.corpus.neighbors(sid)
        remaining = sum(1 for x in assigned if x not in labeled)
        return AnnotationTask(
            sentence=sentence,
            predecessor=predecessor,
            successor=successor,
            categories=CATEGORY_SCHEMA,
            known_cues=tuple(known_cues),
            remaining=remaining,
        )

    def progress(self, store: LabelStore) -> dict[str, dict[str, int]]:
        out = {}
        for annotator in self.annotators:
            assigned = self.assigned_to(annotator)
            labeled = store.labeled_by(annotator)
            done = sum(1 for sid in assigned if sid in labeled)
            out[annotator] = {
                "assigned": len(assigned),
                "labeled": done,
                "remaining": len(assigned) - done,
            }
        return out
