"""Synthetic corpus generators.

Three generators cover the testing and demonstration needs:

* a corpus matching published per-domain label-count profiles (category
  marginals are reproduced exactly, joints are randomized);
* a doubly-annotated corpus matching per-category confusion matrices;
* detection-harness corpora with planted cue-correlated labels or with
  a non-cue lexical signal.

Count profiles list the two-sentence column under ``two_sentence``; it
is stored inverted (as ``single_sentence``) because the published table
counts the opposite polarity of what the label name says. A warning is
logged when that mapping fires.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import CausalLabelRecord, LabeledCorpus, Sentence
from .lexicon import CueLexicon, default_lexicon, match_cues

log = logging.getLogger(__name__)

#: Words that never collide with the default lexicon (verified by test).
SAFE_WORDS = (
    "system",
    "database",
    "module",
    "sensor",
    "interface",
    "operator",
    "record",
    "display",
    "panel",
    "signal",
    "network",
    "server",
    "archive",
    "console",
    "monitor",
    "report",
    "schedule",
    "component",
    "configuration",
    "terminal",
)


@dataclass(frozen=True)
class DomainCountProfile:
    """Per-domain label counts used to synthesize a corpus.

    ``sentences`` is the domain's sentence total and ``causal`` the
    causal share; the remaining fields give the count of causal
    sentences with value 1 (or the ternary split) in each category.
    """

    domain: str
    sentences: int
    causal: int
    explicit: int = 0
    marked: int = 0
    single_cause: int = 0
    single_effect: int = 0
    event_chain: int = 0
    two_sentence: int = 0
    temporality: tuple[int, int, int] = (0, 0, 0)  # before, overlap, during
    relationship: tuple[int, int, int] = (0, 0, 0)  # cause, enable, prevent


def _assign_binary(rng: np.random.Generator, n: int, ones: int) -> np.ndarray:
    values = np.zeros(n, dtype=bool)
    values[:ones] = True
    rng.shuffle(values)
    return values


def _assign_ternary(
    rng: np.random.Generator, n: int, counts: Sequence[int], values: Sequence[str]
) -> list[Optional[str]]:
    assigned: list[Optional[str]] = []
    for value, count in zip(values, counts):
        assigned.extend([value] * count)
    if len(assigned) > n:
        raise ValueError(f"ternary counts {counts} exceed causal count {n}")
    assigned.extend([None] * (n - len(assigned)))
    rng.shuffle(assigned)
    return assigned


def corpus_from_profiles(
    profiles: Sequence[DomainCountProfile],
    seed: int = 0,
    annotator: str = "a1",
) -> LabeledCorpus:
    """Synthesize a labeled corpus reproducing the per-domain marginals.

    Each domain becomes one document of placeholder sentences; category
    values are shuffled independently per category, so joint
    distributions carry no signal.
    """
    rng = np.random.default_rng(seed)
    sentences: list[Sentence] = []
    labels: list[CausalLabelRecord] = []
    for profile in profiles:
        if profile.causal > profile.sentences:
            raise ValueError(f"{profile.domain}: causal exceeds sentence count")
        doc = f"doc-{profile.domain.lower().replace(' ', '-')}"
        causal_flags = _assign_binary(rng, profile.sentences, profile.causal)
        n_causal = profile.causal
        explicit = _assign_binary(rng, n_causal, profile.explicit)
        marked = _assign_binary(rng, n_causal, profile.marked)
        single_cause = _assign_binary(rng, n_causal, profile.single_cause)
        single_effect = _assign_binary(rng, n_causal, profile.single_effect)
        event_chain = _assign_binary(rng, n_causal, profile.event_chain)
        if profile.two_sentence:
            log.warning(
                "%s: mapping the two-sentence count (%d) onto single_sentence "
                "with inverted polarity",
                profile.domain,
                profile.two_sentence,
            )
        two_sentence = _assign_binary(rng, n_causal, profile.two_sentence)
        temporality = _assign_ternary(
            rng, n_causal, profile.temporality, ("before", "overlap", "during")
        )
        relationship = _assign_ternary(
            rng, n_causal, profile.relationship, ("cause", "enable", "prevent")
        )
        causal_idx = 0
        for position, causal in enumerate(causal_flags):
            sid = f"{doc}-{position:05d}"
            sentences.append(
                Sentence(
                    id=sid,
                    text=f"Placeholder requirement {position} of {profile.domain}.",
                    document_id=doc,
                    domain=profile.domain,
                    position=position,
                )
            )
            if not causal:
                labels.append(
                    CausalLabelRecord(sentence_id=sid, annotator=annotator, causal=False)
                )
                continue
            i = causal_idx
            causal_idx += 1
            labels.append(
                CausalLabelRecord(
                    sentence_id=sid,
                    annotator=annotator,
                    causal=True,
                    explicit=bool(explicit[i]),
                    marked=bool(marked[i]),
                    single_sentence=not bool(two_sentence[i]),
                    single_cause=bool(single_cause[i]),
                    single_effect=bool(single_effect[i]),
                    event_chain=bool(event_chain[i]),
                    temporality=temporality[i],
                    relationship=relationship[i],
                )
            )
    return LabeledCorpus(sentences, labels)


# ---------------------------------------------------------------------------
# Doubly-annotated corpus from confusion matrices
# ---------------------------------------------------------------------------


def overlap_corpus_from_matrices(
    causal_matrix: Sequence[Sequence[int]],
    dependent_matrices: dict[str, Sequence[Sequence[int]]],
    seed: int = 0,
    annotators: tuple[str, str] = ("a1", "a2"),
) -> LabeledCorpus:
    """Build a two-annotator corpus whose per-category confusion matrices
    reproduce the given 2x2 counts.

    The causal matrix governs the joint causal decisions; dependent
    matrices fill the sentences both raters marked causal (their total
    must equal the causal matrix's (1, 1) cell). Dependent values on
    singly-causal sentences are arbitrary and excluded from agreement.
    """
    rng = np.random.default_rng(seed)
    (c00, c01), (c10, c11) = [tuple(r) for r in causal_matrix]
    joint = [(0, 0)] * c00 + [(0, 1)] * c01 + [(1, 0)] * c10 + [(1, 1)] * c11
    rng.shuffle(joint)
    dependent_values: dict[str, list[tuple[int, int]]] = {}
    for name, matrix in dependent_matrices.items():
        (d00, d01), (d10, d11) = [tuple(r) for r in matrix]
        if d00 + d01 + d10 + d11 != c11:
            raise ValueError(
                f"{name}: dependent matrix total must equal the agreed-causal count {c11}"
            )
        cells = [(0, 0)] * d00 + [(0, 1)] * d01 + [(1, 0)] * d10 + [(1, 1)] * d11
        rng.shuffle(cells)
        dependent_values[name] = cells
    sentences = []
    labels = []
    both_causal_seen = 0
    for position, (a_causal, b_causal) in enumerate(joint):
        sid = f"overlap-{position:05d}"
        sentences.append(
            Sentence(
                id=sid,
                text=f"Overlap sentence {position}.",
                document_id="doc-overlap",
                domain="Overlap",
                position=position,
            )
        )
        for rater, causal in zip(annotators, (a_causal, b_causal)):
            if not causal:
                labels.append(
                    CausalLabelRecord(sentence_id=sid, annotator=rater, causal=False)
                )
                continue
            values = {}
            for name in dependent_matrices:
                if a_causal and b_causal:
                    pair = dependent_values[name][both_causal_seen]
                    values[name] = bool(pair[0] if rater == annotators[0] else pair[1])
                else:
                    values[name] = False
            labels.append(
                CausalLabelRecord(
                    sentence_id=sid,
                    annotator=rater,
                    causal=True,
                    explicit=values.get("explicit", False),
                    marked=values.get("marked", False),
                    single_sentence=values.get("single_sentence", False),
                    single_cause=values.get("single_cause", False),
                    single_effect=values.get("single_effect", False),
                    event_chain=values.get("event_chain", False),
                )
            )
        if a_causal and b_causal:
            both_causal_seen += 1
    return LabeledCorpus(sentences, labels)


# ---------------------------------------------------------------------------
# Detection-harness corpora
# ---------------------------------------------------------------------------

#: Unambiguous cue templates for planted-cue sentences.
_CUE_TEMPLATES = (
    "If the {a} fails, the {b} shall notify the {c}.",
    "When the {a} starts, the {b} shall update the {c}.",
    "Because the {a} is active, the {b} shall flag the {c}.",
    "In case of {a} failure, the {b} shall alert the {c}.",
    "The {a} shall stop whenever the {b} resets the {c}.",
)

_PLAIN_TEMPLATES = (
    "The {a} shall log the {b} status of the {c}.",
    "The {a} stores the {b} data of the {c}.",
    "The {a} shall show the {b} summary of the {c}.",
    "Every {a} has a {b} entry and a {c} entry.",
    "The {a} shall list all {b} items of the {c}.",
)


def _pick_words(rng: np.random.Generator) -> dict[str, str]:
    picks = rng.choice(len(SAFE_WORDS), size=3, replace=False)
    return {key: SAFE_WORDS[i] for key, i in zip("abc", picks)}


@dataclass(frozen=True)
class PlantedCorpus:
    corpus: LabeledCorpus
    planted_agreement: float


def planted_cue_corpus(
    n: int,
    agreement_rate: float,
    seed: int = 0,
    domain: str = "Synthetic",
    lexicon: Optional[CueLexicon] = None,
) -> PlantedCorpus:
    """Corpus whose gold labels agree with the cue rule at an exact rate.

    Half the sentences contain a cue, half do not; labels are assigned so
    that exactly round(n * agreement_rate) sentences agree with cue
    presence, balanced across the two classes. The gold classes stay
    balanced, so undersampling is a no-op.
    """
    if not 0.0 <= agreement_rate <= 1.0:
        raise ValueError("agreement_rate must lie in [0, 1]")
    if n % 4:
        raise ValueError("n must be a multiple of 4 to keep classes balanced")
    lexicon = lexicon or default_lexicon()
    rng = np.random.default_rng(seed)
    half = n // 2
    disagree = round(n * (1.0 - agreement_rate))
    if disagree % 2:
        disagree += 1  # keep classes balanced; rate granularity is 2/n
    flip_per_side = disagree // 2
    sentences = []
    labels = []
    for position in range(n):
        has_cue = position < half
        words = _pick_words(rng)
        template = _CUE_TEMPLATES if has_cue else _PLAIN_TEMPLATES
        text = template[int(rng.integers(len(template)))].format(**words)
        side_index = position if has_cue else position - half
        agrees = side_index >= flip_per_side
        causal = has_cue if agrees else not has_cue
        sid = f"synth-{position:05d}"
        sentences.append(
            Sentence(
                id=sid,
                text=text,
                document_id="doc-synth",
                domain=domain,
                position=position,
            )
        )
        kwargs = {}
        if causal:
            matches = match_cues(text, lexicon)
            kwargs = dict(
                explicit=True,
                marked=bool(matches),
                single_sentence=True,
                single_cause=True,
                single_effect=True,
                event_chain=False,
                cue_phrases=tuple(m.phrase for m in matches),
            )
        labels.append(
            CausalLabelRecord(sentence_id=sid, annotator="a1", causal=causal, **kwargs)
        )
    achieved = 1.0 - (2 * flip_per_side) / n
    return PlantedCorpus(LabeledCorpus(sentences, labels), achieved)


#: Signal words carried by the lexical-signal corpus; both locate safely
#: outside the cue lexicon.
_SIGNAL_POSITIVE = "promptly"
_SIGNAL_NEGATIVE = "legacy"


def lexical_signal_corpus(
    n: int,
    signal_strength: float = 0.95,
    seed: int = 0,
    domain: str = "Synthetic",
) -> LabeledCorpus:
    """Corpus whose labels follow a hidden vocabulary, not the cue rule.

    Every sentence contains a cue phrase, so the rule baseline predicts
    all-causal and lands at 50% accuracy on the balanced labels. The
    hidden marker words predict the label with probability
    signal_strength, which word-based learners can pick up.
    """
    if n % 2:
        raise ValueError("n must be even to keep classes balanced")
    rng = np.random.default_rng(seed)
    sentences = []
    labels = []
    for position in range(n):
        causal = position % 2 == 0
        words = _pick_words(rng)
        text = _CUE_TEMPLATES[int(rng.integers(len(_CUE_TEMPLATES)))].format(**words)
        informative = rng.random() < signal_strength
        marker = (
            (_SIGNAL_POSITIVE if causal else _SIGNAL_NEGATIVE)
            if informative
            else (_SIGNAL_NEGATIVE if causal else _SIGNAL_POSITIVE)
        )
        text = f"{text[:-1]} {marker}."
        sid = f"lex-{position:05d}"
        sentences.append(
            Sentence(
                id=sid,
                text=text,
                document_id="doc-lex",
                domain=domain,
                position=position,
            )
        )
        kwargs = {}
        if causal:
            kwargs = dict(
                explicit=True,
                marked=True,
                single_sentence=True,
                single_cause=True,
                single_effect=True,
                event_chain=False,
            )
        labels.append(
            CausalLabelRecord(sentence_id=sid, annotator="a1", causal=causal, **kwargs)
        )
    return LabeledCorpus(sentences, labels)
