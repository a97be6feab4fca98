"""Causal cue-phrase lexicon: inventory, matching, precision, ambiguity.

Lexicon entries are written in a compact notation: verb entries carry
inflection groups ("cause(s/ed)", "lead(s) to", "impact(s)"), optional
words appear in parentheses ("so (that)"), and alternations use a slash
("to this/that end"). Entries are expanded into token-sequence variants
at load time; matching reports the canonical (base) phrase.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Optional

from .corpus import LabeledCorpus
from .textutil import Token, tokenize

SYNTACTIC_TYPES = ("conjunction", "adverb", "pronoun", "adjective", "preposition", "verb")
RELATIONSHIP_CLASSES = ("cause", "enable", "prevent")

_INFLECT_FULL_RE = re.compile(r"^([a-z]+)\(s/ed\)$")
_INFLECT_S_RE = re.compile(r"^([a-z]+)\(s\)$")
_OPTIONAL_RE = re.compile(r"^\(([a-z]+)\)$")


class LexiconError(ValueError):
    """Raised on malformed lexicon entries or files."""


def _past_tense(base: str) -> str:
    return base + "d" if base.endswith("e") else base + "ed"


def _unit_variants(unit: str) -> list[str]:
    """Expansions of one space-separated notation unit ('' = omitted word)."""
    m = _INFLECT_FULL_RE.match(unit)
    if m:
        base = m.group(1)
        return [base, base + "s", _past_tense(base)]
    m = _INFLECT_S_RE.match(unit)
    if m:
        base = m.group(1)
        return [base, base + "s"]
    m = _OPTIONAL_RE.match(unit)
    if m:
        return ["", m.group(1)]
    if "/" in unit:
        parts = [p for p in unit.split("/") if p]
        if len(parts) < 2:
            raise LexiconError(f"malformed alternation in unit {unit!r}")
        return parts
    if "(" in unit or ")" in unit:
        raise LexiconError(f"unrecognized notation in unit {unit!r}")
    return [unit]


def expand_notation(phrase: str) -> tuple[str, tuple[tuple[str, ...], ...]]:
    """Expand a notation phrase into (canonical phrase, variant token tuples)."""
    units = phrase.lower().split()
    if not units:
        raise LexiconError("empty phrase")
    choices = [_unit_variants(u) for u in units]
    variants: list[tuple[str, ...]] = []
    stack: list[list[str]] = [[]]
    for options in choices:
        stack = [prefix + [opt] for prefix in stack for opt in options]
    seen = set()
    for combo in stack:
        tokens = tuple(t for t in combo if t)
        if tokens and tokens not in seen:
            seen.add(tokens)
            variants.append(tokens)
    canonical = " ".join(options[0] for options in choices if options[0])
    if not canonical:
        raise LexiconError(f"phrase {phrase!r} has no non-optional words")
    return canonical, tuple(variants)


@dataclass(frozen=True)
class CueEntry:
    """One lexicon phrase with its corpus counts.

    relationship_class is set exactly for verb entries; counts default to
    zero until filled from a corpus scan.
    """

    phrase: str
    syntactic_type: str
    relationship_class: Optional[str] = None
    causal_count: int = 0
    noncausal_count: int = 0

    def __post_init__(self) -> None:
        if not self.phrase.strip():
            raise LexiconError("cue phrase must be non-empty")
        if self.syntactic_type not in SYNTACTIC_TYPES:
            raise LexiconError(f"unknown syntactic type {self.syntactic_type!r}")
        if (self.syntactic_type == "verb") != (self.relationship_class is not None):
            raise LexiconError(
                f"{self.phrase!r}: relationship_class is required for verbs "
                "and disallowed otherwise"
            )
        if self.relationship_class is not None and self.relationship_class not in RELATIONSHIP_CLASSES:
            raise LexiconError(f"unknown relationship class {self.relationship_class!r}")
        if self.causal_count < 0 or self.noncausal_count < 0:
            raise LexiconError("counts must be non-negative")

    @property
    def canonical(self) -> str:
        return expand_notation(self.phrase)[0]

    @property
    def precision(self) -> Optional[float]:
        total = self.causal_count + self.noncausal_count
        return self.causal_count / total if total else None


class CueLexicon:
    """Immutable cue-phrase inventory with an expanded matching index."""

    def __init__(self, entries: Iterable[CueEntry]) -> None:
        self.entries: tuple[CueEntry, ...] = tuple(entries)
        self._by_canonical: dict[str, CueEntry] = {}
        # variant token tuple -> canonical phrase
        self._variants: dict[tuple[str, ...], str] = {}
        # first token -> variant token tuples, longest first
        self._first_token: dict[str, list[tuple[str, ...]]] = {}
        for entry in self.entries:
            canonical, variants = expand_notation(entry.phrase)
            if canonical in self._by_canonical:
                raise LexiconError(f"duplicate phrase {canonical!r} after normalization")
            self._by_canonical[canonical] = entry
            for variant in variants:
                owner = self._variants.get(variant)
                if owner is not None and owner != canonical:
                    raise LexiconError(
                        f"variant {' '.join(variant)!r} claimed by both "
                        f"{owner!r} and {canonical!r}"
                    )
                self._variants[variant] = canonical
                self._first_token.setdefault(variant[0], []).append(variant)
        for variants in self._first_token.values():
            variants.sort(key=len, reverse=True)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, phrase: str) -> bool:
        return self.normalize(phrase) is not None

    def canonical_phrases(self) -> tuple[str, ...]:
        return tuple(self._by_canonical)

    def entry(self, phrase: str) -> CueEntry:
        canonical = self.normalize(phrase)
        if canonical is None:
            raise KeyError(f"phrase {phrase!r} not in lexicon")
        return self._by_canonical[canonical]

    def normalize(self, phrase: str) -> Optional[str]:
        """Canonical form of a phrase (accepts notation, base, or any variant)."""
        try:
            canonical, variants = expand_notation(phrase)
        except LexiconError:
            return None
        if canonical in self._by_canonical:
            return canonical
        for variant in variants:
            owner = self._variants.get(variant)
            if owner is not None:
                return owner
        return None

    def add(
        self,
        phrase: str,
        syntactic_type: str,
        relationship_class: Optional[str] = None,
    ) -> tuple["CueLexicon", bool]:
        """Return (lexicon, added). Duplicates yield the original lexicon."""
        cleaned = " ".join(phrase.lower().split())
        if not cleaned:
            raise LexiconError("cannot add an empty phrase")
        if self.normalize(cleaned) is not None:
            return self, False
        entry = CueEntry(cleaned, syntactic_type, relationship_class)
        return CueLexicon(self.entries + (entry,)), True

    def with_counts(self, counts: dict[str, tuple[int, int]]) -> "CueLexicon":
        """A copy whose entries carry (causal, noncausal) counts."""
        updated = []
        for entry in self.entries:
            causal, noncausal = counts.get(entry.canonical, (0, 0))
            updated.append(replace(entry, causal_count=causal, noncausal_count=noncausal))
        return CueLexicon(updated)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["phrase", "syntactic_type", "relationship_class"])
        for entry in self.entries:
            writer.writerow([entry.phrase, entry.syntactic_type, entry.relationship_class or ""])
        return buf.getvalue()


def load_lexicon(path: str) -> CueLexicon:
    """Load a lexicon CSV with columns phrase,syntactic_type,relationship_class."""
    with open(path, encoding="utf-8", newline="") as fh:
        return _parse_lexicon_csv(fh, path)


def _parse_lexicon_csv(fh, where: str) -> CueLexicon:
    reader = csv.DictReader(fh)
    entries = []
    for lineno, row in enumerate(reader, start=2):
        try:
            entries.append(
                CueEntry(
                    phrase=(row.get("phrase") or "").strip().lower(),
                    syntactic_type=(row.get("syntactic_type") or "").strip(),
                    relationship_class=(row.get("relationship_class") or "").strip() or None,
                )
            )
        except LexiconError as exc:
            raise LexiconError(f"{where}:{lineno}: {exc}") from None
    return CueLexicon(entries)


def default_lexicon() -> CueLexicon:
    """The cue-phrase inventory that ships with the package."""
    text = resources.files("causalreq.data").joinpath("cue_phrases.csv").read_text("utf-8")
    return _parse_lexicon_csv(io.StringIO(text), "cue_phrases.csv")


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CueMatch:
    phrase: str            # canonical lexicon phrase
    span: tuple[int, int]  # character span of the matched text
    text: str              # matched surface text


def match_cues(text: str, lexicon: CueLexicon) -> list[CueMatch]:
    """Find lexicon phrases in a sentence.

    Matching is case-insensitive and respects word boundaries; multi-word
    phrases must appear as contiguous word tokens with no intervening
    punctuation. Overlapping candidates resolve to the longest match,
    leftmost first.
    """
    if len(lexicon) == 0:
        raise LexiconError("cannot match against an empty lexicon")
    tokens = tokenize(text)
    words: list[Token] = []
    adjacency: list[bool] = []
    previous_was_word = False
    for tok in tokens:
        if tok.is_word:
            if words:
                adjacency.append(previous_was_word)
            words.append(tok)
            previous_was_word = True
        else:
            previous_was_word = False
    lowered = [w.text.lower() for w in words]
    matches: list[tuple[int, int]] = []  # (start word index, length)
    canonicals: list[str] = []
    for i, first in enumerate(lowered):
        candidates = lexicon._first_token.get(first)
        if not candidates:
            continue
        for variant in candidates:  # longest first
            length = len(variant)
            if i + length > len(words):
                continue
            if tuple(lowered[i : i + length]) != variant:
                continue
            # every join inside the span must be punctuation-free
            if length > 1 and not all(adjacency[i : i + length - 1]):
                continue
            matches.append((i, length))
            canonicals.append(lexicon._variants[variant])
            break
    selected: list[CueMatch] = []
    next_free = 0
    for (start, length), canonical in zip(matches, canonicals):
        if start < next_free:
            continue
        span = (words[start].start, words[start + length - 1].end)
        selected.append(CueMatch(canonical, span, text[span[0] : span[1]]))
        next_free = start + length
    return selected


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------


def scan_counts(corpus: LabeledCorpus, lexicon: CueLexicon) -> dict[str, tuple[int, int]]:
    """Per-phrase (causal, noncausal) sentence counts from a lexicon scan.

    A sentence counts at most once per phrase however often the phrase
    repeats inside it.
    """
    counts: dict[str, list[int]] = {}
    gold = corpus.gold_causal()
    for sentence in corpus.sentences:
        if sentence.id not in gold:
            continue
        causal = gold[sentence.id]
        for canonical in {m.phrase for m in match_cues(sentence.text, lexicon)}:
            pair = counts.setdefault(canonical, [0, 0])
            pair[0 if causal else 1] += 1
    return {phrase: (c, n) for phrase, (c, n) in counts.items()}


def cue_precision(
    corpus: LabeledCorpus, phrase: str, lexicon: Optional[CueLexicon] = None
) -> float:
    """Share of sentences containing the phrase that are causal.

    Raises if the phrase never occurs in the corpus: an unobserved phrase
    has no precision, which is different from precision zero.
    """
    if lexicon is not None and phrase in lexicon:
        entry = lexicon.entry(phrase)
    else:
        entry = CueEntry(phrase.lower(), "conjunction")
    probe = CueLexicon([replace(entry, syntactic_type="conjunction", relationship_class=None)])
    counts = scan_counts(corpus, probe)
    if not counts:
        raise LexiconError(f"phrase {phrase!r} does not occur in the corpus")
    causal, noncausal = next(iter(counts.values()))
    return causal / (causal + noncausal)


def classify_ambiguity(precision: float, threshold: float = 0.8) -> str:
    """'non_ambiguous' when precision reaches the threshold, else 'ambiguous'."""
    if not 0.0 <= precision <= 1.0:
        raise ValueError(f"precision must lie in [0, 1], got {precision}")
    return "non_ambiguous" if precision >= threshold else "ambiguous"


@dataclass(frozen=True)
class DomainCueTable:
    domain: str
    top_frequency: tuple[tuple[str, float], ...]
    most_precise: tuple[tuple[str, float], ...]
    least_precise: tuple[tuple[str, float], ...]


def domain_cue_tables(
    corpus: LabeledCorpus,
    min_causal: int = 100,
    lexicon: Optional[CueLexicon] = None,
    top_n: int = 5,
    precise_n: int = 4,
) -> dict[str, DomainCueTable]:
    """Per-domain cue-phrase rankings for sufficiently represented domains.

    Frequencies come from the annotated cue phrases of causal sentences
    (relative to all cue occurrences in the domain); precision rankings
    come from a lexicon scan of the domain's sentences.
    """
    lexicon = lexicon or default_lexicon()
    gold = corpus.gold_causal()
    domains: dict[str, list] = {}
    for sentence in corpus.sentences:
        domains.setdefault(sentence.domain, []).append(sentence)
    tables: dict[str, DomainCueTable] = {}
    for domain, sentences in domains.items():
        causal_ids = [s.id for s in sentences if gold.get(s.id)]
        if len(causal_ids) < min_causal:
            continue
        freq: dict[str, int] = {}
        for sid in causal_ids:
            rec = corpus.gold_label(sid)
            for raw in rec.cue_phrases:
                canonical = lexicon.normalize(raw) or " ".join(raw.lower().split())
                freq[canonical] = freq.get(canonical, 0) + 1
        total = sum(freq.values())
        top = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
        top_frequency = tuple((p, c / total) for p, c in top) if total else ()
        sub = corpus.subset([s.id for s in sentences])
        precisions = {
            phrase: (c / (c + n), c + n)
            for phrase, (c, n) in scan_counts(sub, lexicon).items()
        }
        most = sorted(precisions.items(), key=lambda kv: (-kv[1][0], -kv[1][1], kv[0]))
        least = sorted(precisions.items(), key=lambda kv: (kv[1][0], -kv[1][1], kv[0]))
        tables[domain] = DomainCueTable(
            domain=domain,
            top_frequency=top_frequency,
            most_precise=tuple((p, v[0]) for p, v in most[:precise_n]),
            least_precise=tuple((p, v[0]) for p, v in least[:precise_n]),
        )
    if not tables:
        raise LexiconError(f"no domain has at least {min_causal} causal sentences")
    return tables
