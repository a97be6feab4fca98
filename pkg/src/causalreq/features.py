"""Bag-of-words and TF-IDF featurization over lowercase unigrams.

The vocabulary is always built from the training split only; held-out
text is projected onto it with unknown terms dropped. TF-IDF uses the
smoothed inverse document frequency ln((1+N)/(1+df)) + 1 followed by L2
row normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .textutil import word_tokens

SCHEMES = ("bow", "tfidf")


class FeatureError(ValueError):
    """Raised on featurization misuse (empty vocabulary, scheme mismatch)."""


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise FeatureError("vocabulary is empty")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocabulary":
        seen: dict[str, None] = {}
        for text in texts:
            for token in word_tokens(text):
                seen.setdefault(token, None)
        if not seen:
            raise FeatureError("no terms found while building the vocabulary")
        return cls(tuple(sorted(seen)))


class FeatureMatrix:
    """Sparse document-term matrix bound to its vocabulary and scheme."""

    def __init__(self, matrix: sp.csr_matrix, vocabulary: Vocabulary, scheme: str) -> None:
        if scheme not in SCHEMES:
            raise FeatureError(f"unknown scheme {scheme!r}")
        self.matrix = matrix
        self.vocabulary = vocabulary
        self.scheme = scheme
        #: document frequencies and count of the fitting corpus (tfidf only)
        self.idf: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def row_as_dict(self, i: int) -> dict[str, float]:
        row = self.matrix.getrow(i)
        return {
            self.vocabulary.terms[j]: float(v)
            for j, v in zip(row.indices, row.data)
        }


def _count_matrix(texts: Sequence[str], vocabulary: Vocabulary) -> sp.csr_matrix:
    index = vocabulary.index
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        counts: dict[int, int] = {}
        for token in word_tokens(text):
            j = index.get(token)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            indices.append(j)
            data.append(float(counts[j]))
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(len(texts), len(vocabulary)),
    )


def _smooth_idf(counts: sp.csr_matrix) -> np.ndarray:
    n_docs = counts.shape[0]
    df = np.asarray((counts > 0).sum(axis=0)).ravel()
    return np.log((1.0 + n_docs) / (1.0 + df)) + 1.0


def _l2_normalize(matrix: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    norms[norms == 0.0] = 1.0
    scale = sp.diags(1.0 / norms)
    return (scale @ matrix).tocsr()


def featurize(
    texts: Sequence[str],
    scheme: str,
    vocabulary: Optional[Vocabulary] = None,
    idf: Optional[np.ndarray] = None,
) -> FeatureMatrix:
    """Featurize texts; fits the vocabulary (and idf) when not supplied.

    Passing the vocabulary/idf of a fitted training matrix projects new
    text into the training feature space.
    """
    if scheme not in SCHEMES:
        raise FeatureError(f"unknown scheme {scheme!r}")
    if not texts:
        raise FeatureError("cannot featurize an empty text collection")
    if vocabulary is None:
        vocabulary = Vocabulary.build(texts)
    counts = _count_matrix(texts, vocabulary)
    if scheme == "bow":
        return FeatureMatrix(counts, vocabulary, "bow")
    if idf is None:
        idf = _smooth_idf(counts)
    weighted = (counts @ sp.diags(idf)).tocsr()
    fm = FeatureMatrix(_l2_normalize(weighted), vocabulary, "tfidf")
    fm.idf = idf
    return fm


def featurize_corpus(corpus, scheme: str, **kwargs) -> FeatureMatrix:
    """Featurize the sentences of a corpus in corpus order."""
    return featurize([s.text for s in corpus.sentences], scheme, **kwargs)
