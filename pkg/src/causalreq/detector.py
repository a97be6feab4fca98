"""Causality detection: rule baseline, trained classifiers, external adapter.

The rule-based baseline flags a sentence causal exactly when the cue
lexicon matches it. Statistical classifiers train on BoW/TF-IDF features
through a ClassifierSpec whose hyperparameter names follow the common
conventions of the ecosystem (alpha, C, n_estimators, ...). Predictions
produced elsewhere (e.g. by fine-tuned transformer models) enter the
harness through a JSONL adapter instead of being retrained here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import classifiers as clf
from .classifiers import BaseClassifier, TrainingError, classifier_from_dict
from .corpus import LabeledCorpus
from .features import FeatureMatrix, Vocabulary, featurize
from .lexicon import CueLexicon, match_cues

MODEL_FORMAT_VERSION = 1

ALGORITHMS = (
    "rule_based",
    "naive_bayes",
    "logistic_regression",
    "knn",
    "decision_tree",
    "random_forest",
    "ada_boost",
    "svm",
    "external",
)

#: Accepted hyperparameter names per algorithm. Names match the common
#: ecosystem spelling so published configurations can be pasted verbatim;
#: entries mapping to None are accepted but informational only.
HYPERPARAMETERS: dict[str, dict[str, Optional[str]]] = {
    "rule_based": {},
    "naive_bayes": {"alpha": "alpha", "fit_prior": "fit_prior"},
    "logistic_regression": {"C": "c", "solver": None, "max_iter": "max_iter"},
    "knn": {"n_neighbors": "n_neighbors", "weights": "weights", "algorithm": None},
    "decision_tree": {
        "criterion": "criterion",
        "splitter": "splitter",
        "max_features": "max_features",
        "max_depth": "max_depth",
    },
    "random_forest": {
        "n_estimators": "n_estimators",
        "criterion": "criterion",
        "max_features": "max_features",
    },
    "ada_boost": {"n_estimators": "n_estimators", "algorithm": None},
    "svm": {"C": None, "gamma": None, "kernel": None},
    "external": {"path": None},
}

_EMBED_ALIASES = {
    "bow": "bow",
    "tfidf": "tfidf",
    "tf-idf": "tfidf",
    "none": "none",
}


class DetectorError(ValueError):
    """Raised on invalid detector configuration or prediction files."""


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    embedding: str = "none"

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise DetectorError(f"unknown algorithm {self.algorithm!r}")
        allowed = HYPERPARAMETERS[self.algorithm]
        unknown = set(self.hyperparameters) - set(allowed)
        if unknown:
            raise DetectorError(
                f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}"
            )
        embed = _EMBED_ALIASES.get(str(self.embedding).lower())
        if embed is None:
            raise DetectorError(f"unknown embedding {self.embedding!r}")
        object.__setattr__(self, "embedding", embed)

    def native_kwargs(self) -> dict:
        """Hyperparameters mapped onto the native constructor's names."""
        mapping = HYPERPARAMETERS[self.algorithm]
        out = {}
        for name, value in self.hyperparameters.items():
            target = mapping[name]
            if target is not None:
                out[target] = value
        return out

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "hyperparameters": dict(self.hyperparameters),
            "embedding": self.embedding,
        }


@dataclass(frozen=True)
class Prediction:
    sentence_id: str
    label: bool
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise DetectorError(
                f"prediction for {self.sentence_id!r}: score {self.score} outside [0, 1]"
            )


def rule_based_classify(text: str, lexicon: CueLexicon, sentence_id: str = "") -> Prediction:
    """Causal exactly when the lexicon matches anywhere in the sentence."""
    matched = bool(match_cues(text, lexicon))
    return Prediction(sentence_id=sentence_id, label=matched, score=1.0 if matched else 0.0)


_NATIVE_CONSTRUCTORS = {
    "naive_bayes": clf.MultinomialNaiveBayes,
    "logistic_regression": clf.LogisticRegressionClassifier,
    "knn": clf.KNearestNeighbors,
    "decision_tree": clf.DecisionTreeClassifier,
    "random_forest": clf.RandomForestClassifier,
    "ada_boost": clf.AdaBoostClassifier,
}

_SEEDED = ("decision_tree", "random_forest", "ada_boost")


@dataclass
class TrainedModel:
    """A fitted classifier bound to the featurization it was trained with."""

    spec: ClassifierSpec
    model: BaseClassifier
    vocabulary: Vocabulary
    idf: Optional[np.ndarray]
    seed: int

    def featurize(self, texts: Sequence[str]) -> FeatureMatrix:
        return featurize(
            texts, self.spec.embedding, vocabulary=self.vocabulary, idf=self.idf
        )

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "model": self.model.to_dict(),
            "vocabulary": list(self.vocabulary.terms),
            "idf": None if self.idf is None else self.idf.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainedModel":
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise DetectorError(
                f"unsupported model format {payload.get('format_version')!r}"
            )
        spec = ClassifierSpec(**payload["spec"])
        idf = payload.get("idf")
        return cls(
            spec=spec,
            model=classifier_from_dict(payload["model"]),
            vocabulary=Vocabulary(tuple(payload["vocabulary"])),
            idf=None if idf is None else np.asarray(idf),
            seed=payload["seed"],
        )


def train_classifier(
    features: FeatureMatrix, labels: Sequence[bool], spec: ClassifierSpec, seed: int = 0
) -> TrainedModel:
    """Fit a native classifier on a feature matrix.

    The external and svm algorithms are not trainable here: external
    predictions come from load_external_predictions, and kernel SVM
    solvers are out of scope for the native harness.
    """
    if spec.algorithm == "external":
        raise TrainingError("external predictions are loaded, not trained")
    if spec.algorithm == "svm":
        raise TrainingError(
            "svm is not natively trainable; supply its predictions via "
            "load_external_predictions"
        )
    if spec.algorithm == "rule_based":
        raise TrainingError("the rule-based detector has nothing to train")
    kwargs = spec.native_kwargs()
    if spec.algorithm in _SEEDED:
        kwargs.setdefault("seed", seed)
    model = _NATIVE_CONSTRUCTORS[spec.algorithm](**kwargs)
    y = np.asarray([1 if v else 0 for v in labels])
    model.fit(features.matrix, y)
    return TrainedModel(
        spec=spec,
        model=model,
        vocabulary=features.vocabulary,
        idf=features.idf,
        seed=seed,
    )


def predict(
    trained: TrainedModel, texts: Sequence[str], sentence_ids: Optional[Sequence[str]] = None
) -> list[Prediction]:
    """Score texts with a trained model; label = score >= 0.5 (k-NN ties negative)."""
    matrix = trained.featurize(texts)
    scores = trained.model.predict_proba(matrix.matrix)
    labels = trained.model.predict(matrix.matrix)
    ids = sentence_ids if sentence_ids is not None else [""] * len(texts)
    return [
        Prediction(sentence_id=sid, label=bool(lab), score=float(score))
        for sid, lab, score in zip(ids, labels, scores)
    ]


def save_model(trained: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trained.to_dict(), fh)


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return TrainedModel.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Tag-enriched input sequences
# ---------------------------------------------------------------------------

ENRICH_MODES = ("pos", "dep")


def enrich_sequence(tagged_tokens: Sequence[tuple[str, str]], mode: str = "pos") -> str:
    """Join externally tagged tokens into a "token_TAG" sequence.

    Tagging itself happens upstream; punctuation arrives as ordinary
    tokens. An empty token list yields the empty string.
    """
    if mode not in ENRICH_MODES:
        raise DetectorError(f"unknown enrichment mode {mode!r}")
    return " ".join(f"{token}_{tag}" for token, tag in tagged_tokens)


# ---------------------------------------------------------------------------
# External predictions
# ---------------------------------------------------------------------------


def load_external_predictions(path: str, corpus: LabeledCorpus) -> list[Prediction]:
    """Load a JSONL of {sentence_id, label, score} keyed to corpus sentences."""
    predictions: list[Prediction] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DetectorError(f"{where}: malformed JSON ({exc.msg})") from None
            for key in ("sentence_id", "label", "score"):
                if key not in obj:
                    raise DetectorError(f"{where}: missing field {key!r}")
            sid = str(obj["sentence_id"])
            if not corpus.has_sentence(sid):
                raise DetectorError(f"{where}: unknown sentence id {sid!r}")
            if sid in seen:
                raise DetectorError(f"{where}: duplicate prediction for {sid!r}")
            seen.add(sid)
            try:
                predictions.append(
                    Prediction(sentence_id=sid, label=bool(obj["label"]), score=float(obj["score"]))
                )
            except DetectorError as exc:
                raise DetectorError(f"{where}: {exc}") from None
    return predictions


def write_predictions(predictions: Sequence[Prediction], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            fh.write(
                json.dumps(
                    {
                        "sentence_id": pred.sentence_id,
                        "label": pred.label,
                        "score": pred.score,
                    }
                )
                + "\n"
            )
