"""Evaluation harness: per-class metrics, repeated stratified CV, grid search.

Reports carry recall/precision/F1 for both classes plus accuracy and the
unweighted macro averages. Cross-validation averages the fold scores
(the pooled-confusion-matrix variant is available behind a flag for
sensitivity analysis).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import FoldPlan, LabeledCorpus, split_kfold
from .detector import (
    ClassifierSpec,
    Prediction,
    predict,
    rule_based_classify,
    train_classifier,
)
from .features import featurize
from .lexicon import CueLexicon, default_lexicon


class EvaluationError(ValueError):
    """Raised on inconsistent prediction/gold inputs."""


@dataclass(frozen=True)
class ClassMetrics:
    recall: float
    precision: float
    f1: float
    support: float
    zero_division_flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    causal: ClassMetrics
    not_causal: ClassMetrics
    accuracy: float
    macro_recall: float
    macro_precision: float
    macro_f1: float
    repetitions: int = 1
    folds: int = 1
    seed: Optional[int] = None
    pooled: bool = False
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        def cm(m: ClassMetrics) -> dict:
            out = {
                "recall": m.recall,
                "precision": m.precision,
                "f1": m.f1,
                "support": m.support,
            }
            if m.zero_division_flags:
                out["zero_division"] = list(m.zero_division_flags)
            return out

        return {
            "causal": cm(self.causal),
            "not_causal": cm(self.not_causal),
            "accuracy": self.accuracy,
            "macro_recall": self.macro_recall,
            "macro_precision": self.macro_precision,
            "macro_f1": self.macro_f1,
            "repetitions": self.repetitions,
            "folds": self.folds,
            "seed": self.seed,
            "pooled": self.pooled,
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_text(self) -> str:
        header = ["class", "recall", "precision", "f1", "support"]
        rows = [header]
        for name, m in (("causal", self.causal), ("not causal", self.not_causal)):
            rows.append(
                [name, f"{m.recall:.2f}", f"{m.precision:.2f}", f"{m.f1:.2f}", f"{m.support:.0f}"]
            )
        rows.append(["accuracy", "", "", f"{self.accuracy:.2f}", ""])
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def _class_metrics(tp: int, fp: int, fn: int, positive_name: str) -> ClassMetrics:
    flags = []
    if tp + fp == 0:
        precision = 0.0
        flags.append(f"{positive_name}: precision undefined (never predicted), reported 0")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append(f"{positive_name}: recall undefined (no true instances), reported 0")
    else:
        recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return ClassMetrics(
        recall=recall,
        precision=precision,
        f1=f1,
        support=float(tp + fn),
        zero_division_flags=tuple(flags),
    )


def evaluate(predictions: Sequence[Prediction], gold: dict[str, bool]) -> EvaluationReport:
    """Score predictions against gold labels (exactly one prediction per sentence)."""
    by_id = {}
    for pred in predictions:
        if pred.sentence_id in by_id:
            raise EvaluationError(f"duplicate prediction for {pred.sentence_id!r}")
        by_id[pred.sentence_id] = pred
    missing = set(gold) - set(by_id)
    if missing:
        raise EvaluationError(f"missing predictions for {sorted(missing)[:5]} ...")
    tp = fp = fn = tn = 0
    for sid, truth in gold.items():
        label = by_id[sid].label
        if truth and label:
            tp += 1
        elif truth and not label:
            fn += 1
        elif not truth and label:
            fp += 1
        else:
            tn += 1
    causal = _class_metrics(tp, fp, fn, "causal")
    not_causal = _class_metrics(tn, fn, fp, "not_causal")
    total = tp + fp + fn + tn
    return EvaluationReport(
        causal=causal,
        not_causal=not_causal,
        accuracy=(tp + tn) / total,
        macro_recall=(causal.recall + not_causal.recall) / 2,
        macro_precision=(causal.precision + not_causal.precision) / 2,
        macro_f1=(causal.f1 + not_causal.f1) / 2,
    )


def _mean_reports(
    reports: Sequence[EvaluationReport],
    repetitions: int,
    folds: int,
    seed: Optional[int],
    notes: tuple[str, ...],
    pooled: bool = False,
) -> EvaluationReport:
    def mean(getter) -> float:
        return float(np.mean([getter(r) for r in reports]))

    def mean_class(name: str) -> ClassMetrics:
        flags = tuple(
            sorted({f for r in reports for f in getattr(r, name).zero_division_flags})
        )
        return ClassMetrics(
            recall=mean(lambda r: getattr(r, name).recall),
            precision=mean(lambda r: getattr(r, name).precision),
            f1=mean(lambda r: getattr(r, name).f1),
            support=mean(lambda r: getattr(r, name).support),
            zero_division_flags=flags,
        )

    return EvaluationReport(
        causal=mean_class("causal"),
        not_causal=mean_class("not_causal"),
        accuracy=mean(lambda r: r.accuracy),
        macro_recall=mean(lambda r: r.macro_recall),
        macro_precision=mean(lambda r: r.macro_precision),
        macro_f1=mean(lambda r: r.macro_f1),
        repetitions=repetitions,
        folds=folds,
        seed=seed,
        pooled=pooled,
        notes=notes + ("supports are means over folds",),
    )


def _fold_predictions(
    corpus: LabeledCorpus,
    spec: ClassifierSpec,
    train_ids: Sequence[str],
    test_ids: Sequence[str],
    lexicon: Optional[CueLexicon],
    external: Optional[dict[str, Prediction]],
    seed: int,
) -> list[Prediction]:
    if spec.algorithm == "rule_based":
        lex = lexicon or default_lexicon()
        return [
            rule_based_classify(corpus.sentence(sid).text, lex, sentence_id=sid)
            for sid in test_ids
        ]
    if spec.algorithm in ("external", "svm"):
        if external is None:
            raise EvaluationError(
                f"{spec.algorithm} needs externally supplied predictions"
            )
        try:
            return [external[sid] for sid in test_ids]
        except KeyError as exc:
            raise EvaluationError(f"external predictions missing sentence {exc}") from None
    train_texts = [corpus.sentence(sid).text for sid in train_ids]
    gold = corpus.gold_causal()
    train_labels = [gold[sid] for sid in train_ids]
    features = featurize(train_texts, spec.embedding)
    model = train_classifier(features, train_labels, spec, seed=seed)
    return predict(model, [corpus.sentence(sid).text for sid in test_ids], test_ids)


def repeated_cv(
    corpus: LabeledCorpus,
    spec: ClassifierSpec,
    k: int = 10,
    repetitions: int = 5,
    seed: int = 0,
    lexicon: Optional[CueLexicon] = None,
    external_predictions: Optional[Sequence[Prediction]] = None,
    pooled: bool = False,
    allow_unbalanced: bool = False,
) -> tuple[EvaluationReport, FoldPlan]:
    """Repeated stratified k-fold evaluation of a classifier spec.

    Expects a balanced corpus (run random_undersample first) unless
    allow_unbalanced is set. Returns the averaged report and the fold
    plan it was computed from.
    """
    gold = corpus.gold_causal()
    pos = sum(1 for v in gold.values() if v)
    neg = len(gold) - pos
    notes: tuple[str, ...] = ()
    if pos != neg:
        if not allow_unbalanced:
            raise EvaluationError(
                f"corpus is unbalanced ({pos} causal / {neg} non-causal); "
                "undersample first or pass allow_unbalanced=True"
            )
        notes = (f"evaluated on an unbalanced corpus ({pos}/{neg})",)
    external = None
    if external_predictions is not None:
        external = {p.sentence_id: p for p in external_predictions}
    plan = split_kfold(corpus, k=k, repetitions=repetitions, seed=seed)
    fold_reports = []
    pooled_preds: list[Prediction] = []
    pooled_gold: dict[str, bool] = {}
    for rep in range(repetitions):
        folds = plan.folds(rep)
        for i in range(k):
            test_ids = list(folds[i])
            train_ids = [sid for j, f in enumerate(folds) if j != i for sid in f]
            preds = _fold_predictions(
                corpus, spec, train_ids, test_ids, lexicon, external, seed=seed + rep
            )
            fold_gold = {sid: gold[sid] for sid in test_ids}
            if pooled:
                pooled_preds.extend(
                    Prediction(f"rep{rep}:{p.sentence_id}", p.label, p.score) for p in preds
                )
                pooled_gold.update({f"rep{rep}:{sid}": v for sid, v in fold_gold.items()})
            else:
                fold_reports.append(evaluate(preds, fold_gold))
    if pooled:
        report = evaluate(pooled_preds, pooled_gold)
        report = _mean_reports(
            [report], repetitions, k, seed, notes + ("pooled confusion matrix",), pooled=True
        )
        return report, plan
    return _mean_reports(fold_reports, repetitions, k, seed, notes), plan


@dataclass(frozen=True)
class GridSearchResult:
    best_spec: ClassifierSpec
    best_accuracy: float
    best_macro_f1: float
    selection_metric: str
    evaluated: tuple[tuple[dict, float, float], ...]  # (params, accuracy, macro f1)


def grid_search(
    spec_template: ClassifierSpec,
    param_grid: dict[str, Sequence],
    corpus: LabeledCorpus,
    folds: FoldPlan,
    lexicon: Optional[CueLexicon] = None,
    seed: int = 0,
) -> GridSearchResult:
    """Exhaustive hyperparameter search selected by mean validation accuracy.

    Every grid combination is evaluated on every fold of the plan. Ties
    go to the higher macro-F1, then to the lexicographically first
    parameter combination. The special grid key "embed" varies the
    embedding rather than a hyperparameter.
    """
    if not param_grid:
        raise EvaluationError("empty parameter grid")
    names = sorted(param_grid)
    if any(len(param_grid[n]) == 0 for n in names):
        raise EvaluationError("every grid dimension needs at least one value")
    gold = corpus.gold_causal()
    best: Optional[tuple[float, float, ClassifierSpec, dict]] = None
    evaluated = []
    # sorted dimension values make the tie-break a stable lexicographic order
    ordered_values = [sorted(param_grid[n], key=str) for n in names]
    for combo in itertools.product(*ordered_values):
        params = dict(zip(names, combo))
        embedding = params.pop("embed", spec_template.embedding)
        spec = ClassifierSpec(
            algorithm=spec_template.algorithm,
            hyperparameters={**spec_template.hyperparameters, **params},
            embedding=embedding,
        )
        accs = []
        f1s = []
        for rep in range(folds.repetitions):
            fold_ids = folds.folds(rep)
            for i in range(folds.k):
                test_ids = list(fold_ids[i])
                train_ids = [sid for j, f in enumerate(fold_ids) if j != i for sid in f]
                preds = _fold_predictions(
                    corpus, spec, train_ids, test_ids, lexicon, None, seed=seed + rep
                )
                report = evaluate(preds, {sid: gold[sid] for sid in test_ids})
                accs.append(report.accuracy)
                f1s.append(report.macro_f1)
        acc = float(np.mean(accs))
        f1 = float(np.mean(f1s))
        evaluated.append((dict(zip(names, combo)), acc, f1))
        if best is None or (acc, f1) > (best[0], best[1]):
            best = (acc, f1, spec, params)
    assert best is not None
    return GridSearchResult(
        best_spec=best[2],
        best_accuracy=best[0],
        best_macro_f1=best[1],
        selection_metric="mean validation accuracy",
        evaluated=tuple(evaluated),
    )
