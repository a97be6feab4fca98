"""Pairwise inter-annotator agreement: percent agreement, Cohen's Kappa, Gwet's AC1.

Kappa is vulnerable to imbalanced marginals (high raw agreement can
still yield near-zero Kappa), so both measures are always reported
alongside the raw percentage. Gwet's AC1 stays close to the observed
agreement in those situations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

from .corpus import BINARY_DEPENDENT_FIELDS, LabeledCorpus

#: Band boundaries of the Landis/Koch interpretation scale.
_LANDIS_KOCH_BANDS = (
    (0.20, "none to slight"),
    (0.40, "fair"),
    (0.60, "moderate"),
    (0.80, "substantial"),
    (1.00, "almost perfect"),
)


class AgreementError(ValueError):
    """Raised on degenerate agreement inputs."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """r x r matrix of paired decisions; rows = rater A, columns = rater B."""

    labels: tuple[Hashable, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        r = len(self.labels)
        if r < 2:
            raise AgreementError("confusion matrix needs at least 2 categories")
        if len(self.counts) != r or any(len(row) != r for row in self.counts):
            raise AgreementError("counts must be a square matrix over the labels")
        if any(c < 0 for row in self.counts for c in row):
            raise AgreementError("counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def cell(self, a: Hashable, b: Hashable) -> int:
        return self.counts[self.labels.index(a)][self.labels.index(b)]

    def row_marginals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    def col_marginals(self) -> tuple[int, ...]:
        r = len(self.labels)
        return tuple(sum(self.counts[i][j] for i in range(r)) for j in range(r))

    def transposed(self) -> "ConfusionMatrix":
        r = len(self.labels)
        return ConfusionMatrix(
            self.labels,
            tuple(tuple(self.counts[i][j] for i in range(r)) for j in range(r)),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([""] + [str(l) for l in self.labels])
        for label, row in zip(self.labels, self.counts):
            writer.writerow([str(label)] + list(row))
        return buf.getvalue()


def binary_matrix(c00: int, c01: int, c10: int, c11: int) -> ConfusionMatrix:
    """Convenience constructor for a 2x2 matrix over labels (0, 1)."""
    return ConfusionMatrix((0, 1), ((c00, c01), (c10, c11)))


def build_confusion(
    pairs: Sequence[tuple[Hashable, Hashable]],
    labels: Optional[Sequence[Hashable]] = None,
) -> ConfusionMatrix:
    """Count (rater A, rater B) decision pairs into a confusion matrix.

    The label set is inferred from the pairs unless given explicitly;
    binary-looking data defaults to the (0, 1) axis so that one-sided
    inputs still produce a 2x2 matrix.
    """
    if not pairs:
        raise AgreementError("cannot build a confusion matrix from no pairs")
    if labels is None:
        seen = {a for a, _ in pairs} | {b for _, b in pairs}
        if seen <= {0, 1, True, False}:
            labels = (0, 1)
        else:
            labels = tuple(sorted(seen, key=str))
    else:
        labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    for a, b in pairs:
        if a not in index or b not in index:
            raise AgreementError(f"pair ({a!r}, {b!r}) outside label set {labels}")
    r = len(labels)
    counts = [[0] * r for _ in range(r)]
    for a, b in pairs:
        counts[index[a]][index[b]] += 1
    return ConfusionMatrix(tuple(labels), tuple(tuple(row) for row in counts))


def percent_agreement(cm: ConfusionMatrix) -> float:
    """Raw agreement: the share of pairs on the matrix diagonal."""
    total = cm.total
    if total == 0:
        raise AgreementError("percent agreement undefined for an empty matrix")
    trace = sum(cm.counts[i][i] for i in range(len(cm.labels)))
    return trace / total


def cohen_kappa(cm: ConfusionMatrix) -> float:
    """Chance-corrected agreement with expected agreement from the marginals."""
    total = cm.total
    if total == 0:
        raise AgreementError("kappa undefined for an empty matrix")
    p_o = percent_agreement(cm)
    rows = cm.row_marginals()
    cols = cm.col_marginals()
    p_e = sum(r * c for r, c in zip(rows, cols)) / (total * total)
    if p_e >= 1.0:
        raise AgreementError("kappa undefined: expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


def gwet_ac1(cm: ConfusionMatrix) -> float:
    """Gwet's chance-corrected agreement, resistant to the Kappa paradox.

    Chance agreement uses the mean marginal proportion per category:
    p_gamma = 1/(r-1) * sum_c pi_c * (1 - pi_c).
    """
    total = cm.total
    if total == 0:
        raise AgreementError("AC1 undefined for an empty matrix")
    p_o = percent_agreement(cm)
    rows = cm.row_marginals()
    cols = cm.col_marginals()
    r = len(cm.labels)
    p_gamma = 0.0
    for rc, cc in zip(rows, cols):
        pi = (rc + cc) / (2.0 * total)
        p_gamma += pi * (1.0 - pi)
    p_gamma /= r - 1
    if p_gamma >= 1.0:
        raise AgreementError("AC1 undefined: chance agreement is 1")
    return (p_o - p_gamma) / (1.0 - p_gamma)


def interpret_landis_koch(value: float) -> str:
    """Map an agreement coefficient to its Landis/Koch band."""
    if value > 1.0:
        raise AgreementError(f"agreement coefficient {value} exceeds 1")
    if value <= 0.0:
        return "no agreement"
    for upper, band in _LANDIS_KOCH_BANDS:
        if value <= upper:
            return band
    return "almost perfect"


@dataclass(frozen=True)
class AgreementStats:
    """Derived agreement measures; interpretation is the AC1 band.

    kappa is None when undefined (all marginal mass on one category for
    both raters).
    """

    percent_agreement: float
    kappa: Optional[float]
    ac1: float
    interpretation: str

    @classmethod
    def from_matrix(cls, cm: ConfusionMatrix) -> "AgreementStats":
        try:
            kappa = cohen_kappa(cm)
        except AgreementError:
            kappa = None
        ac1 = gwet_ac1(cm)
        return cls(
            percent_agreement=percent_agreement(cm),
            kappa=kappa,
            ac1=ac1,
            interpretation=interpret_landis_koch(ac1),
        )


@dataclass(frozen=True)
class AgreementReport:
    """Per-category agreement over the doubly-annotated part of a corpus.

    The primary category is computed over every doubly-labeled sentence;
    each dependent category only over sentences both raters marked causal.
    The ternary categories are excluded (labeled jointly, not independently).
    The averages are unweighted means over the categories present.
    """

    categories: tuple[str, ...]
    matrices: dict[str, ConfusionMatrix]
    stats: dict[str, AgreementStats]
    average_percent_agreement: float
    average_kappa: float
    average_ac1: float

    def to_dict(self) -> dict:
        return {
            "categories": list(self.categories),
            "per_category": {
                name: {
                    "confusion_matrix": [list(r) for r in self.matrices[name].counts],
                    "percent_agreement": self.stats[name].percent_agreement,
                    "kappa": self.stats[name].kappa,
                    "ac1": self.stats[name].ac1,
                    "interpretation": self.stats[name].interpretation,
                }
                for name in self.categories
            },
            "average": {
                "percent_agreement": self.average_percent_agreement,
                "kappa": self.average_kappa,
                "ac1": self.average_ac1,
                "note": "unweighted mean over categories",
            },
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_text(self) -> str:
        """Aligned-text rendering with 3-decimal rounding (full precision kept in JSON)."""
        header = ["category", "agreement", "kappa", "ac1", "interpretation"]
        rows = [header]
        for name in self.categories:
            st = self.stats[name]
            rows.append(
                [
                    name,
                    f"{st.percent_agreement * 100:.1f} %",
                    "n/a" if st.kappa is None else f"{st.kappa:.3f}",
                    f"{st.ac1:.3f}",
                    st.interpretation,
                ]
            )
        rows.append(
            [
                "avg.",
                f"{self.average_percent_agreement * 100:.1f} %",
                f"{self.average_kappa:.3f}",
                f"{self.average_ac1:.3f}",
                "",
            ]
        )
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


_CATEGORY_ORDER = ("causal",) + BINARY_DEPENDENT_FIELDS


def agreement_report(corpus: LabeledCorpus) -> AgreementReport:
    """Compute the per-category agreement table for a doubly-annotated corpus."""
    causal_pairs: list[tuple[int, int]] = []
    dependent_pairs: dict[str, list[tuple[int, int]]] = {
        name: [] for name in BINARY_DEPENDENT_FIELDS
    }
    for sentence in corpus.sentences:
        recs = corpus.labels_for(sentence.id)
        if len(recs) != 2:
            continue
        a, b = sorted(recs, key=lambda r: r.annotator)
        causal_pairs.append((int(a.causal), int(b.causal)))
        if a.causal and b.causal:
            for name in BINARY_DEPENDENT_FIELDS:
                dependent_pairs[name].append(
                    (int(getattr(a, name)), int(getattr(b, name)))
                )
    if not causal_pairs:
        raise AgreementError("corpus has no sentences labeled by two annotators")
    matrices: dict[str, ConfusionMatrix] = {"causal": build_confusion(causal_pairs)}
    for name in BINARY_DEPENDENT_FIELDS:
        if dependent_pairs[name]:
            matrices[name] = build_confusion(dependent_pairs[name])
    categories = tuple(name for name in _CATEGORY_ORDER if name in matrices)
    stats = {name: AgreementStats.from_matrix(matrices[name]) for name in categories}
    n = len(categories)
    kappas = [stats[c].kappa for c in categories if stats[c].kappa is not None]
    return AgreementReport(
        categories=categories,
        matrices=matrices,
        stats=stats,
        average_percent_agreement=sum(stats[c].percent_agreement for c in categories) / n,
        average_kappa=sum(kappas) / len(kappas) if kappas else float("nan"),
        average_ac1=sum(stats[c].ac1 for c in categories) / n,
    )
