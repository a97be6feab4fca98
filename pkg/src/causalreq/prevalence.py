"""Descriptive label distributions and domain-stratified independence tests.

The stratified analysis tests, per category, whether the label
distribution is independent of the domain. Because the full-table test
has many degrees of freedom, the significance level is Bonferroni
corrected by the full-table dof and each eligible domain is then tested
one-vs-rest against the pooled remainder of the eligible strata.
2x2 post-hoc tables use the Yates continuity correction; larger tables
use the plain Pearson statistic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import (
    BINARY_DEPENDENT_FIELDS,
    LabeledCorpus,
    RELATIONSHIP_VALUES,
    TEMPORALITY_VALUES,
)
from .stats import StatisticsError, chi2_sf

BINARY_CATEGORIES = ("causal",) + BINARY_DEPENDENT_FIELDS
TERNARY_CATEGORIES = ("relationship", "temporality")
ALL_CATEGORIES = BINARY_CATEGORIES + TERNARY_CATEGORIES

_TERNARY_VALUES = {
    "relationship": RELATIONSHIP_VALUES,
    "temporality": TEMPORALITY_VALUES,
}


class PrevalenceError(ValueError):
    """Raised on degenerate contingency tables or ineligible strata."""


def format_p(p: float) -> str:
    """Scientific notation with two significant digits, e.g. 8.0E-05."""
    return f"{p:.1E}"


# ---------------------------------------------------------------------------
# Contingency tables and the chi-squared test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContingencyTable:
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.rows) < 2 or len(self.columns) < 2:
            raise PrevalenceError("a contingency table needs at least 2 rows and 2 columns")
        if len(self.counts) != len(self.rows) or any(
            len(row) != len(self.columns) for row in self.counts
        ):
            raise PrevalenceError("counts do not match the row/column axes")
        if any(c < 0 for row in self.counts for c in row):
            raise PrevalenceError("counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([""] + list(self.columns))
        for name, row in zip(self.rows, self.counts):
            writer.writerow([name] + list(row))
        return buf.getvalue()


def chi2_dof(table: ContingencyTable) -> int:
    """(rows - 1) * (columns - 1)."""
    return (len(table.rows) - 1) * (len(table.columns) - 1)


def chi2_independence(
    table: ContingencyTable, continuity: bool = False
) -> tuple[float, int, float]:
    """Pearson chi-squared test of independence; returns (statistic, dof, p).

    continuity applies the Yates correction and is meaningful for 2x2
    tables only. The p-value is the chi-squared upper tail computed via
    the regularized incomplete gamma function.
    """
    counts = np.asarray(table.counts, dtype=float)
    row_sums = counts.sum(axis=1)
    col_sums = counts.sum(axis=0)
    total = counts.sum()
    if np.any(row_sums == 0) or np.any(col_sums == 0):
        raise PrevalenceError("table has a zero marginal row or column")
    expected = np.outer(row_sums, col_sums) / total
    dof = chi2_dof(table)
    deviation = np.abs(counts - expected)
    if continuity and counts.shape == (2, 2):
        deviation = np.maximum(deviation - 0.5, 0.0)
    statistic = float(np.sum(deviation**2 / expected))
    try:
        p = chi2_sf(statistic, dof)
    except StatisticsError as exc:
        raise PrevalenceError(str(exc)) from None
    return statistic, dof, p


@dataclass(frozen=True)
class SignificanceConfig:
    alpha: float
    m: int
    corrected_level: float


def bonferroni(alpha: float, m: int) -> SignificanceConfig:
    """Divide the significance level by the comparison count."""
    if not 0.0 < alpha < 1.0:
        raise PrevalenceError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 1:
        raise PrevalenceError(f"comparison count must be >= 1, got {m}")
    return SignificanceConfig(alpha=alpha, m=m, corrected_level=alpha / m)


# ---------------------------------------------------------------------------
# Descriptive distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CategoryDistribution:
    """Counts and ratios per category value, overall and per domain.

    Ratios use the category's own denominator: the causal flag is taken
    over all labeled sentences, dependent categories over the causal
    subset (ternary categories over the subset where they were labeled).
    """

    overall: dict[str, dict[str, int]]
    ratios: dict[str, dict[str, float]]
    per_domain: dict[str, dict[str, dict[str, int]]]
    total_sentences: int

    def to_dict(self) -> dict:
        return {
            "total_sentences": self.total_sentences,
            "overall": self.overall,
            "ratios": self.ratios,
            "per_domain": self.per_domain,
        }


def _category_value(rec, category: str) -> Optional[str]:
    if category == "causal":
        return "1" if rec.causal else "0"
    value = getattr(rec, category)
    if value is None:
        return None
    if category in TERNARY_CATEGORIES:
        return str(value)
    return "1" if value else "0"


def category_distribution(corpus: LabeledCorpus) -> CategoryDistribution:
    """Tally primary labels per category, overall and per domain."""
    if len(corpus) == 0:
        raise PrevalenceError("empty corpus")
    overall: dict[str, dict[str, int]] = {c: {} for c in ALL_CATEGORIES}
    per_domain: dict[str, dict[str, dict[str, int]]] = {}
    labeled = 0
    for sentence in corpus.sentences:
        rec = corpus.gold_label(sentence.id)
        if rec is None:
            continue
        labeled += 1
        domain_bucket = per_domain.setdefault(
            sentence.domain, {c: {} for c in ALL_CATEGORIES}
        )
        for category in ALL_CATEGORIES:
            if category != "causal" and not rec.causal:
                continue
            value = _category_value(rec, category)
            if value is None:
                continue
            overall[category][value] = overall[category].get(value, 0) + 1
            domain_bucket[category][value] = domain_bucket[category].get(value, 0) + 1
    if labeled == 0:
        raise PrevalenceError("corpus has no labeled sentences")
    ratios: dict[str, dict[str, float]] = {}
    for category, counts in overall.items():
        denom = sum(counts.values())
        ratios[category] = (
            {value: count / denom for value, count in counts.items()} if denom else {}
        )
    return CategoryDistribution(
        overall=overall,
        ratios=ratios,
        per_domain=per_domain,
        total_sentences=labeled,
    )


def domain_causal_ratios(corpus: LabeledCorpus, min_stratum: int = 100) -> list[tuple[str, float, int]]:
    """Per-domain causal ratio series for domains with enough sentences."""
    dist = category_distribution(corpus)
    out = []
    for domain in sorted(dist.per_domain):
        counts = dist.per_domain[domain]["causal"]
        total = counts.get("0", 0) + counts.get("1", 0)
        if total >= min_stratum:
            out.append((domain, counts.get("1", 0) / total, total))
    return out


def ratio_series_csv(series: Sequence[tuple[str, float, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["domain", "causal_ratio", "sentences"])
    for domain, ratio, total in series:
        writer.writerow([domain, f"{ratio:.6f}", total])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# One-vs-rest stratified tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainTestResult:
    domain: str
    p: float
    statistic: float
    significant: bool
    table: ContingencyTable


@dataclass(frozen=True)
class OneVsRestReport:
    category: str
    alpha: float
    m: int
    corrected_level: float
    full_table: ContingencyTable
    full_statistic: float
    full_dof: int
    full_p: float
    results: tuple[DomainTestResult, ...]
    excluded: tuple[str, ...]


def _domain_value_counts(
    corpus: LabeledCorpus, category: str
) -> dict[str, dict[str, int]]:
    """Per-domain counts of the category's values over its population."""
    values = ("0", "1") if category in BINARY_CATEGORIES else _TERNARY_VALUES[category]
    out: dict[str, dict[str, int]] = {}
    for sentence in corpus.sentences:
        rec = corpus.gold_label(sentence.id)
        if rec is None:
            continue
        if category != "causal" and not rec.causal:
            continue
        value = _category_value(rec, category)
        if value is None:
            continue
        bucket = out.setdefault(sentence.domain, {v: 0 for v in values})
        bucket[value] += 1
    return out


def one_vs_rest_tests(
    corpus: LabeledCorpus,
    category: str,
    min_stratum: int = 100,
    alpha: float = 0.05,
) -> OneVsRestReport:
    """Test each eligible domain's distribution against the pooled rest.

    Eligibility: at least min_stratum sentences for the causal flag, at
    least min_stratum causal sentences for dependent categories. The
    comparison count m for the Bonferroni correction is the dof of the
    full eligible-domains table.
    """
    if category not in ALL_CATEGORIES:
        raise PrevalenceError(f"unknown category {category!r}")
    counts = _domain_value_counts(corpus, category)
    if category == "causal":
        sizes = {d: sum(v.values()) for d, v in counts.items()}
    else:
        causal_counts = _domain_value_counts(corpus, "causal")
        sizes = {d: v.get("1", 0) for d, v in causal_counts.items()}
    eligible = sorted(d for d in counts if sizes.get(d, 0) >= min_stratum)
    excluded = tuple(sorted(set(counts) - set(eligible)))
    if len(eligible) < 2:
        raise PrevalenceError(
            f"{category}: fewer than 2 domains reach {min_stratum} "
            f"{'sentences' if category == 'causal' else 'causal sentences'}"
        )
    values = ("0", "1") if category in BINARY_CATEGORIES else _TERNARY_VALUES[category]
    full = ContingencyTable(
        rows=tuple(values),
        columns=tuple(eligible),
        counts=tuple(
            tuple(counts[d][v] for d in eligible) for v in values
        ),
    )
    full_stat, full_dof, full_p = chi2_independence(full)
    config = bonferroni(alpha, full_dof)
    totals = {v: sum(counts[d][v] for d in eligible) for v in values}
    results = []
    for domain in eligible:
        own = [counts[domain][v] for v in values]
        rest = [totals[v] - counts[domain][v] for v in values]
        table = ContingencyTable(
            rows=(domain, "rest"),
            columns=tuple(values),
            counts=(tuple(own), tuple(rest)),
        )
        stat, _, p = chi2_independence(table, continuity=(len(values) == 2))
        results.append(
            DomainTestResult(
                domain=domain,
                p=p,
                statistic=stat,
                significant=p < config.corrected_level,
                table=table,
            )
        )
    return OneVsRestReport(
        category=category,
        alpha=alpha,
        m=config.m,
        corrected_level=config.corrected_level,
        full_table=full,
        full_statistic=full_stat,
        full_dof=full_dof,
        full_p=full_p,
        results=tuple(results),
        excluded=excluded,
    )


# ---------------------------------------------------------------------------
# Combined stratified report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StratifiedIndependenceReport:
    """Per-category one-vs-rest test table across all label categories."""

    alpha: float
    min_stratum: int
    categories: tuple[str, ...]
    reports: dict[str, OneVsRestReport]

    def to_dict(self) -> dict:
        out: dict = {"alpha": self.alpha, "min_stratum": self.min_stratum, "categories": {}}
        for name in self.categories:
            rep = self.reports[name]
            out["categories"][name] = {
                "m": rep.m,
                "corrected_level": rep.corrected_level,
                "corrected_level_text": format_p(rep.corrected_level),
                "full_table_p": rep.full_p,
                "domains": {
                    r.domain: {
                        "p": r.p,
                        "p_text": format_p(r.p),
                        "significant": r.significant,
                    }
                    for r in rep.results
                },
                "excluded": list(rep.excluded),
            }
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_text(self) -> str:
        domains = sorted({r.domain for rep in self.reports.values() for r in rep.results})
        header = ["domain"] + [c for c in self.categories]
        rows = [header]
        level_row = ["p_c"]
        for category in self.categories:
            level_row.append(format_p(self.reports[category].corrected_level))
        rows.append(level_row)
        for domain in domains:
            row = [domain]
            for category in self.categories:
                rep = self.reports[category]
                hit = next((r for r in rep.results if r.domain == domain), None)
                if hit is None:
                    row.append("(excluded)" if domain in rep.excluded else "-")
                else:
                    row.append(("*" if hit.significant else "") + format_p(hit.p))
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def stratified_report(
    corpus: LabeledCorpus,
    min_stratum: int = 100,
    alpha: float = 0.05,
    categories: Sequence[str] = ALL_CATEGORIES,
) -> StratifiedIndependenceReport:
    reports = {}
    kept = []
    for category in categories:
        try:
            reports[category] = one_vs_rest_tests(
                corpus, category, min_stratum=min_stratum, alpha=alpha
            )
            kept.append(category)
        except PrevalenceError:
            continue
    if not reports:
        raise PrevalenceError("no category has enough eligible strata")
    return StratifiedIndependenceReport(
        alpha=alpha,
        min_stratum=min_stratum,
        categories=tuple(kept),
        reports=reports,
    )
