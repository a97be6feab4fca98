"""Requirement life-cycle analytics: features, filters, binning, hypothesis tests.

Each requirement carries a state log; derived features are the lead-time
(days between the first and last entry), the volatility (entry count),
the consolidated state (last entry), and per-sentence causality counts
from a detector. Three hypotheses relate causality to these features,
tested at three granularities: binary presence (G1), causal-sentence
batches (G2), and binary presence within requirement-size bins (G3).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable, Optional, Sequence

import numpy as np

from .prevalence import ContingencyTable, PrevalenceError, chi2_independence
from .stats import (
    StatisticsError,
    cohens_d,
    cohens_d_band,
    eta_squared,
    eta_squared_band,
    kruskal_wallis,
    mann_whitney_u,
)
from .textutil import split_sentences

SECONDS_PER_DAY = 86400.0

#: Final states: execution completed (positive) and discarded (negative).
FINAL_STATES = ("EC", "D")


class LifecycleError(ValueError):
    """Raised on malformed requirement records or binning specs."""


@dataclass(frozen=True)
class StateEntry:
    author: str
    timestamp: datetime
    state_code: str

    def __post_init__(self) -> None:
        if not self.state_code:
            raise LifecycleError("state_code must be non-empty")


@dataclass(frozen=True)
class RequirementRecord:
    id: str
    description: str
    state_log: tuple[StateEntry, ...]
    creation_date: Optional[date] = None

    def __post_init__(self) -> None:
        stamps = [e.timestamp for e in self.state_log]
        if stamps != sorted(stamps):
            raise LifecycleError(f"requirement {self.id!r}: state log not sorted by timestamp")


@dataclass(frozen=True)
class DerivedFeatures:
    requirement_id: str
    lead_time: float  # days, fractional
    volatility: int
    consolidated_state: str
    sentence_count: int
    causal_count: int

    def __post_init__(self) -> None:
        if self.lead_time < 0:
            raise LifecycleError(f"{self.requirement_id!r}: negative lead time")
        if self.causal_count > self.sentence_count:
            raise LifecycleError(
                f"{self.requirement_id!r}: causal count exceeds sentence count"
            )


def _parse_timestamp(raw: str, where: str) -> datetime:
    try:
        return datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise LifecycleError(f"{where}: unparseable timestamp {raw!r}") from None


def load_requirements(path: str) -> list[RequirementRecord]:
    """Load requirement records from JSONL.

    Schema per line: {"id","description","creation_date",
    "state_log":[{"author","timestamp","state_code"}]} with ISO-8601
    timestamps. State logs are sorted by timestamp on load.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LifecycleError(f"{where}: malformed JSON ({exc.msg})") from None
            entries = []
            for entry in obj.get("state_log") or ():
                entries.append(
                    StateEntry(
                        author=str(entry.get("author", "")),
                        timestamp=_parse_timestamp(str(entry.get("timestamp")), where),
                        state_code=str(entry.get("state_code", "")),
                    )
                )
            entries.sort(key=lambda e: e.timestamp)
            creation = obj.get("creation_date")
            records.append(
                RequirementRecord(
                    id=str(obj["id"]),
                    description=str(obj.get("description", "")),
                    state_log=tuple(entries),
                    creation_date=date.fromisoformat(creation) if creation else None,
                )
            )
    return records


def derive_features(
    req: RequirementRecord, detector: Callable[[str], bool]
) -> DerivedFeatures:
    """Compute life-cycle features; the detector maps a sentence to causal/not."""
    if not req.state_log:
        raise LifecycleError(f"requirement {req.id!r}: empty state log")
    first = req.state_log[0].timestamp
    last = req.state_log[-1].timestamp
    lead_time = (last - first).total_seconds() / SECONDS_PER_DAY
    sentences = split_sentences(req.description)
    causal = sum(1 for s in sentences if detector(s))
    return DerivedFeatures(
        requirement_id=req.id,
        lead_time=lead_time,
        volatility=len(req.state_log),
        consolidated_state=req.state_log[-1].state_code,
        sentence_count=len(sentences),
        causal_count=causal,
    )


@dataclass(frozen=True)
class FilterReport:
    removed_missing_log: int
    removed_invalid_author: int
    removed_single_entry: int
    kept: int

    @property
    def removed_total(self) -> int:
        return (
            self.removed_missing_log
            + self.removed_invalid_author
            + self.removed_single_entry
        )


def preprocess(
    records: Sequence[RequirementRecord], invalid_author: Optional[str] = None
) -> tuple[list[RequirementRecord], FilterReport]:
    """Apply the three cleaning filters in order and report removal counts.

    1. records without a state log;
    2. records whose log was authored solely by the configured invalid
       author (migration artifacts, no real life-cycle information);
    3. records with a single log entry (no meaningful lead-time).
    """
    missing = 0
    invalid = 0
    single = 0
    kept = []
    for req in records:
        if not req.state_log:
            missing += 1
            continue
        if invalid_author is not None and all(
            e.author == invalid_author for e in req.state_log
        ):
            invalid += 1
            continue
        if len(req.state_log) == 1:
            single += 1
            continue
        kept.append(req)
    return kept, FilterReport(
        removed_missing_log=missing,
        removed_invalid_author=invalid,
        removed_single_entry=single,
        kept=len(kept),
    )


# ---------------------------------------------------------------------------
# Granularity binning
# ---------------------------------------------------------------------------

GRANULARITIES = ("g1", "g2", "g3")

DEFAULT_SENTENCE_BINS: tuple[tuple[int, Optional[int]], ...] = ((1, 3), (4, 7), (8, None))


@dataclass(frozen=True)
class GranularityGroups:
    mode: str
    #: ordered mapping from group label to member features
    groups: dict[str, tuple[DerivedFeatures, ...]]
    #: group labels eligible for testing (small G2 batches are excluded)
    eligible: tuple[str, ...]


def _bin_label(lo: int, hi: Optional[int]) -> str:
    return f"[{lo}, {'max' if hi is None else hi}]"


def bin_granularity(
    features: Sequence[DerivedFeatures],
    mode: str,
    batch_width: int = 3,
    sentence_bins: Sequence[tuple[int, Optional[int]]] = DEFAULT_SENTENCE_BINS,
    min_batch: int = 10,
) -> GranularityGroups:
    """Partition derived features by causal-content granularity.

    g1: no causal sentence vs at least one. g2: batch [0] plus
    batch_width-wide ranges [1, 3], [4, 6], ...; only batches with more
    than min_batch members stay eligible for testing. g3: the g1 split
    within each requirement-size bin.
    """
    if not features:
        raise LifecycleError("no features to bin")
    if mode not in GRANULARITIES:
        raise LifecycleError(f"unknown granularity {mode!r}")
    if mode == "g2" and batch_width < 1:
        raise LifecycleError("batch_width must be >= 1")
    if mode == "g3":
        bounds = [b for b, _ in sentence_bins]
        if not sentence_bins or bounds != sorted(bounds):
            raise LifecycleError("sentence_bins must be ordered and non-empty")
        for (_, hi), (lo2, _) in zip(sentence_bins, sentence_bins[1:]):
            if hi is None or lo2 != hi + 1:
                raise LifecycleError("sentence_bins must be contiguous")
    if mode == "g1":
        groups = {
            "non_causal": tuple(f for f in features if f.causal_count == 0),
            "causal": tuple(f for f in features if f.causal_count >= 1),
        }
        return GranularityGroups("g1", groups, tuple(k for k, v in groups.items() if v))
    if mode == "g2":
        highest = max(f.causal_count for f in features)
        groups = {"[0]": tuple(f for f in features if f.causal_count == 0)}
        lo = 1
        while lo <= highest:
            hi = lo + batch_width - 1
            label = f"[{lo}, {hi}]"
            groups[label] = tuple(
                f for f in features if lo <= f.causal_count <= hi
            )
            lo = hi + 1
        eligible = tuple(k for k, v in groups.items() if len(v) > min_batch)
        return GranularityGroups("g2", groups, eligible)
    groups = {}
    for lo, hi in sentence_bins:
        label = _bin_label(lo, hi)
        members = [
            f
            for f in features
            if f.sentence_count >= (lo if (lo, hi) != sentence_bins[0] else 0)
            and (hi is None or f.sentence_count <= hi)
        ]
        groups[f"{label} non_causal"] = tuple(f for f in members if f.causal_count == 0)
        groups[f"{label} causal"] = tuple(f for f in members if f.causal_count >= 1)
    return GranularityGroups("g3", groups, tuple(k for k, v in groups.items() if v))


# ---------------------------------------------------------------------------
# Hypothesis suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestCell:
    p: Optional[float]
    rejected: bool
    effect_size: Optional[float] = None
    effect_band: Optional[str] = None
    test: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "rejected": self.rejected,
            "effect_size": self.effect_size,
            "effect_band": self.effect_band,
            "test": self.test,
            "note": self.note,
        }


@dataclass(frozen=True)
class HypothesisSuiteReport:
    """Hypotheses x granularities grid of p-values and effect sizes."""

    alpha: float
    cells: dict[str, dict[str, TestCell]]  # hypothesis -> column -> cell
    columns: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "columns": list(self.columns),
            "hypotheses": {
                h: {col: cell.to_dict() for col, cell in row.items()}
                for h, row in self.cells.items()
            },
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_text(self) -> str:
        header = ["hypothesis", "measure"] + list(self.columns)
        rows = [header]
        for name, row in self.cells.items():
            p_row = [name, "p-value"]
            e_row = ["", "effect size"]
            for col in self.columns:
                cell = row.get(col)
                if cell is None or cell.p is None:
                    p_row.append("n/a")
                    e_row.append("-")
                    continue
                p_row.append(("*" if cell.rejected else "") + f"{cell.p:.4f}")
                e_row.append("-" if cell.effect_size is None else f"{cell.effect_size:.4f}")
            rows.append(p_row)
            rows.append(e_row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def _mwu_cell(a: Sequence[float], b: Sequence[float], alpha: float, sided: str) -> TestCell:
    if not a or not b:
        return TestCell(p=None, rejected=False, test="mann-whitney u", note="empty group")
    _, p = mann_whitney_u(a, b, alternative=sided)
    rejected = p < alpha
    effect = band = None
    if rejected:
        try:
            effect = cohens_d(a, b)
            band = cohens_d_band(effect)
        except StatisticsError:
            pass
    return TestCell(p=p, rejected=rejected, effect_size=effect, effect_band=band, test="mann-whitney u")


def _kw_cell(groups: Sequence[Sequence[float]], alpha: float) -> TestCell:
    groups = [g for g in groups if len(g) > 0]
    if len(groups) < 2:
        return TestCell(p=None, rejected=False, test="kruskal-wallis", note="fewer than 2 groups")
    h, dof, p = kruskal_wallis(groups)
    rejected = p < alpha
    effect = band = None
    if rejected:
        n = sum(len(g) for g in groups)
        try:
            effect = eta_squared(h, len(groups), n)
            band = eta_squared_band(effect)
        except StatisticsError:
            pass
    return TestCell(p=p, rejected=rejected, effect_size=effect, effect_band=band, test="kruskal-wallis")


def _chi2_cell(
    causal: Sequence[str], non_causal: Sequence[str], alpha: float
) -> TestCell:
    if not causal or not non_causal:
        return TestCell(p=None, rejected=False, test="chi-squared", note="empty group")
    table = ContingencyTable(
        rows=("causal", "non_causal"),
        columns=FINAL_STATES,
        counts=(
            tuple(sum(1 for s in causal if s == st) for st in FINAL_STATES),
            tuple(sum(1 for s in non_causal if s == st) for st in FINAL_STATES),
        ),
    )
    try:
        _, _, p = chi2_independence(table, continuity=True)
    except PrevalenceError as exc:
        return TestCell(p=None, rejected=False, test="chi-squared", note=str(exc))
    rejected = p < alpha
    effect = band = None
    if rejected:
        enc_a = [1.0 if s == "EC" else 0.0 for s in causal]
        enc_b = [1.0 if s == "EC" else 0.0 for s in non_causal]
        try:
            effect = cohens_d(enc_a, enc_b)
            band = cohens_d_band(effect)
        except StatisticsError:
            pass
    return TestCell(p=p, rejected=rejected, effect_size=effect, effect_band=band, test="chi-squared")


def hypothesis_suite(
    features: Sequence[DerivedFeatures],
    alpha: float = 0.05,
    batch_width: int = 3,
    sentence_bins: Sequence[tuple[int, Optional[int]]] = DEFAULT_SENTENCE_BINS,
    min_batch: int = 10,
    sided: str = "two-sided",
) -> HypothesisSuiteReport:
    """Run the lead-time / consolidated-state / volatility hypothesis grid.

    H1 and H3 use the Mann-Whitney U test at G1/G3 and Kruskal-Wallis at
    G2; the consolidated-state hypothesis filters to records whose final
    state is EC or D, uses chi-squared at G1/G3, and Kruskal-Wallis over
    EC=1/D=0 encodings at G2. Effect sizes appear only where the null is
    rejected; empty cells are marked, the suite keeps going.
    """
    if not features:
        raise LifecycleError("no derived features supplied")
    g1 = bin_granularity(features, "g1")
    g2 = bin_granularity(features, "g2", batch_width=batch_width, min_batch=min_batch)
    g3 = bin_granularity(features, "g3", sentence_bins=sentence_bins)
    bin_labels = [_bin_label(lo, hi) for lo, hi in sentence_bins]
    columns = ("G1", "G2") + tuple(f"G3 {label}" for label in bin_labels)

    def metric_cells(getter) -> dict[str, TestCell]:
        causal = [getter(f) for f in g1.groups.get("causal", ())]
        non_causal = [getter(f) for f in g1.groups.get("non_causal", ())]
        row = {"G1": _mwu_cell(causal, non_causal, alpha, sided)}
        row["G2"] = _kw_cell(
            [[getter(f) for f in g2.groups[label]] for label in g2.eligible], alpha
        )
        for label in bin_labels:
            a = [getter(f) for f in g3.groups.get(f"{label} causal", ())]
            b = [getter(f) for f in g3.groups.get(f"{label} non_causal", ())]
            row[f"G3 {label}"] = _mwu_cell(a, b, alpha, sided)
        return row

    cells = {
        "lead_time": metric_cells(lambda f: f.lead_time),
    }

    final = [f for f in features if f.consolidated_state in FINAL_STATES]
    if final:
        f_g1 = bin_granularity(final, "g1")
        f_g2 = bin_granularity(final, "g2", batch_width=batch_width, min_batch=min_batch)
        f_g3 = bin_granularity(final, "g3", sentence_bins=sentence_bins)
        state_row = {
            "G1": _chi2_cell(
                [f.consolidated_state for f in f_g1.groups.get("causal", ())],
                [f.consolidated_state for f in f_g1.groups.get("non_causal", ())],
                alpha,
            )
        }
        state_row["G2"] = _kw_cell(
            [
                [1.0 if f.consolidated_state == "EC" else 0.0 for f in f_g2.groups[label]]
                for label in f_g2.eligible
            ],
            alpha,
        )
        for label in bin_labels:
            state_row[f"G3 {label}"] = _chi2_cell(
                [f.consolidated_state for f in f_g3.groups.get(f"{label} causal", ())],
                [f.consolidated_state for f in f_g3.groups.get(f"{label} non_causal", ())],
                alpha,
            )
    else:
        state_row = {
            col: TestCell(p=None, rejected=False, test="chi-squared", note="no final-state records")
            for col in columns
        }
    cells["consolidated_state"] = state_row
    cells["volatility"] = metric_cells(lambda f: float(f.volatility))
    return HypothesisSuiteReport(alpha=alpha, cells=cells, columns=columns)


# ---------------------------------------------------------------------------
# Violin-plot data export
# ---------------------------------------------------------------------------


def violin_series_csv(
    groups: dict[str, Sequence[float]],
    quantile_steps: int = 20,
    density_points: int = 64,
) -> str:
    """Quantile and gaussian-KDE density series per group, as CSV rows.

    Rendering is left to downstream tooling; this export carries the
    numbers a violin plot needs.
    """
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["group", "kind", "x", "value"])
    for name, values in groups.items():
        arr = np.asarray(list(values), dtype=float)
        if arr.size == 0:
            continue
        for i in range(quantile_steps + 1):
            q = i / quantile_steps
            writer.writerow([name, "quantile", f"{q:.4f}", f"{np.quantile(arr, q):.6f}"])
        if arr.size > 1 and float(np.std(arr)) > 0:
            bandwidth = 1.06 * float(np.std(arr, ddof=1)) * arr.size ** (-1 / 5)
            grid = np.linspace(arr.min(), arr.max(), density_points)
            for x in grid:
                density = float(
                    np.mean(np.exp(-0.5 * ((x - arr) / bandwidth) ** 2))
                    / (bandwidth * np.sqrt(2 * np.pi))
                )
                writer.writerow([name, "density", f"{x:.6f}", f"{density:.8f}"])
    return buf.getvalue()
