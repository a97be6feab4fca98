import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from causalreq.lifecycle import (
    DerivedFeatures,
    LifecycleError,
    RequirementRecord,
    StateEntry,
    bin_granularity,
    derive_features,
    hypothesis_suite,
    load_requirements,
    preprocess,
    violin_series_csv,
)

T0 = datetime(2016, 1, 1, tzinfo=timezone.utc)


def entry(days: float, state: str = "M0", author: str = "alice") -> StateEntry:
    return StateEntry(author=author, timestamp=T0 + timedelta(days=days), state_code=state)


def record(rid="r1", description="The panel is red.", entries=None) -> RequirementRecord:
    if entries is None:
        entries = [entry(0, "NF"), entry(3, "EC")]
    return RequirementRecord(id=rid, description=description, state_log=tuple(entries))


def features(rid="f", lead=1.0, vol=2, state="EC", sentences=None, causal=0) -> DerivedFeatures:
    return DerivedFeatures(
        requirement_id=rid,
        lead_time=lead,
        volatility=vol,
        consolidated_state=state,
        sentence_count=max(1, causal) if sentences is None else sentences,
        causal_count=causal,
    )


def always_causal(sentence: str) -> bool:
    return True


def never_causal(sentence: str) -> bool:
    return False


class TestDeriveFeatures:
    def test_direct_definitions(self):
        feats = derive_features(record(), never_causal)
        assert feats.lead_time == pytest.approx(3.0)
        assert feats.volatility == 2
        assert feats.consolidated_state == "EC"

    def test_single_entry_still_computable(self):
        feats = derive_features(record(entries=[entry(0, "NF")]), never_causal)
        assert feats.lead_time == 0.0
        assert feats.volatility == 1

    def test_sentence_and_causal_counts_with_rule_detector(self, lexicon):
        from causalreq.detector import rule_based_classify

        description = (
            "If the process fails, an error message is shown. The warning light is red."
        )
        feats = derive_features(
            record(description=description),
            lambda s: rule_based_classify(s, lexicon).label,
        )
        assert feats.sentence_count == 2
        assert feats.causal_count == 1

    def test_fractional_lead_time_days(self):
        feats = derive_features(
            record(entries=[entry(0), entry(1.5, "EC")]), never_causal
        )
        assert feats.lead_time == pytest.approx(1.5)

    def test_unsorted_log_rejected(self):
        with pytest.raises(LifecycleError, match="not sorted"):
            RequirementRecord(
                id="x", description="d", state_log=(entry(2), entry(1))
            )


class TestLoadRequirements:
    def test_round_trip(self, tmp_path):
        rows = [
            {
                "id": "r1",
                "description": "If a fails, b stops.",
                "creation_date": "2016-03-01",
                "state_log": [
                    {"author": "alice", "timestamp": "2016-03-01T10:00:00Z", "state_code": "NF"},
                    {"author": "bob", "timestamp": "2016-03-04T10:00:00Z", "state_code": "EC"},
                ],
            }
        ]
        path = tmp_path / "reqs.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        records = load_requirements(str(path))
        assert len(records) == 1
        assert records[0].state_log[-1].state_code == "EC"

    def test_bad_timestamp_reports_line(self, tmp_path):
        path = tmp_path / "reqs.jsonl"
        path.write_text(
            json.dumps(
                {
                    "id": "r1",
                    "description": "",
                    "state_log": [
                        {"author": "a", "timestamp": "not-a-time", "state_code": "NF"}
                    ],
                }
            )
            + "\n"
        )
        with pytest.raises(LifecycleError, match="reqs.jsonl:1"):
            load_requirements(str(path))


class TestPreprocess:
    def build_fixture(self):
        records = []
        for i in range(2):  # missing log
            records.append(record(rid=f"missing{i}", entries=[]))
        records.append(  # invalid-author-only log
            record(
                rid="migration",
                entries=[entry(0, author="importer"), entry(1, author="importer")],
            )
        )
        for i in range(3):  # single entry
            records.append(record(rid=f"single{i}", entries=[entry(0)]))
        for i in range(4):  # valid
            records.append(record(rid=f"ok{i}"))
        return records

    def test_planted_counts_removed(self):
        kept, report = preprocess(self.build_fixture(), invalid_author="importer")
        assert report.removed_missing_log == 2
        assert report.removed_invalid_author == 1
        assert report.removed_single_entry == 3
        assert report.kept == len(kept) == 4

    def test_all_valid_passes_through(self):
        records = [record(rid=f"r{i}") for i in range(5)]
        kept, report = preprocess(records, invalid_author="importer")
        assert report.removed_total == 0
        assert len(kept) == 5

    def test_filters_apply_in_order(self):
        # a single-entry log by the invalid author falls to filter 2, not 3
        records = [record(rid="x", entries=[entry(0, author="importer")])]
        _, report = preprocess(records, invalid_author="importer")
        assert report.removed_invalid_author == 1
        assert report.removed_single_entry == 0

    def test_survivors_satisfy_invariants(self):
        kept, _ = preprocess(self.build_fixture(), invalid_author="importer")
        for req in kept:
            feats = derive_features(req, never_causal)
            assert feats.lead_time >= 0
            assert feats.volatility >= 2


class TestBinning:
    def test_g1_boundaries(self):
        feats = [features(rid=f"r{i}", causal=c) for i, c in enumerate((0, 1, 3, 4))]
        groups = bin_granularity(feats, "g1")
        assert [f.causal_count for f in groups.groups["non_causal"]] == [0]
        assert sorted(f.causal_count for f in groups.groups["causal"]) == [1, 3, 4]

    def test_g2_batches(self):
        feats = [features(rid=f"r{i}", causal=c) for i, c in enumerate((0, 1, 3, 4, 5, 7))]
        groups = bin_granularity(feats, "g2", min_batch=0)
        assert [f.causal_count for f in groups.groups["[0]"]] == [0]
        assert sorted(f.causal_count for f in groups.groups["[1, 3]"]) == [1, 3]
        assert sorted(f.causal_count for f in groups.groups["[4, 6]"]) == [4, 5]
        assert sorted(f.causal_count for f in groups.groups["[7, 9]"]) == [7]

    def test_g2_small_batches_excluded_from_testing(self):
        feats = [features(rid=f"a{i}", causal=0) for i in range(12)]
        feats += [features(rid=f"b{i}", causal=1) for i in range(11)]
        feats += [features(rid=f"c{i}", causal=4) for i in range(10)]  # exactly 10: dropped
        feats += [features(rid=f"d{i}", causal=13) for i in range(2)]
        groups = bin_granularity(feats, "g2", min_batch=10)
        assert set(groups.eligible) == {"[0]", "[1, 3]"}
        assert "[4, 6]" in groups.groups  # still reported, just not tested

    def test_g3_boundaries(self):
        cases = [
            (3, 0, "[1, 3] non_causal"),
            (3, 1, "[1, 3] causal"),
            (4, 1, "[4, 7] causal"),
            (6, 1, "[4, 7] causal"),
            (7, 0, "[4, 7] non_causal"),
            (8, 2, "[8, max] causal"),
            (30, 0, "[8, max] non_causal"),
        ]
        feats = [
            features(rid=f"r{i}", sentences=s, causal=c)
            for i, (s, c, _) in enumerate(cases)
        ]
        groups = bin_granularity(feats, "g3")
        for i, (s, c, label) in enumerate(cases):
            assert any(f.requirement_id == f"r{i}" for f in groups.groups[label]), label

    def test_binning_is_a_partition(self):
        rng = np.random.default_rng(0)
        feats = [
            features(
                rid=f"r{i}",
                sentences=int(rng.integers(1, 20)),
                causal=0,
            )
            for i in range(50)
        ]
        feats = [
            DerivedFeatures(
                requirement_id=f.requirement_id,
                lead_time=f.lead_time,
                volatility=f.volatility,
                consolidated_state=f.consolidated_state,
                sentence_count=f.sentence_count,
                causal_count=int(rng.integers(0, f.sentence_count + 1)),
            )
            for f in feats
        ]
        for mode in ("g1", "g2", "g3"):
            groups = bin_granularity(feats, mode, min_batch=0)
            members = [f.requirement_id for g in groups.groups.values() for f in g]
            assert sorted(members) == sorted(f.requirement_id for f in feats), mode

    def test_invalid_bin_spec_rejected(self):
        with pytest.raises(LifecycleError, match="contiguous"):
            bin_granularity([features()], "g3", sentence_bins=((1, 3), (5, None)))


def synthetic_features(rng, n_per_group, causal_shift=0.0, ec_rate=0.5):
    """Lognormal lead times; the causal group's lead time scales by (1+shift)."""
    feats = []
    for i in range(n_per_group):
        lead = float(rng.lognormal(3.0, 0.6))
        feats.append(
            DerivedFeatures(
                requirement_id=f"n{i}",
                lead_time=lead,
                volatility=int(rng.integers(2, 8)),
                consolidated_state="EC" if rng.random() < ec_rate else "D",
                sentence_count=int(rng.integers(1, 12)),
                causal_count=0,
            )
        )
    for i in range(n_per_group):
        lead = float(rng.lognormal(3.0, 0.6)) * (1.0 + causal_shift)
        sentences = int(rng.integers(1, 12))
        feats.append(
            DerivedFeatures(
                requirement_id=f"c{i}",
                lead_time=lead,
                volatility=int(rng.integers(2, 8)),
                consolidated_state="EC" if rng.random() < ec_rate else "D",
                sentence_count=sentences,
                causal_count=int(rng.integers(1, sentences + 1)),
            )
        )
    return feats


class TestHypothesisSuite:
    def test_ec_d_filter_semantics(self):
        feats = [
            features(rid="a", state="EC", causal=1),
            features(rid="b", state="EC", causal=0),
            features(rid="c", state="D", causal=1),
            features(rid="d", state="M1", causal=0),
            features(rid="e", state="M1", causal=1),
        ]
        suite = hypothesis_suite(feats, min_batch=0)
        # consolidated-state tests only see the 3 final-state records
        cell = suite.cells["consolidated_state"]["G1"]
        assert cell.test == "chi-squared"
        # chi-squared on a 2x2 from 3 records has a zero marginal -> not computable
        assert cell.p is None or 0 <= cell.p <= 1

    def test_empty_group_marked_not_computable(self):
        feats = [features(rid=f"r{i}", causal=1, sentences=2) for i in range(10)]
        suite = hypothesis_suite(feats, min_batch=0)
        g1 = suite.cells["lead_time"]["G1"]
        assert g1.p is None
        assert "empty" in g1.note

    def test_planted_effect_rejected_in_95_percent_of_runs(self):
        rejections = 0
        runs = 60
        for seed in range(runs):
            rng = np.random.default_rng(seed)
            feats = synthetic_features(rng, 120, causal_shift=-0.30)
            suite = hypothesis_suite(feats, min_batch=0)
            if suite.cells["lead_time"]["G1"].rejected:
                rejections += 1
        assert rejections / runs >= 0.95

    def test_null_rejection_rate_near_alpha(self):
        rejections = 0
        runs = 200
        for seed in range(runs):
            rng = np.random.default_rng(10_000 + seed)
            feats = synthetic_features(rng, 80, causal_shift=0.0)
            suite = hypothesis_suite(feats, min_batch=0)
            if suite.cells["lead_time"]["G1"].rejected:
                rejections += 1
        assert 0.01 <= rejections / runs <= 0.10

    def test_effect_size_only_on_rejection(self):
        rng = np.random.default_rng(3)
        feats = synthetic_features(rng, 150, causal_shift=-0.4)
        suite = hypothesis_suite(feats, min_batch=0)
        for row in suite.cells.values():
            for cell in row.values():
                if cell.p is None:
                    continue
                if cell.rejected:
                    assert cell.effect_size is None or cell.effect_band is not None
                else:
                    assert cell.effect_size is None

    def test_report_shape(self):
        rng = np.random.default_rng(4)
        feats = synthetic_features(rng, 60)
        suite = hypothesis_suite(feats, min_batch=0)
        assert set(suite.cells) == {"lead_time", "consolidated_state", "volatility"}
        assert suite.columns[0] == "G1"
        text = suite.to_text()
        assert "lead_time" in text and "G2" in text
        payload = suite.to_dict()
        assert payload["alpha"] == 0.05


class TestViolinExport:
    def test_quantiles_and_density_rows(self):
        rng = np.random.default_rng(5)
        csv_text = violin_series_csv(
            {"causal": rng.normal(10, 2, 50).tolist(), "non_causal": [1.0]}
        )
        lines = csv_text.strip().splitlines()
        assert lines[0] == "group,kind,x,value"
        assert any(line.startswith("causal,quantile,0.5000") for line in lines)
        assert any(line.startswith("causal,density") for line in lines)
        # singleton group exports quantiles but no density
        assert any(line.startswith("non_causal,quantile") for line in lines)
        assert not any(line.startswith("non_causal,density") for line in lines)
