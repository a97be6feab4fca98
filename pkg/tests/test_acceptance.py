"""Acceptance suite: every reproduction criterion at its stated tolerance.

One test per criterion; the terminal summary prints a PASS/FAIL line for
each (see conftest). Tolerances are pinned here, not calibrated later.
The one criterion that is provably unattainable (the exact-vs-normal
rank-test gap for every tiny sample) is implemented literally and marked
as a strict expected failure with the counterexample documented.
"""

import itertools
import json
import math
import sys
import time

import mpmath
import numpy as np
import pytest

import refdata
from causalreq.agreement import ConfusionMatrix, cohen_kappa, gwet_ac1, percent_agreement
from causalreq.corpus import CausalLabelRecord, random_undersample
from causalreq.detector import ClassifierSpec
from causalreq.evaluation import repeated_cv
from causalreq.lexicon import classify_ambiguity, default_lexicon
from causalreq.lifecycle import (
    DerivedFeatures,
    bin_granularity,
    preprocess,
)
from causalreq.prevalence import (
    bonferroni,
    category_distribution,
    format_p,
    one_vs_rest_tests,
)
from causalreq.stats import (
    chi2_sf,
    cohens_d,
    eta_squared,
    kruskal_wallis,
    mann_whitney_u,
)
from causalreq.store import LabelStore
from causalreq.synth import lexical_signal_corpus, planted_cue_corpus

mpmath.mp.dps = 40

acceptance = pytest.mark.acceptance


@acceptance
def test_c1_agreement_reproduction():
    """All seven published agreement triples to +-0.001, in under a second."""
    start = time.monotonic()
    for category, cells in refdata.AGREEMENT_MATRICES.items():
        cm = ConfusionMatrix((0, 1), cells)
        pa, kappa, ac1 = refdata.AGREEMENT_EXPECTED[category]
        assert abs(percent_agreement(cm) - pa) <= 1e-3, category
        assert abs(cohen_kappa(cm) - kappa) <= 1e-3, category
        assert abs(gwet_ac1(cm) - ac1) <= 1e-3, category
    # the paradox case must reproduce: high raw agreement, near-zero kappa
    marked = ConfusionMatrix((0, 1), refdata.AGREEMENT_MATRICES["marked"])
    assert percent_agreement(marked) >= 0.93
    assert cohen_kappa(marked) <= 0.024
    assert gwet_ac1(marked) >= 0.925
    assert time.monotonic() - start < 1.0


@acceptance
def test_c2_cue_precision_reproduction():
    """Counts reproduce the published 2-decimal precision and bold flags.

    Five rows are established errata in the reference table
    (refdata.CUE_ROW_ERRATA; the fraction 3/8 = 0.375 is printed as 0.38
    for one phrase and 0.37 for another, so no rounding rule reproduces
    every row). For those rows this test pins the documented erratum;
    the literal all-rows claim is the strict xfail below.
    """
    start = time.monotonic()
    for phrase, causal, noncausal, published, bold in refdata.CUE_ROWS:
        precision = causal / (causal + noncausal)
        rounded = round(precision, 2)
        if phrase in refdata.CUE_ROW_ERRATA:
            assert published == refdata.CUE_ROW_ERRATA[phrase], phrase
            assert abs(rounded - published) <= 0.011, phrase
        else:
            assert rounded == pytest.approx(published, abs=1e-9), phrase
        assert (classify_ambiguity(rounded) == "non_ambiguous") == bold, phrase
    assert time.monotonic() - start < 1.0


@acceptance
@pytest.mark.xfail(
    strict=True,
    reason=(
        "reference-table errata: five rows print a 2-decimal precision that "
        "is not the rounding of their own counts (e.g. 'rely on' 3/8 -> 0.38 "
        "but 'provide(s/ed)' 75/200 -> 0.37 for the same fraction 0.375)"
    ),
)
def test_c2_cue_precision_literal_all_rows():
    for phrase, causal, noncausal, published, _ in refdata.CUE_ROWS:
        assert round(causal / (causal + noncausal), 2) == pytest.approx(
            published, abs=1e-9
        ), phrase


@acceptance
def test_c3_prevalence_reproduction(reference_corpus):
    """Aggregate ratios within 0.2 percentage points of the published values."""
    dist = category_distribution(reference_corpus)
    checks = [
        (dist.ratios["causal"]["1"], refdata.AGGREGATE_RATIOS["causal"]),
        (dist.ratios["marked"]["0"], refdata.AGGREGATE_RATIOS["unmarked"]),
        (dist.ratios["explicit"]["0"], refdata.AGGREGATE_RATIOS["implicit"]),
        (dist.ratios["single_cause"]["0"], refdata.AGGREGATE_RATIOS["multiple_causes"]),
        (dist.ratios["single_sentence"]["0"], refdata.AGGREGATE_RATIOS["two_sentence"]),
        (dist.ratios["event_chain"]["1"], refdata.AGGREGATE_RATIOS["event_chains"]),
    ]
    for got, expected in checks:
        assert abs(got - expected) <= 0.002, (got, expected)


@acceptance
def test_c4_stratified_independence_reproduction(reference_corpus):
    """Corrected levels exact; all 14 causal-column flags match; p within 10x."""
    start = time.monotonic()
    assert format_p(bonferroni(0.05, 13).corrected_level) == "3.8E-03"
    assert format_p(bonferroni(0.05, 8).corrected_level) == "6.3E-03"
    assert format_p(bonferroni(0.05, 16).corrected_level) == "3.1E-03"
    report = one_vs_rest_tests(reference_corpus, "causal", min_stratum=100, alpha=0.05)
    assert report.m == 13
    by_domain = {r.domain: r for r in report.results}
    assert len(by_domain) == 14
    for domain, (published_p, flag) in refdata.CAUSAL_ONE_VS_REST.items():
        result = by_domain[domain]
        assert result.significant == flag, domain
        assert 0.1 < result.p / published_p < 10.0, (domain, result.p, published_p)
    explicit = one_vs_rest_tests(reference_corpus, "explicit", min_stratum=100)
    assert explicit.m == 8
    ternary = one_vs_rest_tests(reference_corpus, "temporality", min_stratum=100)
    assert ternary.m == 16
    assert time.monotonic() - start < 10.0


@acceptance
def test_c5_detection_harness_substitute():
    """Planted-cue rule accuracy equals the planted rate +-0.01 after
    undersampling and repeated 10-fold CV; a word-based learner beats the
    rule baseline when the signal is lexical rather than cue-based.

    (The original corpus release is not available in this environment,
    so the synthetic substitute criterion applies.)
    """
    lexicon = default_lexicon()
    planted = planted_cue_corpus(2000, agreement_rate=0.65, seed=17, lexicon=lexicon)
    balanced = random_undersample(planted.corpus, seed=17)
    assert len(balanced) == 2000  # construction is balanced already
    rule_report, _ = repeated_cv(
        balanced,
        ClassifierSpec("rule_based", {}, "none"),
        k=10,
        repetitions=5,
        seed=17,
        lexicon=lexicon,
    )
    assert abs(rule_report.accuracy - planted.planted_agreement) <= 0.01
    assert abs(rule_report.causal.f1 - rule_report.accuracy) <= 0.05

    signal = lexical_signal_corpus(600, signal_strength=0.95, seed=18)
    rule_sig, _ = repeated_cv(
        signal, ClassifierSpec("rule_based", {}, "none"), k=10, repetitions=1,
        seed=18, lexicon=lexicon,
    )
    nb_sig, _ = repeated_cv(
        signal,
        ClassifierSpec("naive_bayes", {"alpha": 1, "fit_prior": True}, "BoW"),
        k=10,
        repetitions=1,
        seed=18,
    )
    assert nb_sig.accuracy > rule_sig.accuracy + 0.2
    assert nb_sig.accuracy > 0.85


@acceptance
def test_c6_statistics_oracles():
    """Rank tests and tails against independent oracles; runtime < 60 s."""
    start = time.monotonic()

    # chi-squared upper tail vs high-precision gamma oracle, 1e-10
    rng = np.random.default_rng(99)
    for _ in range(150):
        dof = int(rng.integers(1, 33))
        x = float(rng.uniform(0.0, 200.0))
        oracle = float(mpmath.gammainc(dof / 2, x / 2, mpmath.inf, regularized=True))
        assert abs(chi2_sf(x, dof) - oracle) <= 1e-10

    # Kruskal-Wallis equals the squared-z rank test on 2 groups, 1e-9
    for seed in range(25):
        g = np.random.default_rng(seed)
        a = g.normal(size=int(g.integers(5, 25)))
        b = g.normal(size=int(g.integers(5, 25)))
        _, _, p_kw = kruskal_wallis([a, b])
        _, p_mwu = mann_whitney_u(a, b, method="normal")
        assert abs(p_kw - p_mwu) <= 1e-9

    # effect sizes match hand-derived examples exactly
    assert cohens_d([2, 3, 4], [1, 2, 3]) == pytest.approx(1.0, abs=1e-12)
    assert cohens_d([1, 2, 3], [2, 3, 4]) == pytest.approx(-1.0, abs=1e-12)
    assert eta_squared(h=32 / 7, k=3, n=6) == pytest.approx((32 / 7 - 2) / 3, abs=1e-12)
    assert eta_squared(h=2.0, k=3, n=50) == 0.0

    # exact-permutation agreement for the two-sample rank test on small data
    u, p = mann_whitney_u([1, 2], [3, 4])
    assert u == 0.0 and p == pytest.approx(1 / 3, abs=1e-12)

    # Monte-Carlo power: planted 30% shift rejected in >= 95% of runs
    runs = 1000
    rejections = 0
    for seed in range(runs):
        g = np.random.default_rng(seed)
        a = g.lognormal(3.0, 0.6, 120) * 0.7
        b = g.lognormal(3.0, 0.6, 120)
        _, p = mann_whitney_u(a, b)
        rejections += p < 0.05
    assert rejections / runs >= 0.95

    # Monte-Carlo size: null rejection rate 0.05 +- 0.02 over >= 1000 seeds
    rejections = 0
    for seed in range(runs):
        g = np.random.default_rng(100_000 + seed)
        a = g.lognormal(3.0, 0.6, 100)
        b = g.lognormal(3.0, 0.6, 100)
        _, p = mann_whitney_u(a, b)
        rejections += p < 0.05
    assert 0.03 <= rejections / runs <= 0.07

    assert time.monotonic() - start < 60.0


@acceptance
@pytest.mark.xfail(
    strict=True,
    reason=(
        "verified unattainable: exhaustive enumeration over every tie-free "
        "sample shape with pooled size <= 12 shows the plain normal "
        "approximation deviates from the exact permutation p by more than "
        "0.05 somewhere for every shape (e.g. shape (2,2), U=1: exact 2/3 "
        "vs normal 0.4386)"
    ),
)
def test_c6_exact_vs_normal_within_5pp_literal():
    for n_a in range(1, 12):
        for n_b in range(1, 12):
            n = n_a + n_b
            if n > 12:
                continue
            for combo in itertools.combinations(range(1, n + 1), n_a):
                a = [float(r) for r in combo]
                b = [float(r) for r in range(1, n + 1) if r not in combo]
                _, p_exact = mann_whitney_u(a, b, method="exact")
                _, p_normal = mann_whitney_u(a, b, method="normal")
                assert abs(p_exact - p_normal) <= 0.05, (a, b)


@acceptance
def test_c7_lifecycle_pipeline():
    """Filters remove exactly the planted counts; binning boundaries hold."""
    from test_lifecycle import entry, record

    records = []
    for i in range(2):
        records.append(record(rid=f"missing{i}", entries=[]))
    records.append(
        record(rid="migration", entries=[entry(0, author="importer"), entry(1, author="importer")])
    )
    for i in range(3):
        records.append(record(rid=f"single{i}", entries=[entry(0)]))
    for i in range(4):
        records.append(record(rid=f"ok{i}"))
    kept, report = preprocess(records, invalid_author="importer")
    assert (report.removed_missing_log, report.removed_invalid_author,
            report.removed_single_entry) == (2, 1, 3)
    assert report.kept == 4

    def feats(causal, sentences):
        return DerivedFeatures(
            requirement_id=f"r{causal}x{sentences}",
            lead_time=1.0,
            volatility=2,
            consolidated_state="EC",
            sentence_count=sentences,
            causal_count=causal,
        )

    # causal-count boundaries 0/1/3/4 at the binary and batch granularities
    collection = [feats(0, 8), feats(1, 8), feats(3, 8), feats(4, 8)]
    g1 = bin_granularity(collection, "g1")
    assert len(g1.groups["non_causal"]) == 1
    assert len(g1.groups["causal"]) == 3
    g2 = bin_granularity(collection, "g2", min_batch=0)
    assert [f.causal_count for f in g2.groups["[0]"]] == [0]
    assert sorted(f.causal_count for f in g2.groups["[1, 3]"]) == [1, 3]
    assert [f.causal_count for f in g2.groups["[4, 6]"]] == [4]

    # sentence-count boundaries 3/4/7/8 at the size-binned granularity
    sized = [feats(1, 3), feats(1, 4), feats(1, 7), feats(1, 8)]
    g3 = bin_granularity(sized, "g3")
    assert [f.sentence_count for f in g3.groups["[1, 3] causal"]] == [3]
    assert sorted(f.sentence_count for f in g3.groups["[4, 7] causal"]) == [4, 7]
    assert [f.sentence_count for f in g3.groups["[8, max] causal"]] == [8]


@acceptance
def test_c8_store_determinism(tmp_path):
    """Replaying the log reproduces the export byte-identically; the
    primary suite depends on no secondary component."""
    path = str(tmp_path / "log.jsonl")
    store = LabelStore(path)
    store.submit(
        CausalLabelRecord(
            sentence_id="s2",
            annotator="a1",
            causal=True,
            explicit=True,
            marked=True,
            single_sentence=True,
            single_cause=False,
            single_effect=True,
            event_chain=False,
            relationship="cause",
            temporality="before",
            cue_phrases=("if", "in case of"),
        )
    )
    store.submit(CausalLabelRecord(sentence_id="s1", annotator="a2", causal=False))
    store.submit(CausalLabelRecord(sentence_id="s2", annotator="a1", causal=False))
    store.defer("s3", "a1")
    exported = store.export_labels()
    replayed = LabelStore.replay(path)
    assert replayed.export_labels() == exported
    assert json.loads(exported.splitlines()[1])["causal"] is False

    # no frontend/secondary module is imported anywhere in this suite
    assert not any(name.startswith("frontend") for name in sys.modules)
