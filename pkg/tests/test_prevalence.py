import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import refdata
from causalreq.prevalence import (
    ContingencyTable,
    PrevalenceError,
    bonferroni,
    category_distribution,
    chi2_dof,
    chi2_independence,
    domain_causal_ratios,
    format_p,
    one_vs_rest_tests,
    stratified_report,
)


def table_2xk(rows):
    return ContingencyTable(
        rows=("r0", "r1"),
        columns=tuple(f"c{i}" for i in range(len(rows[0]))),
        counts=tuple(tuple(r) for r in rows),
    )


class TestDof:
    def test_2x9(self):
        table = table_2xk([[1] * 9, [1] * 9])
        assert chi2_dof(table) == 8

    def test_2x2(self):
        assert chi2_dof(table_2xk([[1, 1], [1, 1]])) == 1

    def test_3x9(self):
        table = ContingencyTable(
            rows=("a", "b", "c"),
            columns=tuple(f"c{i}" for i in range(9)),
            counts=tuple(tuple([1] * 9) for _ in range(3)),
        )
        assert chi2_dof(table) == 16
        assert format_p(bonferroni(0.05, 16).corrected_level) == "3.1E-03"

    def test_degenerate_rejected(self):
        with pytest.raises(PrevalenceError):
            ContingencyTable(rows=("a",), columns=("x", "y"), counts=((1, 2),))


class TestChi2Independence:
    def test_uniform_table_is_independent(self):
        stat, dof, p = chi2_independence(table_2xk([[10, 10], [10, 10]]))
        assert stat == 0.0
        assert dof == 1
        assert p == 1.0

    def test_zero_marginal_rejected(self):
        with pytest.raises(PrevalenceError, match="zero marginal"):
            chi2_independence(table_2xk([[0, 0], [5, 5]]))

    def test_column_permutation_invariance(self):
        t1 = table_2xk([[12, 5, 9], [3, 14, 6]])
        t2 = table_2xk([[9, 12, 5], [6, 3, 14]])
        assert chi2_independence(t1)[0] == pytest.approx(chi2_independence(t2)[0])
        assert chi2_independence(t1)[2] == pytest.approx(chi2_independence(t2)[2])

    def test_yates_reduces_statistic(self):
        table = table_2xk([[12, 5], [3, 14]])
        plain = chi2_independence(table)[0]
        corrected = chi2_independence(table, continuity=True)[0]
        assert corrected < plain

    def test_against_exact_multinomial_enumeration(self):
        """Oracle: exhaustive multinomial null enumeration for small tables.

        Under independence with cell probabilities from the observed
        marginals, p = P(chi2(T) >= chi2(observed)) over every table with
        the same total. Expected counts are kept moderate so the
        asymptotic approximation is within 5e-3 of the exact tail.
        """

        def independence_stat(a, b, c, d):
            n = a + b + c + d
            rows = (a + b, c + d)
            cols = (a + c, b + d)
            if 0 in rows or 0 in cols:
                return 0.0
            stat = 0.0
            for count, (i, j) in zip((a, b, c, d), ((0, 0), (0, 1), (1, 0), (1, 1))):
                expected = rows[i] * cols[j] / n
                stat += (count - expected) ** 2 / expected
            return stat

        def exact_p(obs):
            n = sum(sum(r) for r in obs)
            rows = [sum(r) for r in obs]
            cols = [obs[0][j] + obs[1][j] for j in range(2)]
            flat = [
                rows[i] * cols[j] / (n * n) for i in range(2) for j in range(2)
            ]
            obs_stat = independence_stat(obs[0][0], obs[0][1], obs[1][0], obs[1][1])
            total_p = 0.0
            log_n_fact = math.lgamma(n + 1)
            for a in range(n + 1):
                for b in range(n + 1 - a):
                    for c in range(n + 1 - a - b):
                        d = n - a - b - c
                        if independence_stat(a, b, c, d) >= obs_stat - 1e-12:
                            log_prob = (
                                log_n_fact
                                - math.lgamma(a + 1)
                                - math.lgamma(b + 1)
                                - math.lgamma(c + 1)
                                - math.lgamma(d + 1)
                                + (a * math.log(flat[0]) if a else 0.0)
                                + (b * math.log(flat[1]) if b else 0.0)
                                + (c * math.log(flat[2]) if c else 0.0)
                                + (d * math.log(flat[3]) if d else 0.0)
                            )
                            total_p += math.exp(log_prob)
            return total_p

        tables = [
            [[6, 8], [13, 13]],
            [[6, 11], [13, 10]],
            [[6, 12], [13, 9]],
        ]
        for obs in tables:
            stat, _, p = chi2_independence(table_2xk(obs))
            assert p == pytest.approx(exact_p(obs), abs=5e-3), obs


class TestBonferroni:
    def test_published_levels(self):
        assert bonferroni(0.05, 8).corrected_level == pytest.approx(0.00625)
        assert format_p(bonferroni(0.05, 8).corrected_level) == "6.3E-03"
        assert format_p(bonferroni(0.05, 13).corrected_level) == "3.8E-03"

    def test_identity_with_single_comparison(self):
        assert bonferroni(0.05, 1).corrected_level == 0.05

    def test_guards(self):
        with pytest.raises(PrevalenceError):
            bonferroni(0.05, 0)
        with pytest.raises(PrevalenceError):
            bonferroni(1.5, 3)


class TestCategoryDistribution:
    def test_reference_ratios(self, reference_corpus):
        dist = category_distribution(reference_corpus)
        causal_ratio = dist.ratios["causal"]["1"]
        assert causal_ratio == pytest.approx(refdata.AGGREGATE_RATIOS["causal"], abs=0.002)
        assert dist.ratios["marked"]["0"] == pytest.approx(
            refdata.AGGREGATE_RATIOS["unmarked"], abs=0.002
        )
        assert dist.ratios["explicit"]["0"] == pytest.approx(
            refdata.AGGREGATE_RATIOS["implicit"], abs=0.002
        )
        assert dist.ratios["single_cause"]["0"] == pytest.approx(
            refdata.AGGREGATE_RATIOS["multiple_causes"], abs=0.002
        )
        assert dist.ratios["single_sentence"]["0"] == pytest.approx(
            refdata.AGGREGATE_RATIOS["two_sentence"], abs=0.002
        )
        assert dist.ratios["event_chain"]["1"] == pytest.approx(
            refdata.AGGREGATE_RATIOS["event_chains"], abs=0.002
        )

    def test_single_causal_sentence(self, tmp_path):
        from conftest import causal_label, sentence_row, write_jsonl
        from causalreq.corpus import load_corpus

        corpus = load_corpus(
            str(write_jsonl(tmp_path / "c.jsonl", [sentence_row(labels=[causal_label()])]))
        )
        dist = category_distribution(corpus)
        assert dist.ratios["causal"]["1"] == 1.0

    def test_empty_corpus_rejected(self):
        from causalreq.corpus import LabeledCorpus

        with pytest.raises(PrevalenceError):
            category_distribution(LabeledCorpus([], []))


class TestOneVsRest:
    def test_causal_flags_match_reference(self, reference_corpus):
        report = one_vs_rest_tests(reference_corpus, "causal", min_stratum=100)
        assert report.m == 13
        assert format_p(report.corrected_level) == "3.8E-03"
        assert set(report.excluded) == set(refdata.EXCLUDED_DOMAINS)
        by_domain = {r.domain: r for r in report.results}
        assert len(by_domain) == 14
        for domain, (published_p, flag) in refdata.CAUSAL_ONE_VS_REST.items():
            result = by_domain[domain]
            assert result.significant == flag, domain
            ratio = result.p / published_p
            assert 0.1 < ratio < 10.0, (domain, result.p, published_p)

    def test_dependent_category_eligibility(self, reference_corpus):
        report = one_vs_rest_tests(reference_corpus, "explicit", min_stratum=100)
        assert report.m == 8
        assert format_p(report.corrected_level) == "6.3E-03"
        domains = {r.domain for r in report.results}
        assert domains == {
            "Aerospace",
            "Astronomy",
            "Banking",
            "Data Analytics",
            "Health",
            "Infrastructure",
            "Smart City",
            "Sustainability",
            "Telecomm",
        }
        by_domain = {r.domain: r for r in report.results}
        assert by_domain["Sustainability"].significant
        assert by_domain["Sustainability"].p == pytest.approx(1.2e-4, rel=0.5)
        assert by_domain["Sustainability"].p < 0.00625

    def test_ternary_uses_16_comparisons(self, reference_corpus):
        report = one_vs_rest_tests(reference_corpus, "temporality", min_stratum=100)
        assert report.m == 16
        assert format_p(report.corrected_level) == "3.1E-03"

    def test_too_few_strata_rejected(self, tmp_path):
        from conftest import causal_label, sentence_row, write_jsonl
        from causalreq.corpus import load_corpus

        rows = [sentence_row(labels=[causal_label()])]
        corpus = load_corpus(str(write_jsonl(tmp_path / "c.jsonl", rows)))
        with pytest.raises(PrevalenceError, match="fewer than 2"):
            one_vs_rest_tests(corpus, "causal", min_stratum=1)


class TestStratifiedReport:
    def test_report_covers_all_categories(self, reference_corpus):
        report = stratified_report(reference_corpus, min_stratum=100)
        assert "causal" in report.categories
        assert "temporality" in report.categories
        text = report.to_text()
        assert "Aerospace" in text
        assert "3.8E-03" in text

    def test_ratio_series(self, reference_corpus):
        series = domain_causal_ratios(reference_corpus, min_stratum=100)
        assert len(series) == 14
        by_domain = dict((d, r) for d, r, _ in series)
        assert by_domain["Aerospace"] == pytest.approx(1664 / 5510, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    cells=st.tuples(
        st.integers(1, 60), st.integers(1, 60), st.integers(1, 60), st.integers(1, 60)
    )
)
def test_chi2_properties(cells):
    a, b, c, d = cells
    table = table_2xk([[a, b], [c, d]])
    stat, dof, p = chi2_independence(table)
    assert stat >= 0.0
    assert 0.0 <= p <= 1.0
    swapped = table_2xk([[b, a], [d, c]])
    stat2, _, p2 = chi2_independence(swapped)
    assert stat == pytest.approx(stat2, rel=1e-9, abs=1e-9)
    assert p == pytest.approx(p2, rel=1e-9, abs=1e-12)
