import logging

import pytest

import refdata
from causalreq.lexicon import match_cues
from causalreq.synth import (
    SAFE_WORDS,
    corpus_from_profiles,
    lexical_signal_corpus,
    planted_cue_corpus,
)


class TestSafeVocabulary:
    def test_safe_words_never_match_the_lexicon(self, lexicon):
        for word in SAFE_WORDS:
            assert match_cues(word, lexicon) == [], word

    def test_plain_sentences_carry_no_cues(self, lexicon):
        planted = planted_cue_corpus(200, agreement_rate=1.0, seed=0, lexicon=lexicon)
        gold = planted.corpus.gold_causal()
        for sentence in planted.corpus.sentences:
            matched = bool(match_cues(sentence.text, lexicon))
            assert matched == gold[sentence.id]


class TestProfileCorpus:
    def test_marginals_reproduced_exactly(self, reference_corpus):
        per_domain = {}
        for s in reference_corpus.sentences:
            rec = reference_corpus.gold_label(s.id)
            bucket = per_domain.setdefault(s.domain, {"n": 0, "causal": 0, "explicit": 0})
            bucket["n"] += 1
            bucket["causal"] += rec.causal
            if rec.causal:
                bucket["explicit"] += rec.explicit
        for profile in refdata.DOMAIN_PROFILES:
            bucket = per_domain[profile.domain]
            assert bucket["n"] == profile.sentences
            assert bucket["causal"] == profile.causal
            assert bucket["explicit"] == profile.explicit

    def test_two_sentence_column_inverts_polarity(self, reference_corpus, caplog):
        single_false = sum(
            1
            for s in reference_corpus.sentences
            if (rec := reference_corpus.gold_label(s.id)).causal
            and rec.single_sentence is False
        )
        assert single_false == sum(p.two_sentence for p in refdata.DOMAIN_PROFILES)

    def test_inversion_logs_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="causalreq.synth"):
            corpus_from_profiles([refdata.DOMAIN_PROFILES[0]], seed=0)
        assert any("inverted polarity" in r.message for r in caplog.records)

    def test_relationship_counts_preserved_verbatim(self, reference_corpus):
        from collections import Counter

        counts = Counter()
        for s in reference_corpus.sentences:
            rec = reference_corpus.gold_label(s.id)
            if rec.causal and rec.relationship:
                counts[rec.relationship] += 1
        assert counts["cause"] == 1397
        assert counts["enable"] == 552
        assert counts["prevent"] == 48

    def test_temporality_counts_preserved_verbatim(self, reference_corpus):
        from collections import Counter

        counts = Counter()
        for s in reference_corpus.sentences:
            rec = reference_corpus.gold_label(s.id)
            if rec.causal and rec.temporality:
                counts[rec.temporality] += 1
        assert counts["before"] == 2044
        assert counts["overlap"] == 1801
        assert counts["during"] == 370


class TestPlantedCorpus:
    def test_classes_balanced(self, lexicon):
        planted = planted_cue_corpus(400, agreement_rate=0.65, seed=1, lexicon=lexicon)
        gold = planted.corpus.gold_causal()
        assert sum(gold.values()) == 200

    def test_achieved_rate_close_to_requested(self, lexicon):
        planted = planted_cue_corpus(400, agreement_rate=0.65, seed=1, lexicon=lexicon)
        assert planted.planted_agreement == pytest.approx(0.65, abs=0.005)

    def test_rule_agreement_is_exactly_planted(self, lexicon):
        from causalreq.detector import rule_based_classify

        planted = planted_cue_corpus(200, agreement_rate=0.8, seed=2, lexicon=lexicon)
        gold = planted.corpus.gold_causal()
        agree = sum(
            1
            for s in planted.corpus.sentences
            if rule_based_classify(s.text, lexicon).label == gold[s.id]
        )
        assert agree / len(gold) == pytest.approx(planted.planted_agreement, abs=1e-12)

    def test_odd_n_rejected(self, lexicon):
        with pytest.raises(ValueError):
            planted_cue_corpus(41, agreement_rate=0.6, seed=0, lexicon=lexicon)


class TestLexicalSignalCorpus:
    def test_every_sentence_has_a_cue(self, lexicon):
        corpus = lexical_signal_corpus(100, seed=3)
        for sentence in corpus.sentences:
            assert match_cues(sentence.text, lexicon), sentence.text

    def test_marker_words_track_labels(self):
        corpus = lexical_signal_corpus(300, signal_strength=1.0, seed=4)
        gold = corpus.gold_causal()
        for sentence in corpus.sentences:
            has_positive = "promptly" in sentence.text
            assert has_positive == gold[sentence.id]
