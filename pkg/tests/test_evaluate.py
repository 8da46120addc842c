import random

import pytest

from alignseg import (
    AneScore,
    Corpus,
    DataError,
    LexiconEntry,
    Utterance,
    boundary_prf,
    concat_check,
    cross_model_overlap,
    extract_lexicon,
    segmentation_from_boundaries,
    token_prf,
    type_prf,
)
from alignseg.evaluate import lexicon_report_tsv, score_report_tsv


def gold_corpus(entries, lang="fr"):
    """entries: list of (utt_id, phonemes, gold_boundaries)."""
    utts = tuple(
        Utterance(id=utt_id, phonemes=tuple(phonemes),
                  translations={lang: ("w",)}, gold_boundaries=frozenset(bounds))
        for utt_id, phonemes, bounds in entries
    )
    return Corpus(utterances=utts, languages=(lang,))


def hyp(utt_id, phonemes, boundaries, lang="fr", words=None):
    return segmentation_from_boundaries(utt_id, tuple(phonemes),
                                        frozenset(boundaries), lang, words)


PHON6 = [f"p{i}" for i in range(6)]


class TestBoundaryPrf:
    def test_worked_example(self):
        gold = gold_corpus([("u1", PHON6, {2, 3})])
        score = boundary_prf([hyp("u1", PHON6, {2, 4})], gold)
        assert (score.precision, score.recall, score.f1) == (0.5, 0.5, 0.5)
        assert (score.hits, score.hyp_count, score.gold_count) == (1, 2, 2)

    def test_identity_scores_one(self):
        gold = gold_corpus([("u1", PHON6, {2, 3}), ("u2", PHON6, {1})])
        hyps = [hyp("u1", PHON6, {2, 3}), hyp("u2", PHON6, {1})]
        score = boundary_prf(hyps, gold)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_empty_hypothesis_convention(self):
        gold = gold_corpus([("u1", PHON6, {1})])
        score = boundary_prf([hyp("u1", PHON6, set())], gold)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_micro_average_pools_counts(self):
        gold = gold_corpus([("u1", PHON6, {1, 2, 3}), ("u2", PHON6, {1})])
        hyps = [hyp("u1", PHON6, {1}), hyp("u2", PHON6, {1, 2})]
        score = boundary_prf(hyps, gold)
        assert score.hits == 2
        assert score.precision == pytest.approx(2 / 3)
        assert score.recall == pytest.approx(2 / 4)

    def test_single_word_utterances_contribute_nothing(self):
        gold = gold_corpus([("u1", PHON6, set()), ("u2", PHON6, {1})])
        hyps = [hyp("u1", PHON6, set()), hyp("u2", PHON6, {1})]
        score = boundary_prf(hyps, gold)
        assert (score.hits, score.hyp_count, score.gold_count) == (1, 1, 1)

    def test_swapping_hyp_and_gold_swaps_p_and_r(self):
        rng = random.Random(51)
        for _ in range(100):
            a = {b for b in range(1, 6) if rng.random() < 0.4}
            b = {b2 for b2 in range(1, 6) if rng.random() < 0.4}
            s1 = boundary_prf([hyp("u1", PHON6, a)], gold_corpus([("u1", PHON6, b)]))
            s2 = boundary_prf([hyp("u1", PHON6, b)], gold_corpus([("u1", PHON6, a)]))
            assert s1.precision == s2.recall
            assert s1.recall == s2.precision
            assert s1.hits == s2.hits

    def test_adding_gold_boundary_never_hurts_recall(self):
        rng = random.Random(53)
        for _ in range(100):
            gold_b = {b for b in range(1, 6) if rng.random() < 0.5}
            if not gold_b:
                continue
            hyp_b = {b for b in range(1, 6) if rng.random() < 0.5}
            gold = gold_corpus([("u1", PHON6, gold_b)])
            base = boundary_prf([hyp("u1", PHON6, hyp_b)], gold)
            extra = random.Random(rng.random()).choice(sorted(gold_b))
            grown = boundary_prf([hyp("u1", PHON6, hyp_b | {extra})], gold)
            assert grown.recall >= base.recall
            removable = hyp_b - gold_b
            if removable:
                shrunk = boundary_prf(
                    [hyp("u1", PHON6, hyp_b - {sorted(removable)[0]})], gold
                )
                assert shrunk.precision >= base.precision

    def test_missing_gold_rejected(self):
        corpus = Corpus(
            utterances=(Utterance(id="u1", phonemes=tuple(PHON6),
                                  translations={"fr": ("w",)}),),
            languages=("fr",),
        )
        with pytest.raises(DataError, match="gold"):
            boundary_prf([hyp("u1", PHON6, {1})], corpus)

    def test_phoneme_mismatch_rejected(self):
        gold = gold_corpus([("u1", PHON6, {1})])
        with pytest.raises(DataError, match="u1"):
            boundary_prf([hyp("u1", ["q"] * 6, {1})], gold)

    def test_duplicate_hypothesis_rejected(self):
        gold = gold_corpus([("u1", PHON6, {1})])
        with pytest.raises(DataError):
            boundary_prf([hyp("u1", PHON6, {1}), hyp("u1", PHON6, {2})], gold)


class TestTokenTypePrf:
    def test_perfect_hypothesis(self):
        gold = gold_corpus([("u1", PHON6, {2, 3})])
        hyps = [hyp("u1", PHON6, {2, 3})]
        assert token_prf(hyps, gold).f1 == 1.0
        assert type_prf(hyps, gold).f1 == 1.0

    def test_token_needs_both_edges(self):
        gold = gold_corpus([("u1", PHON6, {3})])
        score = token_prf([hyp("u1", PHON6, {2, 3})], gold)
        # only the (3, 6) span survives: (0, 2) and (2, 3) match nothing
        assert score.hits == 1
        assert score.hyp_count == 3
        assert score.gold_count == 2

    def test_type_counts_distinct_strings(self):
        gold = gold_corpus([("u1", ["a", "b", "a", "b"], {2})])
        score = type_prf([hyp("u1", ["a", "b", "a", "b"], {2})], gold)
        # both gold words are the string "ab": one shared type
        assert (score.hits, score.hyp_count, score.gold_count) == (1, 1, 1)


def run_pair(utt_id, phonemes, boundaries, words, ane_value, lang="fr"):
    seg = hyp(utt_id, phonemes, boundaries, lang=lang, words=words)
    return seg, AneScore(utt_id, lang, ane_value)


class TestExtractLexicon:
    def test_groups_and_keeps_best_ane(self):
        runs = [
            run_pair("u1", ["i", "t", "u", "a"], set(), ["village"], 0.4),
            run_pair("u2", ["i", "t", "u", "a"], set(), ["village"], 0.2),
        ]
        (entry,) = extract_lexicon(runs)
        assert entry == LexiconEntry(discovered_type="itua",
                                     translation_word="village",
                                     best_ane=0.2, frequency=2)

    def test_empty_run(self):
        assert extract_lexicon([]) == []

    def test_voted_run_rejected(self):
        seg = hyp("u1", PHON6, {2}, lang="vote(T=0.5)")
        with pytest.raises(DataError, match="voted"):
            extract_lexicon([(seg, AneScore("u1", "vote(T=0.5)", 0.5))])

    def test_wordless_run_rejected(self):
        seg = hyp("u1", PHON6, set())  # words default to None
        with pytest.raises(DataError):
            extract_lexicon([(seg, AneScore("u1", "fr", 0.5))])

    def test_null_aligned_segments_skipped(self):
        runs = [run_pair("u1", ["a", "b", "c"], {1}, [None, "chien"], 0.3)]
        (entry,) = extract_lexicon(runs)
        assert entry.discovered_type == "bc"
        assert entry.translation_word == "chien"

    def test_sort_order_and_permutation_stability(self):
        runs = [
            run_pair("u1", ["a", "b"], {1}, ["w1", "w2"], 0.5),
            run_pair("u2", ["a", "c"], {1}, ["w1", "w3"], 0.3),
            run_pair("u3", ["c", "d"], {1}, ["w3", "w4"], 0.3),
        ]
        entries = extract_lexicon(runs)
        keys = [(e.best_ane, -e.frequency, e.discovered_type, e.translation_word)
                for e in entries]
        assert keys == sorted(keys)
        assert entries[0].discovered_type == "a"  # ane 0.3, freq 2 beats freq 1
        shuffled = [runs[2], runs[0], runs[1]]
        assert extract_lexicon(shuffled) == entries


class TestConcatCheck:
    def test_exact(self):
        assert concat_check("itua", {"itua", "nga"}) == "exact"

    def test_concat_of_two(self):
        assert concat_check("obonga", {"obo", "nga"}) == "concat2"

    def test_same_part_twice(self):
        assert concat_check("abab", {"ab"}) == "concat2"

    def test_exact_wins_over_concat(self):
        assert concat_check("abab", {"ab", "abab"}) == "exact"

    def test_none(self):
        assert concat_check("xyz", {"a", "b"}) == "none"

    def test_empty_discovered_rejected(self):
        with pytest.raises(DataError):
            concat_check("", {"a"})

    def test_empty_gold_rejected(self):
        with pytest.raises(DataError):
            concat_check("a", set())


def lexicon(types, lang="fr"):
    return [
        LexiconEntry(discovered_type=t, translation_word=f"{lang}_{t}",
                     best_ane=0.1 * i, frequency=1)
        for i, t in enumerate(types)
    ]


class TestCrossModelOverlap:
    def test_identical_lexicons_all_shared(self):
        types = ["t1", "t2", "t3", "t4", "t5"]
        report = cross_model_overlap({"fr": lexicon(types), "en": lexicon(types, "en")},
                                     k=5)
        assert set(report.in_all) == set(types)
        assert report.in_some == ()
        assert report.in_one == ()

    def test_disjoint_lexicons(self):
        report = cross_model_overlap(
            {"fr": lexicon(["a", "b"]), "en": lexicon(["c", "d"], "en")}, k=5
        )
        assert report.in_all == ()
        assert set(report.in_one) == {"a", "b", "c", "d"}

    def test_partial_overlap_with_three_languages(self):
        report = cross_model_overlap(
            {
                "fr": lexicon(["x", "y"]),
                "en": lexicon(["x", "z"], "en"),
                "pt": lexicon(["x", "y"], "pt"),
            },
            k=2,
        )
        assert report.in_all == ("x",)
        assert report.in_some == ("y",)
        assert report.in_one == ("z",)

    def test_k_limits_entries(self):
        report = cross_model_overlap(
            {"fr": lexicon(["a", "b", "c"]), "en": lexicon(["a", "b", "c"], "en")}, k=1
        )
        assert report.in_all == ("a",)

    def test_k_validated(self):
        with pytest.raises(DataError):
            cross_model_overlap({"fr": lexicon(["a"])}, k=0)


class TestReports:
    def test_score_report_shape(self):
        gold = gold_corpus([("u1", PHON6, {2, 3})])
        score = boundary_prf([hyp("u1", PHON6, {2, 4})], gold)
        text = score_report_tsv({"boundary": score})
        lines = text.splitlines()
        assert lines[0] == "metric\tprecision\trecall\tf1\thits\thyp\tgold"
        assert lines[1] == "boundary\t0.500000\t0.500000\t0.500000\t1\t2\t2"

    def test_lexicon_report_concat_status(self):
        entries = [LexiconEntry("ab", "w", 0.25, 3), LexiconEntry("zz", "v", 0.5, 1)]
        text = lexicon_report_tsv(entries, gold_types={"a", "b"})
        lines = text.splitlines()
        assert lines[1].split("\t") == ["1", "ab", "w", "0.250000", "3", "concat2"]
        assert lines[2].split("\t") == ["2", "zz", "v", "0.500000", "1", "none"]

    def test_lexicon_report_top_k(self):
        entries = [LexiconEntry(f"t{i}", "w", 0.1 * i, 1) for i in range(5)]
        text = lexicon_report_tsv(entries, top=2)
        assert len(text.splitlines()) == 3
