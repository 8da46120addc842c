"""Scoring against gold segmentations and lexicon extraction.

Boundary precision/recall/F are micro-averaged over the corpus and count
internal boundaries only; utterance edges never score.  Token and type
F-scores are provided as standard companions.  The discovered lexicon
ranks (segment, translation word) pairs by their best (lowest) sentence
ANE.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus
from .errors import DataError
from .segmenter import AneScore, Segmentation

EXACT = "exact"
CONCAT2 = "concat2"
NONE = "none"


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float
    hits: int
    hyp_count: int
    gold_count: int


@dataclass(frozen=True)
class LexiconEntry:
    discovered_type: str
    translation_word: str
    best_ane: float
    frequency: int


@dataclass(frozen=True)
class OverlapReport:
    """Cross-model agreement of top-k lexicon types."""

    k: int
    languages: tuple[str, ...]
    in_all: tuple[str, ...]
    in_some: tuple[str, ...]  # more than one language, but not all
    in_one: tuple[str, ...]


def _prf(hits: int, hyp_count: int, gold_count: int) -> PrfScore:
    precision = hits / hyp_count if hyp_count else 0.0
    recall = hits / gold_count if gold_count else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PrfScore(precision, recall, f1, hits, hyp_count, gold_count)


def _paired_with_gold(hyps: list[Segmentation], gold: Corpus):
    seen: set[str] = set()
    for seg in hyps:
        if seg.utterance_id in seen:
            raise DataError(f"duplicate utterance id {seg.utterance_id!r} in hypothesis")
        seen.add(seg.utterance_id)
        utt = gold.by_id(seg.utterance_id)
        if utt.gold_boundaries is None:
            raise DataError(f"utterance {utt.id!r} has no gold segmentation")
        if seg.phonemes != utt.phonemes:
            raise DataError(
                f"utterance {utt.id!r}: hypothesis phonemes do not match the corpus"
            )
        yield seg, utt


def boundary_prf(hyps: list[Segmentation], gold: Corpus) -> PrfScore:
    """Corpus-level boundary precision/recall/F against gold boundaries."""
    hits = hyp_count = gold_count = 0
    for seg, utt in _paired_with_gold(hyps, gold):
        hits += len(seg.boundaries & utt.gold_boundaries)
        hyp_count += len(seg.boundaries)
        gold_count += len(utt.gold_boundaries)
    return _prf(hits, hyp_count, gold_count)


def _spans(length: int, boundaries: frozenset[int]) -> set[tuple[int, int]]:
    cuts = sorted(boundaries) + [length]
    spans = set()
    start = 0
    for b in cuts:
        spans.add((start, b))
        start = b
    return spans


def token_prf(hyps: list[Segmentation], gold: Corpus) -> PrfScore:
    """Word-token F: a hypothesized segment scores when both its edges
    match a gold word exactly."""
    hits = hyp_count = gold_count = 0
    for seg, utt in _paired_with_gold(hyps, gold):
        hyp_spans = _spans(seg.length, seg.boundaries)
        gold_spans = _spans(len(utt.phonemes), utt.gold_boundaries)
        hits += len(hyp_spans & gold_spans)
        hyp_count += len(hyp_spans)
        gold_count += len(gold_spans)
    return _prf(hits, hyp_count, gold_count)


def type_prf(hyps: list[Segmentation], gold: Corpus) -> PrfScore:
    """Word-type F over distinct segment strings, corpus-wide."""
    hyp_types: set[str] = set()
    gold_types: set[str] = set()
    for seg, utt in _paired_with_gold(hyps, gold):
        hyp_types.update("".join(s.phonemes) for s in seg.segments)
        for start, end in _spans(len(utt.phonemes), utt.gold_boundaries):
            gold_types.add("".join(utt.phonemes[start:end]))
    hits = len(hyp_types & gold_types)
    return _prf(hits, len(hyp_types), len(gold_types))


def extract_lexicon(runs: list[tuple[Segmentation, AneScore]]) -> list[LexiconEntry]:
    """Group segments into (discovered type, translation word) entries.

    frequency counts occurrences; best_ane is the minimum sentence ANE
    among them.  Output is sorted by ascending best_ane, then descending
    frequency, then type.  Voted runs carry no aligned words and are
    rejected.
    """
    grouped: dict[tuple[str, str], tuple[float, int]] = {}
    saw_segment = False
    for seg, score in runs:
        if seg.source_language.startswith("vote("):
            raise DataError(
                "voted runs carry no aligned words; extract the lexicon from "
                "bilingual or ANE-selected runs"
            )
        for s in seg.segments:
            saw_segment = True
            if s.word is None:
                continue
            key = ("".join(s.phonemes), s.word)
            if key in grouped:
                best, freq = grouped[key]
                grouped[key] = (min(best, score.value), freq + 1)
            else:
                grouped[key] = (score.value, 1)
    if saw_segment and not grouped:
        raise DataError(
            "no segment carries an aligned word; extract the lexicon from "
            "bilingual or ANE-selected runs"
        )
    entries = [
        LexiconEntry(discovered_type=t, translation_word=w, best_ane=best, frequency=freq)
        for (t, w), (best, freq) in grouped.items()
    ]
    entries.sort(key=lambda e: (e.best_ane, -e.frequency, e.discovered_type,
                                e.translation_word))
    return entries


def concat_check(discovered_type: str, gold_types: set[str]) -> str:
    """Classify a discovered type against the gold lexicon: ``exact``
    membership, ``concat2`` when it is some g1+g2 with both halves gold
    types (g1 may equal g2), else ``none``."""
    if not discovered_type:
        raise DataError("empty discovered type")
    if not gold_types:
        raise DataError("empty gold type set")
    if discovered_type in gold_types:
        return EXACT
    for g1 in gold_types:
        if g1 and discovered_type.startswith(g1) and discovered_type[len(g1):] in gold_types:
            return CONCAT2
    return NONE


def cross_model_overlap(
    lexicons: dict[str, list[LexiconEntry]],
    k: int,
) -> OverlapReport:
    """Bucket the types appearing in each language's top-k entries by how
    many languages share them."""
    if k < 1:
        raise DataError("k must be >= 1")
    if not lexicons:
        raise DataError("no lexicons to compare")
    languages = tuple(lexicons)
    top_types = {
        lang: {e.discovered_type for e in entries[:k]} for lang, entries in lexicons.items()
    }
    membership: dict[str, int] = {}
    for types in top_types.values():
        for t in types:
            membership[t] = membership.get(t, 0) + 1
    in_all = tuple(sorted(t for t, n in membership.items() if n == len(languages)))
    in_one = tuple(sorted(t for t, n in membership.items()
                          if n == 1 and len(languages) > 1))
    in_some = tuple(sorted(t for t, n in membership.items()
                           if 1 < n < len(languages)))
    return OverlapReport(k=k, languages=languages, in_all=in_all,
                         in_some=in_some, in_one=in_one)


SCORE_HEADER = ("metric", "precision", "recall", "f1", "hits", "hyp", "gold")


def score_report_tsv(scores: dict[str, PrfScore]) -> str:
    """Render named scores as the TSV report format."""
    lines = ["\t".join(SCORE_HEADER)]
    for metric, s in scores.items():
        lines.append("\t".join([
            metric,
            f"{s.precision:.6f}",
            f"{s.recall:.6f}",
            f"{s.f1:.6f}",
            str(s.hits),
            str(s.hyp_count),
            str(s.gold_count),
        ]))
    return "\n".join(lines) + "\n"


LEXICON_HEADER = ("rank", "type", "translation", "best_ane", "freq", "concat_status")


def lexicon_report_tsv(
    entries: list[LexiconEntry],
    top: int | None = None,
    gold_types: set[str] | None = None,
) -> str:
    """Render ranked lexicon entries; concat_status is filled only when a
    gold lexicon is supplied."""
    lines = ["\t".join(LEXICON_HEADER)]
    shown = entries if top is None else entries[:top]
    for rank, e in enumerate(shown, start=1):
        status = "" if gold_types is None else concat_check(e.discovered_type, gold_types)
        lines.append("\t".join([
            str(rank),
            e.discovered_type,
            e.translation_word,
            f"{e.best_ane:.6f}",
            str(e.frequency),
            status,
        ]))
    return "\n".join(lines) + "\n"
