"""Combining per-language segmentations of the same corpus.

Two strategies: boundary voting under an agreement threshold, and
per-sentence selection of the most confident (lowest-ANE) model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .segmenter import AneScore, Segmentation, segmentation_from_boundaries

# Guards the count >= T*N comparison against float noise in T*N
# (e.g. 0.6 * 5 evaluating above 3), so boundaries sitting exactly at
# the threshold are kept.
_THRESHOLD_EPS = 1e-9


@dataclass(frozen=True)
class VoteConfig:
    threshold: float
    languages: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise DataError(f"vote threshold {self.threshold!r} outside [0, 1]")
        if len(self.languages) < 2:
            raise DataError("voting needs at least 2 languages")
        if len(set(self.languages)) != len(self.languages):
            raise DataError("vote languages must be distinct")


@dataclass(frozen=True)
class SelectionResult:
    utterance_id: str
    chosen_language: str
    segmentation: Segmentation
    ane_values: dict[str, float]


def vote_tag(threshold: float) -> str:
    """Language tag carried by voted segmentations, e.g. ``vote(T=0.5)``."""
    return f"vote(T={threshold:g})"


def vote(per_language: dict[str, Segmentation], cfg: VoteConfig) -> Segmentation:
    """Merge one utterance's per-language boundary sets by agreement.

    A boundary survives when at least max(1, T*N) of the N configured
    languages propose it: T=0 gives the union of all proposed
    boundaries, T=1 the intersection.  Aligned words are dropped (the
    sources disagree), so voted segments carry no word.
    """
    for lang in cfg.languages:
        if lang not in per_language:
            raise DataError(f"vote input missing language {lang!r}")
    segs = [per_language[lang] for lang in cfg.languages]
    ref = segs[0]
    for seg in segs[1:]:
        if seg.utterance_id != ref.utterance_id:
            raise DataError(
                f"vote inputs mix utterances {ref.utterance_id!r} and {seg.utterance_id!r}"
            )
        if seg.length != ref.length or seg.phonemes != ref.phonemes:
            raise DataError(
                f"utterance {ref.utterance_id!r}: phoneme sequences differ across languages"
            )

    counts: dict[int, int] = {}
    for seg in segs:
        for b in seg.boundaries:
            counts[b] = counts.get(b, 0) + 1
    needed = max(1.0, cfg.threshold * len(cfg.languages)) - _THRESHOLD_EPS
    kept = frozenset(b for b, c in counts.items() if c >= needed)
    return segmentation_from_boundaries(
        ref.utterance_id, ref.phonemes, kept, vote_tag(cfg.threshold)
    )


def ane_select(
    per_language: dict[str, tuple[Segmentation, AneScore]],
    priority: tuple[str, ...] | list[str],
) -> SelectionResult:
    """Pick the lowest-ANE model's segmentation for one utterance.

    Ties break toward the language listed earliest in ``priority``; the
    chosen segmentation is returned unchanged.
    """
    if not per_language:
        raise DataError("ane_select needs at least one language")
    priority = tuple(priority)
    missing = [lang for lang in per_language if lang not in priority]
    if missing:
        raise DataError(f"priority list does not cover languages {missing}")
    ref_id = next(iter(per_language.values()))[0].utterance_id
    for lang, (seg, score) in per_language.items():
        if seg.utterance_id != ref_id or score.utterance_id != ref_id:
            raise DataError(
                f"ane_select inputs mix utterances {ref_id!r} and {seg.utterance_id!r}"
            )
    chosen = min(per_language, key=lambda lang: (per_language[lang][1].value,
                                                 priority.index(lang)))
    return SelectionResult(
        utterance_id=ref_id,
        chosen_language=chosen,
        segmentation=per_language[chosen][0],
        ane_values={lang: per_language[lang][1].value for lang in per_language},
    )


def _index_runs(
    per_language_runs: dict[str, list[tuple[Segmentation, AneScore | None]]],
) -> tuple[dict[str, dict[str, tuple[Segmentation, AneScore | None]]], list[str]]:
    """Index runs by utterance id, checking coverage across languages."""
    if not per_language_runs:
        raise DataError("no runs to combine")
    by_lang: dict[str, dict[str, tuple[Segmentation, AneScore | None]]] = {}
    id_sets: dict[str, set[str]] = {}
    for lang, runs in per_language_runs.items():
        indexed: dict[str, tuple[Segmentation, AneScore | None]] = {}
        for seg, score in runs:
            if seg.utterance_id in indexed:
                raise DataError(f"duplicate utterance id {seg.utterance_id!r} in {lang!r} run")
            indexed[seg.utterance_id] = (seg, score)
        by_lang[lang] = indexed
        id_sets[lang] = set(indexed)
    all_ids = set.union(*id_sets.values())
    problems = []
    for lang in per_language_runs:
        missing = sorted(all_ids - id_sets[lang])
        if missing:
            problems.append(f"{lang}: missing {missing}")
    if problems:
        raise DataError("runs do not cover the same utterances; " + "; ".join(problems))
    return by_lang, sorted(all_ids)


def select_corpus(
    per_language_runs: dict[str, list[tuple[Segmentation, AneScore | None]]],
    priority: tuple[str, ...] | list[str] | None = None,
) -> list[SelectionResult]:
    """Run :func:`ane_select` per utterance, ordered by utterance id."""
    languages = tuple(per_language_runs)
    by_lang, ids = _index_runs(per_language_runs)
    if priority is None:
        priority = languages
    out = []
    for utt_id in ids:
        per_lang = {}
        for lang in languages:
            seg, score = by_lang[lang][utt_id]
            if score is None:
                raise DataError(
                    f"{lang!r} run has no ANE values (sidecar missing?); "
                    "selection needs scored runs"
                )
            per_lang[lang] = (seg, score)
        out.append(ane_select(per_lang, priority))
    return out


def combine_corpus(
    per_language_runs: dict[str, list[tuple[Segmentation, AneScore | None]]],
    mode: str,
    threshold: float | None = None,
    priority: tuple[str, ...] | list[str] | None = None,
) -> list[Segmentation]:
    """Apply ``vote`` or ``ane_select`` per utterance across whole runs.

    Every language must cover the same utterance-id set.  Output is
    ordered by utterance id.
    """
    if mode == "vote":
        if threshold is None:
            raise DataError("vote mode needs a threshold")
        languages = tuple(per_language_runs)
        by_lang, ids = _index_runs(per_language_runs)
        cfg = VoteConfig(threshold=threshold, languages=languages)
        return [
            vote({lang: by_lang[lang][utt_id][0] for lang in languages}, cfg)
            for utt_id in ids
        ]
    if mode == "select":
        return [r.segmentation for r in select_corpus(per_language_runs, priority)]
    raise DataError(f"unknown combination mode {mode!r} (expected 'vote' or 'select')")
