"""Matrix-to-segmentation decoding and Average Normalized Entropy.

Decoding clusters neighboring phonemes whose alignment rows argmax to
the same source token; segment boundaries fall wherever the argmax
changes.  ANE scores a matrix's confidence: mean over rows of Shannon
entropy divided by its ceiling log(S), so 0 means one-hot rows and 1
means uniform rows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .aligner import AlignmentMatrix
from .errors import DataError

# Marker used in run files for segments with no aligned source word
# (NULL-aligned sentences and voted output).
NO_WORD = None


@dataclass(frozen=True)
class Segment:
    phonemes: tuple[str, ...]
    word: str | None  # None when no source word is aligned


@dataclass(frozen=True)
class Segmentation:
    """A partition of one phoneme sequence into word-like units."""

    utterance_id: str
    length: int
    boundaries: frozenset[int]
    segments: tuple[Segment, ...]
    source_language: str

    def __post_init__(self) -> None:
        if not self.segments:
            raise DataError(f"segmentation {self.utterance_id!r}: no segments")
        ends = []
        pos = 0
        for seg in self.segments:
            if not seg.phonemes:
                raise DataError(f"segmentation {self.utterance_id!r}: empty segment")
            pos += len(seg.phonemes)
            ends.append(pos)
        if pos != self.length:
            raise DataError(
                f"segmentation {self.utterance_id!r}: segments cover {pos} positions, "
                f"length is {self.length}"
            )
        if frozenset(ends[:-1]) != self.boundaries:
            raise DataError(
                f"segmentation {self.utterance_id!r}: boundary set does not match segments"
            )

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(p for seg in self.segments for p in seg.phonemes)


@dataclass(frozen=True)
class AneScore:
    utterance_id: str
    language: str
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise DataError(f"ANE {self.value!r} outside [0, 1]")


def segmentation_from_boundaries(
    utterance_id: str,
    phonemes: tuple[str, ...],
    boundaries: frozenset[int],
    source_language: str,
    words: list[str | None] | None = None,
) -> Segmentation:
    """Build a Segmentation by cutting ``phonemes`` at ``boundaries``.

    ``words``, when given, supplies one aligned word per resulting
    segment (in order)."""
    cuts = sorted(boundaries)
    if any(not 1 <= b <= len(phonemes) - 1 for b in cuts):
        raise DataError(
            f"segmentation {utterance_id!r}: boundaries {cuts} outside 1..{len(phonemes) - 1}"
        )
    spans = []
    start = 0
    for b in cuts + [len(phonemes)]:
        spans.append(phonemes[start:b])
        start = b
    if words is None:
        words = [NO_WORD] * len(spans)
    if len(words) != len(spans):
        raise DataError(
            f"segmentation {utterance_id!r}: {len(words)} words for {len(spans)} segments"
        )
    return Segmentation(
        utterance_id=utterance_id,
        length=len(phonemes),
        boundaries=frozenset(cuts),
        segments=tuple(Segment(span, w) for span, w in zip(spans, words)),
        source_language=source_language,
    )


def _argmax(row: tuple[float, ...]) -> int:
    """Index of the row maximum; ties go to the lowest source index."""
    best_i = 0
    best = row[0]
    for i, v in enumerate(row):
        if v > best:
            best, best_i = v, i
    return best_i


def segment_from_matrix(m: AlignmentMatrix) -> Segmentation:
    """Decode one matrix into a segmentation.

    Each target position takes its argmax source position; NULL-argmax
    positions attach to the preceding position's choice (a leading run
    of NULLs takes the sentence's first non-NULL choice).  A boundary
    falls between positions whose choices differ.  If every position
    argmaxes to NULL the sentence stays one segment with no aligned
    word.
    """
    raw = [_argmax(row) for row in m.rows]
    if m.has_null:
        first = next((a for a in raw if a != 0), None)
        if first is None:
            return segmentation_from_boundaries(
                m.utterance_id, m.target_phonemes, frozenset(), m.language, [NO_WORD]
            )
        resolved: list[int] = []
        for a in raw:
            if a == 0:
                a = resolved[-1] if resolved else first
            resolved.append(a)
    else:
        resolved = raw

    boundaries = frozenset(
        t for t in range(1, len(resolved)) if resolved[t - 1] != resolved[t]
    )
    words: list[str | None] = [m.source_tokens[resolved[0]]]
    for t in range(1, len(resolved)):
        if resolved[t] != resolved[t - 1]:
            words.append(m.source_tokens[resolved[t]])
    return segmentation_from_boundaries(
        m.utterance_id, m.target_phonemes, boundaries, m.language, words
    )


def ane(m: AlignmentMatrix) -> AneScore:
    """Average Normalized Entropy of a matrix, in [0, 1].

    A single-column matrix scores 0 by convention: with one source token
    the entropy ceiling is 0 and the alignment is maximally confident.
    """
    n_source = len(m.source_tokens)
    if n_source == 1:
        return AneScore(m.utterance_id, m.language, 0.0)
    ceiling = math.log(n_source)
    total = 0.0
    for row in m.rows:
        h = -sum(p * math.log(p) for p in row if p > 0.0)
        total += h / ceiling
    value = min(1.0, max(0.0, total / len(m.rows)))
    return AneScore(m.utterance_id, m.language, value)


def segment_corpus(
    matrices: list[AlignmentMatrix],
) -> list[tuple[Segmentation, AneScore]]:
    """Segment and score every matrix, preserving input order."""
    seen: set[str] = set()
    out = []
    for m in matrices:
        if m.utterance_id in seen:
            raise DataError(f"duplicate utterance id {m.utterance_id!r} in matrix list")
        seen.add(m.utterance_id)
        out.append((segment_from_matrix(m), ane(m)))
    return out


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".meta.jsonl")


def write_run(
    runs: list[tuple[Segmentation, AneScore | None]],
    path: str | Path,
    lang_override: str | None = None,
) -> None:
    """Write a segmentation run: a TSV (`id<TAB>lang<TAB>seg`, with ``|``
    marking boundaries inside ``seg``) plus a JSON-Lines sidecar carrying
    per-segment aligned words and the ANE value.

    The sidecar lands next to the TSV with a ``.meta.jsonl`` suffix.
    """
    path = Path(path)
    tsv_lines = []
    sidecar_lines = []
    for seg, score in runs:
        lang = lang_override if lang_override is not None else seg.source_language
        parts: list[str] = []
        for i, s in enumerate(seg.segments):
            if i:
                parts.append("|")
            parts.extend(s.phonemes)
        tsv_lines.append(f"{seg.utterance_id}\t{lang}\t{' '.join(parts)}")
        sidecar_lines.append(json.dumps({
            "id": seg.utterance_id,
            "lang": lang,
            "source_language": seg.source_language,
            "segments": [
                {"phonemes": list(s.phonemes), "word": s.word} for s in seg.segments
            ],
            "ane": None if score is None else score.value,
        }, ensure_ascii=False))
    path.write_text("\n".join(tsv_lines) + "\n", encoding="utf-8")
    _sidecar_path(path).write_text("\n".join(sidecar_lines) + "\n", encoding="utf-8")


def read_run(path: str | Path) -> list[tuple[Segmentation, AneScore | None]]:
    """Read a segmentation run written by :func:`write_run`.

    When the ``.meta.jsonl`` sidecar is present it is authoritative
    (aligned words and ANE survive); otherwise the TSV alone is read and
    segments carry no aligned words or ANE.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"cannot read segmentation run {path}: no such file")
    sidecar = _sidecar_path(path)
    runs: list[tuple[Segmentation, AneScore | None]] = []
    if sidecar.exists():
        for lineno, line in enumerate(sidecar.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{sidecar} line {lineno}: invalid JSON: {exc}") from exc
            try:
                segments = tuple(
                    Segment(tuple(s["phonemes"]), s["word"]) for s in obj["segments"]
                )
            except (KeyError, TypeError) as exc:
                raise DataError(f"{sidecar} line {lineno}: malformed record: {exc}") from exc
            length = sum(len(s.phonemes) for s in segments)
            ends = []
            pos = 0
            for s in segments[:-1]:
                pos += len(s.phonemes)
                ends.append(pos)
            seg = Segmentation(
                utterance_id=str(obj["id"]),
                length=length,
                boundaries=frozenset(ends),
                segments=segments,
                source_language=str(obj.get("source_language", obj["lang"])),
            )
            score = None
            if obj.get("ane") is not None:
                score = AneScore(seg.utterance_id, seg.source_language, float(obj["ane"]))
            runs.append((seg, score))
        return runs
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise DataError(f"{path} line {lineno}: expected 3 fields, got {len(cells)}")
        utt_id, lang, seg_text = cells
        phoneme_list: list[str] = []
        cuts: set[int] = set()
        for tok in seg_text.split():
            if tok == "|":
                cuts.add(len(phoneme_list))
            else:
                phoneme_list.append(tok)
        runs.append((
            segmentation_from_boundaries(
                utt_id, tuple(phoneme_list), frozenset(cuts), lang
            ),
            None,
        ))
    return runs
