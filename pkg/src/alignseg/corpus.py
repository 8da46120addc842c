"""Parallel corpus data model: file ingestion, tokenization, statistics.

A corpus pairs unsegmented phoneme sequences with word-level translations
in one or more languages.  Gold segmentations, when known, are stored as
sets of internal boundary positions: position i means "a boundary between
phoneme i and phoneme i+1" (1-based), so valid positions are 1..L-1.
Utterance edges are implicit and never represented.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

# Stripped from token edges; apostrophes and hyphens are kept so French
# clitics ("c'est") survive as single tokens.
STRIP_CHARS = '.,;:!?"()[]«»'

WORD_SEP = "|"


@dataclass(frozen=True)
class TokenizePolicy:
    lowercase: bool = True
    strip_chars: str = STRIP_CHARS


DEFAULT_POLICY = TokenizePolicy()


def tokenize_translation(text: str, policy: TokenizePolicy = DEFAULT_POLICY) -> list[str]:
    """Split translation text on whitespace, lowercasing and stripping
    edge punctuation per the policy.  Tokens that strip to nothing are
    dropped; empty input gives an empty list."""
    tokens = []
    for raw in text.split():
        if policy.lowercase:
            raw = raw.lower()
        raw = raw.strip(policy.strip_chars)
        if raw:
            tokens.append(raw)
    return tokens


@dataclass(frozen=True)
class Utterance:
    """One parallel sentence: phonemes to segment plus translations.

    ``translations`` maps language code to the token sequence; values are
    tuples and the whole object is treated as immutable.
    """

    id: str
    phonemes: tuple[str, ...]
    translations: dict[str, tuple[str, ...]] = field(default_factory=dict)
    gold_boundaries: frozenset[int] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("utterance id must be non-empty")
        if len(self.phonemes) < 1:
            raise DataError(f"utterance {self.id!r}: phoneme sequence is empty")
        for p in self.phonemes:
            if not p or p.split() != [p]:
                raise DataError(
                    f"utterance {self.id!r}: phoneme symbol {p!r} is empty or has whitespace"
                )
        if self.gold_boundaries is not None:
            bad = [b for b in self.gold_boundaries if not 1 <= b <= len(self.phonemes) - 1]
            if bad:
                raise DataError(
                    f"utterance {self.id!r}: gold boundary positions {sorted(bad)} "
                    f"outside 1..{len(self.phonemes) - 1}"
                )
        for lang, tokens in self.translations.items():
            if not tokens:
                raise DataError(f"utterance {self.id!r}: empty translation for {lang!r}")

    def __len__(self) -> int:
        return len(self.phonemes)


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]
    languages: tuple[str, ...]

    def __post_init__(self) -> None:
        seen = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise DataError(f"duplicate utterance id {utt.id!r}")
            seen.add(utt.id)
            for lang in self.languages:
                if lang not in utt.translations:
                    raise DataError(f"utterance {utt.id!r}: missing language {lang!r}")

    def __len__(self) -> int:
        return len(self.utterances)

    def by_id(self, utterance_id: str) -> Utterance:
        for utt in self.utterances:
            if utt.id == utterance_id:
                return utt
        raise DataError(f"unknown utterance id {utterance_id!r}")


@dataclass(frozen=True)
class StatsRecord:
    language: str
    sentence_count: int
    token_count: int
    type_count: int
    avg_token_length: float
    avg_tokens_per_sentence: float


def gold_boundaries_from_segmented(segmented: str) -> tuple[tuple[str, ...], frozenset[int]]:
    """Parse a segmented transcript ("a b | c") into the flat phoneme list
    and the set of internal boundary positions."""
    fields = segmented.split()
    if not fields:
        raise DataError("empty segmented transcript")
    phonemes: list[str] = []
    boundaries: set[int] = set()
    prev_sep = True  # a separator at the start is malformed, like after another
    for tok in fields:
        if tok == WORD_SEP:
            if prev_sep:
                raise DataError(f"misplaced {WORD_SEP!r} in segmented transcript {segmented!r}")
            boundaries.add(len(phonemes))
            prev_sep = True
        else:
            phonemes.append(tok)
            prev_sep = False
    if prev_sep:
        raise DataError(f"trailing {WORD_SEP!r} in segmented transcript {segmented!r}")
    return tuple(phonemes), frozenset(boundaries)


def format_segmented(phonemes: tuple[str, ...], boundaries: frozenset[int]) -> str:
    """Inverse of :func:`gold_boundaries_from_segmented`."""
    parts: list[str] = []
    for i, p in enumerate(phonemes, start=1):
        parts.append(p)
        if i in boundaries and i < len(phonemes):
            parts.append(WORD_SEP)
    return " ".join(parts)


def load_corpus(
    path: str | Path,
    format: str = "tsv",
    policy: TokenizePolicy = DEFAULT_POLICY,
) -> Corpus:
    """Read a corpus file.

    TSV layout (UTF-8, header row)::

        id<TAB>phonemes<TAB>gold<TAB>trans_<lang1><TAB>trans_<lang2>...

    ``phonemes`` holds space-separated phoneme symbols; ``gold`` repeats
    them with ``|`` inserted at word boundaries (or is empty when no gold
    segmentation is known); each ``trans_<lang>`` cell is raw translation
    text, tokenized here under ``policy``.

    The JSON-Lines alternative has one object per line with fields ``id``,
    ``phonemes`` (array), ``gold_boundaries`` (optional int array) and
    ``translations`` (language -> text).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"corpus file {path} is not valid UTF-8: {exc}") from exc
    if format == "tsv":
        return _parse_tsv(text, policy)
    if format == "jsonl":
        return _parse_jsonl(text, policy)
    raise DataError(f"unknown corpus format {format!r} (expected 'tsv' or 'jsonl')")


def _parse_tsv(text: str, policy: TokenizePolicy) -> Corpus:
    lines = text.splitlines()
    if not lines:
        raise DataError("corpus file is empty")
    header = lines[0].split("\t")
    if header[:3] != ["id", "phonemes", "gold"] or len(header) < 4:
        raise DataError(
            "bad TSV header: expected 'id\\tphonemes\\tgold\\ttrans_<lang>...', "
            f"got {lines[0]!r}"
        )
    languages = []
    for col in header[3:]:
        if not col.startswith("trans_") or len(col) == len("trans_"):
            raise DataError(f"bad translation column {col!r} (expected 'trans_<lang>')")
        languages.append(col[len("trans_"):])
    if len(set(languages)) != len(languages):
        raise DataError("duplicate translation columns in header")

    utterances = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != len(header):
            raise DataError(
                f"line {lineno}: expected {len(header)} fields, got {len(cells)}"
            )
        utt_id = cells[0]
        if not utt_id:
            raise DataError(f"line {lineno}: empty id field")
        if utt_id in seen_ids:
            raise DataError(f"duplicate utterance id at line {lineno}: {utt_id!r}")
        seen_ids.add(utt_id)

        phonemes = tuple(cells[1].split())
        if not phonemes:
            raise DataError(f"line {lineno}: empty phonemes field")
        gold: frozenset[int] | None = None
        if cells[2]:
            gold_phonemes, gold = gold_boundaries_from_segmented(cells[2])
            if gold_phonemes != phonemes:
                raise DataError(
                    f"line {lineno}: gold field does not match phonemes field"
                )
        translations = {}
        for lang, cell in zip(languages, cells[3:]):
            tokens = tokenize_translation(cell, policy)
            if not tokens:
                raise DataError(f"line {lineno}: empty trans_{lang} field")
            translations[lang] = tuple(tokens)
        utterances.append(
            Utterance(id=utt_id, phonemes=phonemes, translations=translations,
                      gold_boundaries=gold)
        )
    return Corpus(utterances=tuple(utterances), languages=tuple(languages))


def _parse_jsonl(text: str, policy: TokenizePolicy) -> Corpus:
    utterances = []
    languages: tuple[str, ...] | None = None
    seen_ids: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise DataError(f"line {lineno}: expected a JSON object")
        for key in ("id", "phonemes", "translations"):
            if key not in obj:
                raise DataError(f"line {lineno}: missing field {key!r}")
        if not isinstance(obj["phonemes"], list):
            raise DataError(f"line {lineno}: field 'phonemes' must be an array")
        if not isinstance(obj["translations"], dict):
            raise DataError(f"line {lineno}: field 'translations' must be an object")
        utt_id = obj["id"]
        if utt_id in seen_ids:
            raise DataError(f"duplicate utterance id at line {lineno}: {utt_id!r}")
        seen_ids.add(utt_id)
        if languages is None:
            languages = tuple(obj["translations"].keys())
        elif set(obj["translations"]) != set(languages):
            raise DataError(
                f"line {lineno}: translation languages {sorted(obj['translations'])} "
                f"do not match declared {sorted(languages)}"
            )
        gold = None
        if obj.get("gold_boundaries") is not None:
            gold = frozenset(int(b) for b in obj["gold_boundaries"])
        translations = {}
        for lang in languages:
            tokens = tokenize_translation(str(obj["translations"][lang]), policy)
            if not tokens:
                raise DataError(f"line {lineno}: empty translation for {lang!r}")
            translations[lang] = tuple(tokens)
        try:
            utterances.append(
                Utterance(
                    id=str(utt_id),
                    phonemes=tuple(str(p) for p in obj["phonemes"]),
                    translations=translations,
                    gold_boundaries=gold,
                )
            )
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    if languages is None:
        raise DataError("corpus file is empty")
    return Corpus(utterances=tuple(utterances), languages=languages)


def write_corpus(corpus: Corpus, path: str | Path, format: str = "tsv") -> None:
    """Serialize a corpus so that reloading it yields an equal value.

    Translation cells are written as space-joined tokens; the default
    tokenization policy is idempotent on its own output, so a load/write
    cycle round-trips.
    """
    path = Path(path)
    if format == "tsv":
        lines = ["\t".join(["id", "phonemes", "gold"]
                           + [f"trans_{lang}" for lang in corpus.languages])]
        for utt in corpus.utterances:
            gold = ""
            if utt.gold_boundaries is not None:
                gold = format_segmented(utt.phonemes, utt.gold_boundaries)
            cells = [utt.id, " ".join(utt.phonemes), gold]
            cells += [" ".join(utt.translations[lang]) for lang in corpus.languages]
            lines.append("\t".join(cells))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for utt in corpus.utterances:
                obj: dict = {
                    "id": utt.id,
                    "phonemes": list(utt.phonemes),
                    "translations": {
                        lang: " ".join(utt.translations[lang]) for lang in corpus.languages
                    },
                }
                if utt.gold_boundaries is not None:
                    obj["gold_boundaries"] = sorted(utt.gold_boundaries)
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    else:
        raise DataError(f"unknown corpus format {format!r} (expected 'tsv' or 'jsonl')")


def corpus_stats(corpus: Corpus, language: str) -> StatsRecord:
    if language not in corpus.languages:
        raise DataError(f"unknown language {language!r} (declared: {list(corpus.languages)})")
    token_count = 0
    char_count = 0
    types: set[str] = set()
    for utt in corpus.utterances:
        tokens = utt.translations[language]
        token_count += len(tokens)
        char_count += sum(len(t) for t in tokens)
        types.update(tokens)
    if token_count == 0:
        raise DataError(f"no tokens for language {language!r}: averages undefined")
    return StatsRecord(
        language=language,
        sentence_count=len(corpus.utterances),
        token_count=token_count,
        type_count=len(types),
        avg_token_length=char_count / token_count,
        avg_tokens_per_sentence=token_count / len(corpus.utterances),
    )


STATS_HEADER = ("language", "sentence_count", "token_count", "type_count",
                "avg_token_length", "avg_tokens_per_sentence")


def stats_tsv(records: list[StatsRecord]) -> str:
    """Render stats records as TSV with a fixed column order."""
    lines = ["\t".join(STATS_HEADER)]
    for r in records:
        lines.append("\t".join([
            r.language,
            str(r.sentence_count),
            str(r.token_count),
            str(r.type_count),
            f"{r.avg_token_length:.6f}",
            f"{r.avg_tokens_per_sentence:.6f}",
        ]))
    return "\n".join(lines) + "\n"
