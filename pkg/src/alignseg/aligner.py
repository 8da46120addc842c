"""Soft-alignment matrix production.

Two routes into the same `AlignmentMatrix` type: an in-repo IBM Model 1
EM aligner whose per-position posteriors are genuine row-stochastic soft
alignments, and a JSON-Lines interchange format through which externally
produced attention matrices can be ingested.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, Utterance
from .errors import DataError

NULL_TOKEN = "<NULL>"

ROW_SUM_TOL = 1e-6
# External attention dumps with row sums further than this from 1 are
# rejected as corrupt rather than silently renormalized.
ROW_SUM_REJECT = 0.05


@dataclass(frozen=True)
class AlignerConfig:
    iterations: int = 30
    convergence_epsilon: float = 1e-6  # on per-token log-likelihood delta
    prob_floor: float = 1e-12
    use_null: bool = True
    seed: int = 0  # reserved for sampling utilities; EM itself is deterministic

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise DataError("iterations must be >= 1")
        if not 0.0 < self.prob_floor < 1.0:
            raise DataError("prob_floor must be in (0, 1)")


@dataclass(frozen=True)
class TranslationTable:
    """Lexical translation probabilities t(phoneme | source word).

    ``probs[source]`` is a distribution over the phonemes co-occurring
    with that source word; each distribution sums to 1.  The NULL token
    is always part of the source vocabulary, with a distribution only
    when it was included in training.
    """

    source_vocab: tuple[str, ...]
    target_vocab: tuple[str, ...]
    probs: dict[str, dict[str, float]]

    def __post_init__(self) -> None:
        if NULL_TOKEN not in self.source_vocab:
            raise DataError("NULL token missing from source vocabulary")
        for source, dist in self.probs.items():
            total = math.fsum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise DataError(
                    f"distribution for {source!r} sums to {total!r}, not 1"
                )
            for target, p in dist.items():
                if not 0.0 <= p <= 1.0:
                    raise DataError(f"probability t({target!r}|{source!r}) = {p!r} outside [0, 1]")

    def prob(self, source: str, target: str, floor: float) -> float:
        """t(target | source), falling back to ``floor`` for unseen pairs."""
        return self.probs.get(source, {}).get(target, floor)


@dataclass(frozen=True)
class AlignmentMatrix:
    """Row-stochastic target-phoneme x source-token matrix for one sentence."""

    utterance_id: str
    language: str
    source_tokens: tuple[str, ...]
    target_phonemes: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.target_phonemes) < 1 or len(self.source_tokens) < 1:
            raise DataError(f"matrix {self.utterance_id!r}: empty token list")
        if len(self.rows) != len(self.target_phonemes):
            raise DataError(
                f"matrix {self.utterance_id!r}: {len(self.rows)} rows for "
                f"{len(self.target_phonemes)} target phonemes"
            )
        for t, row in enumerate(self.rows):
            if len(row) != len(self.source_tokens):
                raise DataError(
                    f"matrix {self.utterance_id!r}: row {t} has {len(row)} entries for "
                    f"{len(self.source_tokens)} source tokens"
                )
            if any(v < 0.0 for v in row):
                raise DataError(f"matrix {self.utterance_id!r}: negative entry in row {t}")
            total = math.fsum(row)
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise DataError(
                    f"matrix {self.utterance_id!r}: row {t} sums to {total!r}, not 1"
                )

    @property
    def has_null(self) -> bool:
        return self.source_tokens[0] == NULL_TOKEN


def _source_tokens(utt: Utterance, language: str, use_null: bool) -> tuple[str, ...]:
    tokens = utt.translations[language]
    if use_null:
        return (NULL_TOKEN,) + tuple(tokens)
    if not tokens:
        raise DataError(f"utterance {utt.id!r}: empty source sentence with NULL disabled")
    return tuple(tokens)


def _check_language(corpus: Corpus, language: str) -> None:
    if language not in corpus.languages:
        raise DataError(f"unknown language {language!r} (declared: {list(corpus.languages)})")


def train_ibm1(corpus: Corpus, language: str, config: AlignerConfig = AlignerConfig()) -> TranslationTable:
    """Estimate t(phoneme | word) with IBM Model 1 EM.

    The table starts uniform over each source word's co-occurring
    phonemes.  Each round runs the standard E-step (expected counts from
    per-position posterior normalization) and M-step (renormalize per
    source word), then floors probabilities at ``prob_floor`` and
    renormalizes.  Training stops after ``iterations`` rounds or once the
    per-token log-likelihood improves by less than
    ``convergence_epsilon``.

    Expected counts are reduced with exact summation, so the resulting
    table is invariant under permutation of the corpus.
    """
    if not corpus.utterances:
        raise DataError("cannot train on an empty corpus")
    _check_language(corpus, language)
    pairs = [
        (_source_tokens(utt, language, config.use_null), utt.phonemes)
        for utt in corpus.utterances
    ]
    token_total = sum(len(tgt) for _, tgt in pairs)

    support: dict[str, set[str]] = {}
    for src, tgt in pairs:
        for e in src:
            support.setdefault(e, set()).update(tgt)
    probs: dict[str, dict[str, float]] = {
        e: {f: 1.0 / len(fs) for f in fs} for e, fs in support.items()
    }

    prev_ll: float | None = None
    for _ in range(config.iterations):
        # E-step; the per-position normalizers double as the likelihood.
        contribs: dict[str, dict[str, list[float]]] = {}
        sentence_lls = []
        for src, tgt in pairs:
            ll = -len(tgt) * math.log(len(src))
            for f in tgt:
                weights = [probs[e][f] for e in src]
                denom = sum(weights)
                ll += math.log(denom)
                for e, w in zip(src, weights):
                    contribs.setdefault(e, {}).setdefault(f, []).append(w / denom)
            sentence_lls.append(ll)
        ll = math.fsum(sentence_lls)
        if prev_ll is not None and (ll - prev_ll) / token_total < config.convergence_epsilon:
            break
        prev_ll = ll

        # M-step with flooring; renormalize only when a floor applied so
        # the exact EM update is untouched in the common case.
        new_probs: dict[str, dict[str, float]] = {}
        for e, per_target in contribs.items():
            counts = {f: math.fsum(values) for f, values in per_target.items()}
            total = math.fsum(counts.values())
            dist = {f: c / total for f, c in counts.items()}
            floored = {f: max(p, config.prob_floor) for f, p in dist.items()}
            if floored != dist:
                z = math.fsum(floored.values())
                dist = {f: p / z for f, p in floored.items()}
            new_probs[e] = dist
        probs = new_probs

    source_vocab = sorted(probs)
    if NULL_TOKEN not in probs:
        source_vocab.append(NULL_TOKEN)
    target_vocab = sorted({f for fs in support.values() for f in fs})
    return TranslationTable(
        source_vocab=tuple(source_vocab),
        target_vocab=tuple(target_vocab),
        probs=probs,
    )


def log_likelihood(
    table: TranslationTable,
    corpus: Corpus,
    language: str,
    config: AlignerConfig = AlignerConfig(),
) -> float:
    """Total IBM-1 log-likelihood of the corpus under the table (natural
    log); each sentence contributes log[(1/S)^L prod_t sum_s t(f_t|e_s)]
    with S counting the NULL token when enabled."""
    _check_language(corpus, language)
    sentence_lls = []
    for utt in corpus.utterances:
        src = _source_tokens(utt, language, config.use_null)
        ll = -len(utt.phonemes) * math.log(len(src))
        for f in utt.phonemes:
            ll += math.log(sum(table.prob(e, f, config.prob_floor) for e in src))
        sentence_lls.append(ll)
    return math.fsum(sentence_lls)


def posterior_matrix(
    table: TranslationTable,
    utterance: Utterance,
    language: str,
    config: AlignerConfig = AlignerConfig(),
) -> AlignmentMatrix:
    """IBM-1 alignment posterior for one sentence pair: row t is
    t(f_t|e_s) normalized over source positions s."""
    if language not in utterance.translations:
        raise DataError(f"utterance {utterance.id!r}: no translation for {language!r}")
    src = _source_tokens(utterance, language, config.use_null)
    rows = []
    for f in utterance.phonemes:
        weights = [table.prob(e, f, config.prob_floor) for e in src]
        total = sum(weights)
        if total <= 0.0:
            raise DataError(
                f"utterance {utterance.id!r}: phoneme {f!r} has zero mass "
                "under the table (flooring disabled?)"
            )
        rows.append(tuple(w / total for w in weights))
    return AlignmentMatrix(
        utterance_id=utterance.id,
        language=language,
        source_tokens=src,
        target_phonemes=utterance.phonemes,
        rows=tuple(rows),
    )


def corpus_matrices(
    corpus: Corpus,
    language: str,
    config: AlignerConfig = AlignerConfig(),
) -> list[AlignmentMatrix]:
    """Train on the corpus and produce one posterior matrix per utterance."""
    table = train_ibm1(corpus, language, config)
    return [posterior_matrix(table, utt, language, config) for utt in corpus.utterances]


def write_matrices(matrices: list[AlignmentMatrix], path: str | Path) -> None:
    """Write matrices in the JSON-Lines interchange format.

    One object per sentence pair::

        {"id": ..., "lang": ..., "source": [...], "target": [...], "rows": [[...], ...]}

    Probabilities are serialized with shortest-round-trip precision, so a
    write/read cycle preserves them exactly.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for m in matrices:
            obj = {
                "id": m.utterance_id,
                "lang": m.language,
                "source": list(m.source_tokens),
                "target": list(m.target_phonemes),
                "rows": [list(row) for row in m.rows],
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_matrices(path: str | Path) -> list[AlignmentMatrix]:
    """Read interchange-format matrices, validating shape and row sums.

    Row sums may deviate from 1 by up to 5% (attention dumps are often
    truncated); rows are renormalized exactly on ingestion.  Larger
    deviations are rejected as corrupt.
    """
    path = Path(path)
    matrices = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read matrix file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise DataError(f"{path} line {lineno}: expected a JSON object")
        for key in ("id", "lang", "source", "target", "rows"):
            if key not in obj:
                raise DataError(f"{path} line {lineno}: missing field {key!r}")
        for key in ("source", "target", "rows"):
            if not isinstance(obj[key], list):
                raise DataError(f"{path} line {lineno}: field {key!r} must be an array")
        utt_id = str(obj["id"])
        source = tuple(str(s) for s in obj["source"])
        target = tuple(str(t) for t in obj["target"])
        raw_rows = obj["rows"]
        if len(raw_rows) != len(target):
            raise DataError(
                f"matrix {utt_id!r}: {len(raw_rows)} rows for {len(target)} target phonemes"
            )
        rows = []
        for t, raw in enumerate(raw_rows):
            if not isinstance(raw, list):
                raise DataError(f"matrix {utt_id!r}: row {t} is not an array")
            if len(raw) != len(source):
                raise DataError(
                    f"matrix {utt_id!r}: row {t} has {len(raw)} entries for "
                    f"{len(source)} source tokens"
                )
            try:
                row = [float(v) for v in raw]
            except (TypeError, ValueError) as exc:
                raise DataError(f"matrix {utt_id!r}: non-numeric entry in row {t}") from exc
            if any(v < 0.0 for v in row):
                raise DataError(f"matrix {utt_id!r}: negative entry in row {t}")
            total = math.fsum(row)
            if abs(total - 1.0) > ROW_SUM_REJECT:
                raise DataError(
                    f"matrix {utt_id!r}: row {t} sums to {total!r}; "
                    f"refusing rows off by more than {ROW_SUM_REJECT}"
                )
            rows.append(tuple(v / total for v in row))
        matrices.append(
            AlignmentMatrix(
                utterance_id=utt_id,
                language=str(obj["lang"]),
                source_tokens=source,
                target_phonemes=target,
                rows=tuple(rows),
            )
        )
    return matrices
