"""Synthetic parallel corpus generator.

Desk-scale stand-in for a real documentation corpus: a random lexicon of
phoneme-string words, sentences drawn from it, and one pseudo-translation
per language obtained by relabeling the word sequence.  The first
language is a pure relabeling (bijective word-to-token map), so an
aligner can in principle recover the segmentation exactly; later
languages get progressively harder via vocabulary merging (several words
sharing one token) plus word-order shuffling.

Everything is driven by a single seed; a fixed spec reproduces the
corpus byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Corpus, Utterance
from .errors import DataError

_CONSONANTS = "bcdfghjklmnprstvwyz"
_VOWELS = "aeiou"
# Phoneme symbols are CV syllables: multi-character like real phoneme
# inventories, and numerous enough that a small lexicon can be built
# with little cross-word symbol sharing.
_SYLLABLES = tuple(c + v for c in _CONSONANTS for v in _VOWELS)

# Fraction of the vocabulary folded into shared tokens, per difficulty
# step beyond the first (relabel-only) language.
_MERGE_STEP = 0.2


@dataclass(frozen=True)
class SynthSpec:
    vocab_size: int = 20
    sentences: int = 200
    languages: int = 3
    seed: int = 0
    min_word_len: int = 2  # phoneme symbols per word
    max_word_len: int = 4
    min_sentence_len: int = 3  # words per sentence
    max_sentence_len: int = 8

    def __post_init__(self) -> None:
        if self.vocab_size < 2:
            raise DataError("synthetic vocabulary needs at least 2 words")
        if self.sentences < 1:
            raise DataError("synthetic corpus needs at least 1 sentence")
        if self.languages < 1:
            raise DataError("synthetic corpus needs at least 1 language")
        if not 1 <= self.min_word_len <= self.max_word_len:
            raise DataError("bad word length range")
        if not 1 <= self.min_sentence_len <= self.max_sentence_len:
            raise DataError("bad sentence length range")

    @property
    def language_codes(self) -> tuple[str, ...]:
        return tuple(f"l{i + 1}" for i in range(self.languages))


def _make_words(spec: SynthSpec, rng: random.Random) -> list[tuple[str, ...]]:
    """Draw distinct word types, dealing syllables from a shuffled deck.

    Dealing without replacement keeps word types from sharing symbols
    while the lexicon fits in the inventory, which is what gives a
    relabel-only language a clean alignment signal; larger lexicons
    reuse the deck and degrade gracefully.
    """
    deck: list[str] = []
    words: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    attempts = 0
    while len(words) < spec.vocab_size:
        attempts += 1
        if attempts > 1000 * spec.vocab_size:
            raise DataError("cannot draw enough distinct words; widen the length range")
        length = rng.randint(spec.min_word_len, spec.max_word_len)
        if len(deck) < length:
            deck = list(_SYLLABLES)
            rng.shuffle(deck)
        w = tuple(deck.pop() for _ in range(length))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _token_maps(spec: SynthSpec) -> dict[str, list[str]]:
    """Per-language word-index -> token tables.

    Language i>0 merges a growing fraction of word pairs onto shared
    tokens, simulating translations that lexicalize distinctions away.
    """
    maps: dict[str, list[str]] = {}
    for i, lang in enumerate(spec.language_codes):
        tokens = [f"{lang}w{j:03d}" for j in range(spec.vocab_size)]
        merge_count = int(min(0.6, _MERGE_STEP * i) * spec.vocab_size) // 2
        if merge_count:
            rng = random.Random(f"{spec.seed}/{lang}/merge")
            indices = list(range(spec.vocab_size))
            rng.shuffle(indices)
            for k in range(merge_count):
                keep, fold = indices[2 * k], indices[2 * k + 1]
                tokens[fold] = tokens[keep]
        maps[lang] = tokens
    return maps


def generate_synthetic(spec: SynthSpec) -> tuple[Corpus, dict[str, dict[str, str]]]:
    """Build (corpus with gold boundaries, true lexicon).

    The lexicon maps each true word type (concatenated phoneme string) to
    its per-language translation token.
    """
    rng = random.Random(f"{spec.seed}/words")
    words = _make_words(spec, rng)
    token_maps = _token_maps(spec)
    shuffle_rngs = {
        lang: random.Random(f"{spec.seed}/{lang}/order")
        for lang in spec.language_codes[1:]
    }

    sent_rng = random.Random(f"{spec.seed}/sentences")
    id_width = len(str(spec.sentences))
    utterances = []
    for n in range(spec.sentences):
        length = sent_rng.randint(spec.min_sentence_len, spec.max_sentence_len)
        # No immediate word repeats: a doubled word has no detectable
        # internal boundary, which would cap recall for every model.
        word_seq: list[int] = []
        for _ in range(length):
            j = sent_rng.randrange(spec.vocab_size)
            while word_seq and j == word_seq[-1]:
                j = sent_rng.randrange(spec.vocab_size)
            word_seq.append(j)
        phonemes: list[str] = []
        boundaries: set[int] = set()
        for j in word_seq:
            if phonemes:
                boundaries.add(len(phonemes))
            phonemes.extend(words[j])
        translations = {}
        for lang in spec.language_codes:
            tokens = [token_maps[lang][j] for j in word_seq]
            if lang in shuffle_rngs:
                shuffle_rngs[lang].shuffle(tokens)
            translations[lang] = tuple(tokens)
        utterances.append(Utterance(
            id=f"u{n + 1:0{id_width}d}",
            phonemes=tuple(phonemes),
            translations=translations,
            gold_boundaries=frozenset(boundaries),
        ))

    lexicon = {
        "".join(words[j]): {lang: token_maps[lang][j] for lang in spec.language_codes}
        for j in range(spec.vocab_size)
    }
    corpus = Corpus(utterances=tuple(utterances), languages=spec.language_codes)
    return corpus, lexicon


def lexicon_tsv(spec: SynthSpec, lexicon: dict[str, dict[str, str]]) -> str:
    """Render the true lexicon as TSV: one row per word type."""
    lines = ["\t".join(["type"] + list(spec.language_codes))]
    for word_type in sorted(lexicon):
        lines.append("\t".join([word_type] + [
            lexicon[word_type][lang] for lang in spec.language_codes
        ]))
    return "\n".join(lines) + "\n"
