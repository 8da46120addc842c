import random

import pytest

from alignseg import AlignmentMatrix, Corpus, Utterance
from alignseg.aligner import NULL_TOKEN


@pytest.fixture
def crib_corpus():
    """Two sentences whose EM fixed point is known: {a -> x}, {a b -> x y}."""
    return Corpus(
        utterances=(
            Utterance(id="c1", phonemes=("x",), translations={"xx": ("a",)}),
            Utterance(id="c2", phonemes=("x", "y"), translations={"xx": ("a", "b")}),
        ),
        languages=("xx",),
    )


TSV_SAMPLE = (
    "id\tphonemes\tgold\ttrans_fr\n"
    "u1\ta b c\ta b | c\tLe chien dort.\n"
    "u2\td e\t\tC'est bon\n"
)


@pytest.fixture
def sample_tsv(tmp_path):
    path = tmp_path / "corpus.tsv"
    path.write_text(TSV_SAMPLE, encoding="utf-8")
    return path


def random_matrix(rng, max_len=12, max_src=12, with_null=False, utt_id="u", lang="xx"):
    """Random row-stochastic matrix with L, S within the given bounds."""
    length = rng.randint(1, max_len)
    n_src = rng.randint(2 if with_null else 1, max_src)
    source = [NULL_TOKEN] if with_null else []
    source += [f"s{i}" for i in range(n_src - len(source))]
    rows = []
    for _ in range(length):
        weights = [rng.random() + 1e-9 for _ in source]
        total = sum(weights)
        rows.append(tuple(w / total for w in weights))
    return AlignmentMatrix(
        utterance_id=utt_id,
        language=lang,
        source_tokens=tuple(source),
        target_phonemes=tuple(f"p{t}" for t in range(length)),
        rows=tuple(rows),
    )


def make_rng(seed):
    return random.Random(seed)
