"""alignseg: word discovery in unsegmented phoneme corpora from aligned
word-level translations."""

from .aligner import (
    NULL_TOKEN,
    AlignerConfig,
    AlignmentMatrix,
    TranslationTable,
    corpus_matrices,
    log_likelihood,
    posterior_matrix,
    read_matrices,
    train_ibm1,
    write_matrices,
)
from .corpus import (
    Corpus,
    StatsRecord,
    TokenizePolicy,
    Utterance,
    corpus_stats,
    gold_boundaries_from_segmented,
    load_corpus,
    tokenize_translation,
    write_corpus,
)
from .cli import PipelineConfig, run_pipeline
from .errors import DataError
from .evaluate import (
    LexiconEntry,
    OverlapReport,
    PrfScore,
    boundary_prf,
    concat_check,
    cross_model_overlap,
    extract_lexicon,
    token_prf,
    type_prf,
)
from .multilingual import (
    SelectionResult,
    VoteConfig,
    ane_select,
    combine_corpus,
    select_corpus,
    vote,
)
from .segmenter import (
    AneScore,
    Segment,
    Segmentation,
    ane,
    read_run,
    segment_corpus,
    segment_from_matrix,
    segmentation_from_boundaries,
    write_run,
)
from .synth import SynthSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AlignerConfig",
    "AlignmentMatrix",
    "AneScore",
    "Corpus",
    "DataError",
    "LexiconEntry",
    "NULL_TOKEN",
    "OverlapReport",
    "PipelineConfig",
    "PrfScore",
    "SelectionResult",
    "Segment",
    "Segmentation",
    "StatsRecord",
    "SynthSpec",
    "TokenizePolicy",
    "TranslationTable",
    "Utterance",
    "VoteConfig",
    "ane",
    "ane_select",
    "boundary_prf",
    "combine_corpus",
    "concat_check",
    "corpus_matrices",
    "corpus_stats",
    "cross_model_overlap",
    "extract_lexicon",
    "generate_synthetic",
    "gold_boundaries_from_segmented",
    "load_corpus",
    "log_likelihood",
    "posterior_matrix",
    "read_matrices",
    "read_run",
    "run_pipeline",
    "segment_corpus",
    "segment_from_matrix",
    "segmentation_from_boundaries",
    "select_corpus",
    "token_prf",
    "tokenize_translation",
    "train_ibm1",
    "type_prf",
    "vote",
    "write_corpus",
    "write_matrices",
    "write_run",
]
