"""Command-line orchestration of the discovery pipeline.

Every subcommand is a thin wrapper over the library: load/generate a
corpus, train the aligner, segment, combine languages, evaluate, extract
lexicons.  Outputs are plain TSV/JSON-Lines files and are byte-identical
for fixed inputs and configuration.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .aligner import (
    AlignerConfig,
    AlignmentMatrix,
    posterior_matrix,
    read_matrices,
    train_ibm1,
    write_matrices,
)
from .corpus import Corpus, corpus_stats, load_corpus, stats_tsv, write_corpus
from .errors import DataError
from .evaluate import (
    PrfScore,
    boundary_prf,
    extract_lexicon,
    lexicon_report_tsv,
    score_report_tsv,
    token_prf,
    type_prf,
)
from .multilingual import combine_corpus, select_corpus, vote_tag
from .segmenter import AneScore, Segmentation, read_run, segment_corpus, write_run
from .synth import SynthSpec, generate_synthetic, lexicon_tsv


def _write_or_print(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _aligner_config(args: argparse.Namespace) -> AlignerConfig:
    return AlignerConfig(
        iterations=args.iters,
        convergence_epsilon=args.epsilon,
        use_null=not args.no_null,
    )


def _add_aligner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--iters", type=int, default=30, help="EM iterations (default 30)")
    parser.add_argument("--epsilon", type=float, default=1e-6,
                        help="per-token log-likelihood convergence delta")
    parser.add_argument("--no-null", action="store_true",
                        help="drop the NULL source token")


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    languages = [args.lang] if args.lang else list(corpus.languages)
    records = [corpus_stats(corpus, lang) for lang in languages]
    _write_or_print(stats_tsv(records), args.output)
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    config = _aligner_config(args)
    table = train_ibm1(corpus, args.lang, config)
    matrices = [posterior_matrix(table, utt, args.lang, config) for utt in corpus.utterances]
    write_matrices(matrices, args.output)
    return 0


def cmd_segment(args: argparse.Namespace) -> int:
    matrices = read_matrices(args.matrices)
    runs = segment_corpus(matrices)
    write_run(list(runs), args.output)
    return 0


def _runs_by_language(paths: list[str]) -> dict[str, list[tuple[Segmentation, AneScore | None]]]:
    per_language: dict[str, list[tuple[Segmentation, AneScore | None]]] = {}
    for path in paths:
        runs = read_run(path)
        if not runs:
            raise DataError(f"{path}: empty run")
        lang = runs[0][0].source_language
        if lang in per_language:
            raise DataError(f"{path}: duplicate run for language {lang!r}")
        per_language[lang] = runs
    return per_language


def cmd_vote(args: argparse.Namespace) -> int:
    per_language = _runs_by_language(args.runs)
    voted = combine_corpus(per_language, "vote", threshold=args.threshold)
    write_run([(seg, None) for seg in voted], args.output)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    per_language = _runs_by_language(args.runs)
    priority = tuple(args.priority.split(",")) if args.priority else None
    results = select_corpus(per_language, priority)
    runs = [
        (r.segmentation,
         AneScore(r.utterance_id, r.chosen_language, r.ane_values[r.chosen_language]))
        for r in results
    ]
    write_run(runs, args.output, lang_override="select")
    return 0


def _score_all(hyps: list[Segmentation], gold: Corpus) -> dict[str, PrfScore]:
    return {
        "boundary": boundary_prf(hyps, gold),
        "token": token_prf(hyps, gold),
        "type": type_prf(hyps, gold),
    }


def cmd_eval(args: argparse.Namespace) -> int:
    gold = load_corpus(args.gold, format=args.format)
    hyps = [seg for seg, _ in read_run(args.hyp)]
    _write_or_print(score_report_tsv(_score_all(hyps, gold)), args.output)
    return 0


def _load_gold_types(path: str) -> set[str]:
    types: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        first = line.split("\t")[0]
        if lineno == 1 and first == "type":
            continue
        types.add(first)
    if not types:
        raise DataError(f"{path}: no gold types found")
    return types


def cmd_lexicon(args: argparse.Namespace) -> int:
    runs = []
    for seg, score in read_run(args.run):
        if score is None:
            raise DataError(
                f"{args.run}: run has no ANE values (sidecar missing?); "
                "lexicon extraction needs scored runs"
            )
        runs.append((seg, score))
    entries = extract_lexicon(runs)
    gold_types = _load_gold_types(args.gold_lexicon) if args.gold_lexicon else None
    _write_or_print(lexicon_report_tsv(entries, top=args.top, gold_types=gold_types),
                    args.output)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(vocab_size=args.vocab, sentences=args.sentences,
                     languages=args.langs, seed=args.seed)
    corpus, lexicon = generate_synthetic(spec)
    out = Path(args.output)
    write_corpus(corpus, out)
    out.with_suffix(".lexicon.tsv").write_text(lexicon_tsv(spec, lexicon), encoding="utf-8")
    return 0


_SYNTH_KEYS = {"seed": "seed", "vocab": "vocab_size", "sentences": "sentences",
               "langs": "languages"}


def _parse_synth_spec(pairs: list[str]) -> SynthSpec:
    kwargs = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in _SYNTH_KEYS:
            raise DataError(
                f"bad synthetic parameter {pair!r} (expected key=value with key in "
                f"{sorted(_SYNTH_KEYS)})"
            )
        try:
            kwargs[_SYNTH_KEYS[key]] = int(value)
        except ValueError as exc:
            raise DataError(f"bad synthetic parameter {pair!r}: {exc}") from exc
    return SynthSpec(**kwargs)


def _language_stage(job: tuple[Corpus, str, AlignerConfig]):
    corpus, lang, config = job
    table = train_ibm1(corpus, lang, config)
    matrices = [posterior_matrix(table, utt, lang, config) for utt in corpus.utterances]
    return matrices, segment_corpus(matrices)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one full run needs; fixed inputs and config give
    byte-identical outputs."""

    output_dir: Path
    corpus_path: Path | None = None
    corpus_format: str = "tsv"
    synthetic: SynthSpec | None = None
    languages: tuple[str, ...] | None = None  # None: every corpus language
    aligner: AlignerConfig = field(default_factory=AlignerConfig)
    vote_threshold: float = 0.5
    lexicon_top: int | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.corpus_path is None and self.synthetic is None:
            raise DataError("pipeline needs a corpus path or synthetic parameters")
        if self.languages is not None and not self.languages:
            raise DataError("language list must be non-empty")
        if self.jobs < 1:
            raise DataError("jobs must be >= 1")


def run_pipeline(cfg: PipelineConfig) -> None:
    """Full run: align and segment per language, vote, select, evaluate.

    Writes per-language matrices, runs, lexicons and reports plus the
    combined outputs into ``cfg.output_dir``.  Evaluation reports appear
    only when every utterance carries gold boundaries.
    """
    out_dir = cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    truth_types: set[str] | None = None
    if cfg.synthetic is not None:
        corpus, lexicon = generate_synthetic(cfg.synthetic)
        write_corpus(corpus, out_dir / "corpus.tsv")
        (out_dir / "truth.lexicon.tsv").write_text(
            lexicon_tsv(cfg.synthetic, lexicon), encoding="utf-8"
        )
        truth_types = set(lexicon)
    else:
        corpus = load_corpus(cfg.corpus_path, format=cfg.corpus_format)
    languages = list(corpus.languages)
    if cfg.languages is not None:
        unknown = [lang for lang in cfg.languages if lang not in corpus.languages]
        if unknown:
            raise DataError(f"languages {unknown} not in corpus {list(corpus.languages)}")
        languages = list(cfg.languages)

    jobs = [(corpus, lang, cfg.aligner) for lang in languages]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            staged = list(pool.map(_language_stage, jobs))
    else:
        staged = [_language_stage(job) for job in jobs]

    have_gold = all(utt.gold_boundaries is not None for utt in corpus.utterances)
    summary: dict[str, PrfScore] = {}
    per_language_runs: dict[str, list[tuple[Segmentation, AneScore | None]]] = {}
    for lang, (matrices, runs) in zip(languages, staged):
        write_matrices(matrices, out_dir / f"matrices_{lang}.jsonl")
        write_run(list(runs), out_dir / f"segs_{lang}.tsv")
        per_language_runs[lang] = list(runs)
        entries = extract_lexicon(list(runs))
        (out_dir / f"lexicon_{lang}.tsv").write_text(
            lexicon_report_tsv(entries, top=cfg.lexicon_top, gold_types=truth_types),
            encoding="utf-8",
        )
        if have_gold:
            scores = _score_all([seg for seg, _ in runs], corpus)
            (out_dir / f"report_{lang}.tsv").write_text(score_report_tsv(scores),
                                                        encoding="utf-8")
            summary[lang] = scores["boundary"]

    combined: dict[str, list[Segmentation]] = {}
    if len(languages) >= 2:
        combined["voted"] = combine_corpus(per_language_runs, "vote",
                                           threshold=cfg.vote_threshold)
        write_run([(seg, None) for seg in combined["voted"]], out_dir / "voted.tsv")
        results = select_corpus(per_language_runs, tuple(languages))
        selected_runs = [
            (r.segmentation,
             AneScore(r.utterance_id, r.chosen_language, r.ane_values[r.chosen_language]))
            for r in results
        ]
        write_run(selected_runs, out_dir / "selected.tsv", lang_override="select")
        combined["selected"] = [r.segmentation for r in results]

    if have_gold:
        for name, segs in combined.items():
            scores = _score_all(segs, corpus)
            (out_dir / f"report_{name}.tsv").write_text(score_report_tsv(scores),
                                                        encoding="utf-8")
            summary[name] = scores["boundary"]
        lines = ["\t".join(("run", "precision", "recall", "f1", "hits", "hyp", "gold"))]
        for name, s in summary.items():
            lines.append("\t".join([
                name, f"{s.precision:.6f}", f"{s.recall:.6f}", f"{s.f1:.6f}",
                str(s.hits), str(s.hyp_count), str(s.gold_count),
            ]))
        (out_dir / "summary.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_pipeline(args: argparse.Namespace) -> int:
    synthetic = None
    languages = None
    if args.synthetic is not None:
        synthetic = _parse_synth_spec(args.synthetic)
        if args.langs and args.langs.isdigit():
            synthetic = SynthSpec(vocab_size=synthetic.vocab_size,
                                  sentences=synthetic.sentences,
                                  languages=int(args.langs), seed=synthetic.seed)
    elif args.langs:
        languages = tuple(args.langs.split(","))
    run_pipeline(PipelineConfig(
        output_dir=Path(args.output),
        corpus_path=Path(args.corpus) if args.corpus else None,
        corpus_format=args.format,
        synthetic=synthetic,
        languages=languages,
        aligner=_aligner_config(args),
        vote_threshold=args.vote,
        lexicon_top=args.top,
        jobs=args.jobs,
    ))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignseg",
        description="Word discovery in unsegmented phoneme corpora from aligned "
                    "word-level translations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus statistics per language")
    p.add_argument("corpus")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--lang", help="restrict to one language")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("align", help="train the aligner and write posterior matrices")
    p.add_argument("corpus")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--lang", required=True)
    _add_aligner_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("segment", help="segment alignment matrices")
    p.add_argument("matrices")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("vote", help="boundary voting across per-language runs")
    p.add_argument("runs", nargs="+")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("select", help="pick the lowest-ANE model per utterance")
    p.add_argument("runs", nargs="+")
    p.add_argument("--priority", help="comma-separated language tie-break order")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="score a run against gold boundaries")
    p.add_argument("hyp")
    p.add_argument("--gold", required=True, help="corpus file with gold segmentation")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lexicon", help="extract the ranked discovered lexicon")
    p.add_argument("run")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--gold-lexicon", help="file whose first column lists true types")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lexicon)

    p = sub.add_parser("synth", help="generate a synthetic corpus with gold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", type=int, default=20)
    p.add_argument("--sentences", type=int, default=200)
    p.add_argument("--langs", type=int, default=3)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="full run: align, segment, combine, evaluate")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--synthetic", nargs="+", metavar="KEY=VALUE",
                   help="generate the corpus instead: seed=, vocab=, sentences=, langs=")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--langs", help="language subset (codes), or count with --synthetic")
    p.add_argument("--vote", type=float, default=0.5, help="agreement threshold")
    p.add_argument("--top", type=int, default=None, help="lexicon entries to keep")
    p.add_argument("--jobs", type=int, default=1, help="parallel language stages")
    _add_aligner_flags(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    entrypoint()
