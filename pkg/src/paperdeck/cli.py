"""Command-line interface composing the pipeline into reproducible runs.

Commands: ``generate``, ``label``, ``features``, ``train``, ``train-size``,
``rouge``, ``evaluate``.  Exit codes: 0 success, 1 usage, 2 input error,
3 internal invariant breach.  Reports go to stdout as ``key=value`` lines;
all randomness flows from ``--seed``; corpus commands process pairs in
sorted-stem order so runs never depend on filesystem enumeration order.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .document import parse_paper, parse_slides, sentence_stream
from .embedding import ProviderConfig, make_embedder, read_cache_dim
from .errors import EmptyTrainingSet, InternalInvariantError, PaperDeckError, TooFewPairs
from .features import CorpusStats, FeatureExtractor
from .metrics import evaluate_corpus, format_report, rouge_n, rouge_su4
from .pipeline import RunConfig, generate_deck
from .render import LayoutConfig
from .salience import (
    label_salience,
    load_model,
    save_model,
    train_on_pairs,
)
from .selection import (
    load_size_model,
    paper_size_features,
    save_size_model,
    train_size_model,
)
from ._text import tokenize


class _UsageError(Exception):
    """Usage problem detected after argparse (maps to exit code 1)."""


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error=Usage message={message!r}", file=sys.stderr)
        raise SystemExit(1)


def _add_provider_flags(parser):
    parser.add_argument(
        "--provider", choices=("hashed", "cache"), default="hashed",
        help="embedding provider (default: hashed)",
    )
    parser.add_argument("--cache", metavar="PATH", help="vector cache TSV")
    parser.add_argument(
        "--dim", type=int, default=None,
        help="embedding dim (default: 256 hashed, cache header for cache)",
    )


def _add_stats_flag(parser):
    parser.add_argument(
        "--stats", metavar="PATH",
        help="corpus stats TSV for IdF (default: single-document stats)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="paperdeck")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a deck from a paper")
    p.add_argument("paper", metavar="PAPER_XML")
    p.add_argument("--model", required=True, help="salience model JSON")
    p.add_argument("--size-model", help="size regression JSON")
    p.add_argument("--out", required=True, help="deck output path")
    p.add_argument("--theta", type=float, default=0.55)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--size-fraction", type=float, default=0.20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--exact-cap", type=int, default=25)
    p.add_argument("--max-bullets", type=int, default=8)
    _add_provider_flags(p)
    _add_stats_flag(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("label", help="salience labels for a paper/slides pair")
    p.add_argument("paper", metavar="PAPER_XML")
    p.add_argument("slides", metavar="SLIDES_TXT")
    p.add_argument("--out", help="labels TSV (default: stdout)")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("features", help="dump the per-sentence feature matrix")
    p.add_argument("paper", metavar="PAPER_XML")
    p.add_argument("--out", help="features TSV (default: stdout)")
    _add_provider_flags(p)
    _add_stats_flag(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the salience model on a pairs dir")
    p.add_argument("pairs", metavar="PAIRS_DIR")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--lr", type=float, default=0.004)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--hidden", default="128,64,32", help="hidden widths")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument(
        "--holdout", type=float, default=0.0,
        help="fraction of pairs held out for a validation MSE report",
    )
    _add_provider_flags(p)
    _add_stats_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-size", help="fit the target-size regression")
    p.add_argument("pairs", metavar="PAIRS_DIR")
    p.add_argument("--out", required=True, help="size model JSON output path")
    p.set_defaults(func=cmd_train_size)

    p = sub.add_parser("rouge", help="ROUGE scores for two text files")
    p.add_argument("candidate", metavar="CANDIDATE_TXT")
    p.add_argument("reference", metavar="REFERENCE_TXT")
    p.set_defaults(func=cmd_rouge)

    p = sub.add_parser("evaluate", help="generate + score decks for a pairs dir")
    p.add_argument("pairs", metavar="PAIRS_DIR")
    p.add_argument("--model", required=True, help="salience model JSON")
    p.add_argument("--size-model", help="size regression JSON")
    p.add_argument("--theta", type=float, default=0.55)
    p.add_argument("--size-fraction", type=float, default=0.20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--exact-cap", type=int, default=25)
    _add_provider_flags(p)
    _add_stats_flag(p)
    p.set_defaults(func=cmd_evaluate)

    return parser


def _embedder_from(args):
    if args.provider == "cache":
        if not args.cache:
            raise _UsageError("--provider cache requires --cache PATH")
        dim = args.dim if args.dim is not None else read_cache_dim(args.cache)
        cfg = ProviderConfig("vector_cache", dim=dim, cache_path=args.cache)
    else:
        cfg = ProviderConfig("hashed_fallback", dim=args.dim or 256)
    return make_embedder(cfg)


def _stats_from(args) -> CorpusStats | None:
    return CorpusStats.load(args.stats) if args.stats else None


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_lines(lines, out_path) -> None:
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def discover_pairs(directory):
    """``<stem>.paper.xml`` + ``<stem>.slides.txt`` pairs, sorted by stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptyTrainingSet(f"{directory} is not a directory")
    pairs = []
    for paper_path in sorted(directory.glob("*.paper.xml")):
        stem = paper_path.name[: -len(".paper.xml")]
        slides_path = directory / f"{stem}.slides.txt"
        pairs.append((stem, paper_path, slides_path if slides_path.exists() else None))
    return pairs


# -- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    paper = parse_paper(_read(args.paper))
    model = load_model(args.model)
    size_model = load_size_model(args.size_model) if args.size_model else None
    run = RunConfig(
        theta=args.theta,
        size=args.size,
        size_fraction=args.size_fraction,
        seed=args.seed,
        exact_cap=args.exact_cap,
        layout=LayoutConfig(max_second_level_per_slide=args.max_bullets),
    )
    result = generate_deck(
        paper,
        model,
        embedder=_embedder_from(args),
        stats=_stats_from(args),
        run=run,
        size_model=size_model,
    )
    Path(args.out).write_bytes(result.deck.encode("utf-8"))
    report = result.report
    for key in (
        "size", "theta", "solver", "selected_count", "total_length",
        "objective", "avg_similarity", "cluster_count", "paper_chars",
    ):
        print(f"{key}={report[key]!r}")
    print(f"out={args.out}")
    for warning in result.warnings:
        print(f"warning={warning!r}")
    if not result.selection.chosen:
        print("note='empty selection'")
    return 0


def cmd_label(args) -> int:
    paper = parse_paper(_read(args.paper))
    slides = parse_slides(_read(args.slides))
    embedder = _embedder_from(args)
    sentences = sentence_stream(paper)
    paper_vecs = embedder.embed([s.text for s in sentences])
    slide_vecs = embedder.embed(list(slides.sentences))
    labels = label_salience(paper_vecs, slide_vecs)
    lines = [
        f"{sent.global_index}\t{float(label)!r}"
        for sent, label in zip(sentences, labels)
    ]
    _write_lines(lines, args.out)
    return 0


def cmd_features(args) -> int:
    paper = parse_paper(_read(args.paper))
    embedder = _embedder_from(args)
    matrix = FeatureExtractor(embedder=embedder, stats=_stats_from(args)).transform(
        paper
    )
    names = list(matrix.schema.scalar_names) + [
        f"e{i}" for i in range(matrix.schema.embedding_dim)
    ]
    lines = ["\t".join(["global_index"] + names)]
    for index, row in enumerate(matrix.values):
        lines.append("\t".join([str(index)] + [repr(float(v)) for v in row]))
    _write_lines(lines, args.out)
    return 0


def _load_training_pair(paper_path, slides_path, embedder, stats):
    paper = parse_paper(_read(paper_path))
    slides = parse_slides(_read(slides_path))
    sentences = sentence_stream(paper)
    vectors = embedder.embed([s.text for s in sentences])
    matrix = FeatureExtractor(embedder=embedder, stats=stats).transform(
        paper, sentence_vectors=vectors
    )
    labels = label_salience(vectors, embedder.embed(list(slides.sentences)))
    return matrix, labels


def cmd_train(args) -> int:
    embedder = _embedder_from(args)
    stats = _stats_from(args)
    hidden = tuple(int(w) for w in args.hidden.split(","))
    usable, skipped = [], 0
    for stem, paper_path, slides_path in discover_pairs(args.pairs):
        if slides_path is None:
            print(f"skip={stem} error=MissingSlides")
            skipped += 1
            continue
        try:
            matrix, labels = _load_training_pair(
                paper_path, slides_path, embedder, stats
            )
        except PaperDeckError as exc:
            print(f"skip={stem} error={type(exc).__name__} message={str(exc)!r}")
            skipped += 1
            continue
        usable.append((stem, matrix, labels))
    if not usable:
        raise EmptyTrainingSet(f"no usable pairs in {args.pairs}")

    holdout_idx: set[int] = set()
    if args.holdout > 0.0:
        rng = np.random.default_rng(args.seed)
        n_hold = int(round(args.holdout * len(usable)))
        n_hold = min(n_hold, len(usable) - 1)
        holdout_idx = set(rng.permutation(len(usable))[:n_hold].tolist())
    train_set = [p for i, p in enumerate(usable) if i not in holdout_idx]
    hold_set = [p for i, p in enumerate(usable) if i in holdout_idx]

    model = train_on_pairs(
        [m for _, m, _ in train_set],
        [l for _, _, l in train_set],
        hidden_sizes=hidden,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    save_model(model, args.out)
    print(f"pairs={len(train_set)} skipped={skipped} holdout={len(hold_set)}")
    print(f"epochs={args.epochs} final_mse={model.loss_history_[-1]!r}")
    if hold_set:
        squared = []
        for _, matrix, labels in hold_set:
            preds = model.predict(matrix)
            squared.extend((preds - np.asarray(labels)) ** 2)
        print(f"holdout_mse={float(np.mean(squared))!r}")
    print(f"out={args.out}")
    return 0


def cmd_train_size(args) -> int:
    rows, skipped = [], 0
    for stem, paper_path, slides_path in discover_pairs(args.pairs):
        if slides_path is None:
            print(f"skip={stem} error=MissingSlides")
            skipped += 1
            continue
        try:
            paper = parse_paper(_read(paper_path))
            slides = parse_slides(_read(slides_path))
        except PaperDeckError as exc:
            print(f"skip={stem} error={type(exc).__name__} message={str(exc)!r}")
            skipped += 1
            continue
        chars = sum(len(s) for s in slides.sentences)
        rows.append((paper_size_features(paper), chars))
    if len(rows) < 8:
        raise TooFewPairs(
            f"size regression needs >= 8 usable pairs, got {len(rows)}"
        )
    model = train_size_model(rows)
    save_size_model(model, args.out)
    print(f"pairs={len(rows)} skipped={skipped}")
    print(f"out={args.out}")
    return 0


def cmd_rouge(args) -> int:
    candidate = tokenize(_read(args.candidate))
    reference = tokenize(_read(args.reference))
    for score in (
        rouge_n(candidate, reference, 1),
        rouge_n(candidate, reference, 2),
        rouge_su4(candidate, reference),
    ):
        name = score.metric.lower()
        print(f"rouge_{name}_precision={score.precision!r}")
        print(f"rouge_{name}_recall={score.recall!r}")
        print(f"rouge_{name}_f1={score.f1!r}")
    return 0


def cmd_evaluate(args) -> int:
    embedder = _embedder_from(args)
    stats = _stats_from(args)
    model = load_model(args.model)
    size_model = load_size_model(args.size_model) if args.size_model else None
    run = RunConfig(
        theta=args.theta,
        size_fraction=args.size_fraction,
        seed=args.seed,
        exact_cap=args.exact_cap,
    )
    scored_pairs = []
    for stem, paper_path, slides_path in discover_pairs(args.pairs):
        if slides_path is None:
            print(f"skip={stem} error=MissingSlides")
            continue
        try:
            paper = parse_paper(_read(paper_path))
            slides = parse_slides(_read(slides_path))
            result = generate_deck(
                paper, model, embedder=embedder, stats=stats, run=run,
                size_model=size_model,
            )
        except PaperDeckError as exc:
            print(f"skip={stem} error={type(exc).__name__} message={str(exc)!r}")
            continue
        scored_pairs.append((result.deck, "\n".join(slides.sentences)))
    if not scored_pairs:
        print("error=EmptyCorpus message='no usable pairs'", file=sys.stderr)
        return 2
    means = evaluate_corpus(scored_pairs)
    print(f"pairs={len(scored_pairs)}")
    print(format_report([("paperdeck", means)]))
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except InternalInvariantError as exc:
        print(
            f"error=InternalInvariantError message={str(exc)!r}", file=sys.stderr
        )
        return 3
    except PaperDeckError as exc:
        print(f"error={type(exc).__name__} message={str(exc)!r}", file=sys.stderr)
        return 2
    except (_UsageError, ValueError) as exc:
        print(f"error=Usage message={str(exc)!r}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error={type(exc).__name__} message={str(exc)!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
