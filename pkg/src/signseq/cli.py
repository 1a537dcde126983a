"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error.  All randomness flows
from explicit --seed flags and every output is machine-parseable (CSV on
stdout unless --output is given; reports on stderr as key=value lines).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys

from .corpus import (
    GAP,
    build_ebuds,
    clean_report,
    load_corpus,
    reverse_texts,
    save_corpus,
)
from .crossval import CrossValConfig, cross_validate
from .infotheory import corpus_entropy_mi, perplexity_sweep
from .ngram import ModelConfig, NgramModel, load_model_file, save_model_file
from .restore import most_probable_text, viterbi_restore
from .significance import rank_significant_pairs
from .stats import (
    cumulative_coverage,
    fit_zipf_mandelbrot,
    positional_frequencies,
    rank_frequency,
    rank_table_rows,
    unigram_frequencies,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


@contextlib.contextmanager
def _out_stream(path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle
    else:
        yield sys.stdout


def _write_rows(path, header, rows) -> None:
    with _out_stream(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _parse_text_arg(text: str) -> tuple[int, ...]:
    tokens = []
    for token in text.split():
        if token == "?":
            tokens.append(GAP)
        else:
            try:
                tokens.append(int(token))
            except ValueError:
                raise UsageError(f"not a sign id or '?': {token!r}") from None
    if not tokens:
        raise UsageError("empty text")
    return tuple(tokens)


def _parse_orders(spec: str) -> list[int]:
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            orders = list(range(int(lo), int(hi) + 1))
        else:
            orders = [int(part) for part in spec.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse orders {spec!r}") from None
    if not orders or any(not 1 <= o <= 5 for o in orders):
        raise UsageError("orders must lie in 1..5")
    return orders


def _load(args, path=None):
    return load_corpus(
        path or args.input,
        getattr(args, "vocab", None),
        max_length=getattr(args, "max_length", 14),
    )


def _model_config(args, vocabulary_size: int) -> ModelConfig:
    return ModelConfig(
        order=args.order,
        smoothing=args.smoothing,
        vocabulary_size=vocabulary_size,
        katz_gt_threshold=args.katz_threshold,
        katz_fallback_discount=args.katz_discount,
    )


# -- subcommands ----------------------------------------------------------


def cmd_clean(args) -> int:
    raw = _load(args)
    if args.reverse:
        raw = reverse_texts(raw)
    cleaned = build_ebuds(raw, keep_damaged=args.keep_damaged)
    save_corpus(cleaned, args.out)
    report = clean_report(raw, cleaned)
    for key in ("texts_in", "texts_out", "removed_damaged", "removed_multiline",
                "removed_duplicates"):
        print(f"{key}={getattr(report, key)}", file=sys.stderr)
    for warning in report.warnings:
        print(f"warning={warning}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    corpus = _load(args)
    if args.positional:
        table = positional_frequencies(corpus, args.positional)
    else:
        table = unigram_frequencies(corpus)

    if args.zipf:
        fit = fit_zipf_mandelbrot([(r, f) for r, _s, f in rank_frequency(table)])
        _write_rows(
            args.output,
            ("a", "b", "c", "residual", "iterations", "degenerate"),
            [(fit.a, fit.b, fit.c, fit.residual, fit.iterations, int(fit.degenerate))],
        )
    elif args.coverage is not None:
        k = cumulative_coverage(table, args.coverage)
        _write_rows(args.output, ("fraction", "signs"), [(args.coverage, k)])
    else:
        _write_rows(
            args.output,
            ("rank", "sign", "count", "probability", "cumulative"),
            rank_table_rows(table),
        )
    return 0


def cmd_train(args) -> int:
    corpus = _load(args)
    model = NgramModel.train(corpus, _model_config(args, corpus.vocabulary_size))
    save_model_file(model, args.out)
    print(f"trained order={model.order} smoothing={model.config.smoothing} "
          f"texts={model.counts.num_texts}", file=sys.stderr)
    return 0


def cmd_score(args) -> int:
    model = load_model_file(args.model)
    if not args.text and not args.input:
        raise UsageError("need --text or --input")
    if args.text:
        texts = [_parse_text_arg(args.text)]
    else:
        texts = [t.tokens for t in load_corpus(args.input).texts]
    rows = []
    for tokens in texts:
        log_prob = model.sequence_log_prob(
            tokens, include_end=not args.no_end, boundary_free=args.boundary_free
        )
        rows.append((" ".join(map(str, tokens)), log_prob))
    _write_rows(args.output, ("text", "log2_prob"), rows)
    return 0


def cmd_generate(args) -> int:
    model = load_model_file(args.model)
    rows = []
    for i in range(args.count):
        tokens = model.generate(args.seed + i, args.max_len)
        rows.append((args.seed + i, len(tokens), " ".join(map(str, tokens))))
    _write_rows(args.output, ("seed", "length", "text"), rows)
    return 0


def cmd_matrix(args) -> int:
    model = load_model_file(args.model)
    matrix = model.independence_reference() if args.reference else model.bigram_matrix()
    header = ["sign", "end"] + [str(b) for b in range(1, model.vocabulary_size + 1)]
    rows = (
        [a] + [float(x) for x in matrix[a - 1]]
        for a in range(1, model.vocabulary_size + 1)
    )
    _write_rows(args.output, header, rows)
    return 0


def cmd_entropy(args) -> int:
    corpus = _load(args)
    report = corpus_entropy_mi(corpus, include_boundaries=args.include_boundaries)
    _write_rows(
        args.output,
        ("entropy_bits", "mutual_information_bits", "token_count"),
        [(report.entropy_bits, report.mutual_information_bits, report.token_count)],
    )
    return 0


def cmd_perplexity(args) -> int:
    if args.test:
        if not (args.train or args.input):
            raise UsageError("--test needs a --train file (or positional input)")
        train = _load(args, args.train or args.input)
        test = _load(args, args.test)
    else:
        if not args.input:
            raise UsageError("need a corpus (positional input) or --train/--test files")
        import random

        corpus = _load(args)
        texts = list(corpus.texts)
        random.Random(args.seed).shuffle(texts)
        split = round(len(texts) * (1.0 - args.holdout_fraction))
        if split == 0 or split == len(texts):
            raise ValueError("holdout split leaves an empty train or test set")
        from .corpus import Corpus

        train = Corpus(corpus.vocabulary_size, tuple(texts[:split]), f"{corpus.label}-train")
        test = Corpus(corpus.vocabulary_size, tuple(texts[split:]), f"{corpus.label}-test")

    reports = perplexity_sweep(
        train,
        test,
        _parse_orders(args.orders),
        smoothing=args.smoothing,
        include_end=not args.no_end,
        katz_gt_threshold=args.katz_threshold,
        katz_fallback_discount=args.katz_discount,
    )
    _write_rows(
        args.output,
        ("order", "cross_entropy_bits_per_token", "perplexity", "events"),
        [
            (r.order, r.cross_entropy_bits_per_token, r.perplexity, r.held_out_token_count)
            for r in reports
        ],
    )
    return 0


def cmd_significant(args) -> int:
    from .ngram import count_ngrams

    corpus = _load(args)
    counts = count_ngrams(corpus, 2)
    pairs = rank_significant_pairs(counts, args.top, include_boundaries=args.include_boundaries)
    _write_rows(
        args.output,
        ("first", "second", "count", "frequency_rank", "ll_value", "ll_rank"),
        [
            (p.pair[0], p.pair[1], p.observed_count, p.frequency_rank, p.ll_value, p.ll_rank)
            for p in pairs
        ],
    )
    return 0


def cmd_restore(args) -> int:
    model = load_model_file(args.model)
    if not args.text and not args.input:
        raise UsageError("need --text or --input")
    if args.text:
        texts = [_parse_text_arg(args.text)]
    else:
        texts = [t.tokens for t in load_corpus(args.input).texts]

    if args.json:
        from .service import encode_json, restore_payload

        chunks = [
            encode_json(restore_payload(model, tokens, args.top_k)).decode("utf-8")
            for tokens in texts
        ]
        with _out_stream(args.output) as stream:
            stream.write("\n".join(chunks))
        return 0

    rows = []
    for tokens in texts:
        rendered = " ".join("?" if t == GAP else str(t) for t in tokens)
        result = viterbi_restore(model, tokens, args.top_k)
        for rank, assignment in enumerate(result.assignments, start=1):
            rows.append(
                (
                    rendered,
                    rank,
                    " ".join(map(str, assignment.filling)),
                    assignment.log_prob,
                    assignment.probability,
                )
            )
    _write_rows(args.output, ("text", "rank", "filling", "log2_prob", "probability"), rows)
    return 0


def cmd_argmax_text(args) -> int:
    model = load_model_file(args.model)
    tokens, log_prob = most_probable_text(model, args.length)
    _write_rows(
        args.output,
        ("length", "text", "log2_prob"),
        [(args.length, " ".join(map(str, tokens)), log_prob)],
    )
    return 0


def cmd_crossval(args) -> int:
    corpus = _load(args)
    config = CrossValConfig(
        k=args.k,
        coverage=args.coverage,
        trials_per_fold=args.trials,
        seed=args.seed,
        order=args.order,
        smoothing=args.smoothing,
        threads=args.threads,
    )
    report = cross_validate(corpus, config)
    rows = [
        (f.fold, f.trials, f.mean_sensitivity, f.stdev_sensitivity, f.skipped_texts)
        for f in report.folds
    ]
    rows.append(("overall", report.trials_per_fold * len(report.folds),
                 report.overall_mean, "", ""))
    _write_rows(
        args.output,
        ("fold", "trials", "mean_sensitivity", "stdev_sensitivity", "skipped_texts"),
        rows,
    )
    if args.trials_out:
        _write_rows(
            args.trials_out,
            ("fold", "trial", "sensitivity"),
            (
                (f.fold, t, s)
                for f in report.folds
                for t, s in enumerate(f.sensitivities)
            ),
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model = load_model_file(args.model)
    app = create_app(model, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="signseq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--output", help="write CSV here instead of stdout")
        return p

    def add_corpus_flags(p):
        p.add_argument("--vocab", type=int)
        p.add_argument("--max-length", type=int, default=14,
                       help="longest legal text when parsing corpora")

    def add_model_flags(p):
        p.add_argument("--order", type=int, default=2)
        p.add_argument("--smoothing", default="witten_bell",
                       choices=["mle", "add_one", "witten_bell", "katz"])
        p.add_argument("--katz-threshold", type=int, default=5)
        p.add_argument("--katz-discount", type=float, default=0.5)

    p = add("clean", cmd_clean, help="prune a raw corpus to its EBUDS form")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    add_corpus_flags(p)
    p.add_argument("--keep-damaged", action="store_true",
                   help="only deduplicate (keep damaged and multi-line texts)")
    p.add_argument("--reverse", action="store_true",
                   help="flip token order of every text on input")

    p = add("stats", cmd_stats, help="frequency, Zipf, coverage, positional tables")
    p.add_argument("input")
    add_corpus_flags(p)
    p.add_argument("--positional", choices=["beginner", "ender"])
    p.add_argument("--zipf", action="store_true")
    p.add_argument("--coverage", type=float)

    p = add("train", cmd_train, help="count, smooth, and save a model")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    add_corpus_flags(p)
    add_model_flags(p)

    p = add("score", cmd_score, help="log2 probability of complete texts")
    p.add_argument("--model", required=True)
    p.add_argument("--text")
    p.add_argument("--input")
    p.add_argument("--no-end", action="store_true")
    p.add_argument("--boundary-free", action="store_true")

    p = add("generate", cmd_generate, help="sample texts from a smoothed model")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-len", type=int, default=14)
    p.add_argument("--count", type=int, default=1)

    p = add("matrix", cmd_matrix, help="conditional probability matrix as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--reference", action="store_true",
                   help="emit the no-correlation reference instead")

    p = add("entropy", cmd_entropy, help="corpus entropy and mutual information")
    p.add_argument("input")
    add_corpus_flags(p)
    p.add_argument("--include-boundaries", action="store_true")

    p = add("perplexity", cmd_perplexity, help="cross-entropy sweep over model orders")
    p.add_argument("input", nargs="?")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--holdout-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--orders", default="1..5")
    add_corpus_flags(p)
    p.add_argument("--no-end", action="store_true")
    p.add_argument("--smoothing", default="witten_bell",
                   choices=["add_one", "witten_bell", "katz"])
    p.add_argument("--katz-threshold", type=int, default=5)
    p.add_argument("--katz-discount", type=float, default=0.5)

    p = add("significant", cmd_significant, help="log-likelihood ranked sign pairs")
    p.add_argument("input")
    add_corpus_flags(p)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--include-boundaries", action="store_true")

    p = add("restore", cmd_restore, help="ranked fillings for gapped texts")
    p.add_argument("--model", required=True)
    p.add_argument("--text", help="inline text, e.g. \"267 ? 342\"")
    p.add_argument("--input", help="corpus file of gapped texts")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--json", action="store_true",
                   help="emit the service wire format (one JSON object per text)")

    p = add("argmax-text", cmd_argmax_text, help="most probable text of a length")
    p.add_argument("--model", required=True)
    p.add_argument("--length", type=int, required=True)

    p = add("crossval", cmd_crossval, help="k-fold restoration sensitivity")
    p.add_argument("input")
    add_corpus_flags(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--coverage", type=float, default=0.90)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--smoothing", default="witten_bell",
                   choices=["add_one", "witten_bell", "katz"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trials-out", help="also write per-trial sensitivities here")

    p = add("serve", cmd_serve, help="run the HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8600)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory of UI assets to serve at /")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
