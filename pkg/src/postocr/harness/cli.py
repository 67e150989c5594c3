"""Command-line interface: ``postocr <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from postocr.corrector import (
    DecodingConfig,
    IdentityCorrector,
    OracleCorrector,
    load_model,
    save_model,
    train_noisy_channel,
)
from postocr.corrector.base import DecodingMethod
from postocr.ensemble import WeightingKind, correct_document
from postocr.errors import PostOCRError
from postocr.harness.config import ConfigError, load_config
from postocr.harness.grid import DEFAULT_SIZES, ExperimentConfig, GridCell, GridResult, run_grid
from postocr.harness.report import best_table, emit_report, read_per_document
from postocr.harness.synth import NoiseChannelSpec, clean_texts, synth_corpus
from postocr.metrics import CerReport, cer
from postocr.textdata import (
    corpus_training_pairs,
    load_corpus,
    split_train_dev,
    write_corpus,
)
from postocr.windowing import WindowKind, WindowSpec

log = logging.getLogger("postocr")

CORRECTORS = ("noisy", "identity", "oracle")


def _csv_list(cast):
    def parse(text):
        try:
            return tuple(cast(v.strip()) for v in str(text).split(",") if v.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    parse.__name__ = getattr(cast, "__name__", "value") + " list"
    return parse


def _choice(enum_cls):
    def parse(text):
        try:
            return enum_cls(text)
        except ValueError:
            names = ", ".join(e.value for e in enum_cls)
            raise argparse.ArgumentTypeError(f"invalid choice {text!r} (choose from {names})")

    parse.__name__ = enum_cls.__name__
    return parse


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


# ---------------------------------------------------------------- options


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_window(p):
    p.add_argument("--window-type", type=_choice(WindowKind), default=WindowKind.NGRAMS)
    p.add_argument("--window-size", type=_positive, default=20)
    p.add_argument("--decoding", type=_choice(DecodingMethod), default=DecodingMethod.BEAM)
    p.add_argument("--beam-width", type=_positive, default=5)
    p.add_argument("--weighting", type=_choice(WeightingKind), default=WeightingKind.UNIFORM)
    p.add_argument("--max-len-factor", type=float, default=1.5)


def _add_corrector(p):
    p.add_argument("--model", metavar="PATH", help="model file written by 'train'")
    p.add_argument("--corrector", choices=CORRECTORS, default="noisy",
                   help="'identity' and 'oracle' need no model (oracle reads GS_aligned)")
    p.add_argument("--lm-weight", type=float, default=None,
                   help="override the language-model weight stored in the model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postocr", description="Window-ensemble post-OCR correction."
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("ingest", help="parse a corpus directory and report on it")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, help="write the documents back in canonical form here")
    _add_common(p)

    p = sub.add_parser("extract-pairs", help="write training pairs as JSON lines")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--w-train", type=_positive, default=100)
    p.add_argument("--stride", type=_positive, default=1)
    _add_common(p)

    p = sub.add_parser("train", help="train the noisy-channel corrector")
    p.add_argument("corpus", type=Path)
    p.add_argument("--model", type=Path, required=True, help="output model file")
    p.add_argument("--n-dev", type=int, default=0,
                   help="documents held out of training (listed on stdout)")
    p.add_argument("--w-train", type=_positive, default=100)
    p.add_argument("--stride", type=_positive, default=1)
    p.add_argument("--lm-order", type=_positive, default=5)
    p.add_argument("--smoothing", type=float, default=0.1)
    p.add_argument("--lm-weight", type=float, default=1.0)
    p.add_argument("--max-deletions", type=int, default=2)
    _add_common(p)

    p = sub.add_parser("correct", help="correct the OCR text of every document")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True, help="directory for <doc_id>.txt")
    _add_corrector(p)
    _add_window(p)
    _add_common(p)

    p = sub.add_parser("evaluate", help="correct and score one configuration")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True, help="report directory")
    _add_corrector(p)
    _add_window(p)
    _add_common(p)

    p = sub.add_parser("grid", help="evaluate a grid of configurations")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True, help="report directory")
    _add_corrector(p)
    p.add_argument("--window-type", type=_csv_list(WindowKind), default="disjoint,ngrams")
    p.add_argument("--window-size", type=_csv_list(int),
                   default=",".join(map(str, DEFAULT_SIZES)))
    p.add_argument("--decoding", type=_csv_list(DecodingMethod), default="greedy,beam")
    p.add_argument("--weighting", type=_csv_list(WeightingKind),
                   default="bell,triangle,uniform")
    p.add_argument("--beam-width", type=_positive, default=5)
    p.add_argument("--max-len-factor", type=float, default=1.5)
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic aligned corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--docs", type=_positive, default=50)
    p.add_argument("--length", type=_positive, default=1000)
    p.add_argument("--holdout", type=int, default=0,
                   help="last N documents go to <out>/test/<name>, the rest to <out>/train/<name>")
    p.add_argument("--name", default="synthetic")
    p.add_argument("--substitution-rate", type=float, default=0.10)
    p.add_argument("--deletion-rate", type=float, default=0.02)
    p.add_argument("--insertion-rate", type=float, default=0.02)
    _add_common(p)

    p = sub.add_parser("report", help="rebuild grouped tables from per-document CSVs")
    p.add_argument("results", type=Path, nargs="+",
                   help="report directories (or per_document.csv files)")
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known - {"config"})
        if unknown:
            raise ConfigError(f"{args.config}: unknown key(s) for {args.command}: "
                              + ", ".join(unknown))
        sub.set_defaults(**{k: v for k, v in values.items() if k != "config"})
        args = parser.parse_args(argv)
    return args


# --------------------------------------------------------------- commands


def _load(path: Path):
    corpus = load_corpus(path)
    for file, err in corpus.load_errors:
        print(f"postocr: warning: {file}: {err}", file=sys.stderr)
    if not len(corpus):
        raise PostOCRError(f"{path}: no readable documents")
    return corpus


def _corrector(args):
    if args.corrector == "identity":
        return IdentityCorrector()
    if args.corrector == "oracle":
        return lambda doc: OracleCorrector(doc.ground_truth, doc.ocr_raw)
    if args.model is None:
        raise PostOCRError("--model is required with the noisy corrector")
    model = load_model(args.model)
    if args.lm_weight is not None:
        model.lm_weight = float(args.lm_weight)
    return model


def _window_cfg(args):
    spec = WindowSpec(args.window_type, args.window_size)
    cfg = DecodingConfig(args.decoding, args.beam_width, args.max_len_factor)
    return spec, cfg


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus)
    for file, err in corpus.load_errors:
        print(f"postocr: error: {file}: {err}", file=sys.stderr)
    for doc in corpus:
        print(f"{doc.doc_id}\t{len(doc.ocr_raw)}\t{cer(doc.ocr_raw, doc.ground_truth)!r}")
    print(f"# {len(corpus)} documents, {len(corpus.load_errors)} errors", file=sys.stderr)
    if args.out:
        write_corpus(corpus, args.out)
    return 1 if corpus.load_errors else 0


def cmd_extract_pairs(args) -> int:
    corpus = _load(args.corpus)
    pairs = corpus_training_pairs(corpus, args.w_train, args.stride)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps({"source": p.source, "target": p.target,
                                 "doc_id": p.origin[0], "offset": p.origin[1]},
                                ensure_ascii=False) + "\n")
    print(f"{len(pairs)} pairs written to {args.out}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    corpus = _load(args.corpus)
    train, dev = split_train_dev(corpus, args.n_dev, args.seed)
    pairs = corpus_training_pairs(train, args.w_train, args.stride)
    model = train_noisy_channel(pairs, args.lm_order, args.smoothing, args.lm_weight,
                                args.max_deletions)
    args.model.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.model)
    for doc in dev:
        print(doc.doc_id)
    print(f"trained on {len(train)} documents ({len(pairs)} pairs); model: {args.model}",
          file=sys.stderr)
    return 0


def cmd_correct(args) -> int:
    corpus = _load(args.corpus)
    spec, cfg = _window_cfg(args)
    source = _corrector(args)
    args.out.mkdir(parents=True, exist_ok=True)
    for doc in corpus:
        corr = source(doc) if callable(source) and not hasattr(source, "correct") else source
        try:
            text = correct_document(doc.ocr_raw, corr, spec, cfg, args.weighting)
        except PostOCRError as exc:
            raise PostOCRError(f"{args.corpus / (doc.doc_id + '.txt')}: {exc}") from exc
        (args.out / f"{doc.doc_id}.txt").write_text(text, encoding="utf-8", newline="")
    print(f"{len(corpus)} documents written to {args.out}", file=sys.stderr)
    return 0


def _run_and_report(args, config: ExperimentConfig) -> int:
    corpus = _load(args.corpus)
    results = run_grid(corpus, _corrector(args), config)
    emit_report(results, args.out)
    failures = [(r.cell.label(), d, e) for r in results for d, e in r.failures]
    for label, doc_id, err in failures:
        print(f"postocr: error: {args.corpus / (doc_id + '.txt')} [{label}]: {err}",
              file=sys.stderr)
    sys.stdout.write(best_table(results))
    return 1 if failures else 0


def cmd_evaluate(args) -> int:
    config = ExperimentConfig(
        kinds=(args.window_type,), sizes=(args.window_size,), decodings=(args.decoding,),
        weightings=(args.weighting,), beam_width=args.beam_width, lm_weight=args.lm_weight,
        max_len_factor=args.max_len_factor, seed=args.seed, workers=args.workers,
    )
    return _run_and_report(args, config)


def cmd_grid(args) -> int:
    config = ExperimentConfig(
        kinds=args.window_type, sizes=args.window_size, decodings=args.decoding,
        weightings=args.weighting, beam_width=args.beam_width, lm_weight=args.lm_weight,
        max_len_factor=args.max_len_factor, seed=args.seed, workers=args.workers,
    )
    return _run_and_report(args, config)


def cmd_synth(args) -> int:
    if not 0 <= args.holdout <= args.docs:
        raise PostOCRError(f"--holdout must lie in [0, {args.docs}]")
    spec = NoiseChannelSpec(args.substitution_rate, args.deletion_rate, args.insertion_rate,
                            seed=args.seed)
    corpus = synth_corpus(clean_texts(args.docs, args.length, args.seed), spec, args.name)
    if args.holdout:
        cut = len(corpus) - args.holdout
        write_corpus(type(corpus)(corpus.documents[:cut], args.name), args.out / "train" / args.name)
        write_corpus(type(corpus)(corpus.documents[cut:], args.name), args.out / "test" / args.name)
    else:
        write_corpus(corpus, args.out / args.name)
    print(f"{len(corpus)} documents written under {args.out}", file=sys.stderr)
    return 0


def _results_from_csv(path: Path, corpus: str) -> list[GridResult]:
    cells: dict[GridCell, GridResult] = {}
    for row in read_per_document(path):
        cell = GridCell(WindowKind(row["kind"]), int(row["size"]),
                        DecodingMethod(row["decoding"]), row["weighting"])
        res = cells.setdefault(cell, GridResult(cell, corpus))
        res.reports.append(CerReport(row["doc_id"], float(row["cer_before"]),
                                     float(row["cer_after"])))
    return list(cells.values())


def cmd_report(args) -> int:
    results = []
    for root in args.results:
        files = [root] if root.is_file() else sorted(root.glob("*/per_document.csv"))
        if not files:
            raise PostOCRError(f"{root}: no per_document.csv found")
        for f in files:
            results.extend(_results_from_csv(f, f.parent.name))
    emit_report(results, args.out)
    sys.stdout.write(best_table(results))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "extract-pairs": cmd_extract_pairs,
    "train": cmd_train,
    "correct": cmd_correct,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"postocr: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (PostOCRError, OSError, ValueError, KeyError) as exc:
        print(f"postocr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
