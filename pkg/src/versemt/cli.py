"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 data or validation error,
3 numeric failure during training.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import lexicon, trainer
from .bleu import corpus_bleu, sentence_bleu
from .checkpoint import load_checkpoint, save_checkpoint
from .config import SCHEMA, PipelineConfig, load_config
from .errors import DataError, NumericError
from .sampling import oversample, split_corpus
from .vocab import build_vocab

log = logging.getLogger("versemt")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n\n{self.format_help()}")


def _add_section_flags(parser, *sections):
    """One ``--key-name`` flag per config key in ``sections``."""
    for section in sections:
        group = parser.add_argument_group(f"[{section}] settings")
        for key, (kind, default, _, help_text) in SCHEMA[section].items():
            flag = "--" + key.replace("_", "-")
            group.add_argument(flag, dest=f"cfg__{section}__{key}", default=None,
                               metavar=kind.upper(), help=f"{help_text} (default {default})")


def _resolve(args, require_corpus=False) -> PipelineConfig:
    overrides = list(getattr(args, "set", None) or [])
    for dest, value in vars(args).items():
        if dest.startswith("cfg__") and value is not None:
            _, section, key = dest.split("__")
            overrides.append(f"{section}.{key}={value}")
    return load_config(getattr(args, "config", None), require_corpus=require_corpus,
                       overrides=overrides)


def _stopwords(cfg: PipelineConfig, corpus):
    path = cfg["lexicon.stopwords"]
    if path is not None:
        return set(Path(path).read_text(encoding="utf-8").split())
    return lexicon.default_stopwords(corpus, cfg["lexicon.stopword_count"])


# --- stages ---------------------------------------------------------------

def stage_ingest(cfg: PipelineConfig, out_prefix: Path):
    src_doc = corpus_mod.read_bible_xml(cfg["paths.source_xml"], cfg["corpus.source_language"] or None)
    tgt_doc = corpus_mod.read_bible_xml(cfg["paths.target_xml"], cfg["corpus.target_language"] or None)
    books = cfg["corpus.books"] or None
    corpus = corpus_mod.build_parallel(src_doc, tgt_doc, books)
    n_aligned = len(corpus)
    if cfg["corpus.dedup"]:
        corpus = corpus_mod.dedup_pairs(corpus)
    corpus_mod.write_parallel(corpus, out_prefix)
    report = corpus_mod.alignment_report(corpus, cfg["corpus.ratio_limit"])
    corpus_mod.write_lines(out_prefix.with_name(out_prefix.name + ".outliers.tsv"),
                           [f"{ref}\t{ls}\t{lt}" for ref, ls, lt in report])
    log.info("ingest: %d source verses, %d target verses, %d aligned, %d after dedup, %d outliers",
             len(src_doc), len(tgt_doc), n_aligned, len(corpus), len(report))
    return corpus


def stage_split(cfg: PipelineConfig, corpus, out_dir: Path):
    corpus_mod.check_unique_refs(corpus)
    spec = cfg.split_spec()
    train, val, test = split_corpus(corpus, spec)
    train_os = oversample(train, spec.oversample_factor)
    corpus_mod.write_parallel(train_os, out_dir / "train")
    corpus_mod.write_parallel(val, out_dir / "val")
    corpus_mod.write_parallel(test, out_dir / "test")
    log.info("split: train %d (x%d = %d), val %d, test %d",
             len(train), spec.oversample_factor, len(train_os), len(val), len(test))
    return train, train_os, val, test


def stage_lexicon_auto(cfg: PipelineConfig, corpus, out_dir: Path):
    """Mine the configured tokens and accept every default rule."""
    stop = _stopwords(cfg, corpus)
    sets = [lexicon.mine_candidates(corpus, tok, cfg["lexicon.top_k"], stop)
            for tok in cfg["lexicon.tokens"]]
    (out_dir / "candidates.tsv").write_text(lexicon.format_candidate_report(sets), encoding="utf-8")
    return lexicon.review_candidates(sets, interactive=False)


def stage_train(cfg: PipelineConfig, train_os, train_base, val, out_dir: Path):
    src_vocab = build_vocab(train_base.sources(), cfg["vocab.max_size"], cfg["vocab.min_count"])
    tgt_vocab = build_vocab(train_base.targets(), cfg["vocab.max_size"], cfg["vocab.min_count"])
    src_vocab.save(out_dir / "vocab.src")
    tgt_vocab.save(out_dir / "vocab.tgt")
    dims = cfg.model_dims(len(src_vocab), len(tgt_vocab))
    tconf = cfg.train_config()
    params, tlog = trainer.run_training(train_os, val, src_vocab, tgt_vocab, dims, tconf)
    (out_dir / "training_log.json").write_text(tlog.to_json(), encoding="utf-8")
    save_checkpoint(params, src_vocab, tgt_vocab, tlog.step, out_dir / "model.ckpt")
    log.info("train: %s after %d steps", tlog.status, tlog.step)
    if tlog.status == trainer.NUMERIC_ERROR:
        raise NumericError(tlog.error)
    return params, src_vocab, tgt_vocab


def write_eval(hyps, refs, cfg: PipelineConfig, out_json: Path | None, per_sentence: Path | None):
    report = corpus_bleu(hyps, refs, cfg["bleu.max_n"], cfg["bleu.smoothing"])
    text = json.dumps(report.as_dict(), indent=1) + "\n"
    if out_json is not None:
        out_json.write_text(text, encoding="utf-8")
    if per_sentence is not None:
        rows = ["line\tbleu"]
        for i, (h, r) in enumerate(zip(hyps, refs), 1):
            s = sentence_bleu(h, r, cfg["bleu.max_n"], cfg["bleu.sentence_smoothing"])
            rows.append(f"{i}\t{s.score:.2f}")
        corpus_mod.write_lines(per_sentence, rows)
    return report, text


# --- subcommands ----------------------------------------------------------

def cmd_ingest(args):
    cfg = _resolve(args)
    for key in ("paths.source_xml", "paths.target_xml"):
        if cfg[key] is None:
            raise UsageError(f"ingest needs --{key.split('.')[1].replace('_', '-')}")
    out = Path(args.out) if args.out else Path(cfg["paths.workdir"]) / "corpus"
    stage_ingest(cfg, out)


def cmd_split(args):
    cfg = _resolve(args)
    corpus = corpus_mod.read_parallel(args.corpus)
    stage_split(cfg, corpus, Path(args.out_dir))


def cmd_lexicon_mine(args):
    cfg = _resolve(args)
    corpus = corpus_mod.read_parallel(args.corpus)
    tokens = list(cfg["lexicon.tokens"])
    if args.top:
        ranked = lexicon.count_tokens(corpus, "source").ranked()
        tokens += [tok for tok, _ in ranked if tok.isalpha()][:args.top]
    if not tokens:
        raise UsageError("lexicon mine needs --tokens or --top")
    stop = _stopwords(cfg, corpus)
    sets = [lexicon.mine_candidates(corpus, tok, cfg["lexicon.top_k"], stop)
            for tok in dict.fromkeys(tokens)]
    text = lexicon.format_candidate_report(sets)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_lexicon_review(args):
    sets = lexicon.parse_candidate_report(Path(args.report).read_text(encoding="utf-8"))
    if args.non_interactive:
        table = lexicon.review_candidates(sets, interactive=False)
    else:
        with open("/dev/tty") if args.tty else contextlib.nullcontext(sys.stdin) as fh:
            table = lexicon.review_candidates(sets, input=fh, output=sys.stderr)
    lexicon.write_table(table, args.out)
    if table.aborted:
        print(f"review aborted: wrote {len(table)} rules to {args.out}", file=sys.stderr)


def cmd_lexicon_apply(args):
    corpus = corpus_mod.read_parallel(args.corpus)
    table = lexicon.read_table(args.table)
    corpus_mod.write_parallel(lexicon.apply_table(corpus, table), Path(args.out))


def cmd_train(args):
    cfg = _resolve(args)
    train_os = corpus_mod.read_parallel(args.train)
    base = corpus_mod.read_parallel(args.vocab_from) if args.vocab_from else train_os
    val = corpus_mod.read_parallel(args.val) if args.val else None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stage_train(cfg, train_os, base, val, out_dir)


def cmd_translate(args):
    params, src_vocab, tgt_vocab, _ = load_checkpoint(args.checkpoint)
    with open(args.input, encoding="utf-8") as fh:
        sentences = [corpus_mod.tokenize(corpus_mod.normalize_text(line)) for line in fh]
    hyps = trainer.translate_corpus(params, src_vocab, tgt_vocab, sentences, args.max_len)
    lines = [" ".join(h) for h in hyps]
    if args.output:
        corpus_mod.write_lines(args.output, lines)
    else:
        sys.stdout.write("".join(line + "\n" for line in lines))


def _read_tokenized(path):
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh]


def cmd_eval(args):
    cfg = _resolve(args)
    hyps, refs = _read_tokenized(args.hyp), _read_tokenized(args.ref)
    _, text = write_eval(hyps, refs, cfg, Path(args.output) if args.output else None,
                         Path(args.per_sentence) if args.per_sentence else None)
    sys.stdout.write(text)


def cmd_pipeline(args):
    cfg = _resolve(args, require_corpus=True)
    work = Path(cfg["paths.workdir"])
    work.mkdir(parents=True, exist_ok=True)
    (work / "effective_config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    corpus = stage_ingest(cfg, work / "corpus")
    table = None
    if cfg["lexicon.table"] is not None:
        table = lexicon.read_table(cfg["lexicon.table"])
    elif cfg["lexicon.tokens"]:
        table = stage_lexicon_auto(cfg, corpus, work)
    if table is not None:
        lexicon.write_table(table, work / "substitution_table.tsv")
        corpus = lexicon.apply_table(corpus, table)
        corpus_mod.write_parallel(corpus, work / "corpus.sub")
    train, train_os, val, test = stage_split(cfg, corpus, work)
    params, src_vocab, tgt_vocab = stage_train(cfg, train_os, train, val, work)
    hyps = trainer.translate_corpus(params, src_vocab, tgt_vocab, test.sources(),
                                    cfg["translate.max_len"])
    corpus_mod.write_lines(work / "test.hyp", [" ".join(h) for h in hyps])
    corpus_mod.write_lines(work / "test.ref", [" ".join(t) for t in test.targets()])
    report, _ = write_eval(hyps, test.targets(), cfg, work / "eval.json", work / "test.sentbleu.tsv")
    print(f"test BLEU {report.score:.2f}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="versemt", description="Verse-aligned low-resource MT toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, fn, help_text, parent=sub):
        sp = parent.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="INI configuration file")
        sp.set_defaults(func=fn)
        return sp

    sp = command("ingest", cmd_ingest, "parse, clean and align two Bible XML files")
    _add_section_flags(sp, "paths", "corpus")
    sp.add_argument("--out", help="output prefix (writes PREFIX.src/.tgt/.idx)")

    sp = command("split", cmd_split, "split a parallel corpus and oversample its training part")
    sp.add_argument("--corpus", required=True, help="input prefix")
    sp.add_argument("--out-dir", required=True)
    _add_section_flags(sp, "split")

    lx = sub.add_parser("lexicon", help="mine, review and apply substitution rules")
    lsub = lx.add_subparsers(dest="lexicon_command", parser_class=_Parser)
    sp = command("mine", cmd_lexicon_mine, "rank candidate translations of source tokens", lsub)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--top", type=int, default=0, help="also mine the N most frequent alphabetic source tokens")
    sp.add_argument("--out", help="candidate report (TSV); stdout if omitted")
    _add_section_flags(sp, "lexicon")
    sp = command("review", cmd_lexicon_review, "choose rules from a candidate report", lsub)
    sp.add_argument("--report", required=True)
    sp.add_argument("--out", required=True, help="substitution table (TSV)")
    sp.add_argument("--non-interactive", action="store_true", help="accept every default")
    sp.add_argument("--tty", action="store_true", help="read answers from /dev/tty instead of stdin")
    sp = command("apply", cmd_lexicon_apply, "apply a substitution table to a parallel corpus", lsub)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--table", required=True)
    sp.add_argument("--out", required=True, help="output prefix")

    sp = command("train", cmd_train, "train the encoder-decoder")
    sp.add_argument("--train", required=True, help="training prefix")
    sp.add_argument("--val", help="validation prefix")
    sp.add_argument("--vocab-from", help="prefix to build vocabularies from (default: --train)")
    sp.add_argument("--out-dir", required=True)
    _add_section_flags(sp, "vocab", "model", "train", "bleu")

    sp = command("translate", cmd_translate, "greedy-decode one sentence per line")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--output")
    sp.add_argument("--max-len", type=int, default=100)

    sp = command("eval", cmd_eval, "corpus BLEU of a hypothesis file against a reference file")
    sp.add_argument("--hyp", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--output", help="also write the JSON report here")
    sp.add_argument("--per-sentence", help="write per-sentence BLEU TSV here")
    _add_section_flags(sp, "bleu")

    sp = command("pipeline", cmd_pipeline, "run every stage from XML to test BLEU")
    sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        if not argv:
            raise UsageError(parser.format_help())
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        if getattr(args, "func", None) is None:
            raise UsageError(parser.format_help())
        args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
