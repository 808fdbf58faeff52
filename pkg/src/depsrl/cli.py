"""Command-line surface.

    depsrl train    --config FILE [--seed N]
    depsrl predict  --model FILE --input FILE --output FILE [--mode M]
    depsrl evaluate --gold FILE --pred FILE [--mode M] [--tsv]
    depsrl stats    --input FILE --k-max N [--format M] [--source gold|pred]
    depsrl ablate   --config FILE --variants a,b,c

Exit codes: 0 success, 2 usage or configuration, 3 data, 4 internal.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import replace

from .checkpoint import CheckpointError, ModeMismatchError, load_checkpoint, \
    save_checkpoint
from .config import ConfigError, RunConfig, load_config
from .conll import ParseError, load_embeddings, parse_conll, write_conll
from .evaluation import AlignmentError, ablation_report, report_text, report_tsv, \
    score_semantic
from .model import predict_sentence
from .pairs import DataError, PruningConfig, pruning_stats
from .training import TrainingError, train

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

_VARIANT_FLAGS = {
    "full": {},
    "no-pos": {"use_pos": False},
    "no-lemma": {"use_lemma": False},
    "no-indicator": {"use_indicator": False},
    "sba": {"variant": "sba"},
    "dba": {"variant": "dba"},
}
_PRUNING_RE = re.compile(r"^with-pruning\((\d+)\)$")


def _variant_run_config(base: RunConfig, name: str) -> RunConfig:
    key = name.strip()
    match = _PRUNING_RE.match(key.lower())
    if match:
        return replace(base, prune_k=int(match.group(1)))
    flags = _VARIANT_FLAGS.get(key.lower())
    if flags is None:
        raise ConfigError(f"unknown ablation variant {name!r}")
    return replace(base, **flags)


def _read_corpus(path, fmt):
    with open(path, encoding="utf-8") as fh:
        return parse_conll(fh.read(), fmt)


def _load_pretrained(cfg: RunConfig):
    if cfg.embeddings_file is None:
        return None
    with open(cfg.embeddings_file, encoding="utf-8") as fh:
        return load_embeddings(fh.read())


def _train_once(cfg: RunConfig, log=None):
    train_corpus = _read_corpus(cfg.train_file, cfg.data_format)
    dev_corpus = None
    if cfg.dev_file is not None:
        dev_corpus = _read_corpus(cfg.dev_file, cfg.data_format)
    pretrained = _load_pretrained(cfg)
    model_cfg = cfg.model_config(
        pretrained_dim=pretrained.dim if pretrained else None)
    return train(train_corpus, dev_corpus, model_cfg, cfg.train_config(),
                 pretrained=pretrained, pruning=cfg.pruning_config(), log=log), \
        dev_corpus


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if cfg.train_file is None:
        raise ConfigError("key 'train_file' is required for training")
    log_path = cfg.log_file or cfg.model_file + ".log"
    with open(log_path, "w", encoding="utf-8") as log_fh:
        def emit(line):
            log_fh.write(line + "\n")
            print(line)

        ckpt, _ = _train_once(cfg, log=emit)
        save_checkpoint(ckpt, cfg.model_file)
        emit(f"checkpoint={cfg.model_file} best_dev_f1="
             f"{'-' if ckpt.best_f1 is None else format(ckpt.best_f1, '.2f')}")
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.model, expect_mode=args.mode)
    mode = args.mode or ckpt.mode
    sentences = _read_corpus(args.input, mode)
    predicted = [predict_sentence(ckpt.weights, s, mode, ckpt.pruning)
                 for s in sentences]
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(write_conll(predicted, mode))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    gold = _read_corpus(args.gold, args.mode)
    pred = _read_corpus(args.pred, args.mode)
    report = score_semantic(gold, pred, args.mode)
    print(report_tsv(report) if args.tsv else report_text(report))
    return EXIT_OK


def cmd_stats(args) -> int:
    sentences = _read_corpus(args.input, args.format)
    cfg = PruningConfig(0, args.source)
    print("k\tcoverage\treduction")
    for k in range(args.k_max + 1):
        coverage, reduction = pruning_stats(sentences, k, cfg)
        print(f"{k}\t{100.0 * coverage:.2f}\t{100.0 * reduction:.2f}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base = load_config(args.config)
    if base.train_file is None or base.dev_file is None:
        raise ConfigError("ablation needs both 'train_file' and 'dev_file'")
    names = [v.strip() for v in args.variants.split(",") if v.strip()]
    if not names:
        raise ConfigError("no ablation variants given")
    rows = []
    for name in names:
        cfg = _variant_run_config(base, name)
        ckpt, dev_corpus = _train_once(cfg)
        predicted = [predict_sentence(ckpt.weights, s, cfg.mode, ckpt.pruning)
                     for s in dev_corpus]
        rows.append((name, score_semantic(dev_corpus, predicted, cfg.mode)))
    print(ablation_report(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depsrl",
        description="End-to-end dependency semantic role labeler.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="annotate a CoNLL file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=("conll2009", "conll2008"), default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--mode", choices=("conll2009", "conll2008"),
                   default="conll2009")
    p.add_argument("--tsv", action="store_true",
                   help="emit machine-readable key/value records")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="argument pruning coverage/reduction curve")
    p.add_argument("--input", required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--format", choices=("conll2009", "conll2008"),
                   default="conll2009")
    p.add_argument("--source", choices=("gold", "pred"), default="gold")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ablate", help="train and compare model variants")
    p.add_argument("--config", required=True)
    p.add_argument("--variants", required=True,
                   help="comma list: full, no-pos, no-lemma, no-indicator, "
                        "SBA, DBA, with-pruning(k)")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ModeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DataError, AlignmentError, CheckpointError,
            TrainingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
