"""Command-line surface for the full pipeline.

Commands: tokenize raw reviews into an encoded dataset, train a model,
evaluate or predict with a checkpoint, aggregate predictions into an overall
polarity verdict, run the gradient self-check, and generate the toy corpus.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import checkpoint, corpus, evaluate, toy, training
from .bilstm import HeadConfig
from .encoder import EncoderConfig
from .encoding import batch_encode, encode
from .errors import ConfigError, DataError, DivergenceError
from .model import ModelConfig, SentimentModel
from .polarity import (
    AggregatorConfig,
    PolarityCounts,
    count_labels,
    overall_polarity_binary,
    overall_polarity_ternary,
)
from .tokenizer import load_vocab, tokenize_review

VOCAB_ENV_VAR = "MOVIESENT_VOCAB"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

# architecture defaults: desk scale throughout, sequence length 256
DEFAULTS = {
    "max_len": 256,
    "layers": 2,
    "hidden": 32,
    "heads": 2,
    "ffn": 64,
    "lstm_hidden": 32,
    "frozen_layers": 1,
    "lr": 3e-5,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "epochs": 10,
    "batch_size": 8,
    "seed": 0,
}

PRESETS = {"tiny": {"max_len": 32}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moviesent", description="movie-review sentiment pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="encode raw reviews into fixed-length inputs")
    p.add_argument("--vocab", help=f"vocabulary file (default ${VOCAB_ENV_VAR})")
    p.add_argument("--input", required=True, help="reviews, label<TAB>text")
    p.add_argument("--output", required=True, help="encoded dataset (JSON lines)")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--preset", choices=sorted(PRESETS))

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--train", required=True, dest="train_path")
    p.add_argument("--test", dest="test_path")
    p.add_argument("--vocab")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--metrics", help="per-epoch metrics file")
    p.add_argument("--manifest", help="reuse settings from an emitted manifest")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--ffn", type=int, default=None)
    p.add_argument("--lstm-hidden", type=int, default=None)
    p.add_argument("--frozen-layers", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("eval", help="accuracy of a checkpoint on labeled reviews")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--vocab")

    p = sub.add_parser("predict", help="write per-review predictions")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--vocab")

    p = sub.add_parser("aggregate", help="overall polarity of a prediction vector")
    p.add_argument("--predictions", help="prediction file (index<TAB>label)")
    p.add_argument("--pos", type=int)
    p.add_argument("--neg", type=int)
    p.add_argument("--neu", type=int)
    p.add_argument("--mode", choices=("binary", "ternary"), default="binary")
    p.add_argument("--binary-coefficient", default=None)
    p.add_argument("--ternary-coefficient", default=None)
    p.add_argument("--neutral-fraction", default=None)

    p = sub.add_parser("gradcheck", help="finite-difference gradient self-check")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("make-toy", help="generate the keyword toy corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--train-size", type=int, default=500)
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _resolve(args, name: str, manifest_value=None):
    """flag > manifest > preset > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if manifest_value is not None:
        return manifest_value
    preset = PRESETS.get(getattr(args, "preset", None) or "", {})
    if name in preset:
        return preset[name]
    return DEFAULTS[name]


def _resolve_vocab(args) -> str:
    vocab = getattr(args, "vocab", None) or os.environ.get(VOCAB_ENV_VAR)
    if not vocab:
        raise ConfigError(
            f"no vocabulary given: pass --vocab or set ${VOCAB_ENV_VAR}"
        )
    return vocab


def _is_encoded(path) -> bool:
    try:
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    return line.lstrip()[0] == "{"
    except OSError as exc:
        raise DataError(f"missing file: cannot read {path!r}: {exc}") from exc
    return False


def _load_examples(path, vocab_path, max_len: int):
    """Encoded JSONL is consumed as-is; raw TSV is tokenized and encoded."""
    if _is_encoded(path):
        return corpus.load_encoded(path)
    vocab = load_vocab(vocab_path) if isinstance(vocab_path, str) else vocab_path
    records = corpus.load_tsv(path)
    return batch_encode([(r.text, int(r.label)) for r in records], vocab, max_len)


def cmd_tokenize(args) -> int:
    vocab = load_vocab(_resolve_vocab(args))
    max_len = _resolve(args, "max_len")
    records = corpus.load_tsv(args.input)
    token_lists = [tokenize_review(r.text, vocab) for r in records]
    encoded = [
        encode(tokens, vocab, max_len, label=int(record.label))
        for tokens, record in zip(token_lists, records)
    ]
    corpus.save_encoded(args.output, encoded)
    truncated = sum(1 for t in token_lists if len(t) > max_len - 2)
    share = 100.0 * truncated / len(records) if records else 0.0
    print(f"encoded {len(records)} reviews to {args.output}")
    print(f"truncated {truncated} ({share:.1f}%) at max length {max_len}")
    return EXIT_OK


def _train_manifest(resolved: dict, model_config: ModelConfig, paths: dict) -> dict:
    aggregator = AggregatorConfig()
    return {
        "command": "train",
        "seed": resolved["seed"],
        "max_len": resolved["max_len"],
        "inputs": {
            "train": paths["train"],
            "test": paths["test"],
            "vocab": paths["vocab"],
        },
        "artifacts": {
            "checkpoint": paths["checkpoint"],
            "metrics": paths["metrics"],
            "manifest": paths["manifest"],
        },
        "encoder": model_config.to_dict()["encoder"],
        "head": model_config.to_dict()["head"],
        "train": {
            "learning_rate": resolved["lr"],
            "adam_beta1": resolved["beta1"],
            "adam_beta2": resolved["beta2"],
            "adam_epsilon": resolved["epsilon"],
            "epochs": resolved["epochs"],
            "batch_size": resolved["batch_size"],
            "seed": resolved["seed"],
            "num_frozen_layers": resolved["frozen_layers"],
        },
        "aggregator": {
            "binary_coefficient": str(aggregator.binary_coefficient),
            "ternary_coefficient": str(aggregator.ternary_coefficient),
            "neutral_fraction": str(aggregator.neutral_fraction),
        },
    }


def cmd_train(args) -> int:
    manifest_in: dict = {}
    if args.manifest:
        try:
            with open(args.manifest, encoding="utf-8") as handle:
                manifest_in = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read manifest {args.manifest!r}: {exc}") from exc

    m_train = manifest_in.get("train", {})
    m_encoder = manifest_in.get("encoder", {})
    m_head = manifest_in.get("head", {})
    resolved = {
        "max_len": _resolve(args, "max_len", manifest_in.get("max_len")),
        "layers": _resolve(args, "layers", m_encoder.get("num_layers")),
        "hidden": _resolve(args, "hidden", m_encoder.get("hidden_size")),
        "heads": _resolve(args, "heads", m_encoder.get("num_heads")),
        "ffn": _resolve(args, "ffn", m_encoder.get("ffn_size")),
        "lstm_hidden": _resolve(args, "lstm_hidden", m_head.get("lstm_hidden_size")),
        "frozen_layers": _resolve(args, "frozen_layers", m_encoder.get("num_frozen_layers")),
        "lr": _resolve(args, "lr", m_train.get("learning_rate")),
        "beta1": _resolve(args, "beta1", m_train.get("adam_beta1")),
        "beta2": _resolve(args, "beta2", m_train.get("adam_beta2")),
        "epsilon": _resolve(args, "epsilon", m_train.get("adam_epsilon")),
        "epochs": _resolve(args, "epochs", m_train.get("epochs")),
        "batch_size": _resolve(args, "batch_size", m_train.get("batch_size")),
        "seed": _resolve(args, "seed", manifest_in.get("seed")),
    }

    needs_vocab = not _is_encoded(args.train_path) or (
        args.test_path and not _is_encoded(args.test_path)
    )
    vocab_path = getattr(args, "vocab", None) or os.environ.get(VOCAB_ENV_VAR)
    if needs_vocab and not vocab_path:
        raise ConfigError(f"no vocabulary given: pass --vocab or set ${VOCAB_ENV_VAR}")
    vocab = load_vocab(vocab_path) if vocab_path else None

    max_len = resolved["max_len"]
    train_set = _load_examples(args.train_path, vocab, max_len)
    test_set = _load_examples(args.test_path, vocab, max_len) if args.test_path else None
    if any(e.label is None for e in train_set):
        raise DataError("training examples must carry labels")
    seq_len = train_set[0].max_len
    vocab_size = (
        len(vocab)
        if vocab is not None
        else int(max(int(e.input_ids.max()) for e in train_set)) + 1
    )

    model_config = ModelConfig(
        encoder=EncoderConfig(
            num_layers=resolved["layers"],
            hidden_size=resolved["hidden"],
            num_heads=resolved["heads"],
            ffn_size=resolved["ffn"],
            max_position=seq_len,
            vocab_size=vocab_size,
            num_frozen_layers=resolved["frozen_layers"],
        ),
        head=HeadConfig(lstm_hidden_size=resolved["lstm_hidden"]),
    )
    train_config = training.TrainConfig(
        learning_rate=resolved["lr"],
        adam_beta1=resolved["beta1"],
        adam_beta2=resolved["beta2"],
        adam_epsilon=resolved["epsilon"],
        epochs=resolved["epochs"],
        batch_size=resolved["batch_size"],
        seed=resolved["seed"],
        num_frozen_layers=resolved["frozen_layers"],
    )

    manifest_path = str(args.out) + ".manifest.json"
    manifest = _train_manifest(
        resolved,
        model_config,
        {
            "train": str(args.train_path),
            "test": str(args.test_path) if args.test_path else None,
            "vocab": str(vocab_path) if vocab_path else None,
            "checkpoint": str(args.out),
            "metrics": str(args.metrics) if args.metrics else None,
            "manifest": manifest_path,
        },
    )
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")

    model = SentimentModel.build(model_config, seed=resolved["seed"])
    result = training.train(
        train_set, model, train_config, test_set=test_set, metrics_path=args.metrics
    )
    checkpoint.save_checkpoint(args.out, model_config, model.params)
    print(f"checkpoint written to {args.out}")
    if result.diverged:
        print(f"training diverged: {result.message}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _checkpoint_examples(args):
    config, params = checkpoint.load_checkpoint(args.checkpoint)
    model = SentimentModel(config, params)
    vocab_path = None
    if not _is_encoded(args.input):
        vocab_path = _resolve_vocab(args)
    examples = _load_examples(args.input, vocab_path, config.encoder.max_position)
    model.validate_examples(examples)
    return model, examples


def cmd_eval(args) -> int:
    model, examples = _checkpoint_examples(args)
    gold = [e.label for e in examples]
    if any(g is None for g in gold):
        raise DataError("eval requires labeled examples")
    predictions = evaluate.predict(examples, model)
    print(f"{evaluate.accuracy(predictions, gold):.2f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, examples = _checkpoint_examples(args)
    predictions = evaluate.predict(examples, model)
    evaluate.save_predictions(args.output, predictions)
    print(f"wrote {len(predictions)} predictions to {args.output}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    overrides = {}
    if args.binary_coefficient is not None:
        overrides["binary_coefficient"] = Fraction(args.binary_coefficient)
    if args.ternary_coefficient is not None:
        overrides["ternary_coefficient"] = Fraction(args.ternary_coefficient)
    if args.neutral_fraction is not None:
        overrides["neutral_fraction"] = Fraction(args.neutral_fraction)
    config = AggregatorConfig(**overrides)

    if args.predictions:
        counts = count_labels(evaluate.load_predictions(args.predictions))
    elif args.pos is not None and args.neg is not None:
        counts = PolarityCounts(
            positives=args.pos, negatives=args.neg, neutrals=args.neu or 0
        )
    else:
        raise ConfigError("aggregate needs --predictions or both --pos and --neg")

    if args.mode == "binary":
        verdict = overall_polarity_binary(counts, config)
    else:
        verdict = overall_polarity_ternary(counts, config)
    print(verdict.value)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = training.gradient_check(
        tolerance=args.tolerance, step=args.step, seed=args.seed
    )
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_DIVERGED


def cmd_make_toy(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    split = toy.generate_toy_corpus(args.train_size, args.test_size, seed=args.seed)
    vocab_path = os.path.join(args.out_dir, "vocab.txt")
    train_path = os.path.join(args.out_dir, "train.tsv")
    test_path = os.path.join(args.out_dir, "test.tsv")
    toy.write_toy_vocab(vocab_path)
    corpus.save_tsv(train_path, split.train)
    corpus.save_tsv(test_path, split.test)
    print(f"wrote {vocab_path}, {train_path} ({len(split.train)}), {test_path} ({len(split.test)})")
    return EXIT_OK


COMMANDS = {
    "tokenize": cmd_tokenize,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "aggregate": cmd_aggregate,
    "gradcheck": cmd_gradcheck,
    "make-toy": cmd_make_toy,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage errors; remap to this tool's convention
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
