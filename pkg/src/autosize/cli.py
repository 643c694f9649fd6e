"""Command-line interface.

::

    autosize build-vocab CORPUS --max-size N --out VOCAB
    autosize train CORPUS VOCAB --out MODEL [flags]
    autosize perplexity MODEL VOCAB TEXT
    autosize prune MODEL_IN MODEL_OUT
    autosize query MODEL VOCAB WORD ... [-k K]
    autosize export-weights MODEL --layer {1,2} --out CSV
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .corpus import (
    BOS_ID, Vocabulary, build_vocabulary, load_dataset, numberize, read_corpus, split_validation,
)
from .errors import InvalidConfigurationError, ModelFormatError, TrainingDivergedError
from .io import atomic_write_text, fmt_float
from .network import forward, init_params, load_model, nll, save_model
from .prox import RegularizerSpec, layer_groups
from .pruning import compact
from .trainer import TrainConfig, train


def _load_pair(model_path, vocab_path):
    params = load_model(model_path)
    vocab = Vocabulary.load(vocab_path)
    if vocab.size != params.vocab_size:
        raise ModelFormatError(
            f"vocabulary has {vocab.size} entries but the model expects {params.vocab_size}")
    return params, vocab


def cmd_build_vocab(args):
    if args.max_size < 3:
        args.parser.error("--max-size must be >= 3 (room for <unk>, <s>, </s>)")
    vocab = build_vocabulary(read_corpus(args.corpus), args.max_size)
    vocab.save(args.out)
    print(f"vocabulary size {vocab.size}")


def _manifest(args, vocab, n_train, n_val) -> str:
    items = [
        ("version", __version__),
        ("corpus", args.corpus),
        ("vocab", args.vocab),
        ("model", args.out),
        ("history", args.history),
        ("n", args.n),
        ("vocab_size", vocab.size),
        ("embed_dim", args.embed_dim),
        ("hidden", f"{args.hidden[0]} {args.hidden[1]}"),
        ("reg", args.reg),
        ("lambda", fmt_float(args.lam)),
        ("lr", fmt_float(args.lr)),
        ("batch", args.batch),
        ("epochs", args.epochs),
        ("seed", args.seed),
        ("val_tokens", args.val_tokens),
        ("compact_on_finish", str(args.compact_on_finish).lower()),
        ("train_examples", n_train),
        ("val_examples", n_val),
        ("lambda_scale", "per-example average loss"),
        ("perplexity_log_base", "e"),
        ("eos_predicted", "true"),
        ("validation_split", "contiguous suffix of whole sentences"),
    ]
    return "".join(f"{k}={v}\n" for k, v in items)


def cmd_train(args):
    if args.n < 2:
        args.parser.error("--n must be >= 2")
    if args.lr <= 0 or args.batch < 1 or args.epochs < 0 or args.lam < 0:
        args.parser.error("--lr must be > 0, --batch >= 1, --epochs >= 0, --lambda >= 0")
    if min(args.embed_dim, *args.hidden) < 0:
        args.parser.error("dimensions must be >= 0")
    vocab = Vocabulary.load(args.vocab)
    train_s, val_s = split_validation(read_corpus(args.corpus), args.val_tokens)
    dataset = load_dataset(train_s, vocab, args.n)
    validation = load_dataset(val_s, vocab, args.n) if val_s else None
    if len(dataset) == 0:
        raise InvalidConfigurationError("no training examples left after the validation split")
    args.history = args.history or args.out + ".history.csv"
    args.manifest = args.manifest or args.out + ".manifest"

    h1, h2 = args.hidden
    params = init_params(args.n, vocab.size, args.embed_dim, h1, h2, args.seed)
    config = TrainConfig(args.epochs, args.lr, args.batch, args.seed + 1, validation)
    spec = RegularizerSpec(args.reg, args.lam)

    def report(epoch, _params, rec):
        val = "-" if rec.val_perplexity is None else f"{rec.val_perplexity:.3f}"
        print(f"epoch {epoch}: active {rec.active_h1} {rec.active_h2}  "
              f"train_nll {rec.train_nll_per_token:.4f}  val_ppl {val}  reg {rec.reg_value:.4f}",
              file=sys.stderr)

    params, history = train(params, dataset, config, spec, on_epoch=report)
    if args.compact_on_finish:
        params, prune_report = compact(params)
        print(prune_report.format(), end="")
    save_model(params, args.out)
    history.save(args.history)
    atomic_write_text(args.manifest, _manifest(args, vocab, len(dataset),
                                               0 if validation is None else len(validation)))
    print(f"wrote {args.out}")


def cmd_perplexity(args):
    params, vocab = _load_pair(args.model, args.vocab)
    dataset = load_dataset(read_corpus(args.text), vocab, params.n)
    if len(dataset) == 0:
        raise InvalidConfigurationError("text contains no sentences")
    total = nll(params, dataset)
    print(f"perplexity {fmt_float(np.exp(total / len(dataset)))}")
    print(f"tokens {len(dataset)}")


def cmd_prune(args):
    params = load_model(args.model_in)
    pruned, report = compact(params)
    save_model(pruned, args.model_out)
    print(report.format(), end="")


def cmd_query(args):
    params, vocab = _load_pair(args.model, args.vocab)
    k = params.n - 1
    ids = numberize(args.context, vocab)[-k:] if k else []
    ids = [BOS_ID] * (k - len(ids)) + ids
    logp = forward(params, ids)
    top = np.argsort(-logp, kind="stable")[:args.k]
    for i in top:
        print(f"{vocab.token(i)}\t{fmt_float(logp[i])}")


def cmd_export_weights(args):
    params = load_model(args.model)
    G = layer_groups(params, args.layer)
    linf = np.abs(G).max(axis=1) if G.shape[1] else np.zeros(G.shape[0])
    l2 = np.sqrt((G * G).sum(axis=1))
    order = np.argsort(-linf, kind="stable")
    lines = ["unit,linf_norm,l2_norm"]
    lines += [f"{i},{fmt_float(linf[i])},{fmt_float(l2[i])}" for i in order]
    lines.append(f"# zero_rows={int((~G.any(axis=1)).sum())}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autosize", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build a frequency-ranked vocabulary file")
    p.add_argument("corpus")
    p.add_argument("--max-size", type=int, default=100000, help="at most this many entries, specials included (default: 100000)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a model with optional group-sparse regularization")
    p.add_argument("corpus")
    p.add_argument("vocab")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--history", help="history CSV (default: OUT.history.csv)")
    p.add_argument("--manifest", help="run manifest (default: OUT.manifest)")
    p.add_argument("--n", type=int, default=5, help="n-gram order (default: 5)")
    p.add_argument("--embed-dim", type=int, default=50, help="embedding size (default: 50)")
    p.add_argument("--hidden", type=int, nargs=2, default=[1000, 50], metavar=("H1", "H2"),
                   help="hidden layer widths (default: 1000 50)")
    p.add_argument("--reg", choices=["none", "l1", "l21", "linf1"], default="none",
                   help="hidden-layer regularizer (default: none)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="strength, on the per-example loss scale (default: 0)")
    p.add_argument("--lr", type=float, default=0.05, help="learning rate (default: 0.05)")
    p.add_argument("--batch", type=int, default=64, help="minibatch size (default: 64)")
    p.add_argument("--epochs", type=int, default=10, help="passes over the data (default: 10)")
    p.add_argument("--seed", type=int, default=0, help="seeds init and shuffling (default: 0)")
    p.add_argument("--val-tokens", type=int, default=5000,
                   help="hold out a suffix of whole sentences with this many tokens; 0 disables (default: 5000)")
    p.add_argument("--compact-on-finish", action="store_true",
                   help="remove dead units before writing the model")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("perplexity", help="perplexity of a text under a model")
    p.add_argument("model")
    p.add_argument("vocab")
    p.add_argument("text")
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("prune", help="remove dead hidden units")
    p.add_argument("model_in")
    p.add_argument("model_out")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("query", help="most likely continuations of a context")
    p.add_argument("model")
    p.add_argument("vocab")
    p.add_argument("context", nargs="*", help="context words; short contexts are padded with <s>")
    p.add_argument("-k", type=int, default=10, help="number of words to list (default: 10)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export-weights", help="per-unit group norms of a hidden layer")
    p.add_argument("model")
    p.add_argument("--layer", type=int, choices=[1, 2], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_weights)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    try:
        args.func(args)
    except TrainingDivergedError as e:
        print(f"autosize: training diverged: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"autosize: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
