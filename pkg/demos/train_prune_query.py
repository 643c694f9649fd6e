"""
Train, prune and query from the command line
============================================

Runs the ``autosize`` subcommands end to end in a scratch directory.
"""

import tempfile
from pathlib import Path

from autosize.cli import main
from autosize.synthetic import make_teacher, sample_corpus, write_corpus

work = Path(tempfile.mkdtemp(prefix="autosize-demo-"))
corpus, vocab, model = work / "corpus.txt", work / "vocab.txt", work / "model.txt"
write_corpus(sample_corpus(make_teacher(60, 3, 8, 6, 6, seed=0), 30_000, seed=1), corpus)


def run(*args):
    print("\n$ autosize", " ".join(str(a) for a in args))
    code = main([str(a) for a in args])
    assert code == 0, code


run("build-vocab", corpus, "--max-size", "1000", "--out", vocab)
run("train", corpus, vocab, "--out", model, "--n", "3", "--embed-dim", "8",
    "--hidden", "48", "12", "--reg", "linf1", "--lambda", "0.1", "--epochs", "4",
    "--val-tokens", "2000")
print((work / "model.txt.history.csv").read_text())

run("perplexity", model, vocab, corpus)
run("prune", model, work / "pruned.txt")
run("perplexity", work / "pruned.txt", vocab, corpus)   # same number, smaller model
run("query", work / "pruned.txt", vocab, "w1", "w2", "-k", "5")
run("export-weights", model, "--layer", "1", "--out", work / "rows.csv")
print((work / "rows.csv").read_text().splitlines()[-1])
print("\nfiles in", work)
