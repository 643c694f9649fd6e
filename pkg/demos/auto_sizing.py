"""
Auto-sizing a hidden layer
==========================

Sample text from a small teacher network (8 units in its first hidden
layer), then train students that start with 64 units under increasing
l-inf,1 strength and watch how many units survive each epoch.

Takes about a minute on one core.
"""

from autosize import RegularizerSpec, TrainConfig, build_vocabulary, init_params, train
from autosize.corpus import load_dataset, split_validation
from autosize.synthetic import make_teacher, sample_corpus

teacher = make_teacher(vocab_size=200, n=3, embed_dim=16, h1=8, h2=16, seed=1)
sentences = sample_corpus(teacher, 100_000, seed=2)
train_s, val_s = split_validation(sentences, 5000)
vocab = build_vocabulary(train_s, 1000)
tr = load_dataset(train_s, vocab, 3)
va = load_dataset(val_s, vocab, 3)
print(f"{len(tr)} training n-grams, vocabulary {vocab.size}")

cfg = TrainConfig(epochs=8, eta=0.05, batch_size=64, seed=4, validation=va)
for lam in (0.0, 0.0175, 0.1):
    p0 = init_params(3, vocab.size, 16, 64, 16, seed=3)
    _, history = train(p0, tr, cfg, RegularizerSpec("linf1", lam))
    print(f"lambda={lam:<7} active_h1 by epoch {history.column('active_h1')}  "
          f"val ppl {history[-1].val_perplexity:.2f}")

# The strongest setting prunes most units in the first epoch at a clear cost
# in perplexity.  The middle one trims a few units per epoch and stays close
# to the unregularized run.
