"""Synthetic corpora sampled from a small known "teacher" network.

A student trained wide on such a corpus should be prunable down to roughly
the teacher's width.  Words are named ``w0, w1, ...``; the teacher never
emits ``<unk>`` or ``<s>``.
"""
from __future__ import annotations

import numpy as np

from .corpus import BOS_ID, EOS_ID, SPECIALS, UNK_ID
from .network import ModelParams, init_params, log_probs


def teacher_vocabulary(vocab_size: int) -> tuple:
    """Tokens indexed by teacher id: specials first, then ``w0 .. w{V-4}``."""
    return SPECIALS + tuple(f"w{i}" for i in range(vocab_size - 3))


def make_teacher(vocab_size: int = 200, n: int = 3, embed_dim: int = 16, h1: int = 8,
                 h2: int = 8, seed: int = 0, scale: float = 3.0,
                 mean_length: float = 20.0) -> ModelParams:
    """Random teacher with sharpened weights.

    ``scale`` multiplies the Glorot initialisation so the teacher's
    conditionals are peaked.  The ``</s>`` bias is set so sentences average
    about ``mean_length`` tokens; ``<unk>`` and ``<s>`` get a very negative
    bias.
    """
    p = init_params(n, vocab_size, embed_dim, h1, h2, seed)
    for a in (p.A, p.B, p.C, p.D):
        a *= scale
    rng = np.random.default_rng([int(seed), 7])
    p.b[:] = rng.uniform(0.0, 0.5, size=h1)
    p.c[:] = rng.uniform(0.0, 0.5, size=h2)
    p.d_out[UNK_ID] = p.d_out[BOS_ID] = -50.0
    p.d_out[EOS_ID] = _eos_bias(p, mean_length, rng)
    return p


def _eos_bias(p: ModelParams, mean_length: float, rng) -> float:
    # pick the bias so that the average P(</s>) over random contexts is 1 / mean_length
    ctx = rng.integers(3, p.vocab_size, size=(512, p.n - 1))
    p.d_out[EOS_ID] = 0.0
    logp = log_probs(p, ctx)
    rest = np.log1p(-np.exp(logp[:, EOS_ID]))
    target = 1.0 / mean_length
    lo, hi = -30.0, 30.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        # P(eos) after shifting its logit by mid
        le = logp[:, EOS_ID] + mid
        pe = np.exp(le - np.logaddexp(le, rest)).mean()
        lo, hi = (mid, hi) if pe < target else (lo, mid)
    return 0.5 * (lo + hi)


def sample_sentences(teacher: ModelParams, n_tokens: int, seed: int = 0,
                     max_length: int = 100, parallel: int = 256) -> list:
    """Sample sentences (as teacher id lists, no specials) totalling ``>= n_tokens`` tokens."""
    rng = np.random.default_rng(seed)
    sentences = []
    total = 0
    k = teacher.n - 1
    while total < n_tokens:
        ctx = np.full((parallel, k), BOS_ID, dtype=np.int64)
        seqs = [[] for _ in range(parallel)]
        alive = np.ones(parallel, dtype=bool)
        for _ in range(max_length):
            probs = np.exp(log_probs(teacher, ctx))
            cdf = probs.cumsum(axis=1)
            u = rng.random(parallel) * cdf[:, -1]
            nxt = np.minimum((cdf < u[:, None]).sum(axis=1), teacher.vocab_size - 1)
            for i in np.flatnonzero(alive):
                if nxt[i] == EOS_ID:
                    alive[i] = False
                else:
                    seqs[i].append(int(nxt[i]))
            if not alive.any():
                break
            ctx = np.hstack([ctx[:, 1:], nxt[:, None]])
        for s in seqs:
            sentences.append(s)
            total += len(s)
            if total >= n_tokens:
                break
    return sentences


def sample_corpus(teacher: ModelParams, n_tokens: int, seed: int = 0, **kwargs) -> list:
    """Like :func:`sample_sentences` but returns token strings, one list per sentence."""
    words = teacher_vocabulary(teacher.vocab_size)
    return [[words[i] for i in s] for s in sample_sentences(teacher, n_tokens, seed, **kwargs)]


def write_corpus(sentences, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            f.write(" ".join(s) + "\n")
