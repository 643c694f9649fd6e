"""Feedforward n-gram language model with two ReLU hidden layers.

For a context of ``n - 1`` word ids ``w_1 .. w_{n-1}``::

    x^k = A[w_k]                          (shared embedding table)
    y   = relu(sum_k B^k x^k + b)         (layer 1, h1 units)
    z   = relu(C y + c)                   (layer 2, h2 units)
    P(w | context) = softmax(D z + d_out)[w]

Everything is float64.  ``B`` is stored as one ``(n - 1, h1, embed_dim)``
array; row ``i`` of the concatenated layer-1 matrix is
``B[:, i, :].ravel()``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError, ModelFormatError
from .io import atomic_write_text, fmt_float

MAGIC = "AUTOSIZE-NNLM 1"

_FIELDS = ("A", "B", "b", "C", "c", "D", "d_out")


@dataclass
class ModelParams:
    A: np.ndarray      # (V, d)
    B: np.ndarray      # (n-1, h1, d)
    b: np.ndarray      # (h1,)
    C: np.ndarray      # (h2, h1)
    c: np.ndarray      # (h2,)
    D: np.ndarray      # (V, h2)
    d_out: np.ndarray  # (V,)

    def __post_init__(self):
        for name in _FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        V, d = self.A.shape
        k, h1, d_b = self.B.shape
        h2 = self.C.shape[0]
        expected = {
            "B": (k, h1, d), "b": (h1,), "C": (h2, h1), "c": (h2,),
            "D": (V, h2), "d_out": (V,),
        }
        if k < 1:
            raise InvalidConfigurationError("n-gram order must be >= 2")
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise InvalidConfigurationError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def n(self) -> int:
        return self.B.shape[0] + 1

    @property
    def vocab_size(self) -> int:
        return self.A.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.A.shape[1]

    @property
    def h1(self) -> int:
        return self.B.shape[1]

    @property
    def h2(self) -> int:
        return self.C.shape[0]

    @property
    def dims(self) -> tuple:
        return (self.n, self.vocab_size, self.embed_dim, self.h1, self.h2)

    def arrays(self):
        return [getattr(self, name) for name in _FIELDS]

    def copy(self) -> "ModelParams":
        return ModelParams(*(a.copy() for a in self.arrays()))

    def layer1_matrix(self) -> np.ndarray:
        """``[B^1 | B^2 | ... | B^{n-1}]`` as an ``(h1, (n-1) * d)`` array."""
        k, h1, d = self.B.shape
        return self.B.transpose(1, 0, 2).reshape(h1, k * d)

    def set_layer1_matrix(self, W1: np.ndarray) -> None:
        k, h1, d = self.B.shape
        self.B[:] = W1.reshape(h1, k, d).transpose(1, 0, 2)


@dataclass
class Gradients:
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    C: np.ndarray
    c: np.ndarray
    D: np.ndarray
    d_out: np.ndarray

    def arrays(self):
        return [getattr(self, name) for name in _FIELDS]


def init_params(n: int, vocab_size: int, embed_dim: int, h1: int, h2: int, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, fully determined by ``seed``.

    Draw order is A, B^1 .. B^{n-1}, C, D.
    """
    if n < 2 or min(vocab_size, embed_dim, h1, h2) < 0:
        raise InvalidConfigurationError(
            f"invalid dimensions n={n} V={vocab_size} d={embed_dim} h1={h1} h2={h2}")
    rng = np.random.default_rng(int(seed) % 2**64)

    def glorot(rows, cols):
        if rows + cols == 0:
            return np.zeros((rows, cols))
        r = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-r, r, size=(rows, cols))

    A = glorot(vocab_size, embed_dim)
    B = np.stack([glorot(h1, embed_dim) for _ in range(n - 1)])
    C = glorot(h2, h1)
    D = glorot(vocab_size, h2)
    return ModelParams(A, B, np.zeros(h1), C, np.zeros(h2), D, np.zeros(vocab_size))


def zero_params(n: int, vocab_size: int, embed_dim: int, h1: int, h2: int) -> ModelParams:
    return ModelParams(
        np.zeros((vocab_size, embed_dim)), np.zeros((n - 1, h1, embed_dim)), np.zeros(h1),
        np.zeros((h2, h1)), np.zeros(h2), np.zeros((vocab_size, h2)), np.zeros(vocab_size))


def _check_contexts(params: ModelParams, contexts) -> np.ndarray:
    contexts = np.asarray(contexts, dtype=np.int64)
    if contexts.ndim != 2 or contexts.shape[1] != params.n - 1:
        raise ValueError(f"contexts must have shape (batch, {params.n - 1}), got {contexts.shape}")
    if contexts.size and (contexts.min() < 0 or contexts.max() >= params.vocab_size):
        raise ValueError(f"context id out of range [0, {params.vocab_size})")
    return contexts


def _mm(X, W):
    # BLAS rounds a single-row product (gemv) differently from the same row
    # inside a larger product (gemm); keep single rows on the gemm path.
    if X.shape[0] == 1:
        return (np.vstack([X, X]) @ W)[:1]
    return X @ W


def _forward(params: ModelParams, contexts: np.ndarray):
    X = params.A[contexts].reshape(len(contexts), -1)
    W1 = params.layer1_matrix()
    pre1 = _mm(X, W1.T) + params.b
    y = np.maximum(pre1, 0.0)
    pre2 = _mm(y, params.C.T) + params.c
    z = np.maximum(pre2, 0.0)
    logits = _mm(z, params.D.T) + params.d_out
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return logp, (X, W1, pre1, y, pre2, z)


def log_probs(params: ModelParams, contexts) -> np.ndarray:
    """Log-distributions over the vocabulary for a batch of contexts, ``(batch, V)``."""
    contexts = _check_contexts(params, contexts)
    return _forward(params, contexts)[0]


def forward(params: ModelParams, context) -> np.ndarray:
    """Log-probability vector over the vocabulary for one context."""
    return log_probs(params, np.asarray(context, dtype=np.int64).reshape(1, -1))[0]


def hidden_activations(params: ModelParams, contexts) -> tuple:
    """Layer-1 and layer-2 activations ``(y, z)`` for a batch of contexts."""
    contexts = _check_contexts(params, contexts)
    cache = _forward(params, contexts)[1]
    return cache[3], cache[5]


def nll(params: ModelParams, dataset, chunk: int = 4096) -> float:
    """Summed natural-log negative log-likelihood of ``dataset``."""
    total = 0.0
    for start in range(0, len(dataset), chunk):
        ctx = dataset.contexts[start:start + chunk]
        tgt = dataset.targets[start:start + chunk]
        logp = log_probs(params, ctx)
        total -= logp[np.arange(len(tgt)), tgt].sum()
    return float(total)


def perplexity(params: ModelParams, dataset) -> float:
    """``exp(nll / #targets)``; targets include the sentence-final ``</s>``."""
    if len(dataset) == 0:
        raise ValueError("perplexity of an empty dataset is undefined")
    return float(np.exp(nll(params, dataset) / len(dataset)))


def loss_and_grad(params: ModelParams, contexts, targets) -> tuple:
    """Summed NLL of a minibatch and its exact gradient.

    The ReLU derivative at exactly zero is taken as zero.
    """
    contexts = _check_contexts(params, contexts)
    targets = np.asarray(targets, dtype=np.int64)
    logp, (X, W1, pre1, y, pre2, z) = _forward(params, contexts)
    rows = np.arange(len(targets))
    loss = -logp[rows, targets].sum()

    dlogits = np.exp(logp)
    dlogits[rows, targets] -= 1.0
    gD = dlogits.T @ z
    gd = dlogits.sum(axis=0)
    dpre2 = _mm(dlogits, params.D) * (pre2 > 0)
    gC = dpre2.T @ y
    gc = dpre2.sum(axis=0)
    dpre1 = _mm(dpre2, params.C) * (pre1 > 0)
    k, h1, d = params.B.shape
    gB = (dpre1.T @ X).reshape(h1, k, d).transpose(1, 0, 2)
    gb = dpre1.sum(axis=0)
    dX = _mm(dpre1, W1).reshape(len(targets), k, d)
    gA = np.zeros_like(params.A)
    np.add.at(gA, contexts, dX)
    return float(loss), Gradients(gA, np.ascontiguousarray(gB), gb, gC, gc, gD, gd)


def backward(params: ModelParams, minibatch) -> Gradients:
    """Gradient of the summed NLL over an :class:`~autosize.corpus.NGramDataset`."""
    if len(minibatch) == 0:
        raise ValueError("minibatch must be nonempty")
    return loss_and_grad(params, minibatch.contexts, minibatch.targets)[1]


# ---------------------------------------------------------------------------
# model files


def _matrix_rows(a: np.ndarray):
    a = np.atleast_2d(a) if a.ndim == 1 else a
    for row in a:
        yield " ".join(fmt_float(x) for x in row)


def dumps_model(params: ModelParams) -> str:
    lines = [MAGIC, " ".join(str(x) for x in params.dims)]
    for a in [params.A, *params.B, params.b, params.C, params.c, params.D, params.d_out]:
        if a.ndim == 1:
            lines.append(" ".join(fmt_float(x) for x in a))
        else:
            lines.extend(_matrix_rows(a))
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> ModelParams:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ModelFormatError(f"not a model file (expected header {MAGIC!r})")
    try:
        n, V, d, h1, h2 = (int(x) for x in lines[1].split())
    except (IndexError, ValueError):
        raise ModelFormatError("bad dimension line") from None
    if n < 2 or min(V, d, h1, h2) < 0:
        raise ModelFormatError(f"invalid dimensions {lines[1]!r}")
    pos = 2

    def read(rows, cols):
        nonlocal pos
        if pos + rows > len(lines):
            raise ModelFormatError("model file is truncated")
        out = np.zeros((rows, cols))
        for r in range(rows):
            vals = lines[pos].split()
            if len(vals) != cols:
                raise ModelFormatError(
                    f"line {pos + 1}: expected {cols} values, got {len(vals)}")
            try:
                out[r] = [float(v) for v in vals]
            except ValueError:
                raise ModelFormatError(f"line {pos + 1}: unparsable number") from None
            pos += 1
        return out

    A = read(V, d)
    B = np.stack([read(h1, d) for _ in range(n - 1)])
    b = read(1, h1)[0]
    C = read(h2, h1)
    c = read(1, h2)[0]
    D = read(V, h2)
    d_out = read(1, V)[0]
    if pos != len(lines):
        raise ModelFormatError(f"{len(lines) - pos} unexpected trailing lines")
    params = ModelParams(A, B, b, C, c, D, d_out)
    if not all(np.isfinite(a).all() for a in params.arrays()):
        raise ModelFormatError("model contains non-finite values")
    return params


def save_model(params: ModelParams, path) -> None:
    atomic_write_text(path, dumps_model(params))


def load_model(path) -> ModelParams:
    with open(path, encoding="utf-8") as f:
        return loads_model(f.read())
