"""Proximal stochastic gradient training.

Each minibatch update is a plain gradient step on the average NLL followed
by the regularizer's proximal step with the same step size::

    v <- u - eta * grad L(u)
    w <- prox_{eta * lam * R}(v)

Because the gradient is averaged over the minibatch, ``lam`` is on the
per-example loss scale.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .corpus import NGramDataset
from .errors import InvalidConfigurationError, TrainingDivergedError
from .io import atomic_write_text, fmt_float
from .network import ModelParams, loss_and_grad, nll, perplexity
from .prox import RegularizerSpec, apply_prox, prox_inplace, regularizer_value
from .pruning import active_units

HISTORY_HEADER = ["epoch", "active_h1", "active_h2", "train_nll_per_token", "val_perplexity", "reg_value"]


@dataclass
class TrainConfig:
    epochs: int = 10
    eta: float = 0.05
    batch_size: int = 64
    seed: int = 0
    validation: Optional[NGramDataset] = None

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if not self.eta > 0:
            raise InvalidConfigurationError(f"eta must be > 0, got {self.eta}")
        if self.batch_size < 1:
            raise InvalidConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class EpochRecord:
    epoch: int
    active_h1: int
    active_h2: int
    train_nll_per_token: float
    val_perplexity: Optional[float]
    reg_value: float


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for r in self.records:
            writer.writerow([
                r.epoch, r.active_h1, r.active_h2, fmt_float(r.train_nll_per_token),
                "" if r.val_perplexity is None else fmt_float(r.val_perplexity),
                fmt_float(r.reg_value),
            ])
        return buf.getvalue()

    def save(self, path) -> None:
        atomic_write_text(path, self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "TrainingHistory":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([
            EpochRecord(
                int(r["epoch"]), int(r["active_h1"]), int(r["active_h2"]),
                float(r["train_nll_per_token"]),
                float(r["val_perplexity"]) if r["val_perplexity"] else None,
                float(r["reg_value"]))
            for r in rows
        ])


def _sgd_inplace(params: ModelParams, grads, scale: float) -> None:
    for p, g in zip(params.arrays(), grads.arrays()):
        p -= scale * g


def sgd_minibatch_step(params: ModelParams, minibatch: NGramDataset, eta: float) -> ModelParams:
    """One gradient step on the minibatch-average NLL.  Returns new params."""
    if len(minibatch) == 0:
        raise ValueError("minibatch must be nonempty")
    out = params.copy()
    if eta == 0:
        return out
    _, grads = loss_and_grad(params, minibatch.contexts, minibatch.targets)
    _sgd_inplace(out, grads, eta / len(minibatch))
    return out


def proximal_step(params: ModelParams, spec: RegularizerSpec, eta: float, seed: int = 0) -> ModelParams:
    return apply_prox(params, spec, eta, seed)


def epoch_record(params: ModelParams, epoch: int, dataset: NGramDataset,
                 spec: RegularizerSpec, validation: Optional[NGramDataset] = None) -> EpochRecord:
    h1, h2 = active_units(params)
    val_ppl = perplexity(params, validation) if validation is not None and len(validation) else None
    return EpochRecord(epoch, h1, h2, nll(params, dataset) / len(dataset), val_ppl,
                       regularizer_value(params, spec.kind))


def train(params: ModelParams, dataset: NGramDataset, config: TrainConfig,
          spec: RegularizerSpec, on_epoch: Optional[Callable] = None) -> tuple:
    """Train with proximal SGD; returns ``(params, history)``.

    Every epoch visits the examples in a fresh random order; the last short
    minibatch is kept.  After each epoch the history gains one record with
    active unit counts, training NLL per token, validation perplexity and
    the regularizer value.  ``on_epoch(epoch, params, record)`` is called
    after each record if given.

    The run is a deterministic function of the arguments.  The shuffling
    stream and the prox pivot stream are independent, so a zero-strength
    regularizer reproduces unregularized training bit for bit.

    Raises
    ------
    TrainingDivergedError
        If a minibatch loss is NaN or infinite.
    """
    if len(dataset) == 0:
        raise ValueError("training dataset is empty")
    params = params.copy()
    history = TrainingHistory()
    shuffle_seq, pivot_seq = np.random.SeedSequence(int(config.seed) % 2**64).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    pivot_rng = np.random.default_rng(pivot_seq)
    contexts, targets = dataset.contexts, dataset.targets
    N, bs, eta = len(dataset), config.batch_size, config.eta

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(N)
        for batch, start in enumerate(range(0, N, bs)):
            idx = order[start:start + bs]
            loss, grads = loss_and_grad(params, contexts[idx], targets[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch, loss)
            _sgd_inplace(params, grads, eta / len(idx))
            prox_inplace(params, spec, eta, int(pivot_rng.integers(2**31)))
        record = epoch_record(params, epoch, dataset, spec, config.validation)
        if not np.isfinite(record.train_nll_per_token):
            raise TrainingDivergedError(epoch, -1, record.train_nll_per_token)
        history.records.append(record)
        if on_epoch is not None:
            on_epoch(epoch, params, record)
    return params, history
