"""Corpus ingestion: tokenization, vocabularies and n-gram extraction.

Corpora are UTF-8 text with one whitespace-tokenized sentence per line.
Every sentence is left-padded with ``n - 1`` copies of ``<s>`` and closed
with ``</s>``; each real token and the closing ``</s>`` becomes one
prediction target.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidConfigurationError, ModelFormatError
from .io import atomic_write_text

UNK, BOS, EOS = "<unk>", "<s>", "</s>"
SPECIALS = (UNK, BOS, EOS)
UNK_ID, BOS_ID, EOS_ID = 0, 1, 2


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token <-> id map.  Ids 0, 1, 2 are ``<unk>``, ``<s>``, ``</s>``."""

    tokens: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        if tokens[:3] != SPECIALS:
            raise ModelFormatError(f"vocabulary must start with {SPECIALS}, got {tokens[:3]}")
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            raise ModelFormatError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "_index", index)

    unk_id = UNK_ID
    bos_id = BOS_ID
    eos_id = EOS_ID

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def id(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        return self.tokens[idx]

    def save(self, path) -> None:
        atomic_write_text(path, "".join(tok + "\n" for tok in self.tokens))

    @classmethod
    def load(cls, path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        tokens = text.split("\n")
        if tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tuple(tokens))


@dataclass
class NGramDataset:
    """Training examples as parallel arrays.

    ``contexts[i]`` holds the ``n - 1`` preceding word ids (oldest first)
    and ``targets[i]`` the id to predict.
    """

    n: int
    contexts: np.ndarray
    targets: np.ndarray

    def __len__(self):
        return len(self.targets)

    def subset(self, idx) -> "NGramDataset":
        return NGramDataset(self.n, self.contexts[idx], self.targets[idx])

    def examples(self) -> Iterator[tuple]:
        for ctx, tgt in zip(self.contexts, self.targets):
            yield tuple(int(i) for i in ctx), int(tgt)


def tokenize_line(text: str) -> list:
    return text.split()


def read_corpus(path) -> list:
    """Tokenized sentences of a corpus file, one list per line."""
    with open(path, encoding="utf-8") as f:
        return [tokenize_line(line) for line in f]


def build_vocabulary(lines: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Keep the ``max_size - 3`` most frequent tokens after the specials.

    Ties are broken by first occurrence.  Literal special tokens in the
    corpus are not counted.
    """
    if max_size < 3:
        raise InvalidConfigurationError(f"max_size must be >= 3, got {max_size}")
    counts = Counter()
    for tokens in lines:
        counts.update(tokens)
    for tok in SPECIALS:
        counts.pop(tok, None)
    # Counter keeps first-insertion order and sorted() is stable
    ranked = sorted(counts, key=lambda tok: -counts[tok])
    return Vocabulary(SPECIALS + tuple(ranked[:max_size - 3]))


def numberize(tokens: Sequence[str], vocab: Vocabulary) -> list:
    return [vocab.id(tok) for tok in tokens]


def extract_ngrams(sentences: Iterable[Sequence[int]], n: int) -> NGramDataset:
    if n < 2:
        raise InvalidConfigurationError(f"n-gram order must be >= 2, got {n}")
    contexts, targets = [], []
    pad = [BOS_ID] * (n - 1)
    for ids in sentences:
        padded = np.array(pad + list(ids) + [EOS_ID], dtype=np.int64)
        windows = sliding_window_view(padded, n)
        contexts.append(windows[:, :-1])
        targets.append(windows[:, -1])
    if not targets:
        return NGramDataset(n, np.zeros((0, n - 1), dtype=np.int64), np.zeros(0, dtype=np.int64))
    return NGramDataset(n, np.concatenate(contexts), np.concatenate(targets))


def split_validation(sentences: list, val_tokens: int) -> tuple:
    """Split off the shortest suffix of whole sentences holding ``>= val_tokens`` tokens.

    Returns ``(train, validation)``.  With ``val_tokens <= 0`` the validation
    part is empty.
    """
    if val_tokens <= 0:
        return sentences, []
    total, cut = 0, len(sentences)
    while cut > 0 and total < val_tokens:
        cut -= 1
        total += len(sentences[cut])
    return sentences[:cut], sentences[cut:]


def load_dataset(sentences: Iterable[Sequence[str]], vocab: Vocabulary, n: int) -> NGramDataset:
    return extract_ngrams((numberize(s, vocab) for s in sentences), n)
