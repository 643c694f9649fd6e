"""Group norms and their proximal operators.

A *group* is the flattened vector of one hidden unit's incoming weights
followed by its bias.  Layer 1 groups are the rows of ``[B^1 ... B^{n-1} | b]``
and layer 2 groups the rows of ``[C | c]``.  Every operator here produces
literal ``0.0`` for eliminated entries so that downstream code can detect
dead units by equality.

The l-infinity prox uses a randomized-pivot partition scheme that runs in
expected linear time per row.  It is compiled with numba; the pivot
sequence is driven by an explicit integer seed so results are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from numba import njit

from .errors import InvalidConfigurationError
from .network import ModelParams

KINDS = ("none", "l1", "l21", "linf1")


@dataclass(frozen=True)
class RegularizerSpec:
    """Which regularizer to apply to the hidden layers, and how strongly."""

    kind: str = "none"
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigurationError(
                f"unknown regularizer kind {self.kind!r}; expected one of {KINDS}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidConfigurationError(f"lambda must be >= 0, got {self.lam}")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.lam > 0


@dataclass(frozen=True)
class RowGroup:
    """Incoming weights of one hidden unit plus its bias."""

    weights: np.ndarray
    bias: float = 0.0

    def flat(self) -> np.ndarray:
        return np.append(np.asarray(self.weights, dtype=np.float64).ravel(), self.bias)


Rows = Union[np.ndarray, Sequence[RowGroup], Iterable[np.ndarray]]


def _group_vectors(rows):
    if isinstance(rows, np.ndarray):
        return list(np.atleast_2d(rows.astype(np.float64, copy=False)))
    return [r.flat() if isinstance(r, RowGroup) else np.asarray(r, dtype=np.float64).ravel()
            for r in rows]


def group_norm_l21(rows: Rows) -> float:
    """Sum of the Euclidean norms of the groups.

    ``rows`` is either a list of :class:`RowGroup` (bias included in the
    group) or a 2-D array whose rows are already-flattened groups.
    """
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        return float(np.sqrt((rows * rows).sum(axis=1)).sum())
    return float(sum(np.sqrt(np.dot(g, g)) for g in _group_vectors(rows)))


def group_norm_linf1(rows: Rows) -> float:
    """Sum over groups of the largest absolute entry."""
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        if rows.shape[1] == 0:
            return 0.0
        return float(np.abs(rows).max(axis=1).sum())
    return float(sum(np.abs(g).max() if g.size else 0.0 for g in _group_vectors(rows)))


def prox_l2_row(v, delta: float) -> np.ndarray:
    """Prox of ``delta * ||.||_2``: shrink ``v`` toward the origin by ``delta``.

    Returns the zero vector when ``||v|| <= delta``.
    """
    v = np.asarray(v, dtype=np.float64)
    if delta == 0:
        return v.copy()
    norm = np.sqrt(np.dot(v, v))
    if norm <= delta:
        return np.zeros_like(v)
    return v * ((norm - delta) / norm)


def prox_l1(v, delta: float) -> np.ndarray:
    """Elementwise soft thresholding."""
    v = np.asarray(v, dtype=np.float64)
    if delta == 0:
        return v.copy()
    out = np.sign(v) * np.maximum(np.abs(v) - delta, 0.0)
    out[out == 0] = 0.0  # drop negative zeros
    return out


# ---------------------------------------------------------------------------
# l-infinity prox


_LCG_MOD = 2147483648


@njit(cache=True)
def _partition(x, lo, md, hi):
    # Moves entries >= pivot to the left; returns the pivot's final index.
    t = x[lo]
    x[lo] = x[md]
    x[md] = t
    pivot = x[lo]
    i = lo + 1
    for j in range(lo + 1, hi + 1):
        if x[j] >= pivot:
            t = x[i]
            x[i] = x[j]
            x[j] = t
            i += 1
    t = x[lo]
    x[lo] = x[i - 1]
    x[i - 1] = t
    return i - 1


@njit(cache=True)
def _linf_threshold(x, delta, state):
    """Clamp level for the l-inf prox of a row with absolute values ``x``.

    ``x`` is permuted in place.  ``state`` is the pivot LCG state; the
    updated state is returned alongside the threshold.
    """
    lo = 0
    hi = x.shape[0] - 1
    s = 0.0
    while lo <= hi:
        state = (state * 1103515245 + 12345) % _LCG_MOD
        md = lo + state % (hi - lo + 1)
        p = _partition(x, lo, md, hi)
        part = 0.0
        for i in range(lo, p + 1):
            part += x[i]
        # p + 1 entries (all >= x[p]) would be lowered to xi
        xi = (s + part - delta) / (p + 1)
        if xi <= x[p]:
            s += part
            lo = p + 1
        else:
            hi = p - 1
    # lo now counts the entries that end at the threshold; it is zero only
    # for an empty row
    if lo == 0:
        return 0.0, state
    xi = (s - delta) / lo
    if xi < 0.0:
        xi = 0.0
    return xi, state


@njit(cache=True)
def _prox_linf_rows(G, delta, seed):
    rows, width = G.shape
    out = np.empty_like(G)
    work = np.empty(width)
    state = seed % _LCG_MOD
    for r in range(rows):
        for j in range(width):
            work[j] = abs(G[r, j])
        xi, state = _linf_threshold(work, delta, state)
        if xi == 0.0:
            for j in range(width):
                out[r, j] = 0.0
        else:
            for j in range(width):
                out[r, j] = min(max(G[r, j], -xi), xi)
    return out


def prox_linf_rows(G, delta: float, seed: int = 0) -> np.ndarray:
    """Apply :func:`prox_linf_row` to every row of a 2-D array."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    if delta == 0 or G.size == 0:
        return G.copy()
    return _prox_linf_rows(G, float(delta), int(seed) % _LCG_MOD)


def prox_linf_row(v, delta: float, seed: int = 0) -> np.ndarray:
    """Prox of ``delta * ||.||_inf``.

    Lowers the largest absolute entries of ``v`` to a common level until the
    total decrease equals ``delta`` (or the row is exhausted, in which case
    the result is all zeros).  Entries below the level and all signs are
    kept.  Expected linear time in ``len(v)``.

    Parameters
    ----------
    v : array_like, shape (n,)
    delta : float
        Threshold mass, ``eta * lambda`` in a proximal-gradient step.
    seed : int
        Seeds the pivot sequence.  The result does not depend on it beyond
        floating-point summation order.
    """
    v = np.asarray(v, dtype=np.float64)
    return prox_linf_rows(v.reshape(1, -1), delta, seed).reshape(v.shape)


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{w : ||w||_1 <= radius}`` (sort-based).

    This is the conjugate counterpart of :func:`prox_linf_row`: for any
    ``v`` and ``delta``, ``prox_linf_row(v, delta) + project_l1_ball(v, delta)``
    reconstructs ``v``.
    """
    v = np.asarray(v, dtype=np.float64)
    u = np.abs(v)
    if u.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    mu = np.sort(u)[::-1]
    cssv = np.cumsum(mu)
    k = np.arange(1, u.size + 1)
    # the largest entry always qualifies; guard against rounding at tiny radii
    hits = np.nonzero(mu * k > cssv - radius)[0]
    rho = hits[-1] if hits.size else 0
    theta = (cssv[rho] - radius) / (rho + 1.0)
    out = np.sign(v) * np.maximum(u - theta, 0.0)
    out[out == 0] = 0.0
    return out


# ---------------------------------------------------------------------------
# whole-model prox


def layer_groups(params: ModelParams, layer: int) -> np.ndarray:
    """Flattened groups of a hidden layer as a ``(units, width + 1)`` array.

    Layer 1 rows are ``[B^1_i, ..., B^{n-1}_i, b_i]``; layer 2 rows are
    ``[C_i, c_i]``.
    """
    if layer == 1:
        return np.hstack([params.layer1_matrix(), params.b[:, None]])
    if layer == 2:
        return np.hstack([params.C, params.c[:, None]])
    raise ValueError(f"layer must be 1 or 2, got {layer}")


def _set_layer_groups(params: ModelParams, layer: int, G: np.ndarray) -> None:
    if layer == 1:
        params.set_layer1_matrix(G[:, :-1])
        params.b[:] = G[:, -1]
    else:
        params.C[:] = G[:, :-1]
        params.c[:] = G[:, -1]


def prox_group_matrix(G, kind: str, delta: float, seed: int = 0) -> np.ndarray:
    """Row-wise prox of ``delta * R`` for a matrix whose rows are groups."""
    G = np.asarray(G, dtype=np.float64)
    if kind == "none" or delta == 0 or G.size == 0:
        return G.copy()
    if kind == "l1":
        return prox_l1(G, delta)
    if kind == "linf1":
        return prox_linf_rows(G, delta, seed)
    if kind == "l21":
        norms = np.sqrt((G * G).sum(axis=1))
        keep = norms > delta
        out = np.zeros_like(G)
        out[keep] = G[keep] * ((norms[keep] - delta) / norms[keep])[:, None]
        return out
    raise InvalidConfigurationError(f"unknown regularizer kind {kind!r}")


def prox_inplace(params: ModelParams, spec: RegularizerSpec, eta: float, seed: int = 0) -> None:
    """In-place version of :func:`apply_prox`."""
    if not spec.active:
        return
    delta = eta * spec.lam
    for layer, layer_seed in ((1, seed), (2, seed + 1)):
        G = layer_groups(params, layer)
        _set_layer_groups(params, layer, prox_group_matrix(G, spec.kind, delta, layer_seed))


def apply_prox(params: ModelParams, spec: RegularizerSpec, eta: float, seed: int = 0) -> ModelParams:
    """Regularizer half-step of proximal gradient descent.

    Applies the row prox with ``delta = eta * spec.lam`` to every group of
    both hidden layers (or elementwise soft thresholding for ``l1``).  The
    embedding and output layers are left alone.  Returns a new
    :class:`ModelParams`; the input is not modified.
    """
    if eta <= 0:
        raise InvalidConfigurationError(f"eta must be > 0, got {eta}")
    out = params.copy()
    prox_inplace(out, spec, eta, seed)
    return out


def regularizer_value(params: ModelParams, kind: str) -> float:
    """``R(W)`` summed over both hidden layers; 0 for ``none``."""
    if kind == "none":
        return 0.0
    total = 0.0
    for layer in (1, 2):
        G = layer_groups(params, layer)
        if kind == "l1":
            total += float(np.abs(G).sum())
        elif kind == "l21":
            total += group_norm_l21(G)
        elif kind == "linf1":
            total += group_norm_linf1(G)
        else:
            raise InvalidConfigurationError(f"unknown regularizer kind {kind!r}")
    return total
