"""Detection and removal of dead hidden units.

A unit is dead when its whole incoming group (weights and bias) is exactly
zero.  With ReLU its activation is then 0 for every input, so deleting it
together with its outgoing column leaves the network function unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import ModelParams
from .prox import layer_groups


@dataclass
class PruneReport:
    layer1_removed: list = field(default_factory=list)
    layer2_removed: list = field(default_factory=list)
    sizes_before: tuple = (0, 0)
    sizes_after: tuple = (0, 0)

    @property
    def empty(self) -> bool:
        return not self.layer1_removed and not self.layer2_removed

    def format(self) -> str:
        def idx(xs):
            return " ".join(str(i) for i in xs)
        return (
            f"sizes_before {self.sizes_before[0]} {self.sizes_before[1]}\n"
            f"sizes_after {self.sizes_after[0]} {self.sizes_after[1]}\n"
            f"layer1_removed {len(self.layer1_removed)}: {idx(self.layer1_removed)}\n"
            f"layer2_removed {len(self.layer2_removed)}: {idx(self.layer2_removed)}\n"
        )


def zero_units(params: ModelParams, layer: int) -> np.ndarray:
    """Sorted indices of units whose group is identically 0.0."""
    G = layer_groups(params, layer)
    return np.flatnonzero(~G.any(axis=1))


def near_zero_units(params: ModelParams, layer: int, tol: float) -> np.ndarray:
    """Units whose group max-abs entry is ``<= tol``.  For inspection only;
    :func:`compact` never uses a tolerance."""
    G = layer_groups(params, layer)
    if G.shape[1] == 0:
        return np.arange(G.shape[0])
    return np.flatnonzero(np.abs(G).max(axis=1) <= tol)


def active_units(params: ModelParams) -> tuple:
    return (params.h1 - len(zero_units(params, 1)), params.h2 - len(zero_units(params, 2)))


def compact(params: ModelParams) -> tuple:
    """Remove dead units from both layers.

    Layer 1 is compacted first (rows of every ``B^k`` and ``b``, columns of
    ``C``), then layer 2 (rows of ``C`` and ``c``, columns of ``D``).
    Returns ``(new_params, report)``.
    """
    before = (params.h1, params.h2)
    dead1 = zero_units(params, 1)
    keep1 = np.setdiff1d(np.arange(params.h1), dead1)
    B = params.B[:, keep1, :]
    b = params.b[keep1]
    C = params.C[:, keep1]

    # layer-2 groups are taken after layer 1 has been compacted
    G2 = np.hstack([C, params.c[:, None]])
    dead2 = np.flatnonzero(~G2.any(axis=1))
    keep2 = np.setdiff1d(np.arange(params.h2), dead2)
    out = ModelParams(
        params.A.copy(), B, b, C[keep2], params.c[keep2], params.D[:, keep2], params.d_out.copy())
    report = PruneReport(
        [int(i) for i in dead1], [int(i) for i in dead2], before, (out.h1, out.h2))
    return out, report
