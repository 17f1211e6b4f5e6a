"""Exact node-wise diffusion by frontier propagation.

For targets ``T`` with lengths ``l_u`` the embedding is
``z_u = sum_{l <= l_u} w[l] * P^l[u, :] @ X``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .ghd import GhdTable
from .graph import Graph
from .spectral import DiffusionLengths

BLOCK_SIZE = 128
DENSE_FRACTION = 0.25


@dataclass(frozen=True)
class ExactPropagationPlan:
    targets: np.ndarray
    lengths: np.ndarray
    table: GhdTable

    @classmethod
    def from_lengths(cls, lengths: DiffusionLengths, table: GhdTable) -> "ExactPropagationPlan":
        return cls(lengths.targets, lengths.lengths, table)

    @property
    def L(self) -> int:
        return int(self.lengths.max()) if self.lengths.size else 0

    def validate(self, g: Graph) -> None:
        if self.targets.shape != self.lengths.shape:
            raise ValueError("targets and lengths differ in shape")
        if self.targets.size and (self.targets.min() < 0 or self.targets.max() >= g.n):
            raise IndexError("target id out of range")
        if self.lengths.size and self.lengths.min() < 0:
            raise ValueError("negative diffusion length")


def _check_features(g: Graph, x: np.ndarray) -> None:
    if x.ndim != 2 or x.shape[0] != g.n:
        raise ValueError(f"feature matrix shape {x.shape} does not match graph with {g.n} nodes")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix has non-finite entries")


def diffusion_weights(g: Graph, plan: ExactPropagationPlan, check_stochastic: bool = False) -> np.ndarray:
    """``|T| x n`` matrix of accumulated hop weights ``sum_l w[l] P^l[u, :]``."""
    P = g.transition_matrix()
    PT = P.T.tocsr()
    w = plan.table.padded(plan.L)
    k = plan.targets.shape[0]

    frontier = sp.csr_matrix(
        (np.ones(k), (np.arange(k), plan.targets)), shape=(k, g.n), dtype=np.float64
    )
    dense = False
    acc = np.zeros((k, g.n), dtype=np.float64)
    for ell in range(plan.L + 1):
        scale = np.where(plan.lengths >= ell, w[ell], 0.0)
        if dense:
            acc += scale[:, None] * frontier
        else:
            acc += (sp.diags(scale) @ frontier).toarray()
        if check_stochastic:
            sums = np.asarray(frontier.sum(axis=1)).ravel()
            if not np.allclose(sums, 1.0, atol=1e-9, rtol=0):
                raise AssertionError(f"frontier rows lost mass at hop {ell}")
        if ell == plan.L:
            break
        if dense:
            frontier = np.asarray(PT @ frontier.T).T
        else:
            frontier = frontier @ P
            if frontier.nnz > DENSE_FRACTION * k * g.n:
                frontier = frontier.toarray()
                dense = True
    return acc


def _propagate_block(g: Graph, x: np.ndarray, plan: ExactPropagationPlan) -> np.ndarray:
    return diffusion_weights(g, plan) @ x


def propagate_exact(g: Graph, x, plan: ExactPropagationPlan, threads: int = 1) -> np.ndarray:
    """Embedding rows in the order of ``plan.targets``.

    Targets are split into fixed-size blocks independent of ``threads``, so the
    output is the same for any thread count.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_features(g, x)
    plan.validate(g)
    k = plan.targets.shape[0]
    blocks = [
        ExactPropagationPlan(plan.targets[i:i + BLOCK_SIZE], plan.lengths[i:i + BLOCK_SIZE], plan.table)
        for i in range(0, k, BLOCK_SIZE)
    ]
    if threads <= 1 or len(blocks) <= 1:
        parts = [_propagate_block(g, x, b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _propagate_block(g, x, b), blocks))
    if not parts:
        return np.zeros((0, x.shape[1]))
    return np.vstack(parts)


def phi_exact(g: Graph, table: GhdTable, u: int, v: int, ell: int) -> float:
    """Importance ``w[ell] * P^ell[u, v]``."""
    return float(phi_row(g, table, u, ell)[v])


def phi_row(g: Graph, table: GhdTable, u: int, ell: int) -> np.ndarray:
    """``w[ell] * P^ell[u, :]`` by repeated sparse row-vector products."""
    if not 0 <= u < g.n:
        raise IndexError(f"node {u} out of range")
    PT = g.transition_matrix().T.tocsr()
    row = np.zeros(g.n)
    row[u] = 1.0
    for _ in range(ell):
        row = PT @ row
    return table.weight(ell) * row


def phi_matrix(g: Graph, table: GhdTable, u: int, L: int) -> np.ndarray:
    """``(L + 1) x n`` array whose row ``l`` is ``w[l] * P^l[u, :]``."""
    PT = g.transition_matrix().T.tocsr()
    out = np.zeros((L + 1, g.n))
    row = np.zeros(g.n)
    row[u] = 1.0
    w = table.padded(L)
    for ell in range(L + 1):
        out[ell] = w[ell] * row
        row = PT @ row
    return out
