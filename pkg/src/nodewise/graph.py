"""Self-looped undirected graphs in CSR layout.

Every graph built here is normalized on construction: duplicate edges are
merged, both directions are stored, and each node carries a self-loop.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


class DisconnectedGraphWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable CSR graph with self-loops on every node.

    ``indices[indptr[u]:indptr[u + 1]]`` is the sorted neighbor list of ``u``
    (``u`` itself included), so ``degrees[u]`` counts the self-loop.
    """

    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray
    self_loops_applied: bool = True
    original_ids: np.ndarray | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return int(self.degrees.shape[0])

    @property
    def num_slots(self) -> int:
        """Directed edge slots, i.e. sum of degrees (the ``2m`` of the model)."""
        return int(self.indices.shape[0])

    @property
    def num_edges(self) -> int:
        """Undirected edge count with each self-loop counted once."""
        loops = self.n if self.self_loops_applied else 0
        return (self.num_slots - loops) // 2 + loops

    @property
    def d_min(self) -> int:
        return int(self.degrees.min())

    @property
    def avg_degree(self) -> float:
        return self.num_slots / self.n

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.num_slots, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def transition_matrix(self) -> sp.csr_matrix:
        """Row-stochastic ``D^-1 A``."""
        data = np.repeat(1.0 / self.degrees, self.degrees)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def sym_normalized(self) -> sp.csr_matrix:
        """``D^-1/2 A D^-1/2``."""
        inv_sqrt = 1.0 / np.sqrt(self.degrees.astype(np.float64))
        rows = np.repeat(np.arange(self.n), self.degrees)
        data = inv_sqrt[rows] * inv_sqrt[self.indices]
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def stats(self) -> dict:
        return {
            "n": self.n,
            "m": self.num_edges,
            "slots": self.num_slots,
            "d_min": self.d_min,
            "d_G": self.avg_degree,
        }


def from_edges(edges, n: int | None = None, original_ids=None) -> Graph:
    """Build a normalized graph from an ``(k, 2)`` array-like of node pairs."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and edges.min() < 0:
        raise GraphFormatError("node ids must be non-negative")
    needed = int(edges.max()) + 1 if edges.size else 0
    if n is None:
        n = needed
    elif n < needed:
        raise GraphFormatError(f"node count {n} smaller than max id + 1 = {needed}")
    if n == 0:
        raise GraphFormatError("graph has no nodes")

    loops = np.arange(n, dtype=np.int64)
    src = np.concatenate([edges[:, 0], edges[:, 1], loops])
    dst = np.concatenate([edges[:, 1], edges[:, 0], loops])
    adj = sp.coo_matrix((np.ones(src.shape[0], dtype=np.int8), (src, dst)), shape=(n, n)).tocsr()
    adj.sum_duplicates()
    adj.sort_indices()
    indptr = adj.indptr.astype(np.int64)
    indices = adj.indices.astype(np.int64)
    degrees = np.diff(indptr)
    ids = None if original_ids is None else np.asarray(original_ids, dtype=np.int64)
    return Graph(indptr=indptr, indices=indices, degrees=degrees, original_ids=ids)


def load_edge_list(path, remap: bool = False) -> Graph:
    """Read a whitespace-separated edge list.

    Lines starting with ``#`` are comments, except an optional ``#n <count>``
    header fixing the node count. With ``remap=True`` ids are compacted to
    ``0..k-1`` and the original ids are kept on ``Graph.original_ids``.
    """
    path = Path(path)
    declared_n = None
    pairs = []
    saw_content = False
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            saw_content = True
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "n":
                    try:
                        declared_n = int(parts[1])
                    except ValueError:
                        raise GraphFormatError(f"{path}:{lineno}: bad node-count header {line!r}") from None
                continue
            line = line.split("#", 1)[0]
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two node ids, got {raw.rstrip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-integer node id in {raw.rstrip()!r}") from None
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative node id")
            pairs.append((u, v))
    if not saw_content or (not pairs and declared_n is None):
        raise GraphFormatError(f"{path}: empty edge list")

    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if remap:
        uniq, inverse = np.unique(edges, return_inverse=True)
        edges = inverse.reshape(-1, 2)
        return from_edges(edges, original_ids=uniq)
    return from_edges(edges, n=declared_n)


def stationary_distribution(g: Graph) -> np.ndarray:
    return g.degrees / float(g.num_slots)


def transition_row(g: Graph, u: int) -> dict[int, float]:
    if not 0 <= u < g.n:
        raise IndexError(f"node {u} out of range for graph with {g.n} nodes")
    nbrs = g.neighbors(u)
    p = 1.0 / g.degrees[u]
    return {int(v): p for v in nbrs}


@dataclass(frozen=True)
class ConnectivityReport:
    count: int
    sizes: list[int]
    labels: np.ndarray = field(repr=False)

    @property
    def connected(self) -> bool:
        return self.count == 1


def connectivity_report(g: Graph, warn: bool = True) -> ConnectivityReport:
    count, labels = connected_components(g.adjacency(), directed=False)
    sizes = sorted(np.bincount(labels).tolist(), reverse=True)
    if warn and count > 1:
        warnings.warn(
            f"graph has {count} connected components; diffusion lengths use global m, d_min, d_G",
            DisconnectedGraphWarning,
            stacklevel=2,
        )
    return ConnectivityReport(count=int(count), sizes=sizes, labels=labels)


def check_invariants(g: Graph) -> None:
    """Full scan of the structural invariants; raises AssertionError on failure."""
    assert g.degrees.sum() == g.num_slots
    assert np.all(g.degrees >= 1)
    for u in range(g.n):
        nbrs = g.neighbors(u)
        assert np.all(np.diff(nbrs) > 0), f"neighbor list of {u} unsorted or duplicated"
        assert np.searchsorted(nbrs, u) < nbrs.size and nbrs[np.searchsorted(nbrs, u)] == u
    adj = g.adjacency()
    assert (adj != adj.T).nnz == 0, "adjacency not symmetric"


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p) sample, self-looped."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return from_edges(np.stack([iu[keep], ju[keep]], axis=1), n=n)
