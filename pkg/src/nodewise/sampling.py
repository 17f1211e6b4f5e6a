"""Random-walk estimation of node-wise diffusion weights.

Each target ``u`` runs up to ``theta`` walks of length ``l_u``. A visit of
node ``v`` at step ``l`` adds ``w[l] / theta`` to ``t_v``. Sampling stops after
the first completed walk that brings the discovered set to ``K = ceil(1/eps^2)``
nodes, and only the first ``K`` discovered nodes are kept.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ghd import GhdTable
from .graph import Graph
from .spectral import DiffusionLengths

WALK_CHUNK = 256


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.05
    eta: float = 2.0
    delta: float = 0.01
    seed: int = 0
    renormalize_on_early_stop: bool = False
    theta_override: int | None = None
    use_cutoff: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.eta < 1:
            raise ValueError("eta must be at least 1")
        if self.theta_override is not None and self.theta_override < 1:
            raise ValueError("theta_override must be positive")

    @property
    def K(self) -> int:
        return math.ceil(1.0 / self.epsilon**2)

    @property
    def theta(self) -> int:
        if self.theta_override is not None:
            return int(self.theta_override)
        return walk_count(self.eta, self.delta, self.epsilon)


@dataclass
class WalkAccumulator:
    target: int
    nodes: np.ndarray
    weights: np.ndarray
    walks: int
    theta: int
    early_stop: bool = False
    hop_counts: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict[int, float]:
        return {int(v): float(t) for v, t in zip(self.nodes, self.weights)}

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def walk_count(eta: float, delta: float, epsilon: float) -> int:
    """``ceil(2 eta^2 / eps * ln(1 / (delta eps)))``."""
    if eta < 1:
        raise ValueError("eta must be at least 1")
    if not 0 < delta < 1 or not 0 < epsilon < 1:
        raise ValueError("delta and epsilon must lie in (0, 1)")
    return math.ceil(2 * eta**2 / epsilon * math.log(1.0 / (delta * epsilon)))


def target_rng(seed: int, u: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(u)]))


def _simulate(g: Graph, u: int, ell_u: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count x (ell_u + 1)`` array of visited nodes, column 0 is ``u``."""
    paths = np.empty((count, ell_u + 1), dtype=np.int64)
    pos = np.full(count, u, dtype=np.int64)
    paths[:, 0] = pos
    for step in range(1, ell_u + 1):
        offset = rng.integers(0, g.degrees[pos])
        pos = g.indices[g.indptr[pos] + offset]
        paths[:, step] = pos
    return paths


def sample_target(
    g: Graph,
    table: GhdTable,
    u: int,
    ell_u: int,
    cfg: SamplerConfig,
    rng: np.random.Generator | None = None,
    record_hops: bool = False,
) -> WalkAccumulator:
    if ell_u < 1:
        raise ValueError("ell_u must be at least 1")
    if rng is None:
        rng = target_rng(cfg.seed, u)
    theta = cfg.theta
    K = cfg.K if cfg.use_cutoff else None
    w = table.padded(ell_u) / theta

    t = np.zeros(g.n, dtype=np.float64)
    seen = np.zeros(g.n, dtype=bool)
    order: list[np.ndarray] = []
    discovered = 0
    hops = np.zeros((ell_u + 1, g.n), dtype=np.int64) if record_hops else None
    width = ell_u + 1
    done = 0

    while done < theta:
        count = min(WALK_CHUNK, theta - done)
        paths = _simulate(g, u, ell_u, count, rng)
        uniq, first_pos = np.unique(paths.ravel(), return_index=True)
        fresh = ~seen[uniq]
        new_nodes, new_pos = uniq[fresh], first_pos[fresh]
        by_pos = np.argsort(new_pos, kind="stable")
        new_nodes, new_pos = new_nodes[by_pos], new_pos[by_pos]

        stop = K is not None and discovered + new_nodes.size >= K
        if stop:
            # The walk that brings |S| to K is completed, later walks are discarded.
            keep = int(new_pos[K - discovered - 1] // width) + 1
            new_nodes = new_nodes[new_pos < keep * width]
            paths = paths[:keep]
        else:
            keep = count

        seen[new_nodes] = True
        order.append(new_nodes)
        discovered += new_nodes.size
        t += np.bincount(paths.ravel(), weights=np.tile(w, keep), minlength=g.n)
        if hops is not None:
            for step in range(width):
                hops[step] += np.bincount(paths[:, step], minlength=g.n)
        done += keep
        if stop:
            break

    nodes = np.concatenate(order) if order else np.zeros(0, dtype=np.int64)
    if K is not None:
        nodes = nodes[:K]
    weights = t[nodes]
    if cfg.renormalize_on_early_stop and done < theta:
        weights = weights * (theta / done)
    return WalkAccumulator(
        target=int(u),
        nodes=nodes,
        weights=weights,
        walks=done,
        theta=theta,
        early_stop=done < theta,
        hop_counts=hops,
    )


@dataclass(frozen=True)
class SampledEmbedding:
    """Embedding rows plus per-target sampling counters."""

    z: np.ndarray
    walks: np.ndarray
    kept: np.ndarray
    early_stops: int


def _embed_one(g, x, table, u, ell_u, cfg):
    acc = sample_target(g, table, u, ell_u, cfg)
    return acc.weights @ x[acc.nodes], acc.walks, acc.nodes.size, acc.early_stop


def propagate_sampled(
    g: Graph,
    x,
    lengths: DiffusionLengths,
    table: GhdTable,
    cfg: SamplerConfig,
    threads: int = 1,
    return_stats: bool = False,
):
    """Sampled embedding, one row per target in ``lengths.targets`` order.

    Every target draws from its own stream seeded by ``(cfg.seed, u)``, so the
    result does not depend on ``threads``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.n:
        raise ValueError(f"feature matrix shape {x.shape} does not match graph with {g.n} nodes")
    jobs = list(zip(lengths.targets.tolist(), lengths.lengths.tolist()))
    run = lambda job: _embed_one(g, x, table, job[0], job[1], cfg)  # noqa: E731
    if threads <= 1:
        results = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    z = np.zeros((len(jobs), x.shape[1]))
    for i, r in enumerate(results):
        z[i] = r[0]
    if not return_stats:
        return z
    return SampledEmbedding(
        z=z,
        walks=np.array([r[1] for r in results], dtype=np.int64),
        kept=np.array([r[2] for r in results], dtype=np.int64),
        early_stops=sum(int(r[3]) for r in results),
    )


def neighbor_weight_profile(g: Graph, table: GhdTable, u: int, ell_u: int, cfg: SamplerConfig) -> np.ndarray:
    """Rows of ``(rank, weight, cumulative fraction)`` with weights descending.

    Sampling runs without the first-K cutoff.
    """
    acc = sample_target(g, table, u, ell_u, replace(cfg, use_cutoff=False))
    w = np.sort(acc.weights)[::-1]
    cum = np.cumsum(w) / w.sum()
    return np.column_stack([np.arange(1, w.size + 1), w, cum])

