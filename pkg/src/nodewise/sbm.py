"""Stochastic block model fixtures with block-indicator features."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .graph import Graph, from_edges


@dataclass
class SbmFixture:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    split: dict[str, np.ndarray]
    edges: np.ndarray

    def write(self, directory) -> dict[str, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {
            "graph": d / "graph.txt",
            "features": d / "features.tsv",
            "labels": d / "labels.tsv",
            "split": d / "split.tsv",
        }
        with paths["graph"].open("w") as fh:
            fh.write(f"#n {self.graph.n}\n")
            for u, v in self.edges:
                fh.write(f"{u} {v}\n")
        io.write_tsv(paths["features"], self.features)
        io.write_labels(paths["labels"], self.labels)
        io.write_split(paths["split"], self.split)
        return paths


def split_protocol(labels, rng: np.random.Generator, per_class: int = 20, n_val: int | None = None, n_test: int | None = None):
    """``per_class`` training nodes per class; the remainder is shuffled into
    validation and test (halved when sizes are not given)."""
    labels = np.asarray(labels)
    train = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < per_class:
            raise ValueError(f"class {c} has only {members.size} nodes")
        train.append(rng.choice(members, size=per_class, replace=False))
    train = np.sort(np.concatenate(train))
    rest = rng.permutation(np.setdiff1d(np.arange(labels.size), train))
    if n_val is None and n_test is None:
        n_val = rest.size // 2
        n_test = rest.size - n_val
    elif n_val is None or n_test is None:
        raise ValueError("give both n_val and n_test or neither")
    if n_val + n_test > rest.size:
        raise ValueError("not enough nodes for the requested validation/test sizes")
    return {"train": train, "val": np.sort(rest[:n_val]), "test": np.sort(rest[n_val:n_val + n_test])}


def generate_sbm_fixture(
    blocks: int = 4,
    per_block: int = 100,
    p_in: float = 0.1,
    p_out: float = 0.005,
    feature_noise: float = 0.5,
    seed: int = 7,
    per_class: int = 20,
) -> SbmFixture:
    if blocks < 1 or per_block < 1:
        raise ValueError("blocks and per_block must be positive")
    if not 0 <= p_out < p_in <= 1:
        raise ValueError("need 0 <= p_out < p_in <= 1")
    if feature_noise < 0:
        raise ValueError("feature_noise must be non-negative")
    rng = np.random.default_rng(seed)
    n = blocks * per_block
    labels = np.repeat(np.arange(blocks), per_block)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(iu.shape[0]) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    graph = from_edges(edges, n=n)
    features = np.eye(blocks)[labels] + feature_noise * rng.standard_normal((n, blocks))
    split = split_protocol(labels, rng, per_class=per_class)
    return SbmFixture(graph, features, labels, split, edges)
