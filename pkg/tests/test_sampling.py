import numpy as np
import pytest

from nodewise.exact import ExactPropagationPlan, phi_matrix, propagate_exact
from nodewise.ghd import build_ghd_table
from nodewise.graph import from_edges
from nodewise.sampling import (
    SamplerConfig,
    neighbor_weight_profile,
    propagate_sampled,
    sample_target,
    target_rng,
    walk_count,
)
from nodewise.spectral import DiffusionLengths

from conftest import random_connected


@pytest.mark.parametrize(
    "eta, delta, eps, expected",
    [(2, 0.01, 0.05, 1217), (1, 0.1, 0.1, 93), (2, 0.01, 0.008, 9434)],
)
def test_walk_count(eta, delta, eps, expected):
    assert walk_count(eta, delta, eps) == expected


def test_walk_count_rejects_out_of_range():
    for args in [(0.5, 0.1, 0.1), (2, 0.0, 0.1), (2, 0.1, 1.0)]:
        with pytest.raises(ValueError):
            walk_count(*args)


def test_config_cutoff():
    assert SamplerConfig(epsilon=0.99).K == 2
    assert SamplerConfig(epsilon=0.05).K == 400
    with pytest.raises(ValueError):
        SamplerConfig(epsilon=0.0)


def test_single_node_is_deterministic():
    g = from_edges([], n=1)
    table = build_ghd_table(1.15, 0.06)
    acc = sample_target(g, table, 0, 5, SamplerConfig(epsilon=0.1))
    assert acc.nodes.tolist() == [0]
    assert acc.weights[0] == pytest.approx(table.mass(5), abs=1e-12)


def test_early_stop_at_second_node(er100):
    table = build_ghd_table(1.15, 0.06)
    acc = sample_target(er100, table, 0, 4, SamplerConfig(epsilon=0.99, seed=3), record_hops=True)
    assert acc.nodes.size == 2
    assert acc.early_stop
    # every walk before the last one stayed on the target
    per_walk = table.mass(4) / acc.theta
    assert acc.hop_counts.sum(axis=1).tolist() == [acc.walks] * 5
    assert acc.weights.sum() <= acc.walks * per_walk + 1e-12


def test_cutoff_invariants(er100):
    table = build_ghd_table(2.0, 1.0)
    for eps in (0.3, 0.2, 0.12):
        cfg = SamplerConfig(epsilon=eps, seed=5)
        for u in range(0, 100, 9):
            acc = sample_target(er100, table, u, 4, cfg)
            assert acc.nodes.size <= cfg.K
            if acc.nodes.size < cfg.K:
                assert acc.walks == cfg.theta
            assert np.all(acc.weights > 0)
            assert acc.weights.sum() <= table.mass(4) + 1e-9
            assert np.unique(acc.nodes).size == acc.nodes.size


def test_discovery_order_is_first_visit(er100):
    table = build_ghd_table(2.0, 1.0)
    cfg = SamplerConfig(epsilon=0.25, seed=11, theta_override=40)
    acc = sample_target(er100, table, 3, 3, cfg)
    # Replay the same stream walk by walk.
    rng = target_rng(cfg.seed, 3)
    from nodewise.sampling import _simulate

    paths = _simulate(er100, 3, 3, 40, rng)
    order = []
    for walk in paths:
        for v in walk:
            if v not in order:
                order.append(int(v))
        if len(order) >= cfg.K:
            break
    assert acc.nodes.tolist() == order[: cfg.K]


def test_weight_conservation_without_cutoff(er100):
    table = build_ghd_table(1.15, 0.06)
    cfg = SamplerConfig(epsilon=0.05, seed=2)
    acc = sample_target(er100, table, 10, 6, cfg)
    assert acc.walks == cfg.theta
    assert acc.weights.sum() == pytest.approx(table.mass(6), abs=1e-12)


def test_renormalize_on_early_stop(er100):
    table = build_ghd_table(2.0, 1.0)
    base = SamplerConfig(epsilon=0.2, seed=9)
    plain = sample_target(er100, table, 4, 4, base)
    renorm = sample_target(er100, table, 4, 4, SamplerConfig(epsilon=0.2, seed=9, renormalize_on_early_stop=True))
    assert plain.early_stop
    assert np.allclose(renorm.weights, plain.weights * plain.theta / plain.walks)
    assert renorm.weights.sum() <= table.mass(4) + 1e-9


def test_unbiased_against_phi_oracle(er100):
    table = build_ghd_table(2.0, 0.7)
    ell = 3
    z_scores = []
    for u in range(0, 100, 10):
        oracle = phi_matrix(er100, table, u, ell).sum(axis=0)
        samples = np.zeros((200, er100.n))
        for s in range(200):
            acc = sample_target(er100, table, u, ell, SamplerConfig(epsilon=0.05, seed=s, theta_override=300))
            samples[s, acc.nodes] = acc.weights
        mean = samples.mean(axis=0)
        se = samples.std(axis=0, ddof=1) / np.sqrt(200)
        support = oracle > 0
        z_scores.append(np.abs(mean - oracle)[support] / np.maximum(se[support], 1e-300))
    z_scores = np.concatenate(z_scores)
    assert z_scores.size > 500
    assert np.mean(z_scores <= 3) >= 0.99


def test_propagate_constant_features(er100):
    table = build_ghd_table(1.15, 0.06)
    x = np.tile([1.0, -2.0], (er100.n, 1))
    lengths = DiffusionLengths(np.arange(0, 100, 10), np.full(10, 5))
    z = propagate_sampled(er100, x, lengths, table, SamplerConfig(epsilon=0.05))
    assert np.allclose(z, table.mass(5) * x[:10], atol=1e-12)


def test_propagate_close_to_exact(er100, rng):
    table = build_ghd_table(1.15, 0.06)
    x = rng.random((er100.n, 8))
    lengths = DiffusionLengths(np.arange(0, 100, 5), np.full(20, 4))
    cfg = SamplerConfig(epsilon=0.05, seed=1, theta_override=10 * walk_count(2, 0.01, 0.05))
    z = propagate_sampled(er100, x, lengths, table, cfg)
    exact = propagate_exact(er100, x, ExactPropagationPlan.from_lengths(lengths, table))
    rel = np.linalg.norm(z - exact, axis=1) / np.linalg.norm(exact, axis=1)
    assert rel.max() <= 0.05


def test_threads_and_stats(er100, rng):
    table = build_ghd_table(2.0, 1.0)
    x = rng.standard_normal((er100.n, 3))
    lengths = DiffusionLengths(np.arange(er100.n), np.full(er100.n, 4))
    cfg = SamplerConfig(epsilon=0.1, seed=42)
    ref = propagate_sampled(er100, x, lengths, table, cfg, return_stats=True)
    for t in (2, 8):
        other = propagate_sampled(er100, x, lengths, table, cfg, threads=t, return_stats=True)
        assert np.array_equal(ref.z, other.z)
        assert np.array_equal(ref.walks, other.walks)
    assert ref.walks.sum() <= er100.n * cfg.theta
    assert np.all(ref.kept <= cfg.K)


def test_profile_single_node():
    g = from_edges([], n=1)
    rows = neighbor_weight_profile(g, build_ghd_table(1.0, 1.0), 0, 3, SamplerConfig())
    assert rows.shape == (1, 3)
    assert rows[0, 2] == 1.0


def test_profile_symmetric_on_complete_graph():
    n = 8
    g = from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])
    table = build_ghd_table(2.0, 1.0)
    samples = np.zeros((200, n))
    for s in range(200):
        acc = sample_target(g, table, 0, 3, SamplerConfig(epsilon=0.05, seed=s, theta_override=200, use_cutoff=False))
        samples[s, acc.nodes] = acc.weights
    others = samples[:, 1:]
    mean = others.mean(axis=0)
    se = others.std(axis=0, ddof=1) / np.sqrt(200)
    # all non-target nodes share one expected weight
    pooled = mean.mean()
    assert np.all(np.abs(mean - pooled) <= 3 * np.sqrt(se**2 + (se**2).mean() / (n - 1)) + 1e-12)
    rows = neighbor_weight_profile(g, table, 0, 3, SamplerConfig(seed=1))
    assert np.all(np.diff(rows[:, 1]) <= 0)
    assert rows[-1, 2] == pytest.approx(1.0)


def hub_tree():
    """Hub with 5 spokes, each spoke the root of a 4-ary tree of depth 3."""
    edges, frontier, nxt = [], [0], 1
    for depth in range(4):
        children = []
        for parent in frontier:
            for _ in range(5 if depth == 0 else 4):
                edges.append((parent, nxt))
                children.append(nxt)
                nxt += 1
        frontier = children
    return from_edges(edges)


def test_profile_concentrates_on_hub():
    g = hub_tree()
    table = build_ghd_table(0.9, 1.15)
    rows = neighbor_weight_profile(g, table, 0, 4, SamplerConfig(epsilon=0.05, seed=0))
    head = int(np.searchsorted(rows[:, 2], 0.99)) + 1
    assert rows.shape[0] > 100
    assert head <= 0.25 * rows.shape[0]
    assert rows[0, 1] >= table.weight(0)
