import math

import numpy as np
import pytest

from nodewise.graph import from_edges
from nodewise.spectral import (
    compute_lengths,
    estimate_lambda_exact,
    tau_distance_exact,
    tau_distance_heuristic,
)

from conftest import dense_powers, path3, random_connected


def dense_lambda(g):
    ev = np.sort(np.linalg.eigvals(g.transition_matrix().toarray()).real)
    return max(ev[-2], -ev[0])


def test_path_characteristic_polynomial():
    # det(P - x I) for the self-looped 3-path factors as (x - 1)(x - 1/2)(x + 1/6)
    P = path3().transition_matrix().toarray()
    coeffs = np.poly(P)
    assert np.allclose(coeffs, np.poly([1.0, 0.5, -1 / 6]))
    assert estimate_lambda_exact(path3()).lam == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("edges", [[[0, 1], [1, 2], [0, 2]], [[0, 1]]])
def test_rank_one_transition_matrices(edges):
    assert estimate_lambda_exact(from_edges(edges)).lam == pytest.approx(0.0, abs=1e-8)


def test_lambda_matches_dense_eigensolver(rng):
    for _ in range(15):
        g = random_connected(rng)
        est = estimate_lambda_exact(g)
        assert est.converged
        assert abs(est.lam - dense_lambda(g)) <= 1e-8


def test_bipartite_like_negative_eigenvalue():
    # path of 6: lambda_n is the dominant magnitude candidate alongside lambda_2
    g = from_edges([[i, i + 1] for i in range(5)])
    assert estimate_lambda_exact(g).lam == pytest.approx(dense_lambda(g), abs=1e-8)


def test_exact_length_example():
    g = path3()
    assert math.ceil(math.log(0.5 * math.sqrt(6) / 7) / math.log(0.5)) == 3
    assert tau_distance_exact(g, 0.5, 0.5, 1) == 3


def test_exact_length_degenerate():
    g = path3()
    assert tau_distance_exact(g, 0.0, 0.5, 1) == 1
    assert tau_distance_exact(g, 0.5, 100.0, 1) == 1
    with pytest.raises(ValueError):
        tau_distance_exact(g, 1.0, 0.5, 1)


def test_exact_length_respects_cap():
    g = path3()
    assert tau_distance_exact(g, 0.999, 1e-6, 1, l_cap=50) == 50


def graph_2m1000():
    """n = 100 and 2m = 1000 (d_G = 10); node 0 is isolated so d_min = 1,
    node 1 has degree 4."""
    edges = [(1, 2), (1, 3), (1, 4)]
    pairs = ((i, j) for gap in range(1, 98) for i in range(2, 100) for j in [i + gap] if j < 100)
    while len(edges) < 450:
        edges.append(next(pairs))
    return from_edges(edges, n=100)


def test_heuristic_length_examples():
    g = graph_2m1000()
    assert (g.num_slots, g.d_min, g.degrees[1], g.avg_degree) == (1000, 1, 4, 10.0)
    assert tau_distance_heuristic(g, 1.0, 1) == 6
    assert tau_distance_heuristic(g, 2.0, 1) == 11


def test_heuristic_length_on_graph(rng):
    g = random_connected(rng, 50, 100)
    slots, dmin, dg = g.num_slots, g.d_min, g.avg_degree
    for u in range(0, g.n, 7):
        want = max(1, math.ceil(math.log(slots / math.sqrt(dmin * g.degrees[u])) / math.log(math.sqrt(dg))))
        assert tau_distance_heuristic(g, 1.0, u) == want
        assert tau_distance_heuristic(g, 2.0, u) >= want


def test_heuristic_rejects_degenerate_density():
    with pytest.raises(ValueError):
        tau_distance_heuristic(from_edges([], n=3), 1.0, 0)


def test_heuristic_decreasing_in_degree(rng):
    g = random_connected(rng, 60, 120)
    lengths = compute_lengths(g, np.arange(g.n), mode="heuristic", tau=1.5)
    order = np.argsort(g.degrees)
    assert np.all(np.diff(lengths.lengths[order]) <= 0)


def test_exact_monotone_in_tau_and_degree(rng):
    g = random_connected(rng, 60, 120)
    lam = estimate_lambda_exact(g).lam
    prev = None
    for tau in (0.1, 0.25, 0.5, 1.0, 2.0):
        cur = compute_lengths(g, np.arange(g.n), mode="exact", tau=tau, lam=lam).lengths
        if prev is not None:
            assert np.all(cur <= prev)
        prev = cur
    order = np.argsort(g.degrees)
    assert np.all(np.diff(prev[order]) <= 0)


def test_exact_length_satisfies_tau_distance(rng):
    for _ in range(8):
        g = random_connected(rng, 20, 120)
        lam = estimate_lambda_exact(g).lam
        lengths = compute_lengths(g, np.arange(g.n), mode="exact", tau=0.5, lam=lam, l_cap=10**6)
        powers = dense_powers(g, lengths.L)
        pi = g.degrees / g.num_slots
        for u, ell in zip(lengths.targets, lengths.lengths):
            assert np.max(np.abs(powers[ell][u] - pi) / pi) <= 0.5


def test_compute_lengths_validates():
    with pytest.raises(IndexError):
        compute_lengths(path3(), [5])
    with pytest.raises(ValueError):
        compute_lengths(path3(), [0], mode="bogus")
