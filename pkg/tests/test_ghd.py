import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodewise.ghd import DivergentSeriesError, build_ghd_table, hkpr_weight


def test_geometric_case():
    t = build_ghd_table(0.5, 0.0)
    assert t.weights[:3].tolist() == [0.5, 0.25, 0.125]
    assert t.norm_const == 2.0


def test_heat_kernel_case_value():
    # exp(-5) 5^5 / 5! computed from the closed form
    expected = math.exp(-5) * 5**5 / 120
    assert expected == pytest.approx(0.175467, abs=5e-7)
    assert build_ghd_table(5, 1).weights[5] == pytest.approx(expected, abs=1e-12)


def test_smooth_regime_has_long_tail():
    t = build_ghd_table(1.15, 0.06)
    assert (t.weights > 1e-4).sum() >= 20
    assert not t.hit_hard_cap


@pytest.mark.parametrize(
    "omega, ell, expected",
    [(1.0, 0, math.exp(-1)), (5.0, 5, 0.175467), (2.0, 1, 2 * math.exp(-2))],
)
def test_hkpr_weight(omega, ell, expected):
    assert hkpr_weight(omega, ell) == pytest.approx(expected, abs=1e-6)


def test_hkpr_weight_against_factorial():
    for omega in (0.5, 3.0, 7.5):
        for ell in range(15):
            direct = math.exp(-omega) * omega**ell / math.factorial(ell)
            assert hkpr_weight(omega, ell) == pytest.approx(direct, rel=1e-12)


def test_rejects_divergent_and_bad_args():
    with pytest.raises(DivergentSeriesError):
        build_ghd_table(1.0, 0.0)
    with pytest.raises(ValueError):
        build_ghd_table(-1.0, 1.0)
    with pytest.raises(ValueError):
        build_ghd_table(1.0, -0.5)
    with pytest.raises(ValueError):
        build_ghd_table(1.0, 1.0, tail_tol=0.0)


def test_hard_cap_flag():
    t = build_ghd_table(1.5, 0.01, hard_cap=64)
    assert t.hit_hard_cap
    assert t.length == 64


def test_truncation_not_before_peak():
    t = build_ghd_table(40.0, 1.0, tail_tol=0.5)
    assert t.length >= 40


def test_weight_past_table_is_zero():
    t = build_ghd_table(0.5, 1.0)
    assert t.weight(t.length + 5) == 0.0
    assert t.padded(t.length + 3)[-1] == 0.0


@settings(max_examples=80, deadline=None)
@given(
    omega=st.floats(0.05, 12.0),
    rho=st.floats(0.05, 2.0),
    tol=st.sampled_from([1e-6, 1e-9, 1e-12]),
)
def test_normalized_and_unimodal(omega, rho, tol):
    t = build_ghd_table(omega, rho, tail_tol=tol)
    if t.hit_hard_cap:
        return
    total = t.weights.sum()
    assert 1 - 10 * tol <= total <= 1 + 1e-12
    assert np.all(t.weights >= 0)
    ratios = t.weights[1:] / t.weights[:-1]
    # Stored ratios follow omega / (l + 1)^rho and strictly decrease.
    ell = np.arange(1, t.length + 1)
    assert np.allclose(ratios, omega / ell**rho, rtol=1e-9)
    assert np.all(np.diff(ratios) < 0)


@settings(max_examples=40, deadline=None)
@given(omega=st.floats(0.01, 0.98), tol=st.sampled_from([1e-6, 1e-12]))
def test_geometric_tail_within_tolerance(omega, tol):
    t = build_ghd_table(omega, 0.0, tail_tol=tol)
    if t.hit_hard_cap:
        assert t.length == 512
        return
    assert 1 - 10 * tol <= t.weights.sum() <= 1
