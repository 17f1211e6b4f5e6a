"""General heat diffusion hop weights.

The weight at hop ``l`` is ``omega**l / ((l!)**rho * C)``. ``rho = 1`` gives the
heat-kernel (Poisson) weights, ``rho = 0`` gives the geometric PPR weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_HARD_CAP = 512


class DivergentSeriesError(ValueError):
    pass


@dataclass(frozen=True)
class GhdTable:
    omega: float
    rho: float
    weights: np.ndarray
    norm_const: float
    tail_tol: float
    hit_hard_cap: bool = False

    @property
    def length(self) -> int:
        """Last stored hop index (``L_cap``)."""
        return int(self.weights.shape[0]) - 1

    def weight(self, ell: int) -> float:
        if ell < 0:
            raise ValueError("hop index must be non-negative")
        return float(self.weights[ell]) if ell <= self.length else 0.0

    def padded(self, L: int) -> np.ndarray:
        """Weights for hops ``0..L``, zero beyond the stored table."""
        out = np.zeros(L + 1, dtype=np.float64)
        k = min(L, self.length) + 1
        out[:k] = self.weights[:k]
        return out

    def mass(self, L: int) -> float:
        """Total weight of hops ``0..L``."""
        return float(self.padded(L).sum())

    def peak(self) -> int:
        return int(np.argmax(self.weights))


def build_ghd_table(
    omega: float,
    rho: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    hard_cap: int = DEFAULT_HARD_CAP,
) -> GhdTable:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if rho < 0:
        raise ValueError(f"rho must be non-negative, got {rho}")
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    if hard_cap < 1:
        raise ValueError("hard_cap must be at least 1")

    if rho == 0:
        if omega >= 1:
            raise DivergentSeriesError(f"rho=0 requires omega < 1 (got {omega}); the normalizer diverges")
        # Geometric: the dropped tail past hop L is omega**(L+1) of the total.
        need = math.ceil(math.log(tail_tol) / math.log(omega)) - 1
        L = max(0, min(need, hard_cap))
        ell = np.arange(L + 1)
        weights = (1.0 - omega) * np.exp(ell * math.log(omega))
        return GhdTable(omega, rho, weights, 1.0 / (1.0 - omega), tail_tol, hit_hard_cap=need > hard_cap)

    log_omega = math.log(omega)
    peak = math.ceil(omega ** (1.0 / rho)) if log_omega / rho < 700 else hard_cap + 1
    logs = []
    log_running = -math.inf
    hit_cap = True
    for ell in range(hard_cap + 1):
        log_term = ell * log_omega - rho * gammaln(ell + 1)
        logs.append(log_term)
        log_running = np.logaddexp(log_running, log_term)
        if ell < peak:
            continue
        # Past the peak the term ratio r = omega / (l + 1)**rho keeps shrinking,
        # so the dropped tail is at most term * r / (1 - r).
        ratio = omega / (ell + 1) ** rho
        if ratio >= 1:
            continue
        bound = log_term + math.log(max(1.0, ratio / (1.0 - ratio)))
        if bound < math.log(tail_tol) + log_running:
            hit_cap = False
            break

    logs = np.asarray(logs)
    top = logs.max()
    scaled = np.exp(logs - top)
    total = scaled.sum()
    weights = scaled / total
    norm_const = float(math.exp(top) * total) if top < 700 else math.inf
    return GhdTable(omega, rho, weights, norm_const, tail_tol, hit_hard_cap=hit_cap)


def hkpr_weight(omega: float, ell: int) -> float:
    """Poisson mass ``exp(-omega) omega**ell / ell!``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return math.exp(-omega + ell * math.log(omega) - math.lgamma(ell + 1))
