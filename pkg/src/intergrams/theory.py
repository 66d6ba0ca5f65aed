"""Zipf-model recall guarantees for prefix filtering.

Notation used throughout: ``a`` is the Zipf exponent, ``D`` a support size,
``M_k = sum_{i<=k} i**-a`` the partial normaliser, ``beta`` the fraction of
n-gram occurrences covered by the retained prefixes and ``beta_eff`` whatever
corrected version of it a bound is evaluated at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedParameter


@dataclass(frozen=True)
class ZipfModel:
    a: float
    D: int

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Zipf exponent must be > 0")
        if self.D < 1:
            raise ValueError("support size must be >= 1")

    def weights(self) -> np.ndarray:
        return np.arange(1, self.D + 1, dtype=np.float64) ** -self.a

    def probabilities(self) -> np.ndarray:
        w = self.weights()
        return w / harmonic_partial(self.D, self.a)

    def partial_sum(self, k: int) -> float:
        return harmonic_partial(k, self.a)

    def top_mass(self, k: int) -> float:
        """Probability that one draw lands in the k most likely ranks."""
        return harmonic_partial(min(k, self.D), self.a) / harmonic_partial(self.D, self.a)


def harmonic_partial(k: int, a: float) -> float:
    """``M_k`` with correctly rounded summation."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.fsum((np.arange(k, 0, -1, dtype=np.float64) ** -a).tolist())


def mk_bounds(k: int, a: float) -> tuple[float, float]:
    """Integral sandwich ``lower <= M_k <= upper``."""
    if k < 1 or not a > 0:
        raise ValueError("need k >= 1 and a > 0")
    if a == 1:
        return math.log(k + 1), math.log(k) + 1.0
    e = 1.0 - a
    return ((k + 1) ** e - 1.0) / e, (k ** e - a) / e


def beta_prime(beta: float, m: int, N: int) -> float:
    """Lower bound on the (n+1)-gram mass prefixed by the retained n-grams."""
    if m < 1 or N <= m:
        raise ValueError(f"need N > m >= 1, got m={m}, N={N}")
    return beta - m / (N - m)


def _check_a(a: float) -> None:
    if a == 1:
        raise UnsupportedParameter("closed-form rank/recall bounds are not defined for a = 1")
    if not a > 0:
        raise ValueError("a must be > 0")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def u_bound(D_next: int, a: float, beta_eff: float) -> float:
    """Worst rank of the best (n+1)-gram that survives prefix filtering.

    Floored at 0 and capped at ``D_next - 1``.
    """
    _check_a(a)
    if D_next < 1:
        raise ValueError("D_next must be >= 1")
    beta_eff = _clamp01(beta_eff)
    e = 1.0 - a
    base = (D_next ** e - a) * (1.0 - beta_eff) + 1.0
    if base <= 0:
        # only reachable for a > 1: every rank satisfies the constraint
        return float(D_next - 1)
    u = base ** (1.0 / e) - 1.0
    return min(max(u, 0.0), float(D_next - 1))


def recall_expression(k: int, D_next: int, a: float, beta_eff: float) -> float:
    """Unclamped recall-fraction bound; can fall outside [0, 1]."""
    _check_a(a)
    if k < 1:
        raise ValueError("k must be >= 1")
    e = 1.0 - a
    return 1.0 - ((D_next ** e - a) * (1.0 - beta_eff) - a) / ((k + 1) ** e - 1.0)


def recall_bound(k: int, D_next: int, a: float, beta_eff: float) -> float:
    return _clamp01(recall_expression(k, D_next, a, _clamp01(beta_eff)))


def recall_bound_conservative(k: int, D_next: int, a: float, beta_eff: float) -> float:
    """Recall bound obtained by substituting ``u_bound`` into ``1 - M_u / M_k``.

    Identical to :func:`recall_bound` except that the ``+1`` from the rank
    bound is carried through, which makes it hold against worst-case
    simulation where :func:`recall_bound` can overshoot.
    """
    _check_a(a)
    beta_eff = _clamp01(beta_eff)
    e = 1.0 - a
    num = (D_next ** e - a) * (1.0 - beta_eff) + 1.0 - a
    return _clamp01(1.0 - num / ((k + 1) ** e - 1.0))


def concentration_delta(delta: float, k: int, D: int, N: int) -> float:
    """Deviation of the empirical top-k mass that holds with probability 1 - delta."""
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if N < 1 or D < 1 or k < 1:
        raise ValueError("N, D and k must be >= 1")
    return 4.0 * math.sqrt(k * k * math.log(2 * D / delta) / (2 * N))


@dataclass(frozen=True)
class BoundInputs:
    k: int
    k_prime: int
    beta: float
    m: int
    N: int
    delta: float
    D: int
    D_next: int


class NoisyBounds(NamedTuple):
    u: float
    recall: float
    beta_eff: float
    vacuous: bool


def beta_double_prime(inputs: BoundInputs) -> float:
    return (beta_prime(inputs.beta, inputs.m, inputs.N)
            - concentration_delta(inputs.delta, inputs.k_prime, inputs.D, inputs.N))


def noisy_bounds(inputs: BoundInputs, a: float, D_next: int | None = None) -> NoisyBounds:
    """Rank and recall bounds after both the prefix-transfer and sampling corrections.

    ``vacuous`` is set when the corrected mass or the raw recall expression
    had to be clamped to produce a usable number.
    """
    D_next = inputs.D_next if D_next is None else D_next
    raw = beta_double_prime(inputs)
    beff = _clamp01(raw)
    expr = recall_expression(inputs.k, D_next, a, beff)
    vacuous = raw <= 0 or expr < 0
    return NoisyBounds(u_bound(D_next, a, beff), _clamp01(expr), beff, vacuous)
