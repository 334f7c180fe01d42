"""Closed-form entanglement bounds and pass/fail reports against them.

All bound values are in ebits (base-2 entropy units).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Uniform additive slack applied to every bound comparison.
SLACK = 1e-9

BOUND_NAMES = (
    "bunched_log",
    "unbunched_2ebit",
    "log3_measured",
    "dimensionality",
    "linearity",
    "mean_photon",
)


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    bound_value: float
    observed: float

    def __post_init__(self):
        if self.bound_name not in BOUND_NAMES:
            raise DomainError(f"unknown bound {self.bound_name!r}")

    @property
    def satisfied(self) -> bool:
        return self.observed <= self.bound_value + SLACK

    @property
    def margin(self) -> float:
        return self.bound_value - self.observed


def dimensionality_bound(m_a: int, n_s: int) -> tuple[int, float]:
    """Maximum Schmidt rank for M_A = M_B modes and n_s system photons,
    and the corresponding log2 entanglement bound."""
    if m_a < 1 or n_s < 0:
        raise DomainError("requires M_A >= 1 and n_s >= 0")
    if n_s == 0:
        return 1, 0.0
    if n_s % 2 == 1:
        half = (n_s - 1) // 2
        omega = 2 * math.comb(m_a + half, half)
    else:
        half = n_s // 2
        numerator = 2 * (n_s + m_a) * math.comb(m_a + half - 1, half - 1)
        omega, rem = divmod(numerator, n_s)
        if rem:  # closed form is always integral; guard against misuse
            raise DomainError("non-integral Schmidt rank; invalid arguments")
    return omega, math.log2(omega)


def linearity_bound(n: int) -> float:
    """Entanglement of an n-photon Fock input is at most n ebits."""
    if n < 0:
        raise DomainError("photon number must be non-negative")
    return float(n)


def bunched_entropy(n: int, p: float) -> float:
    """Exact base-2 entropy of Binomial(n, p): the single-mode spectrum of a
    completely bunched input split on a beamsplitter of transmissivity p."""
    if n < 1:
        raise DomainError("requires n >= 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    # Work with log-probabilities so large n neither overflows the binomial
    # coefficient nor underflows p**k.
    log_n_fact = math.lgamma(n + 1)
    lp, lq = math.log(p), math.log(1.0 - p)
    total = 0.0
    for k in range(n + 1):
        log_pk = (
            log_n_fact
            - math.lgamma(k + 1)
            - math.lgamma(n - k + 1)
            + k * lp
            + (n - k) * lq
        )
        total -= math.exp(log_pk) * (log_pk / math.log(2.0))
    return total


def mean_constrained_entropy_bound(n_bar: float) -> float:
    """Maximum entropy of a photon-number distribution with mean n_bar:
    log2((1+N)^(1+N) / N^N), continuously extended to 0 at N = 0."""
    if n_bar < 0:
        raise DomainError("mean photon number must be non-negative")
    if n_bar == 0:
        return 0.0
    return (1.0 + n_bar) * math.log2(1.0 + n_bar) - n_bar * math.log2(n_bar)


def jensen_log3_bound(q) -> float:
    """sum_j q_j log2(j+2) for a distribution with unit mean; by concavity of
    log this never exceeds log2(3)."""
    q = [float(x) for x in q]
    if any(x < 0 for x in q):
        raise DomainError("probabilities must be non-negative")
    if abs(sum(q) - 1.0) > 1e-12:
        raise DomainError("probabilities must sum to 1")
    if abs(sum(j * x for j, x in enumerate(q)) - 1.0) > 1e-12:
        raise DomainError("distribution must have unit mean")
    return math.fsum(x * math.log2(j + 2) for j, x in enumerate(q))


def report(bound_name: str, bound_value: float, observed: float) -> BoundReport:
    return BoundReport(bound_name=bound_name, bound_value=float(bound_value), observed=float(observed))
