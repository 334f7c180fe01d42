"""Exact permanents of complex matrices via Ryser's formula with Gray-code
subset iteration, plus the repeated-row/column transition matrices that give
multi-photon amplitudes.

Sizes up to 12 use a jitted double-precision kernel.  Larger sizes (up to the
hard cap of 20) switch to 80-bit extended precision: the alternating Ryser sum
cancels by many orders of magnitude there and double precision would lose
more accuracy than downstream tolerances allow.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError
from .unitary import Interferometer

MAX_SIZE = 20
_EXTENDED_MIN = 13

# Alias for documentation; transition matrices are plain complex arrays.
AmplitudeMatrix = np.ndarray


@njit(cache=True)
def _ryser(a):  # pragma: no cover - exercised via permanent()
    n = a.shape[0]
    sums = np.zeros(n, np.complex128)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1.0
    for t in range(1, 1 << n):
        j = 0
        while not (t >> j) & 1:
            j += 1
        bit = 1 << j
        gray ^= bit
        if gray & bit:
            for i in range(n):
                sums[i] += a[i, j]
        else:
            for i in range(n):
                sums[i] -= a[i, j]
        sign = -sign
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= sums[i]
        total += sign * prod
    if n % 2 == 1:
        total = -total
    return total


def _ryser_extended(a: np.ndarray) -> complex:
    """Gray-code Ryser in 80-bit precision; same recurrence as the fast kernel."""
    a = a.astype(np.clongdouble)
    n = a.shape[0]
    sums = np.zeros(n, np.clongdouble)
    total = np.clongdouble(0)
    gray = 0
    sign = 1.0
    for t in range(1, 1 << n):
        j = (t & -t).bit_length() - 1
        bit = 1 << j
        gray ^= bit
        if gray & bit:
            sums += a[:, j]
        else:
            sums -= a[:, j]
        sign = -sign
        total += sign * sums.prod()
    return complex(total if n % 2 == 0 else -total)


def permanent(a: np.ndarray) -> complex:
    """Permanent of a square complex matrix; the empty matrix has permanent 1."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"permanent requires a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_SIZE:
        raise CapacityError(f"permanent size {n} exceeds the cap of {MAX_SIZE}")
    if n == 0:
        return 1.0 + 0.0j
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if n < _EXTENDED_MIN:
        return complex(_ryser(a))
    return _ryser_extended(a)


def build_transition(
    u: Interferometer,
    input_counts: tuple[int, ...],
    output_counts: tuple[int, ...],
) -> AmplitudeMatrix:
    """Transition matrix with column multiplicities from the input occupation
    and row multiplicities from the output occupation."""
    m = u.dim
    if len(input_counts) != m or len(output_counts) != m:
        raise DomainError("occupation vectors must match the interferometer size")
    if any(c < 0 for c in input_counts) or any(c < 0 for c in output_counts):
        raise DomainError("occupation counts must be non-negative")
    if sum(input_counts) != sum(output_counts):
        raise DomainError("input and output photon numbers differ")
    cols = np.repeat(np.arange(m), input_counts)
    rows = np.repeat(np.arange(m), output_counts)
    return u.matrix[np.ix_(rows, cols)]
