"""Bosonic occupation-number bases: dimensions, enumeration, indexing, splitting.

An occupation vector is a plain tuple of non-negative ints, one entry per
mode.  Bases are enumerated in lexicographically *descending* order, so
``(n, 0, ..., 0)`` comes first and ``(0, ..., 0, n)`` last; this order is
frozen so serialized output is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .errors import CapacityError, DomainError

# Keeps every binomial well inside 64-bit integer range.
MAX_MODES_PLUS_PHOTONS = 40

OccupationVector = tuple[int, ...]


def dimension(mode_count: int, photon_count: int) -> int:
    """Number of Fock states of ``photon_count`` photons in ``mode_count`` modes."""
    if photon_count < 0 or mode_count < 0:
        raise DomainError("mode and photon counts must be non-negative")
    if mode_count == 0:
        if photon_count > 0:
            raise DomainError("no modes cannot hold photons")
        return 1
    if mode_count + photon_count > MAX_MODES_PLUS_PHOTONS:
        raise CapacityError(
            f"mode_count + photon_count must not exceed {MAX_MODES_PLUS_PHOTONS}"
        )
    return math.comb(mode_count + photon_count - 1, photon_count)


def _descending(mode_count: int, photon_count: int) -> Iterator[OccupationVector]:
    if mode_count == 1:
        yield (photon_count,)
        return
    for k in range(photon_count, -1, -1):
        for rest in _descending(mode_count - 1, photon_count - k):
            yield (k, *rest)


@dataclass(frozen=True)
class FockBasis:
    """All occupation vectors of a fixed photon sector, in canonical order."""

    mode_count: int
    photon_count: int
    states: tuple[OccupationVector, ...]
    index: dict[OccupationVector, int]

    def __len__(self) -> int:
        return len(self.states)


@lru_cache(maxsize=None)
def enumerate_basis(mode_count: int, photon_count: int) -> FockBasis:
    """Enumerate the full ``photon_count``-photon sector of ``mode_count`` modes."""
    dim = dimension(mode_count, photon_count)
    if mode_count == 0:
        states: tuple[OccupationVector, ...] = ((),)
    else:
        states = tuple(_descending(mode_count, photon_count))
    assert len(states) == dim
    return FockBasis(
        mode_count=mode_count,
        photon_count=photon_count,
        states=states,
        index={state: i for i, state in enumerate(states)},
    )


def split(
    v: OccupationVector, boundaries: tuple[int, int, int]
) -> tuple[OccupationVector, OccupationVector, OccupationVector]:
    """Split an occupation vector into (Alice, Bob, Harold) segments."""
    if any(b < 0 for b in boundaries):
        raise DomainError("mode partition entries must be non-negative")
    if sum(boundaries) != len(v):
        raise DomainError(
            f"partition {boundaries} does not cover {len(v)} modes"
        )
    m_a, m_b, _ = boundaries
    return tuple(v[:m_a]), tuple(v[m_a : m_a + m_b]), tuple(v[m_a + m_b :])


def format_occupation(v: OccupationVector) -> str:
    """Serialize counts as a digit string ("1010") or bracketed list ("[10,0,2]")."""
    if all(0 <= c <= 9 for c in v):
        return "".join(str(c) for c in v)
    return "[" + ",".join(str(c) for c in v) + "]"
