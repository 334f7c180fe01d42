"""Fock-state evolution through an interferometer: transition amplitudes,
full output superpositions, and heralded post-measurement states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from . import fock
from .errors import DomainError
from .permanent import _EXTENDED_MIN, _ryser, build_transition, permanent
from .unitary import Interferometer

# Detection patterns below this probability are treated as impossible
# (no normalization attempted).
ZERO_PROB = 1e-14

_FACTORIAL = tuple(math.factorial(k) for k in range(21))


def _factorial_product(counts) -> float:
    out = 1
    for c in counts:
        out *= _FACTORIAL[c]
    return float(out)


@dataclass(frozen=True)
class ExperimentSetup:
    """Interferometer, Fock input, and the Alice/Bob/Harold mode partition."""

    unitary: Interferometer
    input_state: fock.OccupationVector
    partition: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "input_state", tuple(int(c) for c in self.input_state))
        object.__setattr__(self, "partition", tuple(int(p) for p in self.partition))
        m = self.unitary.dim
        if len(self.input_state) != m:
            raise DomainError("input state length must equal the mode count")
        if any(c < 0 for c in self.input_state):
            raise DomainError("occupation counts must be non-negative")
        if sum(self.input_state) < 1:
            raise DomainError("at least one photon is required")
        m_a, m_b, m_h = self.partition
        if m_a < 1 or m_b < 0 or m_h < 0:
            raise DomainError("partition requires M_A >= 1 and non-negative parts")
        if m_a + m_b + m_h != m:
            raise DomainError(f"partition {self.partition} does not sum to {m} modes")

    @property
    def mode_count(self) -> int:
        return self.unitary.dim

    @property
    def photon_count(self) -> int:
        return sum(self.input_state)


@dataclass(frozen=True)
class HeraldedState:
    """Normalized post-measurement system state for one detection pattern.

    ``coefficients`` maps (alice, bob) occupation pairs to the normalized
    amplitude C; it is empty when the pattern has (numerically) zero
    probability, in which case ``possible`` is False.
    """

    pattern: fock.OccupationVector
    probability: float
    coefficients: dict[tuple[fock.OccupationVector, fock.OccupationVector], complex]
    system_modes: tuple[int, int]
    system_photons: int
    possible: bool

    def to_json(self) -> dict:
        return {
            "pattern": fock.format_occupation(self.pattern),
            "prob": self.probability,
            "amplitudes": [
                {
                    "a": fock.format_occupation(a),
                    "b": fock.format_occupation(b),
                    "re": c.real,
                    "im": c.imag,
                }
                for (a, b), c in self.coefficients.items()
            ],
        }


@njit(cache=True)
def _batch_amplitudes(u, col_idx, out_counts, denoms, out):  # pragma: no cover
    d, m = out_counts.shape
    k = col_idx.shape[0]
    t = np.empty((k, k), np.complex128)
    row_idx = np.empty(k, np.int64)
    for r in range(d):
        pos = 0
        for mode in range(m):
            for _ in range(out_counts[r, mode]):
                row_idx[pos] = mode
                pos += 1
        for i in range(k):
            for j in range(k):
                t[i, j] = u[row_idx[i], col_idx[j]]
        out[r] = _ryser(t) / denoms[r]


@lru_cache(maxsize=None)
def _basis_arrays(mode_count: int, photon_count: int):
    basis = fock.enumerate_basis(mode_count, photon_count)
    counts = np.array(basis.states, dtype=np.int64).reshape(len(basis), mode_count)
    counts.setflags(write=False)
    fact = np.array([_factorial_product(s) for s in basis.states], dtype=float)
    fact.setflags(write=False)
    return counts, fact


def amplitude_vector(matrix: np.ndarray, input_state: fock.OccupationVector) -> np.ndarray:
    """Amplitudes over the canonical n-photon output basis, as a flat array.

    This is the batched workhorse behind full_output and the optimization
    objectives; entries follow fock.enumerate_basis order.
    """
    m = matrix.shape[0]
    n = sum(input_state)
    counts, fact = _basis_arrays(m, n)
    denoms = np.sqrt(fact * _factorial_product(input_state))
    if n < _EXTENDED_MIN:
        col_idx = np.repeat(np.arange(m, dtype=np.int64), input_state)
        out = np.empty(len(counts), dtype=np.complex128)
        _batch_amplitudes(
            np.ascontiguousarray(matrix, dtype=np.complex128), col_idx, counts, denoms, out
        )
        return out
    u = Interferometer(matrix)
    basis = fock.enumerate_basis(m, n)
    input_state = tuple(input_state)
    return np.array(
        [
            permanent(build_transition(u, input_state, state)) / denoms[i]
            for i, state in enumerate(basis.states)
        ],
        dtype=np.complex128,
    )


def amplitude(
    u: Interferometer,
    input_state: fock.OccupationVector,
    output_state: fock.OccupationVector,
) -> complex:
    """Single transition amplitude <output| U^(n) |input>."""
    input_state = tuple(input_state)
    output_state = tuple(output_state)
    if sum(input_state) != sum(output_state):
        raise DomainError("photon number is not conserved between input and output")
    p = permanent(build_transition(u, input_state, output_state))
    return p / math.sqrt(_factorial_product(input_state) * _factorial_product(output_state))


def full_output(setup: ExperimentSetup) -> dict[fock.OccupationVector, complex]:
    """All output amplitudes of the n-photon sector, keyed by occupation vector."""
    basis = fock.enumerate_basis(setup.mode_count, setup.photon_count)
    amps = amplitude_vector(setup.unitary.matrix, setup.input_state)
    return {state: complex(amps[i]) for i, state in enumerate(basis.states)}


def herald_patterns(m_h: int, n: int) -> tuple[fock.OccupationVector, ...]:
    """All detection patterns in canonical order: ascending photon total,
    canonical Fock order within each total."""
    if m_h == 0:
        return ((),)
    return tuple(
        h for n_h in range(n + 1) for h in fock.enumerate_basis(m_h, n_h).states
    )


def herald_all(setup: ExperimentSetup) -> list[HeraldedState]:
    """One heralded outcome per detection pattern, in canonical pattern order.

    Zero-probability patterns are included with an empty coefficient table
    and possible=False.  With no heralded modes, the single pseudo-outcome
    has an empty pattern and probability 1.
    """
    m_a, m_b, m_h = setup.partition
    n = setup.photon_count
    basis = fock.enumerate_basis(setup.mode_count, n)
    amps = amplitude_vector(setup.unitary.matrix, setup.input_state)

    raw: dict[fock.OccupationVector, dict] = {h: {} for h in herald_patterns(m_h, n)}
    for i, state in enumerate(basis.states):
        a, b, h = fock.split(state, setup.partition)
        raw[h][(a, b)] = complex(amps[i])

    outcomes = []
    for h, table in raw.items():
        p = sum(abs(c) ** 2 for c in table.values())
        possible = p >= ZERO_PROB
        if possible:
            scale = 1.0 / math.sqrt(p)
            coeffs = {key: c * scale for key, c in table.items()}
        else:
            coeffs = {}
        outcomes.append(
            HeraldedState(
                pattern=h,
                probability=float(p),
                coefficients=coeffs,
                system_modes=(m_a, m_b),
                system_photons=n - sum(h),
                possible=possible,
            )
        )
    return outcomes


def particle_coefficient(
    hs: HeraldedState, a: fock.OccupationVector, b: fock.OccupationVector
) -> complex:
    """Creation-operator (particle notation) coefficient: the unnormalized
    amplitude divided by the square root of the system-mode factorials."""
    a, b = tuple(a), tuple(b)
    m_a, m_b = hs.system_modes
    if len(a) != m_a or len(b) != m_b or any(c < 0 for c in a + b):
        raise DomainError("occupation vectors do not match the system partition")
    if sum(a) + sum(b) != hs.system_photons:
        raise DomainError("query lies outside this outcome's photon sector")
    unnormalized = hs.coefficients.get((a, b), 0.0j) * math.sqrt(hs.probability)
    return unnormalized / math.sqrt(_factorial_product(a) * _factorial_product(b))
