"""Schmidt spectra, von Neumann entropy (base 2), and measurement-averaged
entanglement of heralded bipartite states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import DomainError
from .simulate import ExperimentSetup, HeraldedState, herald_all

_ENTROPY_FLOOR = 1e-15
_CLAMP = 1e-12


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Squared Schmidt coefficients, one array per Alice photon sector."""

    sectors: tuple[np.ndarray, ...]

    @property
    def weights(self) -> np.ndarray:
        if not self.sectors:
            return np.zeros(0)
        return np.concatenate(self.sectors)

    @property
    def rank(self) -> int:
        """Number of weights above the entropy floor."""
        w = self.weights
        return int((w > _ENTROPY_FLOOR).sum())


def schmidt_spectrum(hs: HeraldedState) -> SchmidtSpectrum:
    """Sector-wise singular values of the coefficient matrix, squared.

    Photon-number conservation makes Alice's reduced state block diagonal by
    her photon count, so each sector can be decomposed independently.
    """
    if not hs.possible:
        raise DomainError("zero-probability outcome has no Schmidt spectrum")
    m_a, m_b = hs.system_modes
    n_s = hs.system_photons
    sectors = []
    for n_a in range(n_s + 1):
        alice = fock.enumerate_basis(m_a, n_a)
        bob = fock.enumerate_basis(m_b, n_s - n_a)
        mat = np.zeros((len(alice), len(bob)), dtype=np.complex128)
        for (a, b), c in hs.coefficients.items():
            if sum(a) == n_a:
                mat[alice.index[a], bob.index[b]] = c
        if mat.shape[0] == 1 or mat.shape[1] == 1:
            # Rank-1 sector: the lone squared singular value is the norm.
            weights = np.array([float(np.vdot(mat, mat).real)])
        else:
            sv = np.linalg.svd(mat, compute_uv=False)
            weights = sv**2
        sectors.append(weights)
    return SchmidtSpectrum(tuple(sectors))


def entropy(spectrum) -> float:
    """Von Neumann entropy in ebits: -sum(w log2 w), with 0 log 0 = 0.

    Accepts a SchmidtSpectrum or any array of squared coefficients.  Small
    negative weights caused by rounding (>= -1e-12) are clamped to zero.
    """
    w = spectrum.weights if isinstance(spectrum, SchmidtSpectrum) else np.asarray(spectrum, float)
    if np.any(w < -_CLAMP):
        raise DomainError("spectrum weights must be non-negative")
    w = w[w > _ENTROPY_FLOOR]
    if w.size == 0:
        return 0.0
    return float(-(w * np.log2(w)).sum())


def average_entanglement(setup: ExperimentSetup) -> float:
    """Detection-probability-weighted mean entanglement over all patterns."""
    terms = [
        hs.probability * entropy(schmidt_spectrum(hs))
        for hs in herald_all(setup)
        if hs.possible
    ]
    return math.fsum(terms)


_DUAL_RAIL_KEYS = (
    ((1, 0), (1, 0)),  # |00>
    ((1, 0), (0, 1)),  # |01>
    ((0, 1), (1, 0)),  # |10>
    ((0, 1), (0, 1)),  # |11>
)


def dual_rail_project(hs: HeraldedState) -> tuple[np.ndarray, float]:
    """Project onto the one-photon-per-rail qubit subspace.

    Returns the renormalized two-qubit state over {|00>,|01>,|10>,|11>} and
    the squared-norm share the subspace held before renormalization; the
    state is the zero vector when that share is below 1e-14.
    """
    if hs.system_modes != (2, 2):
        raise DomainError("dual-rail projection requires M_A = M_B = 2")
    q = np.array([hs.coefficients.get(k, 0.0j) for k in _DUAL_RAIL_KEYS], dtype=np.complex128)
    weight = float(np.vdot(q, q).real)
    if weight < 1e-14:
        return np.zeros(4, dtype=np.complex128), weight
    return q / math.sqrt(weight), weight
