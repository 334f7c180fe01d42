"""Complex-matrix utilities: unitarity validation, Haar sampling, a smooth
parametrization of U(M) for optimization, and named beamsplitter fixtures.

Mode indices are 0-based everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import DomainError, FixtureError

UNITARITY_TOL = 1e-10

# Angle of the two-photon-optimal beamsplitter: cos(2*theta) = 1/sqrt(3).
BS2_THETA = 0.5 * float(np.arccos(1.0 / np.sqrt(3.0)))


@dataclass(frozen=True)
class Interferometer:
    """An M x M unitary mode transformation, validated on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix), dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DomainError("interferometer matrix must be square and non-empty")
        deviation = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if deviation > UNITARITY_TOL:
            raise DomainError(f"matrix is not unitary (deviation {deviation:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Interferometer":
        mat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        if mat.shape != (obj["dim"], obj["dim"]):
            raise DomainError("serialized matrix shape disagrees with dim")
        return cls(mat)


@dataclass(frozen=True)
class UnitaryParams:
    """Real chart on U(M): U = exp(iH) with H Hermitian.

    Packing of ``theta`` (length M^2): the first M entries are the diagonal
    of H; the remaining entries are (real, imag) pairs of the strict upper
    triangle in row-major order.  The lower triangle follows by conjugation.
    """

    dim: int
    theta: tuple[float, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dim must be >= 1")
        if len(self.theta) != self.dim * self.dim:
            raise DomainError(f"expected {self.dim * self.dim} parameters")
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))


def generator_matrix(dim: int, theta: np.ndarray) -> np.ndarray:
    """Hermitian H built from the fixed parameter packing."""
    theta = np.asarray(theta, dtype=float)
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = theta[:dim]
    pos = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            h[i, j] = theta[pos] + 1j * theta[pos + 1]
            h[j, i] = theta[pos] - 1j * theta[pos + 1]
            pos += 2
    return h


def exp_i_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(iH) for Hermitian H, via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def realize(params: UnitaryParams) -> Interferometer:
    """Map chart parameters to the unitary exp(iH(theta))."""
    h = generator_matrix(params.dim, np.asarray(params.theta))
    return Interferometer(exp_i_hermitian(h))


def params_from_unitary(u: Interferometer) -> UnitaryParams:
    """Inverse chart: Hermitian generator H with exp(iH) = U, then pack."""
    t, q = schur(u.matrix, output="complex")
    angles = np.angle(np.diagonal(t))
    h = (q * angles) @ q.conj().T
    h = (h + h.conj().T) / 2.0
    dim = u.dim
    theta = np.empty(dim * dim, dtype=float)
    theta[:dim] = h.diagonal().real
    pos = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            theta[pos] = h[i, j].real
            theta[pos + 1] = h[i, j].imag
            pos += 2
    return UnitaryParams(dim=dim, theta=tuple(theta))


def haar_sample(dim: int, rng_seed: int) -> Interferometer:
    """Haar-distributed unitary, deterministic for a fixed seed.

    Complex Ginibre matrix followed by QR, with the triangular factor's
    diagonal phases absorbed so its diagonal is real positive.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    rng = np.random.default_rng(rng_seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return Interferometer(q)


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=np.complex128)


def embed(block: Interferometer, dim: int, modes: tuple[int, int]) -> Interferometer:
    """Place a 2x2 block on a mode pair (0-based), identity elsewhere."""
    j, k = modes
    if block.dim != 2:
        raise DomainError("embed expects a 2x2 block")
    if not (0 <= j < dim and 0 <= k < dim) or j == k:
        raise DomainError(f"invalid mode pair {modes} for dim {dim}")
    mat = np.eye(dim, dtype=np.complex128)
    b = block.matrix
    mat[j, j], mat[j, k] = b[0, 0], b[0, 1]
    mat[k, j], mat[k, k] = b[1, 0], b[1, 1]
    return Interferometer(mat)


def fixture(name: str, theta: float | None = None) -> Interferometer:
    """Named optimal interferometers.

    BS1 is the balanced 50:50 beamsplitter; BS2 the two-photon-optimal
    rotation with theta = arccos(1/sqrt(3))/2 (overridable).  The 4-mode
    fixtures couple modes (0,3) and (1,2).
    """
    angle = BS2_THETA if theta is None else float(theta)
    if name == "BS1":
        return Interferometer(np.array([[1, 1], [-1, 1]], dtype=np.complex128) / np.sqrt(2.0))
    if name == "BS2":
        return Interferometer(_rotation(angle))
    if name == "BS2xBS2_4mode":
        u = embed(fixture("BS2", angle), 4, (0, 3))
        v = embed(fixture("BS2", angle), 4, (1, 2))
        return Interferometer(u.matrix @ v.matrix)
    if name == "BS2xBS1_4mode":
        u = embed(fixture("BS2", angle), 4, (0, 3))
        v = embed(fixture("BS1"), 4, (1, 2))
        return Interferometer(u.matrix @ v.matrix)
    if name == "UBell_8mode":
        return _u_bell()
    raise FixtureError(f"unknown fixture {name!r}")


def _u_bell() -> Interferometer:
    """Optimal four-photon Bell-state generator on 8 modes.

    Each input photon is split half into its own system rail (modes 0-3)
    and half into a balanced four-mode heralding multiport (modes 4-7).
    Detecting two photons in the heralds produces an exact Bell state on
    the rails for six of the ten two-photon patterns, each with
    probability 1/32.
    """
    hadamard = 0.5 * np.array(
        [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]],
        dtype=np.complex128,
    )
    eye = np.eye(4, dtype=np.complex128)
    u = np.empty((8, 8), dtype=np.complex128)
    u[:4, :4] = eye
    u[:4, 4:] = eye
    u[4:, :4] = hadamard
    u[4:, 4:] = -hadamard
    return Interferometer(u / np.sqrt(2.0))
