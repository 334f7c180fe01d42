"""Cost functions over interferometers and multi-restart quasi-Newton search:
Bell-state generation, dual-rail entanglement yield (3-photon no-go harness),
and maximum average mode entanglement."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import fock, simulate
from .errors import DomainError
from .simulate import ZERO_PROB
from .unitary import (
    Interferometer,
    UnitaryParams,
    exp_i_hermitian,
    generator_matrix,
    haar_sample,
    params_from_unitary,
)

ARMIJO_C = 1e-4
BACKTRACK = 0.5

# Relative weight allowed outside the dual-rail qubit subspace before a
# heralded pattern stops counting as an event-ready two-qubit output.
DUAL_RAIL_LEAK_TOL = 1e-9

OBJECTIVES = ("bell_cost", "neg_avg_entanglement", "dual_rail_ent_yield")

# System-basis components of the six dual-rail Bell states, as (alice, bob)
# occupation pairs; consecutive pairs combine with +/- signs.
_BELL_COMPONENTS = (
    ((1, 0), (1, 0)),  # |1010>
    ((0, 1), (0, 1)),  # |0101>
    ((1, 0), (0, 1)),  # |1001>
    ((0, 1), (1, 0)),  # |0110>
    ((1, 1), (0, 0)),  # |1100>
    ((0, 0), (1, 1)),  # |0011>
)

_DUAL_RAIL_COMPONENTS = (
    ((1, 0), (1, 0)),  # qubit |00>
    ((1, 0), (0, 1)),  # qubit |01>
    ((0, 1), (1, 0)),  # qubit |10>
    ((0, 1), (0, 1)),  # qubit |11>
)


def default_bell_targets() -> tuple[dict, ...]:
    """The six Bell states (|1010> +/- |0101>)/sqrt2 etc., as coefficient tables."""
    s = 1.0 / math.sqrt(2.0)
    targets = []
    for pair in range(3):
        first = _BELL_COMPONENTS[2 * pair]
        second = _BELL_COMPONENTS[2 * pair + 1]
        targets.append({first: s, second: s})
        targets.append({first: s, second: -s})
    return tuple(targets)


class _Workspace:
    """Precomputed index structures for one (input, partition) configuration.

    Groups the canonical n-photon output basis by detection pattern so that
    objectives reduce to array passes over a single amplitude vector.
    """

    def __init__(self, input_state, partition):
        self.input_state = tuple(input_state)
        self.partition = tuple(partition)
        self.m = len(self.input_state)
        self.n = sum(self.input_state)
        m_a, m_b, m_h = self.partition
        if m_a + m_b + m_h != self.m:
            raise DomainError("partition does not cover all modes")
        self.basis = fock.enumerate_basis(self.m, self.n)
        self.patterns = simulate.herald_patterns(m_h, self.n)
        pattern_pos = {h: g for g, h in enumerate(self.patterns)}
        buckets: list[list[int]] = [[] for _ in self.patterns]
        tables: list[dict] = [{} for _ in self.patterns]
        for i, state in enumerate(self.basis.states):
            a, b, h = fock.split(state, self.partition)
            g = pattern_pos[h]
            buckets[g].append(i)
            tables[g][(a, b)] = i
        self.group_idx = [np.array(ix, dtype=np.int64) for ix in buckets]
        self.group_tables = tables
        self.order = np.concatenate(self.group_idx)
        self.starts = np.zeros(len(buckets) + 1, dtype=np.int64)
        np.cumsum([len(ix) for ix in buckets], out=self.starts[1:])
        self._component_pos: dict[tuple, np.ndarray] = {}
        self._sector_idx = None

    def amplitudes(self, matrix: np.ndarray) -> np.ndarray:
        return simulate.amplitude_vector(matrix, self.input_state)

    def component_positions(self, components: tuple) -> np.ndarray:
        """Per group, global index of each listed (a, b) component, or -1."""
        if components not in self._component_pos:
            pos = np.full((len(self.patterns), len(components)), -1, dtype=np.int64)
            for g, table in enumerate(self.group_tables):
                for c, key in enumerate(components):
                    pos[g, c] = table.get(key, -1)
            self._component_pos[components] = pos
        return self._component_pos[components]

    def sector_indices(self):
        """Per group and Alice photon count, the index matrix into the
        amplitude vector forming that sector's coefficient matrix."""
        if self._sector_idx is None:
            m_a, m_b, _ = self.partition
            out = []
            for g, h in enumerate(self.patterns):
                n_s = self.n - sum(h)
                per_sector = []
                for n_a in range(n_s + 1):
                    alice = fock.enumerate_basis(m_a, n_a)
                    bob = fock.enumerate_basis(m_b, n_s - n_a)
                    idx = np.empty((len(alice), len(bob)), dtype=np.int64)
                    table = self.group_tables[g]
                    for i, a in enumerate(alice.states):
                        for j, b in enumerate(bob.states):
                            idx[i, j] = table[(a, b)]
                    per_sector.append(idx)
                out.append(per_sector)
            self._sector_idx = out
        return self._sector_idx


_WORKSPACES: dict[tuple, _Workspace] = {}


def _workspace(input_state, partition) -> _Workspace:
    key = (tuple(input_state), tuple(partition))
    if key not in _WORKSPACES:
        _WORKSPACES[key] = _Workspace(*key)
    return _WORKSPACES[key]


@njit(cache=True)
def _bell_kernel(amps, starts, order, pos, half_exponent):  # pragma: no cover
    total = 0.0
    for g in range(starts.shape[0] - 1):
        p = 0.0
        for t in range(starts[g], starts[g + 1]):
            a = amps[order[t]]
            p += a.real * a.real + a.imag * a.imag
        if p < 1e-14:
            continue
        overlap_sum = 0.0
        for pair in range(3):
            i0 = pos[g, 2 * pair]
            i1 = pos[g, 2 * pair + 1]
            if i0 < 0 and i1 < 0:
                continue
            a0 = amps[i0] if i0 >= 0 else 0.0j
            a1 = amps[i1] if i1 >= 0 else 0.0j
            plus = a0 + a1
            minus = a0 - a1
            ov_plus = (plus.real * plus.real + plus.imag * plus.imag) / (2.0 * p)
            ov_minus = (minus.real * minus.real + minus.imag * minus.imag) / (2.0 * p)
            overlap_sum += ov_plus**half_exponent + ov_minus**half_exponent
        total += p * overlap_sum
    return -total


@njit(cache=True)
def _dual_rail_kernel(amps, starts, order, pos, eligible, leak_tol):  # pragma: no cover
    total = 0.0
    for g in range(starts.shape[0] - 1):
        if not eligible[g]:
            continue
        p = 0.0
        for t in range(starts[g], starts[g + 1]):
            a = amps[order[t]]
            p += a.real * a.real + a.imag * a.imag
        if p < 1e-14:
            continue
        q = np.zeros(4, np.complex128)
        share = 0.0
        for c in range(4):
            if pos[g, c] >= 0:
                q[c] = amps[pos[g, c]]
                share += q[c].real * q[c].real + q[c].imag * q[c].imag
        # Event-ready gate: the pattern counts only when the post-measurement
        # state lies in the qubit subspace up to the leakage tolerance, i.e.
        # when it actually is a two-qubit dual-rail state.
        if p - share > leak_tol * p or share < 1e-14:
            continue
        det = q[0] * q[3] - q[1] * q[2]
        det2 = (det.real * det.real + det.imag * det.imag) / (share * share)
        disc = 1.0 - 4.0 * det2
        if disc < 0.0:
            disc = 0.0
        root = math.sqrt(disc)
        ent = 0.0
        for lam in ((1.0 + root) / 2.0, (1.0 - root) / 2.0):
            if lam > 1e-15:
                ent -= lam * math.log2(lam)
        # P(h) * subspace_weight * entropy == share * entropy
        total += share * ent
    return -total


def _check_dual_rail_partition(partition):
    if partition[0] != 2 or partition[1] != 2:
        raise DomainError("dual-rail objectives require M_A = M_B = 2")


def _bell_value(ws: _Workspace, matrix, exponent, targets) -> float:
    amps = ws.amplitudes(matrix)
    if targets is None:
        pos = ws.component_positions(_BELL_COMPONENTS)
        return float(_bell_kernel(amps, ws.starts, ws.order, pos, exponent / 2.0))
    # Generic path for user-supplied target states.
    total = 0.0
    for g, idx in enumerate(ws.group_idx):
        block = amps[idx]
        p = float(np.vdot(block, block).real)
        if p < ZERO_PROB:
            continue
        scale = 1.0 / math.sqrt(p)
        table = ws.group_tables[g]
        s = 0.0
        for target in targets:
            ov = 0.0j
            for key, coeff in target.items():
                i = table.get(key)
                if i is not None:
                    ov += np.conjugate(coeff) * amps[i] * scale
            s += abs(ov) ** exponent
        total += p * s
    return -total


def _neg_avg_value(ws: _Workspace, matrix) -> float:
    amps = ws.amplitudes(matrix)
    sector_idx = ws.sector_indices()
    terms = []
    for g, idx in enumerate(ws.group_idx):
        block = amps[idx]
        p = float(np.vdot(block, block).real)
        if p < ZERO_PROB:
            continue
        ent = 0.0
        for sector in sector_idx[g]:
            mat = amps[sector]
            if sector.shape[0] == 1 or sector.shape[1] == 1:
                weights = np.array([float(np.vdot(mat, mat).real)])
            else:
                weights = np.linalg.svd(mat, compute_uv=False) ** 2
            weights = weights[weights > 1e-15 * p] / p
            if weights.size:
                ent -= float((weights * np.log2(weights)).sum())
        terms.append(p * ent)
    return -math.fsum(terms)


def _dual_rail_value(ws: _Workspace, matrix) -> float:
    amps = ws.amplitudes(matrix)
    pos = ws.component_positions(_DUAL_RAIL_COMPONENTS)
    # Only patterns whose system photon count matches the qubit subspace
    # (one photon per rail pair) can contribute yield.
    eligible = (pos[:, 0] >= 0).astype(np.int8)
    return float(
        _dual_rail_kernel(amps, ws.starts, ws.order, pos, eligible, DUAL_RAIL_LEAK_TOL)
    )


def bell_cost(
    u: Interferometer,
    input_state,
    partition,
    exponent: int = 10,
    targets=None,
) -> float:
    """Bell-search cost: minus the detection-weighted sum over target Bell
    states of |overlap|^exponent; lies in [-1, 0]."""
    _check_dual_rail_partition(partition)
    ws = _workspace(input_state, partition)
    return _bell_value(ws, u.matrix, exponent, targets)


def neg_avg_entanglement(u: Interferometer, input_state, partition) -> float:
    """Minus the measurement-averaged mode entanglement (ebits)."""
    ws = _workspace(input_state, partition)
    return _neg_avg_value(ws, u.matrix)


def dual_rail_ent_yield(u: Interferometer, input_state, partition) -> float:
    """Minus the event-ready dual-rail entanglement yield.

    A detection pattern contributes P(h) * w(h) * E(h) -- in-subspace weight
    times the entropy of the projected qubit state -- but only when the
    post-measurement state lies entirely in the one-photon-per-rail qubit
    subspace (relative leakage at most DUAL_RAIL_LEAK_TOL).  States with
    larger leakage are not valid dual-rail outputs and yield nothing, no
    matter how entangled their projection looks.  For exact dual-rail
    outputs the value reduces to -sum_h P(h) * E(h).
    """
    _check_dual_rail_partition(partition)
    if partition[2] < 1:
        raise DomainError("dual_rail_ent_yield requires at least one heralded mode")
    ws = _workspace(input_state, partition)
    return _dual_rail_value(ws, u.matrix)


@dataclass(frozen=True)
class OptimizationProblem:
    objective: str
    input_state: tuple[int, ...]
    partition: tuple[int, int, int]
    restarts: int
    seed: int
    max_iterations: int = 250
    gradient_step: float = 1e-6
    convergence_tol: float = 1e-6
    bell_exponent: int = 10
    bell_targets: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "input_state", tuple(int(c) for c in self.input_state))
        object.__setattr__(self, "partition", tuple(int(p) for p in self.partition))
        if self.objective not in OBJECTIVES:
            raise DomainError(f"unknown objective {self.objective!r}")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.gradient_step <= 0 or self.convergence_tol <= 0:
            raise DomainError("gradient_step and convergence_tol must be positive")

    @property
    def mode_count(self) -> int:
        return len(self.input_state)


@dataclass(frozen=True)
class OptimizationResult:
    best_value: float
    best_params: UnitaryParams
    per_restart_values: tuple[float, ...]
    iterations_used: tuple[int, ...]


class _NonFiniteObjective(RuntimeError):
    pass


def _theta_objective(problem: OptimizationProblem):
    ws = _workspace(problem.input_state, problem.partition)
    dim = problem.mode_count
    obj = problem.objective

    def f(theta):
        matrix = exp_i_hermitian(generator_matrix(dim, theta))
        if obj == "bell_cost":
            value = _bell_value(ws, matrix, problem.bell_exponent, problem.bell_targets)
        elif obj == "neg_avg_entanglement":
            value = _neg_avg_value(ws, matrix)
        else:
            value = _dual_rail_value(ws, matrix)
        if not math.isfinite(value):
            raise _NonFiniteObjective(obj)
        return value

    return f


def _central_gradient(f, x, step):
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xp[i] += step
        fp = f(xp)
        xp[i] -= 2.0 * step
        fm = f(xp)
        g[i] = (fp - fm) / (2.0 * step)
    return g


def _bfgs(f, x0, *, gradient_step, tol, max_iterations):
    """BFGS with central-difference gradients and Armijo backtracking.

    Returns (value, x, accepted_iterations).
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    g = _central_gradient(f, x, gradient_step)
    n = x.size
    hinv = np.eye(n)
    iterations = 0
    while iterations < max_iterations:
        if np.max(np.abs(g)) < tol:
            break
        d = -(hinv @ g)
        gd = float(g @ d)
        if not np.isfinite(gd) or gd >= 0.0:
            hinv = np.eye(n)
            d = -g
            gd = -float(g @ g)
        step = 1.0
        fn = None
        while step > 1e-14:
            fc = f(x + step * d)
            if fc <= fx + ARMIJO_C * step * gd:
                fn = fc
                break
            step *= BACKTRACK
        if fn is None:
            break
        xn = x + step * d
        gn = _central_gradient(f, xn, gradient_step)
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * (np.linalg.norm(s) * np.linalg.norm(y) + 1e-300):
            if iterations == 0:
                hinv *= sy / float(y @ y)
            rho = 1.0 / sy
            hy = hinv @ y
            hinv -= rho * (np.outer(s, hy) + np.outer(hy, s))
            hinv += (rho * rho * float(y @ hy) + rho) * np.outer(s, s)
        x, fx, g = xn, fn, gn
        iterations += 1
    return fx, x, iterations


def restart_seed(master_seed: int, index: int) -> int:
    """Stable per-restart seed derived from (master seed, restart index)."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


def _run_restart(problem: OptimizationProblem, index: int):
    start = haar_sample(problem.mode_count, restart_seed(problem.seed, index))
    theta0 = np.asarray(params_from_unitary(start).theta)
    f = _theta_objective(problem)
    try:
        value, theta, iterations = _bfgs(
            f,
            theta0,
            gradient_step=problem.gradient_step,
            tol=problem.convergence_tol,
            max_iterations=problem.max_iterations,
        )
    except _NonFiniteObjective:
        return float("nan"), theta0, 0
    return float(value), theta, iterations


def _restart_task(args):
    problem, index = args
    return _run_restart(problem, index)


def minimize(problem: OptimizationProblem, workers: int = 1) -> OptimizationResult:
    """Multi-restart local search; deterministic for a fixed (problem, seed).

    Restarts are independent; the reducer takes the minimum value, ties
    broken by lowest restart index.  Failed (non-finite) restarts are
    recorded as NaN and excluded from the minimum.
    """
    tasks = [(problem, i) for i in range(problem.restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_restart_task, tasks, chunksize=1))
    else:
        rows = [_restart_task(t) for t in tasks]

    values = tuple(r[0] for r in rows)
    iterations = tuple(r[2] for r in rows)
    best_index = None
    for i, v in enumerate(values):
        if math.isfinite(v) and (best_index is None or v < values[best_index]):
            best_index = i
    if best_index is None:
        raise RuntimeError("every restart failed with a non-finite objective")
    dim = problem.mode_count
    best_params = UnitaryParams(dim=dim, theta=tuple(rows[best_index][1]))
    return OptimizationResult(
        best_value=values[best_index],
        best_params=best_params,
        per_restart_values=values,
        iterations_used=iterations,
    )
