"""Command-line driver: declarative experiment configs, seeded sweeps,
optimization searches, bound tables, and a self-check property suite.

Commands: haar-sweep, bell-search, nogo3, max-ent, bounds-table, verify.
Exit codes: 0 success, 1 property/verdict failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds, entangle, fock, optimize, simulate, unitary
from .errors import ConfigError, EntgenError

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Config handling


_REQUIRED = object()


def _partition_coerce(v):
    part = [int(x) for x in v]
    if len(part) != 3:
        raise ConfigError("partition must have exactly three entries")
    return tuple(part)


def _int_list(v):
    return tuple(int(x) for x in v)


_COMMON = {
    "schema_version": (int, 1),
    "seed": (int, 20260823),
    "workers": (int, 1),
}

_OPTIMIZER_FIELDS = {
    "max_iterations": (int, 250),
    "gradient_step": (float, 1e-6),
    "convergence_tol": (float, 1e-6),
}

SCHEMAS = {
    "haar-sweep": {
        **_COMMON,
        "M": (int, 8),
        "n": (int, 4),
        "partition": (_partition_coerce, (2, 2, 4)),
        "samples": (int, 1000),
        "out": (str, "haar_sweep.csv"),
    },
    "bell-search": {
        **_COMMON,
        **_OPTIMIZER_FIELDS,
        "M": (int, 8),
        "n": (int, 4),
        "restarts": (int, 500),
        "exponent": (int, 10),
        "out": (str, "bell_search.json"),
    },
    "nogo3": {
        **_COMMON,
        **_OPTIMIZER_FIELDS,
        "M": (int, 5),
        "n": (int, 3),
        "restarts": (int, 200),
        "out": (str, "nogo3.json"),
    },
    "max-ent": {
        **_COMMON,
        **_OPTIMIZER_FIELDS,
        "ma_values": (_int_list, (1, 2)),
        "n_values": (_int_list, (1, 2, 3, 4)),
        "restarts": (int, 40),
        "out": (str, "max_ent.csv"),
    },
    "bounds-table": {
        "schema_version": (int, 1),
        "ma_values": (_int_list, (1, 2, 3)),
        "n_values": (_int_list, (1, 2, 3, 4, 5, 6)),
        "out": (str, "bounds_table.csv"),
    },
    "verify": {"schema_version": (int, 1)},
}


def resolve_config(command: str, config_path=None, overrides=(), flag_values=None) -> dict:
    """Merge defaults, a JSON config file, --set overrides, and flag values;
    reject unknown fields and coercion failures."""
    schema = SCHEMAS[command]
    cfg = {name: default for name, (_, default) in schema.items()}

    def apply(source: dict, origin: str):
        for key, value in source.items():
            if key not in schema:
                raise ConfigError(f"unknown config field {key!r} ({origin})")
            cfg[key] = value

    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        apply(loaded, str(config_path))

    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        apply({key: value}, "--set")

    if flag_values:
        apply({k: v for k, v in flag_values.items() if v is not None}, "command line")

    out = {}
    for name, (coerce, _) in schema.items():
        try:
            out[name] = coerce(cfg[name])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {name!r}: {cfg[name]!r}") from exc
    if out["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {out['schema_version']}")
    return out


def config_digest(cfg: dict) -> str:
    """Digest of the scientific parameters only: the output path and worker
    count do not affect results, so they are excluded to keep reruns replayable."""
    relevant = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    canonical = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _atomic_write_text(path, text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise ConfigError(f"output directory {path.parent} does not exist")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    _atomic_write_text(path, buf.getvalue())


def _write_json(path, obj):
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _histogram_rows(values, n_bins=100, lo=None):
    values = [v for v in values if math.isfinite(v)]
    if not values:
        return []
    low = min(values) if lo is None else lo
    high = max(values)
    if high == low:
        high = low + 1e-12
    counts, edges = np.histogram(values, bins=n_bins, range=(low, high))
    return [(float(edges[i]), int(counts[i])) for i in range(n_bins)]


def _unbunched_input(m: int, n: int) -> tuple[int, ...]:
    if n > m:
        raise ConfigError(f"unbunched input needs n <= M, got n={n}, M={m}")
    return (1,) * n + (0,) * (m - n)


# ---------------------------------------------------------------------------
# Commands


def _sweep_trial(args):
    m, n, partition, seed, trial = args
    u = unitary.haar_sample(m, optimize.restart_seed(seed, trial))
    setup = simulate.ExperimentSetup(
        unitary=u, input_state=_unbunched_input(m, n), partition=partition
    )
    return entangle.average_entanglement(setup)


def cmd_haar_sweep(cfg: dict) -> int:
    m, n, partition = cfg["M"], cfg["n"], cfg["partition"]
    if sum(partition) != m or partition[0] < 1 or min(partition) < 0:
        raise ConfigError(f"partition {partition} is invalid for M={m}")
    if cfg["samples"] < 1:
        raise ConfigError("samples must be >= 1")
    _unbunched_input(m, n)

    started = time.perf_counter()
    tasks = [(m, n, partition, cfg["seed"], t) for t in range(cfg["samples"])]
    if cfg["workers"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            values = list(pool.map(_sweep_trial, tasks, chunksize=8))
    else:
        values = [_sweep_trial(t) for t in tasks]
    runtime_ms = (time.perf_counter() - started) * 1e3

    digest = config_digest(cfg)
    header = ["seed", "trial", "M", "n", "M_A", "M_B", "M_H", "value"]
    rows = [
        (cfg["seed"], t, m, n, partition[0], partition[1], partition[2], v)
        for t, v in enumerate(values)
    ]
    _write_csv(cfg["out"], header, rows)
    _write_csv(f"{cfg['out']}.hist.csv", ["value", "count"], _histogram_rows(values, lo=0.0))
    _write_json(
        f"{cfg['out']}.summary.json",
        {
            "config_digest": digest,
            "samples": len(values),
            "mean": float(np.mean(values)),
            "stddev": float(np.std(values)),
            "min": float(np.min(values)),
            "max": float(np.max(values)),
            "runtime_ms": runtime_ms,
        },
    )
    print(
        f"haar-sweep: {len(values)} samples, mean={np.mean(values):.6f} ebits, "
        f"runtime={runtime_ms:.0f} ms -> {cfg['out']}"
    )
    return 0


def _run_search(cfg: dict, objective: str, partition) -> optimize.OptimizationResult:
    problem = optimize.OptimizationProblem(
        objective=objective,
        input_state=_unbunched_input(cfg["M"], cfg["n"]),
        partition=partition,
        restarts=cfg["restarts"],
        seed=cfg["seed"],
        max_iterations=cfg["max_iterations"],
        gradient_step=cfg["gradient_step"],
        convergence_tol=cfg["convergence_tol"],
        bell_exponent=cfg.get("exponent", 10),
    )
    return optimize.minimize(problem, workers=cfg["workers"])


def _search_json(cfg: dict, result: optimize.OptimizationResult) -> dict:
    return {
        "config_digest": config_digest(cfg),
        "seed": cfg["seed"],
        "best_value": result.best_value,
        "per_restart_values": list(result.per_restart_values),
        "iterations_used": list(result.iterations_used),
        "params": {"dim": result.best_params.dim, "theta": list(result.best_params.theta)},
    }


def cmd_bell_search(cfg: dict) -> int:
    m = cfg["M"]
    if m < 5:
        raise ConfigError("bell-search needs M >= 5 (two dual-rail qubits + heralding)")
    if cfg["restarts"] < 1:
        raise ConfigError("restarts must be >= 1")
    partition = (2, 2, m - 4)
    started = time.perf_counter()
    result = _run_search(cfg, "bell_cost", partition)
    runtime_ms = (time.perf_counter() - started) * 1e3
    _write_json(cfg["out"], _search_json(cfg, result))
    _write_csv(
        f"{cfg['out']}.hist.csv",
        ["value", "count"],
        _histogram_rows(result.per_restart_values),
    )
    print(
        f"bell-search: best={result.best_value:.6f} over {cfg['restarts']} restarts, "
        f"runtime={runtime_ms:.0f} ms -> {cfg['out']}"
    )
    return 0


NOGO_TOL = 1e-4


def cmd_nogo3(cfg: dict) -> int:
    m, n = cfg["M"], cfg["n"]
    if not 5 <= m <= 8:
        raise ConfigError("nogo3 needs 5 <= M <= 8")
    if n not in (3, 4):
        raise ConfigError("nogo3 supports n = 3 (the no-go) or n = 4 (the counterpoint)")
    if cfg["restarts"] < 1:
        raise ConfigError("restarts must be >= 1")
    partition = (2, 2, m - 4)
    started = time.perf_counter()
    result = _run_search(cfg, "dual_rail_ent_yield", partition)
    runtime_ms = (time.perf_counter() - started) * 1e3
    verdict = (
        "consistent with no-go"
        if result.best_value >= -NOGO_TOL
        else "entanglement achievable"
    )
    payload = _search_json(cfg, result)
    payload["verdict"] = verdict
    _write_json(cfg["out"], payload)
    print(
        f"nogo3: best={result.best_value:.8f}, verdict: {verdict}, "
        f"runtime={runtime_ms:.0f} ms -> {cfg['out']}"
    )
    return 0


def cmd_max_ent(cfg: dict) -> int:
    if cfg["restarts"] < 1:
        raise ConfigError("restarts must be >= 1")
    rows = []
    for m_a, n in itertools.product(cfg["ma_values"], cfg["n_values"]):
        if m_a < 1 or n < 1:
            raise ConfigError("ma_values and n_values must be positive")
        m_h = max(0, n - 2 * m_a)
        m = 2 * m_a + m_h
        local = dict(cfg, M=m, n=n)
        result = _run_search(local, "neg_avg_entanglement", (m_a, m_a, m_h))
        _, dim_ebits = bounds.dimensionality_bound(m_a, n)
        rows.append(
            (
                cfg["seed"],
                m_a,
                n,
                m,
                m_h,
                -result.best_value,
                dim_ebits,
                bounds.linearity_bound(n),
            )
        )
    _write_csv(
        cfg["out"],
        ["seed", "M_A", "n", "M", "M_H", "best_ebits", "dimensionality_bound", "linearity_bound"],
        rows,
    )
    print(f"max-ent: {len(rows)} grid points -> {cfg['out']}")
    return 0


def cmd_bounds_table(cfg: dict) -> int:
    rows = []
    for m_a, n in itertools.product(cfg["ma_values"], cfg["n_values"]):
        _, dim_ebits = bounds.dimensionality_bound(m_a, n)
        rows.append(("bunched_log", m_a, n, bounds.bunched_entropy(n, 0.5)))
        rows.append(("unbunched_2ebit", m_a, n, 2.0))
        rows.append(("log3_measured", m_a, n, math.log2(3.0)))
        rows.append(("dimensionality", m_a, n, dim_ebits))
        rows.append(("linearity", m_a, n, bounds.linearity_bound(n)))
        rows.append(("mean_photon", m_a, n, bounds.mean_constrained_entropy_bound(1.0)))
    _write_csv(cfg["out"], ["bound_name", "M_A", "n", "bound_ebits"], rows)
    print(f"bounds-table: {len(rows)} rows -> {cfg['out']}")
    return 0


# ---------------------------------------------------------------------------
# verify: fast property suite


def _naive_permanent(a: np.ndarray) -> complex:
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0j
    rows = range(n)
    for perm in itertools.permutations(range(n)):
        term = 1.0 + 0.0j
        for i in rows:
            term *= a[i, perm[i]]
        total += term
    return total


def _check_fock_dimensions():
    for m in range(1, 7):
        for n in range(0, 7):
            assert len(fock.enumerate_basis(m, n)) == fock.dimension(m, n)


def _check_sector_decomposition():
    for m_a in range(1, 5):
        for m_b in range(1, 5):
            for n_s in range(0, 7):
                total = sum(
                    fock.dimension(m_a, n_a) * fock.dimension(m_b, n_s - n_a)
                    for n_a in range(n_s + 1)
                )
                assert total == fock.dimension(m_a + m_b, n_s)


def _check_index_roundtrip():
    basis = fock.enumerate_basis(4, 3)
    for i, state in enumerate(basis.states):
        assert basis.index[state] == i


def _check_permanent_oracle():
    from .permanent import permanent

    rng = np.random.default_rng(7)
    for _ in range(40):
        k = int(rng.integers(0, 6))
        a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        ref = _naive_permanent(a)
        got = permanent(a)
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def _check_permanent_symmetries():
    from .permanent import permanent

    rng = np.random.default_rng(8)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    base = permanent(a)
    scaled = a.copy()
    scaled[2] *= 2.5 - 0.5j
    assert abs(permanent(scaled) - (2.5 - 0.5j) * base) <= 1e-12 * abs(base)
    p = rng.permutation(5)
    assert abs(permanent(a[p]) - base) <= 1e-12 * abs(base)


def _check_haar():
    u1 = unitary.haar_sample(4, 99)
    u2 = unitary.haar_sample(4, 99)
    assert np.array_equal(u1.matrix, u2.matrix)
    dev = np.max(np.abs(u1.matrix.conj().T @ u1.matrix - np.eye(4)))
    assert dev <= 1e-12


def _check_realize():
    rng = np.random.default_rng(11)
    theta = rng.standard_normal(16)
    p = unitary.UnitaryParams(dim=4, theta=tuple(theta))
    u = unitary.realize(p)
    delta = rng.standard_normal(16) * 1e-5
    v = unitary.realize(unitary.UnitaryParams(dim=4, theta=tuple(theta + delta)))
    assert np.max(np.abs(v.matrix - u.matrix)) <= 10.0 * np.linalg.norm(delta)


def _check_fixtures():
    for name in ("BS1", "BS2", "BS2xBS2_4mode", "BS2xBS1_4mode", "UBell_8mode"):
        u = unitary.fixture(name)
        dev = np.max(np.abs(u.matrix.conj().T @ u.matrix - np.eye(u.dim)))
        assert dev <= 1e-14
    bs2 = unitary.fixture("BS2")
    assert abs(np.cos(2 * unitary.BS2_THETA) - 1 / math.sqrt(3)) <= 1e-12
    assert abs(bs2.matrix[0, 0] - math.cos(unitary.BS2_THETA)) <= 1e-15


def _check_output_normalization():
    rng = np.random.default_rng(13)
    for m, n in ((3, 2), (4, 3), (5, 3)):
        u = unitary.haar_sample(m, int(rng.integers(1 << 30)))
        inp = tuple(_unbunched_input(m, n))
        setup = simulate.ExperimentSetup(unitary=u, input_state=inp, partition=(1, m - 1, 0))
        total = sum(abs(c) ** 2 for c in simulate.full_output(setup).values())
        assert abs(total - 1.0) <= 1e-10


def _check_herald_completeness():
    u = unitary.haar_sample(5, 12345)
    setup = simulate.ExperimentSetup(
        unitary=u, input_state=(1, 1, 1, 0, 0), partition=(2, 2, 1)
    )
    total = sum(hs.probability for hs in simulate.herald_all(setup))
    assert abs(total - 1.0) <= 1e-9


def _check_mean_photon():
    rng = np.random.default_rng(17)
    for _ in range(20):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(1, 5))
        if m + n > 10:
            continue
        counts = [0] * m
        for _ in range(n):
            counts[int(rng.integers(m))] += 1
        u = unitary.haar_sample(m, int(rng.integers(1 << 30)))
        setup = simulate.ExperimentSetup(
            unitary=u, input_state=tuple(counts), partition=(1, m - 1, 0)
        )
        out = simulate.full_output(setup)
        for j in range(m):
            mean = sum(abs(c) ** 2 * v[j] for v, c in out.items())
            expected = sum(abs(u.matrix[j, k]) ** 2 * counts[k] for k in range(m))
            assert abs(mean - expected) <= 1e-10


def _check_entropy_symmetry():
    u = unitary.haar_sample(4, 4242)
    setup = simulate.ExperimentSetup(
        unitary=u, input_state=(1, 1, 1, 0), partition=(2, 2, 0)
    )
    (hs,) = simulate.herald_all(setup)
    s_alice = entangle.entropy(entangle.schmidt_spectrum(hs))
    swapped = simulate.HeraldedState(
        pattern=hs.pattern,
        probability=hs.probability,
        coefficients={(b, a): c for (a, b), c in hs.coefficients.items()},
        system_modes=(hs.system_modes[1], hs.system_modes[0]),
        system_photons=hs.system_photons,
        possible=hs.possible,
    )
    s_bob = entangle.entropy(entangle.schmidt_spectrum(swapped))
    assert abs(s_alice - s_bob) <= 1e-9


def _check_bs2_log3():
    setup = simulate.ExperimentSetup(
        unitary=unitary.fixture("BS2"), input_state=(1, 1), partition=(1, 1, 0)
    )
    assert abs(entangle.average_entanglement(setup) - math.log2(3.0)) <= 1e-9


def _check_dimensionality_formula():
    for m_a in range(1, 6):
        for n_s in range(0, 9):
            oracle = sum(
                min(fock.dimension(m_a, n_a), fock.dimension(m_a, n_s - n_a))
                for n_a in range(n_s + 1)
            )
            omega, _ = bounds.dimensionality_bound(m_a, n_s)
            assert omega == oracle


def _check_bell_fast_path():
    u = unitary.haar_sample(6, 777)
    inp = (1, 1, 1, 1, 0, 0)
    part = (2, 2, 2)
    fast = optimize.bell_cost(u, inp, part)
    generic = optimize.bell_cost(u, inp, part, targets=optimize.default_bell_targets())
    assert abs(fast - generic) <= 1e-12


def _check_minimize_determinism():
    problem = optimize.OptimizationProblem(
        objective="neg_avg_entanglement",
        input_state=(1, 1),
        partition=(1, 1, 0),
        restarts=3,
        seed=2024,
        max_iterations=40,
    )
    r1 = optimize.minimize(problem)
    r2 = optimize.minimize(problem)
    assert r1.per_restart_values == r2.per_restart_values
    assert r1.best_params.theta == r2.best_params.theta


VERIFY_CHECKS = (
    ("fock dimension vs enumeration", _check_fock_dimensions),
    ("fock sector decomposition", _check_sector_decomposition),
    ("fock index roundtrip", _check_index_roundtrip),
    ("permanent vs naive expansion", _check_permanent_oracle),
    ("permanent symmetries", _check_permanent_symmetries),
    ("haar determinism + unitarity", _check_haar),
    ("realize continuity", _check_realize),
    ("fixture matrices", _check_fixtures),
    ("output normalization", _check_output_normalization),
    ("herald completeness", _check_herald_completeness),
    ("mean photon lemma", _check_mean_photon),
    ("entropy Alice/Bob symmetry", _check_entropy_symmetry),
    ("BS2 gives log2(3) ebits", _check_bs2_log3),
    ("dimensionality formula vs min-sum", _check_dimensionality_formula),
    ("bell cost fast path vs generic", _check_bell_fast_path),
    ("minimize determinism", _check_minimize_determinism),
)


def cmd_verify(cfg: dict) -> int:
    failures = 0
    for name, check in VERIFY_CHECKS:
        try:
            check()
        except Exception as exc:  # report every failure, keep going
            failures += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"ok    {name}")
    if failures:
        print(f"verify: {failures} of {len(VERIFY_CHECKS)} checks failed")
        return 1
    print(f"verify: all {len(VERIFY_CHECKS)} checks passed")
    return 0


# ---------------------------------------------------------------------------
# Entry point


HANDLERS = {
    "haar-sweep": cmd_haar_sweep,
    "bell-search": cmd_bell_search,
    "nogo3": cmd_nogo3,
    "max-ent": cmd_max_ent,
    "bounds-table": cmd_bounds_table,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entgen",
        description="Exact simulation and optimization of linear-optical entanglement generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in HANDLERS:
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        if "seed" in SCHEMAS[command]:
            p.add_argument("--seed", type=int, default=None)
        if "workers" in SCHEMAS[command]:
            p.add_argument("--workers", type=int, default=None)
        if "out" in SCHEMAS[command]:
            p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flag_values = {
        key: getattr(args, key, None) for key in ("seed", "workers", "out")
    }
    try:
        cfg = resolve_config(args.command, args.config, args.set, flag_values)
        return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EntgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
