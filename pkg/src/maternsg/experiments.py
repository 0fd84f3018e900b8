"""Convergence-study harness: random kernel-combination targets, Monte Carlo
relative L2 errors, and level sweeps with the standard stopping rules.

Target functions are random linear combinations of separable Matern kernel
translates; their coefficients are drawn from a centred normal with variance
``coeff_variance`` (default 5, i.e. standard deviation sqrt(5)) and their
centres uniformly from the domain.  All randomness flows through the
counter-based Philox generator keyed by (seed, stream, index), so any
realisation is reproducible independently of execution order or thread
count.

A sweep builds interpolants for increasing levels until the node count
exceeds ``max_nodes`` or a Gram matrix stops being positive definite in
double precision; levels whose node count did not change are skipped.  The
termination reason is recorded on the last successful record: a sweep file's
final data point with status PD_FAILURE means the *next* interpolant's Gram
matrix failed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Sequence

import numpy as np

from .grids import GridSpec, count_nodes, make_spec
from .kernels import SeparableKernel, cross_matrix
from .solver import FactorCache, PDFailure, SparseInterpolant, assemble, evaluate_many

__all__ = [
    "COMPLETED",
    "MAX_N",
    "PD_FAILURE",
    "TestFunction",
    "ExperimentRecord",
    "make_test_function",
    "relative_l2_error",
    "interpolant_spec",
    "level_sweep",
    "write_records",
    "read_records",
]

COMPLETED = "COMPLETED"
MAX_N = "MAX_N"
PD_FAILURE = "PD_FAILURE"

# Stream tags for deriving independent Philox keys from one base seed.
_STREAM_TARGET = 0
_STREAM_MC = 1


def _rng(*entropy) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(entropy)))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Random linear combination of separable-kernel translates."""

    __test__ = False  # not a pytest case despite the name

    kernel: SeparableKernel
    centers: np.ndarray
    coeffs: np.ndarray
    seed: object

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return cross_matrix(self.kernel, X, self.centers) @ self.coeffs

    @property
    def d(self) -> int:
        return self.kernel.d


def make_test_function(
    d: int,
    nu,
    lengthscale_exp=0,
    n_terms: int = 20,
    seed=0,
    coeff_variance: float = 5.0,
) -> TestFunction:
    """Draw a random target with lengthscales ``2**lengthscale_exp`` per dim.

    The same seed always yields the same coefficients and centres.
    ``lengthscale_exp`` describes the target's own anisotropy and may differ
    from the lengthscale exponents of the interpolant approximating it.
    """
    if isinstance(nu, (int, float)):
        nu = (float(nu),) * d
    if isinstance(lengthscale_exp, int):
        lengthscale_exp = (lengthscale_exp,) * d
    kernel = SeparableKernel.from_params(
        tuple(nu), [float(2**p) for p in lengthscale_exp]
    )
    if kernel.d != d:
        raise ValueError("per-dimension parameters must match d")
    rng = _rng(seed) if isinstance(seed, int) else np.random.Generator(
        np.random.Philox(seed=seed)
    )
    coeffs = rng.normal(0.0, math.sqrt(coeff_variance), n_terms)
    centers = rng.uniform(-0.5, 0.5, (n_terms, d))
    return TestFunction(kernel=kernel, centers=centers, coeffs=coeffs, seed=seed)


def relative_l2_error(
    target,
    interp: SparseInterpolant,
    n_samples: int = 100,
    seed=0,
    samples: np.ndarray | None = None,
) -> float:
    """Monte Carlo estimate of ||target - interp|| / ||target|| over the cube.

    Pass ``samples`` to reuse one fixed sample set across the levels of a
    sweep, keeping the error curve consistent in its Monte Carlo noise.
    """
    if samples is None:
        samples = _rng(seed, _STREAM_MC).uniform(
            -0.5, 0.5, (n_samples, interp.spec.d)
        )
    fx = np.asarray(target(samples), dtype=float)
    sx = evaluate_many(interp, samples)
    denom = math.sqrt(float(np.sum(fx * fx)))
    if denom == 0.0:
        raise ValueError("target vanishes on every sample; relative error undefined")
    return math.sqrt(float(np.sum((fx - sx) ** 2))) / denom


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep row: level, node count, mean relative L2 error, status."""

    level: int
    n_nodes: int
    error: float
    status: str = COMPLETED
    note: str = ""


def interpolant_spec(
    family: str,
    d: int,
    level: int,
    nu,
    penalty=0,
    omega=None,
    tuning=0,
    kernel_p=None,
) -> GridSpec:
    """Spec of the interpolant a sweep builds at ``level``.

    Lengthscale-informed families (LISG, DASG) adopt the target's
    lengthscale exponents ``penalty`` as their kernel exponents; ISG and ASG
    default to unit lengthscales.  ``kernel_p`` overrides that default.
    """
    family = family.upper()
    if kernel_p is None:
        kernel_p = penalty if family in ("LISG", "DASG") else 0
    return make_spec(
        family, d, level, nu, kernel_p=kernel_p, omega=omega, tuning=tuning
    )


def level_sweep(
    family: str,
    d: int,
    nu,
    penalty=0,
    omega=None,
    tuning=0,
    *,
    realisations: int = 10,
    n_samples: int = 100,
    max_nodes: int = 100_000,
    max_level: int = 60,
    seed: int = 0,
    coeff_variance: float = 5.0,
    kernel_p=None,
    threads: int = 1,
) -> list[ExperimentRecord]:
    """Run one family's convergence sweep over increasing levels.

    For each level, ``realisations`` independently seeded targets are
    interpolated and their relative L2 errors (one shared Monte Carlo sample
    set per sweep) averaged arithmetically.  Levels with an unchanged node
    count are skipped.  The sweep stops when the node count would exceed
    ``max_nodes`` (status MAX_N), when a Gram factorisation fails (status
    PD_FAILURE, with the offending dimension/level in ``note``), or when
    ``max_level`` is exhausted (status COMPLETED); the status is recorded on
    the last successful record.

    Realisations within a level may run on ``threads`` workers; results are
    identical to the serial order either way.
    """
    if realisations < 1:
        raise ValueError("need at least one realisation")
    targets = [
        make_test_function(
            d,
            nu,
            penalty,
            seed=np.random.SeedSequence([seed, _STREAM_TARGET, r]),
            coeff_variance=coeff_variance,
        )
        for r in range(realisations)
    ]
    mc_samples = _rng(seed, _STREAM_MC).uniform(-0.5, 0.5, (n_samples, d))

    factors: FactorCache | None = None
    sample_caches = [dict() for _ in range(realisations)]
    records: list[ExperimentRecord] = []
    status = COMPLETED
    note = ""
    prev_n = None

    def one_error(spec, r):
        interp = assemble(
            spec, targets[r], factors=factors, sample_cache=sample_caches[r]
        )
        return relative_l2_error(targets[r], interp, samples=mc_samples)

    for level in range(max_level + 1):
        spec = interpolant_spec(
            family, d, level, nu, penalty, omega, tuning, kernel_p
        )
        if factors is None:
            factors = FactorCache(spec)
        n = count_nodes(spec)
        if prev_n is not None and n == prev_n:
            continue
        if n > max_nodes:
            status = MAX_N
            note = f"level {level} would use {n} nodes"
            break
        try:
            if threads > 1 and realisations > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    errors = list(
                        pool.map(lambda r: one_error(spec, r), range(realisations))
                    )
            else:
                errors = [one_error(spec, r) for r in range(realisations)]
        except PDFailure as exc:
            status = PD_FAILURE
            note = str(exc)
            break
        records.append(
            ExperimentRecord(level=level, n_nodes=n, error=float(np.mean(errors)))
        )
        prev_n = n

    if records:
        records[-1] = replace(records[-1], status=status, note=note)
    return records


def write_records(fh: IO[str], records: Sequence[ExperimentRecord], header: dict):
    """Write sweep records as ``error N`` rows under a ``#``-prefixed echo.

    Floats are written in shortest round-trip precision.  The header echoes
    the full run configuration plus the termination status, one ``# key=value``
    line each, re-parseable by :func:`read_records`.
    """
    termination = records[-1].status if records else "NONE"
    for key, value in header.items():
        fh.write(f"# {key}={value}\n")
    fh.write(f"# termination={termination}\n")
    for rec in records:
        fh.write(f"{float(rec.error)!r} {rec.n_nodes}\n")


def read_records(fh: IO[str]) -> tuple[dict, list[tuple[float, int]]]:
    """Parse a sweep data file back into its header echo and (error, N) rows."""
    header: dict = {}
    rows: list[tuple[float, int]] = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        err, n = line.split()
        rows.append((float(err), int(n)))
    return header, rows
