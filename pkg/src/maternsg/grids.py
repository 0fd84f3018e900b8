"""Dyadic point sets, multi-index sets and combination-technique coefficients.

All interpolation nodes are dyadic rationals n / 2^k held in exact integer
form, so set unions, node deduplication and nestedness checks never touch
floating point.  Multi-indices are plain tuples of non-negative ints.

The four grid families share one parameter record, :class:`GridSpec`:

    ISG   isotropic level sets, no point-growth delay, unit weights
    ASG   weighted level sets, no point-growth delay
    LISG  isotropic level sets, per-dimension growth delay ``grid_p``
    DASG  weighted level sets combined with growth delay

``kernel_p`` fixes the kernel lengthscales through ``lengthscale = 2**kernel_p``
while ``grid_p`` is the point-set growth delay actually used by the design;
for LISG/DASG those start equal and an optional per-dimension tuning vector
``r`` lowers ``grid_p`` to ``max(kernel_p - r, 0)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterator, Sequence

from .kernels import SeparableKernel

__all__ = [
    "DyadicPoint",
    "GridNode",
    "MultiIndex",
    "GridSpec",
    "FAMILIES",
    "make_spec",
    "kernel_for",
    "point_set_1d",
    "new_points_1d",
    "weighted_simplex",
    "index_set",
    "active_set",
    "combination_coefficient",
    "sparse_grid_nodes",
    "count_nodes",
]

FAMILIES = ("ISG", "ASG", "LISG", "DASG")

# 2^d subset enumerations stay exact and cheap only for moderate dimension.
MAX_SUBSET_DIM = 20

MultiIndex = tuple  # d-tuple of non-negative ints


@total_ordering
@dataclass(frozen=True)
class DyadicPoint:
    """Exact dyadic rational ``numerator / 2**level_log2`` in (-1/2, 1/2).

    Canonical form: ``numerator`` is odd, or the point is zero stored as
    ``(0, 0)``.  Equality of canonical forms is equality of values, which
    makes instances safe dictionary keys for node deduplication.
    """

    numerator: int
    level_log2: int

    def __post_init__(self):
        if self.level_log2 < 0:
            raise ValueError("denominator exponent must be non-negative")
        if self.numerator == 0:
            if self.level_log2 != 0:
                raise ValueError("zero must be stored as (0, 0)")
        elif self.numerator % 2 == 0:
            raise ValueError(f"non-canonical numerator {self.numerator}")
        if abs(self.numerator) * 2 >= (1 << self.level_log2):
            raise ValueError(
                f"{self.numerator}/2^{self.level_log2} lies outside (-1/2, 1/2)"
            )

    @staticmethod
    def of(numerator: int, level_log2: int) -> "DyadicPoint":
        """Canonicalise an arbitrary (numerator, exponent) pair."""
        if level_log2 < 0:
            raise ValueError("denominator exponent must be non-negative")
        if numerator == 0:
            return DyadicPoint(0, 0)
        while numerator % 2 == 0 and level_log2 > 0:
            numerator //= 2
            level_log2 -= 1
        return DyadicPoint(numerator, level_log2)

    @staticmethod
    def from_float(x: float) -> "DyadicPoint":
        """Exact conversion of a dyadic float; every IEEE double qualifies."""
        n, den = float(x).as_integer_ratio()
        return DyadicPoint.of(n, den.bit_length() - 1)

    @staticmethod
    def parse(text: str) -> "DyadicPoint":
        """Parse the ``n/2^k`` serialisation."""
        num, _, rest = text.partition("/2^")
        if not rest:
            raise ValueError(f"malformed dyadic point {text!r}")
        return DyadicPoint.of(int(num), int(rest))

    @property
    def value(self) -> float:
        # Exact: |numerator| < 2^53 and the denominator is a power of two.
        return self.numerator * 2.0 ** (-self.level_log2)

    def __lt__(self, other: "DyadicPoint") -> bool:
        return (self.numerator << other.level_log2) < (
            other.numerator << self.level_log2
        )

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.level_log2}"


GridNode = tuple  # d-tuple of DyadicPoint


def point_set_1d(level: int, penalty: int = 0) -> list[DyadicPoint]:
    """Uniform dyadic point set at ``level`` with growth delayed by ``penalty``.

    Empty for negative levels, the single point {0} while ``level <= penalty``,
    and afterwards the ``2**(m+1) - 1`` points ``n / 2**(m+1)`` with
    ``m = level - penalty``.  Sorted ascending; nested in ``level``.
    """
    if penalty < 0:
        raise ValueError("penalty must be non-negative")
    if level < 0:
        return []
    if level <= penalty:
        return [DyadicPoint(0, 0)]
    m = level - penalty
    return [DyadicPoint.of(n, m + 1) for n in range(-(1 << m) + 1, 1 << m)]


def new_points_1d(level: int, penalty: int = 0) -> list[DyadicPoint]:
    """Points of ``point_set_1d(level)`` absent from ``point_set_1d(level - 1)``."""
    if penalty < 0:
        raise ValueError("penalty must be non-negative")
    if level < 0:
        return []
    if level == 0:
        return [DyadicPoint(0, 0)]
    if level <= penalty:
        return []
    m = level - penalty
    return [DyadicPoint(n, m + 1) for n in range(-(1 << m) + 1, 1 << m, 2)]


@dataclass(frozen=True)
class GridSpec:
    """Complete configuration of one sparse-grid interpolant design."""

    d: int
    nu: tuple
    sigma: tuple
    kernel_p: tuple
    grid_p: tuple
    omega: tuple
    level: int
    family: str

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if self.level < 0:
            raise ValueError("level must be non-negative")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected {FAMILIES}")
        for name in ("nu", "sigma", "kernel_p", "grid_p", "omega"):
            if len(getattr(self, name)) != self.d:
                raise ValueError(f"{name} must have length d={self.d}")
        if not all(n > 0 for n in self.nu):
            raise ValueError("all regularities must be positive")
        if not all(s > 0 for s in self.sigma):
            raise ValueError("all scales must be positive")
        if not all(isinstance(p, int) and p >= 0 for p in self.kernel_p):
            raise ValueError("kernel_p entries must be non-negative integers")
        if not all(isinstance(p, int) and p >= 0 for p in self.grid_p):
            raise ValueError("grid_p entries must be non-negative integers")
        if not all(w > 0 for w in self.omega):
            raise ValueError("all weights must be positive")
        if self.family in ("ISG", "ASG") and any(p != 0 for p in self.grid_p):
            raise ValueError(f"{self.family} requires grid_p = 0")
        if self.family in ("ISG", "LISG") and any(w != 1 for w in self.omega):
            raise ValueError(f"{self.family} requires unit weights")


def _broadcast(value, d: int, name: str, cast) -> tuple:
    if isinstance(value, (int, float)):
        return (cast(value),) * d
    out = tuple(cast(v) for v in value)
    if len(out) != d:
        raise ValueError(f"{name} must be a scalar or have length d={d}")
    return out


def make_spec(
    family: str,
    d: int,
    level: int,
    nu,
    kernel_p=0,
    omega=None,
    tuning=0,
    sigma=1.0,
) -> GridSpec:
    """Build a validated :class:`GridSpec`, broadcasting scalar parameters.

    ``kernel_p`` sets the per-dimension lengthscale exponents; ``tuning``
    lowers the point-growth delay of LISG/DASG designs to
    ``max(kernel_p - tuning, 0)``.  ISG and ASG designs always use undelayed
    point sets, and ISG/LISG always use unit weights.
    """
    family = family.upper()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected {FAMILIES}")
    nu = _broadcast(nu, d, "nu", float)
    sigma = _broadcast(sigma, d, "sigma", float)
    kernel_p = _broadcast(kernel_p, d, "kernel_p", int)
    tuning = _broadcast(tuning, d, "tuning", int)
    if any(t < 0 for t in tuning):
        raise ValueError("tuning entries must be non-negative")
    if omega is None:
        omega = 1.0
    omega = _broadcast(omega, d, "omega", float)
    if family in ("ISG", "ASG"):
        grid_p = (0,) * d
    else:
        grid_p = tuple(max(p - t, 0) for p, t in zip(kernel_p, tuning))
    return GridSpec(
        d=d,
        nu=nu,
        sigma=sigma,
        kernel_p=kernel_p,
        grid_p=grid_p,
        omega=omega,
        level=int(level),
        family=family,
    )


def kernel_for(spec: GridSpec) -> SeparableKernel:
    """Separable kernel of a spec: lengthscales are ``2**kernel_p``."""
    return SeparableKernel.from_params(
        spec.nu, [float(1 << p) for p in spec.kernel_p], spec.sigma
    )


def weighted_simplex(omega: Sequence[float], level: float) -> Iterator[MultiIndex]:
    """All multi-indices with ``sum(l_j * omega_j) <= level``, lexicographic.

    Weights must be positive; non-integer weights are fine.  The running
    weighted sum is accumulated left to right so that membership decisions
    are bit-reproducible.
    """
    d = len(omega)

    def rec(j, prefix, acc):
        if j == d:
            yield tuple(prefix)
            return
        w = omega[j]
        m = 0
        while acc + m * w <= level:
            prefix.append(m)
            yield from rec(j + 1, prefix, acc + m * w)
            prefix.pop()
            m += 1

    if level < 0:
        return
    yield from rec(0, [], 0.0)


def _wdot(ell: MultiIndex, omega) -> float:
    acc = 0.0
    for l, w in zip(ell, omega):
        acc += l * w
    return acc


def index_set(spec: GridSpec) -> list[MultiIndex]:
    """The downward-closed multi-index set of the design, sorted."""
    return list(weighted_simplex(spec.omega, spec.level))


def active_set(spec: GridSpec) -> list[MultiIndex]:
    """Multi-indices whose tensor blocks survive point-set collapse.

    Each coordinate is either 0 or exceeds the growth delay of its
    dimension; indices with a coordinate in ``1..grid_p`` repeat the previous
    point set and contribute a zero difference.
    """
    d = spec.d

    def rec(j, prefix, acc):
        if j == d:
            yield tuple(prefix)
            return
        w = spec.omega[j]
        p = spec.grid_p[j]
        if acc <= spec.level:
            prefix.append(0)
            yield from rec(j + 1, prefix, acc)
            prefix.pop()
        m = p + 1
        while acc + m * w <= spec.level:
            prefix.append(m)
            yield from rec(j + 1, prefix, acc + m * w)
            prefix.pop()
            m += 1

    return list(rec(0, [], 0.0))


def combination_coefficient(spec: GridSpec, ell: MultiIndex) -> int:
    """Signed integer multiplicity of the tensor block at ``ell``.

    Exact enumeration of all 2^d single-step index increments: stepping
    dimension j raises its level by 1, or by ``grid_p_j + 1`` from a zero
    coordinate (the next distinct point set sits that many levels up).
    Each stepped index still inside the level budget contributes
    (-1)^(number of stepped dimensions).  Budget membership uses the same
    left-to-right weighted sum as the index-set enumeration, so boundary
    ties cannot differ between the two.
    """
    d = spec.d
    if d > MAX_SUBSET_DIM:
        raise ValueError(f"subset enumeration limited to d <= {MAX_SUBSET_DIM}")
    if len(ell) != d:
        raise ValueError(f"multi-index must have length {d}")
    if _wdot(ell, spec.omega) > spec.level or not all(
        l == 0 or l > p for l, p in zip(ell, spec.grid_p)
    ):
        raise ValueError(f"multi-index {ell} is not in the active set")
    step = [1 + (p if l == 0 else 0) for l, p in zip(ell, spec.grid_p)]
    coeff = 0
    stepped = list(ell)
    for mask in range(1 << d):
        bits = 0
        for j in range(d):
            if mask >> j & 1:
                stepped[j] = ell[j] + step[j]
                bits += 1
            else:
                stepped[j] = ell[j]
        if _wdot(stepped, spec.omega) <= spec.level:
            coeff += -1 if bits % 2 else 1
    return coeff


def sparse_grid_nodes(spec: GridSpec) -> list[GridNode]:
    """All interpolation nodes of the design, deduplicated and sorted.

    Built from the disjoint union of per-level new points over the
    downward-closed index set, so no floating-point comparison is involved.
    """
    nodes: list[GridNode] = []
    for ell in index_set(spec):
        fresh = [new_points_1d(l, p) for l, p in zip(ell, spec.grid_p)]
        if any(not f for f in fresh):
            continue
        nodes.extend(itertools.product(*fresh))
    nodes.sort()
    return nodes


def count_nodes(spec: GridSpec) -> int:
    """Number of distinct nodes, by exact counting (no node materialisation)."""
    total = 0
    for ell in index_set(spec):
        block = 1
        for l, p in zip(ell, spec.grid_p):
            if l < 0:
                block = 0
                break
            if l == 0:
                continue
            if l <= p:
                block = 0
                break
            block *= 1 << (l - p)
        total += block
    return total
