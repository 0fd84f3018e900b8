"""Text serialisation of interpolants and shared key=value helpers.

An interpolant file holds one ``# key=value`` header line per spec field
followed by one line per node: the exact dyadic coordinates as ``n/2^k``
tokens and the weight as a hexadecimal float.  Round-trips are bit-exact.
"""

from __future__ import annotations

import math
from typing import IO

from .grids import DyadicPoint, GridSpec, kernel_for
from .solver import SparseInterpolant

__all__ = [
    "format_real",
    "format_reals",
    "parse_real",
    "parse_real_list",
    "parse_int_list",
    "parse_kv_lines",
    "write_interpolant",
    "read_interpolant",
    "save_interpolant",
    "load_interpolant",
]


def format_real(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    if x == math.inf:
        return "inf"
    return repr(float(x))


def format_reals(values) -> str:
    return ",".join(format_real(v) for v in values)


def parse_real(token: str) -> float:
    """Parse a real: decimal, hexadecimal float, ``inf`` or a fraction ``a/b``."""
    token = token.strip()
    if token.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if "/" in token:
        num, _, den = token.partition("/")
        return float(num) / float(den)
    try:
        return float(token)
    except ValueError:
        return float.fromhex(token)


def _expand(token: str) -> list[str]:
    # block shorthand: "3/2*2" repeats the value twice
    if "*" in token:
        value, _, count = token.rpartition("*")
        return [value] * int(count)
    return [token]


def parse_real_list(text: str, d: int | None = None) -> list[float]:
    """Comma list of reals with ``value*count`` block shorthand.

    A single value is broadcast to length ``d`` when ``d`` is given.
    """
    tokens = [t for part in str(text).split(",") for t in _expand(part) if t.strip()]
    values = [parse_real(t) for t in tokens]
    if d is not None:
        if len(values) == 1:
            values = values * d
        if len(values) != d:
            raise ValueError(f"expected {d} values, got {len(values)}: {text!r}")
    return values


def parse_int_list(text: str, d: int | None = None) -> list[int]:
    values = parse_real_list(text, d)
    out = []
    for v in values:
        if v != int(v):
            raise ValueError(f"expected integers, got {text!r}")
        out.append(int(v))
    return out


def parse_kv_lines(lines) -> dict:
    """Read ``key=value`` lines; ``#`` prefixes and blank lines are tolerated."""
    out: dict = {}
    for line in lines:
        body = line.strip().lstrip("#").strip()
        if not body or "=" not in body:
            continue
        key, _, value = body.partition("=")
        out[key.strip()] = value.strip()
    return out


def _spec_header(spec: GridSpec) -> dict:
    return {
        "family": spec.family,
        "d": spec.d,
        "level": spec.level,
        "nu": format_reals(spec.nu),
        "sigma": format_reals(spec.sigma),
        "kernel_p": ",".join(str(p) for p in spec.kernel_p),
        "grid_p": ",".join(str(p) for p in spec.grid_p),
        "omega": format_reals(spec.omega),
    }


def spec_from_header(header: dict) -> GridSpec:
    d = int(header["d"])
    return GridSpec(
        d=d,
        nu=tuple(parse_real_list(header["nu"], d)),
        sigma=tuple(parse_real_list(header.get("sigma", "1"), d)),
        kernel_p=tuple(parse_int_list(header.get("kernel_p", "0"), d)),
        grid_p=tuple(parse_int_list(header.get("grid_p", "0"), d)),
        omega=tuple(parse_real_list(header.get("omega", "1"), d)),
        level=int(header["level"]),
        family=header["family"].upper(),
    )


def write_interpolant(interp: SparseInterpolant, fh: IO[str]):
    fh.write("# maternsg-interpolant v1\n")
    for key, value in _spec_header(interp.spec).items():
        fh.write(f"# {key}={value}\n")
    for node in sorted(interp.weights):
        coords = " ".join(str(p) for p in node)
        fh.write(f"{coords} {interp.weights[node].hex()}\n")


def read_interpolant(fh: IO[str]) -> SparseInterpolant:
    header_lines = []
    weights: dict = {}
    d = None
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            header_lines.append(line)
            continue
        if d is None:
            spec = spec_from_header(parse_kv_lines(header_lines))
            d = spec.d
        tokens = line.split()
        if len(tokens) != d + 1:
            raise ValueError(f"expected {d} coordinates and a weight: {line!r}")
        node = tuple(DyadicPoint.parse(t) for t in tokens[:d])
        weights[node] = float.fromhex(tokens[d])
    if d is None:
        spec = spec_from_header(parse_kv_lines(header_lines))
    return SparseInterpolant(spec=spec, kernel=kernel_for(spec), weights=weights)


def save_interpolant(interp: SparseInterpolant, path):
    with open(path, "w") as fh:
        write_interpolant(interp, fh)


def load_interpolant(path) -> SparseInterpolant:
    with open(path) as fh:
        return read_interpolant(fh)
