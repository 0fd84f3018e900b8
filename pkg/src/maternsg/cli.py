"""Command-line front end: grid inspection, sweeps, bounds, fit and eval.

Every command reads an optional flat ``key=value`` config file and lets
flags override file values.  Output data files echo the effective
configuration in ``#``-prefixed header lines using the same ``key=value``
syntax, so emitted files can be fed back through ``--config``.

Exit codes: 0 success, 2 usage/configuration error, 3 positive-definiteness
failure before any record was produced, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import experiments as xp
from .grids import (
    active_set,
    combination_coefficient,
    count_nodes,
    index_set,
    make_spec,
    sparse_grid_nodes,
)
from .solver import PDFailure, assemble
from .textio import (
    format_real,
    format_reals,
    load_interpolant,
    parse_int_list,
    parse_kv_lines,
    parse_real,
    parse_real_list,
    save_interpolant,
)
from .grids import DyadicPoint

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PDFAIL = 3
EXIT_IO = 4

THREADS_ENV = "MATERNSG_THREADS"

DESK_MAX_NODES = 10_000
DESK_REALISATIONS = 3
PAPER_MAX_NODES = 100_000
PAPER_REALISATIONS = 10


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class Settings:
    """Layered lookup: command-line flag, then config file, then default."""

    def __init__(self, args, defaults: dict):
        self.defaults = defaults
        self.file: dict = {}
        if getattr(args, "config", None):
            with open(args.config) as fh:
                self.file = parse_kv_lines(fh)
        self.flags = {
            k: v for k, v in vars(args).items() if v is not None and k in defaults
        }

    def raw(self, key: str):
        if key in self.flags:
            return self.flags[key]
        if key in self.file:
            return self.file[key]
        value = self.defaults[key]
        if value is None:
            raise ValueError(f"missing required setting {key!r}")
        return value

    def has(self, key: str) -> bool:
        if key in self.flags:
            return True
        if key in self.file:
            return True
        return self.defaults.get(key) is not None

    def get_int(self, key: str) -> int:
        return int(self.raw(key))

    def get_real(self, key: str) -> float:
        return parse_real(str(self.raw(key)))

    def get_flag(self, key: str) -> bool:
        raw = str(self.raw(key)).strip().lower()
        return raw in ("1", "true", "yes", "on")

    def get_reals(self, key: str, d: int) -> tuple:
        return tuple(parse_real_list(str(self.raw(key)), d))

    def get_ints(self, key: str, d: int) -> tuple:
        return tuple(parse_int_list(str(self.raw(key)), d))


def _spec_settings(settings: Settings):
    """Resolve the grid parameters shared by most commands."""
    d = settings.get_int("d")
    nu = settings.get_reals("nu", d)
    penalty = settings.get_ints("penalty", d)
    tuning = settings.get_ints("tuning", d)
    alpha = settings.get_reals("alpha", d)
    if settings.has("omega") and str(settings.raw("omega")).strip():
        omega = settings.get_reals("omega", d)
    else:
        omega = tuple(n - a + 1.0 for n, a in zip(nu, alpha))
    return d, nu, penalty, tuning, alpha, omega


def _echo(settings: Settings, keys, extra: dict | None = None) -> dict:
    out = {}
    for key in keys:
        out[key] = settings.raw(key)
    if extra:
        out.update(extra)
    return out


def _add_common(sp):
    sp.add_argument("--config", help="flat key=value configuration file")


def _add_grid_options(sp, with_level=True):
    sp.add_argument("--family", help="ISG, ASG, LISG or DASG")
    sp.add_argument("-d", "--dimension", dest="d", help="number of dimensions")
    sp.add_argument(
        "--nu", help="per-dimension regularity, e.g. 3/2*2,5/2*2 or a single value"
    )
    sp.add_argument(
        "--penalty",
        help="per-dimension lengthscale exponents (lengthscale = 2^penalty)",
    )
    sp.add_argument("--omega", help="per-dimension weights; empty derives from alpha")
    sp.add_argument(
        "--alpha", help="target smoothness used to derive omega (default 1/2)"
    )
    sp.add_argument("--tuning", help="per-dimension growth-delay reduction r")
    sp.add_argument("--sigma", help="per-dimension kernel scale (default 1)")
    if with_level:
        sp.add_argument("-L", "--level", help="grid level")


_GRID_DEFAULTS = {
    "family": "ISG",
    "d": None,
    "nu": None,
    "penalty": "0",
    "omega": "",
    "alpha": "0.5",
    "tuning": "0",
    "sigma": "1",
    "level": None,
}


def _build_spec(settings: Settings):
    d, nu, penalty, tuning, alpha, omega = _spec_settings(settings)
    family = str(settings.raw("family")).upper()
    if family in ("ISG", "LISG"):
        omega = (1.0,) * d
    return make_spec(
        family,
        d,
        settings.get_int("level"),
        nu,
        kernel_p=penalty,
        omega=omega,
        tuning=tuning,
        sigma=settings.get_reals("sigma", d),
    )


def cmd_grid_info(args) -> int:
    settings = Settings(args, _GRID_DEFAULTS)
    spec = _build_spec(settings)
    act = active_set(spec)
    nonzero = sum(1 for ell in act if combination_coefficient(spec, ell) != 0)
    print(f"N={count_nodes(spec)}")
    print(f"index_set={len(index_set(spec))}")
    print(f"active_set={len(act)}")
    print(f"nonzero_coefficients={nonzero}")
    if args.nodes:
        for node in sparse_grid_nodes(spec):
            print(" ".join(str(p) for p in node))
    return EXIT_OK


_SWEEP_DEFAULTS = {
    "families": "ISG,ASG,LISG,DASG",
    "d": None,
    "nu": None,
    "penalty": "0",
    "omega": "",
    "alpha": "0.5",
    "tuning": "0",
    "realisations": "",
    "samples": "100",
    "max_nodes": "",
    "max_level": "60",
    "seed": "0",
    "coeff_variance": "5.0",
    "paper_scale": "0",
    "threads": "",
    "out_dir": ".",
    "prefix": "",
}


def cmd_sweep(args) -> int:
    settings = Settings(args, _SWEEP_DEFAULTS)
    d, nu, penalty, tuning, alpha, omega = _spec_settings(settings)
    paper_scale = settings.get_flag("paper_scale")
    realisations = (
        settings.get_int("realisations")
        if str(settings.raw("realisations")).strip()
        else (PAPER_REALISATIONS if paper_scale else DESK_REALISATIONS)
    )
    max_nodes = (
        settings.get_int("max_nodes")
        if str(settings.raw("max_nodes")).strip()
        else (PAPER_MAX_NODES if paper_scale else DESK_MAX_NODES)
    )
    threads = (
        settings.get_int("threads")
        if str(settings.raw("threads")).strip()
        else _default_threads()
    )
    families = [f.strip().upper() for f in str(settings.raw("families")).split(",")]
    seed = settings.get_int("seed")
    samples = settings.get_int("samples")
    max_level = settings.get_int("max_level")
    coeff_variance = settings.get_real("coeff_variance")
    out_dir = Path(str(settings.raw("out_dir")))
    prefix = str(settings.raw("prefix")).strip() or f"sweep_d{d}"
    out_dir.mkdir(parents=True, exist_ok=True)

    echo_base = {
        "d": d,
        "nu": format_reals(nu),
        "penalty": ",".join(str(p) for p in penalty),
        "alpha": format_reals(alpha),
        "tuning": ",".join(str(t) for t in tuning),
        "realisations": realisations,
        "samples": samples,
        "max_nodes": max_nodes,
        "max_level": max_level,
        "seed": seed,
        "coeff_variance": format_real(coeff_variance),
        "paper_scale": int(paper_scale),
    }

    worst = EXIT_OK
    for family in families:
        fam_omega = (1.0,) * d if family in ("ISG", "LISG") else omega
        # the growth-delay reduction is a doubly anisotropic device; the
        # other families run untuned
        fam_tuning = tuning if family == "DASG" else (0,) * d
        records = xp.level_sweep(
            family,
            d,
            nu,
            penalty=penalty,
            omega=fam_omega,
            tuning=fam_tuning,
            realisations=realisations,
            n_samples=samples,
            max_nodes=max_nodes,
            max_level=max_level,
            seed=seed,
            coeff_variance=coeff_variance,
            threads=threads,
        )
        path = out_dir / f"{prefix}_{family}.txt"
        # families= lets an emitted file be fed back through --config verbatim
        header = {
            "families": family,
            **echo_base,
            "omega": format_reals(fam_omega),
        }
        with open(path, "w") as fh:
            xp.write_records(fh, records, header)
        print(f"{family}: {len(records)} records -> {path}")
        if not records:
            worst = EXIT_PDFAIL
    return worst


_BOUND_DEFAULTS = {
    "bound": "dasg",
    "d": None,
    "nu": None,
    "penalty": "0",
    "omega": "",
    "alpha": "0.5",
    "tuning": "0",
    "levels": "0:10",
    "constant": "1",
    "dim_constants": "1",
    "constant_from_gamma": "0",
}


def cmd_bound(args) -> int:
    settings = Settings(args, _BOUND_DEFAULTS)
    d, nu, penalty, tuning, alpha, omega = _spec_settings(settings)
    kind = str(settings.raw("bound")).lower()
    if kind not in ("dasg", "lisg"):
        raise ValueError(f"unknown bound {kind!r}: expected dasg or lisg")
    if kind == "lisg":
        omega = (1.0,) * d
    lo, _, hi = str(settings.raw("levels")).partition(":")
    levels = range(int(lo), int(hi or lo) + 1)
    scale = settings.get_real("constant")
    if settings.get_flag("constant_from_gamma"):
        scale *= bd.regularity_gap_constant(nu, alpha)
    dim_constants = settings.get_reals("dim_constants", d)
    evaluate = bd.dasg_bound if kind == "dasg" else bd.lisg_bound
    for level in levels:
        params = bd.BoundParams(
            nu=nu,
            alpha=alpha,
            omega=omega,
            penalty=penalty,
            level=level,
            scale_constant=scale,
            dim_constants=dim_constants,
        )
        print(f"{level} {format_real(evaluate(params).value)}")
    return EXIT_OK


def _read_values_file(path, d: int) -> dict:
    table = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != d + 1:
                raise ValueError(
                    f"expected {d} node coordinates and one value: {line!r}"
                )
            node = tuple(DyadicPoint.parse(t) for t in tokens[:d])
            table[node] = parse_real(tokens[d])
    return table


def cmd_fit(args) -> int:
    settings = Settings(args, _GRID_DEFAULTS)
    spec = _build_spec(settings)
    table = _read_values_file(args.values, spec.d)

    def sampler(coords):
        out = []
        for row in coords:
            key = tuple(DyadicPoint.from_float(v) for v in row)
            if key not in table:
                shown = " ".join(str(p) for p in key)
                raise ValueError(f"values file is missing grid node ({shown})")
            out.append(table[key])
        return np.array(out)

    interp = assemble(spec, sampler)
    save_interpolant(interp, args.out)
    print(f"{interp.n_nodes} weights -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    interp = load_interpolant(args.interpolant)
    d = interp.spec.d
    source = sys.stdin if args.points is None else open(args.points)
    try:
        for line in source:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            coords = [parse_real(t) for t in line.split()]
            if len(coords) != d:
                raise ValueError(f"expected {d} coordinates per line: {line!r}")
            print(format_real(interp(np.array(coords)[None, :])[0]))
    finally:
        if source is not sys.stdin:
            source.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maternsg",
        description="Sparse-grid interpolation with separable Matern kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("grid-info", help="node and index-set statistics")
    _add_common(sp)
    _add_grid_options(sp)
    sp.add_argument("--nodes", action="store_true", help="dump the node list")
    sp.set_defaults(func=cmd_grid_info)

    sp = sub.add_parser("sweep", help="convergence sweep over levels")
    _add_common(sp)
    _add_grid_options(sp, with_level=False)
    sp.add_argument("--families", help="comma list of families (default all four)")
    sp.add_argument("--realisations", help="targets per configuration")
    sp.add_argument("--samples", help="Monte Carlo samples per error")
    sp.add_argument("--max-nodes", dest="max_nodes", help="node-count stopping cap")
    sp.add_argument("--max-level", dest="max_level", help="hard level cap")
    sp.add_argument("--seed", help="base seed")
    sp.add_argument(
        "--coeff-variance", dest="coeff_variance", help="target coefficient variance"
    )
    sp.add_argument(
        "--paper-scale",
        dest="paper_scale",
        action="store_const",
        const="1",
        help="use the full-scale caps (10^5 nodes, 10 realisations)",
    )
    sp.add_argument("--threads", help=f"worker threads (default ${THREADS_ENV} or cores)")
    sp.add_argument("--out-dir", dest="out_dir", help="output directory")
    sp.add_argument("--prefix", help="output file prefix")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bound", help="evaluate an error-bound diagnostic")
    _add_common(sp)
    _add_grid_options(sp, with_level=False)
    sp.add_argument("--bound", help="dasg or lisg")
    sp.add_argument("--levels", help="level range lo:hi (default 0:10)")
    sp.add_argument("--constant", help="overall multiplicative constant")
    sp.add_argument(
        "--dim-constants", dest="dim_constants", help="per-dimension constants"
    )
    sp.add_argument(
        "--constant-from-gamma",
        dest="constant_from_gamma",
        action="store_const",
        const="1",
        help="multiply in the Gamma-ratio constant for (nu, alpha)",
    )
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("fit", help="assemble an interpolant from sampled values")
    _add_common(sp)
    _add_grid_options(sp)
    sp.add_argument("--values", required=True, help="node/value file")
    sp.add_argument("--out", required=True, help="interpolant output file")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("eval", help="evaluate a stored interpolant at points")
    sp.add_argument("--interpolant", required=True, help="interpolant file")
    sp.add_argument("--points", help="points file (default: stdin)")
    sp.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except PDFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PDFAIL
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
