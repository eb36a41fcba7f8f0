"""Command-line driver: each subcommand writes one CSV table.

Examples
--------
::

    ellharm gamma --a 3 --b 2 --c 1 --n 5 --scheme erf
    ellharm quad-compare --n 5 --p 0 --out work.csv
    ellharm born-limit --deltas 1e-1 1e-2 1e-3
    ellharm solvate --config model.json --orders 4 8 12 16 20 25
    ellharm expand-compare --config model.json --point 0 0 1.5
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import experiments as ex
from .ellipsoid import EllipsoidalSystem, new_system
from .pcm import DEFAULT_SEED, DielectricModel, PointCharge, seeded_charges
from .quad import QuadOptions, QuadratureError, Transform

__all__ = ["ModelConfig", "load_config", "write_csv", "format_value", "build_parser", "main"]


@dataclass(frozen=True)
class ModelConfig:
    """Cavity, permittivities and charges read from JSON.

    Either ``charges`` (a list of ``{x, y, z, q}``) or ``seed``/``count``
    may be given, not both.
    """

    a: float
    b: float
    c: float
    eps_in: float
    eps_out: float
    charges: tuple[PointCharge, ...] | None = None
    seed: int | None = None
    count: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        missing = [k for k in ("a", "b", "c", "eps_in", "eps_out") if k not in d]
        if missing:
            raise ValueError(f"config is missing {missing}")
        explicit = "charges" in d
        generated = "seed" in d or "count" in d
        if explicit and generated:
            raise ValueError("config may give either 'charges' or 'seed'/'count', not both")
        if not (explicit or generated):
            raise ValueError("config needs 'charges' or 'seed'/'count'")
        charges = None
        if explicit:
            charges = tuple(PointCharge((float(c["x"]), float(c["y"]), float(c["z"])), float(c["q"]))
                            for c in d["charges"])
        return cls(float(d["a"]), float(d["b"]), float(d["c"]), float(d["eps_in"]),
                   float(d["eps_out"]), charges,
                   int(d["seed"]) if "seed" in d else None,
                   int(d["count"]) if "count" in d else None)

    def system(self) -> EllipsoidalSystem:
        return new_system(self.a, self.b, self.c)

    def model(self, seed_override: int | None = None) -> DielectricModel:
        sys_ = self.system()
        if self.charges is not None:
            charges = self.charges
        else:
            seed = seed_override if seed_override is not None else (
                self.seed if self.seed is not None else DEFAULT_SEED)
            charges = seeded_charges(sys_, self.count if self.count is not None else 5, seed)
        return DielectricModel(sys_, self.eps_in, self.eps_out, charges)


def load_config(path: str | Path) -> ModelConfig:
    with open(path, encoding="utf-8") as fh:
        return ModelConfig.from_dict(json.load(fh))


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(rows: Sequence[ex.ExperimentRecord], stream) -> None:
    if not rows:
        raise ValueError("no rows to write")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(rows[0].columns)
    for r in rows:
        writer.writerow([format_value(v) for v in r.values.values()])


def _quad(args) -> QuadOptions:
    return QuadOptions(tol=args.tol, transform=args.scheme, digits=args.digits)


def _model(args) -> DielectricModel:
    if args.config is not None:
        return load_config(args.config).model(args.seed)
    sys_ = new_system(args.a, args.b, args.c)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    return DielectricModel(sys_, args.eps_in, args.eps_out, seeded_charges(sys_, args.count, seed))


def cmd_gamma(args):
    return ex.gamma_rows(new_system(args.a, args.b, args.c), args.n, args.scheme,
                         args.tol, args.digits)


def cmd_quad_compare(args):
    return ex.quad_compare_rows(new_system(args.a, args.b, args.c), args.n, args.p,
                                args.levels, args.digits)


def cmd_born_limit(args):
    return ex.born_limit_rows(args.deltas, args.eps_in, args.eps_out, args.order, _quad(args))


def cmd_solvate(args):
    return ex.solvate_rows(_model(args), args.orders, _quad(args))


def cmd_expand_compare(args):
    model = _model(args)
    point = args.point if args.point is not None else ex.brillouin_test_points(model)[0]
    return ex.expand_compare_rows(model, point, args.orders, _quad(args))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-14, help="relative quadrature tolerance")
    p.add_argument("--scheme", type=Transform.parse, default=Transform.TANH_SINH,
                   choices=list(Transform), metavar="{tanh-sinh,tanh,erf}")
    p.add_argument("--digits", type=int, default=15, help="weight cutoff 10**(-2*digits)")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.add_argument("--seed", type=int, default=None, help="seed for generated charges")


def _axes(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--c", type=float, default=1.0)


def _model_args(p: argparse.ArgumentParser) -> None:
    _axes(p)
    p.add_argument("--config", default=None, help="ModelConfig JSON (overrides --a/--b/--c)")
    p.add_argument("--eps-in", type=float, default=1.0)
    p.add_argument("--eps-out", type=float, default=80.0)
    p.add_argument("--count", type=int, default=5, help="number of generated charges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ellharm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="normalization constants of one order")
    _common(p)
    _axes(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("quad-compare", help="work-precision comparison of the transforms")
    _common(p)
    _axes(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--levels", type=int, nargs="+", default=list(range(9)),
                   help="fixed levels to run; each gives one evaluation budget per scheme")
    p.set_defaults(func=cmd_quad_compare)

    p = sub.add_parser("born-limit", help="near-spherical cavities against the Born ion")
    _common(p)
    p.add_argument("--deltas", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    p.add_argument("--eps-in", type=float, default=1.0)
    p.add_argument("--eps-out", type=float, default=80.0)
    p.add_argument("--order", type=int, default=20)
    p.set_defaults(func=cmd_born_limit)

    p = sub.add_parser("solvate", help="solvation energy against truncation order")
    _common(p)
    _model_args(p)
    p.add_argument("--orders", type=int, nargs="+", default=[0, 4, 8, 12, 16, 20, 25])
    p.set_defaults(func=cmd_solvate)

    p = sub.add_parser("expand-compare", help="ellipsoidal vs spherical Coulomb expansion")
    _common(p)
    _model_args(p)
    p.add_argument("--point", type=float, nargs=3, default=None, metavar=("X", "Y", "Z"),
                   help="test point (default: between the cavity and the Brillouin sphere)")
    p.add_argument("--orders", type=int, nargs="+", default=list(range(26)))
    p.set_defaults(func=cmd_expand_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows = args.func(args)
    except (ValueError, ArithmeticError, QuadratureError, OSError, KeyError) as exc:
        print(f"ellharm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main())
