#!/usr/bin/env python3
"""Example experiment: dimension curves of the theorem formulas.

Sweeps the uniform-exponent set over nu_hat, the asymptotic level set over
nu, and the liminf run-length set over alpha, writing plot-ready CSV files.
"""

import argparse
import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from cfdim.dim_solver import theorem_dims  # noqa: E402


def sweep(kind, param, values, i=1, B_schedule=(8, 16, 32, 64)):
    rows = []
    for v in values:
        e = theorem_dims(kind, **{param: v}, i=i, B_schedule=B_schedule)
        rows.append((float(v), e.value, e.bracket[0], e.bracket[1]))
    return rows


def write_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("param,value,lo,hi\n")
        for r in rows:
            fh.write(",".join(repr(x) for x in r) + "\n")
    print("wrote", path)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="curves")
    ap.add_argument("--points", type=int, default=21)
    args = ap.parse_args()
    out = pathlib.Path(args.outdir)
    out.mkdir(exist_ok=True)
    grid = [Fraction(k, args.points + 1) for k in range(0, args.points + 2)]
    write_csv(out / "uniform_set.csv", sweep("U_set", "nu_hat", grid))
    write_csv(out / "asymptotic_level.csv", sweep("nu_level", "nu", [Fraction(k, 4) for k in range(0, 17)]))
    write_csv(out / "runlength_liminf.csv", sweep("F", "alpha", [g / 2 for g in grid]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
