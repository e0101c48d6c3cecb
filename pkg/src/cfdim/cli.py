"""Command-line front end.

Every command echoes its full effective configuration inside the JSON output
(no timestamps), so re-running the canonical argv from the echo reproduces
byte-identical output.  Exit codes: 0 ok, 1 check failed, 2 parse error,
3 range error, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, cantor, dim_solver, exponents, runlength, verify
from .cf_core import RealInput, basic_interval, continuants, expand
from .errors import BudgetExceeded, Exhausted, Inadmissible, InputOutOfRange, NoConvergence, Overflow, OutOfRange

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_RANGE = 3
EXIT_BUDGET = 4


def _stable_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _emit(payload: dict, args) -> None:
    text = _stable_json(payload)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _emit_text(text: str, args) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _frac_str(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _parse_param(s: str):
    if s in ("inf", "infinity"):
        return float("inf")
    if "/" in s:
        p, q = s.split("/")
        return Fraction(int(p), int(q))
    if "." in s or "e" in s or "E" in s:
        return float(s)
    return int(s)


def _default_threads() -> int:
    env = os.environ.get("CFDIM_THREADS")
    return int(env) if env else 1


def _config_echo(command: str, args, fields: Sequence[str]) -> dict:
    cfg = {"command": command, "schema_version": SCHEMA_VERSION, "version": __version__}
    argv = [command]
    for f in fields:
        v = getattr(args, f)
        if isinstance(v, Fraction):
            echoed = _frac_str(v)
        elif isinstance(v, float) and math.isinf(v):
            echoed = "inf"  # strict JSON has no Infinity literal
        else:
            echoed = v
        cfg[f.replace("_", "-")] = echoed
        if v is None:
            continue
        flag = "--" + f.replace("_", "-")
        if isinstance(v, bool):
            if v:
                argv.append(flag)
        else:
            argv.extend([flag, echoed if isinstance(echoed, str) else str(v)])
    cfg["argv"] = argv
    return cfg


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------


def _parse_real_input(args) -> RealInput:
    given = [x is not None for x in (args.rational, args.surd, args.decimal)]
    if sum(given) != 1:
        raise InputOutOfRange("give exactly one of --rational, --surd, --decimal")
    if args.rational:
        p, q = args.rational.split("/")
        return RealInput.rational(int(p), int(q))
    if args.surd:
        # "sqrt:d,u,v,w" encodes (u + v*sqrt(d))/w; "sqrt:d" means sqrt(d)-floor
        body = args.surd
        if body.startswith("sqrt:"):
            body = body[5:]
        parts = [int(x) for x in body.split(",")]
        if len(parts) == 1:
            d = parts[0]
            return RealInput.surd(-math.isqrt(d), 1, 1, d)
        d, u, v, w = parts[0], parts[1], parts[2], parts[3]
        return RealInput.surd(u, v, w, d)
    return RealInput.decimal_input(args.decimal, args.precision if args.precision else None)


def cmd_expand(args) -> int:
    x = _parse_real_input(args)
    d = expand(x, args.n)
    payload = {
        "config": _config_echo("expand", args, ("rational", "surd", "decimal", "n", "precision")),
        "digits": list(d.digits),
        "exhausted": d.exhausted,
    }
    if d.digits:
        t = continuants(d)
        payload["convergents"] = [
            {"k": k, "p": str(t.pk(k)), "q": str(t.qk(k))} for k in range(1, len(d.digits) + 1)
        ]
        intervals = []
        for k in range(1, len(d.digits) + 1):
            b = basic_interval(d.digits[:k])
            intervals.append(
                {"k": k, "length": _frac_str(b.length), "length_float": float(b.length)}
            )
        payload["intervals"] = intervals
    _emit(payload, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# dim
# ---------------------------------------------------------------------------


def _parse_curve(spec: str):
    """name=lo..hi[:count] -> (name, values); integer step for int endpoints."""
    name, _, rng = spec.partition("=")
    lo, _, rest = rng.partition("..")
    hi, _, count = rest.partition(":")
    if not lo or not hi:
        raise InputOutOfRange(f"cannot parse curve {spec!r}")
    if count:
        vals = list(np.linspace(float(lo), float(hi), int(count)))
    else:
        vals = list(range(int(lo), int(hi) + 1))
    return name, vals


def _estimate_payload(e: dim_solver.DimEstimate) -> dict:
    return {
        "value": e.value,
        "bracket": [e.bracket[0], e.bracket[1]],
        "method": e.method,
        "n_used": e.n_used,
        "B_used": e.B_used,
        "trace": list(e.trace),
    }


def cmd_dim(args) -> int:
    kw = dict(nu_hat=args.nu_hat, nu=args.nu, alpha=args.alpha, beta=args.beta, i=args.i)
    if args.B_schedule:
        kw["B_schedule"] = tuple(int(b) for b in args.B_schedule.split(","))
    fields = ("kind", "nu_hat", "nu", "alpha", "beta", "i", "B_schedule", "curve")
    if args.curve:
        name, vals = _parse_curve(args.curve)
        rows = []
        for v in vals:
            if name == "B":
                # sweep the finite-alphabet value of the theorem's argument
                xi = dim_solver.theorem_argument(
                    args.kind, nu_hat=args.nu_hat, nu=args.nu, alpha=args.alpha, beta=args.beta
                )
                if xi is None:
                    e = dim_solver.DimEstimate(0.0, (0.0, 0.0), method="piecewise-zero")
                else:
                    e = dim_solver.spectral_dim(int(v), xi, args.i)
            else:
                kw2 = dict(kw)
                kw2[name] = v
                e = dim_solver.theorem_dims(args.kind, **kw2)
            rows.append((v, e.value, e.bracket[0], e.bracket[1]))
        lines = ["param,value,lo,hi"] + [f"{float(p)!r},{v!r},{lo!r},{hi!r}" for p, v, lo, hi in rows]
        _emit_text("\n".join(lines) + "\n", args)
        return EXIT_OK
    e = dim_solver.theorem_dims(args.kind, **kw)
    payload = {"config": _config_echo("dim", args, fields), "estimate": _estimate_payload(e)}
    _emit(payload, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# cantor / exponents / runlength / verify
# ---------------------------------------------------------------------------


def _build_spec(args) -> cantor.CantorSpec:
    if args.alpha is not None and args.beta is not None:
        sp = cantor.construct_sequences_runlength(args.alpha, args.beta, k_max=args.k_max)
    else:
        if args.nu_hat is None or args.nu is None:
            raise InputOutOfRange("give --nu-hat and --nu, or --alpha and --beta")
        sp = cantor.construct_sequences(args.nu_hat, args.nu, k_max=args.k_max)
    return cantor.CantorSpec(B=args.B, i=args.i, sp=sp, d=args.d)


def cmd_cantor(args) -> int:
    spec = _build_spec(args)
    depth = spec.sp.m[args.depth_k - 1]
    samples = []
    for s in range(args.sample):
        d = cantor.sample_measure(spec, depth=depth, seed=args.seed + s)
        row = {"seed": args.seed + s, "digits": list(int(a) for a in d.digits[: args.emit_digits])}
        if args.local_dim:
            series = cantor.local_dimension_series(spec, d.digits)
            row["local_dimension"] = [{"depth": m, "value": v} for m, v in series]
        samples.append(row)
    payload = {
        "config": _config_echo(
            "cantor", args,
            ("nu_hat", "nu", "alpha", "beta", "B", "i", "d", "depth_k", "k_max", "sample", "seed", "emit_digits", "local_dim"),
        ),
        "schedule": {"n": [int(v) for v in spec.sp.n], "m": [int(v) for v in spec.sp.m]},
        "depth": depth,
        "samples": samples,
    }
    _emit(payload, args)
    return EXIT_OK


def _read_digit_file(path: str) -> List[int]:
    with open(path) as fh:
        toks = fh.read().replace(",", " ").split()
    return [int(t) for t in toks]


def cmd_exponents(args) -> int:
    digits = _read_digit_file(args.input)
    bd = exponents.decompose(digits, args.target_i)
    horizon = args.N if args.N else len(digits)
    est = exponents.exponent_estimates(bd, horizon=horizon)
    payload = {
        "config": _config_echo("exponents", args, ("input", "target_i", "N")),
        "nu_hat_est": est.nu_hat_est,
        "nu_est": est.nu_est,
        "k_used": est.k_used,
        "record_blocks": [[int(n), int(m)] for n, m in bd.record_blocks],
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_runlength(args) -> int:
    digits = _read_digit_file(args.input)
    prof = runlength.run_profile(digits)
    est = runlength.ratio_estimates(prof, args.tail_fraction)
    payload = {
        "config": _config_echo("runlength", args, ("input", "tail_fraction", "emit_profile")),
        "n_max": prof.n_max,
        "R_final": int(prof.R[-1]),
        "liminf_est": est.liminf_est,
        "limsup_est": est.limsup_est,
        "window": list(est.window),
    }
    if args.emit_profile:
        payload["R"] = [int(v) for v in prof.R]
    _emit(payload, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    threads = args.threads if args.threads else _default_threads()
    if args.suite == "lemmas":
        rep = verify.lemma_suite(seed=args.seed)
    elif args.suite == "solver":
        rep = verify.solver_crosscheck(node_budget=args.node_budget)
    elif args.suite == "runlength":
        cfg = verify.McConfig(seed=args.seed, samples=args.samples, n_digits=args.n, threads=threads)
        rep = verify.mc_runlength(cfg)
    elif args.suite == "nu_zero":
        cfg = verify.McConfig(seed=args.seed, samples=args.samples, n_digits=args.n, threads=threads)
        rep = verify.mc_nu_zero(cfg, i=args.i)
    else:
        raise InputOutOfRange(f"unknown suite {args.suite!r}")
    payload = {
        "config": _config_echo("verify", args, ("suite", "seed", "samples", "n", "i", "threads", "node_budget")),
        "report": rep.to_json_dict(),
    }
    if args.csv:
        _emit_text(rep.series_csv(), args)
    else:
        _emit(payload, args)
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfdim", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out", help="write output to a file instead of stdout")

    e = sub.add_parser("expand", help="continued-fraction expansion with exact convergents")
    e.add_argument("--rational", help='p/q, e.g. "5/8"')
    e.add_argument("--surd", help='"sqrt:d" for sqrt(d) mod 1, or "sqrt:d,u,v,w" for (u+v*sqrt(d))/w')
    e.add_argument("--decimal", help="decimal string in (0,1)")
    e.add_argument("--n", type=int, default=10)
    e.add_argument("--precision", type=int, default=None, help="decimal precision budget in bits")
    add_common(e)
    e.set_defaults(fn=cmd_expand)

    d = sub.add_parser("dim", help="dimension values of the piecewise theorem formulas")
    d.add_argument("--kind", required=True, choices=["U_set", "E_hat", "E_joint", "nu_level", "FG", "F"])
    d.add_argument("--nu-hat", dest="nu_hat", type=_parse_param, default=None)
    d.add_argument("--nu", type=_parse_param, default=None)
    d.add_argument("--alpha", type=_parse_param, default=None)
    d.add_argument("--beta", type=_parse_param, default=None)
    d.add_argument("--i", type=int, default=1)
    d.add_argument("--B-schedule", dest="B_schedule", default=None, help="comma-separated increasing bounds")
    d.add_argument("--curve", default=None, help='sweep spec, e.g. "nu=0.1..2.0:20" or "B=2..6"')
    add_common(d)
    d.set_defaults(fn=cmd_dim)

    c = sub.add_parser("cantor", help="sample constrained-run Cantor constructions")
    c.add_argument("--nu-hat", dest="nu_hat", type=_parse_param, default=None)
    c.add_argument("--nu", type=_parse_param, default=None)
    c.add_argument("--alpha", type=_parse_param, default=None)
    c.add_argument("--beta", type=_parse_param, default=None)
    c.add_argument("--B", type=int, default=3)
    c.add_argument("--i", type=int, default=1)
    c.add_argument("--d", type=int, default=None, help="insertion marker digit (> B)")
    c.add_argument("--depth-k", dest="depth_k", type=int, default=6, help="sample to the k-th block boundary")
    c.add_argument("--k-max", dest="k_max", type=int, default=12)
    c.add_argument("--sample", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--emit-digits", dest="emit_digits", type=int, default=64, help="digits echoed per sample")
    c.add_argument("--local-dim", dest="local_dim", action="store_true")
    add_common(c)
    c.set_defaults(fn=cmd_cantor)

    x = sub.add_parser("exponents", help="record blocks and exponent estimates of a digit file")
    x.add_argument("--input", required=True, help="whitespace/comma separated digit file")
    x.add_argument("--target-i", dest="target_i", type=int, default=1)
    x.add_argument("--N", type=int, default=None)
    add_common(x)
    x.set_defaults(fn=cmd_exponents)

    r = sub.add_parser("runlength", help="maximal run-length profile and ratio estimates")
    r.add_argument("--input", required=True)
    r.add_argument("--tail-fraction", dest="tail_fraction", type=float, default=0.5)
    r.add_argument("--emit-profile", dest="emit_profile", action="store_true")
    add_common(r)
    r.set_defaults(fn=cmd_runlength)

    v = sub.add_parser("verify", help="property suites and Monte Carlo laws")
    v.add_argument("--suite", required=True, choices=["lemmas", "solver", "runlength", "nu_zero"])
    v.add_argument("--seed", type=int, default=20260809)
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--n", type=int, default=1_000_000)
    v.add_argument("--i", type=int, default=1)
    v.add_argument("--threads", type=int, default=None)
    v.add_argument("--node-budget", dest="node_budget", type=int, default=200_000_000)
    v.add_argument("--csv", action="store_true", help="emit the horizon series as CSV")
    add_common(v)
    v.set_defaults(fn=cmd_verify)

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (InputOutOfRange, OutOfRange, Overflow, Exhausted, Inadmissible) as exc:
        sys.stderr.write(f"range error: {exc}\n")
        return EXIT_RANGE
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except NoConvergence as exc:
        sys.stderr.write(f"no convergence: {exc}\n")
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
