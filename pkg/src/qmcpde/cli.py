"""Command-line front end: construct rules, generate points, run PDE studies."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import expr, gf2
from .estimators import Level, draw_shifts, fit_rate, multi_level_estimate, single_level_estimate
from .io import FormatError, format_points, read_b_file, read_col, read_config, read_z, write_col, write_z
from .lattice import GeneratingVector, cbc_construct, construct_embedded, lattice_bound, prime_power, shift_avg_wce_sq
from .pde import constant_field, lognormal_field, uniform_field
from .pointgen import GrayCodeGenerator, apply_shift, fixed_to_float, lattice_seq_points, radical_inverse
from .polylattice import DigitalRule, cbc_construct_interlaced, interlaced_criterion, theorem3_bound
from .weights import WeightParams, alpha_j, pod_weights, rho_lattice, rho_lognormal, spod_weights

log = logging.getLogger("qmcpde")

EXIT_USAGE = 2
EXIT_INVALID = 3


class UsageError(Exception):
    pass


def _add_weight_options(p: argparse.ArgumentParser, alpha_default: int, alpha_help: str) -> None:
    p.add_argument("--s", type=int, required=True, help="number of dimensions")
    p.add_argument("--m", type=int, required=True, help="number of points is 2^m (p^m for lattice rules)")
    p.add_argument("--p", type=int, default=None,
                   help="lattice rules: prime base, default 2; polynomial lattice rules: modulus "
                        "polynomial of degree m as a bitmask integer, default from a built-in table")
    p.add_argument("--alpha", type=int, default=alpha_default, help=alpha_help)
    p.add_argument("--a1", type=int, default=0, help="integer offset for the factorial, default 0")
    p.add_argument("--a2", type=str, default="1", help="scaling in the product (expression), default 1")
    p.add_argument("--a3", type=float, default=0.0, help="boundary growth, 0 means uniform case, default 0")
    p.add_argument("--d1", type=float, default=1.0, help="power on the factorial factor (0 gives product weights), default 1")
    p.add_argument("--d2", type=float, default=2.0, help="decay of the B_j sequence, d2 > 1, default 2")
    p.add_argument("--b", type=str, default=None, help="B_j as an expression in j and v, default c*j**-d2")
    p.add_argument("--c", type=float, default=1.0, help="constant in B_j = c*j**-d2 when b and b_file are absent, default 1")
    p.add_argument("--b_file", type=str, default=None, help="file with numerical values of B_j, one per line")
    p.add_argument("--out", type=str, default=".", help="output directory, default current directory")
    p.add_argument("--delta", type=float, default=0.125, help="rate sacrifice in the lambda choice, default 0.125")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmcpde", description=__doc__)
    parser.add_argument("--config", type=str, default=None, help="key=value file supplying option defaults")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct-lattice", help="CBC construction of a rank-1 lattice rule")
    _add_weight_options(p, 1, "no effect for lattice rules (alpha = 1)")

    p = sub.add_parser("construct-polylattice", help="CBC construction of an interlaced polynomial lattice rule")
    _add_weight_options(p, 2, "interlacing factor, alpha >= 2, default 2")

    p = sub.add_parser("gen-points", help="stream points of a lattice sequence or digital net")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--z", type=str, help="z.txt of a lattice rule (points in radical-inverse order)")
    src.add_argument("--col", type=str, help=".col matrix file (points in Gray-code order)")
    p.add_argument("--m", type=int, default=None, help="for --z: sequence length 2^m")
    p.add_argument("--offset", type=int, default=0, help="index of the first point")
    p.add_argument("--count", type=int, default=None, help="number of points, default all remaining")
    p.add_argument("--format", choices=("text", "raw"), default="text",
                   help="text: 17 significant digits; raw: little-endian 64-bit fixed point")
    p.add_argument("--shift-seed", "--shift_seed", dest="shift_seed", type=int, default=None,
                   help="apply one random shift drawn from this seed")
    p.add_argument("--out", type=str, default=None, help="output file, default standard output")

    p = sub.add_parser("pde-demo", help="QMC study for the 1D model problem; writes a CSV report")
    p.add_argument("--preset", type=str, default="uniform-d2-2",
                   help="uniform-analytic | uniform-d2-2 | uniform-d2-3 | lognormal-d2-2")
    p.add_argument("--z", type=str, default=None, help="z.txt of an embedded lattice rule with 2^m points")
    p.add_argument("--s", type=int, default=20, help="truncation dimension")
    p.add_argument("--m", type=int, default=10, help="largest rule has 2^m points")
    p.add_argument("--m_min", type=int, default=6, help="smallest rule has 2^m_min points")
    p.add_argument("--M", type=int, default=32, help="finite elements on the coarsest mesh")
    p.add_argument("--shifts", "--r", dest="shifts", type=int, default=16, help="number of random shifts r")
    p.add_argument("--seed", type=int, default=0, help="seed for the random shifts")
    p.add_argument("--levels", type=int, default=0, help="L > 0 runs a multi-level estimate with L+1 levels")
    p.add_argument("--out", type=str, default=None, help="CSV output file, default standard output")

    p = sub.add_parser("report", help="summarise a constructed rule")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--z", type=str, help="z.txt of a lattice rule")
    src.add_argument("--col", type=str, help=".col matrix file")
    p.add_argument("--meta", type=str, default=None, help="meta.json written at construction time")
    return parser


def _resolve_B(args, nu_max: int) -> np.ndarray:
    given = [name for name in ("b_file", "b") if getattr(args, name) is not None]
    if len(given) > 1:
        log.warning("both b_file and b given; using b_file")
    if args.b_file is not None:
        vals = read_b_file(args.b_file)
        if vals.shape[0] < args.s:
            raise FormatError(f"{args.b_file}: need {args.s} values, found {vals.shape[0]}")
        return vals[: args.s]
    if args.b is not None:
        return expr.sequence(args.b, args.s, nu_max)
    return args.c * np.arange(1, args.s + 1, dtype=float) ** -args.d2


def _params(args, alpha: int, B: np.ndarray) -> WeightParams:
    return WeightParams(s=args.s, B=B, alpha=alpha, a1=args.a1, a2=expr.scalar(args.a2), a3=args.a3,
                        d1=args.d1, d2=args.d2, delta=args.delta)


def _write_meta(out: Path, meta: dict) -> None:
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_construct_lattice(args) -> int:
    if args.alpha != 1:
        raise UsageError("alpha has no effect for lattice rules and must be 1")
    base = 2 if args.p is None else args.p
    n = base**args.m
    p, _ = prime_power(n)
    if p != base:
        raise UsageError(f"p={base} is not prime")
    params = _params(args, 1, _resolve_B(args, 1))
    case = "lognormal" if params.a3 > 0 else "uniform"
    weights = pod_weights(params, case=case)
    lam = weights.lam
    gv = cbc_construct(n, args.s, weights)
    if case == "uniform":
        rho = rho_lattice(lam)
    else:
        rho = np.array([rho_lognormal(lam, alpha_j(x, lam)) for x in params.a3 * params.B1])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_z(out / "z.txt", gv.z)
    _write_meta(out, {
        "kind": "lattice", "case": case, "s": args.s, "m": args.m, "p": base, "n": n,
        "a1": args.a1, "a2": params.a2, "a3": args.a3, "d1": args.d1, "d2": args.d2, "delta": args.delta,
        "B": params.B1.tolist(), "lambda": lam,
        "predicted_rate": -min(1.0, args.d2 - 0.5),
        "error_bound": lattice_bound(weights, n, lam, 1, rho),
        "criterion": gv.meta["e2"][-1],
    })
    log.info("wrote %s", out / "z.txt")
    return 0


def cmd_construct_polylattice(args) -> int:
    alpha = args.alpha
    if alpha < 2:
        raise UsageError("interlacing factor alpha must be at least 2")
    if args.a3 > 0:
        log.warning("a3 > 0 has no effect for interlaced polynomial lattice rules")
    modulus = gf2.default_modulus(args.m) if args.p is None else args.p
    if gf2.degree(modulus) != args.m or not gf2.is_irreducible(modulus):
        raise ValueError(f"modulus {modulus} is not irreducible of degree m={args.m}")
    B = _resolve_B(args, alpha)
    params = _params(args, alpha, B)
    weights = spod_weights(params)
    rule = cbc_construct_interlaced(args.m, args.s, alpha, weights, modulus)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = alpha * args.m
    write_col(out / "Cs.col", rule.C, args.s, args.m, alpha, args.m)
    write_col(out / "Bs.col", rule.B, args.s, args.m, alpha, rows)
    for bits in (53, 64):
        write_col(out / f"Bs{bits}.col", rule.truncated_B(min(bits, rows)), args.s, args.m, alpha, min(bits, rows))
    if "warning" in rule.meta:
        log.warning(rule.meta["warning"])
    _write_meta(out, {
        "kind": "polylattice", "s": args.s, "m": args.m, "alpha": alpha, "modulus": modulus,
        "polynomials": list(rule.gen_polys),
        "a1": args.a1, "a2": params.a2, "d1": args.d1, "d2": args.d2,
        "B": params.B.tolist(), "predicted_rate": -min(alpha, args.d2),
        "error_bound_lambda1": theorem3_bound(weights, rule.n, 1.0),
        "criterion": rule.meta["criterion"],
        "warning": rule.meta.get("warning"),
    })
    log.info("wrote matrices to %s", out)
    return 0


def _emit(args, points: np.ndarray, fixed: np.ndarray | None) -> None:
    if args.format == "raw":
        if fixed is None:
            fixed = (np.floor(points * 2.0**53).astype(np.uint64) << np.uint64(11))
        data = fixed.astype("<u8").tobytes()
        if args.out:
            Path(args.out).write_bytes(data)
        else:
            sys.stdout.buffer.write(data)
        return
    text = format_points(points)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen_points(args) -> int:
    if args.offset < 0:
        raise UsageError("offset must be non-negative")
    if args.z is not None:
        if args.m is None:
            raise UsageError("--m is required with --z")
        z = read_z(args.z)
        n = 1 << args.m
        count = n - args.offset if args.count is None else args.count
        if args.offset + count > n:
            raise ValueError("requested points beyond the end of the sequence")
        gv = GeneratingVector(n, [v % n for v in z])
        points = lattice_seq_points(gv, args.m, args.offset, count)
        phi = radical_inverse(np.arange(args.offset, args.offset + count, dtype=np.uint64), args.m)
        num = (phi.astype(object)[:, None] * np.array(gv.z, dtype=object)[None, :]) % n
        fixed = np.array([[int(v) << (64 - args.m) for v in row] for row in num], dtype=np.uint64).reshape(count, gv.s)
    else:
        mats, header = read_col(args.col)
        gen = GrayCodeGenerator(mats, header["rows"], offset=args.offset)
        count = gen.n - args.offset if args.count is None else args.count
        fixed = gen.take_fixed(count)
        points = None
    if args.shift_seed is not None:
        if points is None:
            points = fixed_to_float(fixed)
        points = apply_shift(points, draw_shifts(1, points.shape[1], args.shift_seed)[0])
        fixed = None
    elif points is None:
        points = fixed_to_float(fixed)
    _emit(args, points, fixed)
    return 0


PRESETS = ("uniform-analytic", "uniform-d2-2", "uniform-d2-3", "lognormal-d2-2")


def preset_field(name: str, s: int):
    """Field plus construction weights for a named preset."""
    if name == "uniform-analytic":
        return constant_field(1.0, s), pod_weights(WeightParams.from_rule(s, c=0.5, d2=2.0))
    if name.startswith("uniform-d2-"):
        d2 = float(name.rsplit("-", 1)[1])
        field = uniform_field(s, d2=d2)
        return field, pod_weights(WeightParams(s=s, B=field.b(), d2=d2))
    if name == "lognormal-d2-2":
        field = lognormal_field(s, d2=2.0)
        return field, pod_weights(WeightParams(s=s, B=field.b(), a2=1.0 / math.log(2.0), a3=1.0, d2=2.0))
    raise UsageError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def _csv_line(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values) + "\n"


def cmd_pde_demo(args) -> int:
    field, weights = preset_field(args.preset, args.s)
    if not 1 <= args.m_min <= args.m:
        raise UsageError("need 1 <= m_min <= m")
    if args.z is not None:
        z = read_z(args.z)
        if len(z) < args.s:
            raise ValueError(f"{args.z} has {len(z)} components, need {args.s}")
        gv = GeneratingVector(1 << args.m, [v % (1 << args.m) for v in z[: args.s]])
    else:
        gv = construct_embedded(args.m, args.s, weights)
    header = "mode,level,n,s,M,estimate,stderr,variance,slope\n"
    lines = []
    if args.levels <= 0:
        ns, rows = [], []
        for k in range(args.m_min, args.m + 1):
            pts = lattice_seq_points(gv, args.m, 0, 1 << k)
            rep = single_level_estimate(field, args.M, pts, args.shifts, args.seed)
            ns.append(1 << k)
            rows.append(rep)
        ses = [r.stderr for r in rows]
        slope = fit_rate(ns, ses) if len(ns) >= 3 and all(x > 0 for x in ses) else float("nan")
        for n, rep in zip(ns, rows):
            var = float(np.var(rep.shift_values, ddof=1))
            lines.append(_csv_line(["single", 0, n, args.s, args.M, rep.estimate, rep.stderr, var, slope]))
    else:
        levels = []
        for ell in range(args.levels + 1):
            k = max(args.m_min, args.m - ell)
            levels.append(Level(lattice_seq_points(gv, args.m, 0, 1 << k), args.s, args.M * 2**ell))
        rep = multi_level_estimate(field, levels, args.shifts, args.seed)
        for ell, lv in enumerate(levels):
            lines.append(_csv_line(["multi", ell, lv.points.shape[0], lv.s, lv.M, rep.level_means[ell],
                                    rep.level_stderrs[ell], rep.level_variances[ell], float("nan")]))
        lines.append(_csv_line(["multi", "total", "", args.s, levels[-1].M, rep.estimate, rep.stderr, "", float("nan")]))
    text = header + "".join(lines)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    meta = json.loads(Path(args.meta).read_text()) if args.meta else None
    out = []
    if args.z is not None:
        z = read_z(args.z)
        out.append(f"lattice rule: s={len(z)}")
        if meta:
            gv = GeneratingVector(meta["n"], z)
            B = np.asarray(meta["B"])
            params = WeightParams(s=len(z), B=B, a1=meta["a1"], a2=meta["a2"], a3=meta["a3"],
                                  d1=meta["d1"], d2=meta["d2"], delta=meta["delta"])
            e2 = shift_avg_wce_sq(gv, pod_weights(params, case=meta["case"]))
            out += [f"n={gv.n}", f"lambda={meta['lambda']:.6g}", f"criterion={e2:.17g}",
                    f"criterion_at_construction={meta['criterion']:.17g}",
                    f"error_bound={meta['error_bound']:.6g}", f"predicted_rate={meta['predicted_rate']:.6g}"]
    else:
        mats, header = read_col(args.col)
        out.append(f"digital net: matrices={len(mats)} m={header['m']} rows={header['rows']}"
                   + (f" alpha={header['alpha']}" if "alpha" in header else ""))
        if meta:
            rule = DigitalRule.from_polys(meta["m"], meta["alpha"], meta["modulus"], meta["polynomials"])
            params = WeightParams(s=meta["s"], B=np.asarray(meta["B"]), alpha=meta["alpha"], a1=meta["a1"],
                                  a2=meta["a2"], d1=meta["d1"], d2=meta["d2"])
            crit = interlaced_criterion(rule, spod_weights(params))
            out += [f"criterion={crit:.17g}", f"criterion_at_construction={meta['criterion']:.17g}",
                    f"predicted_rate={meta['predicted_rate']:.6g}"]
    sys.stdout.write("\n".join(out) + "\n")
    return 0


COMMANDS = {
    "construct-lattice": cmd_construct_lattice,
    "construct-polylattice": cmd_construct_polylattice,
    "gen-points": cmd_gen_points,
    "pde-demo": cmd_pde_demo,
    "report": cmd_report,
}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sub in subparsers.choices.values():
        dests = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, val in values.items():
            if key in dests:
                action = dests[key]
                defaults[key] = action.type(val) if action.type else val
                action.required = False
        sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader closed the pipe early (e.g. `| head`); not an error
        sys.stdout = open(os.devnull, "w")
        return 0
    except (ValueError, OSError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
