"""intrecover command line: classes, sample, invert, witness, params, bench."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .images import ImageFormatError, format_pgm, read_pgm, write_pgm
from .inversion import InversionError, invert_2d
from .lattice import (BetaParams, beta1_min, estimate_beta2, estimate_K, gamma_max, recommended_digits)
from .numtheory import totient
from .sampling import (MinimalSpectrum, amb2d_witness, binary_pair_witness, enumerate_classes, sample_minimal,
                       searchspace_dims)

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_FAIL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--m", type=int, default=1, help="DFT coefficients per class")
    p.add_argument("--digits", type=int, default=16, help="working precision in decimal digits")
    p.add_argument("--beta0", type=float, default=0.1)
    p.add_argument("--beta1", default="auto", help="decimation penalty or 'auto'")
    p.add_argument("--beta2", default=None,
                   help="DFT penalty, 'auto' for the heuristic; default 10^(digits-2)")
    p.add_argument("--beta3", type=float, default=100.0)
    p.add_argument("--delta", type=float, default=0.9972)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--l", type=float, default=None, help="entry bound L (binomial trials)")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--out", default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="intrecover",
                                 description="Recover integer images from minimal sets of DFT coefficients.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classes", parents=[common], help="list DFT coefficient classes of a grid")
    s.add_argument("n1", type=int)
    s.add_argument("n2", type=int)

    s = sub.add_parser("sample", parents=[common], help="sample a minimal spectrum from a PGM image")
    s.add_argument("image")

    s = sub.add_parser("invert", parents=[common], help="reconstruct a PGM image from a spectrum")
    s.add_argument("spectrum")
    s.add_argument("--report", default=None, help="report JSON path (default: <out>.report.json)")
    s.add_argument("--retry", action="store_true", help="retry failing classes with spare coefficients")

    s = sub.add_parser("witness", parents=[common], help="ambiguity witnesses for a class")
    for name in ("n1", "n2", "k", "l"):
        s.add_argument(name, type=int)

    s = sub.add_parser("params", parents=[common], help="lattice parameter heuristics")
    s.add_argument("--n", type=int, required=True, help="signal or subsignal length")
    s.add_argument("--scale", type=float, default=1.0, help="coset size for subsignals")

    s = sub.add_parser("bench", parents=[common], help="run an experiment suite")
    s.add_argument("suite")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--shape", default="12x18")
    s.add_argument("--ms", default=None, help="comma list of M values")
    s.add_argument("--ns", default=None, help="comma list of N values")
    s.add_argument("--digits-list", default=None)
    return ap


def _params(args, allow_auto_default: bool = False) -> BetaParams:
    b1 = None if str(args.beta1).lower() == "auto" else float(args.beta1)
    if args.beta2 is None:
        b2 = None if allow_auto_default else 10.0 ** (args.digits - 2)
    elif str(args.beta2).lower() == "auto":
        b2 = None
    else:
        b2 = float(args.beta2)
    return BetaParams(beta0=args.beta0, beta1=b1, beta2=b2, beta3=args.beta3, delta=args.delta, eps=args.eps,
                      digits=args.digits, p=args.p)


def _config_header(args) -> str:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return "# " + json.dumps(cfg, sort_keys=True, default=str) + "\n"


def _write_csv(path, args, header, rows):
    buf = io.StringIO()
    buf.write(_config_header(args))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IOError(str(exc)) from exc


def cmd_classes(args) -> int:
    if args.n1 < 1 or args.n2 < 1:
        raise UsageError("grid dimensions must be positive")
    classes = enumerate_classes(args.n1, args.n2)
    rows = [(c.rep[0], c.rep[1], c.D, len(c.orbit)) for c in classes]
    print(f"{'rep':>12} {'D':>6} {'orbit':>6}")
    for k, l, D, size in rows:
        print(f"{f'({k},{l})':>12} {D:>6} {size:>6}")
    print(f"classes: {len(rows)}  grid: {args.n1}x{args.n2} = {args.n1 * args.n2} frequencies")
    for name, n in (("n1", args.n1), ("n2", args.n2)):
        if n >= 3:
            base, red = searchspace_dims(n)
            print(f"search space {name}={n}: baseline {base}, reduced {red}")
    if args.out:
        _write_csv(args.out, args, ["rep_k", "rep_l", "D", "orbit_size"], rows)
    return EXIT_OK


def _load_image(path):
    try:
        return read_pgm(path)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    except ImageFormatError as exc:
        raise IOError(f"invalid image {path}: {exc}") from exc


def cmd_sample(args) -> int:
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    img, maxval = _load_image(args.image)
    spec = sample_minimal(img, args.m, args.digits)
    text = spec.to_json()
    out = args.out or str(Path(args.image).with_suffix(".spectrum.json"))
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    total = img.size
    print(f"classes: {len(spec.classes)}  coefficients: {spec.num_coefficients} of {total} "
          f"({100.0 * spec.num_coefficients / total:.1f}%)  maxval: {maxval}  -> {out}")
    return EXIT_OK


def cmd_invert(args) -> int:
    try:
        text = Path(args.spectrum).read_text()
    except OSError as exc:
        raise IOError(f"cannot read {args.spectrum}: {exc}") from exc
    try:
        spec = MinimalSpectrum.from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise IOError(f"invalid spectrum {args.spectrum}: {exc}") from exc
    args.digits = spec.digits
    params = _params(args)
    out = args.out or str(Path(args.spectrum).with_suffix(".pgm"))
    report_path = args.report or out + ".report.json"
    t0 = time.perf_counter()
    img, report = invert_2d(spec, params, L=args.l, threads=args.threads, retry=args.retry,
                            raise_on_failure=False)
    try:
        Path(report_path).write_text(report.to_json())
    except OSError as exc:
        raise IOError(str(exc)) from exc
    if img is None:
        print(f"reconstruction failed at class {report.failed_key}: {report.message}", file=sys.stderr)
        return EXIT_FAIL
    if img.min(initial=0) < 0 or img.max(initial=0) > 65535:
        print("reconstruction left the PGM range [0, 65535]", file=sys.stderr)
        return EXIT_FAIL
    maxval = max(1, int(args.l) if args.l else 1, int(img.max(initial=0)))
    try:
        write_pgm(out, img, maxval)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    print(f"recovered {spec.n1}x{spec.n2} image in {time.perf_counter() - t0:.2f}s -> {out}")
    return EXIT_OK


def cmd_witness(args) -> int:
    n1, n2, k, l = args.n1, args.n2, args.k, args.l
    if n1 < 1 or n2 < 1 or not (0 <= k < n1 and 0 <= l < n2):
        raise UsageError(f"frequency ({k},{l}) outside the {n1}x{n2} grid")
    if (k, l) == (0, 0):
        raise UsageError("no binary witness pair exists for the (0,0) class")
    X = amb2d_witness(n1, n2, k, l)
    X1, X2 = binary_pair_witness(n1, n2, k, l)
    print("signed witness:")
    print("\n".join(" ".join(f"{v:2d}" for v in row) for row in X))
    for name, M in (("X1", X1), ("X2", X2)):
        print(f"{name}:")
        print("\n".join(" ".join(str(v) for v in row) for row in M))
    prefix = args.out or f"witness_{n1}x{n2}_{k}_{l}"
    try:
        with open(prefix + "_signed.csv", "w") as f:
            f.write(f"# amb2d witness n1={n1} n2={n2} k={k} l={l}\n")
            np.savetxt(f, X, fmt="%d", delimiter=",")
        write_pgm(prefix + "_1.pgm", X1, 1)
        write_pgm(prefix + "_2.pgm", X2, 1)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    return EXIT_OK


def cmd_params(args) -> int:
    n = args.n
    if n < 1 or args.m < 1:
        raise UsageError("--n and --m must be positive")
    L = args.l if args.l is not None else 1.0
    phi = totient(n)
    K = estimate_K(phi, args.m, L, args.p, args.scale)
    gm = gamma_max(K, args.beta0)
    b1 = beta1_min(K, args.beta0, n, args.delta)
    b2 = estimate_beta2(phi, args.m, K, args.beta0)
    digits = recommended_digits(b2, args.beta3)
    rows = [("n", n), ("phi", phi), ("M", args.m), ("L", L), ("p", args.p), ("K", f"{K:.6g}"),
            ("gamma_max", gm), ("beta1_min", f"{b1:.6g}"), ("beta2", f"{b2:.6g}"), ("recommended_digits", digits)]
    for k, v in rows:
        print(f"{k:>20}: {v}")
    if args.out:
        _write_csv(args.out, args, ["name", "value"], rows)
    return EXIT_OK


def _ints(text, default):
    return [int(v) for v in text.split(",")] if text else list(default)


def cmd_bench(args) -> int:
    if args.suite not in bench.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(bench.SUITES)}")
    params = _params(args, allow_auto_default=True)
    if args.suite == "kmc":
        N = args.n or 30
        Ms = _ints(args.ms, [args.m])
        rows = bench.kmc(N, Ms, args.trials, args.seed, args.l, args.p)
        for M, (mean, bound) in bench.kmc_summary(rows, N, args.l, args.p).items():
            print(f"N={N} M={M}: mean |x - guess| = {mean:.4f}, bound {bound:.4f}", file=sys.stderr)
        _write_csv(args.out, args, ["M", "trial", "distance"], rows)
    elif args.suite == "percentile":
        N = args.n or 19
        rows = []
        for M in _ints(args.ms, [args.m]):
            rows += bench.percentile(N, M, args.trials, args.seed, params, args.l)
        _write_csv(args.out, args, ["N", "M", "quantile", "beta2", "theory_beta2"], rows)
    elif args.suite == "precision":
        rows = bench.precision(_ints(args.ns, [30, 31]), _ints(args.ms, [1, 2]), _ints(args.digits_list, [args.digits]),
                               args.trials, args.seed, params, None if args.beta2 in (None, "auto") else float(args.beta2))
        _write_csv(args.out, args, ["N", "M", "digits", "beta2", "trials", "recovered_pct"], rows)
    else:
        try:
            n1, n2 = (int(v) for v in args.shape.lower().split("x"))
        except ValueError:
            raise UsageError(f"--shape must look like 12x18, got {args.shape!r}") from None
        if args.beta2 is None:
            params = _params(args)
        L = int(args.l) if args.l else 1
        row = bench.recover2d((n1, n2), args.m, args.trials, args.seed, params, L)
        _write_csv(args.out, args, ["n1", "n2", "M", "coeffs", "trials", "recovered_pct", "success_s", "fail_s",
                                    "max_theory_beta2"], [row])
    return EXIT_OK


COMMANDS = {"classes": cmd_classes, "sample": cmd_sample, "invert": cmd_invert, "witness": cmd_witness,
            "params": cmd_params, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"intrecover: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except IOError as exc:
        print(f"intrecover: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"intrecover: error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
