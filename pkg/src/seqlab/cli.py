"""Command-line entry point: ``seqlab <command> [flags]``.

Every report is a JSON object with the tool version, the resolved
configuration, the result, and an ``execution`` block (thread count and wall
time).  Everything outside ``execution`` is a pure function of the
configuration, so reruns with the same seed compare equal field by field.

Exit status: 0 success, 1 a witness or certificate failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import algebra, classify as cl, porosity, randmeasure, seqgen as sg, windowstats as ws

COMMANDS = (
    "gen",
    "profile",
    "classify",
    "banach-interval",
    "transform",
    "preimage-count",
    "algebra-witness",
    "porosity",
    "verify-cert",
    "mc-lln",
    "mc-blocks",
)
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, **self.options}


# -- argument parsing ---------------------------------------------------------------------


def _seq_flags(p: argparse.ArgumentParser, default: str | None = None) -> None:
    p.add_argument("--seq", default=default, help="sequence variant, kebab-case (e.g. example-s-not-chat)")
    p.add_argument("--value", type=float, default=0.0, help="value for --seq constant")
    p.add_argument("--values-file", help="values for --seq custom (one per line, or n,value CSV)")
    p.add_argument("--spec-file", help="full spec in key = value form; overrides --seq")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--len", type=int, help="truncation length N")
    g.add_argument("--len-blocks", type=int, metavar="J", help="truncate at the block boundary m_J")


def _common(p: argparse.ArgumentParser, fmt: bool = False) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--config", help="flat key = value file mirroring long flags")
    if fmt:
        p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"seqlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen", help="emit a truncation (csv columns: n,value)")
    _seq_flags(p)
    _common(p, fmt=True)

    p = sub.add_parser("profile", help="window extremes and Cesaro trace (csv columns: n,p_hat,q_hat)")
    _seq_flags(p)
    p.add_argument("--densify", type=int, default=0, help="extra window lengths in the top octave")
    p.add_argument("--block-points", action="store_true", help="add block boundaries to the Cesaro samples")
    p.add_argument("--cesaro-csv", help="also write the Cesaro trace (columns: i,cesaro) here")
    _common(p, fmt=True)

    for name in ("classify", "banach-interval"):
        p = sub.add_parser(name, help="membership verdicts" if name == "classify" else "Banach-limit bracket")
        _seq_flags(p)
        p.add_argument("--tol", type=float, default=cl.DEFAULT_TOL)
        p.add_argument("--tail", type=float, default=cl.DEFAULT_TAIL, help="tail fraction of the schedule")
        _common(p)

    p = sub.add_parser("transform", help="apply an exponential-like f termwise (csv columns: n,value)")
    _seq_flags(p)
    p.add_argument("--terms", required=True, help="alpha:beta pairs separated by ';', e.g. '1:1;2:-1'")
    _common(p, fmt=True)

    p = sub.add_parser("preimage-count", help="count solutions of f(x) = c on [lo, hi]")
    p.add_argument("--terms", required=True)
    p.add_argument("--level", type=float, required=True, help="the level c")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--grid", type=int, default=10_000)
    _common(p)

    p = sub.add_parser("algebra-witness", help="free-algebra witness for exp(beta_i z)")
    _seq_flags(p, default="z-chat-minus-c")
    p.add_argument("--betas", default="sqrt2,sqrt3,sqrt5", help="comma list; p/q, sqrtK or decimals")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-8, help="sigma_min threshold")
    p.add_argument("--classify-tol", type=float, default=cl.DEFAULT_TOL)
    p.add_argument("--combinations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exponents-csv", help="write monomial exponent sums (columns: monomial,exponent_sum)")
    _common(p)

    for name in ("porosity", "verify-cert"):
        p = sub.add_parser(name, help="build a porosity certificate" if name == "porosity" else "sample-check a certificate")
        p.add_argument("--pair", choices=porosity.PAIRS, default="c_in_chat")
        p.add_argument("--seq", default="constant", help="center x of the smaller space")
        p.add_argument("--value", type=float, default=0.0)
        p.add_argument("--r", type=float, default=1.0)
        p.add_argument("--alpha", type=float, default=0.5)
        p.add_argument("--zero-limit", action="store_true", help="use the c0 / chat0 / S0 variant")
        if name == "verify-cert":
            p.add_argument("--cert", help="certificate JSON written by 'porosity'")
            p.add_argument("--pattern", help="override the direction w (negative controls)")
            p.add_argument("--pattern-value", type=float, default=1.0, help="value for --pattern constant")
            p.add_argument("--len", type=int, help="truncation length N")
            p.add_argument("--samples", type=int, default=porosity.DEFAULT_SAMPLES)
            p.add_argument("--seed", type=int, default=0)
        _common(p)

    p = sub.add_parser("mc-lln", help="spread of Cesaro means of uniform coordinates")
    p.add_argument("--len", type=int, default=4096)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampler", choices=randmeasure.SAMPLERS, default="uniform")
    p.add_argument("--traces-csv", help="write per-trial Cesaro traces (columns: trial,n1,n2,...)")
    _common(p)

    p = sub.add_parser("mc-blocks", help="geometric decay of block events")
    p.add_argument("--block-size", type=int, default=1)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    return parser


def _config_args(path: str) -> list[str]:
    """key = value lines as flags; placed before the command line so explicit flags win."""
    out = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line is not key = value: {raw!r}")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes"):
            out.append(flag)
        elif value.lower() in ("false", "no"):
            continue
        else:
            out += [flag, value]
    return out


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    argv = list(argv)
    for i, a in enumerate(argv):
        if a == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path = argv[i + 1]
            break
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
            break
    return argv[:1] + _config_args(path) + argv[1:]


# -- value parsing --------------------------------------------------------------------------


def parse_terms(text: str) -> algebra.ExpLike:
    try:
        pairs = [tuple(float(v) for v in part.split(":")) for part in text.split(";") if part.strip()]
        if any(len(p) != 2 for p in pairs):
            raise ValueError
    except ValueError:
        raise UsageError(f"bad --terms {text!r}; expected alpha:beta;alpha:beta") from None
    return algebra.ExpLike(tuple(pairs))


def parse_beta(token: str):
    token = token.strip()
    if token.startswith("sqrt"):
        inner = token[4:].strip("()")
        return math.sqrt(float(inner))
    if "/" in token or token.lstrip("-").isdigit():
        return Fraction(token)
    return float(token)


def resolve_spec(args) -> sg.SequenceSpec:
    if getattr(args, "spec_file", None):
        return sg.spec_from_text(Path(args.spec_file).read_text())
    name = args.seq
    if name is None:
        raise UsageError("--seq is required")
    if name == "custom":
        if not args.values_file:
            raise UsageError("--seq custom needs --values-file")
        return sg.custom(sg.parse_values(Path(args.values_file).read_text()))
    if name == "constant":
        return sg.constant(args.value)
    return sg.named(name)


def resolve_len(args, spec: sg.SequenceSpec) -> int:
    if getattr(args, "len_blocks", None) is not None:
        return sg.boundary(spec, args.len_blocks)
    if args.len is not None:
        return args.len
    if spec.variant == "custom":
        return len(spec.get("values"))
    raise UsageError("give --len or --len-blocks")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# -- commands ----------------------------------------------------------------------------------


def _seq_options(args, spec, N) -> dict:
    return {"seq": sg.spec_to_text(spec).strip().splitlines(), "N": N}


def cmd_gen(args):
    spec = resolve_spec(args)
    N = resolve_len(args, spec)
    t = sg.generate(spec, N)
    return _seq_options(args, spec, N), {"values": [float(v) for v in t.values]}, sg.to_csv(t), True


def _profile(args):
    spec = resolve_spec(args)
    N = resolve_len(args, spec)
    t = sg.generate(spec, N)
    sched = ws.default_schedule(N, getattr(args, "densify", 0))
    blocks = getattr(args, "block_points", False)
    return spec, N, ws.lorentz_profile(t, schedule=sched, threads=args.threads, block_points=blocks)


def cmd_profile(args):
    spec, N, prof = _profile(args)
    if args.cesaro_csv:
        Path(args.cesaro_csv).write_text(prof.cesaro_csv())
    opts = _seq_options(args, spec, N) | {"densify": args.densify, "block_points": args.block_points}
    return opts, prof.to_dict(), prof.to_csv(), True


def cmd_classify(args):
    spec, N, prof = _profile(args)
    report = cl.classify(prof, args.tol, args.tail)
    opts = _seq_options(args, spec, N) | {"tol": args.tol, "tail": args.tail}
    return opts, report.to_dict(), None, True


def cmd_banach_interval(args):
    spec, N, prof = _profile(args)
    lo, hi = cl.banach_interval(prof, args.tail, args.tol)
    opts = _seq_options(args, spec, N) | {"tol": args.tol, "tail": args.tail}
    return opts, {"banach_lo": lo, "banach_hi": hi, "width": hi - lo}, None, True


def cmd_transform(args):
    spec = resolve_spec(args)
    N = resolve_len(args, spec)
    f = parse_terms(args.terms)
    t = algebra.explike_apply(f, sg.generate(spec, N))
    opts = _seq_options(args, spec, N) | {"terms": [list(p) for p in f.terms]}
    result = {"values": [float(v) for v in t.values], "provenance": list(t.provenance)}
    return opts, result, sg.to_csv(t), True


def cmd_preimage_count(args):
    f = parse_terms(args.terms)
    res = algebra.preimage_count(f, args.level, args.lo, args.hi, args.grid)
    opts = {"terms": [list(p) for p in f.terms], "level": args.level, "lo": args.lo, "hi": args.hi, "grid": args.grid}
    result = {"count": res.count, "rank": res.rank, "violation": res.violation, "brackets": [list(b) for b in res.brackets]}
    return opts, result, None, not res.violation


def cmd_algebra_witness(args):
    spec = resolve_spec(args)
    N = resolve_len(args, spec)
    betas = [parse_beta(b) for b in args.betas.split(",")]
    rep = algebra.algebrability_witness(
        spec, betas, args.degree, N, tol=args.tol, combinations=args.combinations,
        seed=args.seed, classify_tol=args.classify_tol, threads=args.threads,
    )
    if args.exponents_csv:
        Path(args.exponents_csv).write_text(rep.exponents_csv())
    opts = _seq_options(args, spec, N) | {
        "betas": [str(b) if isinstance(b, Fraction) else b for b in betas],
        "degree": args.degree, "tol": args.tol, "classify_tol": args.classify_tol,
        "combinations": args.combinations, "seed": args.seed,
    }
    return opts, rep.to_dict(), None, rep.passed


def _certificate(args) -> porosity.PorosityCertificate:
    if getattr(args, "cert", None):
        d = json.loads(Path(args.cert).read_text())
        d = d.get("result", d)
        cert = porosity.PorosityCertificate(
            d["pair"], sg.spec_from_text(d["base"]), d["r"], d["alpha"],
            sg.spec_from_text(d["pattern"]), d["oscillation_bound"], d.get("zero_limit", False),
        )
    else:
        base = sg.constant(args.value) if args.seq == "constant" else sg.named(args.seq)
        cert = porosity.porosity_witness(args.pair, base, args.r, args.alpha, args.zero_limit)
    if getattr(args, "pattern", None):
        cert = porosity.tamper(cert, sg.named(args.pattern, args.pattern_value))
    return cert


def _cert_options(args) -> dict:
    return {"pair": args.pair, "seq": args.seq, "value": args.value, "r": args.r,
            "alpha": args.alpha, "zero_limit": args.zero_limit}


def cmd_porosity(args):
    try:
        cert = _certificate(args)
    except porosity.CertificateRefused as exc:
        return _cert_options(args), {"refused": str(exc), "evidence": exc.evidence}, None, False
    return _cert_options(args), cert.to_dict(), None, True


def cmd_verify_cert(args):
    opts = _cert_options(args) | {"cert": args.cert, "pattern": args.pattern,
                                  "pattern_value": args.pattern_value, "N": args.len,
                                  "samples": args.samples, "seed": args.seed}
    try:
        cert = _certificate(args)
    except porosity.CertificateRefused as exc:
        return opts, {"refused": str(exc), "evidence": exc.evidence}, None, False
    v = porosity.verify_certificate(cert, args.len, args.samples, args.seed, args.threads)
    return opts, v.to_dict(), None, v.passed


def cmd_mc_lln(args):
    rep = randmeasure.mc_lln(args.seed, args.len, args.trials, args.sampler, args.threads,
                             keep_traces=bool(args.traces_csv))
    if args.traces_csv:
        Path(args.traces_csv).write_text(rep.traces_csv())
    opts = {"N": args.len, "trials": args.trials, "seed": args.seed, "sampler": args.sampler}
    return opts, rep.to_dict(), None, True


def cmd_mc_blocks(args):
    rep = randmeasure.mc_block_decay(args.seed, args.block_size, args.m_max, args.trials, args.threads)
    opts = {"block_size": args.block_size, "m_max": args.m_max, "trials": args.trials, "seed": args.seed}
    return opts, rep.to_dict(), None, True


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"seqlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("seqlab: error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE

    start = time.perf_counter()
    try:
        options, result, csv_text, ok = HANDLERS[args.command](args)
    except (UsageError, ValueError, OverflowError, OSError, KeyError) as exc:
        parser.print_usage(sys.stderr)
        print(f"seqlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start

    if getattr(args, "format", "json") == "csv" and csv_text is not None:
        text = csv_text
    else:
        report = {
            "tool": "seqlab",
            "version": __version__,
            "config": RunConfig(args.command, options).to_dict(),
            "result": result,
            "passed": bool(ok),
            "execution": {"threads": args.threads, "runtime_s": elapsed},
        }
        text = json.dumps(_jsonable(report), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
