"""Command-line interface: ``srn <subcommand> ...``.

Exit codes: 0 success, 1 decoding failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bounds
from .code import (
    CodeError,
    CodeParams,
    FractionVector,
    MultiPrecisionWord,
    ReceivedWord,
    encode,
    encode_multiprecision,
)
from .decoder import DecoderConfig, decode_bad_primes_outcome, decode_outcome
from .distsolve import LinearSystem, run_demo
from .errmodel import count_omega
from .harness import SCHEMA_HELP, ConfigError, governing_theorem, load_config, run_montecarlo

WORD_HELP = """\
JSON shapes (integers may be decimal strings):
  code:     {"primes": ["2","3","5"], "mults": [2,1,1], "ell": 1, "F": "2", "G": "3"}
  fraction: {"numerators": ["1"], "denominator": "2"}
  word:     {"columns": [["1"], ["2"], ["3"]]}
  mp word:  {"columns": [{"valuation": 1, "residues": ["1"]}, ...]}
"""


class UsageError(Exception):
    pass


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _params(args) -> CodeParams:
    return CodeParams.from_json(_read_json(args.code))


def cmd_encode(args) -> int:
    params = _params(args)
    fv = FractionVector.from_json(_read_json(args.input))
    w = encode(fv, params)
    _emit({**w.to_json(), "interpolants": [str(r) for r in w.interpolants]})
    return 0


def cmd_encode_mp(args) -> int:
    params = _params(args)
    fv = FractionVector.from_json(_read_json(args.input))
    _emit(encode_multiprecision(fv, params).to_json())
    return 0


def _decode(args, bad_primes: bool) -> int:
    params = _params(args)
    cfg = DecoderConfig(int(args.theta), args.svp_mode)
    raw = _read_json(args.input)
    if bad_primes:
        out = decode_bad_primes_outcome(MultiPrecisionWord.from_json(params.basis, raw), params, cfg)
    else:
        out = decode_outcome(ReceivedWord.from_json(params.basis, raw), params, cfg)
    if not out.ok:
        _emit({"status": "failure", "reason": out.reason, "eta": None if out.eta is None else str(out.eta)})
        return 1
    _emit({"status": "success", "eta": str(out.eta), **out.value.to_json()})
    return 0


def _table(gov) -> str:
    rep = gov.report
    rows = [
        ("theorem", gov.theorem),
        ("beta", f"{gov.beta:.4f}"),
        ("d (decoder)", f"{gov.d:.4f}"),
        ("d fixed part", f"{gov.d_fixed:.4f}"),
        ("d random part", f"{gov.d_random:.4f}"),
        ("distance budget", f"{gov.budget:.4f}"),
        ("locator", str(rep.locator)),
        ("product", f"{float(rep.product):.6f}"),
        ("bound", f"{rep.value:.6g}"),
        ("preconditions", "ok" if gov.valid else "; ".join(gov.problems)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def cmd_bound(args) -> int:
    cfg = load_config(args.config)
    gov = governing_theorem(cfg)
    _emit(gov.to_json())
    print(_table(gov), file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    summary = run_montecarlo(cfg, threads=args.threads, csv_path=args.out or cfg.output)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
    _emit(summary)
    return 0


def _parse_matrix(text: str) -> list[list[int]]:
    return [[int(x) for x in row.split(",")] for row in text.split(";")]


def cmd_distsolve(args) -> int:
    A = _parse_matrix(args.A)
    b = [int(x) for x in args.b.split(",")]
    system = LinearSystem(tuple(map(tuple, A)), tuple(b))
    transcript = run_demo(
        system,
        faults=args.faults,
        mode=args.mode,
        mult=args.mult,
        fault_mode="random",
        seed=args.seed,
        budget=args.budget,
    )
    _emit(transcript)
    return 0 if transcript["status"] == "success" else 1


def cmd_selftest(args) -> int:
    problems = []
    for lam in range(1, 61):
        for eta in (e for e in range(1, lam + 1) if lam % e == 0):
            for ell in (1, 2):
                brute = _brute_omega(lam, eta, ell)
                if brute != count_omega(lam, eta, ell):
                    problems.append(f"count_omega({lam},{eta},{ell})")
    for lam in range(1, 500):
        lhs, rhs = bounds.divisor_sum_identity(lam, lambda p, k: Fraction(p) ** k)
        if lhs != rhs:
            problems.append(f"divisor sum at {lam}")
    from .numtheory import PrimePowerBasis

    params = CodeParams(2, 4, 4, PrimePowerBasis((3, 5, 7, 11), (2, 1, 1, 1)))
    fv = FractionVector((3, -2), 1)
    if decode_outcome(encode(fv, params), params, DecoderConfig(1)).value != fv:
        problems.append("round trip")
    for p in problems:
        print("FAIL", p, file=sys.stderr)
    print("selftest:", "ok" if not problems else f"{len(problems)} problems")
    return 0 if not problems else 1


def _brute_omega(lam: int, eta: int, ell: int) -> int:
    import itertools
    import math

    return sum(
        1 for v in itertools.product(range(lam), repeat=ell) if math.gcd(*v, lam) == eta
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srn", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("encode", cmd_encode, "encode a fraction vector (unit denominator)"),
        ("encode-mp", cmd_encode_mp, "multi-precision encoding (any denominator)"),
    ):
        p = sub.add_parser(name, help=help_, epilog=WORD_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--code", required=True, help="code parameters JSON file")
        p.add_argument("--input", required=True, help="fraction JSON file or - for stdin")
        p.set_defaults(func=fn)

    for name, bad in (("decode", False), ("decode-bad-primes", True)):
        p = sub.add_parser(name, help="lattice decoding of a received word", epilog=WORD_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--code", required=True)
        p.add_argument("--input", required=True, help="received word JSON file or -")
        p.add_argument("--theta", required=True, help="integer locator bound (d = log2 theta)")
        p.add_argument("--svp-mode", choices=("approx", "exact"), default="approx")
        p.set_defaults(func=lambda a, bad=bad: _decode(a, bad))

    p = sub.add_parser("bound", help="theorem bound for an experiment config", epilog=SCHEMA_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="Monte Carlo run", epilog=SCHEMA_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path (overrides config)")
    p.add_argument("--summary", help="also write the JSON summary here")
    p.add_argument("--threads", type=int, default=1, help="maximum parallel worker processes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("distsolve-demo", help="fault-tolerant distributed solve of A x = b")
    p.add_argument("--A", default="1,1;1,-1", help="rows separated by ';', entries by ','")
    p.add_argument("--b", default="1,2")
    p.add_argument("--faults", type=int, default=0, help="number of faulty workers")
    p.add_argument("--budget", type=int, default=None, help="faults the basis is sized for")
    p.add_argument("--mode", choices=("plain", "bad-prime"), default="plain")
    p.add_argument("--mult", type=int, default=1, help="multiplicity of every prime")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_distsolve)

    p = sub.add_parser("selftest", help="run the counting and identity checks")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        code = int(exc.code or 0)
        if code == 2:
            print(f"\n{WORD_HELP}\n{SCHEMA_HELP}", file=sys.stderr)
        return code
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}\n\n{SCHEMA_HELP}", file=sys.stderr)
        return 2
    except (UsageError, CodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}\n\n{WORD_HELP}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
