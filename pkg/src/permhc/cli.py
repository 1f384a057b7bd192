"""Command-line interface: ``permhc {per,hc,atsp,gen,selftest,bench}``.

Exit status is 0 on success, 1 for bad input (message on stderr) and 2 when
an internal correctness check fails.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from typing import Any, Sequence, TextIO

from . import classic, oracle
from .atsp import ABSENT, atsp_shortest, ingest_atsp, tour_histogram, validate_weights
from .core import (
    InputError,
    Instance,
    InvariantError,
    ingest_matrix,
    ingest_multigraph,
    max_abs_weight,
    serialize_matrix,
    serialize_multigraph,
)
from .modular import mod_reduce_instance
from .selfreduce import HC, PER, FieldTooSmallError, ReductionEngine, format_term
from .selftest import run_selftest
from .tabulate import crt_plan_for, hc_tabulated, per_tabulated

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2
ALGOS = ("auto", "brute", "classic", "tabulated")
AUTO_BRUTE_MAX = 8
AUTO_CLASSIC_MAX = 20


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors, not invariant failures."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def pick_algo(algo: str, n: int) -> str:
    if algo != "auto":
        return algo
    if n <= AUTO_BRUTE_MAX:
        return "brute"
    if n <= AUTO_CLASSIC_MAX:
        return "classic"
    return "tabulated"


def _load_instance(args: argparse.Namespace) -> Instance:
    text = _read(args.input)
    return ingest_multigraph(text) if args.format == "multigraph" else ingest_matrix(text)


def _dump_terms(inst: Instance, kind: str, k: int, path: str) -> None:
    """One trace block per prime: a comment header then one line per term."""
    plan = crt_plan_for(inst)
    with open(path, "w", encoding="utf-8") as fh:
        for p in plan.primes:
            fh.write(f"# p={p} k={k} kind={kind}\n")
            for term in ReductionEngine(mod_reduce_instance(inst, p), k, kind).terms():
                fh.write(format_term(term) + "\n")


def cmd_count(args: argparse.Namespace, out: TextIO) -> int:
    kind = args.command
    if args.threads < 1:
        raise InputError(f"--threads must be >= 1, got {args.threads}")
    inst = _load_instance(args)
    algo = pick_algo(args.algo, inst.n)
    if args.dump_terms and algo != "tabulated":
        raise InputError("--dump-terms needs --algo tabulated")
    payload: dict[str, Any] = {"n": inst.n, "M": max_abs_weight(inst), "algo": algo}
    if algo == "brute":
        fn = oracle.per_brute if kind == PER else oracle.hc_brute
        try:
            value = fn(inst, cap=args.brute_cap)
        except oracle.OracleCapError as exc:
            raise InputError(str(exc)) from exc
    elif algo == "classic":
        value = classic.per_ryser(inst) if kind == PER else classic.hc_ie(inst)
    else:
        if inst.n < 2:
            raise InputError("tabulated algorithms need n >= 2")
        run = per_tabulated if kind == PER else hc_tabulated
        value, stats = run(inst, k_override=args.k, threads=args.threads, check=args.check)
        payload = {**stats.to_json(value), "algo": algo}
        if args.dump_terms:
            _dump_terms(inst, kind, stats.k, args.dump_terms)
    payload["value"] = str(value)
    out.write((json.dumps(payload) if args.json else str(value)) + "\n")
    return EXIT_OK


def cmd_atsp(args: argparse.Namespace, out: TextIO) -> int:
    weights = ingest_atsp(_read(args.input))
    present = [w for row in weights for w in row if w is not None]
    M = args.max_weight if args.max_weight is not None else max(present, default=0)
    validate_weights(weights, M)
    algo = "classic" if args.algo == "auto" else args.algo
    if algo == "brute":
        try:
            best = oracle.tsp_brute(weights, cap=args.brute_cap)
        except oracle.OracleCapError as exc:
            raise InputError(str(exc)) from exc
        hist = None
    elif algo == "classic":
        best = atsp_shortest(weights, M)
        hist = tour_histogram(weights, M) if args.json else None
    else:
        raise InputError("atsp supports --algo auto, brute or classic")
    if args.json:
        payload: dict[str, Any] = {"n": len(weights), "M": M, "algo": algo, "shortest": best}
        if hist is not None:
            payload["histogram"] = {str(d): str(c) for d, c in hist.items()}
        out.write(json.dumps(payload) + "\n")
    else:
        out.write(("none" if best is None else str(best)) + "\n")
    return EXIT_OK


def generate(kind: str, n: int, seed: int, lo: int, hi: int, density: float, max_mult: int, absent: float) -> str:
    """Seeded random instance text; the header comment records every parameter."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if lo > hi:
        raise InputError(f"empty range [{lo}, {hi}]")
    rng = random.Random(seed)
    if kind == "matrix":
        inst = Instance.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        return serialize_matrix(inst, f"gen matrix n={n} lo={lo} hi={hi} seed={seed}")
    if kind == "multigraph":
        rows = [[rng.randint(1, max_mult) if rng.random() < density else 0 for _ in range(n)] for _ in range(n)]
        header = f"gen multigraph n={n} density={density} max_mult={max_mult} seed={seed}"
        return serialize_multigraph(Instance.from_rows(rows), header)
    if kind == "atsp":
        lo = max(lo, 0)
        lines = [f"# gen atsp n={n} lo={lo} hi={hi} absent={absent} seed={seed}", str(n)]
        for _ in range(n):
            lines.append(" ".join(ABSENT if rng.random() < absent else str(rng.randint(lo, hi)) for _ in range(n)))
        return "\n".join(lines) + "\n"
    raise InputError(f"unknown instance kind {kind!r}")


def cmd_gen(args: argparse.Namespace, out: TextIO) -> int:
    seed = args.seed if args.seed is not None else 0
    out.write(generate(args.kind, args.n, seed, args.lo, args.hi, args.density, args.max_mult, args.absent))
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace, out: TextIO) -> int:
    seed = args.seed if args.seed is not None else 1
    results = run_selftest(args.max_n, seed, args.count)
    for r in results:
        out.write(f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.passed}/{r.total}\n")
        for detail in r.failures:
            out.write(f"    {detail}\n")
    passed = sum(r.passed for r in results)
    total = sum(r.total for r in results)
    out.write(f"{passed}/{total} cases passed\n")
    return EXIT_OK if passed == total else EXIT_INVARIANT


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    rng = random.Random(args.seed if args.seed is not None else 0)
    run = per_tabulated if args.kind == PER else hc_tabulated
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        inst = Instance.from_rows([[rng.randint(args.lo, args.hi) for _ in range(n)] for _ in range(n)])
        t0 = time.perf_counter()
        value, stats = run(inst, k_override=args.k, threads=args.threads)
        seconds = time.perf_counter() - t0
        row = stats.to_json(value)
        row["seconds"] = round(seconds, 3)
        rows.append(row)
        if not args.json:
            terms = stats.per_prime[0].terms
            distinct = max(s.distinct for s in stats.per_prime)
            out.write(f"n={n:3d} k={stats.k} primes={len(stats.primes)} terms/prime={terms} "
                      f"max distinct={distinct} seconds={seconds:.2f}\n")
    if args.json:
        out.write(json.dumps(rows) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permhc", description="Exact permanents, Hamiltonian cycle counts and ATSP tours.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", "-i", help="instance file, '-' for stdin (default)")
        p.add_argument("--json", action="store_true", help="print a JSON object instead of the bare value")
        p.add_argument("--brute-cap", type=int, default=oracle.DEFAULT_CAP, help="largest n brute force accepts")

    for kind in (PER, HC):
        p = sub.add_parser(kind, help=f"compute {kind} of a weighted digraph")
        common(p)
        p.add_argument("--format", choices=("matrix", "multigraph"), default="matrix")
        p.add_argument("--algo", choices=ALGOS, default="auto")
        p.add_argument("--k", type=int, help="kernel size for the tabulated algorithm")
        p.add_argument("--threads", type=int, default=1, help="workers per prime; output does not depend on it")
        p.add_argument("--check", action="store_true", help="recompute every residue directly (slow)")
        p.add_argument("--dump-terms", metavar="PATH", help="write the reduction term trace")

    p = sub.add_parser("atsp", help="shortest asymmetric TSP tour ('-' marks an absent arc)")
    common(p)
    p.add_argument("--algo", choices=("auto", "brute", "classic"), default="auto")
    p.add_argument("--max-weight", type=int, help="declared maximum arc weight M")

    p = sub.add_parser("gen", help="emit a seeded random instance")
    p.add_argument("kind", choices=("matrix", "multigraph", "atsp"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--lo", type=int, default=-5)
    p.add_argument("--hi", type=int, default=5)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--max-mult", type=int, default=3)
    p.add_argument("--absent", type=float, default=0.3)

    p = sub.add_parser("selftest", help="run the cross-implementation checks")
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=3, help="instances per size")

    p = sub.add_parser("bench", help="time the tabulated pipeline over a range of n")
    p.add_argument("--kind", choices=(PER, HC), default=PER)
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=1)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    return parser


COMMANDS = {PER: cmd_count, HC: cmd_count, "atsp": cmd_atsp, "gen": cmd_gen, "selftest": cmd_selftest, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (InputError, FieldTooSmallError) as exc:
        print(f"permhc: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"permhc: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

