"""Seeded cross-implementation checks behind the ``selftest`` command.

Every check compares two independently computed answers on random
instances and records how many of its cases agreed.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import classic, oracle
from .atsp import atsp_shortest, tour_histogram
from .core import Instance
from .modular import CrtPlan, crt_reconstruct, mod_reduce_instance, next_prime
from .selfreduce import HC, PER, ReductionEngine, extraction_weights, point_count, term_count
from .tabulate import BATCH_EVALUATORS, hc_tabulated, per_tabulated


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    total: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, good: bool, detail: str) -> None:
        self.total += 1
        if good:
            self.passed += 1
        elif len(self.failures) < 5:
            self.failures.append(detail)


def random_matrix(rng: random.Random, n: int, lo: int, hi: int) -> Instance:
    return Instance.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


def random_atsp(rng: random.Random, n: int, M: int, absent: float) -> list[list[int | None]]:
    return [[None if rng.random() < absent else rng.randint(0, M) for _ in range(n)] for _ in range(n)]


def reduction_field(n: int, k: int) -> int:
    """Smallest prime above both n^2 and (n-k)n, as used by the reduction sweeps."""
    return next_prime(max(n * n, (n - k) * n))


def reduction_sum(inst_p: Instance, k: int, kind: str) -> tuple[int, int]:
    """(sum of coeff * count(small) mod p, number of terms) for one reduction."""
    engine = ReductionEngine(inst_p, k, kind)
    evaluate = BATCH_EVALUATORS[kind]
    p = engine.p
    total = 0
    terms = 0
    for batch in engine.batches():
        smalls = np.ascontiguousarray(batch.smalls).reshape(-1, k, k)
        counts = evaluate(smalls, p)
        total = (total + int((counts * batch.coeffs.reshape(-1) % p).sum())) % p
        terms += counts.shape[0]
    return total, terms


def check_classic(rng: random.Random, max_n: int, count: int) -> list[CheckResult]:
    per = CheckResult("per: ryser = brute")
    hc_ie = CheckResult("hc: inclusion-exclusion = brute")
    hc_dp = CheckResult("hc: subset dp = brute")
    cover = CheckResult("per: cycle covers = brute")
    for n in range(1, max_n + 1):
        for _ in range(count):
            inst = random_matrix(rng, n, -5, 5)
            P, H = oracle.per_brute(inst), oracle.hc_brute(inst)
            per.record(classic.per_ryser(inst) == P, f"n={n} {inst.rows()}")
            hc_ie.record(classic.hc_ie(inst) == H, f"n={n} {inst.rows()}")
            hc_dp.record(classic.hc_dp(inst) == H, f"n={n} {inst.rows()}")
            if n <= 6:
                cover.record(oracle.cycle_cover_sum(inst) == P, f"n={n} {inst.rows()}")
    return [per, hc_ie, hc_dp, cover]


def check_reduction(rng: random.Random, max_n: int, count: int) -> list[CheckResult]:
    results = {PER: CheckResult("per reduction sums to per mod p"), HC: CheckResult("hc reduction sums to hc mod p")}
    brute = {PER: oracle.per_brute, HC: oracle.hc_brute}
    for n in range(2, min(max_n, 9) + 1):
        for k in range(1, n):
            p = reduction_field(n, k)
            for _ in range(count):
                inst = random_matrix(rng, n, 0, p - 1)
                inst_p = mod_reduce_instance(inst, p)
                for kind in (PER, HC):
                    if kind == HC and k < 2:
                        continue
                    got, terms = reduction_sum(inst_p, k, kind)
                    want = brute[kind](inst_p)
                    good = got == want and terms == term_count(n, k, kind)
                    results[kind].record(good, f"n={n} k={k} p={p}: {got} vs {want}, {terms} terms")
    return list(results.values())


def check_interpolation(max_n: int) -> CheckResult:
    res = CheckResult("extraction weights pick one coefficient")
    for n in range(2, max(max_n, 2) + 1):
        for k in range(1, n):
            p = reduction_field(n, k)
            for kind in (PER, HC):
                m = point_count(n, k, kind)
                if p < m:
                    continue
                points = list(range(m))
                t = n - k
                w = extraction_weights(points, t, p)
                good = all(
                    sum(wj * pow(r, s, p) for wj, r in zip(w, points)) % p == (1 if s == t else 0)
                    for s in range(m)
                )
                res.record(good, f"m={m} p={p} t={t}")
    return res


def check_crt(rng: random.Random, count: int) -> CheckResult:
    res = CheckResult("crt roundtrip in the balanced range")
    plan = CrtPlan.from_primes([101, 103, 107, 109])
    for _ in range(count):
        x = rng.randrange(plan.low, plan.high)
        got = crt_reconstruct([x % p for p in plan.primes], plan)
        res.record(got == x, f"{x} -> {got}")
    return res


def check_tabulated(rng: random.Random, max_n: int, count: int) -> list[CheckResult]:
    per = CheckResult("per: tabulated = brute")
    hc = CheckResult("hc: tabulated = brute")
    for n in range(2, min(max_n, 9) + 1):
        for _ in range(count):
            inst = random_matrix(rng, n, -10, 10)
            P, H = oracle.per_brute(inst), oracle.hc_brute(inst)
            for k in range(1, n):
                per.record(per_tabulated(inst, k_override=k)[0] == P, f"n={n} k={k} {inst.rows()}")
                hc.record(hc_tabulated(inst, k_override=k)[0] == H, f"n={n} k={k} {inst.rows()}")
    return [per, hc]


def check_atsp(rng: random.Random, max_n: int, count: int) -> list[CheckResult]:
    shortest = CheckResult("atsp: shortest tour = brute")
    hist = CheckResult("atsp: coefficients = tour histogram")
    for n in range(1, max_n + 1):
        for _ in range(count):
            w = random_atsp(rng, n, 10, 0.3)
            shortest.record(atsp_shortest(w, 10) == oracle.tsp_brute(w), f"n={n} {w}")
            if n <= 7:
                want = dict(Counter(oracle.tour_weights(w)))
                hist.record(tour_histogram(w, 10) == want, f"n={n} {w}")
    return [shortest, hist]


def run_selftest(max_n: int = 8, seed: int = 1, count: int = 3) -> list[CheckResult]:
    rng = random.Random(seed)
    suites: list[Callable[[], list[CheckResult]]] = [
        lambda: check_classic(rng, max_n, count),
        lambda: check_reduction(rng, max_n, max(1, count // 2)),
        lambda: [check_interpolation(max_n)],
        lambda: [check_crt(rng, 50 * count)],
        lambda: check_tabulated(rng, max_n, max(1, count // 2)),
        lambda: check_atsp(rng, max_n, count),
    ]
    results: list[CheckResult] = []
    for suite in suites:
        results.extend(suite())
    return results

