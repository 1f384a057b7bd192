"""Exact permanents and Hamiltonian cycle counts by self-reduction and tabulation."""

from .atsp import TruncatedPoly, atsp_shortest, tour_histogram
from .classic import hc_dp, hc_ie, per_ryser
from .core import CanonicalKey, InputError, Instance, InvariantError, IntegerRing, ModRing
from .modular import CrtPlan, crt_reconstruct, select_primes
from .oracle import hc_brute, per_brute, tsp_brute
from .tabulate import RunStats, choose_k, hc_tabulated, per_tabulated

__all__ = [
    "CanonicalKey",
    "CrtPlan",
    "InputError",
    "Instance",
    "IntegerRing",
    "InvariantError",
    "ModRing",
    "RunStats",
    "TruncatedPoly",
    "atsp_shortest",
    "choose_k",
    "crt_reconstruct",
    "hc_brute",
    "hc_dp",
    "hc_ie",
    "hc_tabulated",
    "per_brute",
    "per_ryser",
    "per_tabulated",
    "select_primes",
    "tour_histogram",
    "tsp_brute",
]
