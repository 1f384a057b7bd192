"""Instances, scalar rings, file ingestion and canonical keys."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence


class InputError(ValueError):
    """Malformed or out-of-range user input."""


class InvariantError(AssertionError):
    """An internal correctness check failed."""


class IntegerRing:
    tag = "int"
    zero = 0
    one = 1

    def norm(self, x: int) -> int:
        return x

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntegerRing)

    def __hash__(self) -> int:
        return hash(self.tag)

    def __repr__(self) -> str:
        return "IntegerRing()"


class ModRing:
    """Z_p with residues kept as plain ints in [0, p)."""

    tag = "mod"
    zero = 0
    one = 1

    def __init__(self, p: int):
        if p < 2:
            raise ValueError(f"modulus must be >= 2, got {p}")
        self.p = p

    def norm(self, x: int) -> int:
        return x % self.p

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModRing) and other.p == self.p

    def __hash__(self) -> int:
        return hash((self.tag, self.p))

    def __repr__(self) -> str:
        return f"ModRing({self.p})"


INTEGERS = IntegerRing()


@dataclass(frozen=True)
class Instance:
    """Complete weighted digraph on vertices 1..n.

    ``weights[i][j]`` holds the weight of the arc (i+1) -> (j+1); the
    diagonal holds self-loop weights.
    """

    n: int
    weights: tuple[tuple[Any, ...], ...]
    ring: Any = INTEGERS

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"instance needs n >= 1, got {self.n}")
        if len(self.weights) != self.n or any(len(row) != self.n for row in self.weights):
            raise InputError(f"weights must be {self.n}x{self.n}")
        if isinstance(self.ring, ModRing):
            p = self.ring.p
            for row in self.weights:
                for x in row:
                    if not (isinstance(x, int) and 0 <= x < p):
                        raise InputError(f"entry {x!r} is not a normalized residue mod {p}")
        elif isinstance(self.ring, IntegerRing):
            for row in self.weights:
                for x in row:
                    if not isinstance(x, int):
                        raise InputError(f"entry {x!r} is not an integer")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[Any]], ring: Any = INTEGERS) -> "Instance":
        weights = tuple(tuple(ring.norm(x) if isinstance(ring, ModRing) else x for x in row) for row in rows)
        return cls(len(weights), weights, ring)

    @property
    def ring_tag(self) -> str:
        return self.ring.tag

    def f(self, u: int, v: int) -> Any:
        """Weight of arc u -> v, 1-indexed labels."""
        return self.weights[u - 1][v - 1]

    def rows(self) -> list[list[Any]]:
        return [list(row) for row in self.weights]


@dataclass(frozen=True, order=True)
class CanonicalKey:
    """Key of a k x k matrix over Z_p: header (k, p), row-major residues."""

    k: int
    p: int
    body: tuple[int, ...]

    @classmethod
    def of(cls, inst: Instance) -> "CanonicalKey":
        if not isinstance(inst.ring, ModRing):
            raise TypeError("canonical keys are defined for Z_p instances only")
        return cls(inst.n, inst.ring.p, tuple(x for row in inst.weights for x in row))

    def to_instance(self) -> Instance:
        k = self.k
        rows = [self.body[i * k:(i + 1) * k] for i in range(k)]
        return Instance(k, tuple(tuple(r) for r in rows), ModRing(self.p))

    def __str__(self) -> str:
        return f"{self.k}:{self.p}:" + ",".join(map(str, self.body))


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise InputError(f"line {lineno}: {token!r} is not an integer") from None


def parse_matrix_rows(text: str, absent: str | None = None) -> list[list[Any]]:
    """Parse the matrix format; tokens equal to ``absent`` become None."""
    lines = _content_lines(text)
    if not lines:
        raise InputError("line 1: missing vertex count")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 1:
        raise InputError(f"line {lineno}: expected a single vertex count, got {head!r}")
    n = _parse_int(parts[0], lineno)
    if n < 1:
        raise InputError(f"line {lineno}: vertex count must be >= 1, got {n}")
    body = lines[1:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else lineno
        raise InputError(f"line {where}: expected {n} matrix rows, found {len(body)}")
    rows = []
    for i, (ln, line) in enumerate(body, start=1):
        tokens = line.split()
        if len(tokens) != n:
            raise InputError(f"line {ln}: row {i} has {len(tokens)} of {n} entries")
        rows.append([None if tok == absent else _parse_int(tok, ln) for tok in tokens])
    return rows


def ingest_matrix(text: str) -> Instance:
    return Instance.from_rows(parse_matrix_rows(text))


def ingest_multigraph(text: str) -> Instance:
    """Aggregate an arc list into dense integer arc weights."""
    lines = _content_lines(text)
    if not lines:
        raise InputError("line 1: missing header 'n m'")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2:
        raise InputError(f"line {lineno}: expected header 'n m', got {head!r}")
    n, m = (_parse_int(t, lineno) for t in parts)
    if n < 1 or m < 0:
        raise InputError(f"line {lineno}: invalid header n={n} m={m}")
    arcs = lines[1:]
    if len(arcs) != m:
        raise InputError(f"line {lineno}: header declares {m} arcs, found {len(arcs)}")
    w = [[0] * n for _ in range(n)]
    for ln, line in arcs:
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise InputError(f"line {ln}: expected 'u v' or 'u v mult'")
        u, v = _parse_int(tokens[0], ln), _parse_int(tokens[1], ln)
        mult = _parse_int(tokens[2], ln) if len(tokens) == 3 else 1
        for x in (u, v):
            if not 1 <= x <= n:
                raise InputError(f"line {ln}: vertex {x} out of range 1..{n}")
        if mult < 0:
            raise InputError(f"line {ln}: negative multiplicity {mult}")
        w[u - 1][v - 1] += mult
    return Instance.from_rows(w)


def serialize_matrix(inst: Instance, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.append(str(inst.n))
    lines.extend(" ".join(str(x) for x in row) for row in inst.weights)
    return "\n".join(lines) + "\n"


def serialize_multigraph(inst: Instance, header: str | None = None) -> str:
    arcs = [
        f"{i + 1} {j + 1} {x}"
        for i, row in enumerate(inst.weights)
        for j, x in enumerate(row)
        if x
    ]
    lines = [f"# {header}"] if header else []
    lines.append(f"{inst.n} {len(arcs)}")
    lines.extend(arcs)
    return "\n".join(lines) + "\n"


def max_abs_weight(inst: Instance) -> int:
    return max(abs(x) for row in inst.weights for x in row)
