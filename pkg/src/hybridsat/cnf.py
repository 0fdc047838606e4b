"""3-CNF formulas: data model, DIMACS I/O, generators and exhaustive counting.

Assignments are uint8 numpy vectors; ``x[v]`` is the value of variable ``v``
(DIMACS variable ``v + 1``). Clause order is meaningful: the walk always
repairs the first violated clause.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from ._config import DEFAULT_CLAUSE_RATIO, DEFAULT_PLANT_ATTEMPTS, TABLE_ENTRY_LIMIT, enum_limit
from .rng import generator

__all__ = [
    "Literal",
    "Clause",
    "Formula",
    "DimacsError",
    "as_assignment",
    "format_assignment",
    "parse_dimacs",
    "serialize_dimacs",
    "evaluate",
    "first_violated",
    "count_solutions",
    "solutions",
    "generate_random",
    "generate_planted",
    "default_clause_count",
]


class DimacsError(ValueError):
    """Malformed DIMACS input."""


class Literal(NamedTuple):
    variable: int
    negated: bool = False

    def to_dimacs(self) -> int:
        return -(self.variable + 1) if self.negated else self.variable + 1

    @classmethod
    def from_dimacs(cls, code: int) -> "Literal":
        if code == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(code) - 1, code < 0)


@dataclass(frozen=True)
class Clause:
    literals: tuple

    def __post_init__(self):
        lits = tuple(l if isinstance(l, Literal) else Literal(*l) for l in self.literals)
        if len(lits) != 3:
            raise ValueError(f"a clause has exactly 3 literals, got {len(lits)}")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def of(cls, *codes: int) -> "Clause":
        """Build from DIMACS codes, e.g. ``Clause.of(1, -2, 3)``."""
        return cls(tuple(Literal.from_dimacs(c) for c in codes))

    def __iter__(self):
        return iter(self.literals)


@dataclass(frozen=True)
class Formula:
    n: int
    clauses: tuple = field(default=())

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        clauses = tuple(c if isinstance(c, Clause) else Clause(tuple(c)) for c in self.clauses)
        for j, c in enumerate(clauses):
            for lit in c:
                if not 0 <= lit.variable < self.n:
                    raise ValueError(
                        f"clause {j}: variable {lit.variable + 1} out of range for n={self.n}"
                    )
        object.__setattr__(self, "clauses", clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    @property
    def L(self) -> int:
        return len(self.clauses)

    @cached_property
    def var(self) -> np.ndarray:
        out = np.zeros((self.L, 3), dtype=np.int64)
        for j, c in enumerate(self.clauses):
            out[j] = [lit.variable for lit in c]
        return out

    @cached_property
    def neg(self) -> np.ndarray:
        out = np.zeros((self.L, 3), dtype=np.uint8)
        for j, c in enumerate(self.clauses):
            out[j] = [lit.negated for lit in c]
        return out

    def table_feasible(self) -> bool:
        return self.n <= 62 and (1 << self.n) * 3 <= TABLE_ENTRY_LIMIT

    @cached_property
    def table(self) -> np.ndarray:
        """Walk transition table ``nxt[s, c]`` over packed states (satisfying states are fixed)."""
        if not self.table_feasible():
            raise ValueError(f"transition table for n={self.n} exceeds the memory limit")
        return _kernels.transition_table(self.var, self.neg, self.n)

    def with_clause(self, clause) -> "Formula":
        return Formula(self.n, self.clauses + (clause,))

    def __getstate__(self):
        # drop cached arrays when pickling for worker processes
        return {"n": self.n, "clauses": self.clauses}

    def __setstate__(self, state):
        object.__setattr__(self, "n", state["n"])
        object.__setattr__(self, "clauses", state["clauses"])


def as_assignment(x, n: int | None = None) -> np.ndarray:
    """Coerce a bit string like ``"0101"`` or a sequence of 0/1 into a uint8 vector."""
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise ValueError(f"assignment string must contain only 0/1: {x!r}")
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(x)
        if arr.ndim != 1:
            raise ValueError("assignment must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("assignment entries must be 0 or 1")
    arr = arr.astype(np.uint8)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"assignment has length {arr.shape[0]}, formula has n={n}")
    return arr


def format_assignment(x) -> str:
    return "".join("1" if b else "0" for b in np.asarray(x))


# -- DIMACS -----------------------------------------------------------------

_HEADER = re.compile(r"^p\s+cnf\s+(\S+)\s+(\S+)\s*$")


def parse_dimacs(text) -> Formula:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    header = None
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            m = _HEADER.match(line)
            if not m:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(m.group(1)), int(m.group(2)))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause data before header")
        tokens.extend(line.split())

    if header is None:
        raise DimacsError("missing 'p cnf' header")
    n, expected = header

    clauses = []
    current: list[int] = []
    for tok in tokens:
        try:
            code = int(tok)
        except ValueError:
            raise DimacsError(f"non-integer token {tok!r}") from None
        if code != 0:
            if abs(code) > n:
                raise DimacsError(f"variable {abs(code)} out of range (n={n})")
            current.append(code)
            continue
        if not current:
            raise DimacsError(f"clause {len(clauses) + 1} is empty")
        if len(current) > 3:
            raise DimacsError(f"clause {len(clauses) + 1} has width {len(current)} > 3")
        while len(current) < 3:
            current.append(current[-1])
        clauses.append(Clause.of(*current))
        current = []
    if current:
        raise DimacsError("last clause is not terminated by 0")
    if len(clauses) != expected:
        raise DimacsError(f"header announces {expected} clauses, found {len(clauses)}")
    return Formula(n, tuple(clauses))


def serialize_dimacs(f: Formula) -> bytes:
    lines = [f"p cnf {f.n} {f.L}"]
    for c in f.clauses:
        lines.append(" ".join(str(lit.to_dimacs()) for lit in c) + " 0")
    return ("\n".join(lines) + "\n").encode("ascii")


# -- evaluation ---------------------------------------------------------------


def first_violated(f: Formula, x) -> int | None:
    x = as_assignment(x, f.n)
    if f.L == 0:
        return None
    k = int(_kernels.first_violated_batch(f.var, f.neg, x[None, :])[0])
    return None if k < 0 else k


def evaluate(f: Formula, x) -> bool:
    return first_violated(f, x) is None


def _check_enum(n: int) -> None:
    limit = enum_limit()
    if n > limit:
        raise ValueError(f"n={n} exceeds the enumeration limit {limit}")


def count_solutions(f: Formula, stop_after: int = 0) -> int:
    """Exact model count by enumerating all 2**n assignments.

    With ``stop_after > 0`` the sweep stops once that many models are seen.
    """
    _check_enum(f.n)
    return int(_kernels.count_models(f.var, f.neg, f.n, stop_after))


def solutions(f: Formula) -> np.ndarray:
    """All satisfying assignments as rows, in increasing packed order."""
    _check_enum(f.n)
    if f.table_feasible():
        states = np.flatnonzero(f.table[:, 0] == np.arange(1 << f.n))
    else:
        found = []
        chunk = 1 << 20
        for start in range(0, 1 << f.n, chunk):
            s = np.arange(start, min(start + chunk, 1 << f.n), dtype=np.int64)
            X = unpack_states(s, f.n)
            ok = _kernels.first_violated_batch(f.var, f.neg, X) < 0
            found.append(s[ok])
        states = np.concatenate(found) if found else np.zeros(0, dtype=np.int64)
    return unpack_states(states, f.n)


def pack_states(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    weights = np.left_shift(np.int64(1), np.arange(X.shape[1], dtype=np.int64))
    return X @ weights


def unpack_states(states, n: int) -> np.ndarray:
    states = np.asarray(states, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    return ((states[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


# -- generators ---------------------------------------------------------------


def default_clause_count(n: int, ratio: float = DEFAULT_CLAUSE_RATIO) -> int:
    return int(np.floor(ratio * n + 0.5))


def _random_clauses(rng: np.random.Generator, n: int, L: int):
    var = np.empty((L, 3), dtype=np.int64)
    for j in range(L):
        var[j] = rng.choice(n, size=3, replace=False)
    neg = rng.integers(0, 2, size=(L, 3), dtype=np.uint8)
    return var, neg


def _build(n: int, var: np.ndarray, neg: np.ndarray) -> Formula:
    clauses = tuple(
        Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(var[j], neg[j])))
        for j in range(var.shape[0])
    )
    return Formula(n, clauses)


def generate_random(n: int, L: int | None = None, seed: int = 0) -> Formula:
    """``L`` clauses over 3 distinct variables each, uniform polarities."""
    if n < 3:
        raise ValueError("n must be at least 3")
    if L is None:
        L = default_clause_count(n)
    if L < 0:
        raise ValueError("L must be non-negative")
    rng = generator(seed, "random-cnf", n, L)
    return _build(n, *_random_clauses(rng, n, L))


def _planted_once(rng, n: int, L: int):
    xstar = rng.integers(0, 2, size=n, dtype=np.uint8)
    var = np.empty((L, 3), dtype=np.int64)
    neg = np.empty((L, 3), dtype=np.uint8)
    filled = 0
    while filled < L:
        batch = max(16, 2 * (L - filled))
        cv, cn = _random_clauses(rng, n, batch)
        ok = ((xstar[cv] ^ cn) == 1).any(axis=1)
        take = np.flatnonzero(ok)[: L - filled]
        var[filled:filled + take.size] = cv[take]
        neg[filled:filled + take.size] = cn[take]
        filled += take.size
    return xstar, var, neg


def generate_planted(
    n: int,
    L: int | None = None,
    seed: int = 0,
    unique: bool = False,
    max_attempts: int = DEFAULT_PLANT_ATTEMPTS,
):
    """Random formula satisfied by a hidden assignment ``x_star``.

    Clauses violated by ``x_star`` are rejected. With ``unique=True`` whole
    formulas are redrawn until ``x_star`` is the only model.
    Returns ``(formula, x_star)``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if L is None:
        L = default_clause_count(n)
    if unique:
        _check_enum(n)
    for attempt in range(max_attempts):
        rng = generator(seed, "planted-cnf", n, L, attempt)
        xstar, var, neg = _planted_once(rng, n, L)
        f = _build(n, var, neg)
        if not unique:
            return f, xstar
        if count_solutions(f, stop_after=2) == 1:
            return f, xstar
    raise RuntimeError(f"no unique-solution instance found in {max_attempts} attempts")


def iter_clause_codes(f: Formula) -> Iterable[Sequence[int]]:
    for c in f.clauses:
        yield tuple(lit.to_dimacs() for lit in c)
