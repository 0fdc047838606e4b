"""Analytic emulation of Grover search over parts of the walk randomness.

The search space is a subset of the coordinates of ``(x0, w)``: some start
bits and/or some tape positions are free, the rest are pinned. A point is
marked when the walk it defines ends in a model. The emulator counts the
marked points exactly, applies the amplitude law
``sin^2((2k+1) asin sqrt(t/N))`` and samples the measurement outcome.

Counting uses the walk transition table: ``g[d, s]`` is the number of free
tape completions from step ``d`` in packed state ``s`` that end satisfied, so
``t`` is a sum over the free start bits of ``g[0]``. Sampling walks the same
table forward with integer weights, so draws are exactly uniform over the
marked (or unmarked) set.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from ._config import TABLE_ENTRY_LIMIT, enum_limit
from .cnf import Formula, as_assignment, pack_states
from .walk import as_tape

__all__ = [
    "SearchSpace",
    "GroverOutcome",
    "CostLedger",
    "count_marked",
    "grover_iterations",
    "optimal_iterations",
    "calibrated_iterations",
    "grover_success_prob",
    "emulate_grover",
    "estimate_qubits",
    "SCHEDULES",
]

SCHEDULES = ("optimal", "calibrated")
_MAX_FREE_SYMBOLS = 39  # 3**39 < 2**63, keeps per-state counts in int64


@dataclass(frozen=True)
class SearchSpace:
    """Free coordinates of ``(x0, w)`` for a walk of length ``m`` over ``n`` variables."""

    n: int
    m: int
    free_x: tuple = ()
    free_w: tuple = ()

    def __post_init__(self):
        fx = tuple(sorted(int(v) for v in self.free_x))
        fw = tuple(sorted(int(v) for v in self.free_w))
        if len(set(fx)) != len(fx) or len(set(fw)) != len(fw):
            raise ValueError("free coordinates must be distinct")
        if fx and not (0 <= fx[0] and fx[-1] < self.n):
            raise ValueError("free variable index out of range")
        if fw and not (0 <= fw[0] and fw[-1] < self.m):
            raise ValueError("free tape position out of range")
        object.__setattr__(self, "free_x", fx)
        object.__setattr__(self, "free_w", fw)

    @classmethod
    def split(cls, n: int, m: int, x_from: int = 0, w_from: int = 0, x_free: bool = True, w_free: bool = True):
        """Free variables ``x_from..n-1`` and tape positions ``w_from..m-1``."""
        return cls(
            n,
            m,
            tuple(range(x_from, n)) if x_free else (),
            tuple(range(w_from, m)) if w_free else (),
        )

    @property
    def size(self) -> int:
        return 2 ** len(self.free_x) * 3 ** len(self.free_w)

    @property
    def log2_size(self) -> float:
        return len(self.free_x) + len(self.free_w) * math.log2(3)

    def describe(self) -> dict:
        return {"n": self.n, "m": self.m, "free_x": list(self.free_x), "free_w": list(self.free_w), "N": self.size}


@dataclass(frozen=True)
class GroverOutcome:
    x0: np.ndarray
    w: np.ndarray
    was_marked: bool
    iterations: int
    success_prob: float
    marked: int
    size: int


@dataclass
class CostLedger:
    classical_queries: int = 0
    grover_iterations_total: int = 0
    coherent_stretch_max: int = 0
    outer_loop_counts: dict = field(default_factory=dict)

    def record_query(self, count: int = 1) -> None:
        self.classical_queries += int(count)

    def record_grover(self, iterations: int, walk_length: int) -> None:
        self.grover_iterations_total += int(iterations)
        self.coherent_stretch_max = max(self.coherent_stretch_max, int(iterations) * int(walk_length))

    def record_loop(self, name: str, count: int = 1) -> None:
        self.outer_loop_counts[name] = self.outer_loop_counts.get(name, 0) + int(count)

    def merge(self, other: "CostLedger") -> "CostLedger":
        loops = dict(self.outer_loop_counts)
        for k, v in other.outer_loop_counts.items():
            loops[k] = loops.get(k, 0) + v
        return CostLedger(
            self.classical_queries + other.classical_queries,
            self.grover_iterations_total + other.grover_iterations_total,
            max(self.coherent_stretch_max, other.coherent_stretch_max),
            loops,
        )

    @property
    def total_cost(self) -> int:
        return self.classical_queries + self.grover_iterations_total

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outer_loop_counts"] = dict(sorted(d["outer_loop_counts"].items()))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CostLedger":
        return cls(
            int(d["classical_queries"]),
            int(d["grover_iterations_total"]),
            int(d["coherent_stretch_max"]),
            {str(k): int(v) for k, v in d.get("outer_loop_counts", {}).items()},
        )


# -- amplitude law --------------------------------------------------------------


def grover_iterations(N: int, t: int) -> int:
    """floor((pi/4) sqrt(N/t)) for 0 < t < N, else 0."""
    if N < 1 or not 0 <= t <= N:
        raise ValueError("need N >= 1 and 0 <= t <= N")
    if t == 0 or t == N:
        return 0
    return int(math.floor(math.pi / 4 * math.sqrt(N / t)))


def grover_success_prob(N: int, t: int, k: int) -> float:
    if N < 1 or not 0 <= t <= N or k < 0:
        raise ValueError("need N >= 1, 0 <= t <= N and k >= 0")
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * k + 1) * theta) ** 2


def optimal_iterations(N: int, t: int) -> int:
    """The standard schedule, falling back to k = 0 when that is better.

    For t/N above roughly 1/4 the floor schedule can overshoot below the
    unamplified probability t/N; measuring directly is then preferable.
    """
    k = grover_iterations(N, t)
    if k and grover_success_prob(N, t, k) < t / N:
        return 0
    return k


def calibrated_iterations(budget: float) -> int:
    """floor(sqrt(budget)) for a calibrated loop count ``budget``."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    return math.isqrt(int(math.floor(budget)))


# -- exact counting ---------------------------------------------------------------


class _MarkedCounter:
    """Marked counts of one search space with the pinned coordinates applied."""

    def __init__(self, f: Formula, space: SearchSpace, x_fixed, w_fixed):
        if space.n != f.n:
            raise ValueError("search space and formula disagree on n")
        limit = enum_limit()
        if len(space.free_x) > limit:
            raise ValueError(f"{len(space.free_x)} free variables exceed the enumeration limit {limit}")
        if len(space.free_w) > _MAX_FREE_SYMBOLS:
            raise ValueError(f"at most {_MAX_FREE_SYMBOLS} free tape positions are supported")
        self.f = f
        self.space = space
        self.x_fixed = np.zeros(f.n, dtype=np.uint8) if x_fixed is None else as_assignment(x_fixed, f.n).copy()
        self.w_fixed = np.zeros(space.m, dtype=np.uint8) if w_fixed is None else as_tape(w_fixed).copy()
        if self.w_fixed.shape[0] != space.m:
            raise ValueError(f"tape has length {self.w_fixed.shape[0]}, space expects m={space.m}")
        self.free_x = np.asarray(space.free_x, dtype=np.int64)
        self.free_w_mask = np.zeros(space.m, dtype=np.bool_)
        self.free_w_mask[list(space.free_w)] = True
        self.nw = len(space.free_w)
        self._starts()
        if self.nw == 0:
            self._count_fixed_tape()
        else:
            self._count_free_tape()

    def _starts(self):
        # every start consistent with the pinned bits, indexed by the free-bit pattern
        base = self.x_fixed.copy()
        base[self.free_x] = 0
        u = np.arange(1 << self.free_x.size, dtype=np.int64)
        X = np.repeat(base[None, :], u.size, axis=0)
        for pos, v in enumerate(self.free_x):
            X[:, v] = (u >> pos) & 1
        self.X = X

    def _count_fixed_tape(self):
        f = self.f
        if f.table_feasible():
            final = _kernels.table_walk_shared(f.table, pack_states(self.X), self.w_fixed)
            ok = f.table[final, 0] == final
        else:
            Xf, _ = _kernels.walk_batch_shared(f.var, f.neg, self.X, self.w_fixed)
            ok = _kernels.first_violated_batch(f.var, f.neg, Xf) < 0
        self.g0 = ok.astype(np.int64)
        self.g = None

    def _count_free_tape(self):
        f = self.f
        if not f.table_feasible() or (self.space.m + 1) * (1 << f.n) > TABLE_ENTRY_LIMIT:
            raise ValueError(
                f"searching tape positions needs a {(self.space.m + 1)} x 2^{f.n} count table; too large"
            )
        self.g = _kernels.suffix_counts(f.table, self.w_fixed.astype(np.int64), self.free_w_mask)
        self.g0 = self.g[0][pack_states(self.X)]

    @property
    def t(self) -> int:
        if self.g0.size and self.nw * math.log2(3) + math.log2(self.g0.size) >= 62:
            return int(sum(int(v) for v in self.g0))
        return int(self.g0.sum())

    @property
    def N(self) -> int:
        return self.space.size

    def _pick(self, rng, weights) -> int:
        total = sum(int(v) for v in weights) if weights.dtype == object else int(weights.sum())
        r = int(rng.integers(0, total)) if total < 2**63 else int(rng.random() * total)
        cum = np.cumsum(weights)
        return int(np.searchsorted(cum, r, side="right"))

    def sample(self, rng, marked: bool):
        """Uniform point of the marked (or unmarked) set; returns ``(x0, w)``."""
        per_start = 3**self.nw
        weights = self.g0 if marked else per_start - self.g0
        i = self._pick(rng, weights)
        x0 = self.X[i].copy()
        w = self.w_fixed.copy()
        if self.nw == 0:
            return x0, w
        nxt = self.f.table
        s = int(pack_states(x0[None, :])[0])
        remaining = self.nw
        for d in range(self.space.m):
            if not self.free_w_mask[d]:
                s = int(nxt[s, w[d]])
                continue
            remaining -= 1
            children = nxt[s]
            good = self.g[d + 1][children]
            cw = good if marked else 3**remaining - good
            c = self._pick(rng, np.asarray(cw, dtype=np.int64))
            w[d] = c
            s = int(children[c])
        return x0, w


def count_marked(f: Formula, space: SearchSpace, fixed=(None, None)) -> int:
    """Number of points of ``space`` whose walk ends in a model.

    ``fixed`` is ``(x_fixed, w_fixed)``: full-length vectors whose entries at
    free coordinates are ignored.
    """
    x_fixed, w_fixed = fixed
    return _MarkedCounter(f, space, x_fixed, w_fixed).t


def emulate_grover(
    f: Formula,
    space: SearchSpace,
    fixed=(None, None),
    seed: Optional[int] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    schedule: str = "optimal",
    budget: Optional[float] = None,
    ledger: Optional[CostLedger] = None,
) -> GroverOutcome:
    """Sample the measurement outcome of a Grover search over ``space``.

    ``schedule="optimal"`` uses the exact marked count; ``"calibrated"`` runs
    ``floor(sqrt(budget))`` iterations as a blind search would.
    """
    if rng is None:
        if seed is None:
            raise ValueError("give a seed or a generator")
        from .rng import generator

        rng = generator(seed, "grover")
    x_fixed, w_fixed = fixed
    counter = _MarkedCounter(f, space, x_fixed, w_fixed)
    N, t = counter.N, counter.t
    if schedule == "optimal":
        k = optimal_iterations(N, t)
    elif schedule == "calibrated":
        if budget is None:
            raise ValueError("calibrated schedule needs a budget")
        k = calibrated_iterations(budget)
    else:
        raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    p = grover_success_prob(N, t, k)
    hit = t > 0 and (t == N or rng.random() < p)
    x0, w = counter.sample(rng, marked=hit)
    if ledger is not None:
        ledger.record_grover(k, space.m)
    return GroverOutcome(x0, w, bool(hit), k, p, t, N)


def estimate_qubits(n: int, m: int, L: int) -> int:
    """n + ceil(m log2 3) + m ceil(log2 L), each term rounded up on its own."""
    if n < 1 or m < 0 or L < 1:
        raise ValueError("need n >= 1, m >= 0, L >= 1")
    trits = (3**m - 1).bit_length() if m else 0  # smallest q with 2^q >= 3^m
    return n + trits + m * (L - 1).bit_length()
