"""The Schöning walk as a deterministic map of (start, tape), and the classical solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .cnf import Formula, as_assignment, evaluate
from .rng import generator, walk_block

__all__ = [
    "WalkTape",
    "WalkTrace",
    "as_tape",
    "schoening_walk",
    "oracle",
    "walk_final",
    "solve_classical",
    "ClassicalResult",
    "walk_success_frequency",
    "hamming",
    "sample_hamming_sphere",
    "sample_hamming_sphere_batch",
]


def as_tape(w) -> np.ndarray:
    """Coerce ``"0120"`` or a sequence over {0,1,2} into a uint8 vector."""
    if isinstance(w, WalkTape):
        return w.steps
    if isinstance(w, str):
        if set(w) - {"0", "1", "2"}:
            raise ValueError(f"tape string must contain only 0/1/2: {w!r}")
        arr = np.frombuffer(w.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(w, dtype=np.int64).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() > 2):
            raise ValueError("tape entries must be 0, 1 or 2")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class WalkTape:
    steps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "steps", as_tape(self.steps))

    def __len__(self) -> int:
        return int(self.steps.shape[0])

    @classmethod
    def random(cls, m: int, seed: int, *path) -> "WalkTape":
        return cls(generator(seed, "tape", *path).integers(0, 3, size=m, dtype=np.uint8))


@dataclass(frozen=True)
class WalkTrace:
    states: np.ndarray  # (m + 1, n)
    hit_step: Optional[int]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def m(self) -> int:
        return self.states.shape[0] - 1


def schoening_walk(f: Formula, x0, w) -> WalkTrace:
    """Full trace of the walk; step j flips variable ``w[j]`` of the first violated clause."""
    x = as_assignment(x0, f.n).copy()
    tape = as_tape(w)
    states = np.empty((tape.shape[0] + 1, f.n), dtype=np.uint8)
    states[0] = x
    hit = None
    for j in range(tape.shape[0] + 1):
        k = _kernels.first_violated_batch(f.var, f.neg, x[None, :])[0] if f.L else -1
        if k < 0 and hit is None:
            hit = j
        if j == tape.shape[0]:
            break
        if k >= 0:
            x[f.var[k, tape[j]]] ^= 1
        states[j + 1] = x
    return WalkTrace(states, hit)


def walk_final(f: Formula, x0, w) -> np.ndarray:
    x = as_assignment(x0, f.n)
    X, _ = _kernels.walk_batch_shared(f.var, f.neg, x[None, :].copy(), as_tape(w))
    return X[0]


def oracle(f: Formula, x0, w) -> bool:
    """True iff the walk from ``x0`` driven by ``w`` ends in a satisfying state."""
    return evaluate(f, walk_final(f, x0, w))


@dataclass(frozen=True)
class ClassicalResult:
    assignment: Optional[np.ndarray]
    walks: int  # walks actually run (index of the winner + 1, or N)


def solve_classical(
    f: Formula, N: int, m: int, seed: int, chunk: int = 4096, detailed: bool = False
):
    """Up to ``N`` independent walks of length ``m`` from uniform starts.

    Walk ``i`` always uses the same randomness, so the lowest successful index
    wins no matter how the range is chunked.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if m < 0:
        raise ValueError("m must be non-negative")
    found = None
    used = N
    for start in range(0, N, chunk):
        count = min(chunk, N - start)
        X0, W = walk_block(seed, "classical-walk", start, count, f.n, m)
        X, hit = _kernels.walk_batch(f.var, f.neg, X0, W)
        ok = np.flatnonzero(hit >= 0)
        if ok.size:
            found = X[ok[0]].copy()
            used = start + int(ok[0]) + 1
            break
    result = ClassicalResult(found, used)
    return result if detailed else result.assignment


def walk_success_frequency(
    f: Formula, m: int, walks: int, seed: int, target=None, chunk: int = 1 << 15
) -> float:
    """Fraction of random walks that reach a model (or ``target``, if given)."""
    hits = 0
    target = None if target is None else as_assignment(target, f.n)
    for start in range(0, walks, chunk):
        count = min(chunk, walks - start)
        X0, W = walk_block(seed, "mc-walk", start, count, f.n, m)
        X, hit = _kernels.walk_batch(f.var, f.neg, X0, W)
        if target is None:
            hits += int((hit >= 0).sum())
        else:
            hits += int((X == target[None, :]).all(axis=1).sum())
    return hits / walks


def hamming(x, y) -> int:
    x = as_assignment(x)
    y = as_assignment(y)
    if x.shape != y.shape:
        raise ValueError("assignments differ in length")
    return int((x != y).sum())


def sample_hamming_sphere_batch(x_star, h: int, count: int, seed: int, *path) -> np.ndarray:
    """``count`` independent uniform draws from the radius-``h`` sphere around ``x_star``."""
    x_star = as_assignment(x_star)
    n = x_star.shape[0]
    if not 0 <= h <= n:
        raise ValueError(f"h={h} outside [0, {n}]")
    rng = generator(seed, "sphere", h, *path)
    # the h smallest of n iid uniform keys form a uniform h-subset
    keys = rng.random((count, n))
    flip = np.argpartition(keys, h - 1, axis=1)[:, :h] if 0 < h < n else None
    X = np.repeat(x_star[None, :], count, axis=0)
    if h == n:
        X ^= 1
    elif h > 0:
        rows = np.repeat(np.arange(count), h)
        X[rows, flip.reshape(-1)] ^= 1
    return X


def sample_hamming_sphere(x_star, h: int, seed: int) -> np.ndarray:
    return sample_hamming_sphere_batch(x_star, h, 1, seed)[0]
