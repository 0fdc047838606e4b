"""Idealised Hamming-distance walks and the coupling to the true walk.

* The walk on the integers steps down with probability ``q_down`` (1/3) and
  up otherwise; ``z_walk_success`` is the probability that it sits at or
  below zero after ``m`` steps, starting from Binomial(n, 1/2).
* The absorbing walk on the naturals is run alongside a real walk
  (``coupled_walk``) and dominates its Hamming distance to a fixed model.
* ``bijection_q`` is the re-labelling of walk tapes that makes the absorbing
  walk's steps independent and uniform.

Probabilities are floats computed in log space unless ``exact=True``, which
uses :class:`fractions.Fraction` throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .cnf import Formula, as_assignment, evaluate
from .rng import generator
from .walk import as_tape

__all__ = [
    "ZWalkParams",
    "z_walk_success",
    "z_walk_success_given",
    "z_walk_success_dp",
    "z_walk_monte_carlo",
    "absorbing_law",
    "CoupledTrace",
    "default_r_choice",
    "coupled_walk",
    "coupled_batch",
    "coupling_functions",
    "bijection_q",
    "bijection_q_inverse",
    "uniformity_check",
    "sampling_overhead",
]

EXACT_LIMIT = 40
THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class ZWalkParams:
    m: int
    n: Optional[int] = None  # Binomial(n, 1/2) start when set
    start: Optional[int] = None  # point-mass start otherwise
    q_down: float = 1 / 3

    def __post_init__(self):
        if (self.n is None) == (self.start is None):
            raise ValueError("give exactly one of n (binomial start) or start (point mass)")
        if not 0.0 <= float(self.q_down) <= 1.0:
            raise ValueError("q_down must lie in [0, 1]")

    @property
    def q_up(self):
        return 1 - self.q_down

    def success(self, exact: bool = False):
        if self.n is not None:
            return z_walk_success(self.n, self.m, q_down=self.q_down, exact=exact)
        return z_walk_success_given(self.start, self.m, q_down=self.q_down, exact=exact)


def _logaddexp_all(values):
    values = [v for v in values if v != -math.inf]
    if not values:
        return -math.inf
    top = max(values)
    return top + math.log(sum(math.exp(v - top) for v in values))


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _check_q(q_down, exact):
    if not 0 <= q_down <= 1:
        raise ValueError("q_down must lie in [0, 1]")
    if exact:
        return THIRD if (q_down == THIRD or q_down == 1 / 3) else Fraction(q_down)
    return float(q_down)


def _min_down(j: int, m: int) -> int:
    # smallest l with j + m - 2l <= 0
    return max(0, -(-(j + m) // 2))


def z_walk_success_given(j: int, m: int, q_down=THIRD, exact: bool = False):
    """P(d_m <= 0 | d_0 = j) for the walk on the integers."""
    if j < 0 or m < 0:
        raise ValueError("j and m must be non-negative")
    lo = _min_down(j, m)
    if exact:
        q = _check_q(q_down, True)
        return sum(
            (math.comb(m, l) * q**l * (1 - q) ** (m - l) for l in range(lo, m + 1)),
            Fraction(0),
        )
    q = _check_q(q_down, False)
    if lo > m:
        return 0.0
    if q == 0.0:
        return 1.0 if lo == 0 else 0.0
    if q == 1.0:
        return 1.0
    lq, lp = math.log(q), math.log1p(-q)
    return math.exp(_logaddexp_all(_log_comb(m, l) + l * lq + (m - l) * lp for l in range(lo, m + 1)))


def z_walk_success(n: int, m: int, q_down=THIRD, exact: bool = False):
    """P(d_m <= 0) with d_0 ~ Binomial(n, 1/2), as the closed-form double sum."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    if exact:
        if n > EXACT_LIMIT or m > EXACT_LIMIT:
            raise ValueError(f"exact mode supports n, m <= {EXACT_LIMIT}")
        q = _check_q(q_down, True)
        total = Fraction(0)
        for j in range(n + 1):
            for l in range(_min_down(j, m), m + 1):
                total += Fraction(math.comb(n, j), 2**n) * math.comb(m, l) * q**l * (1 - q) ** (m - l)
        return total
    q = _check_q(q_down, False)
    if q in (0.0, 1.0):
        return sum(math.comb(n, j) / 2**n * z_walk_success_given(j, m, q) for j in range(n + 1))
    lq, lp, half = math.log(q), math.log1p(-q), n * math.log(0.5)
    terms = []
    for j in range(n + 1):
        for l in range(_min_down(j, m), m + 1):
            terms.append(half + _log_comb(n, j) + _log_comb(m, l) + l * lq + (m - l) * lp)
    return math.exp(_logaddexp_all(terms))


def z_walk_success_dp(n: int, m: int, q_down=THIRD, exact: bool = False):
    """Same quantity by propagating the distance distribution step by step."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    q = _check_q(q_down, exact)
    offset = m  # index i holds distance i - offset
    size = n + 2 * m + 1
    if exact:
        dist = [Fraction(0)] * size
        for j in range(n + 1):
            dist[j + offset] = Fraction(math.comb(n, j), 2**n)
        for _ in range(m):
            nxt = [Fraction(0)] * size
            for i, p in enumerate(dist):
                if p:
                    nxt[i - 1] += p * q
                    nxt[i + 1] += p * (1 - q)
            dist = nxt
        return sum(dist[: offset + 1], Fraction(0))
    dist = np.zeros(size)
    for j in range(n + 1):
        dist[j + offset] = math.comb(n, j) / 2.0**n
    for _ in range(m):
        nxt = np.zeros(size)
        nxt[:-1] += q * dist[1:]
        nxt[1:] += (1 - q) * dist[:-1]
        dist = nxt
    return float(dist[: offset + 1].sum())


def z_walk_monte_carlo(n: int, m: int, samples: int, seed: int, q_down: float = 1 / 3, chunk: int = 1 << 18):
    """Step-by-step simulation of the integer walk; returns ``(estimate, stderr)``."""
    hits = 0
    for c, start in enumerate(range(0, samples, chunk)):
        count = min(chunk, samples - start)
        rng = generator(seed, "z-walk", c)
        d = rng.integers(0, 2, size=(count, n), dtype=np.int8).sum(axis=1, dtype=np.int64)
        for _ in range(m):
            down = rng.random(count) < q_down
            d += np.where(down, -1, 1)
        hits += int((d <= 0).sum())
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


def absorbing_law(j: int, m: int, q_down=THIRD, exact: bool = False):
    """Law of the absorbing walk after ``m`` steps from ``j`` (0 absorbs).

    Returns a list indexed by distance 0 .. j + m.
    """
    q = _check_q(q_down, exact)
    zero = Fraction(0) if exact else 0.0
    dist = [zero] * (j + m + 1)
    dist[j] = Fraction(1) if exact else 1.0
    for _ in range(m):
        nxt = [zero] * (j + m + 1)
        nxt[0] += dist[0]
        for d in range(1, j + m):
            p = dist[d]
            if p:
                nxt[d - 1] += p * q
                nxt[d + 1] += p * (1 - q)
        dist = nxt
    return dist


# -- coupling -----------------------------------------------------------------


@dataclass(frozen=True)
class CoupledTrace:
    x_states: np.ndarray  # (m + 1, n)
    d_tilde: np.ndarray  # (m + 1,)
    d_hamming: np.ndarray  # (m + 1,)
    f_choices: np.ndarray  # (m,), reference symbol used at each step

    def dominated(self) -> bool:
        return bool((self.d_hamming <= self.d_tilde).all())


def default_r_choice(f: Formula, x_star) -> np.ndarray:
    """Per clause, the lowest literal position satisfied by ``x_star``."""
    x_star = as_assignment(x_star, f.n)
    if f.L == 0:
        return np.zeros(0, dtype=np.int64)
    sat = (x_star[f.var] ^ f.neg) == 1
    if not sat.any(axis=1).all():
        raise ValueError("x_star does not satisfy the formula")
    return sat.argmax(axis=1).astype(np.int64)


def _resolve_r(f, x_star, r_choice):
    if r_choice is None:
        return default_r_choice(f, x_star)
    if callable(r_choice):
        r = np.asarray(r_choice(f, x_star), dtype=np.int64)
    else:
        r = np.asarray(r_choice, dtype=np.int64)
    x_star = as_assignment(x_star, f.n)
    if r.shape != (f.L,):
        raise ValueError("r_choice must give one literal position per clause")
    chosen = (x_star[f.var[np.arange(f.L), r]] ^ f.neg[np.arange(f.L), r]) == 1
    if not chosen.all():
        raise ValueError("r_choice must pick literals satisfied by x_star")
    return r


def coupled_walk(f: Formula, x_star, x0, w, r_choice=None) -> CoupledTrace:
    """Run the walk and the absorbing distance process from the same tape."""
    x_star = as_assignment(x_star, f.n)
    if not evaluate(f, x_star):
        raise ValueError("x_star does not satisfy the formula")
    r = _resolve_r(f, x_star, r_choice)
    x = as_assignment(x0, f.n).copy()
    tape = as_tape(w)
    m = tape.shape[0]
    states = np.empty((m + 1, f.n), dtype=np.uint8)
    dt = np.empty(m + 1, dtype=np.int64)
    dh = np.empty(m + 1, dtype=np.int64)
    fc = np.empty(m, dtype=np.int64)
    states[0] = x
    dh[0] = dt[0] = int((x != x_star).sum())
    for l in range(m):
        k = _kernels.first_violated_batch(f.var, f.neg, x[None, :])[0] if f.L else -1
        fc[l] = 0 if (dh[l] == 0 or k < 0) else r[k]
        c = int(tape[l])
        if dt[l] == 0:
            dt[l + 1] = 0
        else:
            dt[l + 1] = dt[l] - 1 if c == fc[l] else dt[l] + 1
        if k >= 0:
            x[f.var[k, c]] ^= 1
        states[l + 1] = x
        dh[l + 1] = int((x != x_star).sum())
    return CoupledTrace(states, dt, dh, fc)


def coupled_batch(f: Formula, x_star, X0, W, r_choice=None):
    """Vectorised coupling; returns (violations per run, final d_tilde, final d_H)."""
    x_star = as_assignment(x_star, f.n)
    if not evaluate(f, x_star):
        raise ValueError("x_star does not satisfy the formula")
    r = _resolve_r(f, x_star, r_choice)
    return _kernels.coupled_batch(
        f.var, f.neg, r, x_star, np.ascontiguousarray(X0, dtype=np.uint8), np.ascontiguousarray(W, dtype=np.uint8)
    )


def coupling_functions(f: Formula, x_star, r_choice=None):
    """The per-step maps f_s(a, b_<s) that drive the coupled process.

    ``a`` is the start assignment and ``b_<s`` the tape prefix; the value is
    the reference symbol of step ``s`` (0 once the walk sits at ``x_star``).
    """
    x_star = as_assignment(x_star, f.n)
    r = _resolve_r(f, x_star, r_choice)

    def make(s):
        def fs(a, prefix):
            x = as_assignment(a, f.n).copy()
            for c in prefix:
                k = _kernels.first_violated_batch(f.var, f.neg, x[None, :])[0] if f.L else -1
                if k >= 0:
                    x[f.var[k, int(c)]] ^= 1
            if (x == x_star).all():
                return 0
            k = _kernels.first_violated_batch(f.var, f.neg, x[None, :])[0] if f.L else -1
            return 0 if k < 0 else int(r[k])

        return fs

    return make


# -- bijection ----------------------------------------------------------------


def _step_fn(f_functions, s):
    if callable(f_functions) and not isinstance(f_functions, Sequence):
        return f_functions(s)
    return f_functions[s]


def bijection_q(f_functions, a, b):
    """``b~_s = (b_s - f_s(a, b_<s)) mod 3``.

    ``f_functions`` is either a sequence of callables ``f_s(a, prefix)`` or a
    factory ``s -> f_s``.
    """
    b = [int(c) for c in b]
    out = [(b[s] - int(_step_fn(f_functions, s)(a, tuple(b[:s])))) % 3 for s in range(len(b))]
    return tuple(int(v) for v in np.asarray(a).reshape(-1)), tuple(out)


def bijection_q_inverse(f_functions, a, b_tilde):
    """Recover ``b`` from ``b~`` step by step: ``b_s = (b~_s + f_s(a, b_<s)) mod 3``."""
    b: list[int] = []
    for s, c in enumerate(b_tilde):
        b.append((int(c) + int(_step_fn(f_functions, s)(a, tuple(b)))) % 3)
    return tuple(int(v) for v in np.asarray(a).reshape(-1)), tuple(b)


def uniformity_check(n: int, l: int, f_functions, transform: Callable | None = None) -> bool:
    """Exact check that the map pushes the uniform law on {0,1}^n x {0,1,2}^l to itself."""
    if n > 4 or l > 5:
        raise ValueError("exhaustive sweep limited to n <= 4 and l <= 5")
    transform = transform or bijection_q
    counts: dict = {}
    for a in itertools.product((0, 1), repeat=n):
        for b in itertools.product((0, 1, 2), repeat=l):
            img = transform(f_functions, a, b)
            key = (tuple(img[0]), tuple(img[1]))
            counts[key] = counts.get(key, 0) + 1
    return len(counts) == 2**n * 3**l and all(v == 1 for v in counts.values())


def sampling_overhead(p: float, epsilon: float) -> int:
    """Smallest N with (1 - p)^N <= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 1.0:
        return 1
    if p == 0.0:
        raise ValueError("success probability 0: no finite sample count suffices")
    N = max(1, math.ceil(math.log(epsilon) / math.log1p(-p)))
    # guard the float ceiling from both sides
    while N > 1 and (1 - p) ** (N - 1) <= epsilon:
        N -= 1
    while (1 - p) ** N > epsilon:
        N += 1
    return N
