"""Desk-scale experiment drivers producing plot-ready tables.

* ``fig6``: exact de-randomised GI rates of random formulas, grouped by
  their solution count t0.
* ``fig7``: hit probability from Hamming spheres around a planted model with
  one fixed tape, against the 2^-h law.
* ``markov_vs_empirical``: walk success frequencies on unique-solution
  instances against the integer-walk lower bound.

Work items are independent and addressed by index, so results do not depend
on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .cnf import count_solutions, default_clause_count, generate_planted, generate_random, solutions
from .hybrid import _sub_seed, derandomized_conditional_rate, fit_slope, sphere_experiment
from .markov import absorbing_law, z_walk_success
from .params import round_half_up
from .rng import generator
from .walk import walk_success_frequency

__all__ = ["pmap", "fig6", "fig6_bins", "fig7", "markov_vs_empirical", "absorbing_success"]


def pmap(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- fig6 ---------------------------------------------------------------------


def _fig6_item(args):
    idx, n, L, seed, mu, unique = args
    s = _sub_seed(seed, "fig6-formula", idx)
    if unique:
        f, x_star = generate_planted(n, L, s, unique=True)
        t0 = 1
    else:
        f = generate_random(n, L, s)
        t0 = count_solutions(f)
        if t0 == 0:
            return {"index": idx, "formula_seed": s, "t0": 0, "rate": math.inf, "oracle_fraction": 0.0}
        x_star = solutions(f)[0]
    w = generator(seed, "fig6-tape", idx).integers(0, 3, size=round_half_up(mu * n), dtype=np.uint8)
    r = derandomized_conditional_rate(f, x_star, w)
    return {"index": idx, "formula_seed": s, "t0": t0, "rate": r["rate"], "oracle_fraction": r["oracle_fraction"]}


def fig6(n: int, formulas: int, seed: int, mu: float = 3.0, L: int | None = None, unique: bool = False, workers: int = 1):
    """One row per formula: solution count t0 and the exact de-randomised rate."""
    L = default_clause_count(n) if L is None else L
    return pmap(_fig6_item, [(i, n, L, seed, mu, unique) for i in range(formulas)], workers)


def t0_bin(t0: int) -> str:
    """Power-of-two bins: 1, 2-3, 4-7, 8-15, ..."""
    lo = 1 << (t0.bit_length() - 1)
    hi = 2 * lo - 1
    return str(lo) if lo == hi else f"{lo}-{hi}"


def fig6_bins(rows) -> list[dict]:
    groups: dict[int, list] = {}
    for r in rows:
        if r["t0"] > 0:
            groups.setdefault(r["t0"].bit_length(), []).append(r["rate"])
    out = []
    for key in sorted(groups):
        vals = groups[key]
        out.append(
            {
                "t0_bin": t0_bin(1 << (key - 1)),
                "count": len(vals),
                "median_rate": float(np.median(vals)),
                "mean_rate": float(np.mean(vals)),
            }
        )
    return out


# -- fig7 ---------------------------------------------------------------------


def fig7(n: int, h_max: int, samples: int, seed: int, mu: float = 3.0, L: int | None = None):
    """Sphere hit estimates around the planted model of one instance, plus the log2 slope."""
    L = default_clause_count(n) if L is None else L
    f, x_star = generate_planted(n, L, seed)
    rows = sphere_experiment(f, x_star, h_max, samples, mu=mu, seed=seed)
    pts = [(r["h"], math.log2(r["estimate"])) for r in rows if r["h"] >= 1 and r["estimate"] > 0]
    slope = fit_slope(*zip(*pts)) if len(pts) >= 2 else math.nan
    return rows, {"n": n, "L": L, "seed": seed, "slope": slope}


# -- markov vs empirical --------------------------------------------------------


def absorbing_success(n: int, m: int, exact: bool = False):
    """P(d~_m = 0) with d~_0 ~ Binomial(n, 1/2)."""
    if exact:
        return sum(Fraction(math.comb(n, j), 2**n) * absorbing_law(j, m, exact=True)[0] for j in range(n + 1))
    return sum(math.comb(n, j) / 2**n * absorbing_law(j, m)[0] for j in range(n + 1))


def _markov_item(args):
    idx, n, m, walks, seed, L = args
    s = _sub_seed(seed, "markov-formula", idx)
    f, x_star = generate_planted(n, L, s, unique=True)
    p = walk_success_frequency(f, m, walks, _sub_seed(seed, "markov-walks", idx), target=x_star)
    return {"index": idx, "formula_seed": s, "empirical": p, "stderr": math.sqrt(max(p * (1 - p), 1e-300) / walks)}


def markov_vs_empirical(n: int, m: int, instances: int, walks: int, seed: int, L: int | None = None, workers: int = 1):
    """Per unique-solution instance: empirical P(x_m = x*) and both model bounds."""
    L = default_clause_count(n) if L is None else L
    bound = z_walk_success(n, m)
    absorbing = absorbing_success(n, m)
    rows = pmap(_markov_item, [(i, n, m, walks, seed, L) for i in range(instances)], workers)
    for r in rows:
        r.update({"n": n, "m": m, "absorbing": absorbing, "z_walk_bound": bound})
        r["z_score"] = (r["empirical"] - bound) / r["stderr"] if r["stderr"] > 0 else math.inf
    return rows
