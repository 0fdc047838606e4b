"""Partially Groverized Schöning solvers with emulated Grover inner loops.

Every scheme splits the randomness ``(x0, w)`` of one walk into a part that
is sampled classically in outer loops and a part that is searched by an
(emulated) Grover search:

========  ===============================  ==========================
scheme    classical loops                  Grover search over
========  ===============================  ==========================
GI        tape w (N2)                      all start bits
GW        start x0 (N1)                    all tape positions
FGI       tape w (N2), start head (N1_c)   start tail
FGW       start x0 (N1), tape head (N2_c)  tape tail
EFG       start head + tape head (N_c)     start tail + tape tail
HFGI      one tape per repeat, head (N1_c) start tail
========  ===============================  ==========================

Randomness is addressed by loop indices, so a run is a deterministic
function of its seed. The emulated search result is always fed through the
walk and then checked classically; the ledger counts those checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import __version__, _kernels
from .cnf import Formula, as_assignment, evaluate, format_assignment, pack_states, unpack_states
from .grover import SCHEDULES, CostLedger, SearchSpace, emulate_grover
from .markov import sampling_overhead
from .params import ALL_SCHEMES, SchemeParams, ceil_tol, round_half_up
from .rates import GAMMA_C, fgw_params
from .rng import generator
from .walk import as_tape, sample_hamming_sphere_batch, walk_final

__all__ = [
    "SchemeRun",
    "derive_params",
    "run_scheme",
    "empirical_rate",
    "fit_slope",
    "derandomized_conditional_rate",
    "sphere_experiment",
    "DEFAULT_KNOBS",
]

SQRT2M1 = math.sqrt(2) - 1

DEFAULT_KNOBS = {
    "classical": {"kappa": 1 / 3, "nu": 2 / 3, "mu": 1.0},
    "GI": {"kappa": 1 / 5, "nu": 2 / 3},
    "GW": {"kappa": SQRT2M1, "nu": 2 / 3},
    "FGI": {"z": 0.5, "kappa_c": 1 / 3, "kappa_q": 1 / 3, "nu": 2 / 3},
    "FGW": {"chi": GAMMA_C / 4},
    "EFG": {"z": 0.5, "kappa": 1 / 3, "nu": 2 / 3, "mu": 1.0},
    "HFGI": {"z": 0.5, "mu": 3.0},
}


def _p_start(n: int, k: int) -> float:
    """Probability that a uniform n-bit start sits at distance exactly k."""
    if n == 0:
        return 1.0
    return math.comb(n, k) / 2.0**n


def _p_walk(m: int, v: int) -> float:
    """Probability that exactly v of m steps go down (down-probability 1/3)."""
    if m == 0:
        return 1.0
    return math.comb(m, v) * (1 / 3) ** v * (2 / 3) ** (m - v)


def _check_unit(name, value, lo=0.0, hi=1.0):
    if value is None or not lo <= value <= hi:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


def _share(epsilon: float, probabilities) -> float:
    """Split epsilon evenly over the classical loops that can actually fail."""
    live = sum(1 for p in probabilities if p < 1.0)
    return epsilon / max(live, 1)


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(f"infeasible parameters after rounding: {msg}")


def derive_params(scheme: str, f, epsilon: float = 0.1, **knobs) -> SchemeParams:
    """Integer loop counts for ``scheme`` on an ``n``-variable formula.

    ``f`` may be a :class:`Formula` or just ``n``. Unspecified knobs take the
    rate-optimal defaults in :data:`DEFAULT_KNOBS`. ``kappa n``, ``nu m`` and
    ``mu n`` are rounded half-up; an infeasible rounding raises instead of
    being adjusted.
    """
    n = f.n if isinstance(f, Formula) else int(f)
    if scheme not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {ALL_SCHEMES}")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    unknown = set(knobs) - {
        "kappa", "nu", "mu", "z", "kappa_c", "kappa_q", "mu_c", "mu_q", "nu_c", "nu_q", "chi", "m",
    }
    if unknown:
        raise ValueError(f"unknown knobs: {sorted(unknown)}")
    k = dict(DEFAULT_KNOBS[scheme])
    k.update({key: v for key, v in knobs.items() if v is not None})
    base = dict(scheme=scheme, n=n, epsilon=epsilon)

    if scheme in ("classical", "GI", "GW"):
        kappa, nu = k["kappa"], k["nu"]
        mu = k.get("mu", 3 * kappa)
        _check_unit("kappa", kappa)
        _check_unit("nu", nu)
        _check_unit("mu", mu, 0.0, math.inf)
        d0 = round_half_up(kappa * n)
        m = int(k["m"]) if "m" in k else round_half_up(mu * n)
        v = round_half_up(nu * m)
        _require(d0 <= 2 * v - m, f"kappa n = {d0} > (2 nu - 1) m = {2 * v - m}")
        p1, p2 = _p_start(n, d0), _p_walk(m, v)
        probs = {"E1": p1, "E2": p2}
        knobs_out = dict(kappa=kappa, nu=nu, mu=mu)
        if scheme == "classical":
            N = sampling_overhead(p1 * p2, epsilon)
            return SchemeParams(**base, **knobs_out, m=m, n_c=n, m_c=m, N=N, N1=N, probabilities=probs)
        if scheme == "GI":
            eps = _share(epsilon, [p2])
        else:
            eps = _share(epsilon, [p1])
        N1 = sampling_overhead(p1, eps)
        N2 = sampling_overhead(p2, eps)
        n_c, m_c = (n, 0) if scheme == "GW" else (0, m)
        return SchemeParams(**base, **knobs_out, m=m, n_c=n_c, m_c=m_c, N1=N1, N2=N2, probabilities=probs)

    if scheme == "FGI":
        z, kc, kq, nu = k["z"], k["kappa_c"], k["kappa_q"], k["nu"]
        for name in ("z", "kappa_c", "kappa_q", "nu"):
            _check_unit(name, k[name])
        mu = k.get("mu", 3 * ((1 - z) * kc + z * kq))
        n_c = ceil_tol((1 - z) * n)
        n_q = n - n_c
        dc, dq = round_half_up(kc * n_c), round_half_up(kq * n_q)
        m = int(k["m"]) if "m" in k else round_half_up(mu * n)
        v = round_half_up(nu * m)
        _require(dc + dq <= 2 * v - m, f"initial distance {dc + dq} > (2 nu - 1) m = {2 * v - m}")
        p1c, p1q, p2 = _p_start(n_c, dc), _p_start(n_q, dq), _p_walk(m, v)
        eps = _share(epsilon, [p2, p1c])
        return SchemeParams(
            **base, z=z, kappa_c=kc, kappa_q=kq, nu=nu, mu=mu, m=m, n_c=n_c, m_c=m,
            N2=sampling_overhead(p2, eps),
            N1_c=sampling_overhead(p1c, eps),
            N1_q=sampling_overhead(p1q, eps),
            probabilities={"E1c": p1c, "E1q": p1q, "E2": p2},
        )

    if scheme == "FGW":
        if any(key in knobs for key in ("kappa", "mu_c", "mu_q")):
            kappa = k["kappa"]
            mu_c, mu_q = k.get("mu_c", 0.0), k.get("mu_q", 0.0)
            nu_c, nu_q = k.get("nu_c", 2 / 3), k.get("nu_q", 2 / 3)
            chi = None
        else:
            chi = k["chi"]
            fp = fgw_params(chi)
            kappa, mu_c, mu_q, nu_c, nu_q = fp["kappa"], fp["mu_c"], fp["mu_q"], fp["nu_c"], fp["nu_q"]
        for name, val in (("kappa", kappa), ("nu_c", nu_c), ("nu_q", nu_q)):
            _check_unit(name, val)
        _check_unit("mu_c", mu_c, 0.0, math.inf)
        _check_unit("mu_q", mu_q, 0.0, math.inf)
        d0 = round_half_up(kappa * n)
        m_c, m_q = round_half_up(mu_c * n), round_half_up(mu_q * n)
        v_c, v_q = round_half_up(nu_c * m_c), round_half_up(nu_q * m_q)
        gap = (2 * v_c - m_c) + (2 * v_q - m_q)
        _require(d0 <= gap, f"kappa n = {d0} > walk progress {gap}")
        p1, p2c, p2q = _p_start(n, d0), _p_walk(m_c, v_c), _p_walk(m_q, v_q)
        eps = _share(epsilon, [p1, p2c])
        return SchemeParams(
            **base, kappa=kappa, chi=chi, mu_c=mu_c, mu_q=mu_q, nu_c=nu_c, nu_q=nu_q,
            mu=mu_c + mu_q, m=m_c + m_q, n_c=n, m_c=m_c,
            N1=sampling_overhead(p1, eps),
            N2_c=sampling_overhead(p2c, eps),
            N2_q=sampling_overhead(p2q, eps),
            probabilities={"E1": p1, "E2c": p2c, "E2q": p2q},
        )

    if scheme == "EFG":
        z = k["z"]
        kc = k.get("kappa_c", k["kappa"])
        kq = k.get("kappa_q", k["kappa"])
        nc_ = k.get("nu_c", k["nu"])
        nq_ = k.get("nu_q", k["nu"])
        mu = k["mu"]
        for name, val in (("z", z), ("kappa_c", kc), ("kappa_q", kq), ("nu_c", nc_), ("nu_q", nq_)):
            _check_unit(name, val)
        n_c = ceil_tol((1 - z) * n)
        m = int(k["m"]) if "m" in k else round_half_up(mu * n)
        m_c = ceil_tol((1 - z) * m)
        n_q, m_q = n - n_c, m - m_c
        dc, dq = round_half_up(kc * n_c), round_half_up(kq * n_q)
        v_c, v_q = round_half_up(nc_ * m_c), round_half_up(nq_ * m_q)
        gap = (2 * v_c - m_c) + (2 * v_q - m_q)
        _require(dc + dq <= gap, f"initial distance {dc + dq} > walk progress {gap}")
        pc = _p_start(n_c, dc) * _p_walk(m_c, v_c)
        pq = _p_start(n_q, dq) * _p_walk(m_q, v_q)
        return SchemeParams(
            **base, z=z, kappa=k["kappa"], kappa_c=kc, kappa_q=kq, nu=k["nu"], nu_c=nc_, nu_q=nq_, mu=mu,
            m=m, n_c=n_c, m_c=m_c,
            N_c=sampling_overhead(pc, epsilon),
            N_q=sampling_overhead(pq, epsilon),
            probabilities={"Ec": pc, "Eq": pq},
        )

    # HFGI: loop counts follow the conjectured de-randomised rates with unit constants
    z, mu = k["z"], k["mu"]
    _check_unit("z", z)
    _check_unit("mu", mu, 0.0, math.inf)
    n_c = ceil_tol((1 - z) * n)
    m = int(k["m"]) if "m" in k else round_half_up(mu * n)
    return SchemeParams(
        **base, z=z, mu=mu, m=m, n_c=n_c, m_c=m,
        N1_c=max(1, math.ceil(2 ** (GAMMA_C * (1 - z) * n) - 1e-9)),
        N1_q=2 ** (GAMMA_C * z * n),
        repeats=max(1, math.ceil(math.log2(1 / epsilon) - 1e-9)),
    )


# -- runs -----------------------------------------------------------------------


@dataclass
class SchemeRun:
    scheme: str
    params: SchemeParams
    result: Optional[np.ndarray]
    ledger: CostLedger
    seed: int
    schedule: str = "optimal"
    found_at: Optional[tuple] = None

    @property
    def found(self) -> bool:
        return self.result is not None

    def to_dict(self) -> dict:
        return {
            "tool": "hybridsat",
            "version": __version__,
            "scheme": self.scheme,
            "seed": self.seed,
            "schedule": self.schedule,
            "found": self.found,
            "model": None if self.result is None else format_assignment(self.result),
            "found_at": None if self.found_at is None else list(self.found_at),
            "params": self.params.to_dict(),
            "ledger": self.ledger.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _bits(seed, i, j, count):
    return generator(seed, "x", i, j).integers(0, 2, size=count, dtype=np.uint8)


def _trits(seed, i, j, count):
    return generator(seed, "w", i, j).integers(0, 3, size=count, dtype=np.uint8)


class _Runner:
    def __init__(self, f, params, seed, schedule, force_x0):
        if schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
        if params.n != f.n:
            raise ValueError(f"params were derived for n={params.n}, formula has n={f.n}")
        self.f = f
        self.p = params
        self.seed = seed
        self.schedule = schedule
        self.force_x0 = None if force_x0 is None else as_assignment(force_x0, f.n)
        self.ledger = CostLedger()

    def start(self, i, j=0, count=None):
        if self.force_x0 is not None:
            return self.force_x0.copy() if count is None else self.force_x0[:count].copy()
        return _bits(self.seed, i, j, self.f.n if count is None else count)

    def grover(self, i, j, space, x_fixed, w_fixed, budget):
        return emulate_grover(
            self.f,
            space,
            (x_fixed, w_fixed),
            rng=generator(self.seed, "g", i, j),
            schedule=self.schedule,
            budget=budget,
            ledger=self.ledger,
        )

    def check(self, x0, w):
        """Classical verification of one candidate; returns the model or None."""
        self.ledger.record_query()
        x = walk_final(self.f, x0, w)
        return x if evaluate(self.f, x) else None


def run_scheme(
    scheme: str,
    f: Formula,
    params: Optional[SchemeParams] = None,
    seed: int = 0,
    schedule: str = "optimal",
    force_x0=None,
    epsilon: float = 0.1,
) -> SchemeRun:
    """Execute one scheme; the lowest loop index that succeeds wins.

    ``force_x0`` pins every classically drawn start (a test hook).
    """
    if params is None:
        params = derive_params(scheme, f, epsilon)
    if params.scheme != scheme:
        raise ValueError(f"params belong to scheme {params.scheme!r}, not {scheme!r}")
    r = _Runner(f, params, seed, schedule, force_x0)
    p, n, m = params, f.n, params.m
    found, where = None, None

    if scheme == "classical":
        for i in range(p.N):
            r.ledger.record_loop("outer")
            found = r.check(r.start(i), _trits(seed, i, 0, m))
            if found is not None:
                where = (i,)
                break

    elif scheme == "GI":
        space = SearchSpace.split(n, m, 0, w_free=False)
        for i in range(p.N2):
            r.ledger.record_loop("outer")
            w = _trits(seed, i, 0, m)
            out = r.grover(i, 0, space, None, w, p.N1)
            found = r.check(out.x0, w)
            if found is not None:
                where = (i,)
                break

    elif scheme == "GW":
        space = SearchSpace.split(n, m, x_free=False, w_from=0)
        for i in range(p.N1):
            r.ledger.record_loop("outer")
            x0 = r.start(i)
            out = r.grover(i, 0, space, x0, None, p.N2)
            found = r.check(x0, out.w)
            if found is not None:
                where = (i,)
                break

    elif scheme in ("FGI", "HFGI"):
        space = SearchSpace.split(n, m, p.n_c, w_free=False)
        outer = p.N2 if scheme == "FGI" else p.repeats
        for i in range(outer):
            r.ledger.record_loop("outer")
            w = _trits(seed, i, 0, m)
            for j in range(p.N1_c):
                r.ledger.record_loop("inner")
                x_fixed = np.zeros(n, dtype=np.uint8)
                x_fixed[: p.n_c] = r.start(i, j, p.n_c)
                out = r.grover(i, j, space, x_fixed, w, p.N1_q)
                found = r.check(out.x0, w)
                if found is not None:
                    where = (i, j)
                    break
            if found is not None:
                break

    elif scheme == "FGW":
        space = SearchSpace.split(n, m, x_free=False, w_from=p.m_c)
        for i in range(p.N1):
            r.ledger.record_loop("outer")
            x0 = r.start(i)
            for j in range(p.N2_c):
                r.ledger.record_loop("inner")
                w_fixed = np.zeros(m, dtype=np.uint8)
                w_fixed[: p.m_c] = _trits(seed, i, j, p.m_c)
                out = r.grover(i, j, space, x0, w_fixed, p.N2_q)
                found = r.check(x0, out.w)
                if found is not None:
                    where = (i, j)
                    break
            if found is not None:
                break

    elif scheme == "EFG":
        space = SearchSpace.split(n, m, p.n_c, p.m_c)
        for i in range(p.N_c):
            r.ledger.record_loop("outer")
            x_fixed = np.zeros(n, dtype=np.uint8)
            x_fixed[: p.n_c] = r.start(i, 0, p.n_c)
            w_fixed = np.zeros(m, dtype=np.uint8)
            w_fixed[: p.m_c] = _trits(seed, i, 0, p.m_c)
            out = r.grover(i, 0, space, x_fixed, w_fixed, p.N_q)
            found = r.check(out.x0, out.w)
            if found is not None:
                where = (i,)
                break
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    if found is not None and not evaluate(f, found):  # pragma: no cover - guarded by check()
        raise AssertionError("returned assignment does not satisfy the formula")
    return SchemeRun(scheme, params, found, r.ledger, seed, schedule, where)


# -- experiments --------------------------------------------------------------------


def fit_slope(xs, ys) -> float:
    slope, _ = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope)


def empirical_rate(
    scheme: str,
    family: Callable,
    n_list,
    trials: int,
    seed: int,
    epsilon: float = 0.5,
    schedule: str = "optimal",
    **knobs,
):
    """Per n: mean and standard error of log2(total cost) / n over ``trials`` instances.

    ``family(n, seed)`` returns a Formula or ``(Formula, x_star)``. The cost
    of a run is its classical queries plus its Grover iterations.
    """
    rows = []
    for n in n_list:
        vals = []
        for t in range(trials):
            inst = family(n, _sub_seed(seed, "instance", n, t))
            f = inst[0] if isinstance(inst, tuple) else inst
            params = derive_params(scheme, f, epsilon, **knobs)
            run = run_scheme(scheme, f, params, _sub_seed(seed, "run", n, t), schedule)
            vals.append(math.log2(max(run.ledger.total_cost, 1)) / n)
        arr = np.asarray(vals)
        se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else float("nan")
        rows.append({"n": n, "rate": float(arr.mean()), "stderr": se, "trials": trials})
    return rows


def _sub_seed(seed, *path) -> int:
    return int(generator(seed, "sub-seed", *path).integers(0, 2**62))


def _all_final_states(f: Formula, w: np.ndarray) -> np.ndarray:
    """Packed final state of the walk driven by ``w`` from every start."""
    size = 1 << f.n
    if f.table_feasible():
        return _kernels.table_walk_shared(f.table, np.arange(size, dtype=np.int64), w.astype(np.int64))
    out = np.empty(size, dtype=np.int64)
    chunk = 1 << 18
    for start in range(0, size, chunk):
        s = np.arange(start, min(start + chunk, size), dtype=np.int64)
        X, _ = _kernels.walk_batch_shared(f.var, f.neg, unpack_states(s, f.n), w)
        out[start:start + s.size] = pack_states(X)
    return out


def derandomized_conditional_rate(f: Formula, x_star, w) -> dict:
    """Exact hit statistics of one fixed tape over all 2^n starts.

    Per Hamming radius h around ``x_star``: the fraction of starts whose walk
    ends at ``x_star``. The aggregate rate is that of a Grover search over
    starts with this tape, ``-log2(Pr_x[walk ends in a model]) / (2n)``.
    """
    from .cnf import _check_enum

    _check_enum(f.n)
    x_star = as_assignment(x_star, f.n)
    if not evaluate(f, x_star):
        raise ValueError("x_star does not satisfy the formula")
    w = as_tape(w)
    final = _all_final_states(f, w)
    starts = np.arange(1 << f.n, dtype=np.int64)
    target = int(pack_states(x_star[None, :])[0])
    dist = _popcount(starts ^ target)
    hit = final == target
    if f.table_feasible():
        solved = f.table[final, 0] == final
    else:
        solved = _kernels.first_violated_batch(f.var, f.neg, unpack_states(final, f.n)) < 0
    per_h = []
    for h in range(f.n + 1):
        sel = dist == h
        total = int(sel.sum())
        hits = int(hit[sel].sum())
        frac = hits / total
        per_h.append(
            {
                "h": h,
                "hits": hits,
                "total": total,
                "fraction": frac,
                "rate": (-math.log2(frac) / f.n) if frac > 0 else math.inf,
                "theory": 2.0**-h,
            }
        )
    p = float(solved.mean())
    return {
        "n": f.n,
        "m": int(w.shape[0]),
        "oracle_fraction": p,
        "target_fraction": float(hit.mean()),
        "rate": (-math.log2(p) / (2 * f.n)) if p > 0 else math.inf,
        "per_h": per_h,
    }


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint64)
    count = np.zeros(a.shape, dtype=np.int64)
    while a.any():
        count += (a & np.uint64(1)).astype(np.int64)
        a >>= np.uint64(1)
    return count


def sphere_experiment(
    f: Formula, x_star, h_max: int, samples: int, mu: float = 3.0, seed: int = 0, w=None, chunk: int = 1 << 14
):
    """Monte Carlo Pr[walk from a uniform point at distance h ends at x_star], one fixed tape.

    Returns rows ``{h, estimate, stderr, theory}`` with theory 2^-h.
    """
    x_star = as_assignment(x_star, f.n)
    if not 0 <= h_max <= f.n:
        raise ValueError(f"h_max={h_max} outside [0, {f.n}]")
    if samples < 1:
        raise ValueError("samples must be positive")
    if w is None:
        m = round_half_up(mu * f.n)
        w = generator(seed, "sphere-tape").integers(0, 3, size=m, dtype=np.uint8)
    w = as_tape(w)
    rows = []
    for h in range(h_max + 1):
        hits = 0
        for c, start in enumerate(range(0, samples, chunk)):
            count = min(chunk, samples - start)
            X0 = sample_hamming_sphere_batch(x_star, h, count, seed, c)
            X, _ = _kernels.walk_batch_shared(f.var, f.neg, X0, w)
            hits += int((X == x_star[None, :]).all(axis=1).sum())
        p = hits / samples
        rows.append(
            {"h": h, "estimate": p, "stderr": math.sqrt(p * (1 - p) / samples), "theory": 2.0**-h, "samples": samples}
        )
    return rows
