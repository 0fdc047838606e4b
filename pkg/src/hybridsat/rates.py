"""Entropy calculus and asymptotic runtime / coherence-time rates.

A scheme is described by a point ``(chi, gamma)``: ``gamma`` is the exponent
(base 2, per variable) of the total runtime and ``chi`` that of the longest
coherent Grover stretch. No scheme that Groverizes part of the randomness
can go below the line ``gamma = GAMMA_C - chi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "LOG_BASE",
    "GAMMA_C",
    "SCHEMES",
    "RatePoint",
    "binary_entropy",
    "relative_entropy",
    "rate_classical",
    "rate_gi",
    "rate_gw",
    "rate_fgi",
    "rate_fgw",
    "fgw_params",
    "rate_efg",
    "line_l",
    "optimize_scheme",
    "tradeoff_curve",
    "entropy_binomial_bounds",
    "to_csv",
    "CSV_FIELDS",
]

LOG_BASE = 2.0
GAMMA_C = math.log(4 / 3, LOG_BASE)
FGW_CHI_MAX = 1 / 6  # beyond this the classical walk length 1 - 6 chi is negative
SCHEMES = ("classical", "GI", "GW", "FGI", "FGW", "EFG")
CSV_FIELDS = ("scheme", "chi", "gamma", "kappa", "nu", "mu", "z", "mu_c", "mu_q")

_TOL = 1e-12


def _log(x: float) -> float:
    return math.log(x, LOG_BASE)


@dataclass(frozen=True)
class RatePoint:
    scheme: str
    chi: float
    gamma: float
    params: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = {"scheme": self.scheme, "chi": self.chi, "gamma": self.gamma}
        for key in CSV_FIELDS[3:]:
            out[key] = self.params.get(key, "")
        return out


def binary_entropy(p: float) -> float:
    if not -_TOL <= p <= 1 + _TOL:
        raise ValueError(f"p={p} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    if p in (0.0, 1.0):
        return 0.0
    return -p * _log(p) - (1 - p) * _log(1 - p)


def relative_entropy(p: float, q: float) -> float:
    if not -_TOL <= p <= 1 + _TOL:
        raise ValueError(f"p={p} outside [0, 1]")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q={q} must lie strictly inside (0, 1)")
    p = min(max(p, 0.0), 1.0)
    return -p * _log(q) - (1 - p) * _log(1 - q) - binary_entropy(p)


def _walk_feasible(kappa: float, mu: float, nu: float) -> bool:
    return 0 <= kappa <= 1 and mu >= 0 and 0 <= nu <= 1 and kappa <= (2 * nu - 1) * mu + 1e-12


def rate_classical(mu: float, kappa: float, nu: float) -> float:
    """1 - H(kappa) + mu D(nu || 1/3), provided the walk can close the gap."""
    if not _walk_feasible(kappa, mu, nu):
        raise ValueError(f"infeasible parameters kappa={kappa}, mu={mu}, nu={nu}")
    return 1 - binary_entropy(kappa) + mu * relative_entropy(nu, 1 / 3)


def rate_gi(kappa: float) -> RatePoint:
    if not 0 < kappa <= 0.5:
        raise ValueError("kappa must lie in (0, 1/2]")
    chi = (1 - binary_entropy(kappa)) / 2
    return RatePoint("GI", chi, chi + kappa, {"kappa": kappa, "mu": 3 * kappa, "nu": 2 / 3, "z": 1.0})


def rate_gw(chi: float) -> float:
    if not 0 <= chi <= 0.5:
        raise ValueError("chi must lie in [0, 1/2]")
    return 1 - binary_entropy(2 * chi) + chi


def _gw_point(chi: float) -> RatePoint:
    kappa = 2 * chi
    return RatePoint("GW", chi, rate_gw(chi), {"kappa": kappa, "mu": 3 * kappa, "nu": 2 / 3, "z": 1.0})


def rate_fgi(kappa_c: float, kappa_q: float, z: float) -> RatePoint:
    for name, v in (("kappa_c", kappa_c), ("kappa_q", kappa_q), ("z", z)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name}={v} outside [0, 1]")
    gamma = (1 - z) * (1 - binary_entropy(kappa_c) + kappa_c) + z * (
        (1 - binary_entropy(kappa_q)) / 2 + kappa_q
    )
    chi = z * (1 - binary_entropy(kappa_q)) / 2
    mu = 3 * ((1 - z) * kappa_c + z * kappa_q)
    return RatePoint(
        "FGI", chi, gamma, {"kappa_c": kappa_c, "kappa_q": kappa_q, "z": z, "mu": mu, "nu": 2 / 3}
    )


def rate_fgw(chi: float) -> float:
    if not -_TOL <= chi <= GAMMA_C / 2 + _TOL:
        raise ValueError(f"chi={chi} outside [0, gamma_C/2]")
    return GAMMA_C - chi


def fgw_params(chi: float) -> dict:
    """Walk split realising ``rate_fgw(chi)``: mu_c = 1 - 6 chi, mu_q = 6 chi, nu = 2/3."""
    rate_fgw(chi)
    if chi > FGW_CHI_MAX + _TOL:
        raise ValueError(f"chi={chi} > 1/6 leaves no classical walk segment (mu_c < 0)")
    mu_c = max(1 - 6 * chi, 0.0)
    mu_q = 6 * chi
    return {
        "kappa": 2 * chi + mu_c / 3,
        "mu_c": mu_c,
        "mu_q": mu_q,
        "nu_c": 2 / 3,
        "nu_q": 2 / 3,
        "mu": mu_c + mu_q,
        "nu": 2 / 3,
    }


def rate_efg(z: float) -> RatePoint:
    if not 0 <= z <= 1:
        raise ValueError(f"z={z} outside [0, 1]")
    return RatePoint(
        "EFG",
        z * GAMMA_C / 2,
        (1 - z) * GAMMA_C + z * GAMMA_C / 2,
        {"kappa": 1 / 3, "nu": 2 / 3, "mu": 1.0, "z": z, "mu_c": 1.0, "mu_q": 1.0},
    )


def line_l(chi: float) -> float:
    return GAMMA_C - chi


# -- numerical optimisation ----------------------------------------------------

_XATOL = 1e-10


def _argmin(fn, lo, hi):
    res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": _XATOL})
    return float(res.x), float(res.fun)


def _walk_cost(kappa: float, weight: float = 1.0):
    """min over mu of weight * mu * D(nu(mu) || 1/3) with the walk constraint tight."""
    if kappa <= 0:
        return 0.0, 0.0

    def cost(mu):
        nu = 0.5 + kappa / (2 * mu)
        return weight * mu * relative_entropy(min(nu, 1.0), 1 / 3)

    mu, val = _argmin(cost, kappa * (1 + 1e-9), 20 * max(kappa, 1e-3))
    return mu, val


def _optimize_classical() -> RatePoint:
    def outer(kappa):
        return 1 - binary_entropy(kappa) + _walk_cost(kappa)[1]

    kappa, gamma = _argmin(outer, 1e-6, 0.5)
    mu, _ = _walk_cost(kappa)
    return RatePoint("classical", 0.0, gamma, {"kappa": kappa, "mu": mu, "nu": 0.5 + kappa / (2 * mu)})


def _gi_at(kappa: float) -> RatePoint:
    mu, walk = _walk_cost(kappa)
    chi = (1 - binary_entropy(kappa)) / 2
    return RatePoint("GI", chi, chi + walk, {"kappa": kappa, "mu": mu, "nu": 0.5 + kappa / (2 * mu), "z": 1.0})


def _gw_at(kappa: float) -> RatePoint:
    mu, half_walk = _walk_cost(kappa, weight=0.5)
    return RatePoint(
        "GW",
        half_walk,
        1 - binary_entropy(kappa) + half_walk,
        {"kappa": kappa, "mu": mu, "nu": 0.5 + kappa / (2 * mu), "z": 1.0},
    )


def _kappa_for_gi_chi(chi: float) -> float:
    if chi >= 0.5:
        return 0.0
    if chi <= 0:
        return 0.5
    return brentq(lambda k: (1 - binary_entropy(k)) / 2 - chi, 1e-15, 0.5, xtol=1e-14)


def _optimize_fgi(chi: Optional[float]) -> RatePoint:
    if chi is None:
        kappa, _ = _argmin(lambda k: _gi_at(k).gamma, 1e-6, 0.5)
        p = rate_fgi(1 / 3, kappa, 1.0)
        return RatePoint("FGI", p.chi, _gi_at(kappa).gamma, p.params)
    if chi <= 0:
        return rate_fgi(1 / 3, 1 / 3, 0.0)

    # for each kappa_q, z is pinned by chi; kappa_c is free but only the classical limb sees it
    kc, _ = _argmin(lambda k: 1 - binary_entropy(k) + _walk_cost(k)[1], 1e-6, 0.5)
    kq_max = _kappa_for_gi_chi(chi)

    def gamma_of(kq):
        denom = (1 - binary_entropy(kq)) / 2
        z = min(chi / denom, 1.0)
        return rate_fgi(kc, kq, z).gamma

    kq, _ = _argmin(gamma_of, 1e-6, max(kq_max, 2e-6))
    z = min(chi / ((1 - binary_entropy(kq)) / 2), 1.0)
    return rate_fgi(kc, kq, z)


def _optimize_fgw(chi: Optional[float]) -> RatePoint:
    if chi is None:
        # with no classical segment the scheme is the plain Groverized walk
        kappa, _ = _argmin(lambda k: _gw_at(k).gamma, 1e-6, 0.5)
        g = _gw_at(kappa)
        return RatePoint("FGW", g.chi, g.gamma, dict(g.params, mu_c=0.0, mu_q=g.params["mu"]))

    def gamma_given(mu_c, nu_c):
        kappa = 2 * chi + (2 * nu_c - 1) * mu_c
        if not 0 <= kappa <= 1:
            # finite penalty keeps the bounded search well defined
            return 10.0 + abs(kappa - min(max(kappa, 0.0), 1.0))
        return 1 - binary_entropy(kappa) + mu_c * relative_entropy(nu_c, 1 / 3) + chi

    def inner(mu_c):
        lo = max(0.5 - chi / max(mu_c, 1e-12), 0.0) if mu_c > 0 else 0.5
        nu, val = _argmin(lambda v: gamma_given(mu_c, v), lo, 1.0)
        return nu, val

    mu_c, gamma = _argmin(lambda m: inner(m)[1], 0.0, 2.0)
    nu_c, _ = inner(mu_c)
    kappa = 2 * chi + (2 * nu_c - 1) * mu_c
    return RatePoint(
        "FGW", chi, gamma, {"kappa": kappa, "mu_c": mu_c, "mu_q": 6 * chi, "nu": nu_c, "mu": mu_c + 6 * chi}
    )


def optimize_scheme(scheme: str, chi: Optional[float] = None) -> RatePoint:
    """Minimise the runtime rate numerically, optionally at a fixed coherence rate.

    The closed-form optima are not used here, so the result is an
    independent check of them.
    """
    if scheme == "classical":
        return _optimize_classical()
    if scheme == "GI":
        if chi is None:
            kappa, _ = _argmin(lambda k: _gi_at(k).gamma, 1e-6, 0.5)
            return _gi_at(kappa)
        return _gi_at(_kappa_for_gi_chi(chi))
    if scheme == "GW":
        if chi is None:
            kappa, _ = _argmin(lambda k: _gw_at(k).gamma, 1e-6, 0.5)
            return _gw_at(kappa)
        return _gw_at(2 * chi)
    if scheme == "FGI":
        return _optimize_fgi(chi)
    if scheme == "FGW":
        return _optimize_fgw(chi)
    if scheme == "EFG":
        z = 1.0 if chi is None else min(max(2 * chi / GAMMA_C, 0.0), 1.0)
        return rate_efg(z)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


# -- curves -------------------------------------------------------------------


def _anchor_points():
    return [
        RatePoint("classical", 0.0, GAMMA_C, {"kappa": 1 / 3, "nu": 2 / 3, "mu": 1.0, "z": 0.0}),
        RatePoint("full", GAMMA_C / 2, GAMMA_C / 2, {"kappa": 1 / 3, "nu": 2 / 3, "mu": 1.0, "z": 1.0}),
    ]


def tradeoff_curve(scheme: str, grid: int = 200, with_line: bool = False, with_anchors: bool = False):
    """Sweep of the scheme's (chi, gamma) curve, sorted by chi."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    pts: list[RatePoint] = []
    if scheme == "classical":
        pts = [_anchor_points()[0]]
    elif scheme == "GI":
        pts = [rate_gi(0.5 * (i + 1) / grid) for i in range(grid)]
    elif scheme == "GW":
        pts = [_gw_point(0.25 * i / (grid - 1)) for i in range(grid)]
    elif scheme == "FGI":
        # chord from the classical point to the tangency at kappa_q = 1/3, then the GI branch
        for i in range(grid):
            pts.append(rate_fgi(1 / 3, 1 / 3, i / (grid - 1)))
        for i in range(1, grid):
            kq = 1 / 3 - (1 / 3 - 1 / 5) * i / (grid - 1)
            pts.append(rate_fgi(1 / 3, kq, 1.0))
    elif scheme == "FGW":
        for i in range(grid):
            chi = FGW_CHI_MAX * i / (grid - 1)
            params = fgw_params(chi)
            pts.append(RatePoint("FGW", chi, rate_fgw(chi), params))
    elif scheme == "EFG":
        pts = [rate_efg(i / (grid - 1)) for i in range(grid)]
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if with_line:
        pts += [RatePoint("L", c, line_l(c), {}) for c in np.linspace(0, GAMMA_C / 2, grid)]
    if with_anchors:
        pts += _anchor_points()
    return sorted(pts, key=lambda p: (p.chi, p.gamma))


def to_csv(points, header_comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for p in points:
        row = p.row()
        for key in ("chi", "gamma", "kappa", "nu", "mu", "z", "mu_c", "mu_q"):
            if isinstance(row[key], float):
                row[key] = repr(float(row[key]))
        writer.writerow(row)
    return buf.getvalue()


def entropy_binomial_bounds(n: int, kappa: float):
    """``(lower, upper, exact)`` in log2 for k = round-half-up(kappa n).

    The sandwich is 2^{nH(k/n)}/(n+1) <= C(n, k) <= 2^{nH(k/n)}.
    """
    if n < 1 or n > 1000:
        raise ValueError("n must lie in [1, 1000]")
    if not 0 <= kappa <= 1:
        raise ValueError("kappa must lie in [0, 1]")
    k = int(math.floor(kappa * n + 0.5 + 1e-9))
    h = n * binary_entropy(k / n)
    exact = math.log2(math.comb(n, k))
    return h - math.log2(n + 1), h, exact
