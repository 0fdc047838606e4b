"""Scheme parameters: continuous knobs plus the integer loop counts derived from them."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

__all__ = ["SchemeParams", "round_half_up", "HYBRID_SCHEMES", "ALL_SCHEMES"]

HYBRID_SCHEMES = ("GI", "GW", "FGI", "FGW", "EFG", "HFGI")
ALL_SCHEMES = ("classical",) + HYBRID_SCHEMES


def round_half_up(x: float) -> int:
    # the epsilon absorbs float noise such as 0.2 * 10 = 2.0000000000000004 or 1/3 * 12
    return int(math.floor(x + 0.5 + 1e-9))


def ceil_tol(x: float) -> int:
    return int(math.ceil(x - 1e-9))


@dataclass(frozen=True)
class SchemeParams:
    scheme: str
    n: int
    epsilon: float
    # continuous knobs (unused ones stay None)
    kappa: Optional[float] = None
    nu: Optional[float] = None
    mu: Optional[float] = None
    z: Optional[float] = None
    kappa_c: Optional[float] = None
    kappa_q: Optional[float] = None
    mu_c: Optional[float] = None
    mu_q: Optional[float] = None
    nu_c: Optional[float] = None
    nu_q: Optional[float] = None
    chi: Optional[float] = None
    # integer instantiation
    m: int = 0
    n_c: int = 0  # start bits drawn classically
    m_c: int = 0  # tape positions drawn classically
    N1: int = 1
    N2: int = 1
    N1_c: int = 1
    N1_q: float = 1
    N2_c: int = 1
    N2_q: float = 1
    N_c: int = 1
    N_q: float = 1
    N: int = 1
    repeats: int = 1
    probabilities: dict = field(default_factory=dict)

    @property
    def n_q(self) -> int:
        return self.n - self.n_c

    @property
    def m_q(self) -> int:
        return self.m - self.m_c

    def with_updates(self, **kw) -> "SchemeParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_q"] = self.n_q
        d["m_q"] = self.m_q
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SchemeParams":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})
