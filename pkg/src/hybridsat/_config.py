"""Package-wide limits and defaults."""

import os

ENUM_LIMIT_ENV = "HYBRIDSAT_ENUM_LIMIT"
DEFAULT_ENUM_LIMIT = 26

# largest int64 table (entries) the emulator will allocate
TABLE_ENTRY_LIMIT = 1 << 25

DEFAULT_CLAUSE_RATIO = 4.55
DEFAULT_PLANT_ATTEMPTS = 10_000


def enum_limit() -> int:
    """Maximum variable count for exhaustive sweeps (``2**limit`` points)."""
    raw = os.environ.get(ENUM_LIMIT_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_ENUM_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENUM_LIMIT_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{ENUM_LIMIT_ENV} must be positive, got {value}")
    return value
