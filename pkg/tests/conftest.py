import os

import pytest
from hypothesis import HealthCheck, settings

from hybridsat.cnf import parse_dimacs

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def formula(n, *clauses):
    """Formula from DIMACS-style literal tuples; short clauses are padded."""
    return parse_dimacs(
        f"p cnf {n} {len(clauses)}\n" + "".join(" ".join(map(str, c)) + " 0\n" for c in clauses)
    )


@pytest.fixture
def one_clause():
    return formula(1, (1,))


@pytest.fixture
def contradiction():
    return formula(1, (1,), (-1,))


@pytest.fixture
def unsat3():
    import itertools

    cls = [tuple(v if s else -v for v, s in zip((1, 2, 3), signs)) for signs in itertools.product((0, 1), repeat=3)]
    return formula(3, *cls)


# acceptance criteria report: one line per criterion in the terminal summary
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def criterion(request):
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
