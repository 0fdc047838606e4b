import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridsat.cnf import (
    Clause,
    DimacsError,
    Formula,
    Literal,
    count_solutions,
    default_clause_count,
    evaluate,
    first_violated,
    generate_planted,
    generate_random,
    iter_clause_codes,
    pack_states,
    parse_dimacs,
    serialize_dimacs,
    solutions,
    unpack_states,
)

from conftest import formula


def brute_sat(codes, x):
    """Independent evaluator on DIMACS codes; x[i] is variable i+1."""
    return all(any((x[abs(c) - 1] == 1) != (c < 0) for c in cl) for cl in codes)


def brute_count(n, codes):
    return sum(brute_sat(codes, x) for x in itertools.product((0, 1), repeat=n))


@st.composite
def formulas(draw, max_n=7, max_L=12):
    n = draw(st.integers(1, max_n))
    L = draw(st.integers(0, max_L))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clauses = draw(st.lists(st.tuples(lit, lit, lit), min_size=L, max_size=L))
    return Formula(n, tuple(Clause.of(*c) for c in clauses))


# -- parse / serialize --------------------------------------------------------


def test_parse_single_clause():
    f = parse_dimacs("p cnf 3 1\n1 2 3 0\n")
    assert f.n == 3 and f.clauses == (Clause.of(1, 2, 3),)


def test_parse_pads_short_clause():
    f = parse_dimacs("p cnf 1 1\n1 0\n")
    assert f.clauses == (Clause.of(1, 1, 1),)


def test_parse_rejects_out_of_range_variable():
    with pytest.raises(DimacsError, match="variable 3 out of range"):
        parse_dimacs("p cnf 2 1\n1 -2 3 0\n")


@pytest.mark.parametrize(
    "text",
    [
        "1 2 3 0\n",
        "p cnf 3 1\np cnf 3 1\n1 2 3 0\n",
        "p cnf x 1\n1 2 3 0\n",
        "p cnf 3 1\n1 a 3 0\n",
        "p cnf 3 1\n0\n",
        "p cnf 4 1\n1 2 3 4 0\n",
        "p cnf 3 1\n1 2 3\n",
        "p cnf 3 2\n1 2 3 0\n",
        "",
    ],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(DimacsError):
        parse_dimacs(text)


def test_parse_comments_and_percent_terminator():
    f = parse_dimacs(b"c hello\np cnf 3 2\n1 -2\n 3 0 -1 0\n%\n0\n")
    assert [list(c) for c in iter_clause_codes(f)] == [[1, -2, 3], [-1, -1, -1]]


def test_serialize_examples():
    assert serialize_dimacs(Formula(3, (Clause.of(1, 2, 3),))) == b"p cnf 3 1\n1 2 3 0\n"
    assert serialize_dimacs(Formula(1, (Clause.of(1, 1, 1),))) == b"p cnf 1 1\n1 1 1 0\n"


def test_serialize_round_trip_20_variables():
    data = serialize_dimacs(generate_random(20, 91, seed=4))
    assert serialize_dimacs(parse_dimacs(data)) == data


@given(formulas())
def test_round_trip_property(f):
    assert parse_dimacs(serialize_dimacs(f)) == f


def test_literal_codes():
    assert Literal.from_dimacs(-3) == Literal(2, True)
    assert Literal(2, True).to_dimacs() == -3
    with pytest.raises(ValueError):
        Literal.from_dimacs(0)
    with pytest.raises(ValueError):
        Clause.of(1, 2)
    with pytest.raises(ValueError):
        Formula(2, (Clause.of(1, 2, 3),))


# -- evaluation ---------------------------------------------------------------


def test_evaluate_examples(contradiction):
    f = formula(3, (1, 2, 3))
    assert not evaluate(f, "000")
    assert evaluate(f, "100")
    assert not evaluate(contradiction, "0") and not evaluate(contradiction, "1")


def test_first_violated_examples():
    f = formula(3, (1, 2, 3))
    assert first_violated(f, "100") is None
    assert first_violated(f, "000") == 0
    assert first_violated(formula(2, (1,), (2,)), "10") == 1


def test_count_examples(contradiction):
    assert count_solutions(formula(3, (1, 2, 3))) == 7
    assert count_solutions(Formula(2, ())) == 4
    assert count_solutions(contradiction) == 0


@given(formulas(), st.data())
def test_first_violated_matches_evaluate(f, data):
    x = data.draw(st.lists(st.integers(0, 1), min_size=f.n, max_size=f.n))
    codes = list(iter_clause_codes(f))
    k = first_violated(f, x)
    assert (k is None) == evaluate(f, x) == brute_sat(codes, x)
    if k is not None:
        assert not brute_sat(codes[k : k + 1], x)
        assert brute_sat(codes[:k], x)


@given(formulas())
def test_count_matches_brute_force(f):
    c = count_solutions(f)
    assert 0 <= c <= 2**f.n
    assert c == brute_count(f.n, list(iter_clause_codes(f)))
    assert len(solutions(f)) == c
    assert count_solutions(f, stop_after=1) == min(c, 1)


@given(formulas(max_L=8), st.data())
def test_adding_clause_never_increases_count(f, data):
    lit = st.integers(1, f.n).flatmap(lambda v: st.sampled_from((v, -v)))
    extra = Clause.of(*data.draw(st.tuples(lit, lit, lit)))
    assert count_solutions(f.with_clause(extra)) <= count_solutions(f)


def test_enumeration_limit_is_configurable(monkeypatch):
    monkeypatch.setenv("HYBRIDSAT_ENUM_LIMIT", "4")
    with pytest.raises(ValueError, match="enumeration limit"):
        count_solutions(Formula(5, ()))
    monkeypatch.setenv("HYBRIDSAT_ENUM_LIMIT", "zero")
    with pytest.raises(ValueError):
        count_solutions(Formula(2, ()))


@given(st.integers(1, 20), st.data())
def test_pack_unpack(n, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=1, max_size=5))
    X = np.array(rows, dtype=np.uint8)
    assert np.array_equal(unpack_states(pack_states(X), n), X)


# -- generators ---------------------------------------------------------------


def test_default_clause_count():
    assert default_clause_count(20) == 91
    assert default_clause_count(12) == 55


def test_generate_random_deterministic_and_distinct_variables():
    a, b = generate_random(20, 91, seed=7), generate_random(20, 91, seed=7)
    assert a == b
    assert all(len({lit.variable for lit in c}) == 3 for c in a.clauses)


def test_generate_random_seeds_differ():
    # two clause lists coincide with probability far below 1e-100
    for s in range(100):
        assert generate_random(20, 91, seed=2 * s) != generate_random(20, 91, seed=2 * s + 1)


@given(st.integers(3, 14), st.integers(0, 60), st.integers(0, 2**32))
def test_planted_satisfied(n, L, seed):
    f, x_star = generate_planted(n, L, seed)
    assert f.L == L
    assert evaluate(f, x_star)


def test_planted_unique():
    f, x_star = generate_planted(12, 55, seed=11, unique=True)
    assert count_solutions(f) == 1
    g, y = generate_planted(12, 55, seed=11, unique=True)
    assert f == g and np.array_equal(x_star, y)


def test_planted_errors(monkeypatch):
    with pytest.raises(ValueError):
        generate_planted(2)
    with pytest.raises(RuntimeError):
        generate_planted(10, 5, seed=0, unique=True, max_attempts=3)
    monkeypatch.setenv("HYBRIDSAT_ENUM_LIMIT", "8")
    with pytest.raises(ValueError):
        generate_planted(12, unique=True)


def test_formula_pickles_without_caches():
    import pickle

    f = generate_random(10, 40, seed=1)
    _ = f.table
    g = pickle.loads(pickle.dumps(f))
    assert g == f and np.array_equal(g.table, f.table)
