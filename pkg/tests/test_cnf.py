"""Parser, instance bookkeeping, incremental evaluation, and the enumeration oracle."""

import random
from itertools import product

import pytest

from conftest import dimacs_text, mixed_clauses, random_instance
from evosat.cnf import (
    DimacsError,
    EvalState,
    Instance,
    brute_force_optimum,
    load_instance,
    parse_dimacs,
    random_assignment,
    satisfied_count_naive,
)

SIMPLE = """c a comment
c another one
p cnf 4 3
1 -2 0
2 3
-4 0
-1 0
"""


def test_parse_simple():
    inst = parse_dimacs(SIMPLE)
    assert inst.n == 4
    assert inst.m == 3
    assert inst.clauses == ((1, -2), (2, 3, -4), (-1,))


def test_parse_satlib_trailer():
    inst = parse_dimacs("p cnf 2 2\n1 2 0\n-1 -2 0\n%\n0\n")
    assert inst.m == 2


def test_parse_blank_lines_and_whitespace():
    inst = parse_dimacs("\n  p cnf 2 1  \n\n   1   -2   0\n\n")
    assert inst.clauses == ((1, -2),)


def test_parse_accepts_file_object(tmp_path):
    path = tmp_path / "a.cnf"
    path.write_text(SIMPLE)
    inst = load_instance(str(path))
    assert inst.m == 3


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("1 -2 0\n", 1, "before 'p cnf' header"),
        ("p cnf 2 1\np cnf 2 1\n1 0\n", 2, "duplicate header"),
        ("p wcnf 2 1 5\n5 1 0\n", 1, "wcnf"),
        ("p cnf 2\n1 0\n", 1, "malformed header"),
        ("p cnf two 1\n1 0\n", 1, "malformed header"),
        ("p cnf 2 -1\n", 1, "malformed header"),
        ("p cnf 2 1\n1 x 0\n", 2, "malformed literal 'x'"),
        ("p cnf 2 1\n3 0\n", 2, "out of range"),
        ("p cnf 2 1\n0\n", 2, "empty clause"),
        ("p cnf 2 1\n1 0 2 0\n", 2, "trailing token '2'"),
        ("p cnf 2 2\n1 0\n%\n", 3, "'%' trailer before"),
        ("p cnf 2 1\n1 2\n", 2, "unterminated final clause"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(DimacsError) as err:
        parse_dimacs(text)
    assert fragment in str(err.value)
    assert err.value.line == line
    assert f"line {line}:" in str(err.value)


def test_parse_count_mismatch_and_missing_header():
    with pytest.raises(DimacsError, match="declared 3, found 1"):
        parse_dimacs("p cnf 2 3\n1 0\n")
    with pytest.raises(DimacsError, match="missing 'p cnf' header"):
        parse_dimacs("c nothing here\n")


def test_instance_rejects_bad_clauses():
    with pytest.raises(ValueError, match="empty"):
        Instance(2, [()])
    with pytest.raises(ValueError, match="out of range"):
        Instance(2, [(3,)])
    with pytest.raises(ValueError, match="out of range"):
        Instance(2, [(0,)])
    with pytest.raises(ValueError):
        Instance(-1, [])


def test_occurrences_keep_multiplicity():
    # clause 0 repeats literal 1; clause 1 is a tautology on variable 2
    inst = Instance(3, [(1, 1, -2), (2, -2), (-1, 3)])
    assert inst.occurrences(1) == (0, 0)
    assert inst.occurrences(-1) == (2,)
    assert inst.occurrences(2) == (1,)
    assert inst.occurrences(-2) == (0, 1)
    assert inst.occurrences(3) == (2,)
    assert inst.occurrences(-3) == ()
    assert inst.clause_vars[0] == ((0, 2, 0), (1, 0, 1))
    assert inst.clause_vars[1] == ((1, 1, 1),)
    with pytest.raises(ValueError):
        inst.occurrences(0)
    with pytest.raises(ValueError):
        inst.occurrences(4)


def test_satisfied_count_naive_hand_case():
    inst = Instance(3, [(1, -2), (2, 3), (-1,), (-3, -3)])
    assert satisfied_count_naive(inst, [False, False, False]) == 3
    assert satisfied_count_naive(inst, [True, True, True]) == 2
    with pytest.raises(ValueError, match="length"):
        satisfied_count_naive(inst, [True])


def test_random_assignment_seeded():
    a = random_assignment(12, random.Random(3))
    b = random_assignment(12, random.Random(3))
    assert a == b
    assert len(a) == 12
    assert all(isinstance(x, bool) for x in a)


# --- incremental evaluation ------------------------------------------------


def clause_sat(clause, a):
    return any(a[l - 1] if l > 0 else not a[-l - 1] for l in clause)


def naive_make_break(inst, a):
    """Reference make/break counts by re-evaluating every clause per flip."""
    make = [0] * inst.n
    brk = [0] * inst.n
    for v0 in range(inst.n):
        a2 = list(a)
        a2[v0] = not a2[v0]
        for cl in inst.clauses:
            before, after = clause_sat(cl, a), clause_sat(cl, a2)
            if after and not before:
                make[v0] += 1
            elif before and not after:
                brk[v0] += 1
    return make, brk


def naive_true_lit_counts(inst, a):
    return [
        sum(1 for l in cl if (a[l - 1] if l > 0 else not a[-l - 1]))
        for cl in inst.clauses
    ]


def test_eval_state_hand_case():
    # duplicates and a tautology: (1 1 -2), (2 -2), (-1 3), (3)
    inst = Instance(3, [(1, 1, -2), (2, -2), (-1, 3), (3,)])
    st = EvalState(inst, [True, True, False])
    # clause 0 holds two true occurrences of literal 1; the tautology exactly one
    assert st.true_lit_count == [2, 1, 0, 0]
    assert st.satisfied_total == 2
    assert sorted(st.unsat_clauses) == [2, 3]
    # flipping 1 satisfies clause 2, flipping 3 satisfies clauses 2 and 3
    assert st.make_count == [1, 0, 2]
    # flipping 1 falsifies both its occurrences in clause 0 at once; the
    # tautology can never break
    assert st.break_count == [1, 0, 0]
    assert st.delta_for_flip(3) == 2
    st.flip(3)
    assert st.satisfied_total == 4
    assert st.unsat_clauses == []
    assert st.make_count == [0, 0, 0]
    assert st.break_count == [1, 0, 2]


def test_flip_sequences_match_naive():
    rng = random.Random(99)
    for _ in range(25):
        inst = random_instance(rng, max_n=12, max_m=40)
        a = random_assignment(inst.n, rng)
        st = EvalState(inst, a)
        for _ in range(60):
            v = rng.randint(1, inst.n)
            want_delta = st.delta_for_flip(v)
            before = st.satisfied_total
            st.flip(v)
            assert st.satisfied_total == satisfied_count_naive(inst, st.assignment)
            assert st.satisfied_total - before == want_delta
            make, brk = naive_make_break(inst, st.assignment)
            assert st.make_count == make
            assert st.break_count == brk
            assert st.true_lit_count == naive_true_lit_counts(inst, st.assignment)
            assert sorted(st.unsat_clauses) == [
                c for c, t in enumerate(st.true_lit_count) if t == 0
            ]


def test_flip_twice_is_identity():
    rng = random.Random(5)
    inst = random_instance(rng, max_n=10, max_m=30)
    a = random_assignment(inst.n, rng)
    st = EvalState(inst, a)
    fresh = EvalState(inst, a)
    for v in range(1, inst.n + 1):
        st.flip(v)
        st.flip(v)
    assert st.assignment == fresh.assignment
    assert st.true_lit_count == fresh.true_lit_count
    assert st.make_count == fresh.make_count
    assert st.break_count == fresh.break_count
    assert sorted(st.unsat_clauses) == sorted(fresh.unsat_clauses)


def test_eval_state_does_not_alias_start():
    inst = Instance(2, [(1, 2)])
    start = [False, False]
    st = EvalState(inst, start)
    st.flip(1)
    assert start == [False, False]


def test_flip_rejects_out_of_range():
    st = EvalState(Instance(2, [(1,)]), [False, False])
    with pytest.raises(ValueError):
        st.flip(0)
    with pytest.raises(ValueError):
        st.flip(3)
    with pytest.raises(ValueError):
        st.delta_for_flip(-1)


# --- brute-force oracle ----------------------------------------------------


def exhaustive_best(inst):
    """Independent reference enumeration (no numpy, no shared code paths)."""
    best = -1
    for bits in product((False, True), repeat=inst.n):
        cnt = sum(1 for cl in inst.clauses if clause_sat(cl, bits))
        if cnt > best:
            best = cnt
    return best


def test_brute_force_matches_exhaustive_reference():
    rng = random.Random(17)
    for _ in range(12):
        inst = random_instance(rng, max_n=9, max_m=30)
        best, witness = brute_force_optimum(inst)
        assert best == exhaustive_best(inst)
        assert satisfied_count_naive(inst, witness) == best


def test_brute_force_frozen_value():
    # independently enumerated once for this seeded instance
    inst = Instance(16, mixed_clauses(random.Random(42), 16, 70))
    best, witness = brute_force_optimum(inst)
    assert best == 61
    assert satisfied_count_naive(inst, witness) == 61


def test_brute_force_rejects_large_n():
    with pytest.raises(ValueError, match="n <= 26"):
        brute_force_optimum(Instance(27, [(1,)]))


def test_dimacs_roundtrip():
    rng = random.Random(8)
    for _ in range(10):
        inst = random_instance(rng, max_n=10, max_m=25)
        again = parse_dimacs(dimacs_text(inst))
        assert again.n == inst.n
        assert again.clauses == inst.clauses
