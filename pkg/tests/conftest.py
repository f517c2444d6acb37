"""Shared generators for the test suite.

The mixed generator draws literals with replacement so duplicate literals and
tautological clauses occur naturally; the 3-SAT generators use distinct
variables per clause.  All of them take an explicit rng so tests stay seeded.
"""

import random

from evosat.cnf import Instance


def mixed_clauses(rng, n, m, max_k=4):
    clauses = []
    for _ in range(m):
        k = rng.randint(1, max_k)
        cl = []
        for _ in range(k):
            v = rng.randint(1, n)
            cl.append(v if rng.random() < 0.5 else -v)
        clauses.append(tuple(cl))
    return clauses


def random_instance(rng, max_n=20, max_m=80):
    n = rng.randint(3, max_n)
    m = rng.randint(1, max_m)
    return Instance(n, mixed_clauses(rng, n, m))


def random_3sat(rng, n, m):
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Instance(n, clauses)


def planted_3sat(seed, n=20, m=85):
    """Satisfiable by construction: every clause holds under a hidden assignment."""
    rng = random.Random(seed)
    hidden = [rng.random() < 0.5 for _ in range(n)]
    clauses = []
    while len(clauses) < m:
        vs = rng.sample(range(1, n + 1), 3)
        cl = tuple(v if rng.random() < 0.5 else -v for v in vs)
        if any(hidden[l - 1] if l > 0 else not hidden[-l - 1] for l in cl):
            clauses.append(cl)
    return Instance(n, clauses)


def dimacs_text(inst):
    lines = [f"p cnf {inst.n} {inst.m}"]
    lines.extend(" ".join(str(l) for l in cl) + " 0" for cl in inst.clauses)
    return "\n".join(lines) + "\n"
