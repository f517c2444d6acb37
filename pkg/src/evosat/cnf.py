"""DIMACS CNF instances, incremental evaluation, and small-instance enumeration."""

from __future__ import annotations

import random
from typing import Iterable, Sequence, TextIO

import numpy as np

Assignment = list  # list[bool] of length n; index v-1 holds the value of variable v


class DimacsError(ValueError):
    """Malformed DIMACS input; message carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Instance:
    """An immutable CNF formula over variables 1..n.

    Literals use the DIMACS convention: +v is the positive literal of
    variable v, -v the negative one.  Clauses are kept exactly as written,
    including duplicate literals and tautologies; a clause still counts at
    most once toward the satisfied total.  Variables that occur in no clause
    are legal.
    """

    def __init__(self, n: int, clauses: Iterable[Sequence[int]]):
        if n < 0:
            raise ValueError("variable count must be non-negative")
        self.n = n
        self.clauses = tuple(tuple(cl) for cl in clauses)
        self.m = len(self.clauses)

        pos_occ: list[list[int]] = [[] for _ in range(n)]
        neg_occ: list[list[int]] = [[] for _ in range(n)]
        clause_vars: list[tuple[tuple[int, int, int], ...]] = []
        var_clauses: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for c, clause in enumerate(self.clauses):
            if not clause:
                raise ValueError(f"clause {c} is empty")
            counts: dict[int, list[int]] = {}
            for lit in clause:
                if lit == 0 or abs(lit) > n:
                    raise ValueError(f"clause {c}: literal {lit} out of range")
                v0 = abs(lit) - 1
                pq = counts.setdefault(v0, [0, 0])
                if lit > 0:
                    pq[0] += 1
                    pos_occ[v0].append(c)
                else:
                    pq[1] += 1
                    neg_occ[v0].append(c)
            members = tuple((v0, pq[0], pq[1]) for v0, pq in counts.items())
            clause_vars.append(members)
            for v0, p, q in members:
                var_clauses[v0].append((c, p, q))

        # clause_vars[c]: distinct variables of clause c as (v-1, #pos occurrences,
        # #neg occurrences).  var_clauses[v-1]: the inverse, per variable.
        self.clause_vars = tuple(clause_vars)
        self.var_clauses = tuple(tuple(vc) for vc in var_clauses)
        self._pos_occ = tuple(tuple(o) for o in pos_occ)
        self._neg_occ = tuple(tuple(o) for o in neg_occ)

    def occurrences(self, lit: int) -> tuple[int, ...]:
        """Clause indices containing the literal, with multiplicity."""
        if lit == 0 or abs(lit) > self.n:
            raise ValueError(f"literal {lit} out of range")
        return self._pos_occ[lit - 1] if lit > 0 else self._neg_occ[-lit - 1]

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, m={self.m})"


def satisfied_count_naive(inst: Instance, assignment: Sequence[bool]) -> int:
    """Count satisfied clauses by direct scan (the slow reference evaluator)."""
    if len(assignment) != inst.n:
        raise ValueError(f"assignment length {len(assignment)} != n={inst.n}")
    count = 0
    for clause in inst.clauses:
        for lit in clause:
            if assignment[lit - 1] if lit > 0 else not assignment[-lit - 1]:
                count += 1
                break
    return count


def random_assignment(n: int, rng: random.Random) -> list[bool]:
    """Uniform random truth assignment for n variables."""
    return [rng.random() < 0.5 for _ in range(n)]


class EvalState:
    """Incrementally maintained evaluation of one assignment.

    Tracks per clause the number of currently-true literal occurrences
    (true_lit_count), the satisfied-clause total, and per variable the number
    of clauses a flip would newly satisfy (make_count) or newly falsify
    (break_count), so flipping v always changes satisfied_total by exactly
    make_count[v-1] - break_count[v-1].  A flip touches only the clauses in
    which the flipped variable occurs.  unsat_clauses is an unordered index
    of the clauses with no true literal.
    """

    def __init__(self, inst: Instance, assignment: Sequence[bool]):
        if len(assignment) != inst.n:
            raise ValueError(f"assignment length {len(assignment)} != n={inst.n}")
        self.inst = inst
        self.assignment = [bool(x) for x in assignment]
        m = inst.m
        a = self.assignment
        tlc = [0] * m
        satisfied = 0
        unsat: list[int] = []
        unsat_pos = [-1] * m
        for c, clause in enumerate(inst.clauses):
            nt = 0
            for lit in clause:
                if a[lit - 1] if lit > 0 else not a[-lit - 1]:
                    nt += 1
            tlc[c] = nt
            if nt:
                satisfied += 1
            else:
                unsat_pos[c] = len(unsat)
                unsat.append(c)
        self.true_lit_count = tlc
        self.satisfied_total = satisfied
        self.unsat_clauses = unsat
        self._unsat_pos = unsat_pos
        self.make_count = [0] * inst.n
        self.break_count = [0] * inst.n
        for c in range(m):
            self._contribute(c, +1)

    def _contribute(self, c: int, sign: int) -> None:
        """Add (sign=+1) or retract (sign=-1) clause c's make/break contributions.

        A variable u "makes" an unsatisfied clause if flipping u gives it a
        true literal, and "breaks" a satisfied clause if flipping u leaves it
        with none.  Computed from occurrence counts, so duplicate literals
        and tautological clauses are handled exactly.
        """
        a = self.assignment
        nt = self.true_lit_count[c]
        if nt == 0:
            make = self.make_count
            for u0, p, q in self.inst.clause_vars[c]:
                if (q if a[u0] else p) > 0:
                    make[u0] += sign
        else:
            brk = self.break_count
            for u0, p, q in self.inst.clause_vars[c]:
                t, f = (p, q) if a[u0] else (q, p)
                if nt - t + f == 0:
                    brk[u0] += sign

    def flip(self, v: int) -> None:
        """Flip variable v (1-based), updating all bookkeeping in place."""
        if not 1 <= v <= self.inst.n:
            raise ValueError(f"variable {v} out of range 1..{self.inst.n}")
        v0 = v - 1
        affected = self.inst.var_clauses[v0]
        for c, _, _ in affected:
            self._contribute(c, -1)
        a = self.assignment
        was_true = a[v0]
        a[v0] = not was_true
        tlc = self.true_lit_count
        unsat = self.unsat_clauses
        upos = self._unsat_pos
        satisfied = self.satisfied_total
        for c, p, q in affected:
            nt = tlc[c]
            nt2 = nt + (q - p if was_true else p - q)
            tlc[c] = nt2
            if nt == 0:
                if nt2 > 0:
                    satisfied += 1
                    i = upos[c]
                    last = unsat[-1]
                    unsat[i] = last
                    upos[last] = i
                    unsat.pop()
                    upos[c] = -1
            elif nt2 == 0:
                satisfied -= 1
                upos[c] = len(unsat)
                unsat.append(c)
        self.satisfied_total = satisfied
        for c, _, _ in affected:
            self._contribute(c, +1)

    def delta_for_flip(self, v: int) -> int:
        """Net change in satisfied_total that flipping v would cause."""
        if not 1 <= v <= self.inst.n:
            raise ValueError(f"variable {v} out of range 1..{self.inst.n}")
        return self.make_count[v - 1] - self.break_count[v - 1]


def brute_force_optimum(inst: Instance) -> tuple[int, list[bool]]:
    """Exhaustive MAX-SAT optimum for n <= 26: (best count, witness assignment).

    Assignments are enumerated as bit patterns in blocks and evaluated with
    vectorized clause checks; the witness is the lowest-index assignment
    attaining the best count.
    """
    n = inst.n
    if n > 26:
        raise ValueError(f"enumeration bound is n <= 26, got n={n}")
    total = 1 << n
    chunk = 1 << min(20, n)
    best_count = -1
    best_idx = 0
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        idx = np.arange(lo, hi, dtype=np.uint32)
        counts = np.zeros(hi - lo, dtype=np.uint32)
        for clause in inst.clauses:
            unsat = np.ones(hi - lo, dtype=bool)
            for lit in clause:
                bit = (idx >> (abs(lit) - 1)) & 1
                unsat &= (bit == 0) if lit > 0 else (bit == 1)
            counts += ~unsat
        i = int(np.argmax(counts))
        if int(counts[i]) > best_count:
            best_count = int(counts[i])
            best_idx = lo + i
    witness = [bool((best_idx >> v0) & 1) for v0 in range(n)]
    return best_count, witness


def parse_dimacs(source: str | TextIO) -> Instance:
    """Parse DIMACS CNF text into an Instance.

    Accepts comment lines, clauses spanning multiple lines, and the
    conventional "%" / "0" trailer after the declared clause count.  Weighted
    (wcnf) files are rejected.  All errors report a 1-based line number.
    """
    text = source if isinstance(source, str) else source.read()
    n = m = -1
    have_header = False
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    cur_line = 0
    trailer_seen = False
    trailer_zero_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("p"):
            if have_header:
                raise DimacsError("duplicate header", lineno)
            parts = s.split()
            if len(parts) >= 2 and parts[1] == "wcnf":
                raise DimacsError("weighted CNF (wcnf) is not supported", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {s!r}", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {s!r}", lineno) from None
            if n < 0 or m < 0:
                raise DimacsError(f"malformed header {s!r}", lineno)
            have_header = True
            continue
        if not have_header:
            raise DimacsError("clause data before 'p cnf' header", lineno)
        for tok in s.split():
            if len(clauses) == m and not cur:
                if tok == "%" and not trailer_seen:
                    trailer_seen = True
                    continue
                if tok == "0" and trailer_seen and not trailer_zero_seen:
                    trailer_zero_seen = True
                    continue
                raise DimacsError(
                    f"trailing token {tok!r} after declared clause count", lineno
                )
            if tok == "%":
                raise DimacsError(
                    "'%' trailer before all declared clauses were read", lineno
                )
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"malformed literal {tok!r}", lineno) from None
            cur_line = lineno
            if lit == 0:
                if not cur:
                    raise DimacsError("empty clause", lineno)
                clauses.append(tuple(cur))
                cur.clear()
            else:
                if abs(lit) > n:
                    raise DimacsError(
                        f"literal {lit} out of range for {n} variables", lineno
                    )
                cur.append(lit)
    if not have_header:
        raise DimacsError("missing 'p cnf' header")
    if cur:
        raise DimacsError("unterminated final clause", cur_line)
    if len(clauses) != m:
        raise DimacsError(
            f"clause count mismatch: header declared {m}, found {len(clauses)}"
        )
    return Instance(n, clauses)


def load_instance(path: str) -> Instance:
    """Read and parse a DIMACS CNF file."""
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        return parse_dimacs(fh)
