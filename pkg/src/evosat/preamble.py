"""Initial-assignment preambles: (variable, action) genomes and their playout.

A preamble is a short program executed before local search starts: each step
names a variable and either leaves it alone, sets it greedily (the value
satisfying more clauses), or contrarily (the value satisfying fewer).  Played
out against a start assignment it yields the assignment the search begins
from.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple, Sequence

from evosat.cnf import EvalState, Instance


class Action(IntEnum):
    CONTRARY = 0  # set the variable to the value satisfying fewer clauses
    GREEDY = 1    # set it to the value satisfying more clauses
    LEAVE = 2     # keep whatever value it has


class Step(NamedTuple):
    var: int
    action: Action


@dataclass(frozen=True)
class Preamble:
    """Immutable sequence of steps; safe to share between individuals."""

    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)


def distinct_vars(p: Preamble) -> int:
    """Number of distinct variables named by the preamble."""
    return len({s.var for s in p.steps})


def playout(
    inst: Instance, p: Preamble, start: Sequence[bool], rng: random.Random
) -> list[bool]:
    """Run the preamble against a start assignment; return the resulting one.

    Leave steps cost nothing.  Greedy/Contrary steps evaluate both values of
    the step's variable through the incremental state, so each costs only the
    variable's clause occurrences.  The rng is consumed only to break exact
    ties between the two values, making playouts reproducible for a given
    seed.  Variables not named in the preamble keep their start values.
    """
    state = EvalState(inst, start)
    n = inst.n
    for v, action in p.steps:
        if action == Action.LEAVE:
            continue
        if not 1 <= v <= n:
            raise ValueError(f"preamble step names variable {v}, instance has n={n}")
        d = state.delta_for_flip(v)
        if d == 0:
            want_flip = rng.random() < 0.5
        elif action == Action.GREEDY:
            want_flip = d > 0
        else:
            want_flip = d < 0
        if want_flip:
            state.flip(v)
    return list(state.assignment)


def random_preamble(
    n: int, max_len: int, distinct_floor: int, rng: random.Random
) -> Preamble:
    """Draw a random preamble with at least distinct_floor distinct variables.

    Length is uniform on [distinct_floor, max_len].  A sample of
    distinct_floor distinct variables is placed at random positions first,
    the remaining positions are filled with uniform variables, and every
    action is uniform over the three kinds.
    """
    if distinct_floor < 0 or max_len < 0:
        raise ValueError("bounds must be non-negative")
    if distinct_floor > max_len:
        raise ValueError(
            f"infeasible bounds: distinct_floor={distinct_floor} > max_len={max_len}"
        )
    if distinct_floor > n:
        raise ValueError(
            f"infeasible bounds: distinct_floor={distinct_floor} > n={n}"
        )
    if n < 1 and max_len > 0:
        raise ValueError("cannot draw variables for an instance with no variables")
    length = rng.randint(distinct_floor, max_len)
    vars_ = [0] * length
    if distinct_floor:
        positions = rng.sample(range(length), distinct_floor)
        seeds = rng.sample(range(1, n + 1), distinct_floor)
        for pos, v in zip(positions, seeds):
            vars_[pos] = v
    for i in range(length):
        if vars_[i] == 0:
            vars_[i] = rng.randint(1, n)
    return Preamble(tuple(Step(v, Action(rng.randrange(3))) for v in vars_))


def format_preamble(p: Preamble) -> str:
    """Text form: a "preamble <length>" header, then one "<var> <action>" per line."""
    lines = [f"preamble {len(p)}"]
    lines.extend(f"{v} {int(a)}" for v, a in p.steps)
    return "\n".join(lines) + "\n"


def parse_preamble(text: str) -> Preamble:
    """Inverse of format_preamble; raises ValueError on malformed input."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty preamble text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "preamble":
        raise ValueError(f"malformed preamble header {lines[0]!r}")
    try:
        length = int(head[1])
    except ValueError:
        raise ValueError(f"malformed preamble header {lines[0]!r}") from None
    body = lines[1:]
    if length < 0 or len(body) != length:
        raise ValueError(
            f"preamble header declares {length} steps, found {len(body)}"
        )
    steps = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"malformed preamble step {ln!r}")
        try:
            v, code = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"malformed preamble step {ln!r}") from None
        if v < 1:
            raise ValueError(f"preamble step names variable {v} < 1")
        if code not in (0, 1, 2):
            raise ValueError(f"preamble step has unknown action code {code}")
        steps.append(Step(v, Action(code)))
    return Preamble(tuple(steps))
