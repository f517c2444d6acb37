"""Stochastic local search heuristics of the GSAT / WalkSAT lineage.

All nine kinds share one search state and one run loop.  The g-family scores
flips by make - break over all variables; the walk-family works inside a
random unsatisfied clause and scores by break alone, except Novelty variants
which order clause variables by make - break with a recency rule.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Sequence

from evosat.cnf import EvalState, Instance

KINDS = (
    "gsat",
    "gwsat",
    "hsat",
    "hwsat",
    "gsat-tabu",
    "walksat-tabu",
    "novelty",
    "novelty+",
    "adaptnovelty+",
)

_TABU_KINDS = frozenset({"gsat-tabu", "walksat-tabu"})

# bounded clause re-picks when every variable of the picked clause is tabu
_TABU_RETRIES = 10


@dataclass
class HeuristicSpec:
    """Configuration of one heuristic kind.

    noise is the Novelty second-best probability p; wp the random-walk
    probability of the "+" variants and the w-family.  tabu_tenure left unset
    defaults to 1 + n // 100 at run time.  adaptnovelty+ ignores noise (its
    own starts at 0 and adapts) and uses adapt_theta / adapt_phi as the
    stagnation threshold factor and adjustment strength.
    """

    kind: str
    noise: float = 0.5
    wp: float = 0.01
    tabu_tenure: int | None = None
    adapt_theta: float = 1 / 6
    adapt_phi: float = 0.2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown heuristic kind {self.kind!r}")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")
        if not 0.0 <= self.wp <= 1.0:
            raise ValueError("wp must lie in [0, 1]")
        if self.tabu_tenure is not None and self.tabu_tenure < 1:
            raise ValueError("tabu_tenure must be >= 1")
        if self.adapt_theta <= 0 or not 0.0 < self.adapt_phi < 1.0:
            raise ValueError("bad adaptive-noise parameters")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "noise": self.noise,
            "wp": self.wp,
            "tabu_tenure": self.tabu_tenure,
            "adapt_theta": self.adapt_theta,
            "adapt_phi": self.adapt_phi,
        }


class SearchState:
    """Mutable state of one heuristic run.

    last_flip_age[v-1] is the flip counter at v's most recent flip; variables
    never flipped stay at 0 and therefore rank as oldest.  tabu_until[v-1] is
    the flip counter before which v may not be selected by tabu kinds.
    """

    def __init__(self, spec: HeuristicSpec, inst: Instance, start: Sequence[bool]):
        self.eval = EvalState(inst, start)
        n = inst.n
        self.flips_done = 0
        self.last_flip_age = [0] * n
        self.tabu_until = [0] * n
        self.tabu_tenure = (
            spec.tabu_tenure if spec.tabu_tenure is not None else 1 + n // 100
        )
        self._tabu_active = spec.kind in _TABU_KINDS
        self.current_noise = 0.0 if spec.kind == "adaptnovelty+" else spec.noise
        self.best_count = self.eval.satisfied_total
        self.best_found_at_flips = 0
        self.best_found_at_time = 0.0
        self.best_assignment = list(self.eval.assignment)
        self.last_improvement_flip = 0

    @property
    def unsat_list(self) -> list[int]:
        return self.eval.unsat_clauses

    def apply_flip(self, v: int) -> None:
        self.eval.flip(v)
        self.flips_done += 1
        self.last_flip_age[v - 1] = self.flips_done
        if self._tabu_active:
            self.tabu_until[v - 1] = self.flips_done + self.tabu_tenure


def pick_unsat_clause(state: SearchState, rng: random.Random) -> int:
    """Uniform random unsatisfied clause index."""
    unsat = state.eval.unsat_clauses
    if not unsat:
        raise ValueError("no unsatisfied clauses to pick from")
    return unsat[rng.randrange(len(unsat))]


def _choice(candidates: list[int], rng: random.Random) -> int:
    return candidates[0] if len(candidates) == 1 else candidates[rng.randrange(len(candidates))]


def _gsat_pick(
    state: SearchState, rng: random.Random, oldest_tie: bool, respect_tabu: bool
) -> int:
    """Best make-break variable over all variables.

    Ties go to the least recently flipped variable when oldest_tie is set
    (residual ties uniform), otherwise uniform.  If tabu excludes everything,
    the restriction is dropped.
    """
    ev = state.eval
    make, brk = ev.make_count, ev.break_count
    best: int | None = None
    ties: list[int] = []
    if respect_tabu:
        flips = state.flips_done
        tabu_until = state.tabu_until
        for v0 in range(len(make)):
            if tabu_until[v0] > flips:
                continue
            d = make[v0] - brk[v0]
            if best is None or d > best:
                best, ties = d, [v0]
            elif d == best:
                ties.append(v0)
        if best is None:
            return _gsat_pick(state, rng, oldest_tie, False)
    else:
        for v0 in range(len(make)):
            d = make[v0] - brk[v0]
            if best is None or d > best:
                best, ties = d, [v0]
            elif d == best:
                ties.append(v0)
    if oldest_tie and len(ties) > 1:
        age = state.last_flip_age
        oldest = min(age[v0] for v0 in ties)
        ties = [v0 for v0 in ties if age[v0] == oldest]
    return _choice(ties, rng) + 1


def _walk_pick(state: SearchState, rng: random.Random) -> int:
    """Uniform variable of a uniform unsatisfied clause."""
    c = pick_unsat_clause(state, rng)
    members = state.eval.inst.clause_vars[c]
    return members[rng.randrange(len(members))][0] + 1


def _walksat_tabu_pick(state: SearchState, rng: random.Random) -> int:
    """Freebie (break 0) if one exists, else minimum break among non-tabu.

    A clause whose variables are all tabu (and offer no freebie) is re-picked
    up to a bounded number of times; after that the tabu restriction is
    dropped for the last clause picked.
    """
    ev = state.eval
    brk = ev.break_count
    clause_vars = ev.inst.clause_vars
    flips = state.flips_done
    tabu_until = state.tabu_until
    for attempt in range(_TABU_RETRIES + 1):
        members = clause_vars[pick_unsat_clause(state, rng)]
        freebies = [v0 for v0, _, _ in members if brk[v0] == 0]
        if freebies:
            return _choice(freebies, rng) + 1
        allowed = [v0 for v0, _, _ in members if tabu_until[v0] <= flips]
        if not allowed:
            if attempt < _TABU_RETRIES:
                continue
            allowed = [v0 for v0, _, _ in members]
        best_b: int | None = None
        ties: list[int] = []
        for v0 in allowed:
            b = brk[v0]
            if best_b is None or b < best_b:
                best_b, ties = b, [v0]
            elif b == best_b:
                ties.append(v0)
        return _choice(ties, rng) + 1
    raise AssertionError("unreachable")


def _novelty_pick(state: SearchState, rng: random.Random, p: float) -> int:
    """Novelty rule within a uniform unsatisfied clause.

    Variables are ordered by make - break, ties preferring the older flip
    (residual ties by clause order).  The best is flipped outright unless it
    is the clause's most recently flipped variable, in which case the second
    best is taken with probability p.
    """
    ev = state.eval
    members = ev.inst.clause_vars[pick_unsat_clause(state, rng)]
    make, brk = ev.make_count, ev.break_count
    age = state.last_flip_age
    best = second = -1
    best_key = second_key = None
    youngest = members[0][0]
    youngest_age = age[youngest]
    for v0, _, _ in members:
        key = (make[v0] - brk[v0], -age[v0])
        if best_key is None or key > best_key:
            second, second_key = best, best_key
            best, best_key = v0, key
        elif second_key is None or key > second_key:
            second, second_key = v0, key
        if age[v0] > youngest_age:
            youngest, youngest_age = v0, age[v0]
    if second < 0 or best != youngest:
        return best + 1
    if rng.random() < p:
        return second + 1
    return best + 1


def select_flip(
    spec: HeuristicSpec, state: SearchState, rng: random.Random
) -> int | None:
    """Variable the heuristic flips next, or None once everything is satisfied."""
    if not state.eval.unsat_clauses:
        return None
    kind = spec.kind
    if kind == "novelty":
        return _novelty_pick(state, rng, spec.noise)
    if kind == "novelty+":
        if rng.random() < spec.wp:
            return _walk_pick(state, rng)
        return _novelty_pick(state, rng, spec.noise)
    if kind == "adaptnovelty+":
        if rng.random() < spec.wp:
            return _walk_pick(state, rng)
        return _novelty_pick(state, rng, state.current_noise)
    if kind == "walksat-tabu":
        return _walksat_tabu_pick(state, rng)
    if kind == "gsat":
        return _gsat_pick(state, rng, False, False)
    if kind == "hsat":
        return _gsat_pick(state, rng, True, False)
    if kind == "gsat-tabu":
        return _gsat_pick(state, rng, False, True)
    if kind == "gwsat":
        if rng.random() < spec.wp:
            return _walk_pick(state, rng)
        return _gsat_pick(state, rng, False, False)
    if kind == "hwsat":
        if rng.random() < spec.wp:
            return _walk_pick(state, rng)
        return _gsat_pick(state, rng, True, False)
    raise ValueError(f"unknown heuristic kind {kind!r}")


def adapt_noise(state: SearchState, spec: HeuristicSpec) -> None:
    """Adjust adaptnovelty+'s noise after a flip.

    Improving the run's best count on this flip decays the noise by
    phi / 2; going more than theta * m flips without improvement raises it
    by phi of the remaining headroom and restarts the stagnation window.
    Noise therefore stays inside [0, 1].
    """
    if state.flips_done == state.last_improvement_flip:
        state.current_noise -= state.current_noise * spec.adapt_phi / 2
    elif (
        state.flips_done - state.last_improvement_flip
        > spec.adapt_theta * state.eval.inst.m
    ):
        state.current_noise += (1.0 - state.current_noise) * spec.adapt_phi
        state.last_improvement_flip = state.flips_done


@dataclass
class RunRecord:
    """Outcome of one heuristic run."""

    best_count: int
    best_found_at_time: float
    best_found_at_flips: int
    total_flips: int
    final_assignment_of_best: list

    def to_json_dict(self) -> dict:
        return {
            "best_count": self.best_count,
            "best_time_s": self.best_found_at_time,
            "best_flips": self.best_found_at_flips,
            "total_flips": self.total_flips,
        }


def run_heuristic(
    spec: HeuristicSpec,
    inst: Instance,
    start: Sequence[bool],
    rng: random.Random,
    max_flips: int | None = None,
    max_seconds: float | None = None,
) -> RunRecord:
    """Run one heuristic from start until the budget is spent or all clauses hold.

    At least one budget must be given.  The flip bound is exact; the time
    bound is only checked every 1024 flips to keep the clock off the hot
    path.  max_flips=0 is allowed and just scores the start assignment.
    """
    if max_flips is None and max_seconds is None:
        raise ValueError("a flip or time budget is required")
    if max_flips is not None and max_flips < 0:
        raise ValueError("max_flips must be >= 0")
    if max_seconds is not None and max_seconds <= 0:
        raise ValueError("max_seconds must be positive")
    state = SearchState(spec, inst, start)
    t0 = time.perf_counter()
    m = inst.m
    ev = state.eval
    is_adaptive = spec.kind == "adaptnovelty+"
    while ev.satisfied_total < m:
        if max_flips is not None and state.flips_done >= max_flips:
            break
        if (
            max_seconds is not None
            and state.flips_done % 1024 == 0
            and time.perf_counter() - t0 >= max_seconds
        ):
            break
        v = select_flip(spec, state, rng)
        state.apply_flip(v)
        if ev.satisfied_total > state.best_count:
            state.best_count = ev.satisfied_total
            state.best_found_at_flips = state.flips_done
            state.best_found_at_time = time.perf_counter() - t0
            state.best_assignment = list(ev.assignment)
            state.last_improvement_flip = state.flips_done
        if is_adaptive:
            adapt_noise(state, spec)
    return RunRecord(
        best_count=state.best_count,
        best_found_at_time=state.best_found_at_time,
        best_found_at_flips=state.best_found_at_flips,
        total_flips=state.flips_done,
        final_assignment_of_best=state.best_assignment,
    )
