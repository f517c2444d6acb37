"""Generational GA evolving preambles for one (instance, heuristic) pair.

Fitness of a genome is the pair (S, R): R is the best satisfied count among
a fixed number of playouts from fresh random assignments, S the best count a
budgeted heuristic run reaches when started from the winning playout.  Pairs
order lexicographically; exact ties rank randomly.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from evosat.cnf import Instance, random_assignment, satisfied_count_naive
from evosat.heuristics import HeuristicSpec, run_heuristic
from evosat.preamble import (
    Action,
    Preamble,
    Step,
    distinct_vars,
    format_preamble,
    playout,
    random_preamble,
)


def half_up(x: float) -> int:
    """Round a non-negative float half-up, tolerating binary representation fuzz."""
    return math.floor(x + 0.5 + 1e-9)


def ceil_frac(frac: float, n: int) -> int:
    """ceil(frac * n), exact for rational fractions despite float fuzz."""
    return math.ceil(frac * n - 1e-9)


def floor_frac(frac: float, n: int) -> int:
    return math.floor(frac * n + 1e-9)


class Fitness(NamedTuple):
    S: int  # best count the budgeted heuristic run reached
    R: int  # best count among the playouts themselves


@dataclass
class Individual:
    genome: Preamble
    fitness: Fitness | None = None
    best_assignment: list | None = None  # playout result that achieved R


@dataclass
class GaParams:
    """GA configuration; run length is either generations or a wall budget."""

    pop_size: int = 50
    elite_frac: float = 0.20
    p_crossover: float = 0.25
    p_mutation: float = 0.75
    eval_starts: int = 10
    selection_ratio: float = 20.0
    distinct_floor_frac: float = 0.4
    init_maxlen_frac: float = 1.5
    mutation_frac: float = 0.5
    per_eval_budget: int | None = None  # heuristic flips per evaluation; None = 10 * n
    generations: int | None = None
    time_budget_s: float | None = None

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if not 0.0 <= self.p_crossover <= 1.0:
            raise ValueError("p_crossover must lie in [0, 1]")
        if abs(self.p_crossover + self.p_mutation - 1.0) > 1e-9:
            raise ValueError("operator probabilities must sum to 1")
        for name in ("elite_frac", "distinct_floor_frac", "mutation_frac"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.init_maxlen_frac <= 0:
            raise ValueError("init_maxlen_frac must be positive")
        if self.eval_starts < 1:
            raise ValueError("eval_starts must be >= 1")
        if self.selection_ratio <= 0:
            raise ValueError("selection_ratio must be positive")
        if self.per_eval_budget is not None and self.per_eval_budget < 0:
            raise ValueError("per_eval_budget must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "pop_size": self.pop_size,
            "elite_frac": self.elite_frac,
            "p_crossover": self.p_crossover,
            "p_mutation": self.p_mutation,
            "eval_starts": self.eval_starts,
            "selection_ratio": self.selection_ratio,
            "distinct_floor_frac": self.distinct_floor_frac,
            "init_maxlen_frac": self.init_maxlen_frac,
            "mutation_frac": self.mutation_frac,
            "per_eval_budget": self.per_eval_budget,
            "generations": self.generations,
            "time_budget_s": self.time_budget_s,
        }


def genome_bounds(params: GaParams, n: int) -> tuple[int, int]:
    """(distinct-variable floor, initial max length) for an n-variable instance.

    Floor rounds up, max length rounds down, and the max is raised to the
    floor if the two ever cross on tiny instances.
    """
    floor_v = ceil_frac(params.distinct_floor_frac, n)
    max_len = floor_frac(params.init_maxlen_frac, n)
    return floor_v, max(max_len, floor_v)


def compare(f1: Fitness, f2: Fitness, rng: random.Random) -> int:
    """+1 if f1 ranks above f2, -1 otherwise; exact ties are fair coin flips."""
    if f1 != f2:
        return 1 if f1 > f2 else -1
    return 1 if rng.random() < 0.5 else -1


def rank_population(pop: Sequence[Individual], rng: random.Random) -> list[Individual]:
    """Population sorted fittest first; equal (S, R) groups in random order."""
    if any(ind.fitness is None for ind in pop):
        raise ValueError("population is not fully evaluated")
    return sorted(pop, key=lambda ind: (-ind.fitness.S, -ind.fitness.R, rng.random()))


def selection_weights(ranked: Sequence, ratio: float = 20.0) -> list[float]:
    """Linear rank weights from ratio (fittest) down to exactly 1 (least fit)."""
    size = len(ranked)
    if size < 2:
        raise ValueError("need at least two ranked individuals")
    if ratio <= 0:
        raise ValueError("selection ratio must be positive")
    last = size - 1
    # interpolated so the two endpoints are exact for any population size
    return [(ratio * (last - i) + i) / last for i in range(size)]


def select_parent(pop: Sequence, weights: Sequence[float], rng: random.Random):
    """Roulette-wheel draw over non-negative weights with a positive total."""
    if len(pop) != len(weights):
        raise ValueError("weights do not match population")
    total = 0.0
    for w in weights:
        if w < 0:
            raise ValueError("negative selection weight")
        total += w
    if total <= 0:
        raise ValueError("selection weights sum to zero")
    r = rng.random() * total
    acc = 0.0
    for item, w in zip(pop, weights):
        acc += w
        if r < acc:
            return item
    return pop[-1]


def _min_window_ends(steps: Sequence[Step], target: int) -> list[int]:
    """For each start i, the minimal end j with target distinct vars in steps[i:j].

    Unreachable starts get len(steps) + 1.  Sliding-window, O(len)."""
    length = len(steps)
    res = [length + 1] * length
    counts: dict[int, int] = {}
    distinct = 0
    j = 0
    for i in range(length):
        while distinct < target and j < length:
            v = steps[j].var
            c = counts.get(v, 0)
            counts[v] = c + 1
            if c == 0:
                distinct += 1
            j += 1
        if distinct >= target:
            res[i] = j
        v = steps[i].var
        c = counts[v] - 1
        counts[v] = c
        if c == 0:
            del counts[v]
            distinct -= 1
    return res


def choose_middle(p: Preamble, distinct_floor: int, rng: random.Random) -> tuple[int, int]:
    """Random cut pair (i, j) whose middle has exactly distinct_floor distinct vars.

    Uniform over all feasible pairs; either extreme may be empty.  Raises if
    the genome has fewer than distinct_floor distinct variables.
    """
    steps = p.steps
    length = len(steps)
    if distinct_floor <= 0:
        i = rng.randrange(length + 1)
        return i, i
    lo_ends = _min_window_ends(steps, distinct_floor)
    hi_ends = _min_window_ends(steps, distinct_floor + 1)
    counts = []
    total = 0
    for i in range(length):
        lo = lo_ends[i]
        if lo > length:
            counts.append(0)
            continue
        hi = min(hi_ends[i] - 1, length)
        counts.append(hi - lo + 1)
        total += hi - lo + 1
    if total == 0:
        raise ValueError(
            f"no feasible middle: genome has {distinct_vars(p)} distinct variables,"
            f" the cut needs exactly {distinct_floor}"
        )
    r = rng.randrange(total)
    for i, cnt in enumerate(counts):
        if r < cnt:
            return i, lo_ends[i] + r
        r -= cnt
    raise AssertionError("unreachable")


def crossover(
    p1: Preamble, p2: Preamble, distinct_floor: int, rng: random.Random
) -> tuple[Preamble, Preamble]:
    """Two-point crossover exchanging middles of exactly distinct_floor distinct vars.

    Each parent is cut independently; children swap middles and keep their
    own extremes, so every child again holds at least distinct_floor distinct
    variables.  Child lengths are unconstrained.
    """
    i1, j1 = choose_middle(p1, distinct_floor, rng)
    i2, j2 = choose_middle(p2, distinct_floor, rng)
    s1, s2 = p1.steps, p2.steps
    child1 = Preamble(s1[:i1] + s2[i2:j2] + s1[j1:])
    child2 = Preamble(s2[:i2] + s1[i1:j1] + s2[j2:])
    return child1, child2


def mutate(
    p: Preamble,
    n: int,
    distinct_floor: int,
    rng: random.Random,
    mutation_frac: float = 0.5,
) -> Preamble:
    """Resample half-up(mutation_frac * len) steps, chosen without replacement.

    Each chosen step, in sequence order, receives a fresh uniform
    (variable, action) when the result keeps at least distinct_floor distinct
    variables; otherwise only its action is resampled.  Length is preserved.
    """
    steps = list(p.steps)
    length = len(steps)
    k = half_up(mutation_frac * length)
    if k == 0:
        return Preamble(tuple(steps))
    positions = sorted(rng.sample(range(length), k))
    counts: dict[int, int] = {}
    for s in steps:
        counts[s.var] = counts.get(s.var, 0) + 1
    distinct = len(counts)
    for pos in positions:
        v_old = steps[pos].var
        v_new = rng.randint(1, n)
        action = Action(rng.randrange(3))
        if v_new == v_old:
            steps[pos] = Step(v_old, action)
            continue
        d = distinct
        if counts[v_old] == 1:
            d -= 1
        if counts.get(v_new, 0) == 0:
            d += 1
        if d >= distinct_floor:
            counts[v_old] -= 1
            if counts[v_old] == 0:
                del counts[v_old]
            counts[v_new] = counts.get(v_new, 0) + 1
            distinct = d
            steps[pos] = Step(v_new, action)
        else:
            steps[pos] = Step(v_old, action)
    return Preamble(tuple(steps))


def evaluate(
    ind: Individual,
    inst: Instance,
    spec: HeuristicSpec,
    params: GaParams,
    rng: random.Random,
) -> Fitness:
    """Score a genome and cache the result on the individual.

    R is the best satisfied count over eval_starts playouts from fresh
    uniform assignments (count ties broken randomly); S is the best count of
    one heuristic run of per_eval_budget flips started from the winning
    playout.  S >= R always, since the run starts at R.
    """
    budget = params.per_eval_budget
    if budget is None:
        budget = 10 * inst.n
    best_count = -1
    winners: list[list] = []
    for _ in range(params.eval_starts):
        start = random_assignment(inst.n, rng)
        out = playout(inst, ind.genome, start, rng)
        cnt = satisfied_count_naive(inst, out)
        if cnt > best_count:
            best_count = cnt
            winners = [out]
        elif cnt == best_count:
            winners.append(out)
    chosen = winners[0] if len(winners) == 1 else winners[rng.randrange(len(winners))]
    rec = run_heuristic(spec, inst, chosen, rng, max_flips=budget)
    ind.fitness = Fitness(S=rec.best_count, R=best_count)
    ind.best_assignment = chosen
    return ind.fitness


def next_generation(
    pop: Sequence[Individual],
    inst: Instance,
    spec: HeuristicSpec,
    params: GaParams,
    rng: random.Random,
    *,
    deadline: float | None = None,
    on_evaluated: Callable[[Individual], None] | None = None,
    op_counter: dict | None = None,
) -> list[Individual] | None:
    """One generational step: ranked elites plus freshly evaluated newcomers.

    Elites keep their cached fitness and are never re-evaluated.  Each fill
    draws crossover with p_crossover, else mutation; parents come from the
    current ranked population via rank-weighted roulette.  A final crossover
    that would overshoot the population size drops its second child.  Returns
    None if the wall-clock deadline passes before the population is filled.
    """
    ranked = rank_population(pop, rng)
    elite_n = half_up(params.elite_frac * params.pop_size)
    new_pop: list[Individual] = list(ranked[:elite_n])
    weights = selection_weights(ranked, params.selection_ratio)
    floor_v, _ = genome_bounds(params, inst.n)

    def spawn(genome: Preamble) -> Individual:
        child = Individual(genome)
        evaluate(child, inst, spec, params, rng)
        if on_evaluated is not None:
            on_evaluated(child)
        return child

    while len(new_pop) < params.pop_size:
        if deadline is not None and time.perf_counter() >= deadline:
            return None
        if rng.random() < params.p_crossover:
            if op_counter is not None:
                op_counter["crossover"] = op_counter.get("crossover", 0) + 1
            pa = select_parent(ranked, weights, rng)
            pb = select_parent(ranked, weights, rng)
            c1, c2 = crossover(pa.genome, pb.genome, floor_v, rng)
            new_pop.append(spawn(c1))
            if len(new_pop) < params.pop_size:
                if deadline is not None and time.perf_counter() >= deadline:
                    return None
                new_pop.append(spawn(c2))
        else:
            if op_counter is not None:
                op_counter["mutation"] = op_counter.get("mutation", 0) + 1
            pa = select_parent(ranked, weights, rng)
            new_pop.append(spawn(mutate(pa.genome, inst.n, floor_v, rng, params.mutation_frac)))
    return new_pop


@dataclass
class GenStats:
    generation: int
    best_S: int
    best_R: int
    median_S: int
    median_R: int

    def to_json_dict(self) -> dict:
        return {
            "generation": self.generation,
            "best_S": self.best_S,
            "best_R": self.best_R,
            "median_S": self.median_S,
            "median_R": self.median_R,
        }


@dataclass
class GaRecord:
    """Outcome of one GA run; best is None when no population was ever filled."""

    best: Individual | None
    generations: int
    best_time_s: float | None
    trace: list[GenStats] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        out = {
            "best_S": None,
            "best_R": None,
            "best_time_s": self.best_time_s,
            "generations": self.generations,
            "preamble": None,
            "trace": [t.to_json_dict() for t in self.trace],
        }
        if self.best is not None:
            out["best_S"] = self.best.fitness.S
            out["best_R"] = self.best.fitness.R
            out["preamble"] = format_preamble(self.best.genome)
        return out


def _gen_stats(generation: int, pop: Sequence[Individual], rng: random.Random) -> GenStats:
    ranked = rank_population(pop, rng)
    best = ranked[0].fitness
    median = ranked[len(ranked) // 2].fitness
    return GenStats(generation, best.S, best.R, median.S, median.R)


def run_ga(
    inst: Instance,
    spec: HeuristicSpec,
    params: GaParams,
    rng: random.Random,
) -> GaRecord:
    """Evolve preambles for the instance/heuristic pair.

    Runs exactly params.generations generations (the deterministic mode) or
    until params.time_budget_s of wall clock passes — exactly one of the two
    must be set.  When time expires mid-generation the partial population is
    discarded; the result is the fittest individual of the last fully built
    population, with the wall time at which its fitness value first appeared.
    If not even the initial population could be evaluated, the record
    reports no result.
    """
    if (params.generations is None) == (params.time_budget_s is None):
        raise ValueError("set exactly one of generations / time_budget_s")
    if params.generations is not None and params.generations < 0:
        raise ValueError("generations must be >= 0")
    if params.time_budget_s is not None and params.time_budget_s <= 0:
        raise ValueError("time_budget_s must be positive")
    t0 = time.perf_counter()
    deadline = None if params.time_budget_s is None else t0 + params.time_budget_s
    floor_v, max_len = genome_bounds(params, inst.n)

    best_seen: list = [None, None]  # fitness value, wall time first attained

    def on_evaluated(ind: Individual) -> None:
        if best_seen[0] is None or ind.fitness > best_seen[0]:
            best_seen[0] = ind.fitness
            best_seen[1] = time.perf_counter() - t0

    pop: list[Individual] = []
    for _ in range(params.pop_size):
        if deadline is not None and time.perf_counter() >= deadline:
            return GaRecord(best=None, generations=0, best_time_s=None)
        ind = Individual(random_preamble(inst.n, max_len, floor_v, rng))
        evaluate(ind, inst, spec, params, rng)
        on_evaluated(ind)
        pop.append(ind)
    trace = [_gen_stats(0, pop, rng)]
    generations = 0
    while True:
        if params.generations is not None:
            if generations >= params.generations:
                break
        elif time.perf_counter() >= deadline:
            break
        new_pop = next_generation(
            pop, inst, spec, params, rng, deadline=deadline, on_evaluated=on_evaluated
        )
        if new_pop is None:
            break
        pop = new_pop
        generations += 1
        trace.append(_gen_stats(generations, pop, rng))
    ranked = rank_population(pop, rng)
    return GaRecord(
        best=ranked[0],
        generations=generations,
        best_time_s=best_seen[1],
        trace=trace,
    )
