"""Per-kind move selection, adaptive noise, and the shared run loop."""

import random

import pytest

from conftest import planted_3sat, random_instance
from evosat.cnf import Instance, random_assignment, satisfied_count_naive
from evosat.heuristics import (
    KINDS,
    HeuristicSpec,
    RunRecord,
    SearchState,
    adapt_noise,
    pick_unsat_clause,
    run_heuristic,
    select_flip,
)


def make_state(kind, inst, assignment, **spec_kwargs):
    spec = HeuristicSpec(kind, **spec_kwargs)
    return spec, SearchState(spec, inst, assignment)


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown heuristic kind"):
        HeuristicSpec("brand-new")
    with pytest.raises(ValueError, match="noise"):
        HeuristicSpec("novelty", noise=1.5)
    with pytest.raises(ValueError, match="wp"):
        HeuristicSpec("novelty+", wp=-0.1)
    with pytest.raises(ValueError, match="tabu_tenure"):
        HeuristicSpec("gsat-tabu", tabu_tenure=0)
    with pytest.raises(ValueError, match="adaptive-noise"):
        HeuristicSpec("adaptnovelty+", adapt_phi=1.0)
    with pytest.raises(ValueError, match="adaptive-noise"):
        HeuristicSpec("adaptnovelty+", adapt_theta=0)


def test_default_tabu_tenure_scales_with_n():
    inst = Instance(250, [(1,)])
    _, state = make_state("gsat-tabu", inst, [False] * 250)
    assert state.tabu_tenure == 1 + 250 // 100
    _, state = make_state("walksat-tabu", inst, [False] * 250, tabu_tenure=7)
    assert state.tabu_tenure == 7


def test_adaptnovelty_starts_at_zero_noise():
    inst = Instance(2, [(1, 2)])
    _, state = make_state("adaptnovelty+", inst, [False, False], noise=0.7)
    assert state.current_noise == 0.0
    _, state = make_state("novelty", inst, [False, False], noise=0.7)
    assert state.current_noise == 0.7


def test_pick_unsat_clause_uniform():
    inst = Instance(3, [(1,), (2,), (3,), (-1,)])
    _, state = make_state("novelty", inst, [False] * 3)
    rng = random.Random(0)
    counts = [0] * 4
    for _ in range(3000):
        counts[pick_unsat_clause(state, rng)] += 1
    assert counts[3] == 0
    for c in range(3):
        assert abs(counts[c] / 3000 - 1 / 3) < 0.05


def test_pick_unsat_clause_requires_unsat():
    inst = Instance(1, [(1,)])
    _, state = make_state("novelty", inst, [True])
    with pytest.raises(ValueError, match="no unsatisfied"):
        pick_unsat_clause(state, random.Random(0))


def test_select_flip_none_when_satisfied():
    inst = Instance(2, [(1,), (2,)])
    for kind in KINDS:
        spec, state = make_state(kind, inst, [True, True])
        assert select_flip(spec, state, random.Random(0)) is None


def test_gsat_takes_the_strictly_best_flip():
    # deltas: v1 = +2, v2 = +1, v3 = -1
    inst = Instance(3, [(1,), (1,), (2,), (-3,)])
    spec, state = make_state("gsat", inst, [False, False, True])
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 1


def test_gsat_breaks_ties_uniformly():
    inst = Instance(2, [(1, 2)])  # both flips have delta +1
    spec, state = make_state("gsat", inst, [False, False])
    seen = {select_flip(spec, state, random.Random(seed)) for seed in range(40)}
    assert seen == {1, 2}


def test_hsat_prefers_the_least_recently_flipped():
    inst = Instance(2, [(1, 2), (-1, -2)])
    spec, state = make_state("hsat", inst, [False, False])
    # flip v1 out and back: same position, but now v1 is younger than v2
    state.apply_flip(1)
    state.apply_flip(1)
    assert state.eval.assignment == [False, False]
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 2


def test_gsat_tabu_excludes_and_falls_back():
    # deltas: v1 = +2, v2 = +1
    inst = Instance(2, [(1,), (1,), (2,)])
    spec, state = make_state("gsat-tabu", inst, [False, False], tabu_tenure=50)
    state.tabu_until[0] = 100
    for seed in range(20):
        assert select_flip(spec, state, random.Random(seed)) == 2
    state.tabu_until[1] = 100  # everything tabu: restriction is dropped
    for seed in range(20):
        assert select_flip(spec, state, random.Random(seed)) == 1


def test_walksat_tabu_freebie_ignores_tabu():
    # v1 breaks nothing (freebie), v2 would break (-2)
    inst = Instance(2, [(1, 2), (-2,)])
    spec, state = make_state("walksat-tabu", inst, [False, False])
    state.tabu_until[0] = 100
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 1


def test_walksat_tabu_minimum_break_respects_tabu():
    # no freebie: v1 breaks 1 clause, v2 breaks 2
    inst = Instance(2, [(1, 2), (-1,), (-2,), (-2,)])
    spec, state = make_state("walksat-tabu", inst, [False, False])
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 1
    state.tabu_until[0] = 100
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 2
    state.tabu_until[1] = 100  # all tabu, one unsat clause: retries then gives up
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 1


def novelty_state(clauses, ages, kind="novelty", **kwargs):
    n = len(ages)
    spec, state = make_state(kind, Instance(n, clauses), [False] * n, **kwargs)
    state.last_flip_age[:] = ages
    return spec, state


def test_novelty_takes_best_when_not_youngest():
    # deltas: v1 = +1, v2 = -1; v2 was flipped after v1
    spec, state = novelty_state([(1, 2), (-2,), (-2,)], [1, 4], noise=1.0)
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 1


def test_novelty_second_best_probability():
    # best v1 is also the youngest, so p decides between v1 and v2
    spec0, state = novelty_state([(1, 2), (-2,), (-2,)], [4, 1], noise=0.0)
    for seed in range(30):
        assert select_flip(spec0, state, random.Random(seed)) == 1
    spec1, state = novelty_state([(1, 2), (-2,), (-2,)], [4, 1], noise=1.0)
    for seed in range(30):
        assert select_flip(spec1, state, random.Random(seed)) == 2
    spec, state = novelty_state([(1, 2), (-2,), (-2,)], [4, 1], noise=0.4)
    picks = [select_flip(spec, state, random.Random(seed)) for seed in range(2000)]
    assert abs(picks.count(2) / 2000 - 0.4) < 0.05


def test_novelty_equal_deltas_prefer_older():
    # both flips have delta +1; v2 is older, so v2 is best and v1 youngest
    spec, state = novelty_state([(1, 2)], [3, 1], noise=1.0)
    for seed in range(30):
        assert select_flip(spec, state, random.Random(seed)) == 2


def test_novelty_plus_walks_with_probability_wp():
    # pure novelty never flips v2 here (best v1 is older); the walk does
    spec, state = novelty_state([(1, 2), (-2,), (-2,)], [1, 4], kind="novelty+", noise=0.0, wp=1.0)
    picks = {select_flip(spec, state, random.Random(seed)) for seed in range(50)}
    assert picks == {1, 2}
    spec, state = novelty_state([(1, 2), (-2,), (-2,)], [1, 4], kind="novelty+", noise=0.0, wp=0.0)
    assert all(select_flip(spec, state, random.Random(seed)) == 1 for seed in range(30))


def test_adaptnovelty_uses_current_noise():
    spec, state = novelty_state([(1, 2), (-2,), (-2,)], [4, 1], kind="adaptnovelty+", wp=0.0)
    assert all(select_flip(spec, state, random.Random(seed)) == 1 for seed in range(30))
    state.current_noise = 1.0
    assert all(select_flip(spec, state, random.Random(seed)) == 2 for seed in range(30))


def test_adapt_noise_bump_and_decay():
    inst = Instance(2, [(1,), (1,), (2,), (-1,), (-2,), (2, 1)])  # m = 6
    spec, state = make_state("adaptnovelty+", inst, [False, False], adapt_phi=0.2, adapt_theta=1 / 6)
    # theta * m = 1: two flips without improvement exceed it
    state.flips_done, state.last_improvement_flip = 2, 0
    adapt_noise(state, spec)
    assert state.current_noise == pytest.approx(0.2)
    assert state.last_improvement_flip == 2  # stagnation window restarts
    state.flips_done = 3  # one flip into the new window: no change yet
    adapt_noise(state, spec)
    assert state.current_noise == pytest.approx(0.2)
    state.flips_done = 5
    adapt_noise(state, spec)
    assert state.current_noise == pytest.approx(0.36)
    # an improving flip decays by phi/2
    state.last_improvement_flip = state.flips_done = 6
    adapt_noise(state, spec)
    assert state.current_noise == pytest.approx(0.36 * 0.9)


def test_adapt_noise_stays_below_one():
    inst = Instance(1, [(1,)])
    spec, state = make_state("adaptnovelty+", inst, [False])
    last = 0.0
    for i in range(1, 300):
        state.flips_done = 10 * i
        adapt_noise(state, spec)
        assert last <= state.current_noise < 1.0
        last = state.current_noise
    assert state.current_noise > 0.99


def test_run_heuristic_budget_validation():
    inst = Instance(1, [(1,)])
    rng = random.Random(0)
    with pytest.raises(ValueError, match="budget is required"):
        run_heuristic(HeuristicSpec("gsat"), inst, [False], rng)
    with pytest.raises(ValueError, match="max_flips"):
        run_heuristic(HeuristicSpec("gsat"), inst, [False], rng, max_flips=-1)
    with pytest.raises(ValueError, match="max_seconds"):
        run_heuristic(HeuristicSpec("gsat"), inst, [False], rng, max_seconds=0)


def test_run_heuristic_zero_flips_scores_the_start():
    rng = random.Random(1)
    inst = random_instance(rng, max_n=10, max_m=30)
    start = random_assignment(inst.n, rng)
    rec = run_heuristic(HeuristicSpec("novelty"), inst, start, rng, max_flips=0)
    assert rec.total_flips == 0
    assert rec.best_count == satisfied_count_naive(inst, start)
    assert rec.final_assignment_of_best == start


def test_run_heuristic_stops_when_all_satisfied():
    inst = Instance(1, [(1,)])
    rec = run_heuristic(
        HeuristicSpec("gsat"), inst, [False], random.Random(0), max_flips=100
    )
    assert rec.best_count == 1
    assert rec.total_flips == 1
    assert rec.best_found_at_flips == 1
    assert rec.final_assignment_of_best == [True]


def test_run_heuristic_flip_bound_is_exact():
    inst = Instance(1, [(1,), (-1,)])  # never fully satisfiable
    rec = run_heuristic(
        HeuristicSpec("gsat"), inst, [False], random.Random(0), max_flips=7
    )
    assert rec.total_flips == 7
    assert rec.best_count == 1


def test_run_heuristic_time_budget_checks_every_1024():
    inst = Instance(2, [(1,), (-1,), (2,), (-2,)])
    rec = run_heuristic(
        HeuristicSpec("novelty"), inst, [False, False], random.Random(0), max_seconds=0.05
    )
    assert rec.total_flips > 0
    assert rec.total_flips % 1024 == 0


def test_run_heuristic_is_seed_deterministic():
    rng = random.Random(2)
    inst = random_instance(rng, max_n=15, max_m=60)
    start = random_assignment(inst.n, rng)
    spec = HeuristicSpec("adaptnovelty+")
    a = run_heuristic(spec, inst, start, random.Random(77), max_flips=5000)
    b = run_heuristic(spec, inst, start, random.Random(77), max_flips=5000)
    assert a.best_count == b.best_count
    assert a.best_found_at_flips == b.best_found_at_flips
    assert a.total_flips == b.total_flips
    assert a.final_assignment_of_best == b.final_assignment_of_best


def test_run_record_json_shape():
    rec = RunRecord(10, 0.5, 3, 20, [True])
    assert rec.to_json_dict() == {
        "best_count": 10,
        "best_time_s": 0.5,
        "best_flips": 3,
        "total_flips": 20,
    }


def test_best_tracking_never_regresses():
    rng = random.Random(3)
    inst = random_instance(rng, max_n=12, max_m=50)
    start = random_assignment(inst.n, rng)
    rec = run_heuristic(HeuristicSpec("gwsat", wp=0.3), inst, start, rng, max_flips=3000)
    assert rec.best_count == satisfied_count_naive(inst, rec.final_assignment_of_best)
    assert rec.best_count >= satisfied_count_naive(inst, start)
    assert rec.best_found_at_flips <= rec.total_flips


def test_every_kind_solves_a_planted_instance():
    inst = planted_3sat(7)
    for kind in KINDS:
        rng = random.Random(5)
        rec = run_heuristic(
            HeuristicSpec(kind), inst, random_assignment(inst.n, rng), rng, max_flips=20_000
        )
        assert rec.best_count == inst.m, kind


def test_novelty_success_rate_on_planted_instance():
    inst = planted_3sat(7)
    spec = HeuristicSpec("novelty")
    hits = 0
    for seed in range(20):
        rng = random.Random(seed)
        rec = run_heuristic(
            spec, inst, random_assignment(inst.n, rng), rng, max_flips=20_000
        )
        hits += rec.best_count == inst.m
    assert hits >= 18
