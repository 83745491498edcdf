import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ASSIGN_LB
from lpbm.model import gen_mokp, gen_toflp, is_feasible
from lpbm.pump import ARCHIVED, EXHAUSTED, Archive, TabuList, core_fp, find_new_lp, flip, round_solution

TABLE_MEAN_12 = [0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 1]
TABLE_MEAN_23 = [0, 0.5, 0.5, 0.5, 0.5, 0, 0.5, 0, 0.5]


def test_round_half_goes_up():
    assert round_solution(TABLE_MEAN_12).tolist() == [1, 1, 0, 1, 1, 0, 0, 0, 1]
    assert round_solution(TABLE_MEAN_23).tolist() == [0, 1, 1, 1, 1, 0, 1, 0, 1]
    assert round_solution([0.49999, 1e-8, 1 + 1e-8]).tolist() == [0, 0, 1]
    with pytest.raises(ValueError):
        round_solution([1.2])


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_round_keeps_integral_coordinates(x):
    r = round_solution(x)
    for v, b in zip(x, r):
        if v in (0.0, 1.0):
            assert b == v
    assert round_solution(r).tolist() == r.tolist()


def test_archive_rejects_duplicates_and_infeasible(knapsack):
    arch = Archive(knapsack)
    assert arch.add([0, 1, 1, 1])
    assert not arch.add([0, 1, 1, 1])
    assert not arch.add([1, 1, 1, 1])
    assert len(arch) == 1 and [0, 1, 1, 1] in arch
    np.testing.assert_array_equal(arch.members[0].objectives, [-14, -19, -12])


def test_flip_with_empty_tabu_flips_most_fractional():
    out = flip(TabuList(), [0.2, 0.9, 0.6], [0, 1, 1], np.random.default_rng(0))
    assert out.tolist() == [0, 1, 0]
    # ties go to the lower index
    out = flip(TabuList(), [0.5, 0.5], [1, 1], np.random.default_rng(0))
    assert out.tolist() == [0, 1]


def test_flip_prefix_is_cumulative():
    tabu = TabuList([[0, 1, 0]])
    out = flip(tabu, [0.2, 0.9, 0.6], [0, 1, 1], np.random.default_rng(0))
    # ordered by distance: index 2 (0.4), index 0 (0.2), index 1 (0.1)
    assert out.tolist() == [1, 1, 0]


def test_flip_exhaustion_returns_none():
    every = [[a, b] for a in (0, 1) for b in (0, 1)]
    assert flip(TabuList(every), [0.5, 0.5], [1, 1], np.random.default_rng(0)) is None


def test_flip_random_phase_subset_size():
    n = 8
    x_r = np.zeros(n, dtype=np.int8)
    x_tilde = np.linspace(0.45, 0.05, n)
    order = np.arange(n)
    prefixes = []
    cand = x_r.copy()
    for j in order:
        cand[j] = 1
        prefixes.append(cand.copy())
    tabu = TabuList(prefixes)
    for seed in range(20):
        out = flip(tabu, x_tilde, x_r, np.random.default_rng(seed))
        assert out is not None and out not in tabu
        assert math.ceil(n / 2) <= int(out.sum()) <= n - 1


def test_flip_skips_excluded_vectors():
    excl = TabuList([[0, 1, 0]])
    out = flip(TabuList(), [0.2, 0.9, 0.6], [0, 1, 1], np.random.default_rng(0), exclude=excl)
    assert out.tolist() == [1, 1, 0]


def test_flip_length_mismatch():
    with pytest.raises(ValueError):
        flip(TabuList(), [0.5], [1, 0], np.random.default_rng(0))


def test_distance_lp_on_assignment(assignment):
    new = find_new_lp(assignment, np.array([0, 1, 1, 1, 1, 0, 1, 0, 1]))
    assert new.x.tolist() == [0, 0, 1, 0, 1, 0, 1, 0, 0]
    same = find_new_lp(assignment, ASSIGN_LB[0])
    assert same.x.tolist() == ASSIGN_LB[0].tolist()
    with pytest.raises(ValueError):
        find_new_lp(assignment, np.ones(3))


def test_core_fp_archives_feasible_rounding(knapsack):
    arch, tabu = Archive(knapsack), TabuList()
    assert core_fp(knapsack, [0, 1, 1, 0.6], arch, tabu, np.random.default_rng(0)) == ARCHIVED
    assert [m.x.tolist() for m in arch] == [[0, 1, 1, 1]]
    assert len(tabu) == 0


def test_core_fp_stops_on_known_feasible_rounding(knapsack):
    arch, tabu = Archive(knapsack), TabuList()
    arch.add([0, 1, 1, 1])
    assert core_fp(knapsack, [0, 1, 1, 0.6], arch, tabu, np.random.default_rng(0)) == EXHAUSTED
    assert len(arch) == 1


def test_core_fp_table_pair_23_first_call(assignment, assignment_lb):
    arch = Archive(assignment)
    for x in ASSIGN_LB:
        arch.add(x)
    tabu = TabuList(ASSIGN_LB)
    trace = []
    core_fp(assignment, TABLE_MEAN_23, arch, tabu, np.random.default_rng(0), trace=trace)
    assert trace[0]["x_r"].tolist() == [0, 1, 1, 1, 1, 0, 1, 0, 1]
    assert trace[0]["lp"].tolist() == [0, 0, 1, 0, 1, 0, 1, 0, 0]
    # the projected point rounds to a known vector, so flip takes over
    assert trace[1]["x_r"].tolist() == [0, 0, 1, 0, 1, 0, 1, 0, 0]
    assert "x_flip" in trace[1]
    assert [0, 1, 1, 1, 1, 0, 1, 0, 1] in tabu


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 8), st.integers(0, 5000), st.data(), st.integers(0, 6))
def test_core_fp_invariants(items, seed, data, cap):
    inst = gen_mokp(items, seed) if seed % 2 else gen_toflp(2, seed)
    n = inst.n
    arch, tabu = Archive(inst), TabuList()
    rng = np.random.default_rng(seed)
    for _ in range(3):
        x = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
        trace = []
        out = core_fp(inst, x, arch, tabu, rng, max_pumps=cap, trace=trace)
        assert out in (ARCHIVED, EXHAUSTED)
        assert sum("lp" in s for s in trace) <= cap
    assert all(is_feasible(inst, m.x) for m in arch)
    assert not any(m.x in tabu for m in arch)
