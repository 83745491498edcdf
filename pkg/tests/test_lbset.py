import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ASSIGN_LB
from oracles import brute_front, in_upper_hull, simplex_grid, weighted_lp_value
from lpbm.front import dominates
from lpbm.indicators import hypervolume
from lpbm.lbset import (BoundSet, InfeasibleError, RelaxedSolution, bound_covers, compute_lb_set,
                        fractionality, supported_point)
from lpbm.model import gen_mokp, gen_moap, gen_toflp, instance_from_dict


def _rs(x):
    x = np.asarray(x, dtype=float)
    return RelaxedSolution(x, np.zeros(3))


def test_fractionality_counts():
    assert fractionality(BoundSet([_rs([0, 1]), _rs([1, 1]), _rs([0, 0])])) == 0.0
    assert fractionality(BoundSet([_rs([0.5, 1])] * 4)) == 1.0
    assert fractionality(BoundSet([_rs([0.3, 1])] + [_rs([0, 1])] * 4)) == pytest.approx(0.2)
    assert BoundSet([_rs([1 - 1e-7, 0])]).fractionality == 0.0
    with pytest.raises(ValueError):
        fractionality(BoundSet([]))


def test_supported_point_summed_profits(knapsack):
    sol = supported_point(knapsack, np.ones(3))
    np.testing.assert_allclose(sol.x, [0.375, 1, 1, 1], atol=1e-9)
    np.testing.assert_allclose(sol.image, knapsack.objectives @ sol.x)
    assert not sol.is_integral


def test_supported_point_rejects_bad_weights(knapsack):
    with pytest.raises(ValueError):
        supported_point(knapsack, [0, 0, 0])
    with pytest.raises(ValueError):
        supported_point(knapsack, [1, -1, 1])


def test_identical_objectives_give_one_point():
    inst = instance_from_dict({"n": 3, "objectives": [[1, 2, 3]] * 3,
                               "constraints": [{"coeffs": [[0, 1], [1, 1], [2, 1]], "sense": ">=", "rhs": 2}]})
    bs = compute_lb_set(inst)
    assert len(bs) == 1 and bs.complete
    np.testing.assert_allclose(bs.solutions[0].image, [3, 3, 3])


def test_assignment_fixture_lb_set_is_the_three_permutations(assignment):
    bs = compute_lb_set(assignment)
    assert bs.complete and bs.fractionality == 0.0
    got = sorted(tuple(np.rint(s.x).astype(int)) for s in bs.solutions)
    assert got == sorted(tuple(x) for x in ASSIGN_LB)


def test_moap_relaxation_is_integral():
    for t in (3, 4):
        assert compute_lb_set(gen_moap(t, 11)).fractionality == 0.0


def test_knapsack_lb_set_is_fractional():
    assert compute_lb_set(gen_mokp(10, 1)).fractionality > 0.2


def test_infeasible_relaxation_raises():
    inst = instance_from_dict({"n": 2, "objectives": [[1, 0], [0, 1], [1, 1]],
                               "constraints": [{"coeffs": [[0, 1], [1, 1]], "sense": ">=", "rhs": 3}]})
    with pytest.raises(InfeasibleError):
        compute_lb_set(inst)


def test_partial_result_is_still_lp_feasible():
    inst = gen_toflp(3, 1)
    bs = compute_lb_set(inst, time_limit=1e-9)
    assert not bs.complete and len(bs) >= 1
    a = np.asarray(inst.matrix, dtype=float)
    for s in bs.solutions:
        act = a @ s.x
        for i, sense in enumerate(inst.row_senses):
            b = float(inst.rhs[i])
            assert (act[i] >= b - 1e-7) if sense == ">=" else (act[i] <= b + 1e-7) if sense == "<=" \
                else abs(act[i] - b) <= 1e-7


def test_bi_objective_uses_dichotomic_scheme():
    inst = instance_from_dict({"n": 5, "objectives": [[-5, -1, -4, -3, -2], [-1, -5, -2, -2, -4]],
                               "constraints": [{"coeffs": [[j, w] for j, w in enumerate([3, 4, 2, 5, 3])],
                                                "sense": "<=", "rhs": 9}]})
    bs = compute_lb_set(inst)
    imgs = bs.images
    assert imgs.shape[1] == 2 and bs.complete
    for k in range(51):
        w = np.array([k / 50, 1 - k / 50])
        assert (imgs @ w).min() == pytest.approx(weighted_lp_value(inst, w), abs=1e-6)


def _check_invariants(inst, bs):
    imgs = bs.images
    for i, s in enumerate(bs.solutions):
        assert np.all(s.x >= -1e-7) and np.all(s.x <= 1 + 1e-7)
        np.testing.assert_allclose(s.image, inst.objectives @ s.x, atol=1e-9)
        assert not any(dominates(imgs[j], imgs[i]) for j in range(len(imgs)) if j != i)


@pytest.mark.parametrize("seed", range(4))
def test_grid_oracle_small_knapsack(seed):
    inst = gen_mokp(5, seed)
    bs = compute_lb_set(inst)
    assert bs.complete
    _check_invariants(inst, bs)
    imgs = bs.images
    for w in simplex_grid(10):
        assert (imgs @ w).min() == pytest.approx(weighted_lp_value(inst, w), abs=1e-6)


@pytest.mark.parametrize("make", [lambda: gen_mokp(8, 2), lambda: gen_moap(3, 4), lambda: gen_toflp(2, 3)])
def test_bound_property_against_enumeration(make):
    inst = make()
    bs = compute_lb_set(inst)
    _check_invariants(inst, bs)
    for y in brute_front(inst):
        assert in_upper_hull(bs.images, y)
        assert bound_covers(bs, y)


def test_bound_covers_rejects_points_below_the_frontier(knapsack):
    bs = compute_lb_set(knapsack)
    low = bs.images.min(axis=0) - 1.0
    assert not bound_covers(bs, low)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_hypervolume_never_drops_between_rounds(items, seed):
    inst = gen_mokp(items, seed)
    bs = compute_lb_set(inst)
    trail = bs.found_images
    ref = trail.max(axis=0) + 1.0
    vols = [hypervolume(trail[:k], ref) for k in bs.history]
    assert all(b >= a - 1e-9 for a, b in zip(vols, vols[1:]))
    # stripping dominated discoveries does not change the covered volume
    assert hypervolume(bs.images, ref) == pytest.approx(vols[-1], abs=1e-9)
