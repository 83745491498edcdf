import copy
import sys

import numpy as np
import pytest

from lpbm.lbset import BoundSet, relaxed_solution
from lpbm.model import ConstraintRow, Instance, instance_from_dict

KNAPSACK_P = [[3, 5, 7, 2], [6, 1, 8, 10], [4, 7, 1, 4]]
KNAPSACK_W = [8, 6, 7, 4]
KNAPSACK_CAP = 20

ASSIGN_LB = np.array([
    [1, 0, 0, 0, 1, 0, 0, 0, 1],
    [0, 1, 0, 1, 0, 0, 0, 0, 1],
    [0, 0, 1, 0, 1, 0, 1, 0, 0],
])


def knapsack_doc():
    return copy.deepcopy({
        "name": "knapsack4",
        "n": 4,
        "p": 3,
        "objectives": KNAPSACK_P,
        "senses": ["max", "max", "max"],
        "constraints": [{"coeffs": [[j, w] for j, w in enumerate(KNAPSACK_W)],
                         "sense": "<=", "rhs": KNAPSACK_CAP}],
        "family": "mokp",
    })


def assignment_rows(t):
    rows = [ConstraintRow.build(((r * t + l, 1) for l in range(t)), "=", 1) for r in range(t)]
    rows += [ConstraintRow.build(((r * t + l, 1) for r in range(t)), "=", 1) for l in range(t)]
    return tuple(rows)


def assignment_instance():
    """3x3 assignment whose k-th objective is 0 on the k-th listed permutation, 10 elsewhere."""
    cost = np.where(ASSIGN_LB == 1, 0, 10).astype(np.int64)
    return Instance("assign3", 9, cost, assignment_rows(3), family="moap")


class ForcedPairs:
    """Generator wrapper whose first ``choice`` calls return scripted index pairs."""

    def __init__(self, pairs, seed=0):
        self.pairs = [np.array(p) for p in pairs]
        self.base = np.random.default_rng(seed)

    def choice(self, k, size=None, replace=True):
        if self.pairs and size == 2:
            return self.pairs.pop(0)
        return self.base.choice(k, size=size, replace=replace)

    def integers(self, *args, **kwargs):
        return self.base.integers(*args, **kwargs)


@pytest.fixture
def knapsack():
    return instance_from_dict(knapsack_doc())


@pytest.fixture
def assignment():
    return assignment_instance()


@pytest.fixture
def assignment_lb(assignment):
    return BoundSet([relaxed_solution(assignment, x) for x in ASSIGN_LB])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
