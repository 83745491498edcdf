"""Feasibility pump building blocks: rounding, tabu list, flip, distance LP, CoreFP."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .lbset import InfeasibleError, RelaxedSolution, relaxation, relaxed_solution
from .model import BinarySolution, Instance, bit_key, evaluate, is_feasible
from .simplex import solve_lp

ARCHIVED = "archived"
EXHAUSTED = "exhausted"


class TabuList:
    """Bit vectors the pump must not return to."""

    def __init__(self, members: Iterable = ()):
        self._keys: set[bytes] = set()
        for x in members:
            self.add(x)

    def add(self, x) -> None:
        self._keys.add(bit_key(x))

    def __contains__(self, x) -> bool:
        return bit_key(x) in self._keys

    def __len__(self):
        return len(self._keys)


class Archive:
    """Feasible binary solutions found so far, without duplicates.

    Dominated members are kept; filtering happens at the end of a run.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.members: list[BinarySolution] = []
        self._index: set[bytes] = set()

    def __contains__(self, x) -> bool:
        return bit_key(x) in self._index

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def add(self, x) -> bool:
        """Insert ``x`` if it is feasible and new; report whether it was inserted."""
        x = np.asarray(x, dtype=np.int8)
        key = bit_key(x)
        if key in self._index or not is_feasible(self.inst, x):
            return False
        self._index.add(key)
        self.members.append(BinarySolution(x, evaluate(self.inst, x)))
        return True


def round_solution(x) -> np.ndarray:
    """Nearest 0/1 vector; exact halves go up."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < -1e-7) or np.any(x > 1 + 1e-7):
        raise ValueError("coordinates must lie in [0, 1]")
    return (x >= 0.5).astype(np.int8)


def flip(tabu: TabuList, x_tilde, x_r, rng, exclude=None) -> np.ndarray | None:
    """Escape the tabu list by flipping coordinates of ``x_r``.

    Coordinates are ordered by ``|x_tilde - x_r|`` (largest first, ties by
    index).  First the cumulative prefix flips are tried in that order; if all
    are tabu, up to N random restarts each flip a random subset of between
    ceil(N/2) and N-1 of the ordered positions.  ``rng`` needs ``integers``
    and ``choice`` with NumPy Generator semantics.  ``exclude`` (any
    container of bit vectors, e.g. an :class:`Archive`) is skipped like tabu.
    """
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    x_r = np.asarray(x_r, dtype=np.int8)
    if x_tilde.shape != x_r.shape:
        raise ValueError("x_tilde and x_r must have the same length")
    n = x_r.shape[0]
    dist = np.abs(x_tilde - x_r)
    order = np.lexsort((np.arange(n), -dist))

    def free(v) -> bool:
        return v not in tabu and (exclude is None or v not in exclude)

    cand = x_r.copy()
    for j in order:
        cand[j] = 1 - cand[j]
        if free(cand):
            return cand.copy()

    lo, hi = math.ceil(n / 2), n - 1
    if lo > hi:
        return None
    for _ in range(n):
        cand = x_r.copy()
        num = int(rng.integers(lo, hi + 1))
        picks = np.asarray(rng.choice(n, size=num, replace=False))
        pos = order[picks]
        cand[pos] = 1 - cand[pos]
        if free(cand):
            return cand
    return None


def find_new_lp(inst: Instance, x_r) -> RelaxedSolution | None:
    """Relaxation vertex closest to ``x_r`` in L1 distance, or None if the LP fails."""
    x_r = np.asarray(x_r)
    if x_r.shape != (inst.n,):
        raise ValueError(f"expected a vector of length {inst.n}")
    cost = np.where(x_r == 1, -1.0, 1.0)
    res = solve_lp(relaxation(inst, cost))
    if res.status == "infeasible":
        raise InfeasibleError("LP relaxation is infeasible")
    if not res.optimal:
        return None
    return relaxed_solution(inst, res.x)


def core_fp(inst: Instance, x_tilde, archive: Archive, tabu: TabuList, rng,
            max_pumps: int = 10, trace: list | None = None) -> str:
    """One pump from ``x_tilde``: round, archive, flip or project, repeat.

    Returns ``"archived"`` when a new feasible solution entered ``archive``,
    otherwise ``"exhausted"``.  At most ``max_pumps`` distance LPs are solved.
    ``trace`` (optional) collects one dict per step for inspection.
    """
    x_tilde = np.asarray(getattr(x_tilde, "x", x_tilde), dtype=np.float64)
    pumps = 0
    while True:
        x_r = round_solution(x_tilde)
        step = {"x_tilde": x_tilde, "x_r": x_r}
        if trace is not None:
            trace.append(step)
        feasible = is_feasible(inst, x_r)
        if feasible and x_r not in archive:
            archive.add(x_r)
            step["archived"] = x_r
            return ARCHIVED
        if x_r in tabu:
            # skipping archived vectors lets repeated calls reach new solutions
            x_flip = flip(tabu, x_tilde, x_r, rng, exclude=archive)
            step["x_flip"] = x_flip
            if x_flip is None:
                return EXHAUSTED
            if x_flip in archive:
                return EXHAUSTED
            if archive.add(x_flip):
                step["archived"] = x_flip
                return ARCHIVED
            # infeasible flips join the tabu list so a later call moves on
            tabu.add(x_flip)
            return EXHAUSTED
        if feasible:
            # already archived and never pumped: nothing new reachable from here
            return EXHAUSTED
        if pumps >= max_pumps:
            return EXHAUSTED
        tabu.add(x_r)
        new = find_new_lp(inst, x_r)
        pumps += 1
        step["lp"] = None if new is None else new.x
        if new is None:
            return EXHAUSTED
        x_tilde = new.x
