"""Search drivers: FP+, feasibility pump with generic path relinking, and the LPBM dispatcher."""
from __future__ import annotations

import logging
import time
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .front import Front, filter_nondominated
from .lbset import BoundSet, compute_lb_set
from .model import BinarySolution, Instance, evaluate, is_feasible
from .pump import ARCHIVED, Archive, TabuList, core_fp

log = logging.getLogger(__name__)

FP_PLUS = "FP+"
FPGPR = "FPGPR"
DIFF_TOL = 1e-6


@dataclass
class Params:
    bensolve_time_limit: float = 600.0
    algo_time_limit: float = 120.0
    allowed_fractionality: float = 0.20
    fp_iter: int = 10
    gpr_iter: int = 20
    seed: int = 0

    def __post_init__(self):
        if min(self.bensolve_time_limit, self.algo_time_limit) <= 0 or min(self.fp_iter, self.gpr_iter) < 0:
            raise ValueError("time limits must be positive and iteration counts nonnegative")
        if not 0.0 <= self.allowed_fractionality <= 1.0:
            raise ValueError("allowed_fractionality must lie in [0, 1]")


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named consumer, derived from a single seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(zlib.crc32(name.encode()),))
    return np.random.default_rng(ss)


class _Clock:
    def __init__(self, budget: float):
        self.start = time.perf_counter()
        self.budget = budget

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self, fraction: float = 1.0) -> bool:
        return self.elapsed() > self.budget * fraction


def _key(v: np.ndarray) -> bytes:
    return np.asarray(v, dtype=np.float64).tobytes()


def _snap(x) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    x[np.abs(x) <= DIFF_TOL] = 0.0
    x[np.abs(x - 1) <= DIFF_TOL] = 1.0
    return x


def _is_binary(v: np.ndarray) -> bool:
    return bool(np.all((v == 0) | (v == 1)))


def pump_candidate(inst: Instance, x_tilde, archive: Archive, tabu: TabuList, rng,
                   fp_iter: int, trace: list | None = None) -> int:
    """Run CoreFP ``fp_iter + 1`` times on one candidate; return how many solutions were archived.

    Every call starts from the same candidate, but the archive and tabu list
    it leaves behind push the next call to a different rounding or flip.
    Each call solves at most ``fp_iter`` distance LPs.
    """
    found = 0
    for _ in range(fp_iter + 1):
        if core_fp(inst, x_tilde, archive, tabu, rng, max_pumps=fp_iter, trace=trace) == ARCHIVED:
            found += 1
    return found


def _draw_pair(rng, k: int, used: set, ordered: bool) -> tuple[int, int] | None:
    """Uniform unused pair of distinct indices below ``k``, or None if all are used."""
    total = k * (k - 1) if ordered else k * (k - 1) // 2
    if len(used) >= total:
        return None
    for _ in range(64):
        i, j = (int(v) for v in rng.choice(k, size=2, replace=False))
        if not ordered and i > j:
            i, j = j, i
        if (i, j) not in used:
            return i, j
    if ordered:
        free = [(i, j) for i in range(k) for j in range(k) if i != j and (i, j) not in used]
    else:
        free = [(i, j) for i in range(k) for j in range(i + 1, k) if (i, j) not in used]
    return free[int(rng.integers(len(free)))]


def fp_plus(inst: Instance, bs: BoundSet, params: Params, rng, flip_rng=None,
            clock: _Clock | None = None, trace: list | None = None) -> Front:
    """FP+ for nearly integral bound sets: pump midpoints of random pairs.

    ``rng`` draws the pairs; ``flip_rng`` (default: ``rng``) drives the
    random restarts inside flip.
    """
    clock = clock or _Clock(params.algo_time_limit)
    flip_rng = rng if flip_rng is None else flip_rng
    archive = Archive(inst)
    integral = [np.rint(s.x).astype(np.int8) for s in bs.solutions if s.is_integral]
    tabu = TabuList(integral)
    for x in integral:
        archive.add(x)
    pool: list[np.ndarray] = [_snap(s.x) for s in bs.solutions]
    pool_keys = {_key(v) for v in pool}
    fed = 0
    used: set[tuple[int, int]] = set()

    while not clock.expired():
        # newly archived integer solutions join the pool
        for sol in archive.members[fed:]:
            v = sol.x.astype(np.float64)
            if _key(v) not in pool_keys:
                pool.append(v)
                pool_keys.add(_key(v))
        fed = len(archive.members)
        pair = _draw_pair(rng, len(pool), used, ordered=False)
        if pair is None:
            break
        used.add(pair)
        x1, x2 = pool[pair[0]], pool[pair[1]]
        x_tilde = 0.5 * x1 + 0.5 * x2
        step_trace = None if trace is None else []
        pump_candidate(inst, x_tilde, archive, tabu, flip_rng, params.fp_iter, step_trace)
        if trace is not None:
            trace.append({"pair": pair, "steps": step_trace})

    return filter_nondominated(archive.members, inst)


# --------------------------------------------------------------------------
# path relinking


def create_neighbours(s_i, dif: Sequence[int], tabu_si: set | None = None) -> list[np.ndarray]:
    """One-coordinate moves of ``s_i`` on the indices in ``dif``.

    Integral coordinates are flipped; fractional ones yield two neighbours,
    set to 1 and to 0.  Neighbours whose key is in ``tabu_si`` are dropped.
    """
    s_i = np.asarray(s_i, dtype=np.float64)
    out = []
    for j in dif:
        v = s_i[j]
        if v == 0 or v == 1:
            targets = (1.0 - v,)
        else:
            targets = (1.0, 0.0)
        for t in targets:
            nb = s_i.copy()
            nb[j] = t
            if tabu_si is None or _key(nb) not in tabu_si:
                out.append(nb)
    return out


def next_si(neighbours: Sequence[np.ndarray], s_i_image, inst: Instance) -> np.ndarray:
    """Pick the neighbour with the best summed per-objective rank.

    Feasible neighbours are preferred whenever one exists.  ``s_i_image`` is
    accepted for interface symmetry; ranking by raw objective value gives
    the same order as ranking by ratio to a positive current image.
    """
    if not neighbours:
        raise ValueError("next_si needs at least one neighbour")
    idx = list(range(len(neighbours)))
    feas = [i for i in idx if is_feasible(inst, neighbours[i])]
    if feas:
        idx = feas
    if len(idx) == 1:
        return neighbours[idx[0]]
    imgs = np.array([evaluate(inst, neighbours[i]) for i in idx], dtype=np.float64)
    # best (smallest) value receives the largest rank
    ranks = np.column_stack([(imgs[:, k][None, :] >= imgs[:, k][:, None]).sum(axis=1)
                             for k in range(imgs.shape[1])])
    degree = ranks.sum(axis=1)
    best = int(np.argmax(degree))  # first maximum: ascending creation order
    return neighbours[idx[best]]


class _CandX:
    """Candidate list for path relinking with constant-time membership."""

    def __init__(self):
        self.items: list[np.ndarray] = []
        self.index: dict[bytes, int] = {}

    def add(self, v: np.ndarray) -> bool:
        k = _key(v)
        if k in self.index:
            return False
        self.index[k] = len(self.items)
        self.items.append(v)
        return True

    def __contains__(self, v) -> bool:
        return _key(v) in self.index

    def __len__(self):
        return len(self.items)


def relink(inst: Instance, s_i, s_g, cand: _CandX, tabu_si: set, gpr_iter: int,
           trace: list | None = None) -> np.ndarray:
    """Walk from ``s_i`` towards ``s_g``, harvesting feasible integer neighbours into ``cand``.

    The walk stops on reaching ``s_g``, after ``gpr_iter`` steps, when no
    neighbour is left, or when the chosen neighbour was already visited on
    this walk.  Returns the last initiating solution.
    """
    s_i = np.asarray(s_i, dtype=np.float64)
    s_g = np.asarray(s_g, dtype=np.float64)
    visited = {_key(s_i)}
    for _ in range(gpr_iter):
        dif = np.flatnonzero(np.abs(s_i - s_g) > DIFF_TOL)
        if dif.size == 0:
            break
        neighbours = create_neighbours(s_i, dif, tabu_si)
        if trace is not None:
            trace.append({"s_i": s_i, "neighbours": neighbours})
        if not neighbours:
            break
        for nb in neighbours:
            if _is_binary(nb) and nb not in cand and is_feasible(inst, nb):
                cand.add(nb)
        nxt = next_si(neighbours, evaluate(inst, s_i), inst)
        if trace is not None:
            trace[-1]["next"] = nxt
        if _key(nxt) in visited:
            break
        visited.add(_key(nxt))
        s_i = nxt
        if s_i not in cand:
            tabu_si.add(_key(s_i))
    return s_i


def fpgpr(inst: Instance, bs: BoundSet, params: Params, rng, flip_rng=None,
          clock: _Clock | None = None, trace: list | None = None) -> Front:
    """Feasibility pump on the bound set, then path relinking on what it produced.

    ``trace`` (optional) receives one ``(initiating, guiding)`` index pair per walk.
    """
    clock = clock or _Clock(params.algo_time_limit)
    flip_rng = rng if flip_rng is None else flip_rng
    archive = Archive(inst)
    tabu = TabuList()
    pool = [_snap(s.x) for s in bs.solutions]

    # stage 1: pump every bound-set point, in random order, for half the budget
    while pool and not clock.expired(0.5):
        x_tilde = pool.pop(int(rng.integers(len(pool))))
        pump_candidate(inst, x_tilde, archive, tabu, flip_rng, params.fp_iter)

    # stage 2: path relinking
    cand = _CandX()
    for sol in archive.members:
        cand.add(sol.x.astype(np.float64))
    for v in pool:
        cand.add(v)
    ig_pairs: set[tuple[int, int]] = set()
    tabu_si: set[bytes] = set()

    while not clock.expired() and len(cand) >= 2:
        pair = _draw_pair(rng, len(cand), ig_pairs, ordered=True)
        if pair is None:
            break
        ig_pairs.add(pair)
        if trace is not None:
            trace.append(pair)
        s_i, s_g = cand.items[pair[0]], cand.items[pair[1]]
        end = relink(inst, s_i, s_g, cand, tabu_si, params.gpr_iter)
        end_idx = cand.index.get(_key(end))
        if end_idx is not None and end_idx != pair[1]:
            ig_pairs.add((end_idx, pair[1]))

    sols = [BinarySolution(v.astype(np.int8), evaluate(inst, v.astype(np.int8)))
            for v in cand.items if _is_binary(v)]
    return filter_nondominated(sols, inst)


# --------------------------------------------------------------------------


def choose_branch(bs: BoundSet, params: Params) -> str:
    return FP_PLUS if bs.fractionality <= params.allowed_fractionality else FPGPR


def lpbm(inst: Instance, params: Params | None = None) -> Front:
    """Bound set, then FP+ or FPGPR depending on its fractionality."""
    params = params or Params()
    t0 = time.perf_counter()
    bs = compute_lb_set(inst, params.bensolve_time_limit)
    t_lb = time.perf_counter() - t0
    branch = choose_branch(bs, params)
    rng = stream(params.seed, "search")
    flip_rng = stream(params.seed, "pump")
    if branch == FP_PLUS:
        front = fp_plus(inst, bs, params, rng, flip_rng)
    else:
        front = fpgpr(inst, bs, params, rng, flip_rng)
    wall = time.perf_counter() - t0
    front.stats = {
        "branch": branch,
        "fractionality": bs.fractionality,
        "lb_size": len(bs),
        "lb_complete": bs.complete,
        "seed": params.seed,
        "instance": inst.name,
        "n": inst.n,
    }
    front.timing = {"time_s": wall, "lb_time_s": t_lb}
    if not front.points:
        front.stats["status"] = "empty"
        log.warning("no feasible solution found for %s", inst.name)
    else:
        front.stats["status"] = "ok"
    return front
