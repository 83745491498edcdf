"""Exact nondominated front by complete enumeration (small instances only)."""
from __future__ import annotations

import numpy as np

from .front import Front, filter_nondominated, nondominated_mask
from .model import BinarySolution, Instance

DEFAULT_MAX_N = 22
FLOAT_TOL = 1e-6


def _bit_table(bits: int) -> np.ndarray:
    """All 0/1 rows of width ``bits``; row ``i`` is the binary expansion of ``i``, LSB first."""
    idx = np.arange(1 << bits, dtype=np.int64)
    return ((idx[:, None] >> np.arange(bits)) & 1).astype(np.int8)


def _row_ok(act: np.ndarray, inst: Instance) -> np.ndarray:
    """Feasibility of many activity rows at once (``act`` is k x m)."""
    ge, le, eq = inst._sense_masks
    b = inst.rhs
    if act.dtype.kind in "iu":
        tol = np.zeros(len(b), dtype=act.dtype)
    else:
        tol = FLOAT_TOL * np.maximum(1.0, np.abs(b))
    ok = np.ones(len(act), dtype=bool)
    if ge.any():
        ok &= np.all(act[:, ge] >= b[ge] - tol[ge], axis=1)
    if le.any():
        ok &= np.all(act[:, le] <= b[le] + tol[le], axis=1)
    if eq.any():
        ok &= np.all(np.abs(act[:, eq] - b[eq]) <= tol[eq], axis=1)
    return ok


def exact_front(inst: Instance, max_n: int = DEFAULT_MAX_N) -> Front:
    """Enumerate every 0/1 vector and keep the feasible nondominated images.

    The variables are split into a low and a high half.  Objective and
    constraint contributions of all low-half patterns are tabulated once; each
    high-half pattern then adds its own contribution to the whole table.  With
    integer data everything is exact int64 arithmetic.
    """
    n = inst.n
    if n > max_n:
        raise ValueError(f"exact enumeration refused for n={n} > {max_n}; "
                         "use a smaller instance or raise max_n explicitly")
    exact = inst.integral
    dtype = np.int64 if exact else np.float64
    c = inst.objectives.astype(dtype)
    a = inst.matrix.astype(dtype)

    lo_bits = (n + 1) // 2
    hi_bits = n - lo_bits
    lo_x = _bit_table(lo_bits)
    lo_obj = lo_x.astype(dtype) @ c[:, :lo_bits].T
    lo_act = lo_x.astype(dtype) @ a[:, :lo_bits].T
    hi_x = _bit_table(hi_bits)
    hi_obj = hi_x.astype(dtype) @ c[:, lo_bits:].T
    hi_act = hi_x.astype(dtype) @ a[:, lo_bits:].T

    cand_x: list[np.ndarray] = []
    cand_y: list[np.ndarray] = []
    for h in range(len(hi_x)):
        ok = _row_ok(lo_act + hi_act[h], inst) if inst.m else np.ones(len(lo_x), dtype=bool)
        if not ok.any():
            continue
        ys = lo_obj[ok] + hi_obj[h]
        xs = np.hstack([lo_x[ok], np.broadcast_to(hi_x[h], (int(ok.sum()), hi_bits))])
        # thin each block early so the candidate list stays small
        ys_u, first = np.unique(ys, axis=0, return_index=True)
        keep = first[nondominated_mask(ys_u)]
        keep.sort()
        cand_x.append(xs[keep])
        cand_y.append(ys[keep])

    if not cand_x:
        return Front([], [], {"instance": inst.name, "n": n, "method": "enumeration"})
    xs = np.vstack(cand_x)
    ys = np.vstack(cand_y)
    sols = [BinarySolution(x.copy(), y) for x, y in zip(xs, ys)]
    front = filter_nondominated(sols)
    front.stats = {"instance": inst.name, "n": n, "method": "enumeration"}
    return front
