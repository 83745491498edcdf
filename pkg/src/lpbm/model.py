"""Tri-objective binary programs: representation, evaluation, I/O and generators.

Objectives are stored in minimisation form.  Maximisation rows are negated
when a document is parsed and negated back when it is written out, so the
original orientation survives a round trip.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

SENSES = (">=", "<=", "=")
FAMILIES = ("moap", "mokp", "toflp", "generic")


class InstanceError(ValueError):
    """Raised for malformed or inconsistent instance documents."""


@dataclass(frozen=True)
class ConstraintRow:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in SENSES:
            raise InstanceError(f"unknown constraint sense {self.sense!r}")
        prev = -1
        for idx, _ in self.coeffs:
            if idx <= prev:
                raise InstanceError("constraint indices must be strictly increasing")
            prev = idx
        if any(c == 0 for _, c in self.coeffs):
            raise InstanceError("zero coefficients must not be stored")

    @classmethod
    def build(cls, terms: Iterable[tuple[int, float]], sense: str, rhs: float) -> "ConstraintRow":
        """Normalise ``terms``: merge repeated indices, drop zeros, sort."""
        acc: dict[int, float] = {}
        for idx, c in terms:
            acc[int(idx)] = acc.get(int(idx), 0) + c
        coeffs = tuple((i, _num(acc[i])) for i in sorted(acc) if acc[i] != 0)
        return cls(coeffs, sense, _num(rhs))


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    n: int
    objectives: np.ndarray  # p x n, minimisation form
    constraints: tuple[ConstraintRow, ...] = ()
    senses: tuple[str, ...] = ()
    family: str = "generic"

    def __post_init__(self):
        obj = np.asarray(self.objectives)
        if obj.ndim != 2 or obj.shape[1] != self.n:
            raise InstanceError(f"objective matrix must be p x {self.n}, got {obj.shape}")
        if obj.shape[0] < 2:
            raise InstanceError("at least two objectives are required")
        if not self.senses:
            object.__setattr__(self, "senses", ("min",) * obj.shape[0])
        if len(self.senses) != obj.shape[0]:
            raise InstanceError("one sense per objective is required")
        for k, row in enumerate(self.constraints):
            for idx, _ in row.coeffs:
                if not 0 <= idx < self.n:
                    raise InstanceError(f"constraints[{k}] references variable {idx} outside [0, {self.n})")
        obj = obj.copy()
        obj.setflags(write=False)
        object.__setattr__(self, "objectives", obj)

    @property
    def p(self) -> int:
        return self.objectives.shape[0]

    @property
    def m(self) -> int:
        return len(self.constraints)

    @cached_property
    def integral(self) -> bool:
        """True when every coefficient and right-hand side is an integer."""
        if self.objectives.dtype.kind not in "iu":
            return False
        return all(float(r.rhs).is_integer() and all(float(c).is_integer() for _, c in r.coeffs)
                   for r in self.constraints)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense m x n constraint matrix."""
        dtype = np.int64 if self.integral else np.float64
        a = np.zeros((self.m, self.n), dtype=dtype)
        for k, row in enumerate(self.constraints):
            for idx, c in row.coeffs:
                a[k, idx] = c
        a.setflags(write=False)
        return a

    @cached_property
    def rhs(self) -> np.ndarray:
        dtype = np.int64 if self.integral else np.float64
        return np.array([r.rhs for r in self.constraints], dtype=dtype)

    @cached_property
    def row_senses(self) -> tuple[str, ...]:
        return tuple(r.sense for r in self.constraints)

    @cached_property
    def _sense_masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.array(self.row_senses, dtype=object)
        return s == ">=", s == "<=", s == "="

    def to_original(self, image: Sequence[float]) -> np.ndarray:
        """Map a minimisation-form image back to the document's orientation."""
        sign = np.array([-1 if s == "max" else 1 for s in self.senses])
        return np.asarray(image) * sign


def _num(v):
    """Return an int when ``v`` is integral, otherwise a float."""
    if isinstance(v, (bool, np.bool_)):
        raise InstanceError("booleans are not numbers here")
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    if not math.isfinite(f):
        raise InstanceError(f"non-finite number {v!r}")
    return int(f) if f.is_integer() else f


def _check_length(inst: Instance, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (inst.n,):
        raise ValueError(f"expected a vector of length {inst.n}, got shape {x.shape}")
    return x


def _is_binary(x: np.ndarray) -> bool:
    return bool(np.all((x == 0) | (x == 1)))


def evaluate(inst: Instance, x) -> np.ndarray:
    """Objective image ``Cx`` in minimisation form.

    Integer data and a 0/1 vector give an exact int64 result.
    """
    x = _check_length(inst, x)
    if inst.objectives.dtype.kind in "iu" and _is_binary(x):
        return inst.objectives @ x.astype(np.int64)
    return inst.objectives @ x.astype(np.float64)


def constraint_activity(inst: Instance, x) -> np.ndarray:
    x = _check_length(inst, x)
    if inst.integral and _is_binary(x):
        return inst.matrix @ x.astype(np.int64)
    return inst.matrix @ x.astype(np.float64)


def is_feasible(inst: Instance, x) -> bool:
    """Check every constraint row.

    Exact for integer data and binary ``x``; otherwise each row is allowed
    a relative slack of 1e-6.
    """
    x = _check_length(inst, x)
    if inst.m == 0:
        return True
    lhs = constraint_activity(inst, x)
    ge, le, eq = inst._sense_masks
    b = inst.rhs
    if lhs.dtype.kind in "iu":
        tol = np.zeros(inst.m, dtype=np.int64)
    else:
        tol = 1e-6 * np.maximum(1.0, np.abs(b))
    return bool(np.all(lhs[ge] >= b[ge] - tol[ge])
                and np.all(lhs[le] <= b[le] + tol[le])
                and np.all(np.abs(lhs[eq] - b[eq]) <= tol[eq]))


@dataclass(frozen=True, eq=False)
class BinarySolution:
    x: np.ndarray
    objectives: np.ndarray

    @classmethod
    def of(cls, inst: Instance, x) -> "BinarySolution":
        x = np.asarray(x)
        return cls(x, evaluate(inst, x))

    @property
    def key(self) -> bytes:
        return bit_key(self.x)


def bit_key(x) -> bytes:
    """Hashable key for a 0/1 vector."""
    return np.asarray(x, dtype=np.uint8).tobytes()


# --------------------------------------------------------------------------
# JSON documents


def parse_instance(text: str) -> Instance:
    """Parse a JSON instance document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceError("document root must be an object")
    return instance_from_dict(doc)


def instance_from_dict(doc: dict) -> Instance:
    def need(key, where="document"):
        if key not in doc:
            raise InstanceError(f"{where}: missing field {key!r}")
        return doc[key]

    n = need("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError(f"n: expected a positive integer, got {n!r}")
    rows = need("objectives")
    if not isinstance(rows, list):
        raise InstanceError("objectives: expected a list of rows")
    p = doc.get("p", len(rows))
    if not isinstance(p, int) or p < 2:
        raise InstanceError(f"p: expected an integer >= 2, got {p!r}")
    if len(rows) != p:
        raise InstanceError(f"objectives: expected {p} rows, got {len(rows)}")
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InstanceError(f"objectives[{k}]: expected {n} numbers")
    senses = doc.get("senses", ["min"] * p)
    if len(senses) != p or any(s not in ("min", "max") for s in senses):
        raise InstanceError(f"senses: expected {p} entries of 'min' or 'max'")
    try:
        vals = [[_num(v) for v in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"objectives: {exc}") from None
    integral = all(isinstance(v, int) for row in vals for v in row)
    obj = np.array(vals, dtype=np.int64 if integral else np.float64).reshape(p, n)
    for k, s in enumerate(senses):
        if s == "max":
            obj[k] = -obj[k]

    constraints = []
    for k, c in enumerate(doc.get("constraints", [])):
        where = f"constraints[{k}]"
        if not isinstance(c, dict):
            raise InstanceError(f"{where}: expected an object")
        for key in ("coeffs", "sense", "rhs"):
            if key not in c:
                raise InstanceError(f"{where}: missing field {key!r}")
        if c["sense"] not in SENSES:
            raise InstanceError(f"{where}.sense: expected one of {SENSES}, got {c['sense']!r}")
        terms = []
        for t, pair in enumerate(c["coeffs"]):
            if not (isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], int)):
                raise InstanceError(f"{where}.coeffs[{t}]: expected [index, number]")
            if not 0 <= pair[0] < n:
                raise InstanceError(f"{where}.coeffs[{t}]: index {pair[0]} outside [0, {n})")
            terms.append((pair[0], _num(pair[1])))
        constraints.append(ConstraintRow.build(terms, c["sense"], _num(c["rhs"])))

    family = doc.get("family", "generic")
    if family not in FAMILIES:
        family = "generic"
    return Instance(name=str(doc.get("name", "instance")), n=n, objectives=obj,
                    constraints=tuple(constraints), senses=tuple(senses), family=family)


def instance_to_dict(inst: Instance) -> dict:
    sign = np.array([-1 if s == "max" else 1 for s in inst.senses])
    obj = inst.objectives * sign[:, None]
    return {
        "name": inst.name,
        "n": inst.n,
        "p": inst.p,
        "objectives": [[_num(v) for v in row] for row in obj.tolist()],
        "senses": list(inst.senses),
        "constraints": [
            {"coeffs": [[i, c] for i, c in r.coeffs], "sense": r.sense, "rhs": r.rhs}
            for r in inst.constraints
        ],
        "family": inst.family,
    }


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


# --------------------------------------------------------------------------
# Benchmark generators.  Coefficient ranges are our own choice.


def gen_moap(tasks: int, seed: int) -> Instance:
    """Assignment problem with three cost matrices; x[r*tasks + l] assigns task l to agent r."""
    if tasks < 2:
        raise ValueError("tasks must be >= 2")
    rng = np.random.default_rng(seed)
    n = tasks * tasks
    costs = rng.integers(1, 21, size=(3, n), dtype=np.int64)
    rows = []
    for r in range(tasks):
        rows.append(ConstraintRow.build(((r * tasks + l, 1) for l in range(tasks)), "=", 1))
    for l in range(tasks):
        rows.append(ConstraintRow.build(((r * tasks + l, 1) for r in range(tasks)), "=", 1))
    return Instance(f"moap_t{tasks}_s{seed}", n, costs, tuple(rows), ("min",) * 3, "moap")


def gen_mokp(items: int, seed: int) -> Instance:
    """Knapsack with three profit vectors and capacity ceil(sum(w) / 2)."""
    if items < 1:
        raise ValueError("items must be >= 1")
    rng = np.random.default_rng(seed)
    profits = rng.integers(1, 101, size=(3, items), dtype=np.int64)
    weights = rng.integers(1, 101, size=items, dtype=np.int64)
    capacity = int(-(-int(weights.sum()) // 2))
    row = ConstraintRow.build(enumerate(weights.tolist()), "<=", capacity)
    return Instance(f"mokp_n{items}_s{seed}", items, -profits, (row,), ("max",) * 3, "mokp")


def gen_toflp(facilities: int, seed: int) -> Instance:
    """Uncapacitated facility location with cost, opening cost and coverage objectives.

    Variable layout: x_ij at i*|J| + j, then y_i, then z_j; |J| = 2 * |I|.
    """
    if facilities < 2:
        raise ValueError("facilities must be >= 2")
    rng = np.random.default_rng(seed)
    ni, nj = facilities, 2 * facilities
    service = rng.integers(1, 101, size=(ni, nj), dtype=np.int64)
    opening = rng.integers(100, 501, size=ni, dtype=np.int64)
    demand = rng.integers(1, 101, size=nj, dtype=np.int64)
    nx = ni * nj
    n = nx + ni + nj
    obj = np.zeros((3, n), dtype=np.int64)
    obj[0, :nx] = service.ravel()
    obj[1, nx:nx + ni] = opening
    obj[2, nx + ni:] = -demand
    rows = []
    for j in range(nj):
        terms = [(i * nj + j, 1) for i in range(ni)] + [(nx + ni + j, -1)]
        rows.append(ConstraintRow.build(terms, "=", 0))
    for i in range(ni):
        for j in range(nj):
            rows.append(ConstraintRow.build([(i * nj + j, -1), (nx + i, 1)], ">=", 0))
    return Instance(f"toflp_f{facilities}_s{seed}", n, obj, tuple(rows), ("min",) * 3, "toflp")


GENERATORS = {"moap": gen_moap, "mokp": gen_mokp, "toflp": gen_toflp}
