"""Front quality: normalised hypervolume and multiplicative unary epsilon.

All inputs are in minimisation orientation.  Both indicators normalise with
the per-objective extremes of the reference front.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

HV_REF = (2.0, 2.0, 2.0)
MAX_IE_POINTS = 20


def _as_points(points, p: int | None = None) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, p or 0))
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array of points")
    return arr


@dataclass(frozen=True)
class NormalizationContext:
    """Per-objective minima and maxima of a reference front."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_reference(cls, reference) -> "NormalizationContext":
        ref = _as_points(reference)
        if len(ref) == 0:
            raise ValueError("cannot normalise against an empty reference front")
        return cls(ref.min(axis=0), ref.max(axis=0))

    @property
    def degenerate(self) -> np.ndarray:
        """Objectives on which the reference front has no spread."""
        return self.hi - self.lo <= 0

    def scale(self, points) -> np.ndarray:
        """Map to [0, 1] on the reference range; flat objectives map to 0."""
        pts = _as_points(points, len(self.lo))
        span = np.where(self.degenerate, 1.0, self.hi - self.lo)
        out = (pts - self.lo) / span
        out[:, self.degenerate] = 0.0
        return out


def normalize_hv(points, ctx: NormalizationContext) -> np.ndarray:
    return ctx.scale(points)


def normalize_epsilon(points, ctx: NormalizationContext) -> np.ndarray:
    """Shift the [0, 1] scaling to [1, 2] so ratios are well defined."""
    return 1.0 + ctx.scale(points)


def _area_2d(pts: np.ndarray, ref) -> float:
    """Area dominated by 2-D points inside ``[., ref]``."""
    if len(pts) == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    area = 0.0
    best_y = ref[1]
    for x, y in pts[order]:
        if y >= best_y:
            continue
        # strip between this x and the reference, at height best_y - y
        area += (ref[0] - x) * (best_y - y)
        best_y = y
    return float(area)


def _hv_sweep_3d(pts: np.ndarray, ref) -> float:
    order = np.argsort(pts[:, 2], kind="stable")
    pts = pts[order]
    vol = 0.0
    k = len(pts)
    for i in range(k):
        z_next = pts[i + 1, 2] if i + 1 < k else ref[2]
        dz = z_next - pts[i, 2]
        if dz > 0:
            vol += _area_2d(pts[: i + 1, :2], ref[:2]) * dz
    return float(vol)


def hv_inclusion_exclusion(points, ref) -> float:
    """Union volume by inclusion-exclusion; exponential, for small sets only."""
    pts = _as_points(points)
    ref = np.asarray(ref, dtype=np.float64)
    if len(pts):
        pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) > MAX_IE_POINTS:
        raise ValueError(f"inclusion-exclusion limited to {MAX_IE_POINTS} points")
    vol = 0.0
    for r in range(1, len(pts) + 1):
        sign = 1.0 if r % 2 else -1.0
        for combo in itertools.combinations(range(len(pts)), r):
            corner = pts[list(combo)].max(axis=0)
            vol += sign * float(np.prod(ref - corner))
    return vol


def hypervolume(points, ref=HV_REF) -> float:
    """Volume dominated by ``points`` and bounded by ``ref``.

    Points not strictly better than ``ref`` in every objective contribute
    nothing.  Three objectives use a sweep over the last coordinate with a
    2-D staircase area per slab; two use the staircase directly; other
    dimensions fall back to inclusion-exclusion.
    """
    ref = np.asarray(ref, dtype=np.float64)
    pts = _as_points(points, len(ref))
    if len(pts) == 0:
        return 0.0
    if pts.shape[1] != len(ref):
        raise ValueError("points and reference point differ in dimension")
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    if len(ref) == 3:
        return _hv_sweep_3d(pts, ref)
    if len(ref) == 2:
        return _area_2d(pts, ref)
    return hv_inclusion_exclusion(pts, ref)


def unary_epsilon(approx, reference) -> float:
    """Smallest factor by which ``reference`` must be scaled to be weakly hit by ``approx``.

    Both sets must already be normalised to positive values (see
    :func:`normalize_epsilon`).
    """
    a = _as_points(approx)
    r = _as_points(reference)
    if len(a) == 0 or len(r) == 0:
        raise ValueError("epsilon needs two non-empty point sets")
    if np.any(r <= 0) or np.any(a <= 0):
        raise ValueError("epsilon ratios need strictly positive coordinates")
    # ratios[r, a, k] = a_k / r_k
    ratios = a[None, :, :] / r[:, None, :]
    return float(ratios.max(axis=2).min(axis=1).max())


@dataclass
class IndicatorReport:
    hv_abs: float
    hv_ref: float
    hv_pct: float
    epsilon: float
    n_approx: int
    n_reference: int

    def to_dict(self) -> dict:
        return asdict(self)


def assess(approx, reference, ref_point=HV_REF) -> IndicatorReport:
    """Hypervolume percentage and epsilon of ``approx`` against ``reference``."""
    reference = _as_points(reference)
    ctx = NormalizationContext.from_reference(reference)
    approx = _as_points(approx, reference.shape[1])
    hv_ref = hypervolume(normalize_hv(reference, ctx), ref_point)
    if len(approx) == 0:
        return IndicatorReport(0.0, hv_ref, 0.0, float("inf"), 0, len(reference))
    hv_abs = hypervolume(normalize_hv(approx, ctx), ref_point)
    pct = 100.0 * hv_abs / hv_ref if hv_ref > 0 else float("nan")
    eps = unary_epsilon(normalize_epsilon(approx, ctx), normalize_epsilon(reference, ctx))
    return IndicatorReport(hv_abs, hv_ref, pct, eps, len(approx), len(reference))
