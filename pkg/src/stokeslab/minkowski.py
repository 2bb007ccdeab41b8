"""Intrinsic (m-1)-dimensional content profiles and excisability evidence.

The profile samples ||T||(B(E, r)) / (2r) on a geometric radius grid; a
numerical artifact cannot decide a limsup, so the trend is classified by an
explicit rule and the full sequence is kept for inspection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .currents import ChartCurrent, Current, SurfaceCurrent, TopDimCurrent
from .dyadic import CubeSet, ExceptionalSet
from .quadrature import QuadResult, integrate_2d

__all__ = [
    "ContentProfile",
    "ExcisabilityEvidence",
    "neighborhood_mass",
    "intrinsic_content",
    "hausdorff_comparison_check",
    "excisability_evidence",
]

BOUNDED = "BOUNDED"
DIVERGENT = "DIVERGENT"
VANISHING = "VANISHING"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ContentProfile:
    """Values v_j = ||T||(B(E, r_j)) / (2 r_j) on a geometric radius grid."""

    radii: tuple[float, ...]
    measures: tuple[float, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]
    trend: str
    trend_detail: dict

    def supremum(self) -> float:
        return max(self.values)

    def growth_exponent(self) -> Optional[float]:
        return self.trend_detail.get("growth_exponent")

    def as_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "measures": list(self.measures),
            "values": list(self.values),
            "errors": list(self.errors),
            "trend": self.trend,
            "trend_detail": self.trend_detail,
        }


@dataclass(frozen=True)
class ExcisabilityEvidence:
    """Certificate (bounded content constant) or refusal with a reason."""

    accepted: bool
    constant: Optional[float]
    reason: str
    profile: Optional[ContentProfile] = None

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "constant": self.constant,
            "reason": self.reason,
            "profile": self.profile.as_dict() if self.profile else None,
        }


def _cube_ball_overlap(cube_lo, cube_hi, elem_lo, elem_hi, r: float) -> tuple[float, float]:
    """Planar measure of  cube  intersected with {dist(., element box) < r}.

    Exact up to an adaptive 1-D quadrature of the vertical section length,
    which is piecewise smooth in x.
    """
    from .quadrature import integrate_1d

    ex0, ey0 = elem_lo
    ex1, ey1 = elem_hi
    cx0, cy0 = cube_lo
    cx1, cy1 = cube_hi
    a = max(cx0, ex0 - r)
    b = min(cx1, ex1 + r)
    if b <= a:
        return 0.0, 0.0

    def section(xs):
        dx = np.maximum(ex0 - xs, 0.0) + np.maximum(xs - ex1, 0.0)
        w = np.sqrt(np.maximum(r * r - dx * dx, 0.0))
        lo = np.maximum(ey0 - w, cy0)
        hi = np.minimum(ey1 + w, cy1)
        return np.where(dx < r, np.maximum(hi - lo, 0.0), 0.0)

    res = integrate_1d(section, a, b, tol=1e-12, max_panels=2048)
    return res.value, res.error


def _cube_region_measure_in_ball(region: CubeSet, E: ExceptionalSet, r: float,
                                 rel_tol: float = 1e-4) -> tuple[float, float]:
    """Lebesgue measure of region intersected with B(E, r), with a bound.

    Single-element sets use exact per-cube section integrals; unions fall
    back to a dyadic refinement sandwich (the balls may overlap).
    """
    if len(E.elements) == 1 and region.m == 2:
        (elo, ehi) = E.elements[0]
        total, err = 0.0, 0.0
        for q in region.cubes:
            lo, hi = q.bounds()
            v, e = _cube_ball_overlap(lo, hi, elo, ehi, r)
            total += v
            err += e
        return total, err
    inside = 0.0
    budget = rel_tol * max(region.measure(), 1e-12)
    pending = list(region.cubes)
    max_generation = 26
    while True:
        straddlers = []
        for q in pending:
            if E.cube_min_distance(q) >= r:
                continue
            if E.cube_max_distance_bound(q) < r:
                inside += q.measure()
            else:
                straddlers.append(q)
        layer = math.fsum(q.measure() for q in straddlers)
        if layer <= budget or not straddlers or straddlers[0].generation >= max_generation:
            return inside + 0.5 * layer, 0.5 * layer
        pending = [c for q in straddlers for c in q.subdivide()]


def neighborhood_mass(T: Current, E: ExceptionalSet, r: float) -> QuadResult:
    """||T||(B(E, r)) with a certificate."""
    if isinstance(T, TopDimCurrent):
        val, err = _cube_region_measure_in_ball(T.region, E, r)
        return QuadResult(abs(T.theta) * val, abs(T.theta) * err, 0)
    if isinstance(T, SurfaceCurrent):
        target = T.model.singular_set()
        if E.elements != target.elements:
            raise ValueError("surface neighbourhood masses are implemented for the singular set")
        y_from = max(T.y_lo, T.model.y_infinity - r)
        res = T.model.mass_between(y_from, T.y_hi)
        return QuadResult(abs(T.theta) * res.value, abs(T.theta) * res.error, res.panels)
    if isinstance(T, ChartCurrent):
        total, err = 0.0, 0.0
        for rect in T._domain_rects():
            def dens(x, y):
                pts3 = T.chart.point(x, y)
                inside = E.distance_many(pts3) < r
                return T.chart.area_element(x, y) * inside
            res = integrate_2d(dens, rect.x0, rect.x1, rect.y0, rect.y1,
                               tol=1e-7, max_panels=2048)
            total += res.value
            err += res.error
        return QuadResult(abs(T.theta) * total, abs(T.theta) * err, 0)
    raise ValueError(f"neighbourhood mass unsupported for {type(T).__name__}")


def _classify(radii: np.ndarray, values: np.ndarray) -> tuple[str, dict]:
    n = len(values)
    tail = values[-5:] if n >= 5 else values
    detail: dict = {}
    window = max(min(5, n), (2 * n) // 3)
    vwin, rwin = values[-window:], radii[-window:]
    slope = None
    if np.all(vwin > 0) and len(vwin) >= 3:
        slope = float(stats.linregress(np.log(1.0 / rwin), np.log(vwin)).slope)
        detail["fitted_slope"] = slope
    if len(tail) >= 3:
        ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
        if np.all(ratios >= 1.1):
            detail["growth_exponent"] = slope
            detail["rule"] = "tail ratios >= 1.1"
            return DIVERGENT, detail
    spread = tail.max() - tail.min()
    if tail.max() > 0 and spread <= 0.05 * tail.max():
        detail["plateau"] = float(tail.mean())
        return BOUNDED, detail
    if np.all(np.diff(tail) <= 1e-12) and tail[-1] <= 0.2 * max(values.max(), 1e-300):
        detail["final_value"] = float(tail[-1])
        return VANISHING, detail
    if values.max() == 0.0:
        detail["final_value"] = 0.0
        return VANISHING, detail
    # sustained-growth fallback for grids not aligned with the geometry
    if slope is not None and slope >= 0.08 and vwin[-1] >= 1.3 * vwin[0]:
        detail["growth_exponent"] = slope
        detail["rule"] = "regression growth"
        return DIVERGENT, detail
    return INCONCLUSIVE, detail


def intrinsic_content(T: Current, E: ExceptionalSet, r0: float, q: float,
                      steps: int) -> ContentProfile:
    """Profile of ||T||(B(E, r)) / (2r) on the grid r_j = r0 * q^j."""
    if not 0.0 < q < 1.0:
        raise ValueError("grid ratio q must lie in (0, 1)")
    if r0 >= T.support_diameter():
        raise ValueError("initial radius must be below the support diameter")
    radii, measures, values, errors = [], [], [], []
    for j in range(steps):
        r = r0 * q ** j
        res = neighborhood_mass(T, E, r)
        radii.append(r)
        measures.append(res.value)
        values.append(res.value / (2.0 * r))
        errors.append(res.error / (2.0 * r))
    trend, detail = _classify(np.asarray(radii), np.asarray(values))
    return ContentProfile(tuple(radii), tuple(measures), tuple(values), tuple(errors),
                          trend, detail)


def hausdorff_comparison_check(T: Current, E: ExceptionalSet, known_measure: float,
                               profile: Optional[ContentProfile] = None,
                               r0: float = 0.2, q: float = 0.7, steps: int = 12,
                               constant: float = 0.5) -> dict:
    """Check inf of the profile tail >= constant * (known boundary measure of E)."""
    profile = profile or intrinsic_content(T, E, r0, q, steps)
    tail = list(profile.values)[-5:]
    inf_tail = min(tail) if tail else 0.0
    ratio = inf_tail / known_measure if known_measure > 0 else math.inf
    return {
        "inf_tail": inf_tail,
        "known_measure": known_measure,
        "constant": constant,
        "ratio": ratio,
        "holds": inf_tail >= constant * known_measure - 1e-9,
        "trend": profile.trend,
    }


def excisability_evidence(T: Current, E: ExceptionalSet, r0: float = 0.2,
                          q: float = 0.7, steps: int = 14) -> ExcisabilityEvidence:
    """Bounded-content certificate feeding the excision constant, or refusal."""
    if E.is_empty():
        return ExcisabilityEvidence(True, 0.0, "empty set")
    profile = intrinsic_content(T, E, r0, q, steps)
    if profile.trend in (BOUNDED, VANISHING):
        return ExcisabilityEvidence(True, profile.supremum(),
                                    f"content {profile.trend}", profile)
    if profile.trend == DIVERGENT:
        exponent = profile.growth_exponent()
        return ExcisabilityEvidence(False, None,
                                    f"content DIVERGENT with growth exponent {exponent:.4f}",
                                    profile)
    return ExcisabilityEvidence(False, None, "trend INCONCLUSIVE within budget", profile)
