"""Integral currents at desk scale.

Three concrete kinds are supported:

* top-dimensional cube-set currents (multiplicity times a dyadic complex),
* graph-chart currents (x, y) -> (x, y, psi(x, y)) over planar domains,
* oscillating-surface currents built from a strip model (see
  :mod:`stokeslab.counterexample`), wrapped here behind a small protocol.

Masses, boundary masses and slice masses are scalars with certified error
bounds; restriction, slicing by distance functions and coordinate
half-spaces, and the coarea inequality check live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dyadic import CubeSet, ExceptionalSet
from .quadrature import QuadResult, integrate_1d, integrate_2d

__all__ = [
    "Rect",
    "ChartMap",
    "Current",
    "TopDimCurrent",
    "ChartCurrent",
    "SurfaceCurrent",
    "HalfSpace",
    "Slice",
    "mass",
    "boundary_mass",
    "restrict",
    "mass_additivity_check",
    "pushforward_mass_bounds",
    "slice_current",
    "coarea_slice_check",
    "CurrentError",
]

DEFAULT_TOL = 1e-10


class CurrentError(ValueError):
    """Structural misuse of a current operation."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned closed rectangle in the plane."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("rectangle must have positive extent")

    def measure(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def boundary_edges(self):
        """Counterclockwise edges as (start, end) point pairs."""
        a = (self.x0, self.y0)
        b = (self.x1, self.y0)
        c = (self.x1, self.y1)
        d = (self.x0, self.y1)
        return [(a, b), (b, c), (c, d), (d, a)]

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass(frozen=True)
class HalfSpace:
    """Coordinate half-space {x_axis <= threshold} (or >= when below=False)."""

    axis: int
    threshold: float
    below: bool = True


@dataclass(frozen=True)
class ChartMap:
    """Graph map (x, y) -> (x, y, psi(x, y)) with analytic partials.

    ``lip_upper`` must dominate sup sqrt(1 + |grad psi|^2) over the domain of
    use; ``lip_inverse`` bounds the Lipschitz constant of the inverse, which
    for graphs is exactly 1 (the projection), so stored values must be >= 1.
    """

    psi: callable
    dpsi_dx: callable
    dpsi_dy: callable
    lip_upper: float
    lip_inverse: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.lip_upper < 1.0:
            raise ValueError("lip_upper below 1 is impossible for a graph map")
        if self.lip_inverse < 1.0:
            raise ValueError("graph inverses are 1-Lipschitz at best; bound must be >= 1")

    def point(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.stack([x, y, self.psi(x, y)], axis=-1)

    def area_element(self, x, y):
        return np.sqrt(1.0 + self.dpsi_dx(x, y) ** 2 + self.dpsi_dy(x, y) ** 2)

    def verify_lip_upper(self, domain_bounds, samples: int = 2000, rng=None) -> bool:
        rng = rng or np.random.default_rng(0)
        (x0, x1, y0, y1) = domain_bounds
        xs = rng.uniform(x0, x1, samples)
        ys = rng.uniform(y0, y1, samples)
        return bool(np.all(self.area_element(xs, ys) <= self.lip_upper + 1e-12))


class Current:
    """Common interface of the concrete current kinds."""

    m: int
    n: int
    theta: int

    def mass(self) -> QuadResult:
        raise NotImplementedError

    def boundary_mass(self) -> QuadResult:
        raise NotImplementedError

    def support_diameter(self) -> float:
        raise NotImplementedError

    def is_zero(self) -> bool:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TopDimCurrent(Current):
    """Multiplicity theta times the canonical current of a cube complex."""

    region: CubeSet
    theta: int = 1

    def __post_init__(self):
        if self.theta == 0:
            raise CurrentError("multiplicity must be a nonzero integer")

    @property
    def m(self) -> int:
        return self.region.m

    @property
    def n(self) -> int:
        return self.region.m

    def is_zero(self) -> bool:
        return self.region.is_empty()

    def mass(self) -> QuadResult:
        return QuadResult(abs(self.theta) * self.region.measure(), 0.0, 0)

    def boundary_mass(self) -> QuadResult:
        return QuadResult(abs(self.theta) * self.region.perimeter(), 0.0, 0)

    def support_diameter(self) -> float:
        return self.region.diameter()

    def oriented_boundary_pieces(self):
        """Boundary pieces as (start, end) with ccw orientation for theta > 0.

        Each piece is a straight segment; the multiplicity is not folded in.
        """
        if self.m != 2:
            raise CurrentError("oriented boundary pieces are only provided in the plane")
        pieces = []
        for axis, coord, orient, lo, hi in self.region.boundary_segments():
            if axis == 0:
                # facet normal is +-e1, tangent rot90(normal) = +-e2
                start = (coord, lo[1]) if orient > 0 else (coord, hi[1])
                end = (coord, hi[1]) if orient > 0 else (coord, lo[1])
            else:
                start = (hi[0], coord) if orient > 0 else (lo[0], coord)
                end = (lo[0], coord) if orient > 0 else (hi[0], coord)
            pieces.append((start, end))
        return pieces

    def boundary_points_signed(self):
        if self.m != 1:
            raise CurrentError("signed boundary points only exist for 1-currents")
        out = []
        for axis, coord, orient, _, _ in self.region.boundary_segments():
            out.append((coord, orient))
        return out

    def descriptor(self) -> dict:
        import json

        return {
            "type": "top_dim",
            "theta": self.theta,
            "region": json.loads(self.region.to_json()),
        }


@dataclass(frozen=True)
class ChartCurrent(Current):
    """theta times the pushforward of a planar domain under a graph chart."""

    domain: object  # CubeSet or Rect
    chart: ChartMap
    theta: int = 1
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.theta == 0:
            raise CurrentError("multiplicity must be a nonzero integer")
        if not isinstance(self.domain, (CubeSet, Rect)):
            raise CurrentError("chart domains must be cube sets or rectangles")
        if isinstance(self.domain, CubeSet) and self.domain.m != 2:
            raise CurrentError("chart domains are planar")

    @property
    def m(self) -> int:
        return 2

    @property
    def n(self) -> int:
        return 3

    def is_zero(self) -> bool:
        return isinstance(self.domain, CubeSet) and self.domain.is_empty()

    def _domain_rects(self) -> list[Rect]:
        if isinstance(self.domain, Rect):
            return [self.domain]
        rects = []
        for q in self.domain.cubes:
            lo, hi = q.bounds()
            rects.append(Rect(lo[0], hi[0], lo[1], hi[1]))
        return rects

    def domain_measure(self) -> float:
        if isinstance(self.domain, Rect):
            return self.domain.measure()
        return self.domain.measure()

    def mass(self) -> QuadResult:
        total, err, panels = 0.0, 0.0, 0
        for r in self._domain_rects():
            res = integrate_2d(
                lambda x, y: self.chart.area_element(x, y),
                r.x0, r.x1, r.y0, r.y1, tol=self.tol,
            )
            total += res.value
            err += res.error
            panels += res.panels
        return QuadResult(abs(self.theta) * total, abs(self.theta) * err, panels)

    def boundary_edges_2d(self):
        """Counterclockwise planar boundary edges of the domain."""
        if isinstance(self.domain, Rect):
            return self.domain.boundary_edges()
        edges = []
        for axis, coord, orient, lo, hi in self.domain.boundary_segments():
            if axis == 0:
                start = (coord, lo[1]) if orient > 0 else (coord, hi[1])
                end = (coord, hi[1]) if orient > 0 else (coord, lo[1])
            else:
                start = (hi[0], coord) if orient > 0 else (lo[0], coord)
                end = (lo[0], coord) if orient > 0 else (hi[0], coord)
            edges.append((start, end))
        return edges

    def boundary_mass(self) -> QuadResult:
        total, err, panels = 0.0, 0.0, 0
        for (p, q) in self.boundary_edges_2d():
            p = np.asarray(p)
            q = np.asarray(q)
            direction = q - p
            length = float(np.linalg.norm(direction))

            def speed(t, p=p, direction=direction, length=length):
                pts = p[None, :] + np.outer(t, direction)
                dz = (self.chart.dpsi_dx(pts[:, 0], pts[:, 1]) * direction[0]
                      + self.chart.dpsi_dy(pts[:, 0], pts[:, 1]) * direction[1])
                return np.sqrt(length ** 2 + dz ** 2)

            res = integrate_1d(speed, 0.0, 1.0, tol=self.tol)
            total += res.value
            err += res.error
            panels += res.panels
        return QuadResult(abs(self.theta) * total, abs(self.theta) * err, panels)

    def support_diameter(self) -> float:
        pts = []
        for r in self._domain_rects():
            xs = np.linspace(r.x0, r.x1, 12)
            ys = np.linspace(r.y0, r.y1, 12)
            X, Y = np.meshgrid(xs, ys)
            pts.append(self.chart.point(X.ravel(), Y.ravel()))
        pts = np.vstack(pts)
        diff = pts[:, None, :] - pts[None, :, :]
        sampled = float(np.sqrt((diff ** 2).sum(axis=2)).max())
        return sampled

    def support_diameter_upper(self) -> float:
        """Upper bound: planar diameter plus worst vertical oscillation."""
        rects = self._domain_rects()
        lo = np.array([min(r.x0 for r in rects), min(r.y0 for r in rects)])
        hi = np.array([max(r.x1 for r in rects), max(r.y1 for r in rects)])
        planar = float(np.linalg.norm(hi - lo))
        grad_bound = math.sqrt(max(self.chart.lip_upper ** 2 - 1.0, 0.0))
        return math.hypot(planar, planar * grad_bound)

    def descriptor(self) -> dict:
        import json

        dom = (
            {"rect": [self.domain.x0, self.domain.x1, self.domain.y0, self.domain.y1]}
            if isinstance(self.domain, Rect)
            else json.loads(self.domain.to_json())
        )
        return {
            "type": "chart",
            "theta": self.theta,
            "chart": self.chart.name or "anonymous",
            "domain": dom,
        }


@dataclass(frozen=True)
class SurfaceCurrent(Current):
    """Oscillating-surface current over the strip model, windowed in y.

    ``model`` follows the protocol of
    :class:`stokeslab.counterexample.SurfaceModel`.
    """

    model: object
    y_lo: float = 0.0
    y_hi: Optional[float] = None
    theta: int = 1

    def __post_init__(self):
        hi = self.model.y_infinity if self.y_hi is None else self.y_hi
        object.__setattr__(self, "y_hi", float(hi))
        if not 0.0 <= self.y_lo < self.y_hi <= self.model.y_infinity + 1e-15:
            raise CurrentError("surface window must satisfy 0 <= y_lo < y_hi <= y_infinity")
        if self.theta == 0:
            raise CurrentError("multiplicity must be a nonzero integer")

    @property
    def m(self) -> int:
        return 2

    @property
    def n(self) -> int:
        return 3

    def is_zero(self) -> bool:
        return False

    def is_full(self) -> bool:
        return self.y_lo == 0.0 and self.y_hi == self.model.y_infinity

    def mass(self) -> QuadResult:
        res = self.model.mass_between(self.y_lo, self.y_hi)
        return QuadResult(abs(self.theta) * res.value, abs(self.theta) * res.error, res.panels)

    def boundary_mass(self) -> QuadResult:
        bottom = self.model.section_length(self.y_lo)
        top = self.model.section_length(self.y_hi)
        sides = 2.0 * (self.y_hi - self.y_lo)
        err = bottom.error + top.error
        value = bottom.value + top.value + sides
        return QuadResult(abs(self.theta) * value, abs(self.theta) * err,
                          bottom.panels + top.panels)

    def support_diameter(self) -> float:
        width = self.model.x_hi - self.model.x_lo
        height = self.y_hi - self.y_lo
        bump = 2.0 * self.model.sup_abs_psi(self.y_lo)
        return math.sqrt(width ** 2 + height ** 2 + bump ** 2)

    def boundary_curves(self):
        """Counterclockwise boundary curves in the parameter rectangle.

        Yields (kind, data): horizontal sections carry (y, x_from, x_to),
        vertical sides carry (x, y_from, y_to); traversal follows the order.
        """
        x0, x1 = self.model.x_lo, self.model.x_hi
        return [
            ("horizontal", (self.y_lo, x0, x1)),
            ("vertical", (x1, self.y_lo, self.y_hi)),
            ("horizontal", (self.y_hi, x1, x0)),
            ("vertical", (x0, self.y_hi, self.y_lo)),
        ]

    def descriptor(self) -> dict:
        return {
            "type": "surface",
            "theta": self.theta,
            "window": [self.y_lo, self.y_hi],
            "model": self.model.descriptor(),
        }


# ---------------------------------------------------------------------------
# free-function operations


def mass(T: Current) -> QuadResult:
    return T.mass()


def boundary_mass(T: Current) -> QuadResult:
    return T.boundary_mass()


def restrict(T: Current, region) -> Current:
    """Subcurrent T restricted to a cube set or coordinate half-space."""
    if isinstance(T, TopDimCurrent):
        if isinstance(region, CubeSet):
            return TopDimCurrent(T.region.intersection(region), T.theta)
        if isinstance(region, HalfSpace):
            cut = T.region.restrict_half_space(region.axis, region.threshold, region.below)
            return TopDimCurrent(cut, T.theta)
        raise CurrentError(f"cannot restrict a cube-set current by {type(region).__name__}")
    if isinstance(T, ChartCurrent):
        if isinstance(region, CubeSet) and isinstance(T.domain, CubeSet):
            return ChartCurrent(T.domain.intersection(region), T.chart, T.theta, T.tol)
        if isinstance(region, HalfSpace) and isinstance(T.domain, CubeSet):
            cut = T.domain.restrict_half_space(region.axis, region.threshold, region.below)
            return ChartCurrent(cut, T.chart, T.theta, T.tol)
        raise CurrentError("chart currents restrict by planar cube sets or half-spaces")
    if isinstance(T, SurfaceCurrent):
        if isinstance(region, HalfSpace) and region.axis == 1:
            t = region.threshold
            if region.below:
                lo, hi = T.y_lo, min(T.y_hi, t)
            else:
                lo, hi = max(T.y_lo, t), T.y_hi
            if hi <= lo:
                raise CurrentError("restriction window is empty")
            return SurfaceCurrent(T.model, lo, hi, T.theta)
        raise CurrentError("surface currents restrict by y half-spaces only")
    raise CurrentError(f"unsupported current type {type(T).__name__}")


def complement_within(T: Current, S: Current) -> Current | None:
    """The current T - S when S was produced by restricting T; None if empty."""
    if isinstance(T, TopDimCurrent) and isinstance(S, TopDimCurrent):
        rest = T.region.difference(S.region)
        return None if rest.is_empty() else TopDimCurrent(rest, T.theta)
    if isinstance(T, ChartCurrent) and isinstance(S, ChartCurrent):
        if isinstance(T.domain, CubeSet) and isinstance(S.domain, CubeSet):
            rest = T.domain.difference(S.domain)
            return None if rest.is_empty() else ChartCurrent(rest, T.chart, T.theta, T.tol)
        raise CurrentError("chart complements need cube-set domains")
    if isinstance(T, SurfaceCurrent) and isinstance(S, SurfaceCurrent):
        pieces = []
        if S.y_lo > T.y_lo:
            pieces.append(SurfaceCurrent(T.model, T.y_lo, S.y_lo, T.theta))
        if S.y_hi < T.y_hi:
            pieces.append(SurfaceCurrent(T.model, S.y_hi, T.y_hi, T.theta))
        if not pieces:
            return None
        if len(pieces) == 1:
            return pieces[0]
        return pieces  # two-sided complement, returned as a list
    raise CurrentError("complement of mismatched current kinds")


def mass_additivity_check(T: Current, S: Current) -> dict:
    """Verify mass(S) + mass(T - S) = mass(T) within combined certificates."""
    rest = complement_within(T, S)
    mT = T.mass()
    mS = S.mass() if not S.is_zero() else QuadResult(0.0, 0.0, 0)
    if rest is None:
        m_rest = QuadResult(0.0, 0.0, 0)
    elif isinstance(rest, list):
        vals = [p.mass() for p in rest]
        m_rest = QuadResult(sum(v.value for v in vals), sum(v.error for v in vals), 0)
    else:
        m_rest = rest.mass()
    gap = abs(mS.value + m_rest.value - mT.value)
    budget = mS.error + m_rest.error + mT.error + 1e-12
    return {
        "mass_total": mT.value,
        "mass_part": mS.value,
        "mass_rest": m_rest.value,
        "gap": gap,
        "budget": budget,
        "additive": gap <= budget,
    }


def pushforward_mass_bounds(T) -> dict:
    """Check the bilipschitz mass sandwich for a graph-chart current.

    Accepts chart currents and surface currents windowed to one strip (the
    strip chart provides the Lipschitz data there).
    """
    if isinstance(T, SurfaceCurrent):
        model = T.model
        k0 = int(model.strip_index(T.y_lo))
        k1 = int(model.strip_index(max(T.y_hi - 1e-15, T.y_lo)))
        if k0 != k1:
            raise CurrentError("surface pushforward bounds need a single-strip window")
        chart = model.strip_chart(k0)
        area = (model.x_hi - model.x_lo) * (T.y_hi - T.y_lo)
        lower = abs(T.theta) * (chart.lip_inverse ** (-T.m)) * area
        upper = abs(T.theta) * (chart.lip_upper ** T.m) * area
        mres = T.mass()
        slack = mres.error + 1e-12 * max(1.0, upper)
        ok = bool(lower - slack <= mres.value <= upper + slack)
        return {"lower": lower, "upper": upper, "mass": mres.value, "ok": ok}
    if not isinstance(T, ChartCurrent):
        raise CurrentError("pushforward bounds apply to chart currents")
    area = T.domain_measure()
    lower = abs(T.theta) * (T.chart.lip_inverse ** (-T.m)) * area
    upper = abs(T.theta) * (T.chart.lip_upper ** T.m) * area
    mres = T.mass()
    slack = mres.error + 1e-12 * max(1.0, upper)
    ok = bool(lower - slack <= mres.value <= upper + slack)
    return {"lower": lower, "upper": upper, "mass": mres.value, "ok": ok}


@dataclass(frozen=True)
class Slice:
    """An (m-1)-dimensional slice of a current by dist(., E) at radius r."""

    parent: dict
    exceptional: ExceptionalSet
    radius: float
    requested_radius: float
    mass: QuadResult
    pieces: tuple = ()

    @property
    def value(self) -> float:
        return self.mass.value


def _offset_pieces(element, r: float):
    """Straight edges and corner arcs of the r-level set around one box element."""
    (lo, hi) = element
    straight = []
    if hi[1] > lo[1]:
        straight.append(("v", lo[0] - r, lo[1], hi[1]))
        straight.append(("v", hi[0] + r, lo[1], hi[1]))
    if hi[0] > lo[0]:
        straight.append(("h", lo[1] - r, lo[0], hi[0]))
        straight.append(("h", hi[1] + r, lo[0], hi[0]))
    arcs = [
        ((lo[0], lo[1]), math.pi, 1.5 * math.pi),
        ((hi[0], lo[1]), 1.5 * math.pi, 2.0 * math.pi),
        ((hi[0], hi[1]), 0.0, 0.5 * math.pi),
        ((lo[0], hi[1]), 0.5 * math.pi, math.pi),
    ]
    return straight, arcs


def _regular_radius(T: Current, E: ExceptionalSet, r: float, tol: float = 1e-9) -> float:
    """Nudge the radius until the level set misses grid vertices / junctions."""
    def is_regular(rr: float) -> bool:
        if isinstance(T, TopDimCurrent):
            for q in T.region.cubes:
                for corner in q.corners():
                    if abs(E.distance(corner) - rr) <= tol:
                        return False
            return True
        if isinstance(T, SurfaceCurrent):
            y = T.model.y_infinity - rr
            return all(abs(y - yk) > tol for yk in T.model.strip_junctions())
        return True

    for attempt in range(64):
        candidate = r + attempt * 4.0 * tol * (1 if attempt % 2 == 0 else -1)
        if is_regular(candidate):
            return candidate
    raise CurrentError(f"no regular slicing radius found near r={r}")


def slice_current(T: Current, E: ExceptionalSet, r: float,
                  samples: int = 2048) -> Slice:
    """The slice of T by dist(., E) at radius r, realized as a level curve."""
    if r <= 0:
        raise CurrentError("slice radius must be positive")
    if isinstance(T, TopDimCurrent) and T.m == 2:
        far = max((E.cube_max_distance_bound(q) for q in T.region.cubes), default=0.0)
        if r >= far:
            return Slice(T.descriptor(), E, r, r, QuadResult(0.0, 0.0, 0))
        rr = _regular_radius(T, E, r)
        total, err = 0.0, 0.0
        pieces = []
        multi = len(E.elements) > 1
        for element in E.elements:
            straight, arcs = _offset_pieces(element, rr)
            for kind, coord, t0, t1 in straight:
                axis = 0 if kind == "h" else 1
                if not multi:
                    seg = T.region.line_intersection_length(axis, coord, t0, t1)
                else:
                    ts = np.linspace(t0, t1, samples)
                    mids = 0.5 * (ts[:-1] + ts[1:])
                    if kind == "h":
                        pts = np.stack([mids, np.full_like(mids, coord)], axis=1)
                    else:
                        pts = np.stack([np.full_like(mids, coord), mids], axis=1)
                    keep = T.region.contains_many(pts)
                    # on the level set of this element the global distance is
                    # min(rr, dist to others); keep where no other element is nearer
                    keep &= E.distance_many(pts) >= rr - 1e-12
                    seg = float(np.mean(keep)) * (t1 - t0)
                total += abs(T.theta) * seg
                pieces.append(("segment", kind, coord, t0, t1, seg))
            for center, a0, a1 in arcs:
                length, arc_err = _arc_length_inside(T.region, E, center, rr, a0, a1,
                                                     samples, multi)
                total += abs(T.theta) * length
                err += abs(T.theta) * arc_err
                pieces.append(("arc", center, a0, a1, length))
        return Slice(T.descriptor(), E, rr, r, QuadResult(total, err, 0), tuple(pieces))
    if isinstance(T, TopDimCurrent) and T.m == 1:
        count = 0
        for (lo, hi) in E.elements:
            for pt in (lo[0] - r, hi[0] + r):
                if T.region.contains((pt,)):
                    count += 1
        return Slice(T.descriptor(), E, r, r, QuadResult(abs(T.theta) * float(count), 0.0, 0))
    if isinstance(T, SurfaceCurrent):
        if not _is_surface_singular_set(T, E):
            raise CurrentError("surface currents slice by their singular set only")
        y = T.model.y_infinity - r
        if not (T.y_lo < y < T.y_hi):
            return Slice(T.descriptor(), E, r, r, QuadResult(0.0, 0.0, 0))
        rr = _regular_radius(T, E, r)
        y = T.model.y_infinity - rr
        L = T.model.section_length(y)
        return Slice(T.descriptor(), E, rr, r,
                     QuadResult(abs(T.theta) * L.value, abs(T.theta) * L.error, L.panels),
                     (("section", y),))
    raise CurrentError(f"slicing unsupported for {type(T).__name__}")


def _is_surface_singular_set(T: SurfaceCurrent, E: ExceptionalSet) -> bool:
    target = T.model.singular_set()
    return E.elements == target.elements


def _arc_length_inside(region: CubeSet, E: ExceptionalSet, center, r: float,
                       a0: float, a1: float, samples: int, multi: bool):
    """Length of the clipped arc, by midpoint sampling with a refinement bound."""
    def measure(n: int) -> float:
        angles = a0 + (a1 - a0) * (np.arange(n) + 0.5) / n
        pts = np.stack([
            center[0] + r * np.cos(angles),
            center[1] + r * np.sin(angles),
        ], axis=1)
        keep = region.contains_many(pts)
        if multi:
            keep &= E.distance_many(pts) >= r - 1e-12
        return float(np.mean(keep)) * (a1 - a0) * r

    coarse = measure(samples)
    fine = measure(2 * samples)
    # indicator integrands converge at first order in the sample count
    return fine, abs(fine - coarse) + (a1 - a0) * r / samples


def _line_integral(omega, points_of, tangent_of, t0: float, t1: float,
                   tol: float) -> QuadResult:
    def integrand(ts):
        out = np.empty(len(ts))
        for i, t in enumerate(ts):
            p = points_of(t)
            tan = tangent_of(t)
            out[i] = float(np.dot(omega(p).coeffs, tan))
        return out

    return integrate_1d(integrand, t0, t1, tol=tol, max_panels=2048)


def boundary_form_integral(T: Current, omega, tol: float = 1e-10) -> QuadResult:
    """Integral of a degree-(m-1) form over the oriented boundary of T."""
    if isinstance(T, TopDimCurrent) and T.m == 1:
        total = 0.0
        for coord, orient in T.boundary_points_signed():
            total += orient * float(omega(np.array([coord])))
        return QuadResult(T.theta * total, 0.0, 0)
    if isinstance(T, TopDimCurrent) and T.m == 2:
        total, err = 0.0, 0.0
        for (p, q) in T.oriented_boundary_pieces():
            p = np.asarray(p, dtype=float)
            q = np.asarray(q, dtype=float)
            direction = q - p
            res = _line_integral(
                omega,
                lambda t, p=p, d=direction: p + t * d,
                lambda t, d=direction: d,
                0.0, 1.0, tol,
            )
            total += res.value
            err += res.error
        return QuadResult(T.theta * total, abs(T.theta) * err, 0)
    if isinstance(T, ChartCurrent):
        total, err = 0.0, 0.0
        chart = T.chart
        for (p, q) in T.boundary_edges_2d():
            p = np.asarray(p, dtype=float)
            q = np.asarray(q, dtype=float)
            d = q - p

            def pt(t, p=p, d=d):
                u = p + t * d
                return np.array([u[0], u[1], float(chart.psi(u[0], u[1]))])

            def tan(t, p=p, d=d):
                u = p + t * d
                dz = (float(chart.dpsi_dx(u[0], u[1])) * d[0]
                      + float(chart.dpsi_dy(u[0], u[1])) * d[1])
                return np.array([d[0], d[1], dz])

            res = _line_integral(omega, pt, tan, 0.0, 1.0, tol)
            total += res.value
            err += res.error
        return QuadResult(T.theta * total, abs(T.theta) * err, 0)
    if isinstance(T, SurfaceCurrent):
        model = T.model
        total, err = 0.0, 0.0
        for kind, data in T.boundary_curves():
            if kind == "horizontal":
                y, xa, xb = data

                def pt(x, y=y):
                    return np.array([x, y, float(model.psi(x, y))])

                def tan(x, y=y):
                    return np.array([1.0, 0.0, float(model.dpsi_dx(x, y))])

                res = _line_integral(omega, pt, tan, xa, xb, tol)
            else:
                x, ya, yb = data

                def pt(y, x=x):
                    return np.array([x, y, float(model.psi(x, y))])

                def tan(y, x=x):
                    return np.array([0.0, 1.0, float(model.dpsi_dy(x, y))])

                res = _line_integral(omega, pt, tan, ya, yb, tol)
            total += res.value
            err += res.error
        return QuadResult(T.theta * total, abs(T.theta) * err, 0)
    raise CurrentError(f"boundary integrals unsupported for {type(T).__name__}")


def coarea_slice_check(T: Current, E: ExceptionalSet, radii: Sequence[float]) -> dict:
    """Trapezoid check of  integral of slice masses <= Lip(f) * mass(T)."""
    radii = np.asarray(sorted(radii), dtype=float)
    masses = []
    errs = 0.0
    for r in radii:
        s = slice_current(T, E, float(r))
        masses.append(s.mass.value)
        errs += s.mass.error
    masses = np.asarray(masses)
    lhs = float(np.trapezoid(masses, radii))
    mT = T.mass()
    return {
        "radii": radii.tolist(),
        "slice_masses": masses.tolist(),
        "integral": lhs,
        "mass": mT.value,
        "bound_holds": lhs <= mT.value * (1.0 + 1e-3) + errs + mT.error,
        "certificate": errs + mT.error,
    }
