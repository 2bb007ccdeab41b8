"""Gauges, tagged families, Cousin subdivision and gauge decomposition.

The engine decomposes a current into a finite family of tagged pieces that
is fine for a gauge, regular above a threshold, and whose body exhausts the
current up to a small remainder of a chosen subadditive functional.  The
route through a singular set is excision: remove a thin neighbourhood whose
mass is small and whose cut has controlled length, then decompose the rest
chart by chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .currents import (
    ChartCurrent,
    Current,
    HalfSpace,
    Rect,
    SurfaceCurrent,
    TopDimCurrent,
    boundary_form_integral,
    restrict,
    slice_current,
)
from .dyadic import CubeSet, DyadicCube, DepthError, ExceptionalSet, RootBox
from .minkowski import ExcisabilityEvidence, excisability_evidence, neighborhood_mass

__all__ = [
    "Gauge",
    "RegularityFn",
    "SubadditiveFn",
    "TaggedPair",
    "TaggedFamily",
    "regularity",
    "cousin_decompose",
    "excise",
    "gauge_decompose",
    "DecompositionRefusal",
    "ResourceBudgetError",
    "CUBE_REGULARITY",
]


def CUBE_REGULARITY(m: int) -> float:
    """Regularity of any cube of dimension m: 0.5 * m^(-3/2)."""
    return 0.5 * m ** (-1.5)


class DecompositionRefusal(RuntimeError):
    """The engine declines to decompose (missing or negative excisability evidence)."""


class ResourceBudgetError(RuntimeError):
    """The decomposition would exceed the configured piece budget."""


@dataclass(frozen=True)
class Gauge:
    """Nonnegative fineness control: min of constants and scaled distances.

    Terms are ("const", c, 0.0, None) or ("dist", scale, offset, anchor)
    with each distance term carrying its own anchor set; the gauge vanishes
    exactly on the anchors of zero-offset distance terms.
    """

    terms: tuple[tuple, ...]

    @classmethod
    def constant(cls, c: float) -> "Gauge":
        if c <= 0:
            raise ValueError("constant gauges must be positive")
        return cls((("const", c, 0.0, None),))

    @classmethod
    def distance_to(cls, E: ExceptionalSet, scale: float = 1.0,
                    offset: float = 0.0) -> "Gauge":
        if scale <= 0 or offset < 0:
            raise ValueError("distance gauges need scale > 0 and offset >= 0")
        return cls((("dist", scale, offset, E),))

    def min_with(self, other: "Gauge") -> "Gauge":
        return Gauge(self.terms + other.terms)

    def scaled(self, factor: float) -> "Gauge":
        terms = tuple((kind, s * factor, o * factor, E) for kind, s, o, E in self.terms)
        return Gauge(terms)

    def __call__(self, x) -> float:
        best = math.inf
        for kind, s, o, E in self.terms:
            if kind == "const":
                best = min(best, s)
            else:
                best = min(best, s * E.distance(x) + o)
        return best

    @property
    def zero_set(self) -> ExceptionalSet:
        out = ExceptionalSet.empty()
        for kind, _, o, E in self.terms:
            if kind == "dist" and o == 0.0 and E is not None:
                out = out.union(E)
        return out

    def vanishes_somewhere(self) -> bool:
        return not self.zero_set.is_empty()


@dataclass(frozen=True)
class RegularityFn:
    """Regularity threshold: a constant or a per-point callable."""

    value: Optional[float] = None
    fn: Optional[Callable] = None

    @classmethod
    def constant(cls, value: float) -> "RegularityFn":
        if value < 0:
            raise ValueError("regularity thresholds are nonnegative")
        return cls(value=value)

    @classmethod
    def from_callable(cls, fn: Callable) -> "RegularityFn":
        return cls(fn=fn)

    def __call__(self, x) -> float:
        if self.fn is not None:
            return float(self.fn(x))
        return float(self.value)


class SubadditiveFn:
    """Nonnegative subadditive functional on subcurrents: mass, |circulation|, max."""

    def __init__(self, kind: str, omega=None, parts: Optional[Sequence["SubadditiveFn"]] = None,
                 name: str = ""):
        if kind not in ("mass", "abs_circulation", "max_of"):
            raise ValueError(f"unknown subadditive functional kind {kind!r}")
        self.kind = kind
        self.omega = omega
        self.parts = tuple(parts) if parts else ()
        self.name = name or kind

    @classmethod
    def mass(cls) -> "SubadditiveFn":
        return cls("mass")

    @classmethod
    def abs_circulation(cls, omega) -> "SubadditiveFn":
        return cls("abs_circulation", omega=omega)

    @classmethod
    def max_of(cls, *parts: "SubadditiveFn") -> "SubadditiveFn":
        return cls("max_of", parts=parts)

    def of_current(self, S: Current) -> float:
        """Upper estimate of the functional on S (certificates folded in)."""
        if self.kind == "mass":
            res = S.mass()
            return res.value + res.error
        if self.kind == "abs_circulation":
            res = boundary_form_integral(S, self.omega, tol=1e-8)
            return abs(res.value) + res.error
        return max(p.of_current(S) for p in self.parts)

    def of_pieces(self, pieces: Sequence[Current]) -> float:
        """Upper bound for the functional of the sum of nonoverlapping pieces."""
        if not pieces:
            return 0.0
        if self.kind == "max_of":
            return max(p.of_pieces(pieces) for p in self.parts)
        return sum(self.of_current(S) for S in pieces)


def regularity(S: Current) -> float:
    """mass / (boundary mass * support diameter); inf when the boundary vanishes."""
    mres = S.mass()
    if mres.value <= 0:
        raise ValueError("regularity of the zero current is undefined")
    bres = S.boundary_mass()
    if bres.value == 0.0:
        return math.inf
    return mres.value / (bres.value * S.support_diameter())


@dataclass(frozen=True)
class TaggedPair:
    tag: tuple
    piece: Current
    # builder-recorded data; the independent checker recomputes everything
    diam: float
    mass: float
    boundary_mass: float
    reg: float
    gauge_at_tag: float
    eta_at_tag: float
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TaggedFamily:
    parent: Current
    pairs: tuple[TaggedPair, ...]
    remainder_pieces: tuple[Current, ...]
    remainder_value: float
    functional_name: str
    epsilon: float

    def body_mass(self) -> float:
        return math.fsum(p.mass for p in self.pairs)

    def min_regularity(self) -> float:
        return min((p.reg for p in self.pairs), default=math.inf)

    def max_diameter(self) -> float:
        return max((p.diam for p in self.pairs), default=0.0)

    def summary(self) -> dict:
        return {
            "pieces": len(self.pairs),
            "body_mass": self.body_mass(),
            "min_regularity": self.min_regularity(),
            "max_diameter": self.max_diameter(),
            "remainder_value": self.remainder_value,
            "functional": self.functional_name,
            "epsilon": self.epsilon,
        }

    def rows(self):
        for i, p in enumerate(self.pairs):
            yield {
                "piece_id": i,
                "tag": list(p.tag),
                "diam": p.diam,
                "mass": p.mass,
                "boundary_mass": p.boundary_mass,
                "reg": p.reg,
                "delta_at_tag": p.gauge_at_tag,
                "eta_at_tag": p.eta_at_tag,
            }


# ---------------------------------------------------------------------------


def _cube_test_points(cube: DyadicCube) -> list[np.ndarray]:
    return [cube.center()] + [c for c in cube.corners()]


def cousin_decompose(domain: DyadicCube, delta: Gauge, eta: float,
                     max_generation: int = 40, theta: int = 1) -> TaggedFamily:
    """Tagged dyadic tiling of a cube: every piece is delta-fine at its tag.

    The gauge must be positive on the closed cube; eta must stay below the
    cube regularity 0.5 * m^(-3/2).  The family tiles the cube exactly, so
    the remainder is zero for every functional.
    """
    m = domain.m
    if eta >= CUBE_REGULARITY(m):
        raise ValueError(
            f"eta {eta} is not below the cube regularity {CUBE_REGULARITY(m)}"
        )
    if delta.vanishes_somewhere() and delta.zero_set.cube_min_distance(domain) <= 0.0:
        raise ValueError("cousin subdivision needs a gauge positive on the domain; "
                         "excise the zero set first")
    pairs = []
    stack = [domain]
    while stack:
        cube = stack.pop()
        diam = cube.diameter()
        tag = None
        for p in _cube_test_points(cube):
            val = delta(p)
            if val > diam:
                tag = (tuple(float(v) for v in p), val)
                break
        if tag is None:
            try:
                stack.extend(cube.subdivide(max_generation))
            except DepthError as exc:
                lo, hi = cube.bounds()
                raise DepthError(
                    f"gauge forces subdivision past generation {max_generation} "
                    f"near the region [{lo.tolist()}, {hi.tolist()}]"
                ) from exc
            continue
        piece = TopDimCurrent(CubeSet(cube.root, (cube,)), theta)
        point, val = tag
        pairs.append(TaggedPair(
            tag=point,
            piece=piece,
            diam=diam,
            mass=piece.mass().value,
            boundary_mass=piece.boundary_mass().value,
            reg=CUBE_REGULARITY(m),
            gauge_at_tag=val,
            eta_at_tag=eta,
            meta={"cube": cube.key()},
        ))
    pairs.sort(key=lambda p: p.meta["cube"])
    parent = TopDimCurrent(CubeSet(domain.root, (domain,)), theta)
    return TaggedFamily(parent, tuple(pairs), (), 0.0, "mass", 0.0)


# ---------------------------------------------------------------------------


def excise(T: Current, E: ExceptionalSet, eps: float, r0: float,
           radius_samples: int = 24) -> tuple[Current, float, dict]:
    """Remove a thin neighbourhood of E from T with a controlled cut.

    Picks r in (r0/2, r0) whose slice mass obeys the mean-value bound
    (2 / r0) * ||T||(B(E, r0)), then restricts T to the complement of the
    r-neighbourhood.  Fails if the neighbourhood mass at r0 is not below
    eps, or if no sampled radius passes the bound.
    """
    if E.is_empty():
        return T, 0.75 * r0, {"trivial": True, "removed_mass": 0.0}
    ball = neighborhood_mass(T, E, r0)
    ball_upper = ball.value + ball.error
    if ball_upper >= eps:
        raise ValueError(
            f"||T||(B(E, r0)) = {ball.value:.3e} is not below eps = {eps:.3e}; shrink r0"
        )
    far = _support_clear_of(T, E)
    if far is not None and far >= r0:
        return T, 0.75 * r0, {"trivial": True, "removed_mass": 0.0}
    bound = (2.0 / r0) * ball_upper
    layer_budget = 0.5 * (eps - ball_upper)
    best = (math.inf, None)
    for i in range(radius_samples):
        r = r0 / 2.0 + (r0 / 2.0) * (i + 0.5) / radius_samples
        s = slice_current(T, E, r)
        cut = s.mass.value + s.mass.error
        if cut < best[0]:
            best = (cut, (r, s))
        if cut <= bound:
            T_eps = _restrict_outside(T, E, s.radius, layer_budget)
            removed = T.mass().value - T_eps.mass().value
            return T_eps, s.radius, {
                "radius": s.radius,
                "slice_mass": s.mass.value,
                "slice_bound": bound,
                "removed_mass": removed,
                "neighborhood_mass": ball.value,
            }
    raise RuntimeError(
        f"no radius in ({r0/2}, {r0}) met the slice bound {bound:.3e}; "
        f"minimum slice mass found was {best[0]:.3e}"
    )


def _support_clear_of(T: Current, E: ExceptionalSet) -> Optional[float]:
    """Distance from the support to E when cheaply available."""
    if isinstance(T, TopDimCurrent):
        return min((E.cube_min_distance(q) for q in T.region.cubes), default=math.inf)
    if isinstance(T, SurfaceCurrent):
        target = T.model.singular_set()
        if E.elements == target.elements:
            return T.model.y_infinity - T.y_hi
    return None


def _restrict_outside(T: Current, E: ExceptionalSet, r: float,
                      layer_budget: float = 1e-6) -> Current:
    """T restricted to the complement of B(E, r); dyadic for cube sets.

    Cubes straddling the sphere are refined until the dropped layer fits the
    budget, so the support provably clears the open ball while the extra
    removed mass stays below ``layer_budget``.
    """
    if isinstance(T, SurfaceCurrent):
        return restrict(T, HalfSpace(1, T.model.y_infinity - r, below=True))
    if not isinstance(T, TopDimCurrent):
        raise ValueError("excision is implemented for cube-set and surface currents")
    kept: list[DyadicCube] = []
    pending = list(T.region.cubes)
    while True:
        straddlers = []
        for q in pending:
            if E.cube_min_distance(q) >= r:
                kept.append(q)
            elif E.cube_max_distance_bound(q) < r:
                continue
            else:
                straddlers.append(q)
        layer = math.fsum(q.measure() for q in straddlers)
        # the side <= r/4 floor keeps the staircase perimeter of the removed
        # region within the mean-value constant of the excision bound
        fine_enough = not straddlers or straddlers[0].side <= 0.25 * r
        if not straddlers or (layer <= layer_budget and fine_enough) \
                or straddlers[0].generation >= 26:
            break
        pending = [c for q in straddlers for c in q.subdivide()]
    return TopDimCurrent(CubeSet(T.region.root, tuple(kept)), T.theta)


# ---------------------------------------------------------------------------


def _tile_rect_with_squares(rect: Rect, min_fraction: float = 0.999,
                            max_rounds: int = 12) -> tuple[list[Rect], list[Rect]]:
    """Greedy tiling of a rectangle by squares; returns (squares, leftovers).

    Each round packs columns of side = current height along the long axis;
    the leftover strip is halved and repacked, so the untiled fraction
    decays geometrically.
    """
    squares: list[Rect] = []
    leftovers: list[Rect] = []
    pending = [rect]
    for _ in range(max_rounds):
        if not pending:
            break
        nxt: list[Rect] = []
        for r in pending:
            w, h = r.x1 - r.x0, r.y1 - r.y0
            if abs(w - h) <= 1e-15 * max(w, h):
                squares.append(Rect(r.x0, r.x1, r.y0, r.y1))
                continue
            if w < h:
                n = int(h // w)
                for j in range(n):
                    squares.append(Rect(r.x0, r.x1, r.y0 + j * w, r.y0 + (j + 1) * w))
                rem = h - n * w
                if rem > 1e-14 * h:
                    nxt.append(Rect(r.x0, r.x1, r.y0 + n * w, r.y1))
            else:
                n = int(w // h)
                for j in range(n):
                    squares.append(Rect(r.x0 + j * h, r.x0 + (j + 1) * h, r.y0, r.y1))
                rem = w - n * h
                if rem > 1e-14 * w:
                    nxt.append(Rect(r.x0 + n * h, r.x1, r.y0, r.y1))
        pending = nxt
        done = sum(s.measure() for s in squares)
        if done >= min_fraction * rect.measure():
            break
    leftovers = pending
    return squares, leftovers


def _decompose_square_chart(square: Rect, chart, theta: int, delta: Gauge,
                            eta_fn: RegularityFn, max_generation: int) -> list[TaggedPair]:
    """Cousin-decompose a square chart domain and push the cubes forward."""
    root = RootBox((square.x0, square.y0), square.x1 - square.x0)
    lip = chart.lip_upper

    def pulled(u):
        # fineness transfers through the chart: pieces of planar diameter
        # below delta(image)/Lip push forward to delta-fine pieces
        image = chart.point(float(u[0]), float(u[1]))
        return delta(image) / lip

    pairs: list[TaggedPair] = []
    stack = [DyadicCube(root, 0, (0, 0))]
    while stack:
        cube = stack.pop()
        diam = cube.diameter()
        accept = None
        for p in _cube_test_points(cube):
            val = pulled(p)
            if val > diam:
                accept = (p, val)
                break
        if accept is None:
            stack.extend(cube.subdivide(max_generation))
            continue
        pre_tag, _ = accept
        lo, hi = cube.bounds()
        piece = ChartCurrent(Rect(lo[0], hi[0], lo[1], hi[1]), chart, theta, tol=1e-11)
        tag3 = chart.point(float(pre_tag[0]), float(pre_tag[1]))
        mres = piece.mass()
        bres = piece.boundary_mass()
        diam_push = lip * diam  # Lipschitz upper bound, certified
        reg = mres.value / (bres.value * diam_push)
        pairs.append(TaggedPair(
            tag=tuple(float(v) for v in tag3),
            piece=piece,
            diam=diam_push,
            mass=mres.value,
            boundary_mass=bres.value,
            reg=reg,
            gauge_at_tag=delta(tag3),
            eta_at_tag=eta_fn(tag3),
            meta={"pre_square": (square.x0, square.y0, square.x1 - square.x0),
                  "pre_cube": cube.key(), "pre_tag": tuple(map(float, pre_tag))},
        ))
    return pairs


def gauge_decompose(T: Current, E_T: ExceptionalSet, delta: Gauge,
                    eta: RegularityFn, G: SubadditiveFn, eps: float,
                    evidence: Optional[ExcisabilityEvidence] = None,
                    max_generation: int = 40, max_pieces: int = 50_000) -> TaggedFamily:
    """Fine, regular, G-full tagged family in T.

    The singular set is excised first (needs excisability evidence unless
    empty), the rest is covered by charts, each chart domain is tiled by
    squares and Cousin-decomposed with the pulled-back gauge, and the
    per-chart remainders are charged against the eps budget.
    """
    if not E_T.is_empty():
        if evidence is None:
            evidence = excisability_evidence(T, E_T)
        if not evidence.accepted:
            raise DecompositionRefusal(
                f"singular set lacks excisability evidence: {evidence.reason}"
            )
    if delta.vanishes_somewhere():
        # every gauge zero must be inside the excised set
        for (lo, hi) in delta.zero_set.elements:
            contained = any(
                all(zl >= el and zh <= eh for zl, zh, el, eh in zip(lo, hi, elo, ehi))
                for (elo, ehi) in E_T.elements
            )
            if not contained:
                raise ValueError(
                    "gauge vanishes outside the declared singular set; "
                    "fineness cannot be certified there"
                )

    remainder: list[Current] = []

    # step 1: excise the singular set with half the budget
    work = T
    if not E_T.is_empty() and _needs_excision(T, E_T):
        r0 = _initial_excision_radius(T, E_T)
        for _ in range(40):
            ball = neighborhood_mass(T, E_T, r0)
            if ball.value + ball.error < eps:
                try:
                    candidate, _, _ = excise(T, E_T, eps, r0)
                except (ValueError, RuntimeError):
                    r0 *= 0.5
                    continue
                cap = complement_pieces(T, candidate)
                if G.of_pieces(cap) < eps / 2.0:
                    work = candidate
                    remainder.extend(cap)
                    break
            r0 *= 0.5
        else:
            raise DecompositionRefusal(
                "excision could not reach the functional budget eps/2"
            )

    # step 2 + 3: chart atlas and per-chart splitting
    charts, uncovered = _chart_atlas(work)
    remainder.extend(uncovered)
    p_count = max(len(charts), 1)
    per_chart_budget = eps / (2.0 * p_count)

    pairs: list[TaggedPair] = []
    for chart_piece in charts:
        new_pairs, leftovers = _decompose_chart_piece(
            chart_piece, delta, eta, G, per_chart_budget, max_generation,
            piece_budget=max_pieces - len(pairs),
        )
        pairs.extend(new_pairs)
        remainder.extend(leftovers)

    remainder_value = G.of_pieces(remainder)
    if remainder_value >= eps:
        raise DecompositionRefusal(
            f"remainder functional value {remainder_value:.3e} >= eps {eps:.3e}"
        )
    return TaggedFamily(T, tuple(pairs), tuple(remainder), remainder_value,
                        G.name, eps)


def complement_pieces(T: Current, S: Current) -> list[Current]:
    from .currents import complement_within

    rest = complement_within(T, S)
    if rest is None:
        return []
    return rest if isinstance(rest, list) else [rest]


def _needs_excision(T: Current, E: ExceptionalSet) -> bool:
    far = _support_clear_of(T, E)
    return far is None or far <= 0.0


def _initial_excision_radius(T: Current, E: ExceptionalSet) -> float:
    return min(0.25 * T.support_diameter(), 0.2)


def _chart_atlas(T: Current) -> tuple[list[dict], list[Current]]:
    """Cover T by graph charts; cube sets are their own (identity) chart.

    Returns (chart entries, uncovered pieces to charge against the budget).
    """
    if isinstance(T, TopDimCurrent):
        return [{"kind": "flat", "current": T}], []
    if isinstance(T, ChartCurrent):
        return [{"kind": "chart", "current": T}], []
    if isinstance(T, SurfaceCurrent):
        model = T.model
        if model.params.h == 0.0:
            # degenerate flat surface: one chart covers everything
            flat = ChartCurrent(Rect(model.x_lo, model.x_hi, T.y_lo, T.y_hi),
                                model.strip_chart(0), T.theta)
            return [{"kind": "chart", "current": flat}], []
        out = []
        k0 = int(model.strip_index(T.y_lo))
        k1 = int(model.strip_index(max(T.y_hi - 1e-15, T.y_lo)))
        uncovered: list[Current] = []
        if k1 > model.k_cut:
            k1 = model.k_cut
            cap_lo = model.strip_bounds_y(model.k_cut)[1]
            if cap_lo < T.y_hi:
                uncovered.append(SurfaceCurrent(model, cap_lo, T.y_hi, T.theta))
        for k in range(k0, k1 + 1):
            s0, s1 = model.strip_bounds_y(k)
            lo, hi = max(T.y_lo, s0), min(T.y_hi, s1)
            if hi <= lo:
                continue
            piece = SurfaceCurrent(model, lo, hi, T.theta)
            out.append({"kind": "strip", "current": piece, "strip": k})
        return out, uncovered
    raise ValueError(f"no chart atlas for {type(T).__name__}")


def _decompose_chart_piece(entry: dict, delta: Gauge, eta: RegularityFn,
                           G: SubadditiveFn, budget: float, max_generation: int,
                           piece_budget: int) -> tuple[list[TaggedPair], list[Current]]:
    kind = entry["kind"]
    T = entry["current"]
    if kind == "flat":
        pairs = []
        for q in T.region.cubes:
            fam = cousin_decompose(q, delta, _max_constant_eta(eta, q), max_generation,
                                   theta=T.theta)
            for p in fam.pairs:
                pairs.append(TaggedPair(
                    tag=p.tag, piece=p.piece, diam=p.diam,
                    mass=p.mass, boundary_mass=p.boundary_mass, reg=p.reg,
                    gauge_at_tag=p.gauge_at_tag, eta_at_tag=eta(np.asarray(p.tag)),
                    meta=p.meta,
                ))
            if len(pairs) > piece_budget:
                raise ResourceBudgetError(
                    f"decomposition exceeded the piece budget ({piece_budget})"
                )
        return pairs, []
    if kind == "chart":
        chart = T.chart
        rects = T._domain_rects()
    else:
        model = T.model
        k = entry["strip"]
        chart = model.strip_chart(k)
        rects = [Rect(model.x_lo, model.x_hi, T.y_lo, T.y_hi)]

    pairs: list[TaggedPair] = []
    leftovers: list[Current] = []
    for rect in rects:
        squares, rest = _tile_rect_with_squares(rect)
        while True:
            rest_currents = [ChartCurrent(rr, chart, T.theta, tol=1e-9) for rr in rest]
            rest_value = G.of_pieces(rest_currents)
            if rest_value < budget or not rest:
                leftovers.extend(rest_currents)
                break
            deeper = []
            for rr in rest:
                sq, lv = _tile_rect_with_squares(rr, min_fraction=0.9999)
                squares.extend(sq)
                deeper.extend(lv)
            if not deeper:
                leftovers.extend(rest_currents)
                break
            rest = deeper
        if len(squares) > piece_budget:
            raise ResourceBudgetError(
                f"chart tiling needs {len(squares)} squares, over the piece budget "
                f"({piece_budget}); decompose a smaller window or raise the budget"
            )
        for square in squares:
            pairs.extend(_decompose_square_chart(square, chart, T.theta, delta, eta,
                                                 max_generation))
            if len(pairs) > piece_budget:
                raise ResourceBudgetError(
                    f"decomposition exceeded the piece budget ({piece_budget})"
                )
    return pairs, leftovers


def _max_constant_eta(eta: RegularityFn, cube: DyadicCube) -> float:
    """Largest eta value over the cube's test points, kept below the cube score."""
    vals = [eta(p) for p in _cube_test_points(cube)]
    return min(max(vals), CUBE_REGULARITY(cube.m) * (1 - 1e-12))
