"""Dyadic cubes and finite cube complexes in R^m (m = 1, 2, 3).

A CubeSet is the computable stand-in for a bounded set of finite perimeter:
measure, perimeter and diameter are exact, every set is closed, and set
operations (union, difference, intersection, half-space cuts) stay inside
the class because two dyadic cubes on a common root box are either nested
or have disjoint interiors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RootBox",
    "DyadicCube",
    "CubeSet",
    "ExceptionalSet",
    "DepthError",
    "GridError",
    "MAX_GENERATION",
]

MAX_GENERATION = 40


class DepthError(RuntimeError):
    """Subdivision descended past the configured maximum generation."""


class GridError(ValueError):
    """Operands do not live on a common dyadic grid."""


@dataclass(frozen=True)
class RootBox:
    """The reference cube: corner plus positive side length."""

    corner: tuple[float, ...]
    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("root box side must be positive")
        object.__setattr__(self, "corner", tuple(float(c) for c in self.corner))

    @property
    def m(self) -> int:
        return len(self.corner)


@dataclass(frozen=True)
class DyadicCube:
    """Cube of side root.side * 2^-generation at integer corner coordinates."""

    root: RootBox
    generation: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.generation < 0:
            raise ValueError("generation must be nonnegative")
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))
        if len(self.index) != self.root.m:
            raise ValueError("index arity does not match the root dimension")
        top = 1 << self.generation
        if any(not 0 <= i < top for i in self.index):
            raise ValueError(f"index {self.index} outside the root box at generation {self.generation}")

    @property
    def m(self) -> int:
        return self.root.m

    @property
    def side(self) -> float:
        return self.root.side * 2.0 ** (-self.generation)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        s = self.side
        lo = np.asarray(self.root.corner) + s * np.asarray(self.index, dtype=float)
        return lo, lo + s

    def center(self) -> np.ndarray:
        lo, hi = self.bounds()
        return 0.5 * (lo + hi)

    def corners(self) -> np.ndarray:
        lo, hi = self.bounds()
        m = self.m
        pts = np.empty((1 << m, m))
        for mask in range(1 << m):
            for d in range(m):
                pts[mask, d] = hi[d] if (mask >> d) & 1 else lo[d]
        return pts

    def diameter(self) -> float:
        return self.side * math.sqrt(self.m)

    def measure(self) -> float:
        return self.side ** self.m

    def subdivide(self, max_generation: int = MAX_GENERATION) -> list["DyadicCube"]:
        """The 2^m children, one generation deeper."""
        if self.generation + 1 > max_generation:
            raise DepthError(
                f"cube at generation {self.generation} (index {self.index}) cannot be "
                f"subdivided past generation {max_generation}"
            )
        children = []
        base = tuple(2 * i for i in self.index)
        for mask in range(1 << self.m):
            idx = tuple(base[d] + ((mask >> d) & 1) for d in range(self.m))
            children.append(DyadicCube(self.root, self.generation + 1, idx))
        return children

    def ancestor_key(self, generation: int) -> tuple:
        shift = self.generation - generation
        return (generation, tuple(i >> shift for i in self.index))

    def key(self) -> tuple:
        return (self.generation, self.index)

    def contains_cube(self, other: "DyadicCube") -> bool:
        if other.generation < self.generation or self.root != other.root:
            return False
        return other.ancestor_key(self.generation) == self.key()


def _canonicalize(root: RootBox, cubes: Iterable[DyadicCube]) -> tuple[DyadicCube, ...]:
    seen: dict[tuple, DyadicCube] = {}
    for q in cubes:
        if q.root != root:
            raise GridError("all cubes of a CubeSet must share the root box")
        seen[q.key()] = q
    # drop any cube covered by an ancestor already in the set
    gens = sorted({g for g, _ in seen})
    kept: dict[tuple, DyadicCube] = {}
    for key in sorted(seen):
        q = seen[key]
        covered = any(
            g < q.generation and q.ancestor_key(g) in kept for g in gens if g < q.generation
        )
        if not covered:
            kept[key] = q
    # merge complete sibling groups into parents, deepest first
    changed = True
    while changed:
        changed = False
        by_parent: dict[tuple, list[DyadicCube]] = {}
        for q in kept.values():
            if q.generation == 0:
                continue
            by_parent.setdefault(q.ancestor_key(q.generation - 1), []).append(q)
        for pkey, group in by_parent.items():
            if len(group) == (1 << root.m):
                for q in group:
                    del kept[q.key()]
                g, idx = pkey
                kept[pkey] = DyadicCube(root, g, idx)
                changed = True
    return tuple(kept[k] for k in sorted(kept))


@dataclass(frozen=True)
class CubeSet:
    """Finite union of pairwise nonoverlapping dyadic cubes, in canonical form."""

    root: RootBox
    cubes: tuple[DyadicCube, ...]

    def __post_init__(self):
        object.__setattr__(self, "cubes", _canonicalize(self.root, self.cubes))

    @classmethod
    def whole(cls, root: RootBox) -> "CubeSet":
        return cls(root, (DyadicCube(root, 0, (0,) * root.m),))

    @classmethod
    def empty(cls, root: RootBox) -> "CubeSet":
        return cls(root, ())

    @property
    def m(self) -> int:
        return self.root.m

    def is_empty(self) -> bool:
        return not self.cubes

    # -- exact scalar geometry ------------------------------------------------

    def measure(self) -> float:
        return math.fsum(q.measure() for q in self.cubes)

    def diameter(self) -> float:
        if not self.cubes:
            raise ValueError("diameter of the empty set is undefined")
        pts = np.unique(np.vstack([q.corners() for q in self.cubes]), axis=0)
        if len(pts) > 1500:
            try:
                from scipy.spatial import ConvexHull

                pts = pts[ConvexHull(pts).vertices]
            except Exception:
                pass
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff ** 2).sum(axis=2)).max())

    def _finest_generation(self) -> int:
        return max((q.generation for q in self.cubes), default=0)

    def _facets(self):
        """Oriented facets at integer coordinates of the finest generation.

        Yields (axis, coord, orientation, lo_tuple, hi_tuple) where the lo/hi
        tuples span the remaining m-1 axes, all in finest-grid integers.
        """
        G = self._finest_generation()
        for q in self.cubes:
            scale = 1 << (G - q.generation)
            lo = tuple(i * scale for i in q.index)
            hi = tuple(l + scale for l in lo)
            for axis in range(self.m):
                rest = [d for d in range(self.m) if d != axis]
                box_lo = tuple(lo[d] for d in rest)
                box_hi = tuple(hi[d] for d in rest)
                yield (axis, lo[axis], -1, box_lo, box_hi)
                yield (axis, hi[axis], +1, box_lo, box_hi)

    def perimeter(self) -> float:
        """Total boundary measure with shared facets cancelled; exact."""
        G = self._finest_generation()
        unit = self.root.side * 2.0 ** (-G)
        groups: dict[tuple, list] = {}
        for axis, coord, orient, blo, bhi in self._facets():
            groups.setdefault((axis, coord), []).append((orient, blo, bhi))
        total_cells = 0
        for (_, _), facets in groups.items():
            plus = [(blo, bhi) for o, blo, bhi in facets if o > 0]
            minus = [(blo, bhi) for o, blo, bhi in facets if o < 0]
            cells = _boxes_volume(plus) + _boxes_volume(minus) - 2 * _boxes_overlap(plus, minus)
            total_cells += cells
        if self.m == 1:
            return float(total_cells)
        return total_cells * unit ** (self.m - 1)

    def boundary_segments(self):
        """Uncancelled oriented boundary facets in real coordinates.

        Returns a list of (axis, coordinate, orientation, lo, hi) pieces where
        lo/hi bound the facet on the remaining axes; pieces from opposite
        orientations never overlap.  Only meaningful for m <= 2.
        """
        G = self._finest_generation()
        unit = self.root.side * 2.0 ** (-G)
        corner = np.asarray(self.root.corner)
        groups: dict[tuple, list] = {}
        for axis, coord, orient, blo, bhi in self._facets():
            groups.setdefault((axis, coord), []).append((orient, blo, bhi))
        out = []
        for (axis, coord), facets in groups.items():
            plus = [(blo, bhi) for o, blo, bhi in facets if o > 0]
            minus = [(blo, bhi) for o, blo, bhi in facets if o < 0]
            for orient, own, other in ((+1, plus, minus), (-1, minus, plus)):
                for blo, bhi in own:
                    for piece_lo, piece_hi in _box_difference(blo, bhi, other):
                        rest = [d for d in range(self.m) if d != axis]
                        lo = [0.0] * self.m
                        hi = [0.0] * self.m
                        lo[axis] = hi[axis] = corner[axis] + coord * unit
                        for j, d in enumerate(rest):
                            lo[d] = corner[d] + piece_lo[j] * unit
                            hi[d] = corner[d] + piece_hi[j] * unit
                        out.append((axis, lo[axis], orient, tuple(lo), tuple(hi)))
        return out

    # -- membership and line queries -------------------------------------------

    def contains(self, point) -> bool:
        x = np.asarray(point, dtype=float)
        for q in self.cubes:
            lo, hi = q.bounds()
            if np.all(lo <= x) and np.all(x <= hi):
                return True
        return False

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        out = np.zeros(len(pts), dtype=bool)
        for q in self.cubes:
            lo, hi = q.bounds()
            out |= np.all((pts >= lo) & (pts <= hi), axis=1)
        return out

    def line_intersection_length(self, axis: int, coordinate: float, t0: float, t1: float) -> float:
        """Length of the axis-parallel segment portion inside the set (m = 2)."""
        if self.m != 2:
            raise GridError("line queries are only supported in the plane")
        other = 1 - axis
        intervals = []
        for q in self.cubes:
            lo, hi = q.bounds()
            if lo[other] <= coordinate <= hi[other]:
                a, b = max(t0, lo[axis]), min(t1, hi[axis])
                if a < b:
                    intervals.append((a, b))
        return _merged_length(intervals)

    # -- set algebra ------------------------------------------------------------

    def union(self, other: "CubeSet") -> "CubeSet":
        self._check_grid(other)
        return CubeSet(self.root, self.cubes + other.cubes)

    def intersection(self, other: "CubeSet") -> "CubeSet":
        self._check_grid(other)
        mine = {q.key() for q in self.cubes}
        theirs = {q.key() for q in other.cubes}
        picked = []
        for q in other.cubes:
            if any(q.ancestor_key(g) in mine for g in range(q.generation + 1)):
                picked.append(q)
        for q in self.cubes:
            if any(q.ancestor_key(g) in theirs for g in range(q.generation + 1)):
                picked.append(q)
        return CubeSet(self.root, tuple(picked))

    def difference(self, other: "CubeSet") -> "CubeSet":
        self._check_grid(other)
        removed = {q.key() for q in other.cubes}
        max_gen = max((q.generation for q in other.cubes), default=0)
        out: list[DyadicCube] = []

        def push(q: DyadicCube):
            if any(q.ancestor_key(g) in removed for g in range(q.generation + 1)):
                return
            if q.generation >= max_gen or not any(
                o.generation > q.generation and o.ancestor_key(q.generation) == q.key()
                for o in other.cubes
            ):
                out.append(q)
                return
            for child in q.subdivide():
                push(child)

        for q in self.cubes:
            push(q)
        return CubeSet(self.root, tuple(out))

    def restrict_half_space(self, axis: int, threshold: float, keep_below: bool,
                            max_generation: int = MAX_GENERATION) -> "CubeSet":
        """Intersection with {x_axis <= threshold} (or >=); threshold must be dyadic."""
        kept: list[DyadicCube] = []

        def push(q: DyadicCube):
            lo, hi = q.bounds()
            if keep_below:
                if hi[axis] <= threshold:
                    kept.append(q)
                    return
                if lo[axis] >= threshold:
                    return
            else:
                if lo[axis] >= threshold:
                    kept.append(q)
                    return
                if hi[axis] <= threshold:
                    return
            if q.generation + 1 > max_generation:
                raise GridError(
                    f"threshold {threshold} is not aligned with the dyadic grid "
                    f"within generation {max_generation}"
                )
            for child in q.subdivide(max_generation):
                push(child)

        for q in self.cubes:
            push(q)
        return CubeSet(self.root, tuple(kept))

    def _check_grid(self, other: "CubeSet"):
        if self.root != other.root:
            raise GridError("cube sets live on different root boxes")

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "root": {"corner": list(self.root.corner), "side": self.root.side},
            "cubes": [{"generation": q.generation, "corner": list(q.index)} for q in self.cubes],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "CubeSet":
        payload = json.loads(text)
        root = RootBox(tuple(payload["root"]["corner"]), payload["root"]["side"])
        cubes = tuple(
            DyadicCube(root, entry["generation"], tuple(entry["corner"]))
            for entry in payload["cubes"]
        )
        return cls(root, cubes)


def _merged_length(intervals: Sequence[tuple[float, float]]) -> float:
    if not intervals:
        return 0.0
    ordered = sorted(intervals)
    total = 0.0
    cur_a, cur_b = ordered[0]
    for a, b in ordered[1:]:
        if a > cur_b:
            total += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    return total + (cur_b - cur_a)


def _boxes_volume(boxes) -> int:
    """Total integer volume of disjoint integer boxes ((), point boxes count 1)."""
    total = 0
    for lo, hi in boxes:
        v = 1
        for a, b in zip(lo, hi):
            v *= b - a
        total += v
    return total


def _boxes_overlap(plus, minus) -> int:
    total = 0
    for plo, phi in plus:
        for mlo, mhi in minus:
            v = 1
            for a, b, c, d in zip(plo, phi, mlo, mhi):
                w = min(b, d) - max(a, c)
                if w <= 0:
                    v = 0
                    break
                v *= w
            total += v
    return total


def _box_difference(lo, hi, others):
    """Integer box minus a list of integer boxes, as a list of disjoint boxes."""
    pieces = [(tuple(lo), tuple(hi))]
    for olo, ohi in others:
        nxt = []
        for plo, phi in pieces:
            if any(phi[d] <= olo[d] or plo[d] >= ohi[d] for d in range(len(plo))):
                nxt.append((plo, phi))
                continue
            cur_lo, cur_hi = list(plo), list(phi)
            for d in range(len(plo)):
                if cur_lo[d] < olo[d]:
                    a, b = list(cur_lo), list(cur_hi)
                    b[d] = olo[d]
                    nxt.append((tuple(a), tuple(b)))
                    cur_lo[d] = olo[d]
                if cur_hi[d] > ohi[d]:
                    a, b = list(cur_lo), list(cur_hi)
                    a[d] = ohi[d]
                    nxt.append((tuple(a), tuple(b)))
                    cur_hi[d] = ohi[d]
        pieces = nxt
    return [(lo_, hi_) for lo_, hi_ in pieces if all(a < b for a, b in zip(lo_, hi_))]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExceptionalSet:
    """Finite union of points and axis-aligned boxes with exact distances.

    Each element is a pair (lo, hi) of equal-length tuples; degenerate axes
    (lo == hi) give points and segments.  The distance evaluator is
    1-Lipschitz, and by construction the set is H^{m-1} sigma-finite for the
    element shapes used throughout (points, segments, thin boxes).
    """

    elements: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]

    def __post_init__(self):
        elems = []
        for lo, hi in self.elements:
            lo = tuple(float(v) for v in lo)
            hi = tuple(float(v) for v in hi)
            if len(lo) != len(hi):
                raise ValueError("element lo/hi arity mismatch")
            if any(a > b for a, b in zip(lo, hi)):
                raise ValueError("element has lo > hi")
            elems.append((lo, hi))
        object.__setattr__(self, "elements", tuple(elems))

    @classmethod
    def empty(cls) -> "ExceptionalSet":
        return cls(())

    @classmethod
    def points(cls, pts) -> "ExceptionalSet":
        return cls(tuple((tuple(p), tuple(p)) for p in pts))

    @classmethod
    def segment(cls, p0, p1) -> "ExceptionalSet":
        p0, p1 = tuple(map(float, p0)), tuple(map(float, p1))
        moving = [d for d in range(len(p0)) if p0[d] != p1[d]]
        if len(moving) > 1:
            raise ValueError("segments must be axis-aligned")
        lo = tuple(min(a, b) for a, b in zip(p0, p1))
        hi = tuple(max(a, b) for a, b in zip(p0, p1))
        return cls(((lo, hi),))

    @classmethod
    def box(cls, lo, hi) -> "ExceptionalSet":
        return cls(((tuple(lo), tuple(hi)),))

    def union(self, other: "ExceptionalSet") -> "ExceptionalSet":
        return ExceptionalSet(self.elements + other.elements)

    def is_empty(self) -> bool:
        return not self.elements

    def distance(self, point) -> float:
        x = np.asarray(point, dtype=float)
        if not self.elements:
            return math.inf
        best = math.inf
        for lo, hi in self.elements:
            dev = np.maximum(np.asarray(lo) - x, 0.0) + np.maximum(x - np.asarray(hi), 0.0)
            best = min(best, float(np.linalg.norm(dev)))
        return best

    def distance_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if not self.elements:
            return np.full(len(pts), np.inf)
        dists = np.full(len(pts), np.inf)
        for lo, hi in self.elements:
            dev = np.maximum(np.asarray(lo) - pts, 0.0) + np.maximum(pts - np.asarray(hi), 0.0)
            dists = np.minimum(dists, np.sqrt((dev ** 2).sum(axis=1)))
        return dists

    def cube_min_distance(self, cube: DyadicCube) -> float:
        """Exact min over the closed cube of the distance to the set."""
        lo, hi = cube.bounds()
        if not self.elements:
            return math.inf
        best = math.inf
        for elo, ehi in self.elements:
            dev = np.maximum(np.asarray(elo) - hi, 0.0) + np.maximum(lo - np.asarray(ehi), 0.0)
            best = min(best, float(np.linalg.norm(dev)))
        return best

    def cube_max_distance_bound(self, cube: DyadicCube) -> float:
        """Upper bound for max over the cube of the distance (min over elements)."""
        lo, hi = cube.bounds()
        if not self.elements:
            return math.inf
        best = math.inf
        for elo, ehi in self.elements:
            dev = np.maximum(np.maximum(np.asarray(elo) - lo, hi - np.asarray(ehi)), 0.0)
            best = min(best, float(np.linalg.norm(dev)))
        return best


def neighborhood_indicator(E: ExceptionalSet, r: float, x) -> bool:
    """True iff x lies in the open r-neighbourhood of E."""
    if r <= 0:
        raise ValueError("neighbourhood radius must be positive")
    return E.distance(x) < r
