"""Intrinsic content profiles: how much area crowds against a set.

The profile samples ||T||(B(E, r)) / (2r) on shrinking radii.  A segment
inside a flat square plateaus at its length, a point vanishes linearly,
and the singular segment of the oscillating surface diverges, which is
exactly what blocks the excision route there.
"""

import numpy as np

from stokeslab import minkowski
from stokeslab.counterexample import Params, build_surface_current
from stokeslab.currents import TopDimCurrent
from stokeslab.dyadic import CubeSet, ExceptionalSet, RootBox

square = TopDimCurrent(CubeSet.whole(RootBox((0.0, 0.0), 1.0)))


def show(name, profile):
    print(f"{name}: {profile.trend}")
    print("  r:", " ".join(f"{r:.4f}" for r in profile.radii[:8]))
    print("  v:", " ".join(f"{v:.4f}" for v in profile.values[:8]))


print("== interior segment: bounded at its length")
seg = ExceptionalSet.segment((0.5, 0.0), (0.5, 1.0))
show("segment", minkowski.intrinsic_content(square, seg, 0.2, 0.7, 10))

print()
print("== center point: content vanishes (v = pi r / 2)")
pt = ExceptionalSet.points([(0.5, 0.5)])
show("point", minkowski.intrinsic_content(square, pt, 0.2, 0.7, 10))

print()
print("== boundary edge: one-sided strip gives constant 1/2")
edge = ExceptionalSet.segment((0.0, 0.0), (0.0, 1.0))
evidence = minkowski.excisability_evidence(square, edge, 0.2, 0.7, 10)
print(f"excisability: {evidence.accepted}, constant C = {evidence.constant}")

print()
print("== the oscillating surface's singular segment: divergent")
S = build_surface_current(Params.default())
E = S.model.singular_set()
for (r0, q, steps) in [(0.45, 1 / 3, 9), (0.3, 0.45, 11)]:
    profile = minkowski.intrinsic_content(S, E, r0, q, steps)
    print(f"grid r0={r0}, q={q:.3f}: {profile.trend}, "
          f"exponent {profile.growth_exponent():.4f}")
evidence = minkowski.excisability_evidence(S, E, 0.45, 1 / 3, 9)
print(f"excisability: {evidence.accepted} ({evidence.reason})")
