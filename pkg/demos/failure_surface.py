"""Walkthrough of the oscillating surface that defeats the boundary identity.

The surface glues graphs of h^k sin(x / lambda^k) over strips shrinking
toward a segment.  Horizontal section lengths blow up like (h/lambda)^k,
and the normalized-arclength 1-form has circulation 1 around every section
yet extends continuously by zero onto the limit segment.  The result:
d(omega) pairs to zero against the surface everywhere, while the boundary
circulation is 1.
"""

import math

import numpy as np

from stokeslab import integration, minkowski
from stokeslab.counterexample import Params, build_surface_current

params = Params.default()
print(f"parameters: a = h = 1/3, lambda = 1/4  ->  conditions {params.flags()}")

S = build_surface_current(params)
model = S.model

print()
print("== geometry: finite area, exploding section lengths")
mass = S.mass()
print(f"mass = {mass.value:.6f} +- {mass.error:.1e}")
bmass = S.boundary_mass()
print(f"boundary mass = {bmass.value:.9f}  (2 pi + 2 y_inf = {2 * math.pi + 1:.9f})")
for k in (1, 2, 4, 6, 8):
    L = model.section_length(params.y_k(k))
    print(f"L(y_{k}) = {L.value:10.4f}  >= 2 (h/lambda)^{k} = {2 * (4 / 3) ** k:8.4f}")
print(f"L(y_inf) = {model.section_length(params.y_infinity).value} (back to flat)")

print()
print("== the form: circulation 1, tangential differential 0")
omega = model.omega_field()
circ = integration.circulation(omega, S)
print(f"circulation around the boundary: {circ.value:.9f} +- {circ.error:.1e}")
rng = np.random.default_rng(0)
curl = model.tangential_curl_samples(300, rng)
print(f"max |<d omega, tangent plane>| over 300 random points: {curl.max():.2e}")

print()
print("== the singular segment is not excisable: content diverges")
profile = minkowski.intrinsic_content(S, model.singular_set(), 0.45, 1 / 3, 9)
print(f"trend: {profile.trend}, fitted growth exponent "
      f"{profile.growth_exponent():.4f}")
print("content values:", " ".join(f"{v:.2f}" for v in profile.values))

print()
print("== the verdict")
report = integration.stokes_check(
    S, omega, model.singular_set(),
    surface_options={"max_strip": 6, "y_panels": 2, "x_panels": 3, "order": 6},
)
print(f"lhs = {report.lhs:.3e}, rhs = {report.rhs:.6f}, gap = {report.gap:.6f}")
print(f"verdict: {report.verdict}")
print(f"decomposition: {report.decomposition['status']} "
      f"({report.decomposition.get('reason', '')})")
