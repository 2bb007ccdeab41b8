import math

import numpy as np
import pytest

from stokeslab.counterexample import (
    Params,
    ParamsError,
    SurfaceModel,
    TransitionFn,
    build_surface_current,
    cylindrical_variant,
    default_transition,
)
from stokeslab.currents import HalfSpace, restrict

PARAMS = Params.default()
MODEL = SurfaceModel(PARAMS)


# -- parameters ---------------------------------------------------------------


def test_default_parameter_flags():
    assert PARAMS.flags() == {"area": True, "length": True, "continuity": True}
    assert PARAMS.y_infinity == pytest.approx(0.5, abs=1e-15)
    assert PARAMS.lam_inverse == 4


def test_length_flag_fails_for_large_lambda():
    p = Params(a=1 / 3, h=1 / 3, lam=0.5)
    assert not p.flag_length
    with pytest.raises(ParamsError):
        p.require_all_flags()


def test_invalid_lambda_rejected():
    with pytest.raises(ParamsError):
        Params(a=1 / 3, h=1 / 3, lam=0.3)


def test_y_k_partial_sums():
    for k in range(1, 8):
        direct = sum((1 / 3) ** j for j in range(1, k + 1))
        assert PARAMS.y_k(k) == pytest.approx(direct, rel=1e-14)


# -- transition function ------------------------------------------------------


def test_transition_endpoint_flatness():
    tr = default_transition()
    assert tr(0.0) == 0.0 and tr(0.125) == 0.0
    assert tr(0.875) == 1.0 and tr(1.0) == 1.0
    ts = np.linspace(0.0, 1.0, 101)
    flat = (ts <= 0.125) | (ts >= 0.875)
    assert np.all(tr.derivative(ts[flat]) == 0.0)


def test_transition_monotone_with_bounded_slope():
    tr = default_transition()
    ts = np.linspace(0.0, 1.0, 10_000)
    d = tr.derivative(ts)
    assert np.all(d >= 0.0)
    assert tr.sup_derivative() <= 2.0


def test_transition_interpolates_cleanly():
    tr = TransitionFn()
    mid = tr(0.5)
    assert 0.0 < mid < 1.0


# -- surface geometry ---------------------------------------------------------


def test_psi_continuous_across_junctions():
    xs = np.linspace(0.0, math.pi, 1000)
    for k in (1, 2, 3, 4, 5):
        yk = PARAMS.y_k(k)
        below = MODEL.psi(xs, np.full_like(xs, yk - 1e-13))
        at = MODEL.psi(xs, np.full_like(xs, yk))
        assert float(np.abs(below - at).max()) == 0.0


def test_psi_zero_on_rectangle_boundary():
    xs = np.linspace(0.0, math.pi, 200)
    assert np.allclose(MODEL.psi(xs, np.zeros_like(xs)), 0.0)
    assert np.allclose(MODEL.psi(np.zeros(50), np.linspace(0, 0.49, 50)), 0.0)
    assert np.allclose(MODEL.psi(np.full(50, math.pi), np.linspace(0, 0.49, 50)), 0.0)


def test_psi_bounded_by_strip_height():
    rng = np.random.default_rng(0)
    xs = rng.uniform(0, math.pi, 10_000)
    ys = rng.uniform(0, PARAMS.y_k(10), 10_000)
    psi = MODEL.psi(xs, ys)
    ks = MODEL.strip_index(ys)
    bound = 2.0 * PARAMS.h ** ks.astype(float)
    assert np.all(np.abs(psi) <= bound + 1e-14)


def test_partial_bounds_per_strip():
    rng = np.random.default_rng(1)
    p = PARAMS
    sup_dphi = MODEL.transition.sup_derivative()
    for k in range(0, 8):
        y0, y1 = MODEL.strip_bounds_y(k)
        xs = rng.uniform(0, math.pi, 500)
        ys = rng.uniform(y0, y1 - 1e-12, 500)
        _, px, py, _ = MODEL._strip_data(xs, ys)
        px_bound = 2.0 * p.h ** k * p.lam ** (-k)
        py_bound = sup_dphi * (p.h ** k + p.h ** (k + 1)) / p.a ** (k + 1)
        assert np.all(np.abs(px) <= px_bound + 1e-12)
        assert np.all(np.abs(py) <= py_bound + 1e-12)


def test_tangent_frame_orthonormal_and_oriented():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(0, math.pi)
        y = rng.uniform(0, PARAMS.y_k(9))
        t1, t2, t3 = MODEL.tangent_frame(x, y)
        F = np.stack([t1, t2, t3])
        worst = max(worst, float(np.abs(F @ F.T - np.eye(3)).max()))
        assert np.linalg.det(F) > 0.0
    assert worst <= 1e-12


def test_frames_inherited_by_restriction():
    S = build_surface_current(PARAMS)
    Sa = restrict(S, HalfSpace(1, PARAMS.y_k(3), below=True))
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.uniform(0, math.pi)
        y = rng.uniform(0, PARAMS.y_k(3) - 1e-9)
        for a, b in zip(S.model.tangent_frame(x, y), Sa.model.tangent_frame(x, y)):
            assert np.allclose(a, b)


# -- lengths and areas --------------------------------------------------------


def test_section_length_endpoints():
    assert MODEL.section_length(0.0).value == pytest.approx(math.pi, abs=1e-12)
    assert MODEL.section_length(PARAMS.y_infinity).value == math.pi


def test_section_length_blowup():
    ratio = PARAMS.h / PARAMS.lam
    for k in range(1, 9):
        L = MODEL.section_length(PARAMS.y_k(k))
        assert L.value >= 2.0 * ratio ** k


def test_strip_area_within_closed_form_bound():
    for k in range(0, 12):
        res, bound = MODEL.strip_area(k)
        assert res.value <= bound + res.error


def test_strip_areas_summable_with_geometric_tail():
    partial = 0.0
    prev_tail = math.inf
    for k in range(0, 21):
        res, _ = MODEL.strip_area(k)
        partial += res.value
        tail = MODEL.tail_area_bound(k + 1)
        assert tail < prev_tail
        prev_tail = tail
    assert MODEL.tail_area_bound(21) < 1e-6
    total = MODEL.mass_between(0.0, PARAMS.y_infinity)
    assert total.value == pytest.approx(partial, abs=1e-6)


def test_flat_degenerate_strip_area_exact():
    flat = SurfaceModel(Params(a=1 / 3, h=0.0, lam=0.25))
    for k in range(0, 5):
        res, _ = flat.strip_area(k)
        width = flat.strip_bounds_y(k)[1] - flat.strip_bounds_y(k)[0]
        assert res.value == pytest.approx(math.pi * width, rel=1e-12)
        assert width == pytest.approx((1 / 3) ** (k + 1), rel=1e-12)


# -- normalized arclength and the form ---------------------------------------


def test_u_normalization():
    for y in (0.0, 0.1, 0.21, PARAMS.y_k(2), 0.4):
        u0, _ = MODEL.u_and_du(0.0, y)
        u1, _ = MODEL.u_and_du(math.pi, y)
        assert u0 == 0.0
        assert u1 == pytest.approx(1.0, rel=1e-12)


def test_u_strictly_increasing_in_x():
    xs = np.linspace(0.1, math.pi - 0.1, 20)
    y = 0.3
    us = [MODEL.u_and_du(float(x), y)[0] for x in xs]
    assert all(b > a for a, b in zip(us, us[1:]))


def test_du_at_flat_bottom():
    u, du = MODEL.u_and_du(1.0, 0.0)
    assert u == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert du.coeffs[0] == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert du.coeffs[1] == pytest.approx(0.0, abs=1e-12)


def test_du_is_closed():
    # numeric curl of du vanishes: d(du) = 0.  The step shrinks with the
    # strip so the third y-derivatives (growing with depth) stay resolved.
    rng = np.random.default_rng(4)
    worst = 0.0
    checked = 0
    while checked < 100:
        x = rng.uniform(0.2, math.pi - 0.2)
        y = rng.uniform(0.01, PARAMS.y_k(3))
        k = int(MODEL.strip_index(y))
        y0, y1 = MODEL.strip_bounds_y(k)
        s = min(1e-5, 0.02 * (y1 - y0))
        if y - s <= y0 or y + s >= y1:
            continue
        ux_hi = MODEL.u_and_du(x, y + s)[1].coeffs[0]
        ux_lo = MODEL.u_and_du(x, y - s)[1].coeffs[0]
        uy_hi = MODEL.u_and_du(x + s, y)[1].coeffs[1]
        uy_lo = MODEL.u_and_du(x - s, y)[1].coeffs[1]
        curl = (uy_hi - uy_lo) / (2 * s) - (ux_hi - ux_lo) / (2 * s)
        worst = max(worst, abs(curl))
        checked += 1
    assert worst <= 1e-5


def test_omega_vanishes_on_singular_segment():
    for x in (0.0, 1.0, 2.0, math.pi):
        assert np.allclose(MODEL.omega_coeffs((x, PARAMS.y_infinity, 0.0)), 0.0)
    assert np.allclose(MODEL.omega_coeffs((1.0, 0.75, 0.0)), 0.0)


def test_omega_bottom_value():
    v = MODEL.omega_coeffs((0.7, 0.0, 0.0))
    assert v[0] == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert abs(v[1]) <= 1e-12 and abs(v[2]) <= 1e-12


def test_omega_continuous_across_x_seams():
    for y in (0.05, 0.21):
        left = MODEL.omega_coeffs((math.pi - 1e-9, y, float(MODEL.psi(math.pi - 1e-9, y))))
        right = MODEL.omega_coeffs((math.pi + 1e-9, y, float(MODEL.psi(1e-9, y))))
        assert np.allclose(left, right, atol=1e-6)


def test_sup_omega_decays_per_strip():
    sups = [MODEL.sup_omega_on_section(k) for k in range(1, 11)]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    envelope = [max((PARAMS.lam / PARAMS.h) ** k, (PARAMS.lam / PARAMS.a) ** k)
                for k in range(1, 11)]
    ratios = [s / e for s, e in zip(sups, envelope)]
    fitted = float(np.median(ratios))
    assert all(s <= 10.0 * fitted * e for s, e in zip(sups, envelope))


def test_tangential_curl_floor():
    rng = np.random.default_rng(5)
    vals = MODEL.tangential_curl_samples(200, rng)
    assert float(vals.max()) <= 1e-3


def test_section_circulation_is_one_at_every_height():
    # integral over a horizontal path of <omega, tau1> ds = u(pi) - u(0) = 1
    from stokeslab.quadrature import gauss_rule

    nodes, weights = gauss_rule(12)
    for y in (0.0, 0.15, PARAMS.y_k(2) + 1e-4):
        P = min(MODEL._x_period(int(MODEL.strip_index(y))), math.pi)
        n_seg = max(8, int(math.pi / P) * 4)
        edges = np.linspace(0.0, math.pi, n_seg + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            for nx, w in zip(nodes, weights):
                x = float(mid + half * nx)
                om = MODEL.omega_at_surface(x, y)
                t1 = MODEL.tangent_frame(x, y)[0]
                px = float(MODEL.dpsi_dx(x, y))
                speed = math.sqrt(1.0 + px * px)
                total += half * w * float(np.dot(om, t1)) * speed
        assert total == pytest.approx(1.0, rel=1e-6)


# -- the failure report -------------------------------------------------------


@pytest.fixture(scope="module")
def failure_report():
    from stokeslab.counterexample import verify_failure

    return verify_failure(PARAMS, n_tangent_samples=200, n_strips=10, seed=1,
                          content_grid=(0.45, 1 / 3, 9))


def test_failure_report_circulation(failure_report):
    circ = failure_report["circulation"]
    assert circ["value"] == pytest.approx(1.0, abs=1e-4)


def test_failure_report_tangential(failure_report):
    assert failure_report["tangential_curl"]["max"] <= 1e-3


def test_failure_report_content_divergent(failure_report):
    assert failure_report["content_profile"]["trend"] == "DIVERGENT"


def test_failure_report_boundary_mass(failure_report):
    bm = failure_report["boundary_mass"]
    assert bm["value"] == pytest.approx(bm["expected"], abs=1e-6)
    assert bm["expected"] == pytest.approx(2 * math.pi + 1.0, abs=1e-12)


def test_failure_report_areas_within_bounds(failure_report):
    assert all(row["within_bound"] for row in failure_report["strip_areas"])


def test_verify_failure_refuses_bad_params():
    from stokeslab.counterexample import verify_failure

    with pytest.raises(ParamsError) as err:
        verify_failure(Params(a=1 / 3, h=1 / 3, lam=0.5))
    assert "length" in str(err.value)


def test_stokes_undecided_when_refused_with_small_gap():
    # a closed form with zero circulation: both sides vanish, but the
    # divergent singular set blocks certification by decomposition
    from stokeslab import forms, integration

    S = build_surface_current(PARAMS)
    zero_form = forms.FormField(
        3, 1,
        evaluate=lambda p: forms.KCovector(3, 1, [0.0, 0.0, 0.0]),
        name="zero",
    )
    rep = integration.stokes_check(
        S, zero_form, S.model.singular_set(), tol=1e-6,
        surface_options={"max_strip": 3, "y_panels": 1, "x_panels": 2, "order": 4},
    )
    assert rep.decomposition["status"] == "refused"
    assert abs(rep.gap) <= 1e-6
    assert rep.verdict == integration.UNDECIDED


def test_flat_degenerate_stokes_holds():
    from stokeslab import integration
    from stokeslab.currents import SurfaceCurrent
    from stokeslab.dyadic import ExceptionalSet

    flat_model = SurfaceModel(Params(a=1 / 3, h=0.0, lam=0.25))
    S = SurfaceCurrent(flat_model, 0.0, flat_model.y_infinity, 1)
    om = flat_model.omega_field()
    rep = integration.stokes_check(S, om, ExceptionalSet.empty(), tol=1e-3)
    assert rep.verdict == integration.HOLDS
    assert abs(rep.gap) < 1e-3


def test_surface_mass_additivity_at_y3():
    from stokeslab.currents import mass_additivity_check

    S = build_surface_current(PARAMS)
    Sa = restrict(S, HalfSpace(1, PARAMS.y_k(3), below=True))
    rep = mass_additivity_check(S, Sa)
    assert rep["additive"]
    assert rep["gap"] <= 1e-6


def test_surface_slice_matches_section_length():
    from stokeslab.currents import slice_current

    S = build_surface_current(PARAMS)
    E = S.model.singular_set()
    for k in (1, 3, 5):
        # a radius interior to the k-th strip from the top
        r = 0.5 * ((PARAMS.y_infinity - PARAMS.y_k(k)) + (PARAMS.y_infinity - PARAMS.y_k(k + 1)))
        s = slice_current(S, E, r)
        L = S.model.section_length(PARAMS.y_infinity - s.radius)
        assert s.mass.value == pytest.approx(L.value, rel=1e-9)


def test_surface_slice_nudges_off_strip_junctions():
    from stokeslab.currents import slice_current

    S = build_surface_current(PARAMS)
    E = S.model.singular_set()
    r_junction = PARAMS.y_infinity - PARAMS.y_k(3)
    s = slice_current(S, E, r_junction)
    assert s.radius != r_junction
    assert abs(s.radius - r_junction) < 1e-6
    y = PARAMS.y_infinity - s.radius
    assert all(abs(y - yk) > 1e-9 for yk in S.model.strip_junctions())


def test_excision_succeeds_per_call_but_constant_grows():
    from stokeslab.cousin import excise
    from stokeslab.minkowski import neighborhood_mass

    S = build_surface_current(PARAMS)
    E = S.model.singular_set()
    bounds = []
    removed = []
    # strip-aligned radii r0 = y_inf * a^k, where the content grows cleanly
    for k in (1, 2, 3, 4):
        r0 = PARAMS.y_infinity * PARAMS.a ** k
        ball = neighborhood_mass(S, E, r0)
        T_eps, r, info = excise(S, E, eps=max(4.0 * ball.value, 1e-3), r0=r0)
        removed.append(info["removed_mass"])
        bounds.append((2.0 / r0) * ball.value)
    # removed mass vanishes with r0, but the slice-mass budget diverges:
    # the excision constant cannot stay bounded
    assert all(b < a for a, b in zip(removed, removed[1:]))
    assert all(b > a for a, b in zip(bounds, bounds[1:]))


def test_riemann_sum_of_tangential_density_vanishes_on_families():
    # the integrand <d omega, tangent plane> is ~0 at every tag, so Riemann
    # sums over genuine families of a truncated window stay at the floor
    from stokeslab import integration
    from stokeslab.cousin import Gauge, RegularityFn, SubadditiveFn, gauge_decompose
    from stokeslab.currents import SurfaceCurrent
    from stokeslab.dyadic import ExceptionalSet

    S = build_surface_current(PARAMS)
    window = SurfaceCurrent(S.model, 0.0, PARAMS.y_k(2), 1)
    eta = RegularityFn.from_callable(lambda p: 0.5 * S.model.max_regularity(float(p[1])))
    fam = gauge_decompose(window, ExceptionalSet.empty(), Gauge.constant(0.6),
                          eta, SubadditiveFn.mass(), 1e-2)
    omega = S.model.omega_field()

    def density(p):
        x, y = float(p[0]), float(p[1])
        k = int(S.model.strip_index(y))
        step = 5e-6 * PARAMS.lam ** k
        return S.model.tangential_curl_at(x, y, step)

    sigma = integration.riemann_sum(density, fam)
    assert abs(sigma) <= 1e-3 * window.mass().value


# -- cylindrical variant ------------------------------------------------------


@pytest.fixture(scope="module")
def cyl():
    return cylindrical_variant(PARAMS)


def test_cylindrical_requires_conditions():
    with pytest.raises(ParamsError):
        cylindrical_variant(Params(a=1 / 3, h=1 / 3, lam=0.5))


def test_cylindrical_boundary_circulation_is_one(cyl):
    assert cyl.boundary_circulation() == pytest.approx(1.0, rel=1e-6)


def test_cylindrical_form_decays_toward_the_origin(cyl):
    sups = [cyl.sup_omega_on_circle(k) for k in range(1, 8)]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    # decay rate ~ (lambda/h)^k = (3/4)^k per strip
    rate = PARAMS.lam / PARAMS.h
    assert all(s <= 3.0 * sups[0] * rate ** (k - 1) for k, s in enumerate(sups, start=1))


def test_cylindrical_annulus_areas_summable(cyl):
    areas = []
    for k in range(0, 10):
        area, bound = cyl.annulus_area(k)
        assert area <= bound + 1e-9
        areas.append(area)
    # geometric decay of the annulus areas
    assert areas[9] < areas[4] * 0.2
    p = PARAMS
    ratio = p.a * p.h / p.lam
    assert ratio < 1.0
