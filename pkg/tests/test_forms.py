import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokeslab import forms
from stokeslab.forms import (
    DegreeError,
    DomainError,
    FormField,
    KCovector,
    KVector,
    interior_product,
    numeric_differential,
    pair,
    wedge,
)


def test_pairing_dual_basis():
    xi = KCovector.basis(2, (0, 1))
    assert pair(xi, KVector.basis(2, (0, 1))) == 1.0


def test_pairing_antisymmetry():
    xi = KCovector.basis(2, (0, 1))
    e21 = wedge(KVector.basis(2, (1,)), KVector.basis(2, (0,)))
    assert pair(xi, e21) == -1.0


def test_pairing_linearity():
    xi = KCovector(2, 1, [2.0, 3.0])
    assert pair(xi, KVector.basis(2, (0,))) == 2.0


def test_pairing_mismatch_raises():
    xi = KCovector.basis(2, (0,))
    with pytest.raises(DegreeError):
        pair(xi, KVector.basis(3, (0,)))
    with pytest.raises(DegreeError):
        pair(xi, KVector.basis(2, (0, 1)))


def test_interior_product_basis_contraction():
    e12 = KCovector.basis(2, (0, 1))
    assert np.allclose(interior_product(KVector.basis(2, (0,)), e12).coeffs, [0.0, 1.0])
    assert np.allclose(interior_product(KVector.basis(2, (1,)), e12).coeffs, [-1.0, 0.0])


def test_interior_product_missing_factor():
    e12 = KCovector.basis(3, (0, 1))
    out = interior_product(KVector.basis(3, (2,)), e12)
    assert np.allclose(out.coeffs, 0.0)


def test_interior_product_degree_zero_raises():
    with pytest.raises(DegreeError):
        interior_product(KVector.basis(2, (0,)), KCovector(2, 0, [1.0]))


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_contraction_adjoint_to_wedge(seed):
    # <v -| xi, w> = <xi, v ^ w> for degree-1 v, w and degree-2 xi in R^3
    rng = np.random.default_rng(seed)
    v = KVector(3, 1, rng.normal(size=3))
    w = KVector(3, 1, rng.normal(size=3))
    xi = KCovector(3, 2, rng.normal(size=3))
    lhs = pair(interior_product(v, xi), w)
    rhs = pair(xi, wedge(v, w))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=200, deadline=None)
def test_wedge_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    v = KVector(3, 1, rng.normal(size=3))
    w = KVector(3, 1, rng.normal(size=3))
    assert np.allclose(wedge(v, w).coeffs, -wedge(w, v).coeffs)


def test_norm_is_euclidean():
    v = KVector(3, 2, [3.0, 0.0, 4.0])
    assert v.norm() == 5.0


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=200, deadline=None)
def test_pairing_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    xi = KCovector(3, 2, rng.normal(size=3))
    v = KVector(3, 2, rng.normal(size=3))
    assert abs(pair(xi, v)) <= xi.norm() * v.norm() + 1e-12


def _x_dy():
    return FormField(
        2, 1,
        evaluate=lambda p: KCovector(2, 1, [0.0, p[0]]),
        differential=lambda p: KCovector(2, 2, [1.0]),
    )


def test_numeric_differential_linear_exact():
    d = numeric_differential(_x_dy(), np.array([0.3, 0.7]), 1e-4)
    assert abs(d.coeffs[0] - 1.0) <= 1e-8


def test_numeric_differential_constant_is_zero():
    om = FormField(2, 1, evaluate=lambda p: KCovector(2, 1, [2.0, -1.0]))
    d = numeric_differential(om, np.array([0.1, 0.2]), 1e-5)
    assert np.allclose(d.coeffs, 0.0)


def _euler_contraction_oracle(xi_coeffs):
    """d((y - x0) -| xi) for constant 2-covector xi, by direct expansion.

    Writing xi = sum c_ij e*_i ^ e*_j, the contraction is
    sum c_ij [(y_i - a_i) e*_j - (y_j - a_j) e*_i] and applying d term by
    term gives  sum c_ij [e*_i ^ e*_j - e*_j ^ e*_i] = 2 xi.
    """
    return 2.0 * np.asarray(xi_coeffs)


def test_numeric_differential_of_contracted_translation_field():
    xi = KCovector(3, 2, [1.0, -2.0, 0.5])
    x0 = np.array([0.2, -0.1, 0.4])
    om = FormField(
        3, 1,
        evaluate=lambda p: interior_product(KVector.from_vector(p - x0), xi),
    )
    d = numeric_differential(om, np.array([0.5, 0.3, 0.9]), 1e-5)
    assert np.allclose(d.coeffs, _euler_contraction_oracle(xi.coeffs), atol=1e-8)


def test_numeric_differential_degree_one_contraction():
    # for a degree-1 constant covector the same construction returns xi itself
    xi = KCovector(2, 1, [1.5, -0.7])
    x0 = np.array([0.1, 0.9])

    def ev(p):
        val = float(np.dot(xi.coeffs, p - x0))
        return KCovector(2, 0, [val])

    om = FormField(2, 0, evaluate=ev)
    d = numeric_differential(om, np.array([0.4, 0.2]), 1e-5)
    assert np.allclose(d.coeffs, xi.coeffs, atol=1e-9)


def test_numeric_differential_respects_exceptional_set():
    from stokeslab.dyadic import ExceptionalSet

    om = FormField(
        2, 1,
        evaluate=lambda p: KCovector(2, 1, [0.0, p[0]]),
        exceptional_set=ExceptionalSet.points([(0.5, 0.5)]),
    )
    with pytest.raises(DomainError):
        numeric_differential(om, np.array([0.5, 0.5 + 1e-7]), 1e-5)


def test_analytic_vs_numeric_on_random_points():
    # omega = yz dx + x^2 dy + xy dz; d omega = (2x - z) dxdy + 0 dxdz + x dydz
    om = FormField(
        3, 1,
        evaluate=lambda p: KCovector(3, 1, [p[1] * p[2], p[0] ** 2, p[0] * p[1]]),
        differential=lambda p: KCovector(3, 2, [2 * p[0] - p[2], 0.0, p[0]]),
    )
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.uniform(-1, 1, 3)
        analytic = om.differential(x)
        numeric = numeric_differential(om, x, 1e-5)
        bound = 1e-6 * (1.0 + float(np.linalg.norm(analytic.coeffs)))
        assert float(np.abs(analytic.coeffs - numeric.coeffs).max()) <= bound
