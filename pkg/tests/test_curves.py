"""Exact-arithmetic checks for polynomial curves, torsion, and type detection."""

import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from rlab.curves import (
    Curve,
    TypeTuple,
    class_membership,
    detect_type,
    dyadic_rescale,
    eval_derivative,
    monomial_curve,
    moment_curve,
    nondegenerate_tuple,
    poly_curve,
    rescale_curve,
    torsion_det,
    torsion_poly,
)
from rlab.errors import CapabilityError, MonomialFormError, NotFiniteTypeError


def test_moment_torsion_is_one_exactly():
    # the Wronskian of (t, t^2/2!, ..., t^d/d!) collapses to the constant 1
    for d in range(2, 6):
        poly = torsion_poly(moment_curve(d))
        assert poly == (Fraction(1),), f"d={d}: {poly}"


def test_moment_torsion_float_grid():
    rng = np.random.default_rng(11)
    for d in (2, 3, 4):
        ts = rng.uniform(-2.0, 2.0, size=200)
        dets = torsion_det(moment_curve(d), ts)
        assert np.max(np.abs(dets - 1.0)) < 1e-9


def test_torsion_poly_matches_sympy():
    """Random integer-coefficient curve against a symbolic determinant."""
    rng = np.random.default_rng(5)
    t = sympy.Symbol("t")
    for _ in range(5):
        table = [[int(c) for c in rng.integers(-3, 4, size=5)] for _ in range(3)]
        # make sure no component is identically zero
        for row in table:
            if all(c == 0 for c in row):
                row[1] = 1
        curve = poly_curve(table)
        ours = torsion_poly(curve)
        exprs = [sum(c * t**j for j, c in enumerate(row)) for row in table]
        mat = sympy.Matrix(
            [[sympy.diff(e, t, k) for e in exprs] for k in range(1, 4)]
        ).T
        det = sympy.Poly(mat.det(), t)
        theirs = tuple(Fraction(int(c)) for c in reversed(det.all_coeffs()))
        # strip trailing zeros the same way poly_trim does
        while len(theirs) > 1 and theirs[-1] == 0:
            theirs = theirs[:-1]
        assert ours == theirs


def test_eval_derivative_frozen_values():
    mc = moment_curve(2)
    assert np.allclose(eval_derivative(mc, 1.0, 1), [1.0, 1.0])
    assert np.allclose(eval_derivative(mc, 0.3, 2), [0.0, 1.0])
    assert np.allclose(eval_derivative(mc, 0.5, 0), [0.5, 0.125])
    # order above the degree is identically zero
    assert np.allclose(eval_derivative(moment_curve(3), 0.7, 4), 0.0)


def test_eval_many_matches_exact():
    curve = poly_curve([[1, -2, 0, 3], [0, 1, 5]])
    rng = np.random.default_rng(2)
    ts = [Fraction(int(n), 7) for n in rng.integers(-20, 20, size=12)]
    for order in range(4):
        approx = curve.eval_many(np.array([float(t) for t in ts]), order)
        exact = np.array(
            [[float(v) for v in curve.eval_exact(t, order)] for t in ts]
        )
        assert np.max(np.abs(approx - exact)) < 1e-12


def test_derivative_order_cap():
    mc = moment_curve(2)
    with pytest.raises(CapabilityError):
        mc.eval_many(np.array([0.1]), mc.max_derivative_order + 1)


def test_detect_type_nondegenerate():
    for d in (2, 3, 4):
        mc = moment_curve(d)
        for t in (0.0, 0.7):
            assert tuple(detect_type(mc, t)) == tuple(range(1, d + 1))


def test_detect_type_degenerate_point():
    cubic = monomial_curve([1, 3])
    assert tuple(detect_type(cubic, 0.0)) == (1, 3)
    assert tuple(detect_type(cubic, 0.5)) == (1, 2)
    quartic = monomial_curve([1, 2, 4])
    assert tuple(detect_type(quartic, 0.0)) == (1, 2, 4)
    assert tuple(detect_type(quartic, 0.25)) == (1, 2, 3)


def test_detect_type_flat_curve_raises():
    # components proportional to each other never span the plane
    flat = poly_curve([[0, 1], [0, 2]])
    with pytest.raises(NotFiniteTypeError):
        detect_type(flat, 0.3)


def test_monomial_components():
    curve = monomial_curve([1, 2, 4])
    assert curve.coeffs[0] == (Fraction(0), Fraction(1))
    assert curve.coeffs[1] == (Fraction(0), Fraction(0), Fraction(1, 2))
    assert curve.coeffs[2] == (
        Fraction(0),
        Fraction(0),
        Fraction(0),
        Fraction(0),
        Fraction(1, 24),
    )


def test_rescale_moment_curve_is_fixed_point():
    """The Taylor-frame zoom maps the moment curve to itself exactly."""
    rng = np.random.default_rng(7)
    for d in (2, 3, 4):
        mc = moment_curve(d)
        for _ in range(4):
            t0 = Fraction(int(rng.integers(-8, 9)), 16)
            u = Fraction(int(rng.integers(1, 9)), 8)
            out = rescale_curve(mc, t0, u)
            assert out.coeffs == mc.coeffs, (d, t0, u)


def test_rescale_rejects_zero_scale():
    with pytest.raises(ValueError):
        rescale_curve(moment_curve(2), 0.0, 0)


def test_dyadic_rescale_monomials_invariant():
    a = TypeTuple((1, 2, 4))
    curve = monomial_curve([1, 2, 4])
    for ell in (0, 1, 3):
        out = dyadic_rescale(curve, a, ell)
        assert out.coeffs == curve.coeffs
        assert out.domain == (0.0, 2.0**ell)
    with pytest.raises(ValueError):
        dyadic_rescale(curve, a, -1)


def test_dyadic_rescale_general_coefficients():
    # component i picks up 2^{ell(a_i - j)} on the t^j coefficient
    curve = poly_curve([[0, 1, 1], [0, 0, 1]])
    out = dyadic_rescale(curve, TypeTuple((1, 2)), 2)
    assert out.coeffs[0] == (Fraction(0), Fraction(1), Fraction(1, 4))
    assert out.coeffs[1] == (Fraction(0), Fraction(0), Fraction(1))


def test_class_membership():
    ok, dev = class_membership(moment_curve(3), nondegenerate_tuple(3), 1e-12)
    assert ok and dev == 0.0
    # t^2/2 * (1 + t/2) drifts away from the pure monomial by ~|t|/4 in phi'
    bent = poly_curve([[0, 1], [0, 0, Fraction(1, 2), Fraction(1, 4)]])
    ok, dev = class_membership(bent, TypeTuple((1, 2)), 1e-3)
    assert not ok and dev > 0.2
    with pytest.raises(MonomialFormError):
        class_membership(poly_curve([[0, 1], [0, 1, 1]]), TypeTuple((1, 2)), 1.0)


def test_type_tuple_validation():
    with pytest.raises(ValueError):
        TypeTuple((2, 1))
    with pytest.raises(ValueError):
        TypeTuple((0, 1))
    with pytest.raises(ValueError):
        TypeTuple(())
    a = TypeTuple((1, 2, 4))
    assert a.norm1 == 7 and len(a) == 3 and a[-1] == 4
    assert tuple(nondegenerate_tuple(4)) == (1, 2, 3, 4)


def test_curve_validation():
    with pytest.raises(ValueError):
        Curve(())
    named = moment_curve(3)
    assert named.name == "moment(3)"
    assert named.dim == 3 and named.degree == 3
