"""Exact scalars, truncated Laurent blocks and numeric coefficient extraction."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.algebra import (DegreeWindow, DivergenceError, FactorSpec, LaurentBlock,
                              coefficient_of, expand_factor, geometric, parse_scalar,
                              polynomial, scalar, stabilized_coefficient, var)

t, q, x, y = (var(n) for n in ("t", "q", "x1", "y1"))
T, X = sympy.symbols("t x1")


# polynomials in t and x1 with small integer coefficients
small_poly = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-3, 3)),
                      min_size=1, max_size=4)


def build(terms):
    out = scalar(0)
    for a, b, c in terms:
        out = out + c * t ** a * x ** b
    return out


def build_sympy(terms):
    return sum((c * T ** a * X ** b for a, b, c in terms), sympy.Integer(0))


@given(small_poly, small_poly, small_poly)
@settings(max_examples=60, deadline=None)
def test_ring_laws(a, b, c):
    A, B, C = build(a), build(b), build(c)
    assert (A + B) + C == A + (B + C)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert A - A == 0


@given(small_poly, small_poly)
@settings(max_examples=40, deadline=None)
def test_quotients_agree_with_sympy(a, b):
    A, B = build(a), build(b)
    if B.is_zero():
        return
    ours = (A / B + A * B).to_sympy()
    ref = build_sympy(a) / build_sympy(b) + build_sympy(a) * build_sympy(b)
    assert sympy.simplify(ours - ref) == 0


def test_canonical_form_is_reduced():
    f = (t ** 2 - 1) / (t - 1)
    assert f == t + 1
    assert str(f) == str(t + 1)
    assert str((1 - t) / (t - 1)) == "-1"


def test_parse_and_evaluate():
    assert parse_scalar("t*(1-t)/(1-t^2)") == t / (1 + t)
    assert (t / (1 + t)).subs({"t": Fraction(1, 2)}).to_fraction() == Fraction(1, 3)


# ---------------------------------------------------------------------------
# expansion convention


def test_geometric_positive():
    win = DegreeWindow.of(w=(0, 2))
    blk = expand_factor(geometric("w", x), win)
    assert blk == LaurentBlock(win, {(0,): scalar(1), (1,): x, (2,): x ** 2})


def test_constant_factor():
    win = DegreeWindow.of(w=(-3, 3))
    blk = expand_factor(polynomial("w", {0: t}), win)
    assert blk == LaurentBlock(win, {(0,): t})


def test_ratio_by_long_division():
    win = DegreeWindow.of(w=(0, 2))
    blk = expand_factor(geometric("w", x, numer=(1, -t * x)), win)
    assert blk.coefficient((0,)) == 1
    assert blk.coefficient((1,)) == (1 - t) * x
    assert blk.coefficient((2,)) == (1 - t) * x ** 2


def test_coefficient_of_small_cases():
    win = DegreeWindow.of(w=(0, 3))
    one_plus = expand_factor(polynomial("w", {0: 1, 1: 1}), win)
    assert coefficient_of([expand_factor(polynomial("w", {0: 1, 1: 3}), win)], (1,)) == 3
    assert coefficient_of([one_plus, one_plus], (1,)) == 2


def test_two_sided_product():
    # 1/(1 - w x) * 1/(1 - w^-1 y / q): the w^0 coefficient is sum (xy/q)^n
    win = DegreeWindow.of(w=(-3, 3))
    a = expand_factor(geometric("w", x), win)
    b = expand_factor(geometric("w", y / q, negative=True), win)
    c0 = coefficient_of([a, b], (0,))
    # the x^1 y^1 part of the w^0 coefficient
    part = c0.subs({"x1": 0}) * 0
    coeff = (c0 - c0.subs({"x1": 0})).derivative("x1").subs({"x1": 0})
    coeff = (coeff - coeff.subs({"y1": 0})).derivative("y1").subs({"y1": 0})
    assert part == 0
    assert coeff == 1 / q


@given(st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=20),
       st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=5),
       st.integers(0, 6))
@settings(max_examples=50, deadline=None)
def test_partial_fractions(a, c, n):
    """(1 + c w)/(1 - a w) has coefficient a^n + c a^(n-1) for n >= 1."""
    win = DegreeWindow.of(w=(0, 6))
    blk = expand_factor(geometric("w", a, numer=(1, c)), win)
    expected = Fraction(1) if n == 0 else a ** n + c * a ** (n - 1)
    assert blk.coefficient((n,)).to_fraction() == expected


def test_window_overflow():
    win = DegreeWindow.of(w=(0, 2))
    blk = expand_factor(geometric("w", x), win)
    with pytest.raises(ValueError):
        coefficient_of([blk], (5,))


def test_power_of_ratio_directions():
    # ((1 + w)/(2 + w))^1 around 0 and around infinity
    win = DegreeWindow.of(w=(-4, 4))
    pos = expand_factor(FactorSpec("power-of-ratio", "w", numer=(1, 1), denom=(2, 1)), win)
    neg = expand_factor(FactorSpec("power-of-ratio", "w", numer=(1, 1), denom=(2, 1),
                                   direction="negative"), win)
    assert pos.coefficient((0,)).to_fraction() == Fraction(1, 2)
    assert pos.coefficient((1,)).to_fraction() == Fraction(1, 4)
    assert neg.coefficient((0,)).to_fraction() == 1
    assert neg.coefficient((-1,)).to_fraction() == -1


# ---------------------------------------------------------------------------
# stabilized numeric extraction


def test_stabilized_two_sided_geometric():
    # sum_n (1/2)^n (1/5)^n = 1/(1 - 1/10)
    specs = [geometric("w", Fraction(1, 2)), geometric("w", Fraction(1, 5), negative=True)]
    res = stabilized_coefficient(specs, (0,), Fraction(1, 10 ** 12))
    assert abs(res.value - Fraction(10, 9)) <= res.bound
    assert res.bound <= Fraction(1, 10 ** 12)


def test_stabilized_empty():
    res = stabilized_coefficient([], (0,), Fraction(1, 10 ** 12))
    assert res.value == 1 and res.bound == 0


def test_stabilized_divergence():
    with pytest.raises(DivergenceError):
        stabilized_coefficient([geometric("w", Fraction(3, 2))], (0,), Fraction(1, 10 ** 6))


@given(st.fractions(min_value=Fraction(1, 10), max_value=Fraction(4, 5), max_denominator=10),
       st.fractions(min_value=Fraction(1, 10), max_value=Fraction(4, 5), max_denominator=10),
       st.integers(-2, 2))
@settings(max_examples=15, deadline=None)
def test_stabilized_bound_holds_at_higher_order(a, b, k):
    specs = [geometric("w", a), geometric("w", b, negative=True)]
    tol = Fraction(1, 10 ** 8)
    res = stabilized_coefficient(specs, (k,), tol, start=8)
    fine = stabilized_coefficient(specs, (k,), tol, start=4 * res.order)
    assert abs(res.value - fine.value) <= res.bound
