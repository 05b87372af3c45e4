"""Signatures, branching coefficients and skew Hall-Littlewood polynomials."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.algebra import ONE, ZERO, scalar, var
from artifact.macdonald import macdonald_p
from artifact.signatures import (Signature, branching_coeff, column, column_counts,
                                 from_column_counts, hl_polynomial, interlaces,
                                 lower_neighbours, oracle_poly, pad, partitions,
                                 skew_hl, skew_hl_scalar, transpose, x_names)

t = var("t")


def test_signature_must_be_non_increasing():
    with pytest.raises(ValueError):
        Signature((1, 2))
    assert Signature((2, -1, -1)) == (2, -1, -1)


def test_interlacing_examples():
    assert interlaces((1,), (2, 1))
    assert not interlaces((2,), (1, 0))
    assert interlaces((3, 1, 0), (3, 3, 1, 0))


def test_branching_examples():
    lam = Signature((2, 1, 0))
    assert branching_coeff("psi", lam, lam) == ONE
    assert branching_coeff("phi", (1,), (1, 1)) == 1 - t ** 2
    assert branching_coeff("psi", (1,), (2, 1)) == ONE


def test_skew_examples():
    assert skew_hl_scalar("P", (1, 1), (1,), ["x1"]) == var("x1")
    assert skew_hl_scalar("Q", (1,), (), ["x1"]) == (1 - t) * var("x1")
    assert skew_hl("P", (2, 0), (2,), 1).coefficient((0,)) == ONE


def test_oracle_examples():
    x1, x2 = var("x1"), var("x2")
    assert oracle_poly("hl-symmetrization", (1, 1), 2) == x1 * x2
    assert oracle_poly("hl-symmetrization", (2,), 2) == x1 ** 2 + x2 ** 2 + (1 - t) * x1 * x2
    assert oracle_poly("macdonald-gram-schmidt", (1,), 3) == x1 + x2 + var("x3")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_branching_formula_matches_symmetrization(n):
    names = x_names(n)
    for size in range(0, 6):
        for lam in partitions(size):
            if len(lam) > n:
                continue
            ours = hl_polynomial("P", lam, names)
            ref = oracle_poly("hl-symmetrization", lam, n)
            assert ours == ref, lam


@pytest.mark.parametrize("n", [2, 3])
def test_branching_consistency(n):
    """P_mu(x1..xn) = sum_lam P_{mu/lam}(xn) P_lam(x1..x_{n-1})."""
    names = x_names(n)
    for size in range(0, 5):
        for mu in partitions(size):
            if len(mu) > n:
                continue
            top = pad(mu, n)
            total = ZERO
            for lam in lower_neighbours(top, n - 1):
                if min(lam, default=0) < 0:
                    continue
                total = total + skew_hl_scalar("P", top, lam, [names[-1]]) * \
                    hl_polynomial("P", lam, names[:-1])
            assert total == hl_polynomial("P", mu, names), mu


def test_macdonald_at_q_zero_is_hall_littlewood():
    names = x_names(2)
    for lam in [(1,), (2,), (1, 1), (2, 1), (3,)]:
        assert macdonald_p(lam, names, q=scalar(0)) == oracle_poly("hl-symmetrization", lam, 2)


def test_macdonald_at_q_equal_t_is_schur():
    # s_(2,1)(x1, x2) = x1^2 x2 + x1 x2^2
    x1, x2 = var("x1"), var("x2")
    q = Fraction(1, 3)
    assert macdonald_p((2, 1), ["x1", "x2"], q=scalar(q), t=scalar(q)) == x1 ** 2 * x2 + x1 * x2 ** 2


sig_strategy = st.lists(st.integers(-3, 4), min_size=0, max_size=4).map(
    lambda xs: Signature(sorted(xs, reverse=True)))


@given(sig_strategy, sig_strategy)
@settings(max_examples=200, deadline=None)
def test_branching_zero_exactly_off_interlacing(lo, up):
    if len(up) not in (len(lo), len(lo) + 1):
        return
    for kind in ("psi", "phi"):
        c = branching_coeff(kind, lo, up)
        assert c.is_zero() == (not interlaces(lo, up))


@given(st.lists(st.integers(0, 6), min_size=0, max_size=5))
@settings(max_examples=200, deadline=None)
def test_column_counts_round_trip(parts):
    lam = Signature(sorted(parts, reverse=True))
    counts = column_counts(lam)
    assert from_column_counts(counts, len(lam)) == lam
    assert [column(lam, k) for k in range(1, 8)] == \
        [sum(1 for p in lam if p >= k) for k in range(1, 8)]


@given(st.lists(st.integers(0, 5), min_size=0, max_size=5))
@settings(max_examples=100, deadline=None)
def test_transpose_is_an_involution(parts):
    lam = Signature(sorted([p for p in parts if p], reverse=True))
    assert transpose(transpose(lam)) == lam
    assert sum(transpose(lam)) == sum(lam)
