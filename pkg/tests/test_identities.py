"""Skew Cauchy identities, the bijective ledger and the HL operators."""

import pytest

from artifact.algebra import ONE, ZERO, scalar, var
from artifact.identities import (SignatureBasis, operator_matrix, verify_bijectivization,
                                 verify_commutation, verify_skew_cauchy)
from artifact.signatures import branching_coeff, diagram_branching, partitions, signatures

t = var("t")


def test_bb_trivial():
    rep = verify_skew_cauchy("BB", (0, 0), (0, 0), 0, 0)
    assert rep.equal and rep.lhs == ONE and rep.rhs == ONE


def test_aa_small():
    rep = verify_skew_cauchy("AA", (1, 0), (0,), 1, 1)
    assert rep.equal
    rep = verify_skew_cauchy("AA", (2, 0), (2,), 1, 1)
    assert rep.equal and rep.lhs == (1 - t) * (2 - t)


def test_bb_at_t_zero_counts():
    """At t = 0 every nonzero psi, phi is 1, so both sides count interlacing chains."""
    for mu in signatures(2, 0, 3):
        for nu in signatures(2, 0, 3):
            for k in range(3):
                for l in range(3):
                    rep = verify_skew_cauchy("BB", mu, nu, k, l, t=scalar(0))
                    assert rep.equal
                    assert rep.lhs.to_fraction().denominator == 1


def _conventional_sides(lam, mu, k, l):
    """x^k y^l of sum_kappa Q_{kappa/lam}(y) P_{kappa/mu}(x) and of
    (1 - t x y)/(1 - x y) sum_tau Q_{mu/tau}(y) P_{lam/tau}(x), Young diagrams."""
    lhs = ZERO
    if sum(lam) + l == sum(mu) + k:
        for kappa in partitions(sum(lam) + l):
            lhs = lhs + diagram_branching("phi", kappa, lam) * diagram_branching("psi", kappa, mu)
    rhs = ZERO
    for r in range(0, min(k, l) + 1):
        c = ONE if r == 0 else 1 - t
        size = sum(mu) - (l - r)
        if size < 0 or sum(lam) - size != k - r:
            continue
        for tau in partitions(size):
            rhs = rhs + c * diagram_branching("phi", mu, tau) * diagram_branching("psi", lam, tau)
    return lhs, rhs


@pytest.mark.parametrize("size", [0, 1, 2, 3])
def test_conventional_skew_cauchy(size):
    """The textbook single-variable identity, assembled from branching coefficients."""
    for lam in partitions(size):
        for mu in [m for s in range(0, 4) for m in partitions(s)]:
            for k in range(4):
                for l in range(4):
                    a, b = _conventional_sides(lam, mu, k, l)
                    assert a == b, (lam, mu, k, l)


def test_bijectivization_examples():
    # lhs counts checked (lam, r, rho) triples, rhs counts mismatches
    rep = verify_bijectivization((2, 0), (2,), 1, 1)
    assert rep.equal and rep.lhs == 4 and rep.rhs == 0
    # no terms at all: vacuous
    rep = verify_bijectivization((0, 0), (0,), 0, 3)
    assert rep.equal


def test_bijectivization_exhaustive():
    for N in (1, 2, 3):
        for mu in signatures(N, 0, 3):
            for nu in signatures(N - 1, 0, 3):
                for k in range(4):
                    for l in range(4):
                        assert verify_bijectivization(mu, nu, k, l).equal, (mu, nu, k, l)


def test_length_checks():
    with pytest.raises(ValueError):
        verify_skew_cauchy("BB", (1, 0), (1,), 1, 1)
    with pytest.raises(ValueError):
        verify_skew_cauchy("AA", (1, 0), (1, 0), 1, 1)


# ---------------------------------------------------------------------------
# operators


def test_operator_entries():
    basis = SignatureBasis(2, 4)
    A0 = operator_matrix("A", 0, basis)
    for s in basis.basis:
        assert A0.entry(s, s) == ONE
    assert sum(len(r) for r in A0.entries.values()) == len(basis)
    B1 = operator_matrix("B", 1, basis)
    # equal lengths: the two zero parts of (0,0) form one block, factor 1 - t^2
    assert B1.entry((0, 0), (1, 0)) == 1 - t ** 2 == branching_coeff("psi", (0, 0), (1, 0))
    # this value is the one the BB identity needs at mu = nu = (0,0), k = l = 1
    rep = verify_skew_cauchy("BB", (0, 0), (0, 0), 1, 1)
    assert rep.equal and rep.rhs == (1 - t ** 2) * (1 - t)
    # the mixed-length value is the conventional one
    assert branching_coeff("psi", (0,), (1, 0)) == ONE
    A1 = operator_matrix("A", 1, basis)
    assert A1.entry((1, 0), (0, 0)) == 1 - t


def test_basis_is_a_bijection():
    basis = SignatureBasis(3, 4)
    assert len(basis) == len(set(basis.basis))
    assert all(basis.index[s] == i for i, s in enumerate(basis.basis))


def test_commutation_small():
    rep = verify_commutation(SignatureBasis(2, 5), 2)
    assert rep.equal, rep.details[:3]


def test_mixed_coefficient_x1y1():
    basis = SignatureBasis(2, 6)
    A1, B1 = operator_matrix("A", 1, basis), operator_matrix("B", 1, basis)
    safe = basis.safe(1)
    for tgt in safe:
        for src in safe:
            assert (A1 @ B1).entry(tgt, src) == (B1 @ A1).entry(tgt, src)


def test_unsafe_request_rejected():
    with pytest.raises(ValueError):
        verify_commutation(SignatureBasis(2, 3), 2)


def test_safe_region_does_not_depend_on_part_bound():
    small, big = SignatureBasis(2, 5), SignatureBasis(2, 7)
    for kind in "AB":
        for d in range(3):
            a, b = operator_matrix(kind, d, small), operator_matrix(kind, d, big)
            pa, pb = [(k1 @ k2) for k1, k2 in [(operator_matrix("A", 1, small), a)]], \
                [(k1 @ k2) for k1, k2 in [(operator_matrix("A", 1, big), b)]]
            for tgt in small.safe(2):
                for src in small.safe(2):
                    assert a.entry(tgt, src) == b.entry(tgt, src)
                    assert pa[0].entry(tgt, src) == pb[0].entry(tgt, src)
