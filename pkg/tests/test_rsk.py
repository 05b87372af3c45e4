"""Randomized Hall-Littlewood RSK: grids, weights, sampler, variants."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.algebra import ONE, ZERO, scalar, var
from artifact.rsk import (CellStream, TransitionQuery, box_weight, build_admissible_grid,
                          check_flip, extended_weights, forward_distribution,
                          one_coordinate_distribution, one_coordinate_weight, padding_depth,
                          sample_many,
                          sample_rsk, transition_distribution, transition_weight,
                          valid_triples)
from artifact.signatures import Signature, interlaces

t = var("t")
EXAMPLE = TransitionQuery.of((3, 3, 1, 0), (5, 3, 2, 1), (5, 3, 2, 0), (7, 3, 2, 2))


def push_block_rule(lam, mu, nu):
    """Deterministic t = 0 growth: each particle keeps max(mu_i, nu_i) plus its
    surplus min(mu_i, nu_i) - lam_i, never passing the old position lam_{i-1}
    of the particle above; any overflow is handed upward."""
    N = len(lam)
    rho, over = [0] * N, 0
    for i in range(N - 1, -1, -1):
        hi = max(mu[i], nu[i])
        want = hi + min(mu[i], nu[i]) - lam[i] + over
        cap = max(hi, lam[i - 1]) if i > 0 else want
        rho[i] = min(want, cap)
        over = want - rho[i]
    return Signature(rho)


# ---------------------------------------------------------------------------
# the reference 4 x 4 example


def test_example_weight():
    assert transition_weight(EXAMPLE) == t * (1 - t) / (1 - t ** 2)


def test_example_grid_labels():
    g = build_admissible_grid(EXAMPLE)
    assert (g.m, g.n) == (3, 4)
    rows = [[1, 3, 4], [1, 3, 4], [1, 3, 4], [1, 4, 5], [1, 5, 6]]
    cols = [[0, 0, 0, 0], [1, 1, 1, 1], [3, 3, 4, 5], [4, 4, 5, 6]]
    assert [[g.h[i][j] for i in range(3)] for j in range(5)] == rows
    assert [[g.v[i][j] for i in range(4)] for j in range(4)] == cols
    assert g.values[1][2] == (3, 3, 2, 2)
    assert g.values[3][3] == (6, 3, 2, 2)
    assert g.rho == (7, 3, 2, 2)


def test_example_box_weights():
    g = build_admissible_grid(EXAMPLE)
    assert box_weight(g, 0, 1) == t
    assert box_weight(g, 1, 2) == (1 - t) / (1 - t ** 2)
    for i, j in [(2, 2), (1, 3), (2, 3)]:
        assert box_weight(g, i, j) == ONE
    nontrivial = {(0, 1), (1, 2), (2, 2), (1, 3), (2, 3)}
    for i in range(3):
        for j in range(4):
            if (i, j) not in nontrivial:
                assert g.box_class(i, j).kind == "trivial"
                assert box_weight(g, i, j) == ONE


def test_empty_and_unbalanced_grids():
    lam = Signature((2, 1))
    assert build_admissible_grid(TransitionQuery(lam, lam, lam, lam)) is not None
    assert transition_weight(TransitionQuery(lam, lam, lam, lam)) == ONE
    bad = TransitionQuery.of((0, 0), (1, 0), (1, 0), (3, 0))
    assert build_admissible_grid(bad) is None
    assert transition_weight(bad) == ZERO


def test_forced_when_one_input_is_static():
    lam = Signature((2, 0))
    for mu in [(2, 0), (3, 1), (4, 2)]:
        d = transition_distribution(lam, mu, lam)
        assert d == {Signature(mu): ONE}


# ---------------------------------------------------------------------------
# t = 0


@pytest.mark.parametrize("N", [1, 2, 3])
def test_t_zero_is_deterministic_push_block(N):
    for lam, mu, nu in valid_triples(N, 0, 3):
        d = transition_distribution(lam, mu, nu, t=scalar(0))
        assert d == {push_block_rule(lam, mu, nu): ONE}, (lam, mu, nu)


def test_sampler_at_t_zero():
    rng = CellStream(3)
    for lam, mu, nu in list(valid_triples(2, 0, 3))[:40]:
        assert sample_rsk(lam, mu, nu, 0, rng) == push_block_rule(lam, mu, nu)


def test_sampler_static_mu():
    lam = Signature((1, 0))
    assert sample_rsk(lam, lam, (3, 1), Fraction(1, 2), CellStream(0)) == (3, 1)


# ---------------------------------------------------------------------------
# properties over random triples


def triples(max_len=3, hi=3):
    pool = [tr for N in range(1, max_len + 1) for tr in valid_triples(N, 0, hi)]
    return st.sampled_from(pool)


@given(triples())
@settings(max_examples=80, deadline=None)
def test_weights_nonnegative_and_supported(tr):
    lam, mu, nu = tr
    d = transition_distribution(lam, mu, nu)
    assert sum(d.values(), ZERO) == ONE
    for rho, w in d.items():
        assert interlaces(mu, rho) and interlaces(nu, rho)
        assert sum(rho) - sum(mu) == sum(nu) - sum(lam)
        for tv in (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            assert w.subs({"t": tv}).to_fraction() >= 0


@given(triples(max_len=3, hi=4))
@settings(max_examples=60, deadline=None)
def test_one_coordinate_matches_grid(tr):
    lam, mu, nu = tr
    assert one_coordinate_distribution(lam, mu, nu) == transition_distribution(lam, mu, nu)


def test_one_coordinate_example():
    assert one_coordinate_weight(EXAMPLE) == t * (1 - t) / (1 - t ** 2)
    lam = Signature((1, 0))
    assert one_coordinate_weight(TransitionQuery(lam, lam, lam, lam)) == ONE


def test_flip_example_and_trivial():
    assert check_flip(EXAMPLE).holds
    lam = Signature((2, 1, 1))
    assert check_flip(TransitionQuery(lam, lam, lam, lam)).lhs == ONE


# ---------------------------------------------------------------------------
# input variant


def test_input_variant_trivial_and_single_particle():
    mu = Signature((2, 1))
    lam = Signature((1,))
    q = TransitionQuery(lam, mu, lam, mu, 0)
    assert extended_weights("forward", q) == ONE
    assert forward_distribution((), (0,), (), 1) == {Signature((1,)): ONE}


@given(triples(max_len=3, hi=2), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_padding_depth_does_not_matter(tr, r):
    lam, mu, nu = tr
    lam, nu = Signature(lam[1:]), Signature(nu[1:])
    if not (interlaces(lam, mu) and interlaces(lam, nu)):
        return
    for rho in forward_distribution(lam, mu, nu, r):
        q = TransitionQuery(lam, mu, nu, rho, r)
        base = extended_weights("forward", q)
        assert extended_weights("forward", q, V=None) == base
        assert extended_weights("forward", q, V=padding_depth(q) + 7) == base
        assert extended_weights("inverse", q, V=padding_depth(q) + 7) == \
            extended_weights("inverse", q)


# ---------------------------------------------------------------------------
# sampler law


def test_sampler_matches_exact_law():
    lam, mu, nu = EXAMPLE.lam, EXAMPLE.mu, EXAMPLE.nu
    runs = 10 ** 5
    counts = sample_many(lam, mu, nu, Fraction(1, 2), runs, seed=11)
    exact = {k: float(v.subs({"t": Fraction(1, 2)}).to_fraction())
             for k, v in transition_distribution(lam, mu, nu).items()}
    assert set(counts) <= set(exact)
    for rho, p in exact.items():
        freq = counts.get(rho, 0) / runs
        se = np.sqrt(p * (1 - p) / runs)
        assert abs(freq - p) <= 4 * se + 1e-12, (rho, freq, p)


def test_sampler_is_reproducible():
    a = sample_many((1, 0), (2, 1), (3, 0), Fraction(1, 3), 500, seed=5)
    b = sample_many((1, 0), (2, 1), (3, 0), Fraction(1, 3), 500, seed=5)
    assert a == b
