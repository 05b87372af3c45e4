"""HL-RSK field: inputs, sampler, process weights and exact path laws."""

import math
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from artifact.algebra import ONE, ZERO, var
from artifact.field import (DownRightPath, FieldParams, hl_process_weight, input_law,
                            path_marginal_probability, sample_field)
from artifact.signatures import Signature, interlaces

t, ab = var("t"), var("ab")


def test_input_law_zero_mass():
    law = input_law(ab, ONE, t)
    assert law.mass(0) == (1 - ab) / (1 - t * ab)
    assert law.mass(2) == (1 - t) * ab ** 2 * (1 - ab) / (1 - t * ab)


def test_input_law_sums_to_one():
    # closed form of the geometric tail: sum_{d>=1} (ab)^d = ab / (1 - ab)
    law = input_law(ab, ONE, t)
    assert law.mass(0) + (1 - t) * ab / (1 - ab) * (1 - ab) / (1 - t * ab) == ONE
    for d in range(4):
        assert sum((law.mass(e) for e in range(d + 1)), ZERO) + law.tail(d) == ONE


def test_input_law_small_ab_limit():
    for k in (10, 100, 1000):
        m0 = input_law(F(1, k), F(1, k), F(1, 2)).mass(0)
        assert abs(1 - m0) < F(2, k * k)


@given(st.integers(1, 99), st.integers(0, 99))
@settings(max_examples=50, deadline=None)
def test_input_law_numeric_sums(k, m):
    law = input_law(F(k, 100), F(1), F(m, 100))
    assert sum(law.mass(d) for d in range(6)) + law.tail(5) == 1


def test_input_law_rejects_bad_params():
    with pytest.raises(ValueError):
        input_law(F(2), F(1), F(1, 2))


def test_forced_zero_inputs():
    p = FieldParams([F(1, 2)] * 2, [F(1, 2)] * 2, F(1, 3), (2, 2), seed=5)
    s = sample_field(p, forced_inputs={c: 0 for c in product((1, 2), (1, 2))})
    for i, j in product((1, 2), (1, 2)):
        assert s[i, j] == Signature((0,) * j)


def test_single_cell_is_the_input():
    for seed in range(30):
        s = sample_field(FieldParams([F(1, 2)], [F(3, 5)], F(1, 4), (1, 1), seed=seed))
        assert s[1, 1] == Signature((s.inputs[(1, 1)],))


def test_states_interlace_and_reproduce():
    p = FieldParams([F(1, 2), F(2, 3), F(1, 3)], [F(3, 4), F(1, 2), F(1, 2)], F(1, 2), (3, 3), seed=11)
    a, b = sample_field(p), sample_field(p)
    assert a.to_json() == b.to_json()
    for i in range(4):
        for j in range(4):
            assert len(a[i, j]) == j
            if i < 3:
                assert interlaces(a[i, j], a[i + 1, j])
            if j < 3:
                assert interlaces(a[i, j], a[i, j + 1])


def test_empirical_single_cell_law():
    runs, tv = 10 ** 5, F(1, 3)
    law = input_law(F(1, 2), F(1, 2), tv)
    counts: dict = {}
    for seed in range(runs):
        d = sample_field(FieldParams([F(1, 2)], [F(1, 2)], tv, (1, 1), seed=seed))[1, 1][0]
        counts[d] = counts.get(d, 0) + 1
    for d in range(4):
        p = float(law.mass(d))
        se = math.sqrt(p * (1 - p) / runs)
        assert abs(counts.get(d, 0) / runs - p) < 4 * se, d


# ---------------------------------------------------------------------------
# process weights


def test_trivial_path_weight():
    p = FieldParams.symbolic((2, 2))
    path = DownRightPath((2, 1), (1, 2))
    w = hl_process_weight(path, [(0,), (0,), (0, 0)], p)
    norm = ONE
    for i, j in [(1, 1), (2, 1), (1, 2)]:
        x = var(f"a{i}") * var(f"b{j}")
        norm = norm * (1 - x) / (1 - t * x)
    assert w == norm


def test_single_point_weight():
    p = FieldParams.symbolic((1, 1))
    x = var("a1") * var("b1")
    path = DownRightPath((1,), (1,))
    assert hl_process_weight(path, [(0,)], p) == (1 - x) / (1 - t * x)
    for d in (1, 2, 3):
        assert hl_process_weight(path, [(d,)], p) == (1 - t) * x ** d * (1 - x) / (1 - t * x)


def test_single_point_weights_sum_to_one_minus_tail():
    p = FieldParams([F(1, 2)], [F(1, 2)], F(1, 3), (1, 1))
    path = DownRightPath((1,), (1,))
    total = sum(F(hl_process_weight(path, [(d,)], p).to_fraction()) for d in range(4))
    assert 1 - total == input_law(F(1, 2), F(1, 2), F(1, 3)).tail(3)


def test_weight_rejects_non_interlacing():
    p = FieldParams.symbolic((2, 2))
    with pytest.raises(ValueError):
        hl_process_weight(DownRightPath((2, 1), (1, 2)), [(1,), (2,), (0, 0)], p)


def test_single_cell_path_law():
    p = FieldParams.symbolic((1, 1))
    path = DownRightPath((1,), (1,))
    for d in range(3):
        assert path_marginal_probability(path, [(d,)], p) == input_law(var("a1"), var("b1"), t).mass(d)


def test_two_by_one_path():
    p = FieldParams.symbolic((2, 1))
    path = DownRightPath((2,), (1,))
    for d in range(3):
        assert path_marginal_probability(path, [(d,)], p) == hl_process_weight(path, [(d,)], p)


def test_two_by_two_zigzag():
    p = FieldParams.symbolic((2, 2))
    path = DownRightPath((2, 1), (1, 2))
    n = 0
    for x, y in product(range(3), range(3)):
        if y > x:
            continue
        for top in product(range(3), repeat=2):
            if top[0] < top[1] or not interlaces((y,), top):
                continue
            sigs = [(x,), (y,), top]
            assert path_marginal_probability(path, sigs, p) == hl_process_weight(path, sigs, p), sigs
            n += 1
    assert n > 10
