"""Six-vertex model, column projections of the field and their epsilon rates."""

from fractions import Fraction as F

import numpy as np
import pytest

from artifact.algebra import ONE, ZERO, scalar, var
from artifact.rsk import padded_inputs
from artifact.signatures import Signature
from artifact.vertex_models import (_law_given_r, _order, column_data, d0_grid_law_from_field,
                                    derive_projection_kernel, grid_heights,
                                    kernel_epsilon_expansion, representatives,
                                    sample_columns_batch, sample_six_vertex,
                                    six_vertex_chain_law, six_vertex_exact_expectation,
                                    six_vertex_rule)
from test_rsk import push_block_rule

t, ab = var("t"), var("ab")


def test_local_rule_cases():
    m = 3
    assert six_vertex_rule(m, m - 1, m + 1, ab, t) == {m: ONE}
    assert six_vertex_rule(m, m, m, ab, t) == {m: ONE}
    law = six_vertex_rule(m, m, m + 1, ab, t)
    assert law == {m + 1: (1 - ab) / (1 - t * ab), m: (1 - t) * ab / (1 - t * ab)}
    assert law[m + 1] + law[m] == ONE
    law = six_vertex_rule(m, m - 1, m, ab, t)
    assert law[m] + law[m - 1] == ONE
    with pytest.raises(ValueError):
        six_vertex_rule(m, m + 1, m, ab, t)


def _at(law, **subs):
    law = {k: v.subs(subs) for k, v in law.items()}
    return {k: v for k, v in law.items() if not v.is_zero()}


def test_ab_zero_limit():
    # with no inputs the branching case never grows a new zero ...
    assert _at(six_vertex_rule(2, 2, 3, ab, t), ab=0) == {3: ONE}
    # ... but the other random case keeps its t-randomness
    assert _at(six_vertex_rule(2, 1, 2, ab, t), ab=0) == {2: 1 - t, 1: t}
    # deterministic corner growth needs t = 0 as well
    for sw, se, nw in [(2, 2, 3), (2, 1, 2)]:
        law = _at(six_vertex_rule(sw, se, nw, ab, t), ab=0, t=0)
        assert list(law.values()) == [ONE]


def test_expectation_trivial_and_one_cell():
    a, b = [var("a1")], [var("b1")]
    assert six_vertex_exact_expectation([(1, 1)], [0], (1, 1), a, b, t) == ONE
    x = var("a1") * var("b1")
    want = t * (1 - x) / (1 - t * x) + (1 - t) * x / (1 - t * x)
    assert six_vertex_exact_expectation([(1, 1)], [1], (1, 1), a, b, t) == want


def test_expectation_cap():
    with pytest.raises(ValueError):
        six_vertex_exact_expectation([(1, 1)], [1], (4, 4), [F(1, 2)] * 4, [F(1, 2)] * 4, F(1, 2))


def test_chain_law_sums_to_one():
    a, b = [var("a1"), var("a2")], [var("b1"), var("b2")]
    total = ZERO
    for w in six_vertex_chain_law((2, 2), a, b, t).values():
        total = total + w
    assert total == ONE


def test_field_projection_matches_chain_2x2():
    a, b = [var("a1"), var("a2")], [var("b1"), var("b2")]
    f = d0_grid_law_from_field((2, 2), a, b, t)
    c = six_vertex_chain_law((2, 2), a, b, t)
    assert set(f) == set(c)
    assert all(f[k] == c[k] for k in f)


def test_one_column_kernel_is_six_vertex():
    K = derive_projection_kernel(1, (3, 3))
    assert K.rows
    for (j, sw, se, nw), row in K.rows.items():
        rule = six_vertex_rule(sw[0], se[0], nw[0], ab, t)
        assert {(d,): p for d, p in rule.items()} == row, (j, sw, se, nw)


def test_kernel_rows_sum_to_one():
    assert derive_projection_kernel(2, (2, 3)).row_sums_ok()


def test_two_columns_at_t_zero_follow_classical_growth():
    """At t = 0 the column data of the output is a function of the input r."""
    zero = scalar(0)
    n = 0
    for key in [((1, 0), (1, 0), (1, 1)), ((0, 1), (0, 0), (1, 1)), ((1, 1), (0, 1), (1, 1)),
                ((0, 1), (0, 1), (0, 2))]:
        for lam, mu, nu in representatives(3, 2, key):
            for r in range(4):
                law = _law_given_r(lam, mu, nu, r, 2, zero)
                V = 1 + max(abs(x) for s in (lam, mu, nu) for x in s) + r
                lt, nt = padded_inputs(lam, nu, r, V)
                rho = Signature(push_block_rule(lt, mu, nt))
                assert law == {column_data(rho, 2): ONE}, (lam, mu, nu, r)
                n += 1
    assert n > 20


def test_one_column_rates():
    rates = {(e.before, e.after): e.rate
             for e in kernel_epsilon_expansion(derive_projection_kernel(1), k_max=0)}
    assert rates == {(("B", ""), ("", "B")): ONE, (("", "B"), ("B", "")): t}


def test_sampler_states_and_edges():
    st = sample_six_vertex((3, 3), [F(1, 2)] * 3, [F(1, 2)] * 3, F(1, 3), seed=4)
    for i in range(1, 4):
        for j in range(1, 4):
            h = st.height(i, j)
            assert st.height(i - 1, j) - 1 <= h <= st.height(i - 1, j)
            assert st.height(i, j - 1) <= h <= st.height(i, j - 1) + 1
    assert st.to_json() == sample_six_vertex((3, 3), [F(1, 2)] * 3, [F(1, 2)] * 3, F(1, 3), seed=4).to_json()
    assert all(len(e) == 2 for e in st.edges())


def test_batch_sampler_matches_exact_law():
    a, b, tv = [F(1, 2), F(2, 5)], [F(1, 2), F(3, 5)], F(1, 2)
    runs = 200_000
    grid = sample_columns_batch((2, 2), a, b, tv, runs, seed=1)
    h = grid_heights(grid, 2, 2)[:, 0]
    exact = {}
    cells = [(1, 1), (1, 2), (2, 1), (2, 2)]
    order = _order((2, 2))
    for key, w in six_vertex_chain_law((2, 2), a, b, tv).items():
        d = dict(zip(order, key))[(2, 2)]
        exact[d] = exact.get(d, 0) + w
    assert set(cells) == set(order)
    for d, p in exact.items():
        p = float(p)
        se = np.sqrt(p * (1 - p) / runs)
        assert abs(np.mean(h == d) - p) < 4 * se, d


def test_two_column_batch_heights_ordered():
    grid = sample_columns_batch((2, 2), [F(1, 2)] * 2, [F(1, 2)] * 2, F(1, 2), 2000, c=2, seed=3)
    h = grid_heights(grid, 2, 2, c=2)
    assert np.all(h[:, 0] <= h[:, 1])
