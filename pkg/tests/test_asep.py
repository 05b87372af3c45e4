"""One- and two-layer ASEP: rates, simulation, tau-series and moments."""

import pytest

from artifact.algebra import ONE, var
from artifact.asep import (AsepState, HeightObservable, _heights_batch, black_marginal_pvalue,
                           compare_rate_tables, derived_table, evaluate_series,
                           generator_tau_series, mc_moment, printed_table, simulate,
                           simulate_batch)

t = var("t")


def test_step_heights():
    st = AsepState.step(2, 6)
    for m in range(-5, 6):
        assert st.height(0, m) == max(-m, 0) == st.height(1, m)
        assert st.k(m) == 0


def test_tasep_only_right_jumps():
    for seed in range(5):
        tr = simulate(1, 0, 2.0, seed=seed)
        assert tr.events
        assert {e[3] for e in tr.events} == {"right"}


def test_simulate_is_reproducible():
    a, b = simulate(2, 0.5, 1.0, seed=3), simulate(2, 0.5, 1.0, seed=3)
    assert a.to_csv() == b.to_csv()


def test_black_never_passes_red_of_same_index():
    # at k = 1 the swap B,R -> R,B has rate (t - t^k)/(1 - t^k) = 0
    for table in (printed_table(2), derived_table(2, 2)):
        assert table(t, 1).get((("B", "R"), ("R", "B")), 0 * t).is_zero()
        assert table(t, 2)[(("B", "R"), ("R", "B"))] == (t - t ** 2) / (1 - t ** 2)


def test_layer_order_holds_along_trajectories():
    occ, _ = simulate_batch(2, 0.5, 2.0, 5000, seed=2)
    k = _heights_batch(occ, 1) - _heights_batch(occ, 0)
    assert (k >= 0).all()


def test_series_order_zero_and_one():
    for m in (-1, 0, 1):
        c = generator_tau_series(1, HeightObservable.of((m, 0, 2)), 0)
        assert c == [t ** (2 * max(-m, 0))]
    c = generator_tau_series(1, HeightObservable.of((0, 0, 1)), 1)
    assert c == [ONE, t - 1]


def test_series_cap():
    with pytest.raises(ValueError):
        generator_tau_series(1, HeightObservable.of((0, 0, 1)), 5)


def test_mc_at_tau_zero_is_exact():
    obs = HeightObservable.of((-2, 0, 1))
    assert mc_moment(1, obs, 0.0, 10, t_value=0.5) == (0.25, 0.0)


def test_mc_matches_series():
    obs = HeightObservable.of((0, 0, 1))
    coeffs = generator_tau_series(1, obs, 3)
    exact = float(evaluate_series(coeffs, 0.1, 0.5))
    est, se = mc_moment(1, obs, 0.1, 10 ** 6, seed=1, t_value=0.5)
    # the truncation error is below tau^4 / 4!
    assert abs(est - exact) < 4 * se + 0.1 ** 4 / 24


def test_two_layer_series_against_mc():
    obs = HeightObservable.of((0, 0, 1), (0, 1, 1))
    coeffs = generator_tau_series(2, obs, 3)
    exact = float(evaluate_series(coeffs, 0.05, 0.5))
    est, se = mc_moment(2, obs, 0.05, 2 * 10 ** 5, seed=4, t_value=0.5)
    assert abs(est - exact) < 4 * se + 2 * 0.05 ** 4


def test_derived_rates_equal_printed():
    assert compare_rate_tables(derived_table(2, 3), printed_table(2), range(4)) == []
    assert compare_rate_tables(derived_table(1), printed_table(1), [0], layers=1) == []


def test_black_marginal_is_asep():
    assert black_marginal_pvalue(0.5, 1.0, 20_000, seed=7) > 1e-3


def test_bad_t_rejected():
    with pytest.raises(ValueError):
        simulate_batch(1, 1.0, 1.0, 10)
