"""Observable identities: measures, two-level processes and model formulas."""

from fractions import Fraction as F

import pytest

import artifact.observables as obs
from artifact.algebra import ONE, var
from artifact.asep import HeightObservable, evaluate_series, generator_tau_series
from artifact.observables import (MEASURE_IDS, CapExceeded, evaluate_model_formula,
                                  measure_lhs, qwhl_a_lhs, verify_measure_identity,
                                  verify_process_observable)
from artifact.vertex_models import six_vertex_exact_expectation

t, q = var("t"), var("q")


def _poch_t(r):
    out = ONE
    for i in range(1, r + 1):
        out = out * (1 - t ** i)
    return out


@pytest.mark.parametrize("id", MEASURE_IDS)
def test_degree_zero(id):
    for r in (1, 2):
        rep = verify_measure_identity(id, 1, 1, r, 0)
        assert rep.verdict and rep.lhs == rep.rhs == 1
        const = measure_lhs(id, 1, 1, r, 0)
        # the empty diagram: E_r sums over infinitely many rows, q-observables give 1
        want = t ** (r * (r - 1) // 2) / _poch_t(r) if id in MEASURE_IDS[:4] else ONE
        assert const == want


def test_mes_11_small():
    rep = verify_measure_identity("mes-11", 1, 1, 1, 2)
    assert rep.verdict and rep.metadata["monomials"] == 3


def test_mes_44_example():
    rep = verify_measure_identity("mes-44", 2, 2, 1, 3)
    assert rep.verdict, rep.first_difference


@pytest.mark.parametrize("id", MEASURE_IDS)
def test_every_measure_identity_small(id):
    assert verify_measure_identity(id, 2, 1, 1, 3).verdict


def test_caps():
    with pytest.raises(CapExceeded):
        verify_measure_identity("mes-44", 4, 1, 1, 2)
    with pytest.raises(CapExceeded):
        verify_process_observable(2, 3, 0, 2)


def test_mutation_is_detected(monkeypatch):
    """Perturbing one diagram term on the enumeration side must flip the verdict."""
    real = obs._family

    def bent(kind, lam, names, qq, tt):
        v = real(kind, lam, names, qq, tt)
        return 2 * v if tuple(lam) == (1,) and kind == "hl-P'" else v

    monkeypatch.setattr(obs, "_family", bent)
    rep = verify_measure_identity("mes-44", 1, 1, 1, 2)
    assert not rep.verdict and rep.first_difference is not None


def test_process_examples():
    rep = verify_process_observable(2, 0, 0, 2)
    assert rep.verdict
    assert verify_process_observable(2, 1, 0, 2).verdict
    assert verify_process_observable(2, 1, 1, 3).verdict


# ---------------------------------------------------------------------------
# model formulas


def test_sixv_one_cell():
    a, b, tv = [F(1, 4)], [F(1, 3)], F(1, 2)
    v = evaluate_model_formula("sixv-2pt", {"points": [(1, 1), (0, 1)], "ks": [1, 0],
                                            "a": a, "b": b, "t": tv}, "stabilized")
    e = six_vertex_exact_expectation([(1, 1)], [1], (1, 1), a, b, tv)
    assert abs(float(v.value) - float(e)) < 1e-12
    x = a[0] * b[0]
    assert e == tv * (1 - x) / (1 - tv * x) + (1 - tv) * x / (1 - tv * x)


def test_asep_at_time_zero():
    c = evaluate_model_formula("asep-2pt", {"ms": [2, -2], "ks": [1, 2], "order": 0}, "tau-series").value
    assert c == [t ** 4]


def test_asep_first_order():
    c = evaluate_model_formula("asep-2pt", {"ms": [0, 0], "ks": [1, 0], "order": 1}, "tau-series").value
    assert c == [ONE, t - 1]
    assert c == generator_tau_series(1, HeightObservable.of((0, 0, 1)), 1)


def test_asep_quadrature_matches_series():
    p = {"ms": [1, 0], "ks": [1, 1]}
    coeffs = evaluate_model_formula("asep-2pt", dict(p, order=4), "tau-series").value
    num = evaluate_model_formula("asep-2pt", dict(p, t=0.5, tau=0.05), "numeric")
    assert abs(num.value - float(evaluate_series(coeffs, 0.05, 0.5))) < 1e-6 + num.bound


@pytest.mark.parametrize("r", [1, 2])
def test_qwhl_a_three_routes(r):
    P = {"r": r, "x": [F(1, 3), F(1, 4)], "y": [F(1, 2), F(1, 5)], "q": F(1, 2)}
    exact = evaluate_model_formula("qWHL-a", P, "exact").value
    stab = evaluate_model_formula("qWHL-a", P, "stabilized")
    assert exact == qwhl_a_lhs(r, P["x"], P["y"], P["q"])
    assert abs(stab.value - exact) <= stab.bound + F(1, 10 ** 15)


def test_qwhl_b_routes_and_six_vertex():
    x, y, tv = [F(1, 3), F(1, 4)], [F(1, 2), F(1, 5)], F(1, 2)
    P = {"r": 1, "x": x, "y": y, "t": tv}
    exact = evaluate_model_formula("qWHL-b", P, "exact").value
    stab = evaluate_model_formula("qWHL-b", P, "stabilized")
    assert abs(stab.value - exact) <= stab.bound + F(1, 10 ** 15)
    # r = 1 is the one-point six-vertex moment divided by t^N
    e = six_vertex_exact_expectation([(2, 2)], [1], (2, 2), x, y, tv)
    assert exact * tv ** 2 == e


def test_unknown_ids_and_modes():
    with pytest.raises(ValueError):
        evaluate_model_formula("mes-1", {})
    with pytest.raises(ValueError):
        evaluate_model_formula("asep-2pt", {"ms": [0], "ks": [1]}, "stabilized")
