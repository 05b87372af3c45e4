"""Exhaustive invariant suites shared by the CLI and the acceptance tests.

Each suite returns a SuiteResult: the number of checks, the first few
failures (as strings) and the wall time.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .algebra import ONE, ZERO, var
from .asep import (HeightObservable, black_marginal_pvalue, compare_rate_tables, derived_table,
                   generator_tau_series, mc_moment, printed_table)
from .field import DownRightPath, FieldParams, hl_process_weight, path_marginal_probability
from .identities import SignatureBasis, verify_commutation, verify_skew_cauchy
from .observables import (MEASURE_IDS, evaluate_model_formula, verify_measure_identity,
                          verify_process_observable)
from .rsk import (TransitionQuery, check_flip, column_marginal, forward_distribution,
                  inverse_distribution, one_coordinate_distribution, transition_distribution,
                  transition_weight, valid_triples)
from .signatures import Signature, column, interlaces, signatures
from .vertex_models import (d0_grid_law_from_field, derive_projection_kernel,
                            grid_heights, kernel_epsilon_expansion, representatives,
                            sample_columns_batch, six_vertex_chain_law,
                            six_vertex_exact_expectation)

MAX_REPORTED = 5


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    failed: int = 0

    @property
    def passed(self) -> bool:
        return self.failed == 0 and self.checks > 0

    def record(self, ok: bool, what) -> None:
        self.checks += 1
        if not ok:
            self.failed += 1
            if len(self.failures) < MAX_REPORTED:
                self.failures.append(str(what))

    def as_dict(self) -> dict:
        return {"name": self.name, "checks": self.checks, "failed": self.failed,
                "failures": self.failures, "seconds": round(self.seconds, 3),
                "verdict": "pass" if self.passed else "fail"}


def _timed(name):
    def deco(fn):
        def run(*args, **kwargs):
            res = SuiteResult(name)
            t0 = time.perf_counter()
            fn(res, *args, **kwargs)
            res.seconds = time.perf_counter() - t0
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


def _total(values):
    s = ZERO
    for v in values:
        s = s + v
    return s


def _triples(max_part: int, max_len: int):
    for N in range(1, max_len + 1):
        yield from valid_triples(N, 0, max_part)


# ---------------------------------------------------------------------------
# randomized RSK


@_timed("worked-example")
def worked_example(res: SuiteResult):
    """The reference 4 x 4 example: U = t(1 - t)/(1 - t^2)."""
    t = var("t")
    q = TransitionQuery(Signature((3, 3, 1, 0)), Signature((5, 3, 2, 1)),
                        Signature((5, 3, 2, 0)), Signature((7, 3, 2, 2)))
    w = transition_weight(q, t)
    res.record(w == t * (1 - t) / (1 - t ** 2), f"weight {w}")


@_timed("sum-to-one")
def sum_suite(res: SuiteResult, max_part: int = 3, max_len: int = 3, r_max: int = 2):
    """sum_rho U = 1, sum_rho U^r = 1 and sum_{lam, r} U-hat^r = 1."""
    for lam, mu, nu in _triples(max_part, max_len):
        d = transition_distribution(lam, mu, nu)
        res.record(_total(d.values()) == ONE, ("U", lam, mu, nu))
    for N in range(1, max_len + 1):
        longs = signatures(N, 0, max_part)
        shorts = signatures(N - 1, 0, max_part)
        for lam in shorts:
            for mu in longs:
                if not interlaces(lam, mu):
                    continue
                for nu in shorts:
                    if not interlaces(lam, nu):
                        continue
                    for r in range(r_max + 1):
                        d = forward_distribution(lam, mu, nu, r)
                        res.record(_total(d.values()) == ONE, ("U^r", lam, mu, nu, r))
        for rho in longs:
            for mu in longs:
                if not interlaces(mu, rho):
                    continue
                for nu in shorts:
                    if not interlaces(nu, rho):
                        continue
                    d = inverse_distribution(mu, nu, rho)
                    if d:
                        res.record(_total(d.values()) == ONE, ("U-hat", mu, nu, rho))


@_timed("flip")
def flip_suite(res: SuiteResult, max_part: int = 3, max_len: int = 3, r_max: int = 2):
    """Flip identity for signatures, and its input form, termwise."""
    for lam, mu, nu in _triples(max_part, max_len):
        for rho in transition_distribution(lam, mu, nu):
            c = check_flip(TransitionQuery(lam, mu, nu, rho))
            res.record(c.holds, ("flip", lam, mu, nu, rho))
    for N in range(1, max_len + 1):
        longs = signatures(N, 0, max_part)
        shorts = signatures(N - 1, 0, max_part)
        for lam in shorts:
            for mu in longs:
                if not interlaces(lam, mu):
                    continue
                for nu in shorts:
                    if not interlaces(lam, nu):
                        continue
                    for r in range(r_max + 1):
                        for rho in forward_distribution(lam, mu, nu, r):
                            c = check_flip(TransitionQuery(lam, mu, nu, rho, r))
                            res.record(c.holds, ("flip-input", lam, mu, nu, rho, r))


@_timed("symmetry")
def symmetry_suite(res: SuiteResult, max_part: int = 3, max_len: int = 3):
    for lam, mu, nu in _triples(max_part, max_len):
        a = transition_distribution(lam, mu, nu)
        b = transition_distribution(lam, nu, mu)
        res.record(a == b, ("symmetry", lam, mu, nu))


@_timed("markov-projection")
def markov_suite(res: SuiteResult, max_part: int = 3, max_len: int = 3):
    """The law of rho'_0..rho'_k depends on the first k + 1 columns of the inputs only."""
    for N in range(1, max_len + 1):
        seen: dict = {}
        for lam, mu, nu in valid_triples(N, 0, max_part):
            d = transition_distribution(lam, mu, nu)
            for k in range(0, max_part):
                key = (k,) + tuple(tuple(column(s, a) for a in range(0, k + 1)) for s in (lam, mu, nu))
                marg = column_marginal(d, k, 0)
                if key in seen:
                    res.record(seen[key][0] == marg, ("markov", seen[key][1], (lam, mu, nu), k))
                else:
                    seen[key] = (marg, (lam, mu, nu))


@_timed("kernel-representatives")
def kernel_representative_suite(res: SuiteResult, c: int = 2, extent=(3, 3)):
    """Every kernel row is compared on at least two representatives when two exist."""
    K = derive_projection_kernel(c, extent)
    for key, n in K.checked.items():
        avail = len(representatives(key[0], c, key[1:]))
        res.record(n >= min(2, avail), ("representatives", key, n, avail))
    res.record(K.row_sums_ok(), "row sums")


@_timed("one-coordinate")
def one_coordinate_suite(res: SuiteResult, max_part: int = 3, max_len: int = 3):
    for lam, mu, nu in _triples(max_part, max_len):
        a = transition_distribution(lam, mu, nu)
        b = one_coordinate_distribution(lam, mu, nu)
        res.record(a == b, ("one-coordinate", lam, mu, nu))


# ---------------------------------------------------------------------------
# Cauchy identities and operators


@_timed("skew-cauchy")
def cauchy_suite(res: SuiteResult, max_len: int = 3, max_part: int = 6, max_deg: int = 4,
                 variants=("A", "AA", "BB")):
    """A compares the whole series up to (max_deg, max_deg); AA and BB every coefficient."""
    for N in range(1, max_len + 1):
        longs = signatures(N, 0, max_part)
        shorts = signatures(N - 1, 0, max_part)
        for variant in variants:
            pairs = product(longs, longs) if variant == "BB" else product(longs, shorts)
            for mu, nu in pairs:
                degs = [(max_deg, max_deg)] if variant == "A" else \
                    [(k, l) for k in range(max_deg + 1) for l in range(max_deg + 1)]
                for k, l in degs:
                    rep = verify_skew_cauchy(variant, mu, nu, k, l)
                    res.record(rep.equal, (variant, mu, nu, k, l))


@_timed("operator-commutation")
def operator_suite(res: SuiteResult, max_len: int = 3, part_bound: int = 6, max_degree: int = 2):
    for N in range(1, max_len + 1):
        rep = verify_commutation(SignatureBasis(N, part_bound), max_degree)
        res.record(rep.equal, (N, rep.details[:2]))


# ---------------------------------------------------------------------------
# field


def _paths(extent):
    I, J = extent
    out = []
    for k in range(1, min(I, J) + 1):
        for ms in product(range(1, I + 1), repeat=k):
            for ns in product(range(1, J + 1), repeat=k):
                if all(a > b for a, b in zip(ms, ms[1:])) and all(a < b for a, b in zip(ns, ns[1:])):
                    out.append(DownRightPath(tuple(ms), tuple(ns)))
    return out


def _path_targets(path: DownRightPath, max_part: int):
    pts = path.points[1:-1]
    choices = []
    for (i, j) in pts:
        if i == 0:
            choices.append([Signature((0,) * j)])
        else:
            choices.append(signatures(j, 0, max_part))
    for combo in product(*choices):
        chain = [Signature(())] + list(combo) + [Signature((0,) * path.points[-1][1])]
        ok = True
        full = path.points
        for (p, s), (q, u) in zip(zip(full, chain), zip(full[1:], chain[1:])):
            if p[0] == q[0]:
                lo, hi = (s, u) if p[1] <= q[1] else (u, s)
                if len(hi) - len(lo) == 1 and not interlaces(lo, hi):
                    ok = False
            else:
                lo, hi = (s, u) if p[0] <= q[0] else (u, s)
                if any(a < b for a, b in zip(hi, lo)):
                    ok = False
            if not ok:
                break
        if ok:
            yield list(combo)


@_timed("path-hl-process")
def path_suite(res: SuiteResult, extent=(2, 2), max_part: int = 3):
    """Field path marginals equal HL process weights in Q(t, a, b)."""
    params = FieldParams.symbolic(extent)
    for path in _paths(extent):
        for sigs in _path_targets(path, max_part):
            lhs = path_marginal_probability(path, sigs, params)
            rhs = hl_process_weight(path, sigs, params)
            res.record(lhs == rhs, (path.m, path.n, sigs))


# ---------------------------------------------------------------------------
# vertex models and rates


@_timed("six-vertex-bbw")
def bbw_suite(res: SuiteResult, extent=(3, 3)):
    """Law of the d_0 grid: field projection vs the six-vertex chain, symbolically."""
    I, J = extent
    a = [var(f"a{i}") for i in range(1, I + 1)]
    b = [var(f"b{j}") for j in range(1, J + 1)]
    t = var("t")
    field_law = d0_grid_law_from_field(extent, a, b, t)
    chain_law = six_vertex_chain_law(extent, a, b, t)
    keys = set(field_law) | set(chain_law)
    for key in keys:
        res.record(field_law.get(key, ZERO) == chain_law.get(key, ZERO), ("grid", key))


@_timed("epsilon-rates")
def rates_suite(res: SuiteResult, k_max: int = 3):
    """c = 1 gives rates (1, t); c = 2 reproduces the two-layer rate table exactly."""
    t = var("t")
    K1 = derive_projection_kernel(1)
    entries = kernel_epsilon_expansion(K1, k_max=0)
    rates = {(e.before, e.after): e.rate for e in entries}
    right = rates.get((("B", ""), ("", "B")))
    left = rates.get((("", "B"), ("B", "")))
    res.record(right == ONE, f"right rate {right}")
    res.record(left == t, f"left rate {left}")
    diffs = compare_rate_tables(derived_table(2, k_max), printed_table(2), list(range(k_max + 1)))
    res.record(not diffs, f"two-layer differences {diffs[:3]}")


# ---------------------------------------------------------------------------
# formulas


FRACTION_A = (Fraction(1, 4), Fraction(1, 5), Fraction(1, 6))
FRACTION_B = (Fraction(1, 3), Fraction(1, 4), Fraction(1, 5))

SIXV_CASES = (
    ([(1, 1)], [1], (1, 1)),
    ([(1, 1), (0, 1)], [1, 0], (1, 1)),
    ([(2, 1), (1, 2)], [1, 1], (2, 2)),
    ([(3, 3)], [2], (3, 3)),
    ([(3, 1), (2, 3)], [2, 2], (3, 3)),
    ([(3, 2), (1, 3)], [1, 2], (3, 3)),
    ([(2, 2), (2, 3)], [2, 1], (3, 3)),
)

ASEP_CASES = (
    ("asep-2pt", {"ms": [0, 0], "ks": [1, 0]}),
    ("asep-2pt", {"ms": [1, -1], "ks": [1, 1]}),
    ("asep-2pt", {"ms": [1, 0], "ks": [2, 1]}),
    ("asep-2pt", {"ms": [1, 1], "ks": [2, 2]}),
    ("asep-2pt", {"ms": [0, -1], "ks": [2, 2]}),
    ("twolayerAsep-kpt", {"ms": [0], "s": [1]}),
    ("twolayerAsep-kpt", {"ms": [1, -1], "s": [1, 1]}),
    ("twolayerAsep-kpt", {"ms": [1, 0], "s": [0, 1]}),
    ("twolayerAsep-kpt", {"ms": [0, 0], "s": [1, 1]}),
)


def asep_observable(id: str, params: dict) -> HeightObservable:
    """The height observable whose expectation the formula computes.

    A two-layer group with selector s = 1 measures h_0 + h_1 at its point.
    """
    if id == "asep-2pt":
        return HeightObservable.of(*[(m, 0, k) for m, k in zip(params["ms"], params["ks"]) if k])
    count: dict = {}
    for m, s in zip(params["ms"], params["s"]):
        for layer in range(s + 1):
            count[(m, layer)] = count.get((m, layer), 0) + 1
    return HeightObservable.of(*[(m, s, k) for (m, s), k in sorted(count.items())])


@_timed("measure-identities")
def measure_suite(res: SuiteResult, max_M: int = 2, max_N: int = 2, max_r: int = 2, D: int = 4):
    for id in MEASURE_IDS:
        for M in range(1, max_M + 1):
            for N in range(1, max_N + 1):
                for r in range(1, max_r + 1):
                    rep = verify_measure_identity(id, M, N, r, D)
                    res.record(rep.verdict, (id, M, N, r, D, rep.first_difference))


@_timed("hl-process-observable")
def process_suite(res: SuiteResult, max_r: int = 1, D: int = 3):
    for r1 in range(max_r + 1):
        for r2 in range(max_r + 1):
            rep = verify_process_observable(2, r1, r2, D)
            res.record(rep.verdict, ("genHL", r1, r2, D, rep.first_difference))


@_timed("six-vertex-moments")
def sixv_suite(res: SuiteResult, tol: float = 1e-9, t=Fraction(1, 2)):
    """Formula value (stabilized mode) against exhaustive enumeration of height grids."""
    for pts, ks, extent in SIXV_CASES:
        v = evaluate_model_formula("sixv-2pt", {"points": pts, "ks": ks, "a": FRACTION_A,
                                                "b": FRACTION_B, "t": t}, "stabilized")
        e = six_vertex_exact_expectation(pts, ks, extent, FRACTION_A, FRACTION_B, t)
        e = e.to_fraction() if hasattr(e, "to_fraction") else Fraction(e)
        res.record(abs(float(v.value) - float(e)) <= tol + float(v.bound), (pts, ks, float(v.value), float(e)))


@_timed("asep-tau-series")
def asep_series_suite(res: SuiteResult, order: int = 3):
    """Formula tau-coefficients against the generator, in Q(t)."""
    for id, params in ASEP_CASES:
        layers = 1 if id == "asep-2pt" else 2
        mine = evaluate_model_formula(id, dict(params, order=order), "tau-series").value
        gen = generator_tau_series(layers, asep_observable(id, params), order)
        ok = len(mine) == len(gen) and all((x - y).is_zero() for x, y in zip(mine, gen))
        res.record(ok, (id, params))


# ---------------------------------------------------------------------------
# Monte Carlo brackets


MC_A = (Fraction(1, 2), Fraction(2, 5), Fraction(1, 3))
MC_B = (Fraction(1, 2), Fraction(3, 5), Fraction(1, 2))
MC_SIXV = (([(3, 3)], [1]), ([(3, 1), (2, 3)], [2, 1]), ([(2, 2), (1, 3)], [1, 2]))
MC_TWOLAYER = ((3, [3], [1]), (3, [3, 1], [1, 0]), (2, [3, 2], [1, 1]))
MC_ASEP = (("asep-2pt", {"ms": [1, 0], "ks": [1, 1]}),
           ("asep-2pt", {"ms": [-1], "ks": [1]}),
           ("twolayerAsep-kpt", {"ms": [0], "s": [1]}),
           ("twolayerAsep-kpt", {"ms": [1, 0], "s": [0, 1]}))


def _bracket(res, what, mean, se, value, bound, sigmas):
    gap = abs(mean - float(value))
    res.record(gap <= sigmas * se + float(bound),
               (what, round(mean, 6), round(se, 6), float(value), round(gap / se if se else 0.0, 2)))
    return gap / se if se else 0.0


@_timed("monte-carlo")
def mc_suite(res: SuiteResult, runs: int = 10 ** 6, seed: int = 0, t=Fraction(1, 2),
             tau: float = 0.5, sigmas: float = 4.0, nodes: int = 48):
    """Sample means of 10^6 trajectories bracket every formula within 4 standard errors."""
    tf = float(t)

    def stats(exps):
        v = tf ** exps
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))

    g1 = sample_columns_batch((3, 3), MC_A, MC_B, t, runs, 1, seed=seed)
    for pts, ks in MC_SIXV:
        val = evaluate_model_formula("sixv-2pt", {"points": pts, "ks": ks, "a": MC_A, "b": MC_B,
                                                  "t": t}).value
        e = sum(k * grid_heights(g1, m, n)[:, 0] for (m, n), k in zip(pts, ks))
        _bracket(res, ("sixv-2pt", pts, ks), *stats(e), val, 0, sigmas)
    # qWHL-b at r = 1 is the one-point six-vertex moment divided by t^N
    v = evaluate_model_formula("qWHL-b", {"r": 1, "x": MC_A, "y": MC_B, "t": t}).value
    _bracket(res, ("qWHL-b", 1), *stats(grid_heights(g1, 3, 3)[:, 0]), v * t ** 3, 0, sigmas)

    g2 = sample_columns_batch((3, 3), MC_A, MC_B, t, runs, 2, seed=seed + 1)
    for n, ms, s in MC_TWOLAYER:
        val = evaluate_model_formula("twolayer-kpt", {"n": n, "ms": ms, "s": s, "a": MC_A,
                                                      "b": MC_B, "t": t}).value
        e = 0
        for m, sel in zip(ms, s):
            H = grid_heights(g2, m, n, 2)
            e = e + H[:, 0] + (H[:, 1] if sel else 0)
        _bracket(res, ("twolayer-kpt", n, ms, s), *stats(e), val, 0, sigmas)
    # qWHL-b at r = 2 is the two-layer moment of h_0 + h_1 divided by t^{2N}
    v = evaluate_model_formula("qWHL-b", {"r": 2, "x": MC_A, "y": MC_B, "t": t}).value
    H = grid_heights(g2, 3, 3, 2)
    _bracket(res, ("qWHL-b", 2), *stats(H[:, 0] + H[:, 1]), v * t ** 6, 0, sigmas)

    for k, (id, params) in enumerate(MC_ASEP):
        layers = 1 if id == "asep-2pt" else 2
        num = evaluate_model_formula(id, dict(params, t=tf, tau=tau, nodes=nodes), "numeric")
        mean, se = mc_moment(layers, asep_observable(id, params), tau, runs,
                             seed=seed + 10 + k, t_value=tf)
        _bracket(res, (id, params, tau), mean, se, num.value, num.bound, sigmas)


@_timed("black-marginal")
def black_marginal_suite(res: SuiteResult, runs: int = 10 ** 5, seed: int = 0, t_value: float = 0.5,
                         tau: float = 1.0, p_min: float = 1e-3):
    """Two-layer black particles against the one-layer ASEP, chi-square on jump counts."""
    for m in (-1, 0, 1):
        p = black_marginal_pvalue(t_value, tau, runs, seed=seed + m + 1, m=m)
        res.record(p > p_min, ("black-marginal", m, p))
