"""The ten acceptance criteria, each at its stated range, tolerance and time limit.

Every criterion prints one line "criterion N: PASS|FAIL ..." to the terminal
(also under pytest's output capture).  Run on its own with

    pytest tests/test_acceptance.py -v
"""

from artifact import suites


def _report(capsys, number, title, results, limit=None):
    seconds = sum(r.seconds for r in results)
    ok = all(r.passed for r in results)
    within = limit is None or seconds < limit
    checks = sum(r.checks for r in results)
    failed = sum(r.failed for r in results)
    status = "PASS" if ok and within else "FAIL"
    line = f"criterion {number}: {status}  {title}  checks={checks} failed={failed} {seconds:.1f}s"
    if limit is not None:
        line += f" (limit {limit}s)"
    with capsys.disabled():
        print("\n" + line)
        for r in results:
            for f in r.failures[:3]:
                print(f"    {r.name}: {f}")
    assert ok, [r.failures[:3] for r in results if not r.passed]
    assert within, f"took {seconds:.1f}s, limit {limit}s"


def test_criterion_1_worked_example(capsys):
    _report(capsys, 1, "worked example U = t(1-t)/(1-t^2)", [suites.worked_example()], limit=1)


def test_criterion_2_normalization(capsys):
    _report(capsys, 2, "sum_rho U = 1 (plain, input, inverse), parts in [0,3], N <= 3",
            [suites.sum_suite(max_part=3, max_len=3)], limit=300)


def test_criterion_3_flip(capsys):
    _report(capsys, 3, "flip identities termwise", [suites.flip_suite(max_part=3, max_len=3)],
            limit=600)


def test_criterion_4_symmetry_markov(capsys):
    _report(capsys, 4, "symmetry, Markov projection, kernel representatives",
            [suites.symmetry_suite(max_part=3, max_len=3), suites.markov_suite(max_part=3, max_len=3),
             suites.kernel_representative_suite(c=2, extent=(3, 3))])


def test_criterion_5_one_coordinate(capsys):
    _report(capsys, 5, "one-coordinate == rectangle description",
            [suites.one_coordinate_suite(max_part=3, max_len=3)])


def test_criterion_6_cauchy_operators(capsys):
    _report(capsys, 6, "skew Cauchy A/AA/BB (k,l <= 4, N <= 3, parts <= 6) and commutation (P = 6)",
            [suites.cauchy_suite(max_len=3, max_part=6, max_deg=4),
             suites.operator_suite(max_len=3, part_bound=6, max_degree=2)], limit=600)


def test_criterion_7_path_marginals(capsys):
    _report(capsys, 7, "field path marginals == HL process weights on 2x2, parts <= 3",
            [suites.path_suite(extent=(2, 2), max_part=3)])


def test_criterion_8_bbw(capsys):
    _report(capsys, 8, "six-vertex grid law from the field == chain law on 3x3",
            [suites.bbw_suite(extent=(3, 3))])


def test_criterion_9_rates(capsys):
    _report(capsys, 9, "epsilon rates: (1, t) for c = 1, two-layer table for c = 2",
            [suites.rates_suite(k_max=3)])


def test_criterion_10_formulas(capsys):
    results = [suites.measure_suite(max_M=2, max_N=2, max_r=2, D=4),
               suites.process_suite(max_r=1, D=3),
               suites.sixv_suite(tol=1e-9),
               suites.asep_series_suite(order=3),
               suites.mc_suite(runs=10 ** 6, tau=0.5, sigmas=4.0)]
    _report(capsys, 10, "measure, process, six-vertex, ASEP series, Monte Carlo (10^6, 4 s.e.)",
            results, limit=3600)
