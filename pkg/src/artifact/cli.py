"""Command-line entry point.

    artifact verify rsk|cauchy|operators|field|observables [options]
    artifact sample field|sixvertex|asep [options]
    artifact derive kernel [options]
    artifact evaluate formula --id ID --params FILE [--mode MODE]

Every command writes one JSON report (to --out, default stdout) holding the
command, the effective configuration, per-check verdicts and a payload.
Wall times go to a separate metadata document (--meta, default stderr) so
that identical argv and seed give byte-identical reports.

Exit codes: 0 all checks pass, 1 some verdict failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import suites
from .algebra import ExactScalar
from .asep import HeightObservable, simulate, simulate_batch
from .field import FieldParams, sample_field
from .observables import MODEL_IDS, evaluate_model_formula
from .vertex_models import (derive_projection_kernel, grid_heights, kernel_epsilon_expansion,
                            sample_columns_batch, sample_six_vertex)

DEFAULT_A = ["1/2", "2/5", "1/3"]
DEFAULT_B = ["1/2", "3/5", "1/2"]


class UsageError(Exception):
    pass


def _enc(x):
    """JSON-ready form: exact scalars and fractions become canonical strings."""
    if isinstance(x, dict):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, (Fraction, ExactScalar)):
        return str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return str(x)


def _dump(doc) -> str:
    return json.dumps(_enc(doc), sort_keys=True, indent=2) + "\n"


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "out", "meta", "csv")}


def _fractions(values, name):
    try:
        return [Fraction(v) for v in values]
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"--{name}: {e}")


def _params_file(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read parameter file {path}: {e}")
    if not isinstance(doc, dict):
        raise UsageError("parameter file must hold a JSON object")
    return doc


def _suite_report(results) -> tuple[list, dict]:
    checks, seconds = [], {}
    for r in results:
        d = r.as_dict()
        seconds[d.pop("name")] = d.pop("seconds")
        checks.append(dict(name=r.name, **d))
    return checks, seconds


# ---------------------------------------------------------------------------
# verify


def cmd_verify_rsk(args):
    kw = dict(max_part=args.max_part, max_len=args.max_len)
    results = [suites.worked_example(),
               suites.sum_suite(r_max=args.r_max, **kw),
               suites.symmetry_suite(**kw),
               suites.flip_suite(r_max=args.r_max, **kw),
               suites.markov_suite(**kw),
               suites.one_coordinate_suite(**kw)]
    return _suite_report(results) + ({},)


def cmd_verify_cauchy(args):
    r = suites.cauchy_suite(max_len=args.max_len, max_part=args.max_part, max_deg=args.max_deg)
    return _suite_report([r]) + ({},)


def cmd_verify_operators(args):
    if 2 * args.max_degree > args.part_bound:
        raise UsageError("need --max-degree <= --part-bound / 2")
    r = suites.operator_suite(max_len=args.max_len, part_bound=args.part_bound,
                              max_degree=args.max_degree)
    return _suite_report([r]) + ({},)


def cmd_verify_field(args):
    results = [suites.path_suite(extent=tuple(args.extent), max_part=args.max_part),
               suites.bbw_suite(extent=tuple(args.grid_extent)),
               suites.kernel_representative_suite(c=2, extent=tuple(args.grid_extent)),
               suites.rates_suite(k_max=args.k_max)]
    return _suite_report(results) + ({},)


OBSERVABLE_SUITES = ("measure", "process", "sixv", "asep", "mc", "black")


def cmd_verify_observables(args):
    wanted = [s for s in args.suites.split(",") if s]
    for s in wanted:
        if s not in OBSERVABLE_SUITES:
            raise UsageError(f"unknown suite {s!r}; choose from {','.join(OBSERVABLE_SUITES)}")
    results = []
    if "measure" in wanted:
        results.append(suites.measure_suite(max_M=args.M, max_N=args.N, max_r=args.r, D=args.D))
    if "process" in wanted:
        results.append(suites.process_suite(max_r=args.process_r, D=args.process_D))
    if "sixv" in wanted:
        results.append(suites.sixv_suite())
    if "asep" in wanted:
        results.append(suites.asep_series_suite(order=args.order))
    if "mc" in wanted:
        results.append(suites.mc_suite(runs=args.runs, seed=args.seed))
    if "black" in wanted:
        results.append(suites.black_marginal_suite(runs=args.runs, seed=args.seed))
    return _suite_report(results) + ({},)


# ---------------------------------------------------------------------------
# sample


def _vertex_params(args):
    p = _params_file(args.params)
    a = _fractions(p.get("a", args.a), "a")
    b = _fractions(p.get("b", args.b), "b")
    t = _fractions([p.get("t", args.t)], "t")[0]
    I, J = p.get("extent", args.extent)
    if len(a) < I or len(b) < J:
        raise UsageError("need at least I values for --a and J values for --b")
    if not 0 <= t < 1:
        raise UsageError("need 0 <= t < 1")
    for x in a[:I]:
        for y in b[:J]:
            if not 0 < x * y < 1:
                raise UsageError("need 0 < a_i b_j < 1")
    return a, b, t, (int(I), int(J))


def cmd_sample_field(args):
    a, b, t, extent = _vertex_params(args)
    res = suites.SuiteResult("interlacing")
    try:
        st = sample_field(FieldParams(a, b, t, extent, args.seed))
    except AssertionError as e:
        res.record(False, e)
        return _suite_report([res]) + ({},)
    res.record(True, "")
    I, J = extent
    payload = {"signatures": [[list(st[i, j]) for j in range(J + 1)] for i in range(I + 1)],
               "inputs": [[st.inputs[(i, j)] for j in range(1, J + 1)] for i in range(1, I + 1)]}
    checks, seconds = _suite_report([res])
    return checks, seconds, payload


def cmd_sample_sixvertex(args):
    a, b, t, extent = _vertex_params(args)
    I, J = extent
    if args.runs == 1 and args.layers == 1:
        st = sample_six_vertex(extent, a, b, t, seed=args.seed)
        grid = [[st.height(i, j) for j in range(J + 1)] for i in range(I + 1)]
        if args.csv:
            _write_rows(args.csv, ["run", "i", "j", "h0"],
                        [(0, i, j, grid[i][j]) for i in range(I + 1) for j in range(J + 1)])
        return [], {}, {"d0": grid}
    g = sample_columns_batch(extent, a, b, t, args.runs, args.layers, seed=args.seed)
    c = args.layers
    means = {}
    rows = []
    for i in range(I + 1):
        for j in range(J + 1):
            H = grid_heights(g, i, j, c)
            means[f"{i},{j}"] = [float(x) for x in H.mean(axis=0)]
            if args.csv:
                rows.extend((r, i, j, *map(int, H[r])) for r in range(args.runs))
    if args.csv:
        rows.sort()
        _write_rows(args.csv, ["run", "i", "j"] + [f"h{s}" for s in range(c)], rows)
    return [], {}, {"mean_heights": means}


def _write_rows(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def _parse_observable(text):
    try:
        terms = [tuple(int(x) for x in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"observable {text!r}: expected m:s:k[,m:s:k...]")
    for term in terms:
        if len(term) != 3:
            raise UsageError(f"observable {text!r}: expected m:s:k[,m:s:k...]")
    return HeightObservable.of(*terms)


def cmd_sample_asep(args):
    if args.layers not in (1, 2):
        raise UsageError("--layers must be 1 or 2")
    if not 0 <= args.t < 1 or args.tau < 0 or args.runs < 1:
        raise UsageError("need 0 <= t < 1, tau >= 0, runs >= 1")
    observables = args.observable or ["0:0:1"]
    obs = [_parse_observable(o) for o in observables]
    for o in obs:
        if any(s >= args.layers for _, s, _ in o.terms):
            raise UsageError("observable layer out of range")
    if args.csv:
        finals, windows, rows = [], [], []
        for run in range(args.runs):
            seed = args.seed * 1_000_003 + run
            window = None
            while True:
                tr = simulate(args.layers, args.t, args.tau, window=window, seed=seed)
                if not tr.touched:
                    break
                window = 2 * tr.final.window
            finals.append(tr.final.occupancy)
            windows.append(tr.final.window)
            rows.extend((run, *e) for e in tr.events)
        _write_rows(args.csv, ["run", "time", "site", "layer", "event"],
                    [(r, repr(tm), s, la, ev) for r, tm, s, la, ev in rows])
        W = max(windows)
        occ = np.zeros((args.runs, 2 * W), dtype=np.int8)
        full = (1 << args.layers) - 1
        for r, (o, w) in enumerate(zip(finals, windows)):
            occ[r, :W - w] = full
            occ[r, W - w:W + w] = o
        window = W
    else:
        occ, window = simulate_batch(args.layers, args.t, args.tau, args.runs, seed=args.seed)
    moments = []
    for text, o in zip(observables, obs):
        v = args.t ** o.exponent_batch(occ, window)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        moments.append({"observable": text, "mean": float(v.mean()), "stderr": se})
    heights = {}
    for layer in range(args.layers):
        for m in range(-3, 4):
            h = HeightObservable.of((m, layer, 1)).exponent_batch(occ, window)
            heights[f"h{layer}({m})"] = float(h.mean())
    checks = []
    if args.layers == 2:
        bad = 0
        for m in range(-window + 1, window):
            k = (HeightObservable.of((m, 1, 1)).exponent_batch(occ, window)
                 - HeightObservable.of((m, 0, 1)).exponent_batch(occ, window))
            bad += int((k < 0).sum())
        checks.append({"name": "layer-order", "checks": 1, "failed": int(bad > 0),
                       "failures": [] if not bad else [f"{bad} negative k values"],
                       "verdict": "pass" if not bad else "fail"})
    return checks, {}, {"moments": moments, "mean_heights": heights}


# ---------------------------------------------------------------------------
# derive, evaluate


def cmd_derive_kernel(args):
    if args.layers < 1:
        raise UsageError("--layers must be positive")
    K = derive_projection_kernel(args.layers, tuple(args.extent))
    rows = {}
    for key in sorted(K.rows):
        j, sw, se, nw = key
        rows[f"j={j} sw={sw} se={se} nw={nw}"] = {str(d): str(p) for d, p in sorted(K.rows[key].items())}
    entries = kernel_epsilon_expansion(K, k_max=args.k_max if args.layers > 1 else 0)
    rates = [{"before": list(e.before), "after": list(e.after), "k": e.k, "rate": str(e.rate)}
             for e in entries]
    res = suites.SuiteResult("kernel")
    res.record(K.row_sums_ok(), "row sums")
    for key, n in sorted(K.checked.items()):
        res.record(n >= 1, ("representatives", key, n))
    checks, seconds = _suite_report([res])
    return checks, seconds, {"rows": rows, "checked": {str(k): n for k, n in sorted(K.checked.items())},
                             "rates": rates}


def cmd_evaluate_formula(args):
    if args.id not in MODEL_IDS:
        raise UsageError(f"--id must be one of {', '.join(MODEL_IDS)}")
    params = _params_file(args.params)
    try:
        v = evaluate_model_formula(args.id, params, args.mode)
    except (KeyError, TypeError) as e:
        raise UsageError(f"bad parameters for {args.id}: {e}")
    payload = json.loads(v.to_json())
    payload["params"] = params
    if isinstance(v.value, Fraction):
        payload["float"] = float(v.value)
    return [], {}, payload


# ---------------------------------------------------------------------------
# grammar


def _common(p, seed=True):
    p.add_argument("--out", default="-", help="report path (default stdout)")
    p.add_argument("--meta", default=None, help="timing metadata path (default stderr)")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.split("\n\n")[0])
    top = ap.add_subparsers(dest="group", required=True)

    verify = top.add_parser("verify").add_subparsers(dest="what", required=True)
    p = verify.add_parser("rsk", help="sum, symmetry, flip, Markov and one-coordinate suites")
    p.add_argument("--max-part", type=int, default=3)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--r-max", type=int, default=2)
    _common(p, seed=False)
    p.set_defaults(func=cmd_verify_rsk)

    p = verify.add_parser("cauchy", help="skew Cauchy identities A, AA, BB")
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--max-part", type=int, default=6)
    p.add_argument("--max-deg", type=int, default=4)
    _common(p, seed=False)
    p.set_defaults(func=cmd_verify_cauchy)

    p = verify.add_parser("operators", help="HL operator commutation on the safe region")
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--part-bound", type=int, default=6)
    p.add_argument("--max-degree", type=int, default=2)
    _common(p, seed=False)
    p.set_defaults(func=cmd_verify_operators)

    p = verify.add_parser("field", help="path marginals, six-vertex grid law, kernel, rates")
    p.add_argument("--extent", type=int, nargs=2, default=[2, 2])
    p.add_argument("--max-part", type=int, default=3)
    p.add_argument("--grid-extent", type=int, nargs=2, default=[3, 3])
    p.add_argument("--k-max", type=int, default=3)
    _common(p, seed=False)
    p.set_defaults(func=cmd_verify_field)

    p = verify.add_parser("observables", help="formula suites")
    p.add_argument("--suites", default="measure,process,sixv,asep",
                   help=f"comma list from {','.join(OBSERVABLE_SUITES)}")
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--D", type=int, default=4)
    p.add_argument("--process-r", type=int, default=1)
    p.add_argument("--process-D", type=int, default=3)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--runs", type=int, default=10 ** 6)
    _common(p)
    p.set_defaults(func=cmd_verify_observables)

    sample = top.add_parser("sample").add_subparsers(dest="what", required=True)
    for name, fn in (("field", cmd_sample_field), ("sixvertex", cmd_sample_sixvertex)):
        p = sample.add_parser(name)
        p.add_argument("--extent", type=int, nargs=2, default=[3, 3])
        p.add_argument("--a", nargs="+", default=DEFAULT_A)
        p.add_argument("--b", nargs="+", default=DEFAULT_B)
        p.add_argument("--t", default="1/2")
        p.add_argument("--params", default=None, help="JSON file with a, b, t, extent")
        if name == "sixvertex":
            p.add_argument("--layers", type=int, default=1)
            p.add_argument("--runs", type=int, default=1)
            p.add_argument("--csv", default=None, help="per-run heights")
        _common(p)
        p.set_defaults(func=fn)

    p = sample.add_parser("asep")
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--observable", action="append",
                   help="m:s:k[,m:s:k...] for t^{sum k h_s(m)}; repeatable")
    p.add_argument("--csv", default=None, help="trajectory events (run, time, site, layer, event)")
    _common(p)
    p.set_defaults(func=cmd_sample_asep)

    derive = top.add_parser("derive").add_subparsers(dest="what", required=True)
    p = derive.add_parser("kernel")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--extent", type=int, nargs=2, default=[3, 3])
    p.add_argument("--k-max", type=int, default=3)
    _common(p, seed=False)
    p.set_defaults(func=cmd_derive_kernel)

    evaluate = top.add_parser("evaluate").add_subparsers(dest="what", required=True)
    p = evaluate.add_parser("formula")
    p.add_argument("--id", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--mode", default="exact",
                   choices=["exact", "stabilized", "tau-series", "numeric"])
    _common(p, seed=False)
    p.set_defaults(func=cmd_evaluate_formula)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    t0 = time.perf_counter()
    try:
        checks, seconds, payload = args.func(args)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"artifact: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        # parameter values the library rejects are usage errors too
        ap.print_usage(sys.stderr)
        print(f"artifact: error: {e}", file=sys.stderr)
        return 2
    ok = all(c["verdict"] == "pass" for c in checks)
    report = {"command": f"{args.group} {args.what}", "config": _config(args),
              "checks": checks, "verdict": "pass" if ok else "fail", "payload": payload}
    text = _dump(report)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    meta = _dump({"command": report["command"], "seconds": seconds,
                  "total_seconds": round(time.perf_counter() - t0, 3)})
    if args.meta:
        with open(args.meta, "w") as fh:
            fh.write(meta)
    else:
        sys.stderr.write(meta)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
