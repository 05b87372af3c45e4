"""Observables of Hall-Littlewood / Macdonald measures and processes.

Two modes.  Exact mode checks the identities between sums over diagrams
and coefficient extractions as truncated formal series in the x, y
variables.  Evaluation mode computes the model-level contour formulas
(six-vertex, two-layer vertex model, ASEP, two-layer ASEP, the mixed and HL
measures) at given parameters, by iterated residues and, where the contours
allow it, by quadrature or truncated series as a second route.

Contour conventions.  A variable's contour encloses 0 and the "a-type"
poles (-a_i for vertex models, -1 in the ASEP limit, -y_j for the
measures) and excludes the "b-type" poles.  When several groups of
variables are coupled by a cross factor with pole z_j = t z_i (i < j), the
group j contour sits inside the scaled contour t * (group i contour).
Residues are taken from the innermost group outwards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .algebra import (ONE, ZERO, DivergenceError, ExactScalar, FactorSpec,
                      geometric, linear_roots, residue, scalar, stabilized_coefficient,
                      var)
from .macdonald import macdonald_p, macdonald_q
from .signatures import hl_b, hl_polynomial, pad, partitions, skew_hl_terms, strip_zeros, transpose

MEASURE_IDS = ("mes-1", "mes-2", "mes-3", "mes-4", "mes-11", "mes-22", "mes-33", "mes-44")
MODEL_IDS = ("sixv-2pt", "twolayer-kpt", "asep-2pt", "twolayerAsep-kpt", "qWHL-a", "qWHL-b")
FORMULA_IDS = MEASURE_IDS + ("genHL",) + MODEL_IDS


class CapExceeded(ValueError):
    """Parameters beyond the configured enumeration caps."""


class InfeasibleContours(ValueError):
    """No admissible radii exist for the requested nested contours."""


@dataclass
class ObservableSpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in FORMULA_IDS:
            raise ValueError(f"unknown formula id {self.id!r}")


@dataclass
class VerificationReport:
    id: str
    lhs: object
    rhs: object
    verdict: bool
    metadata: dict = field(default_factory=dict)
    first_difference: object = None

    def __bool__(self):
        return self.verdict

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, dict):
                return {str(k): enc(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [enc(v) for v in x]
            if isinstance(x, (int, float, bool, str)) or x is None:
                return x
            return str(x)

        return json.dumps({"id": self.id, "verdict": "equal" if self.verdict else "different",
                           "lhs": enc(self.lhs), "rhs": enc(self.rhs),
                           "metadata": enc(self.metadata),
                           "first_difference": enc(self.first_difference)}, sort_keys=True)


# ---------------------------------------------------------------------------
# small helpers


def _names(prefix: str, n: int, start: int = 1) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(start, start + n))


def _poch(a, q, n: int) -> ExactScalar:
    """(a; q)_n."""
    out = ONE
    for i in range(n):
        out = out * (1 - a * q ** i)
    return out


def q_binomial(n: int, k: int, q) -> ExactScalar:
    if k < 0 or k > n:
        return ZERO
    return _poch(q, q, n) / (_poch(q, q, k) * _poch(q, q, n - k))


def e_r_observable(lam: Sequence[int], r: int, q, t) -> ExactScalar:
    """sum over i_1 < ... < i_r of q^{-lam_{i_1} - ...} t^{(i_1 - 1) + ...}.

    Rows past the length of lam contribute t^{i-1} each; that tail is summed
    in closed form, e_j(t^L, t^{L+1}, ...) = t^{jL + j(j-1)/2} / (t; t)_j.
    """
    lam = strip_zeros(lam)
    L = len(lam)
    zs = [q ** (-p) * t ** i for i, p in enumerate(lam)]
    fin = [ONE] + [ZERO] * r
    for z in zs:
        for j in range(r, 0, -1):
            fin[j] = fin[j] + fin[j - 1] * z
    total = ZERO
    for j in range(r + 1):
        tail = t ** (j * L + j * (j - 1) // 2) / _poch(t, t, j)
        total = total + fin[r - j] * tail
    return total


def _truncate(f: ExactScalar, groups: Sequence[Sequence[str]], D: int) -> dict[tuple, ExactScalar]:
    """Monomials of f (in all group variables) with degree <= D in every group."""
    names = [n for g in groups for n in g]
    out = {}
    for exps, c in f.monomial_coefficients(names).items():
        pos = 0
        ok = True
        for g in groups:
            if sum(exps[pos:pos + len(g)]) > D:
                ok = False
                break
            pos += len(g)
        if ok and not c.is_zero():
            out[exps] = c
    return out


def _first_difference(lhs: dict, rhs: dict):
    for key in sorted(set(lhs) | set(rhs)):
        a, b = lhs.get(key, ZERO), rhs.get(key, ZERO)
        if a != b:
            return {"monomial": key, "lhs": str(a), "rhs": str(b)}
    return None


# ---------------------------------------------------------------------------
# q-Whittaker polynomials by branching


def _horizontal_strips_below(lam: tuple, max_len: int):
    """mu with lam / mu a horizontal strip and at most max_len rows."""
    ranges = []
    for i, p in enumerate(lam):
        nxt = lam[i + 1] if i + 1 < len(lam) else 0
        ranges.append(range(nxt, p + 1))
    for mu in product(*ranges):
        mu = strip_zeros(mu)
        if len(mu) <= max_len:
            yield tuple(mu)


def qw_psi(lam: Sequence[int], mu: Sequence[int], q) -> ExactScalar:
    """Branching coefficient of the q-Whittaker P for a horizontal strip."""
    lam, mu = list(strip_zeros(lam)), list(strip_zeros(mu))
    n = len(lam)
    mu = mu + [0] * (n - len(mu))
    out = ONE
    for i in range(n):
        nxt = lam[i + 1] if i + 1 < n else 0
        out = out * q_binomial(lam[i] - nxt, lam[i] - mu[i], q)
    return out


def qw_b(lam: Sequence[int], q) -> ExactScalar:
    lam = list(strip_zeros(lam))
    out = ONE
    for i, p in enumerate(lam):
        nxt = lam[i + 1] if i + 1 < len(lam) else 0
        out = out / _poch(q, q, p - nxt)
    return out


def qw_polynomial(kind: str, lam: Sequence[int], names: Sequence[str], q=None) -> ExactScalar:
    """q-Whittaker P_lam(x; q, 0) (kind "P") or Q_lam = b_lam P_lam (kind "Q")."""
    q = var("q") if q is None else q
    lam = tuple(strip_zeros(lam))
    names = tuple(names)

    @lru_cache(maxsize=None)
    def P(shape: tuple, n: int) -> ExactScalar:
        if not shape:
            return ONE
        if n == 0 or len(shape) > n:
            return ZERO
        x = var(names[n - 1])
        total = ZERO
        for mu in _horizontal_strips_below(shape, n - 1):
            total = total + qw_psi(shape, mu, q) * x ** (sum(shape) - sum(mu)) * P(mu, n - 1)
        return total

    p = P(lam, len(names))
    return qw_b(lam, q) * p if kind == "Q" else p


# ---------------------------------------------------------------------------
# measure identities


# family ids for the diagram side
_LHS = {
    # id: (observable kind, X family, Y family)
    "mes-1": ("E", "mac-P", "mac-Q"),
    "mes-2": ("E", "mac-Q'", "mac-Q"),
    "mes-3": ("E", "mac-P", "mac-P'"),
    "mes-4": ("E", "mac-Q'", "mac-P'"),
    "mes-11": ("q", "qw-P", "qw-Q"),
    "mes-22": ("q", "hl-Q'", "qw-Q"),
    "mes-33": ("q", "qw-P", "hl-P'"),
    "mes-44": ("q", "hl-Q'", "hl-P'"),
}

# (prefactor, x-factor, y-factor) for the extraction side
_RHS = {
    "mes-1": ("pi-qt", "hl", "hl-inv"),
    "mes-2": ("e", "dual", "hl-inv"),
    "mes-3": ("e", "hl", "dual-inv"),
    "mes-4": ("pi-tq", "dual", "dual-inv"),
    "mes-11": ("pi-q0", "geo", "geo-inv"),
    "mes-22": ("e", "dual", "geo-inv"),
    "mes-33": ("e", "geo", "dual-inv"),
    "mes-44": ("pi-0q", "dual", "dual-inv"),
}


def _family(kind: str, lam, names, q, t) -> ExactScalar:
    if kind == "mac-P":
        return macdonald_p(lam, names, q=q, t=t)
    if kind == "mac-Q":
        return macdonald_q(lam, names, q=q, t=t)
    lt = transpose(lam)
    if kind == "mac-Q'":
        return macdonald_q(lt, names, q=t, t=q)
    if kind == "mac-P'":
        return macdonald_p(lt, names, q=t, t=q)
    if kind == "qw-P":
        return qw_polynomial("P", lam, names, q)
    if kind == "qw-Q":
        return qw_polynomial("Q", lam, names, q)
    if kind == "hl-Q'":
        # diagram Q: b_lam over positive parts only (padding zeros carry no factor)
        return hl_b(lt, q) * hl_polynomial("P", lt, names, t=q)
    if kind == "hl-P'":
        return hl_polynomial("P", lt, names, t=q)
    raise ValueError(kind)


def _fits(kind: str, lam, nvars: int) -> bool:
    lam = strip_zeros(lam)
    if kind.endswith("'"):
        return (lam[0] if lam else 0) <= nvars
    return len(lam) <= nvars


def measure_lhs(id: str, M: int, N: int, r: int, D: int, q=None, t=None) -> ExactScalar:
    """Sum over |lam| <= D of the observable times the two families."""
    q = var("q") if q is None else q
    t = var("t") if t is None else t
    obs, fx, fy = _LHS[id]
    xs, ys = _names("x", M), _names("y", N)
    total = ZERO
    for n in range(D + 1):
        for lam in partitions(n):
            if not (_fits(fx, lam, M) and _fits(fy, lam, N)):
                continue
            if obs == "E":
                c = e_r_observable(lam, r, q, t)
            else:
                lp = list(lam) + [0] * r
                c = q ** (-sum(lp[:r]))
            total = total + c * _family(fx, lam, xs, q, t) * _family(fy, lam, ys, q, t)
    return total


def _one_var_series(kind: str, D: int, q, t) -> list[ExactScalar]:
    """Coefficients c_0..c_D of the single-variable factor in u."""
    if kind == "hl":        # (1 - t u)/(1 - u)
        return [ONE] + [1 - t for _ in range(D)]
    if kind == "dual":      # (1 + u)/(1 + q u)
        return [ONE] + [(1 - q) * (-q) ** (n - 1) for n in range(1, D + 1)]
    if kind == "geo":       # 1/(1 - u)
        return [ONE] * (D + 1)
    qi = q ** (-1)
    if kind == "hl-inv":    # (1 - t q^-1 u)/(1 - q^-1 u)
        return [ONE] + [(1 - t) * qi ** n for n in range(1, D + 1)]
    if kind == "dual-inv":  # (1 + q^-1 u)/(1 + u)
        return [ONE] + [(qi - 1) * (-1) ** (n - 1) for n in range(1, D + 1)]
    if kind == "geo-inv":   # 1/(1 - q^-1 u)
        return [qi ** n for n in range(D + 1)]
    raise ValueError(kind)


def _graded_product(series: list[ExactScalar], names: Sequence[str], D: int) -> list[ExactScalar]:
    """A_n = [w^n] prod_i f(w x_i) for n <= D."""
    cur = [ONE] + [ZERO] * D
    for nm in names:
        x = var(nm)
        nxt = [ZERO] * (D + 1)
        for n, c in enumerate(cur):
            if c.is_zero():
                continue
            xp = ONE
            for k in range(D + 1 - n):
                if not series[k].is_zero():
                    nxt[n + k] = nxt[n + k] + c * series[k] * xp
                xp = xp * x
        cur = nxt
    return cur


def _pair_prefactor(kind: str, xs, ys, D: int, q, t) -> ExactScalar:
    """prod_{i,j} g(x_i y_j) truncated at degree D in x."""
    if kind == "e":
        coeffs = [ONE, ONE] + [ZERO] * max(D - 1, 0)
    elif kind == "pi-qt":
        coeffs = [_poch(t, q, n) / _poch(q, q, n) for n in range(D + 1)]
    elif kind == "pi-tq":
        coeffs = [_poch(q, t, n) / _poch(t, t, n) for n in range(D + 1)]
    elif kind == "pi-q0":
        coeffs = [ONE / _poch(q, q, n) for n in range(D + 1)]
    elif kind == "pi-0q":
        coeffs = [ONE] + [1 - q for _ in range(D)]
    else:
        raise ValueError(kind)
    coeffs = coeffs[:D + 1]
    total = ONE
    for x in xs:
        for y in ys:
            z = var(x) * var(y)
            g = ZERO
            zp = ONE
            for c in coeffs:
                g = g + c * zp
                zp = zp * z
            total = total * g
    parts = total.graded_parts(list(xs))
    out = ZERO
    for d, p in parts.items():
        if d <= D:
            out = out + p
    return out


def _two_sided_cross(j: int, t) -> ExactScalar:
    """[u^j] of f(u) f(1/u), f(u) = (1 - u)/(1 - t u), each side in its own direction."""
    j = abs(j)
    if j == 0:
        return 2 / (1 + t)
    return -(1 - t) * t ** (j - 1) / (1 + t)


def _kernel_measure(id: str, r: int, reach: int, q, t) -> dict[tuple, ExactScalar]:
    """w-kernel (normalisation, cross factors, powers of w) as {exponents: coefficient}."""
    if id in ("mes-1", "mes-2", "mes-3", "mes-4"):
        if r > 2:
            raise CapExceeded("the two-sided cross factor is summed in closed form for r <= 2 only")
        c = t ** (r * (r - 1) // 2) / (math.factorial(r) * (1 - t) ** r)
        if r == 1:
            return {(-1,): c}
        out = {}
        for j in range(-reach, reach + 1):
            # f(w2/w1) f(w1/w2) / (w1 w2): exponent (-j - 1, j - 1)
            out[(-j - 1, j - 1)] = c * _two_sided_cross(j, t)
        return out
    # (-1)^{r(r-1)/2} prod_{k<l} (w_k - w_l)^2 / (r! prod w^r)
    ws = [var(n) for n in _names("w", r)]
    v = ONE
    for k in range(r):
        for l in range(k + 1, r):
            v = v * (ws[k] - ws[l]) ** 2
    sign = -1 if (r * (r - 1) // 2) % 2 else 1
    c = ExactScalar(sign) / math.factorial(r)
    return {tuple(e - r for e in exps): c * coef
            for exps, coef in v.monomial_coefficients(_names("w", r)).items()}


def measure_rhs(id: str, M: int, N: int, r: int, D: int, q=None, t=None) -> ExactScalar:
    """Prefactor times [w_1^-1 ... w_r^-1] of the kernel, truncated at x-degree D."""
    q = var("q") if q is None else q
    t = var("t") if t is None else t
    pre, xk, yk = _RHS[id]
    xs, ys = _names("x", M), _names("y", N)
    A = _graded_product(_one_var_series(xk, D, q, t), xs, D)
    B = _graded_product(_one_var_series(yk, D, q, t), ys, D)
    # S[e] = sum_{n - m = e} A_n B_m
    S = {}
    for n in range(D + 1):
        for m in range(D + 1):
            if A[n].is_zero() or B[m].is_zero():
                continue
            S[n - m] = S.get(n - m, ZERO) + A[n] * B[m]
    kernel = _kernel_measure(id, r, D + 1, q, t)
    inner = ZERO
    for exps, c in kernel.items():
        # coefficient of prod w^-1 needs S-exponents e_s = -1 - exps_s
        term = c
        for e in exps:
            s = S.get(-1 - e)
            if s is None:
                term = None
                break
            term = term * s
        if term is not None:
            inner = inner + term
    total = _pair_prefactor(pre, xs, ys, D, q, t) * inner
    parts = total.graded_parts(list(xs))
    out = ZERO
    for d, p in parts.items():
        if d <= D:
            out = out + p
    return out


MEASURE_CAPS = {"M": 3, "N": 3, "r": 2, "D": 5}


def verify_measure_identity(id: str, M: int, N: int, r: int, D: int, q=None, t=None,
                            caps: dict | None = None) -> VerificationReport:
    """Exact check of one measure identity up to total x-degree D."""
    if id not in MEASURE_IDS:
        raise ValueError(f"unknown measure identity {id!r}")
    caps = dict(MEASURE_CAPS, **(caps or {}))
    for key, val in (("M", M), ("N", N), ("r", r), ("D", D)):
        if val > caps[key]:
            raise CapExceeded(f"{key} = {val} exceeds the cap {caps[key]}")
    if r < 1:
        raise ValueError("r must be positive")
    lhs = measure_lhs(id, M, N, r, D, q, t)
    rhs = measure_rhs(id, M, N, r, D, q, t)
    groups = [_names("x", M), _names("y", N)]
    L = _truncate(lhs, groups, D)
    R = _truncate(rhs, groups, D)
    diff = _first_difference(L, R)
    return VerificationReport(id, len(L), len(R), diff is None,
                              {"M": M, "N": N, "r": r, "D": D, "monomials": len(L)}, diff)


# ---------------------------------------------------------------------------
# two-level Hall-Littlewood process


PROCESS_CAPS = {"r": 2, "D": 4}


def skew_hl_diagram(kind: str, lam, nu, names: Sequence[str], t) -> ExactScalar:
    """Skew P_{lam/nu} or Q_{lam/nu} (Young diagrams) in the named variables."""
    lam, nu = strip_zeros(lam), strip_zeros(nu)
    if len(nu) > len(lam) or any(a < b for a, b in zip(lam, nu)):
        return ZERO
    if not names:
        return ONE if lam == nu else ZERO
    L = len(lam)
    if len(nu) < L:
        nu = tuple(nu) + (0,) * (L - len(nu))
    total = ZERO
    for exps, c in skew_hl_terms("P", pad(lam, L + len(names)), nu, t).items():
        for n, e in zip(names, exps):
            c = c * var(n) ** e
        total = total + c
    if kind == "Q":
        total = total * hl_b(lam, t) / hl_b(nu, t)
    return total


def _process_sets(sizes) -> tuple:
    a, b, c, d = sizes
    return (_names("x", a), _names("x", b, a + 1), _names("y", c), _names("y", d, c + 1))


def _column_sum(lam, r: int) -> int:
    lt = transpose(lam)
    return sum(lt[:r])


def process_lhs(r1: int, r2: int, D: int, sizes=(2, 1, 1, 2), q=None) -> ExactScalar:
    """Sum over diagram pairs of q^{-(column sums)} P(X1) Psi(X2, Y1) Q(Y2)."""
    q = var("q") if q is None else q
    X1, X2, Y1, Y2 = _process_sets(sizes)
    diagrams = [lam for n in range(D + 1) for lam in partitions(n)]
    P1 = {lam: hl_polynomial("P", lam, X1, t=q) for lam in diagrams}
    Q2 = {lam: hl_b(lam, q) * hl_polynomial("P", lam, Y2, t=q) for lam in diagrams}
    total = ZERO
    for l1 in diagrams:
        if P1[l1].is_zero():
            continue
        for l2 in diagrams:
            if Q2[l2].is_zero():
                continue
            psi_ = ZERO
            for nu in diagrams:
                a = skew_hl_diagram("P", l2, nu, X2, q)
                if a.is_zero():
                    continue
                psi_ = psi_ + a * skew_hl_diagram("Q", l1, nu, Y1, q)
            if psi_.is_zero():
                continue
            obs = q ** (-_column_sum(l1, r1) - _column_sum(l2, r2))
            total = total + obs * P1[l1] * psi_ * Q2[l2]
    return total


def _level_series(groups_x, groups_y, D: int, q) -> dict[int, ExactScalar]:
    """[v^e] of prod over the x groups of (1+vx)/(1+qvx) and y groups of (1+q^-1/v y)/(1+y/v)."""
    def conv(groups, kind):
        out = [ONE]
        for g in groups:
            A = _graded_product(_one_var_series(kind, D, q, q), g, D)
            nxt = [ZERO] * (len(out) + D)
            for i, a in enumerate(out):
                for j, b in enumerate(A):
                    if not (a.is_zero() or b.is_zero()):
                        nxt[i + j] = nxt[i + j] + a * b
            out = nxt
        return out
    A, B = conv(groups_x, "dual"), conv(groups_y, "dual-inv")
    S = {}
    for n, a in enumerate(A):
        for m, b in enumerate(B):
            if not (a.is_zero() or b.is_zero()):
                S[n - m] = S.get(n - m, ZERO) + a * b
    return S


def _vandermonde_kernel(r: int, offset: int) -> dict[tuple, ExactScalar]:
    """(-1)^{r(r-1)/2} prod (v_i - v_j)^2 / (r! prod v^r) as {exponents: coefficient}."""
    if r == 0:
        return {(): ONE}
    names = _names("v", r, offset + 1)
    vs = [var(n) for n in names]
    v = ONE
    for i in range(r):
        for j in range(i + 1, r):
            v = v * (vs[i] - vs[j]) ** 2
    sign = -1 if (r * (r - 1) // 2) % 2 else 1
    c = ExactScalar(sign) / math.factorial(r)
    return {tuple(e - r for e in exps): c * coef for exps, coef in v.monomial_coefficients(names).items()}


def process_rhs(r1: int, r2: int, D: int, sizes=(2, 1, 1, 2), q=None) -> ExactScalar:
    """Prefactor times [prod v^-1] of the two-level kernel."""
    q = var("q") if q is None else q
    X1, X2, Y1, Y2 = _process_sets(sizes)
    S1 = _level_series([X1], [Y1, Y2], D, q)
    S2 = _level_series([X1, X2], [Y2], D, q)
    K1, K2 = _vandermonde_kernel(r1, 0), _vandermonde_kernel(r2, r1)
    # cross factor (1 - u)/(1 - u/q), u = v_{j;2}/v_{i;1}; the degree budget bounds the power
    reach = 2 * D + 2 * max(r1, r2)
    cross = [ONE] + [(1 - q) * q ** (-n) for n in range(1, reach + 1)]
    pairs = [(i, r1 + j) for i in range(r1) for j in range(r2)]
    kernel: dict[tuple, ExactScalar] = {}
    for e1, c1 in K1.items():
        for e2, c2 in K2.items():
            kernel[e1 + e2] = kernel.get(e1 + e2, ZERO) + c1 * c2
    for i, j in pairs:
        nxt = {}
        for exps, c in kernel.items():
            for n, cn in enumerate(cross):
                e = list(exps)
                e[i] -= n
                e[j] += n
                e = tuple(e)
                nxt[e] = nxt.get(e, ZERO) + c * cn
        kernel = nxt
    levels = [S1] * r1 + [S2] * r2
    inner = ZERO
    for exps, c in kernel.items():
        term = c
        for S, e in zip(levels, exps):
            s = S.get(-1 - e)
            if s is None:
                term = None
                break
            term = term * s
        if term is not None:
            inner = inner + term
    pre = (_pair_prefactor("pi-0q", X1, Y1, D, q, q) * _pair_prefactor("pi-0q", X1, Y2, D, q, q)
           * _pair_prefactor("pi-0q", X2, Y2, D, q, q))
    return pre * inner


def verify_process_observable(levels: int, r1: int, r2: int, D: int, sizes=(2, 1, 1, 2), q=None,
                              caps: dict | None = None) -> VerificationReport:
    """Exact check of the two-level HL process observable up to degree D in every set."""
    if levels != 2:
        raise ValueError("only two-level processes are implemented")
    caps = dict(PROCESS_CAPS, **(caps or {}))
    for key, val in (("r", r1), ("r", r2), ("D", D)):
        if val > caps[key]:
            raise CapExceeded(f"{key} = {val} exceeds the cap {caps[key]}")
    if r1 < 0 or r2 < 0:
        raise ValueError("r1, r2 must be nonnegative")
    groups = _process_sets(sizes)
    L = _truncate(process_lhs(r1, r2, D, sizes, q), groups, D)
    R = _truncate(process_rhs(r1, r2, D, sizes, q), groups, D)
    diff = _first_difference(L, R)
    return VerificationReport("genHL", len(L), len(R), diff is None,
                              {"levels": 2, "r1": r1, "r2": r2, "D": D, "sizes": list(sizes),
                               "monomials": len(L)}, diff)


# ---------------------------------------------------------------------------
# iterated residues


def _frac_or_none(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, ExactScalar) and x.is_constant():
        return x.to_fraction()
    return None


class _RadiusRule:
    """Inside/outside test of a pole against nested circles |z| = R_z."""

    def __init__(self, radii: dict[str, Fraction]):
        self.radii = radii

    def points(self, f: ExactScalar, name: str, remaining: Sequence[str]) -> list:
        R = self.radii[name]
        out = []
        for root in _distinct(linear_roots(ExactScalar(f.den), name)):
            c = _frac_or_none(root)
            if c is not None:
                mod = abs(c)
            else:
                others = [n for n in remaining if n in root.variables()]
                if len(others) != 1 or not root.variables() <= set(remaining):
                    raise InfeasibleContours(f"pole {root} is not of the form c * z")
                ratio = _frac_or_none(root / var(others[0]))
                if ratio is None:
                    raise InfeasibleContours(f"pole {root} is not of the form c * z")
                mod = abs(ratio) * self.radii[others[0]]
            if mod == R:
                raise InfeasibleContours(f"pole {root} lies on the contour of {name}")
            if mod < R:
                out.append(root)
        return out


class _FixedRule:
    """The same finite set of constant points for every variable."""

    def __init__(self, pts):
        self.pts = list(pts)

    def points(self, f, name, remaining):
        return self.pts


def _distinct(roots):
    out = []
    for r in roots:
        if not any((r - s).is_zero() for s in out):
            out.append(r)
    return out


def iterated_residue(f: ExactScalar, names: Sequence[str], rule) -> ExactScalar:
    """Sum over residue branches, last name first; the other names stay free until their turn."""
    names = list(names)

    def rec(g: ExactScalar, k: int) -> ExactScalar:
        if g.is_zero():
            return ZERO
        if k == 0:
            return g
        name = names[k - 1]
        total = ZERO
        for p in rule.points(g, name, names[:k - 1]):
            total = total + rec(residue(g, name, p), k - 1)
        return total

    return rec(f, len(names))


# ---------------------------------------------------------------------------
# vertex-model integrands


@dataclass
class ModelValue:
    id: str
    value: object           # Fraction, float, ExactScalar or list of tau coefficients
    bound: object = 0       # certified absolute error (0 for exact values)
    mode: str = "exact"
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, (list, tuple)):
                return [enc(v) for v in x]
            if isinstance(x, dict):
                return {str(k): enc(v) for k, v in x.items()}
            if isinstance(x, (int, float, bool, str)) or x is None:
                return x
            return str(x)
        return json.dumps({"id": self.id, "value": enc(self.value), "bound": enc(self.bound),
                           "mode": self.mode, "metadata": enc(self.metadata)}, sort_keys=True)


def _group_names(groups) -> list[list[str]]:
    out, c = [], 0
    for g in groups:
        s = g[-1]
        out.append([f"z{c + f + 1}" for f in range(s + 1)])
        c += s + 1
    return out


def _cross_and_kernel(names_per_group, t) -> ExactScalar:
    """Cross factors between groups (earlier outer) and the in-group kernels."""
    f = ONE
    flat = [(g, n) for g, ns in enumerate(names_per_group) for n in ns]
    for a, (gi, ni) in enumerate(flat):
        for gj, nj in flat[a + 1:]:
            if gj == gi:
                continue
            zi, zj = var(ni), var(nj)
            f = f * (zi - zj) / (zi - zj / t)
    for ns in names_per_group:
        if len(ns) == 1:
            f = f / var(ns[0])
        else:
            z1, z2 = var(ns[0]), var(ns[1])
            f = f * (-(z1 - z2) ** 2) / (2 * z1 ** 2 * z2 ** 2)
    return f


def vertex_integrand(groups, a, b, t) -> tuple[ExactScalar, list[list[str]]]:
    """groups: (m, n, s) per point, outermost first; s = 1 uses two variables."""
    if len(groups) > 8 or sum(g[2] + 1 for g in groups) > 8:
        raise CapExceeded("at most 8 contour variables")
    names = _group_names(groups)
    f = _cross_and_kernel(names, t)
    power = 0
    for (m, n, s), ns in zip(groups, names):
        power += n * (s + 1)
        for nm in ns:
            z = var(nm)
            for j in range(n):
                f = f * (1 + z * b[j]) / (1 + t * z * b[j])
            for i in range(m):
                f = f * (1 + a[i] / (t * z)) / (1 + a[i] / z)
    return f * t ** power, names


def nested_radii(groups, a, b, t) -> dict[str, Fraction]:
    """Radii R_1 > R_2 > ... with a_i < R_g < 1/(t b_j) and R_{g+1} < t R_g."""
    t = Fraction(t)
    names = _group_names(groups)
    lo = [max([Fraction(a[i]) for i in range(m)], default=Fraction(0)) for m, _, _ in groups]
    hi = [min([1 / (t * Fraction(b[j])) for j in range(n)], default=None) for _, n, _ in groups]
    best = None
    for theta in (Fraction(9, 10), Fraction(3, 4), Fraction(1, 2)):
        s = t * theta
        low = max(lo[g] / s ** g for g in range(len(groups)))
        ups = [hi[g] / s ** g for g in range(len(groups)) if hi[g] is not None]
        up = min(ups) if ups else (max(low, Fraction(1)) * 4)
        if low == 0:
            low = up / 16
        if up > low and (best is None or up / low > best[0]):
            best = (up / low, s, low, up)
    if best is None:
        raise InfeasibleContours("no nested radii separate the a-poles from the b-poles")
    _, s, low, up = best
    C = Fraction(math.sqrt(float(low) * float(up))).limit_denominator(10 ** 6)
    if not low < C < up:
        C = (low + up) / 2
    return {nm: C * s ** g for g, ns in enumerate(names) for nm in ns}


def vertex_value(groups, a, b, t) -> Fraction:
    """Exact value of a vertex-model contour formula at rational parameters."""
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    t = Fraction(t)
    f, names = vertex_integrand(groups, a, b, t)
    radii = nested_radii(groups, a, b, t)
    flat = [n for ns in names for n in ns]
    return iterated_residue(f, flat, _RadiusRule(radii)).to_fraction()


def _check_points(points):
    for (m1, n1), (m2, n2) in zip(points, points[1:]):
        if m1 < m2 or n1 > n2:
            raise ValueError("points need m_1 >= m_2 and n_1 <= n_2")


def sixv_groups(points, ks) -> list[tuple]:
    _check_points(points)
    out = []
    for (m, n), k in zip(points, ks):
        if k < 0:
            raise ValueError("exponents must be nonnegative")
        out += [(m, n, 0)] * k
    return out


def twolayer_groups(n: int, ms, s) -> list[tuple]:
    if any(x < y for x, y in zip(ms, ms[1:])):
        raise ValueError("need m_1 >= m_2 >= ...")
    if any(v not in (0, 1) for v in s):
        raise ValueError("layer selectors are 0 or 1")
    return [(m, n, v) for m, v in zip(ms, s)]


# ---------------------------------------------------------------------------
# ASEP integrands


def _asep_F(z: ExactScalar, t) -> ExactScalar:
    return -(1 - t) ** 2 * z / ((1 + z) * (1 + t * z))


def asep_groups(ms, ks=None, s=None) -> list[tuple]:
    """(m, s) per group: one variable per exponent unit for asep-2pt, selectors for two layers."""
    if any(x < y for x, y in zip(ms, ms[1:])):
        raise ValueError("need m_1 >= m_2 >= ...")
    if ks is not None:
        out = []
        for m, k in zip(ms, ks):
            out += [(m, 0)] * k
        return out
    return [(m, v) for m, v in zip(ms, s)]


def asep_base(groups, t) -> tuple[ExactScalar, list[list[str]]]:
    names = _group_names(groups)
    f = _cross_and_kernel(names, t)
    for (m, _), ns in zip(groups, names):
        for nm in ns:
            z = var(nm)
            f = f * ((z + 1 / t) / (z + 1)) ** m
    return f, names


def _compositions(n: int, k: int):
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


ASEP_ORDER_CAP = 4


def asep_tau_series(groups, order: int, t=None) -> list[ExactScalar]:
    """tau^0..tau^order coefficients; each composition of the exp-jet is a separate residue tree."""
    if order > ASEP_ORDER_CAP:
        raise CapExceeded(f"order {order} exceeds the cap {ASEP_ORDER_CAP}")
    t = var("t") if t is None else scalar(t)
    base, names = asep_base(groups, t)
    flat = [n for ns in names for n in ns]
    Fs = [_asep_F(var(n), t) for n in flat]
    rule = _FixedRule([ZERO, scalar(-1)])
    out = []
    for n in range(order + 1):
        total = ZERO
        for comp in _compositions(n, len(flat)):
            f = base
            for F, p in zip(Fs, comp):
                if p:
                    f = f * F ** p / math.factorial(p)
            total = total + iterated_residue(f, flat, rule)
        out.append(total)
    return out


def _asep_numeric_integrand(groups, t: float, tau: float, Z: list[np.ndarray]) -> np.ndarray:
    names = _group_names(groups)
    flat = [(g, k) for g, ns in enumerate(names) for k in range(len(ns))]
    val = np.ones_like(Z[0])
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            if flat[a][0] != flat[b][0]:
                val = val * (Z[a] - Z[b]) / (Z[a] - Z[b] / t)
    pos = 0
    for (m, s), ns in zip(groups, names):
        if s == 0:
            val = val / Z[pos]
        else:
            z1, z2 = Z[pos], Z[pos + 1]
            val = val * (-(z1 - z2) ** 2) / (2 * z1 ** 2 * z2 ** 2)
        for f in range(s + 1):
            z = Z[pos + f]
            val = val * np.exp(-tau * (1 - t) ** 2 * z / ((1 + z) * (1 + t * z))) * ((z + 1 / t) / (z + 1)) ** m
        pos += s + 1
    return val


QUADRATURE_MAX_VARS = 3


def asep_quadrature(groups, t_value, tau: float, nodes: int = 48) -> float:
    """Nested circles: around 0 with radius (t/2)^g and around -1 with radius (1-t)/4."""
    t = float(t_value)
    names = _group_names(groups)
    K = sum(len(ns) for ns in names)
    if K > QUADRATURE_MAX_VARS:
        raise CapExceeded(f"quadrature is limited to {QUADRATURE_MAX_VARS} variables")
    theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    unit = np.exp(1j * theta)
    delta = (1 - t) / 4
    pts, wts = [], []
    for g, ns in enumerate(names):
        rho = (t / 2) ** (g + 1)
        for _ in ns:
            z = np.concatenate([rho * unit, -1 + delta * unit])
            w = np.concatenate([rho * unit, delta * unit]) / nodes   # dz / (2 pi i) = r e^{i theta} d theta / 2 pi
            pts.append(z)
            wts.append(w)
    grids = np.meshgrid(*pts, indexing="ij", sparse=True)
    wgrid = np.meshgrid(*wts, indexing="ij", sparse=True)
    W = wgrid[0]
    for w in wgrid[1:]:
        W = W * w
    val = _asep_numeric_integrand(groups, t, tau, list(grids)) * W
    return float(np.real(val.sum()))


def asep_tau_jet_value(coeffs, tau, t_value) -> Fraction:
    tau = Fraction(tau)
    total = Fraction(0)
    for n, c in enumerate(coeffs):
        cv = c.subs({"t": Fraction(t_value)}).to_fraction() if isinstance(c, ExactScalar) else Fraction(c)
        total += cv * tau ** n
    return total


# ---------------------------------------------------------------------------
# mixed q-Whittaker / HL measure and HL measure


def _qwhl_factors(id: str, w: ExactScalar, xs, ys, p) -> ExactScalar:
    f = ONE
    for x in xs:
        f = f / (1 - w * x) if id == "qWHL-a" else f * (1 + w * x) / (1 + p * w * x)
    for y in ys:
        f = f * (w + y / p) / (w + y)
    return f


def qwhl_residues(id: str, r: int, xs, ys, p) -> Fraction:
    """Contour common to all variables around 0 and the -y_j; p is q for (a) and t for (b)."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    p = Fraction(p)
    names = _names("w", r)
    ws = [var(n) for n in names]
    f = ONE
    for k in range(r):
        for l in range(k + 1, r):
            f = f * (ws[k] - ws[l]) ** 2
        f = f / ws[k] ** r * _qwhl_factors(id, ws[k], xs, ys, p)
    sign = -1 if (r * (r - 1) // 2) % 2 else 1
    f = f * Fraction(sign, math.factorial(r))
    pts = [ZERO] + _distinct([scalar(-y) for y in ys])
    return iterated_residue(f, names, _FixedRule(pts)).to_fraction()


def _qwhl_specs(id: str, name: str, xs, ys, p, c) -> list[FactorSpec]:
    specs = []
    for x in xs:
        if id == "qWHL-a":
            specs.append(geometric(name, c * x))
        else:
            specs.append(geometric(name, -p * c * x, numer=(1, c * x)))
    for y in ys:
        specs.append(geometric(name, -y / c, numer=(1, y / (c * p)), negative=True))
    return specs


def qwhl_stabilized(id: str, r: int, xs, ys, p, tol=Fraction(1, 10 ** 12)) -> tuple[Fraction, Fraction]:
    """Coefficient extraction on the torus |w| = c with certified tails."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    p = Fraction(p)
    mx = max(abs(x) * (abs(p) if id == "qWHL-b" else 1) for x in xs) if xs else Fraction(0)
    my = max(abs(y) for y in ys) if ys else Fraction(0)
    if mx * my >= 1:
        raise DivergenceError("no torus separates the x-poles from the y-poles")
    if mx == 0 or my == 0:
        c = Fraction(1) if my < 1 else my * 2
    else:
        c = Fraction(math.sqrt(float(my / mx))).limit_denominator(10 ** 6)
    if not (c * mx < 1 and my < c):
        raise DivergenceError("scaling failed")
    specs = _qwhl_specs(id, "w1", xs, ys, p, c)
    ker = _kernel_measure("mes-44", r, 0, None, None) if r > 1 else {(-1,): ONE}
    cache: dict[int, tuple[Fraction, Fraction]] = {}

    def coeff(k):
        if k not in cache:
            s = stabilized_coefficient(specs, {"w1": k}, tol)
            cache[k] = (s.value, s.bound)
        return cache[k]

    value, bound = Fraction(0), Fraction(0)
    for exps, cf in ker.items():
        cf = cf.to_fraction() if isinstance(cf, ExactScalar) else Fraction(cf)
        vals = [coeff(-1 - e) for e in exps]
        prod_v, prod_abs, prod_up = Fraction(1), Fraction(1), Fraction(1)
        for v, b in vals:
            prod_v *= v
            prod_abs *= abs(v)
            prod_up *= abs(v) + b
        value += cf * prod_v
        bound += abs(cf) * (prod_up - prod_abs)
    return value, bound


def qwhl_a_lhs(r: int, xs, ys, q) -> Fraction:
    """Finite sum over diagrams in the M x N box for the mixed measure."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    q = Fraction(q)
    M, N = len(xs), len(ys)
    xn, yn = _names("x", M), _names("y", N)
    vals = dict(zip(xn, xs))
    vals.update(zip(yn, ys))
    total = Fraction(0)
    for n in range(M * N + 1):
        for lam in partitions(n):
            if len(lam) > M or (lam and lam[0] > N):
                continue
            P = qw_polynomial("P", lam, xn, q)
            Pt = hl_polynomial("P", transpose(lam), yn, t=q)
            total += q ** (-sum(lam[:r])) * (P * Pt).evaluate(vals)
    for x in xs:
        for y in ys:
            total /= 1 + x * y
    return total


# ---------------------------------------------------------------------------
# entry point


def _ratlist(v):
    return [Fraction(x) if not isinstance(x, ExactScalar) else x.to_fraction() for x in v]


def evaluate_model_formula(id: str, params: dict, mode: str = "exact") -> ModelValue:
    """Evaluate one model-level formula.

    sixv-2pt: points [(m1, n1), (m2, n2)], ks, a, b, t.
    twolayer-kpt: n, ms, s, a, b, t.
    asep-2pt: ms, ks, t, and order (tau-series) or tau (numeric).
    twolayerAsep-kpt: ms, s, t, and order or tau.
    qWHL-a: r, x, y, q.   qWHL-b: r, x, y, t.

    Modes: exact (residues at rational parameters), stabilized (torus
    expansion with certified tails), tau-series (ASEP coefficients in Q(t)),
    numeric (ASEP nested-circle quadrature).
    """
    if id not in MODEL_IDS:
        raise ValueError(f"unknown model formula {id!r}")
    P = dict(params)
    meta = {k: v for k, v in P.items()}
    if id in ("sixv-2pt", "twolayer-kpt"):
        if mode not in ("exact", "stabilized"):
            raise ValueError(f"mode {mode!r} does not apply to {id}")
        if id == "sixv-2pt":
            groups = sixv_groups([tuple(p) for p in P["points"]], P["ks"])
        else:
            groups = twolayer_groups(P["n"], P["ms"], P["s"])
        a, b, t = _ratlist(P["a"]), _ratlist(P["b"]), Fraction(P["t"])
        need_a = max(g[0] for g in groups) if groups else 0
        need_b = max(g[1] for g in groups) if groups else 0
        if len(a) < need_a or len(b) < need_b:
            raise ValueError("not enough a_i or b_j")
        for x in a + b:
            if x <= 0:
                raise ValueError("a_i, b_j must be positive")
        radii = nested_radii(groups, a, b, t)
        meta["radii"] = {k: str(v) for k, v in radii.items()}
        return ModelValue(id, vertex_value(groups, a, b, t), Fraction(0), mode, meta)
    if id in ("asep-2pt", "twolayerAsep-kpt"):
        if id == "asep-2pt":
            groups = asep_groups(P["ms"], P["ks"])
        else:
            groups = asep_groups(P["ms"], s=P["s"])
        if mode == "tau-series":
            t = P.get("t")
            coeffs = asep_tau_series(groups, int(P.get("order", 3)), None if t is None else Fraction(t))
            return ModelValue(id, coeffs, Fraction(0), mode, meta)
        if mode == "numeric":
            t, tau = float(P["t"]), float(P["tau"])
            nodes = int(P.get("nodes", 48))
            v1 = asep_quadrature(groups, t, tau, nodes)
            v2 = asep_quadrature(groups, t, tau, 2 * nodes)
            # trapezoid error decays geometrically; report the refinement gap plus rounding
            return ModelValue(id, v2, abs(v2 - v1) + 1e-12, mode, meta)
        raise ValueError(f"mode {mode!r} does not apply to {id}")
    # qWHL
    p = Fraction(P["q"] if id == "qWHL-a" else P["t"])
    r = int(P["r"])
    if r < 1 or r > 3:
        raise CapExceeded("r must be between 1 and 3")
    xs, ys = _ratlist(P["x"]), _ratlist(P["y"])
    if mode == "exact":
        return ModelValue(id, qwhl_residues(id, r, xs, ys, p), Fraction(0), mode, meta)
    if mode == "stabilized":
        v, b = qwhl_stabilized(id, r, xs, ys, p, Fraction(P.get("tol", Fraction(1, 10 ** 12))))
        return ModelValue(id, v, b, mode, meta)
    raise ValueError(f"mode {mode!r} does not apply to {id}")
