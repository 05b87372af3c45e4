"""Macdonald P polynomials by Gram-Schmidt in the monomial basis.

Used only as an independent oracle for small degrees.  The scalar product
is <p_a, p_b> = delta_ab z_a prod (1 - q^a_i)/(1 - t^a_i); orthogonalising
the monomial functions along the lexicographic order (a linear extension of
dominance) yields P_lambda.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Sequence

from .algebra import ONE, ZERO, ExactScalar, var


def _partitions(n: int, max_part: int | None = None):
    max_part = n if max_part is None else max_part
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return out


def _z(nu) -> int:
    out = 1
    counts = {}
    for p in nu:
        counts[p] = counts.get(p, 0) + 1
    for p, m in counts.items():
        out *= p ** m * factorial(m)
    return out


def _power_to_monomial(nu, mu) -> int:
    """Coefficient of m_mu in p_nu: ways to pour the parts of nu into the rows of mu."""
    slots = list(mu)

    def rec(i):
        if i == len(nu):
            return 1 if all(s == 0 for s in slots) else 0
        total = 0
        for j in range(len(slots)):
            if slots[j] >= nu[i]:
                slots[j] -= nu[i]
                total += rec(i + 1)
                slots[j] += nu[i]
        return total

    return rec(0)


def _invert(mat):
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


@lru_cache(maxsize=None)
def _transition(n: int):
    parts = _partitions(n)
    R = [[_power_to_monomial(nu, mu) for mu in parts] for nu in parts]
    # p = R m, so m = R^{-1} p
    return parts, _invert(R)


def _gram(n: int, q: ExactScalar, t: ExactScalar):
    parts, Rinv = _transition(n)
    zq = []
    for nu in parts:
        w = ONE * _z(nu)
        for p in nu:
            w = w * (1 - q ** p) / (1 - t ** p)
        zq.append(w)
    k = len(parts)
    G = [[ZERO] * k for _ in range(k)]
    for a in range(k):
        for b in range(a, k):
            s = ZERO
            for c in range(k):
                if Rinv[a][c] and Rinv[b][c]:
                    s = s + zq[c] * (Rinv[a][c] * Rinv[b][c])
            G[a][b] = G[b][a] = s
    return parts, G


_CACHE: dict = {}


def macdonald_p_monomial(lam: Sequence[int], q=None, t=None) -> dict[tuple, ExactScalar]:
    """P_lam(q, t) as {mu: coefficient of m_mu}."""
    q = var("q") if q is None else q
    t = var("t") if t is None else t
    lam = tuple(p for p in lam if p)
    n = sum(lam)
    key = (lam, str(q), str(t))
    if key in _CACHE:
        return _CACHE[key]
    if n == 0:
        return {(): ONE}
    parts, G = _gram(n, q, t)
    order = list(reversed(parts))  # lexicographically increasing
    index = {p: i for i, p in enumerate(parts)}

    def ip(u: dict, v: dict) -> ExactScalar:
        s = ZERO
        for a, ca in u.items():
            for b, cb in v.items():
                g = G[index[a]][index[b]]
                if not g.is_zero():
                    s = s + ca * cb * g
        return s

    done: dict[tuple, dict] = {}
    for mu in order:
        vec = {mu: ONE}
        for nu, pv in done.items():
            c = ip({mu: ONE}, pv) / ip(pv, pv)
            if c.is_zero():
                continue
            for b, cb in pv.items():
                vec[b] = vec.get(b, ZERO) - c * cb
        done[mu] = {k: v for k, v in vec.items() if not v.is_zero()}
        _CACHE[(mu, str(q), str(t))] = done[mu]
        if mu == lam:
            break
    return done[lam]


def monomial_symmetric(mu: Sequence[int], names: Sequence[str]) -> ExactScalar:
    n = len(names)
    mu = [p for p in mu if p]
    if len(mu) > n:
        return ZERO
    exps = tuple(mu) + (0,) * (n - len(mu))
    gens = [var(nm) for nm in names]
    total = ZERO
    for e in set(permutations(exps)):
        term = ONE
        for g, k in zip(gens, e):
            if k:
                term = term * g ** k
        total = total + term
    return total


def macdonald_p(lam: Sequence[int], names: Sequence[str], q=None, t=None) -> ExactScalar:
    out = ZERO
    for mu, c in macdonald_p_monomial(lam, q, t).items():
        out = out + c * monomial_symmetric(mu, names)
    return out


def macdonald_b(lam: Sequence[int], q=None, t=None) -> ExactScalar:
    """Q_lam = b_lam P_lam with b_lam = prod over boxes of arm/leg factors."""
    q = var("q") if q is None else q
    t = var("t") if t is None else t
    lam = [p for p in lam if p]
    conj = [sum(1 for p in lam if p >= k) for k in range(1, (lam[0] if lam else 0) + 1)]
    out = ONE
    for i, row in enumerate(lam):
        for j in range(row):
            arm = row - j - 1
            leg = conj[j] - i - 1
            out = out * (1 - q ** arm * t ** (leg + 1)) / (1 - q ** (arm + 1) * t ** leg)
    return out


def macdonald_q(lam: Sequence[int], names: Sequence[str], q=None, t=None) -> ExactScalar:
    return macdonald_b(lam, q, t) * macdonald_p(lam, names, q, t)
