"""Signatures, interlacing, Hall-Littlewood branching coefficients.

A signature is a non-increasing tuple of integers.  Positions outside
1..N are read through :func:`part`, which returns +inf for index 0 and -inf
beyond the length; nothing is stored for them.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Iterator, Sequence

from .algebra import (ONE, ZERO, DegreeWindow, ExactScalar, LaurentBlock,
                      var)

POS_INF = math.inf
NEG_INF = -math.inf


class Signature(tuple):
    """Non-increasing integer sequence (possibly with negative parts)."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        for a, b in zip(parts, parts[1:]):
            if a < b:
                raise ValueError(f"signature must be non-increasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def length(self) -> int:
        return len(self)

    @property
    def size(self) -> int:
        return sum(self)

    def part(self, k: int):
        return part(self, k)

    def column(self, k: int) -> int:
        return column(self, k)

    def padded(self, n: int) -> "Signature":
        return pad(self, n)

    def __repr__(self):
        return f"Signature({list(self)})"


def sig(*parts: int) -> Signature:
    if len(parts) == 1 and not isinstance(parts[0], int):
        return Signature(parts[0])
    return Signature(parts)


def part(lam: Sequence[int], k: int):
    """lambda_k with lambda_0 = +inf and lambda_k = -inf for k > N."""
    if k <= 0:
        return POS_INF
    if k > len(lam):
        return NEG_INF
    return lam[k - 1]


def column(lam: Sequence[int], k: int) -> int:
    """Number of parts >= k."""
    return sum(1 for p in lam if p >= k)


def column_counts(lam: Sequence[int], upto: int | None = None) -> dict[int, int]:
    """The map k -> lambda'_k for k = 1..upto (default: up to the largest part)."""
    if upto is None:
        upto = max(lam, default=0)
    return {k: column(lam, k) for k in range(1, upto + 1)}


def from_column_counts(counts: dict[int, int], length: int, floor: int = 0) -> Signature:
    """Rebuild a signature whose parts are all >= ``floor`` from its column counts.

    counts[k] is the number of parts >= k for k > floor.
    """
    parts = []
    for i in range(1, length + 1):
        p = floor
        k = floor + 1
        while counts.get(k, 0) >= i:
            p = k
            k += 1
        parts.append(p)
    return Signature(parts)


def pad(lam: Sequence[int], n: int) -> Signature:
    if len(lam) > n:
        if any(p != 0 for p in lam[n:]):
            raise ValueError(f"cannot pad {tuple(lam)} down to length {n}")
        return Signature(lam[:n])
    return Signature(tuple(lam) + (0,) * (n - len(lam)))


def strip_zeros(lam: Sequence[int]) -> Signature:
    return Signature(p for p in lam if p != 0)


def reversed_signature(lam: Sequence[int]) -> Signature:
    """-lambda := (-lambda_N, ..., -lambda_1)."""
    return Signature(-p for p in reversed(lam))


def transpose(lam: Sequence[int]) -> Signature:
    lam = [p for p in lam if p > 0]
    if not lam:
        return Signature(())
    return Signature(column(lam, k) for k in range(1, lam[0] + 1))


def interlaces(lower: Sequence[int], upper: Sequence[int]) -> bool:
    """lower < upper in the interlacing order (equal or one-longer upper)."""
    n, m = len(lower), len(upper)
    if m not in (n, n + 1):
        raise ValueError(f"interlacing needs len(upper) in (len(lower), len(lower)+1): {n}, {m}")
    for i in range(n):
        if not (upper[i] >= lower[i]):
            return False
        if i + 1 < m and not (lower[i] >= upper[i + 1]):
            return False
    return True


def _interlaces_safe(lower, upper) -> bool:
    if len(upper) not in (len(lower), len(lower) + 1):
        return False
    return interlaces(lower, upper)


# ---------------------------------------------------------------------------
# branching coefficients


@lru_cache(maxsize=None)
def _psi_exponents(mu: tuple, lam: tuple) -> tuple[int, ...] | None:
    if not _interlaces_safe(lam, mu):
        return None
    i = len(mu)
    out = []
    for k in range(1, i + 1):
        lk = part(lam, k)
        if lk == NEG_INF:
            break
        for j in range(k, i + 1):
            lj = part(lam, j)
            if lj != lk:
                break
            if part(mu, j + 1) < lj < part(mu, k):
                out.append(j - k + 1)
    return tuple(out)


@lru_cache(maxsize=None)
def _phi_exponents(mu: tuple, lam: tuple) -> tuple[int, ...] | None:
    if not _interlaces_safe(lam, mu):
        return None
    i = len(mu)
    out = []
    for k in range(1, i + 1):
        mk = part(mu, k)
        for j in range(k, i + 1):
            mj = part(mu, j)
            if mj != mk:
                break
            if part(lam, j) < mj < part(lam, k - 1):
                out.append(j - k + 1)
    return tuple(out)


def t_product(exponents: Iterable[int], t=None) -> ExactScalar:
    """prod (1 - t^e)."""
    t = var("t") if t is None else t
    out = ONE
    for e in exponents:
        out = out * (1 - t ** e)
    return out


@lru_cache(maxsize=None)
def _tprod_cached(exps: tuple) -> ExactScalar:
    return t_product(exps)


def psi(mu: Sequence[int], lam: Sequence[int], t=None) -> ExactScalar:
    e = _psi_exponents(tuple(mu), tuple(lam))
    if e is None:
        return ZERO
    return _tprod_cached(tuple(sorted(e))) if t is None else t_product(e, t)


def phi(mu: Sequence[int], lam: Sequence[int], t=None) -> ExactScalar:
    e = _phi_exponents(tuple(mu), tuple(lam))
    if e is None:
        return ZERO
    return _tprod_cached(tuple(sorted(e))) if t is None else t_product(e, t)


def branching_coeff(kind: str, lower: Sequence[int], upper: Sequence[int], t=None) -> ExactScalar:
    """psi_{upper/lower} or phi_{upper/lower}; zero when interlacing fails."""
    if len(upper) not in (len(lower), len(lower) + 1):
        raise ValueError("branching needs len(upper) in (len(lower), len(lower)+1)")
    if kind == "psi":
        return psi(upper, lower, t)
    if kind == "phi":
        return phi(upper, lower, t)
    raise ValueError(f"unknown branching kind {kind!r}")


def diagram_pair(upper: Sequence[int], lower: Sequence[int]) -> tuple[Signature, Signature]:
    """Young-diagram convention: lower has its nonzero rows, upper one more."""
    lo = strip_zeros(lower)
    up = pad(strip_zeros(upper), len(lo) + 1) if len(strip_zeros(upper)) <= len(lo) + 1 else None
    if up is None:
        return Signature(strip_zeros(upper)), lo
    return up, lo


def diagram_branching(kind: str, upper: Sequence[int], lower: Sequence[int], t=None) -> ExactScalar:
    """Conventional psi/phi of Young diagrams.

    psi uses lower with its nonzero rows and upper one longer.  For phi that
    choice would let the padded zero row of upper carry a factor (it gives
    phi_{0/0} = 1 - t), so phi pads both diagrams to one common length.
    """
    up, lo = diagram_pair(upper, lower)
    if len(up) != len(lo) + 1:
        return ZERO
    if kind == "phi":
        n = len(up)
        return branching_coeff(kind, pad(lo, n), up, t)
    return branching_coeff(kind, lo, up, t)


# ---------------------------------------------------------------------------
# enumeration of interlacing neighbours


def lower_neighbours(mu: Sequence[int], length: int, size: int | None = None,
                     floor: int | None = None) -> Iterator[Signature]:
    """All lam < mu of the given length (len(mu) or len(mu)-1).

    For equal lengths the last part is unbounded below; ``size`` (=|lam|)
    or ``floor`` must then be supplied.
    """
    n = len(mu)
    if length not in (n, n - 1):
        raise ValueError("length must be len(mu) or len(mu)-1")
    ranges = []
    for i in range(length):
        hi = mu[i]
        lo = mu[i + 1] if i + 1 < n else None
        ranges.append((lo, hi))
    yield from _box_enumerate(ranges, size, floor, None)


def upper_neighbours(lam: Sequence[int], length: int, size: int | None = None,
                     ceiling: int | None = None, floor: int | None = None) -> Iterator[Signature]:
    """All mu > lam of the given length (len(lam) or len(lam)+1)."""
    n = len(lam)
    if length not in (n, n + 1):
        raise ValueError("length must be len(lam) or len(lam)+1")
    ranges = []
    for i in range(length):
        lo = lam[i] if i < n else None
        hi = lam[i - 1] if i >= 1 else None
        ranges.append((lo, hi))
    yield from _box_enumerate(ranges, size, floor, ceiling)


def _box_enumerate(ranges, size, floor, ceiling):
    """Non-increasing tuples with entry i in ranges[i] (None = open)."""
    k = len(ranges)
    if k == 0:
        if size is None or size == 0:
            yield Signature(())
        return
    r = []
    for lo, hi in ranges:
        if lo is None and floor is not None:
            lo = floor
        if hi is None and ceiling is not None:
            hi = ceiling
        r.append([lo, hi])
    if any(lo is None for lo, _ in r) or any(hi is None for _, hi in r):
        if size is None:
            raise ValueError("unbounded enumeration: give size or floor/ceiling")
        # fix the single open end from the size constraint
        open_lo = [i for i, (lo, _) in enumerate(r) if lo is None]
        open_hi = [i for i, (_, hi) in enumerate(r) if hi is None]
        if len(open_lo) + len(open_hi) != 1:
            raise ValueError("cannot bound enumeration")
        idx = (open_lo or open_hi)[0]
        others = [i for i in range(k) if i != idx]
        for vals in _product_ranges([r[i] for i in others]):
            rest = size - sum(vals)
            full = list(vals)
            full.insert(idx, rest)
            lo, hi = r[idx]
            if lo is not None and rest < lo:
                continue
            if hi is not None and rest > hi:
                continue
            if all(full[i] >= full[i + 1] for i in range(k - 1)):
                yield Signature(full)
        return
    for vals in _product_ranges(r):
        if size is not None and sum(vals) != size:
            continue
        if all(vals[i] >= vals[i + 1] for i in range(k - 1)):
            yield Signature(vals)


def _product_ranges(r):
    if not r:
        yield ()
        return
    lo, hi = r[0]
    for v in range(hi, lo - 1, -1):
        for rest in _product_ranges(r[1:]):
            yield (v,) + rest


def signatures(length: int, lo: int, hi: int) -> list[Signature]:
    """All signatures of the given length with parts in [lo, hi]."""
    out = []

    def rec(prefix, top):
        if len(prefix) == length:
            out.append(Signature(prefix))
            return
        for v in range(top, lo - 1, -1):
            rec(prefix + (v,), v)

    rec((), hi)
    return out


def partitions(n: int, max_part: int | None = None) -> list[Signature]:
    """Partitions of n in reverse lexicographic order."""
    max_part = n if max_part is None else max_part
    if n == 0:
        return [Signature(())]
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append(Signature((first,) + tuple(rest)))
    return out


# ---------------------------------------------------------------------------
# skew Hall-Littlewood polynomials


def x_names(n: int, prefix: str = "x") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(1, n + 1))


def skew_hl_terms(kind: str, upper: Sequence[int], lower: Sequence[int],
                  t=None) -> dict[tuple, ExactScalar]:
    """Monomial expansion {exponent vector: coefficient} of the skew P or Q.

    ``upper`` in Sig_N and ``lower`` in Sig_k with k < N; one variable per
    level.  Chains are enumerated depth first from the top.
    """
    if kind not in ("P", "Q"):
        raise ValueError("kind must be 'P' or 'Q'")
    N, k = len(upper), len(lower)
    if N - k < 1:
        raise ValueError("upper must be strictly longer than lower")
    coeff = psi if kind == "P" else phi
    lower = tuple(lower)
    out: dict[tuple, ExactScalar] = {}

    def rec(cur: tuple, level: int, weight: ExactScalar, exps: list):
        # cur in Sig_level; go down to Sig_{level-1}
        if level == k:
            if cur == lower:
                key = tuple(reversed(exps))
                out[key] = out[key] + weight if key in out else weight
            return
        for nxt in lower_neighbours(cur, level - 1):
            # prune: nxt must still dominate lower through interlacing chains
            if level - 1 >= k and not _can_reach(nxt, lower):
                continue
            w = coeff(cur, nxt, t)
            if w.is_zero():
                continue
            rec(tuple(nxt), level - 1, weight * w, exps + [sum(cur) - sum(nxt)])

    rec(tuple(upper), N, ONE, [])
    return out


def _can_reach(mid: Sequence[int], lower: Sequence[int]) -> bool:
    # lower < ... < mid with (len(mid)-len(lower)) steps requires
    # mid_i >= lower_i and lower_i >= mid_{i + d}
    d = len(mid) - len(lower)
    for i in range(len(lower)):
        if mid[i] < lower[i]:
            return False
        if i + d < len(mid) and lower[i] < mid[i + d]:
            return False
    return True


def skew_hl(kind: str, upper: Sequence[int], lower: Sequence[int], num_variables: int,
            window: DegreeWindow | None = None, t=None, prefix: str = "x") -> LaurentBlock:
    if len(upper) - len(lower) != num_variables:
        raise ValueError("need len(upper) - len(lower) == num_variables")
    names = x_names(num_variables, prefix)
    if window is None:
        deg = max(sum(upper) - sum(lower), 0)
        window = DegreeWindow.uniform(names, 0, deg)
    return LaurentBlock(window, skew_hl_terms(kind, upper, lower, t))


def skew_hl_scalar(kind: str, upper: Sequence[int], lower: Sequence[int],
                   names: Sequence[str], t=None) -> ExactScalar:
    """The same polynomial as a scalar in the named variables."""
    if len(upper) - len(lower) != len(names):
        raise ValueError("need one variable per level")
    gens = [var(n) for n in names]
    total = ZERO
    for exps, c in skew_hl_terms(kind, upper, lower, t).items():
        m = c
        for g, e in zip(gens, exps):
            if e:
                m = m * g ** e
        total = total + m
    return total


def hl_polynomial(kind: str, lam: Sequence[int], names: Sequence[str], t=None) -> ExactScalar:
    """P_lam or Q_lam (Young diagram) in the named variables via branching."""
    n = len(names)
    lam = strip_zeros(lam)
    if len(lam) > n:
        return ZERO
    return skew_hl_scalar(kind, pad(lam, n), (), names, t)


# ---------------------------------------------------------------------------
# independent oracles


def _m_counts(lam: Sequence[int], n: int) -> list[int]:
    lam = list(lam) + [0] * (n - len(lam))
    counts = {}
    for p in lam:
        counts[p] = counts.get(p, 0) + 1
    return list(counts.values())


def hl_symmetrization(lam: Sequence[int], names: Sequence[str], t=None) -> ExactScalar:
    """P_lam(x; t) from the symmetrization formula over S_n."""
    t = var("t") if t is None else t
    n = len(names)
    lam = list(strip_zeros(lam))
    if len(lam) > n:
        return ZERO
    lam = lam + [0] * (n - len(lam))
    xs = [var(nm) for nm in names]
    vand = ONE
    for i in range(n):
        for j in range(i + 1, n):
            vand = vand * (xs[i] - xs[j])
    total = ZERO
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        y = [xs[p] for p in perm]
        term = ONE
        for i in range(n):
            if lam[i]:
                term = term * y[i] ** lam[i]
        for i in range(n):
            for j in range(i + 1, n):
                term = term * (y[i] - t * y[j])
        total = total + term if sign > 0 else total - term
    v = ONE
    for m in _m_counts(lam, n):
        for j in range(1, m + 1):
            v = v * (1 - t ** j) / (1 - t)
    return total / (vand * v)


def _perm_sign(perm) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def hl_b(lam: Sequence[int], t=None) -> ExactScalar:
    """b_lam(t) = prod over positive part values of (t; t)_{multiplicity}."""
    t = var("t") if t is None else t
    out = ONE
    counts = {}
    for p in lam:
        if p > 0:
            counts[p] = counts.get(p, 0) + 1
    for m in counts.values():
        for j in range(1, m + 1):
            out = out * (1 - t ** j)
    return out


ORACLE_CAP = 6


def oracle_poly(kind: str, lam: Sequence[int], num_variables: int, q=None, t=None,
                names: Sequence[str] | None = None, cap: int = ORACLE_CAP) -> ExactScalar:
    """Independent P_lam: HL by symmetrization, Macdonald by Gram-Schmidt."""
    lam = strip_zeros(lam)
    if sum(lam) > cap:
        raise ValueError(f"|lambda| = {sum(lam)} exceeds the oracle cap {cap}")
    names = tuple(names) if names is not None else x_names(num_variables)
    if len(names) != num_variables:
        raise ValueError("names must match num_variables")
    if kind == "hl-symmetrization":
        return hl_symmetrization(lam, names, t)
    if kind == "macdonald-gram-schmidt":
        from .macdonald import macdonald_p

        return macdonald_p(lam, names, q=q, t=t)
    raise ValueError(f"unknown oracle {kind!r}")
