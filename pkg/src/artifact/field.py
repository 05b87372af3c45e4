"""The HL-RSK field: sampler, Hall-Littlewood process weights, exact path laws.

Cell (i, j) with i, j >= 1 turns Lambda(i-1, j-1), Lambda(i-1, j),
Lambda(i, j-1) and an independent input r_{i,j} into Lambda(i, j) by one
step of the randomized RSK with input.  Lambda(i, j) has length j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import ONE, ZERO, ExactScalar, var
from .rsk import _Filler, _sample_filled, forward_distribution, padded_inputs
from .signatures import (Signature, interlaces, lower_neighbours, phi,
                         skew_hl_terms)


# ---------------------------------------------------------------------------
# parameters and states


@dataclass
class FieldParams:
    a: list
    b: list
    t_value: object
    extent: tuple[int, int]
    seed: int = 0

    def __post_init__(self):
        I, J = self.extent
        if len(self.a) < I or len(self.b) < J:
            raise ValueError("need a_1..a_I and b_1..b_J")
        for i in range(I):
            for j in range(J):
                ab = self.a[i] * self.b[j]
                if _is_numeric(ab) and not (0 < Fraction(ab) < 1):
                    raise ValueError(f"need 0 < a_{i + 1} b_{j + 1} < 1")

    @staticmethod
    def symbolic(extent: tuple[int, int], t=None) -> "FieldParams":
        """a_i, b_j and t as free variables."""
        I, J = extent
        return FieldParams([var(f"a{i}") for i in range(1, I + 1)],
                           [var(f"b{j}") for j in range(1, J + 1)],
                           var("t") if t is None else t, extent)

    def ab(self, i: int, j: int):
        return self.a[i - 1] * self.b[j - 1]


def _is_numeric(x) -> bool:
    return not isinstance(x, ExactScalar) or x.is_constant()


@dataclass
class FieldState:
    params: FieldParams
    values: dict = field(default_factory=dict)   # (i, j) -> Signature
    inputs: dict = field(default_factory=dict)   # (i, j) -> r_{i,j}

    def __getitem__(self, key) -> Signature:
        i, j = key
        if j == 0:
            return Signature(())
        if i == 0:
            return Signature((0,) * j)
        return self.values[(i, j)]

    def check(self):
        """Interlacing along both axes, everywhere in the extent."""
        I, J = self.params.extent
        for i in range(I + 1):
            for j in range(J + 1):
                if i < I and not interlaces(self[i, j], self[i + 1, j]):
                    raise AssertionError(f"Lambda({i},{j}) does not precede Lambda({i + 1},{j})")
                if j < J and not interlaces(self[i, j], self[i, j + 1]):
                    raise AssertionError(f"Lambda({i},{j}) does not precede Lambda({i},{j + 1})")

    def to_json(self) -> str:
        I, J = self.params.extent
        doc = {
            "params": {"a": [str(x) for x in self.params.a], "b": [str(x) for x in self.params.b],
                       "t": str(self.params.t_value), "extent": [I, J]},
            "seed": self.params.seed,
            "signatures": [[list(self[i, j]) for j in range(J + 1)] for i in range(I + 1)],
            "inputs": [[self.inputs[(i, j)] for j in range(1, J + 1)] for i in range(1, I + 1)],
        }
        return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------------------
# inputs


class InputLaw:
    """P(r = d) = (1 - t 1_{d>=1}) (ab)^d (1 - ab) / (1 - t ab)."""

    def __init__(self, a, b, t_value):
        self.ab = a * b
        self.t = t_value
        if _is_numeric(self.ab) and not (0 < Fraction(self.ab) < 1):
            raise ValueError("need 0 < ab < 1")

    def mass(self, d: int):
        if d < 0:
            return ZERO if isinstance(self.ab, ExactScalar) else Fraction(0)
        base = (1 - self.ab) / (1 - self.t * self.ab)
        return base if d == 0 else (1 - self.t) * self.ab ** d * base

    def tail(self, d: int):
        """P(r > d)."""
        if d < 0:
            return self.mass(0) * 0 + 1
        return (1 - self.t) * self.ab ** (d + 1) / (1 - self.t * self.ab)

    def sample(self, u: Fraction) -> int:
        """Inverse CDF against one uniform with exact partial sums."""
        cum, d = Fraction(0), 0
        while True:
            cum += Fraction(self.mass(d))
            if u < cum:
                return d
            d += 1


def input_law(a, b, t_value) -> InputLaw:
    return InputLaw(a, b, t_value)


# ---------------------------------------------------------------------------
# sampler


def _cells(extent):
    I, J = extent
    for n in range(2, I + J + 1):
        for i in range(max(1, n - J), min(I, n - 1) + 1):
            yield i, n - i


def _cell_rng(seed: int, i: int, j: int, J: int) -> np.random.Generator:
    key = np.array([seed, (i - 1) * J + (j - 1)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_field(params: FieldParams, forced_inputs: dict | None = None) -> FieldState:
    """Anti-diagonal sweep; every cell draws from its own keyed stream."""
    t = Fraction(params.t_value)
    state = FieldState(params)
    J = params.extent[1]
    for i, j in _cells(params.extent):
        rng = _cell_rng(params.seed, i, j, J)
        u_r = Fraction(float(rng.random()))
        if forced_inputs is not None and (i, j) in forced_inputs:
            r = forced_inputs[(i, j)]
        else:
            r = input_law(Fraction(params.a[i - 1]), Fraction(params.b[j - 1]), t).sample(u_r)
        lam, mu, nu = state[i - 1, j - 1], state[i - 1, j], state[i, j - 1]
        V = 1 + max([abs(x) for s in (lam, mu, nu) for x in s], default=0) + r
        lt, nt = padded_inputs(lam, nu, r, V)
        f = _Filler(lt, mu, nt)
        if f.m and f.n:
            rho = _sample_filled(f, t, rng.random(f.m * f.n))
        else:
            rho = f.values[f.m][f.n]
        state.values[(i, j)] = rho
        state.inputs[(i, j)] = r
    state.check()
    return state


# ---------------------------------------------------------------------------
# down-right paths and process weights


@dataclass(frozen=True)
class DownRightPath:
    """Corners (m_1, n_1), ..., (m_k, n_k) with m weakly decreasing, n weakly increasing."""

    m: tuple
    n: tuple

    def __post_init__(self):
        if len(self.m) != len(self.n) or not self.m:
            raise ValueError("need k >= 1 corners")
        if any(x < y for x, y in zip(self.m, self.m[1:])) or any(
                x > y for x, y in zip(self.n, self.n[1:])):
            raise ValueError("path is not down-right")
        if min(self.m) < 0 or min(self.n) < 0:
            raise ValueError("corners must be nonnegative")

    @property
    def points(self) -> list[tuple[int, int]]:
        """(m_1, 0), (m_1, n_1), (m_2, n_1), ..., (m_k, n_k), (0, n_k)."""
        pts = [(self.m[0], 0)]
        for l in range(len(self.m)):
            pts.append((self.m[l], self.n[l]))
            nxt_m = self.m[l + 1] if l + 1 < len(self.m) else 0
            pts.append((nxt_m, self.n[l]))
        return pts

    def region(self) -> list[tuple[int, int]]:
        """Cells (i, j), i, j >= 1, weakly south-west of some corner."""
        return sorted({(i, j) for mm, nn in zip(self.m, self.n)
                       for i in range(1, mm + 1) for j in range(1, nn + 1)})


def _full_targets(path: DownRightPath, sigs) -> dict:
    pts = path.points
    sigs = [Signature(s) for s in sigs]
    if len(sigs) == len(pts) - 2:
        sigs = [Signature(())] + sigs + [Signature((0,) * pts[-1][1])]
    if len(sigs) != len(pts):
        raise ValueError("one signature per path point")
    targets: dict = {}
    for p, s in zip(pts, sigs):
        if len(s) != p[1]:
            raise ValueError(f"signature at {p} must have length {p[1]}")
        if p in targets and targets[p] != s:
            raise ValueError(f"conflicting signatures at {p}")
        targets[p] = s
    return targets, pts, sigs


def _skew_q_same_length(upper, lower, names_values, t):
    """Q_{upper/lower} for equal lengths: chains lower < ... < upper, one variable per step."""
    k = len(names_values)
    total = ZERO

    def down(cur, step, w):
        nonlocal total
        if step == k:
            if cur == lower:
                total = total + w
            return
        x = names_values[k - 1 - step]
        for nxt in lower_neighbours(cur, len(cur), floor=lower[-1] if lower else None):
            if not _dominates(nxt, lower, k - step - 1):
                continue
            c = phi(cur, nxt, t)
            if c.is_zero():
                continue
            down(nxt, step + 1, w * c * x ** (sum(cur) - sum(nxt)))

    down(tuple(upper), 0, ONE)
    return total


def _dominates(mid, lower, steps) -> bool:
    if steps == 0:
        return tuple(mid) == tuple(lower)
    if any(a < b for a, b in zip(mid, lower)):
        return False
    # lower < ... < mid in `steps` same-length steps needs lower_i >= mid_{i+steps}
    return all(lower[i] >= mid[i + steps] for i in range(len(lower) - steps))


def _skew(kind, upper, lower, values, t):
    if len(values) == 0:
        return ONE if tuple(upper) == tuple(lower) else ZERO
    if kind == "P":
        total = ZERO
        for exps, c in skew_hl_terms("P", upper, lower, t).items():
            for x, e in zip(values, exps):
                c = c * x ** e
            total = total + c
        return total
    return _skew_q_same_length(upper, lower, list(values), t)


def hl_process_weight(path: DownRightPath, sigs: Sequence, params: FieldParams):
    """Hall-Littlewood process weight of the signatures along ``path``.

    Vertical segments carry skew P in the b's, horizontal ones skew Q in
    the a's; the normalisation is prod (1 - a_i b_j)/(1 - t a_i b_j) over
    the cells south-west of the path.
    """
    t = params.t_value
    targets, pts, sigs = _full_targets(path, sigs)
    if sigs[0] != () or any(x != 0 for x in sigs[-1]):
        raise ValueError("path must start at the empty signature and end at zeros")
    w = ONE
    for (p, s), (q, u) in zip(zip(pts, sigs), zip(pts[1:], sigs[1:])):
        if p[0] == q[0]:
            lo, hi = (s, u) if p[1] <= q[1] else (u, s)
            if not interlaces_chain(lo, hi):
                raise ValueError(f"signatures at {p} and {q} do not interlace")
            vals = [params.b[j - 1] for j in range(min(p[1], q[1]) + 1, max(p[1], q[1]) + 1)]
            w = w * _skew("P", hi, lo, vals, t)
        else:
            lo, hi = (s, u) if p[0] <= q[0] else (u, s)
            if len(lo) != len(hi) or any(a < b for a, b in zip(hi, lo)):
                raise ValueError(f"signatures at {p} and {q} do not interlace")
            vals = [params.a[i - 1] for i in range(min(p[0], q[0]) + 1, max(p[0], q[0]) + 1)]
            w = w * _skew("Q", hi, lo, vals, t)
    for i, j in path.region():
        ab = params.ab(i, j)
        w = w * (1 - ab) / (1 - t * ab)
    return w


def interlaces_chain(lower, upper) -> bool:
    """lower in Sig_k can be joined to upper in Sig_N (k <= N) by an interlacing chain."""
    d = len(upper) - len(lower)
    if d < 0:
        return False
    for i in range(len(lower)):
        if upper[i] < lower[i] or lower[i] < upper[i + d]:
            return False
    return True


# ---------------------------------------------------------------------------
# exact path law by dynamic programming


def path_marginal_probability(path: DownRightPath, sigs: Sequence, params: FieldParams):
    """Probability that the field takes the values ``sigs`` along ``path``.

    Cells south-west of the path are filled in anti-diagonal order.  The DP
    state is the set of filled signatures still needed by later cells.  Sizes
    are monotone in both directions, so every cell's size is bounded by the
    smallest target size weakly north-east of it; this bounds the inputs r.
    """
    t = params.t_value
    targets, pts, _ = _full_targets(path, sigs)
    for (i, j), s in targets.items():
        if j == 0 and s != ():
            return ZERO
        if i == 0 and any(x != 0 for x in s):
            return ZERO
    region = set(path.region())
    bound = {c: min(sum(s) for (ti, tj), s in targets.items() if ti >= c[0] and tj >= c[1])
             for c in region}
    order = sorted(region, key=lambda c: (c[0] + c[1], c[0]))
    position = {c: k for k, c in enumerate(order)}

    def last_use(c):
        i, j = c
        uses = [position[d] for d in ((i + 1, j), (i, j + 1), (i + 1, j + 1)) if d in region]
        return max(uses, default=-1)

    expiry = {c: last_use(c) for c in order}
    laws = {}

    def get(front, i, j):
        if j == 0:
            return Signature(())
        if i == 0:
            return Signature((0,) * j)
        return front[(i, j)]

    states: dict = {(): ONE}
    for k, (i, j) in enumerate(order):
        law = laws.setdefault((i, j), input_law(params.a[i - 1], params.b[j - 1], t))
        new_states: dict = {}
        for key, w in states.items():
            front = dict(key)
            lam, mu, nu = get(front, i - 1, j - 1), get(front, i - 1, j), get(front, i, j - 1)
            base = sum(mu) + sum(nu) - sum(lam)
            target = targets.get((i, j))
            for r in range(0, bound[(i, j)] - base + 1):
                if target is not None and sum(target) != base + r:
                    continue
                for rho, u in forward_distribution(lam, mu, nu, r, t).items():
                    if target is not None and rho != target:
                        continue
                    front2 = dict(front)
                    front2[(i, j)] = rho
                    front2 = {c: s for c, s in front2.items() if expiry[c] > k}
                    nkey = tuple(sorted(front2.items()))
                    add = w * law.mass(r) * u
                    new_states[nkey] = new_states[nkey] + add if nkey in new_states else add
        states = new_states
    total = ZERO
    for w in states.values():
        total = total + w
    return total
