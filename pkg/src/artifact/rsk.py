"""Randomized Hall-Littlewood RSK: admissible grids, box weights, sampler.

Grid conventions.  Vertices are (i, j) with 0 <= i <= m (horizontal, from
lambda towards nu) and 0 <= j <= n (vertical, from lambda towards mu).
``h[i][j]`` labels the edge (i, j) -> (i+1, j) and ``v[i][j]`` the edge
(i, j) -> (i, j+1); each label is the initial position of the particle that
moves by +1 along that edge.  Box b_{i,j} has south-west corner (i, j), so
its bottom, left, top and right labels are h[i][j], v[i][j], h[i][j+1],
v[i+1][j].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .algebra import ONE, ZERO, ExactScalar, var
from .signatures import (NEG_INF, Signature, column, interlaces, lower_neighbours,
                         phi, psi, reversed_signature, signatures)

TRIVIAL, ZERO_BOX, ONE_BOX = "trivial", "zero", "one"


# ---------------------------------------------------------------------------
# queries and grids


@dataclass(frozen=True)
class TransitionQuery:
    lam: Signature
    mu: Signature
    nu: Signature
    rho: Signature | None = None
    r: int | None = None  # set for the input variant

    def __post_init__(self):
        for name in ("lam", "mu", "nu", "rho"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, Signature):
                object.__setattr__(self, name, Signature(val))

    @staticmethod
    def of(lam, mu, nu, rho=None, r=None) -> "TransitionQuery":
        return TransitionQuery(Signature(lam), Signature(mu), Signature(nu),
                               None if rho is None else Signature(rho), r)

    def validate(self):
        if self.r is None:
            n = len(self.lam)
            if not (len(self.mu) == len(self.nu) == n) or (self.rho is not None and len(self.rho) != n):
                raise ValueError("plain transition needs four signatures of one length")
            if not (interlaces(self.lam, self.mu) and interlaces(self.lam, self.nu)):
                raise ValueError("need lam < mu and lam < nu")
        else:
            if self.r < 0:
                raise ValueError("r must be nonnegative")
            n = len(self.mu)
            if len(self.lam) != n - 1 or len(self.nu) != n - 1:
                raise ValueError("input variant needs lam, nu in Sig_{N-1} and mu, rho in Sig_N")
            if self.rho is not None and len(self.rho) != n:
                raise ValueError("rho must lie in Sig_N")
            if not (interlaces(self.lam, self.mu) and interlaces(self.lam, self.nu)):
                raise ValueError("need lam < mu and lam < nu")


@dataclass(frozen=True)
class BoxClass:
    kind: str
    r: int | None = None
    rbar: int | None = None
    c_exponent: int | None = None  # c(B) = t ** c_exponent


def move(sig: Sequence[int], p: int) -> Signature:
    """Move the first particle sitting at position p by +1."""
    sig = tuple(sig)
    try:
        k = sig.index(p)
    except ValueError:
        k = -1
    if k >= 0:
        # moving the first copy keeps the sequence non-increasing
        return tuple.__new__(Signature, sig[:k] + (p + 1,) + sig[k + 1:])
    raise ValueError(f"no particle at {p} in {tuple(sig)}")


def strip_moves(lower: Sequence[int], upper: Sequence[int]) -> list[int]:
    """Increasing list of move positions turning lower into upper (equal lengths)."""
    if len(lower) != len(upper):
        raise ValueError("strip_moves needs equal lengths")
    out = []
    for a, b in zip(lower, upper):
        if b < a:
            raise ValueError("upper must dominate lower")
        out.extend(range(a, b))
    out.sort()
    if len(set(out)) != len(out):
        raise ValueError("not a horizontal strip")
    return out


@dataclass
class AdmissibleGrid:
    m: int
    n: int
    lam: Signature
    mu: Signature
    nu: Signature
    h: list  # h[i][j], 0 <= i < m, 0 <= j <= n
    v: list  # v[i][j], 0 <= i <= m, 0 <= j < n
    values: list  # values[i][j] = Lambda(i, j)

    @property
    def rho(self) -> Signature:
        return self.values[self.m][self.n]

    def h_label(self, i, j):
        if i < 0 or j < 0:
            return NEG_INF
        return self.h[i][j]

    def v_label(self, i, j):
        if i < 0 or j < 0:
            return NEG_INF
        return self.v[i][j]

    def box_class(self, i: int, j: int) -> BoxClass:
        return _box_class(self.h, self.v, self.values, self.m, self.n, i, j)


def _box_class(h, v, values, m, n, i, j) -> BoxClass:
    if i < 0 or j < 0 or i >= m or j >= n:
        return BoxClass(TRIVIAL)
    b, l, tp, rt = h[i][j], v[i][j], h[i][j + 1], v[i + 1][j]
    if b != l:
        if tp == b and rt == l:
            return BoxClass(TRIVIAL)
        raise AssertionError(f"box ({i},{j}) fits no class: {b},{l},{tp},{rt}")
    mult = sum(1 for x in values[i][j] if x == b)
    if tp == rt == b:
        return BoxClass(ZERO_BOX, b, b, mult)
    if tp == rt == b + 1:
        return BoxClass(ONE_BOX, b, b + 1, mult)
    raise AssertionError(f"box ({i},{j}) fits no class: {b},{l},{tp},{rt}")


def _box_weight(h, v, values, m, n, i, j, t):
    """Weight of b_{i,j} by the six rules, checked in order."""
    B = _box_class(h, v, values, m, n, i, j)
    if B.kind == TRIVIAL:
        return 1
    r = B.r
    left = _box_class(h, v, values, m, n, i - 1, j)
    below = _box_class(h, v, values, m, n, i, j - 1)
    diag = _box_class(h, v, values, m, n, i - 1, j - 1)
    hl = h[i - 1][j] if i > 0 else NEG_INF
    vb = v[i][j - 1] if j > 0 else NEG_INF
    diag_linked = diag.kind != TRIVIAL and diag.rbar == r - 1
    exactly_one = (hl == r - 1) != (vb == r - 1)
    both_low = hl < r - 1 and vb < r - 1
    c = t ** B.c_exponent
    if B.kind == ONE_BOX and (left.kind == ONE_BOX or below.kind == ONE_BOX):
        return 1
    if B.kind == ONE_BOX and diag_linked and diag.kind == ONE_BOX:
        return 1
    if B.kind == ZERO_BOX and diag_linked and diag.kind == ZERO_BOX:
        return 1
    if B.kind == ZERO_BOX and exactly_one:
        return t
    if B.kind == ONE_BOX and left.kind == TRIVIAL and below.kind == TRIVIAL and exactly_one:
        return 1 - t
    if B.kind == ZERO_BOX and both_low:
        return (t - c) / (1 - c)
    if B.kind == ONE_BOX and both_low:
        return (1 - t) / (1 - c)
    if B.kind == ONE_BOX and diag_linked and diag.kind == ZERO_BOX:
        return 0
    if B.kind == ZERO_BOX and diag_linked and diag.kind == ONE_BOX:
        return 0
    raise AssertionError(f"no weight rule matches box ({i},{j})")


def box_weight(grid: AdmissibleGrid, i: int, j: int, t=None):
    t = var("t") if t is None else t
    if not (0 <= i < grid.m and 0 <= j < grid.n):
        raise IndexError(f"box ({i},{j}) outside the {grid.m}x{grid.n} grid")
    w = _box_weight(grid.h, grid.v, grid.values, grid.m, grid.n, i, j, t)
    return ONE * w if isinstance(t, ExactScalar) and not isinstance(w, ExactScalar) else w


# ---------------------------------------------------------------------------
# exploring the extensions of the boundary


class _Filler:
    """Holds the partially filled grid; boxes are visited row by row."""

    def __init__(self, lam, mu, nu):
        self.lam, self.mu, self.nu = Signature(lam), Signature(mu), Signature(nu)
        hs = strip_moves(lam, nu)
        vs = strip_moves(lam, mu)
        self.m, self.n = len(hs), len(vs)
        m, n = self.m, self.n
        self.h = [[None] * (n + 1) for _ in range(m)]
        self.v = [[None] * n for _ in range(m + 1)]
        self.values = [[None] * (n + 1) for _ in range(m + 1)]
        self.values[0][0] = self.lam
        for i, p in enumerate(hs):
            self.h[i][0] = p
            self.values[i + 1][0] = move(self.values[i][0], p)
        for j, p in enumerate(vs):
            self.v[0][j] = p
            self.values[0][j + 1] = move(self.values[0][j], p)

    def options(self, i, j):
        """Case A, B or C of the grid extension step; returns (case, choices)."""
        b, l = self.h[i][j], self.v[i][j]
        if b != l:
            return "A", [(b, l)]
        left = _box_class(self.h, self.v, self.values, self.m, self.n, i - 1, j)
        below = _box_class(self.h, self.v, self.values, self.m, self.n, i, j - 1)
        if left.kind == ONE_BOX or below.kind == ONE_BOX:
            return "B", [(b + 1, b + 1)]
        return "C", [(b + 1, b + 1), (b, b)]

    def assign(self, i, j, top, right, check: bool = True) -> bool:
        """Set the top/right labels of b_{i,j}; False if no particle can move."""
        self.h[i][j + 1] = top
        self.v[i + 1][j] = right
        try:
            a = move(self.values[i + 1][j], right)
            b = move(self.values[i][j + 1], top) if check else a
        except ValueError:
            return False
        if a != b:
            raise AssertionError(f"inconsistent extension at ({i + 1},{j + 1})")
        self.values[i + 1][j + 1] = a
        return True

    def weight(self, i, j, t):
        return _box_weight(self.h, self.v, self.values, self.m, self.n, i, j, t)

    def fresh_copy(self) -> "_Filler":
        """A copy sharing the boundary, with the interior cleared."""
        g = object.__new__(_Filler)
        g.lam, g.mu, g.nu, g.m, g.n = self.lam, self.mu, self.nu, self.m, self.n
        g.h = [row[:] for row in self.h]
        g.v = [row[:] for row in self.v]
        g.values = [row[:] for row in self.values]
        return g

    def snapshot(self) -> AdmissibleGrid:
        return AdmissibleGrid(self.m, self.n, self.lam, self.mu, self.nu,
                              [row[:] for row in self.h], [row[:] for row in self.v],
                              [row[:] for row in self.values])

    def cells(self):
        return [(i, j) for j in range(self.n) for i in range(self.m)]


def _explore(filler: _Filler, t, rho=None) -> Iterator[tuple[AdmissibleGrid | Signature, object]]:
    """Depth-first over all admissible fillings, yielding (result, weight).

    With ``rho`` given, branches that cannot end at rho are pruned and full
    grids are yielded; otherwise the final signature is yielded.
    """
    cells = filler.cells()

    def rec(k, w):
        if k == len(cells):
            final = filler.values[filler.m][filler.n]
            if rho is None:
                yield final, w
            elif final == rho:
                yield filler.snapshot(), w
            return
        i, j = cells[k]
        _, choices = filler.options(i, j)
        for top, right in choices:
            if not filler.assign(i, j, top, right):
                # the zero-box option needs a second particle at the position;
                # its weight (t - c)/(1 - c) vanishes in that case
                continue
            if rho is not None and any(a > b for a, b in zip(filler.values[i + 1][j + 1], rho)):
                continue
            bw = filler.weight(i, j, t)
            if rho is None and bw == 0:
                continue
            yield from rec(k + 1, w * bw)

    yield from rec(0, 1)


def build_admissible_grid(q: TransitionQuery) -> AdmissibleGrid | None:
    """The unique admissible filling of the rectangle ending at rho, if any."""
    q.validate()
    if q.r is not None:
        raise ValueError("use extended_weights for the input variant")
    if q.rho is None:
        raise ValueError("query needs rho")
    lam, mu, nu, rho = q.lam, q.mu, q.nu, q.rho
    if sum(rho) - sum(mu) != sum(nu) - sum(lam):
        return None
    if not (interlaces(mu, rho) and interlaces(nu, rho)):
        return None
    filler = _Filler(lam, mu, nu)
    found = [g for g, _ in _explore(filler, Fraction(0), rho)]
    if len(found) > 1:
        raise AssertionError("admissible grid is not unique")
    return found[0] if found else None


def transition_weight(q: TransitionQuery, t=None):
    """U(mu -> rho | lam -> nu) as a product of box weights."""
    t = var("t") if t is None else t
    grid = build_admissible_grid(q)
    if grid is None:
        return ZERO if isinstance(t, ExactScalar) else Fraction(0)
    out = ONE if isinstance(t, ExactScalar) else Fraction(1)
    for j in range(grid.n):
        for i in range(grid.m):
            w = _box_weight(grid.h, grid.v, grid.values, grid.m, grid.n, i, j, t)
            if w == 0:
                return out * 0
            out = out * w
    return out


def transition_distribution(lam, mu, nu, t=None) -> dict[Signature, object]:
    """All rho with nonzero U(mu -> rho | lam -> nu), from one sweep over fillings."""
    t = var("t") if t is None else t
    TransitionQuery.of(lam, mu, nu).validate()
    filler = _Filler(lam, mu, nu)
    out: dict[Signature, object] = {}
    for rho, w in _explore(filler, t):
        out[rho] = out[rho] + w if rho in out else w
    if isinstance(t, ExactScalar):
        out = {k: (w if isinstance(w, ExactScalar) else ONE * w) for k, w in out.items()}
    return {k: w for k, w in out.items() if w != 0}


# ---------------------------------------------------------------------------
# refined sampler


class CellStream:
    """Counter-based uniforms from a Philox generator keyed by ``seed``.

    Cell ``c`` of grid ``g`` (grids of ``C`` cells) reads element g*C + c of
    the keyed sequence, so any cell can be reproduced without replaying the
    others.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.next_grid = 0

    def block(self, first_grid: int, grids: int, cells: int) -> np.ndarray:
        """Uniforms for ``grids`` consecutive grids, shape (grids, cells)."""
        start = first_grid * cells
        bitgen = np.random.Philox(key=self.seed)
        bitgen.advance(start // 4)  # each counter step yields four 64-bit words
        skip = start % 4
        u = np.random.Generator(bitgen).random(skip + grids * cells)[skip:]
        return u.reshape(grids, cells)

    def uniforms(self, grid_id: int, count: int) -> np.ndarray:
        return self.block(grid_id, 1, count)[0]

    def fresh_grid(self) -> int:
        g = self.next_grid
        self.next_grid += 1
        return g


def _as_t(t_value) -> Fraction:
    t = Fraction(t_value)
    if not (0 <= t < 1):
        raise ValueError(f"t_value must lie in [0, 1), got {t_value}")
    return t


def sample_rsk(lam, mu, nu, t_value, rng: CellStream, grid_id: int | None = None) -> Signature:
    """One draw of rho by filling vertices one at a time.

    Randomized steps compare the exact rational probability of the +1 move
    against the cell's uniform (converted exactly to a dyadic rational).
    """
    t = _as_t(t_value)
    TransitionQuery.of(lam, mu, nu).validate()
    f = _Filler(lam, mu, nu)
    if f.m == 0 or f.n == 0:
        return f.values[f.m][f.n]
    gid = rng.fresh_grid() if grid_id is None else grid_id
    return _sample_filled(f, t, rng.uniforms(gid, f.m * f.n))


def _sample_filled(f: _Filler, t: Fraction, us) -> Signature:
    h, v = f.h, f.v
    for j in range(f.n):
        for i in range(f.m):
            case, choices = f.options(i, j)
            if case != "C":
                f.assign(i, j, *choices[0], check=False)
                continue
            a = h[i][j]
            hl = h[i - 1][j] if i > 0 else NEG_INF
            vb = v[i][j - 1] if j > 0 else NEG_INF
            up, stay = (a + 1, a + 1), (a, a)
            if hl == vb == a - 1:
                hd, vd = h[i - 1][j - 1], v[i - 1][j - 1]
                if hd == vd == a - 1:
                    f.assign(i, j, *stay, check=False)
                elif hd == vd == a - 2:
                    f.assign(i, j, *up, check=False)
                else:
                    raise AssertionError("unexpected diagonal labels")
                continue
            if (hl == a - 1) != (vb == a - 1):
                p_up = 1 - t
            elif hl < a - 1 and vb < a - 1:
                c = t ** sum(1 for x in f.values[i][j] if x == a)
                p_up = (1 - t) / (1 - c)
            else:
                raise AssertionError("case C with unexpected neighbour labels")
            u = Fraction(float(us[j * f.m + i]))
            f.assign(i, j, *(up if u < p_up else stay), check=False)
    return f.values[f.m][f.n]


def sample_many(lam, mu, nu, t_value, samples: int, seed: int = 0,
                chunk: int = 4096) -> dict[Signature, int]:
    """Histogram of ``samples`` draws; draw s uses grid id s of the stream."""
    t = _as_t(t_value)
    TransitionQuery.of(lam, mu, nu).validate()
    base = _Filler(lam, mu, nu)
    cells = base.m * base.n
    counts: dict[Signature, int] = {}
    if cells == 0:
        return {base.values[base.m][base.n]: samples}
    stream = CellStream(seed)
    for first in range(0, samples, chunk):
        size = min(chunk, samples - first)
        block = stream.block(first, size, cells)
        for row in block:
            f = base.fresh_copy()
            rho = _sample_filled(f, t, row)
            counts[rho] = counts.get(rho, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# one-coordinate description


def _mult(sig, k) -> int:
    return column(sig, k) - column(sig, k + 1)


def trigger_position(lower: Sequence[int], upper: Sequence[int], d: int) -> int:
    """k_i: the smallest k >= d with upper'_k > upper'_{k+1} = lower'_{k+1}."""
    k = d
    hi = max(max(upper, default=d), d) + 1
    while k <= hi:
        if column(upper, k) > column(upper, k + 1) == column(lower, k + 1):
            return k
        k += 1
    raise AssertionError("no trigger position found")


def one_coordinate_step(lower, upper, d, d_prev, u_prev, t) -> dict[int, object]:
    """Law of the upper move position u_i given the lower move at d (= d_i)."""
    k = trigger_position(lower, upper, d)
    if k == d:
        return {d: 1}
    C = t ** _mult(lower, d)
    Ch = t ** _mult(upper, d)
    one_less = _mult(upper, d) == _mult(lower, d) - 1
    same = _mult(upper, d) == _mult(lower, d)
    if u_prev >= d:
        return {k: 1}
    if d_prev < u_prev == d - 1:
        return {k: 1}
    if u_prev < d - 1:
        if one_less:
            return {k: (1 - t) / (1 - C), d: (t - C) / (1 - C)}
        if same:
            return {k: 1 - t, d: t}
    elif u_prev == d_prev == d - 1:
        if one_less:
            return {k: 1 - t, d: t}
        if same:
            return {d: 1}
    raise AssertionError(f"one-coordinate table has no case (C={C}, C^={Ch})")


def one_coordinate_distribution(lam, mu, nu, t=None) -> dict[Signature, object]:
    """Law of rho from m consecutive triggered moves of the upper level."""
    t = var("t") if t is None else t
    TransitionQuery.of(lam, mu, nu).validate()
    ds = strip_moves(lam, nu)
    states = {(Signature(mu), NEG_INF): 1}
    lower = Signature(lam)
    d_prev = NEG_INF
    for d in ds:
        nxt: dict = {}
        for (upper, u_prev), w in states.items():
            for u, p in one_coordinate_step(lower, upper, d, d_prev, u_prev, t).items():
                if p == 0:
                    continue
                key = (move(upper, u), u)
                nxt[key] = nxt[key] + w * p if key in nxt else w * p
        states = nxt
        lower = move(lower, d)
        d_prev = d
    out: dict[Signature, object] = {}
    for (upper, _), w in states.items():
        out[upper] = out[upper] + w if upper in out else w
    if isinstance(t, ExactScalar):
        out = {k: (w if isinstance(w, ExactScalar) else ONE * w) for k, w in out.items()}
    return {k: w for k, w in out.items() if w != 0}


def one_coordinate_weight(q: TransitionQuery, t=None):
    q.validate()
    dist = one_coordinate_distribution(q.lam, q.mu, q.nu, t)
    zero = ZERO if t is None or isinstance(t, ExactScalar) else Fraction(0)
    return dist.get(q.rho, zero)


# ---------------------------------------------------------------------------
# input variant


def padding_depth(q: TransitionQuery) -> int:
    """V = 1 + largest absolute coordinate among mu, nu, rho (and lam) + r."""
    coords = [abs(x) for s in (q.lam, q.mu, q.nu, q.rho) if s is not None for x in s]
    return 1 + max(coords, default=0) + q.r


def padded_inputs(lam, nu, r: int, V: int) -> tuple[Signature, Signature]:
    """lam~ = lam with -V-r appended, nu~ = nu with -V appended."""
    return Signature(tuple(lam) + (-V - r,)), Signature(tuple(nu) + (-V,))


def extended_weights(variant: str, q: TransitionQuery, t=None, V: int | None = None):
    """U^r (forward) or U-hat^r (inverse) through the padded plain weights."""
    t = var("t") if t is None else t
    zero = ZERO if isinstance(t, ExactScalar) else Fraction(0)
    if q.r is None or q.rho is None:
        raise ValueError("extended_weights needs r and rho")
    q.validate()
    if sum(q.rho) - sum(q.mu) != sum(q.nu) - sum(q.lam) + q.r:
        return zero
    if not (interlaces(q.mu, q.rho) and interlaces(q.nu, q.rho)):
        return zero
    V = padding_depth(q) if V is None else V
    lt, nt = padded_inputs(q.lam, q.nu, q.r, V)
    if variant == "forward":
        return transition_weight(TransitionQuery(lt, q.mu, nt, q.rho), t)
    if variant == "inverse":
        return transition_weight(TransitionQuery(
            reversed_signature(q.rho), reversed_signature(nt), reversed_signature(q.mu),
            reversed_signature(lt)), t)
    raise ValueError(f"unknown variant {variant!r}")


def forward_distribution(lam, mu, nu, r: int, t=None) -> dict[Signature, object]:
    """rho -> U^r(mu -> rho | lam -> nu) in one sweep."""
    q = TransitionQuery.of(lam, mu, nu, None, r)
    q.validate()
    V = 1 + max([abs(x) for s in (lam, mu, nu) for x in s], default=0) + r
    lt, nt = padded_inputs(lam, nu, r, V)
    return transition_distribution(lt, mu, nt, t)


def inverse_distribution(mu, nu, rho, t=None) -> dict[tuple[Signature, int], object]:
    """(lam, r) -> U-hat^r(nu -> lam | rho -> mu) over every admissible (lam, r)."""
    t = var("t") if t is None else t
    mu, nu, rho = Signature(mu), Signature(nu), Signature(rho)
    out = {}
    base = sum(rho) - sum(mu) - sum(nu)
    for lam in _lower_common(mu, nu):
        r = base + sum(lam)
        if r < 0:
            continue
        w = extended_weights("inverse", TransitionQuery(lam, mu, nu, rho, r), t)
        if w != 0:
            out[(lam, r)] = w
    return out


def _lower_common(mu, nu) -> list[Signature]:
    """lam in Sig_{N-1} with lam < mu (one shorter) and lam < nu (equal length)."""
    out = []
    for lam in _lower_shorter(mu):
        if interlaces(lam, nu):
            out.append(lam)
    return out


def _lower_shorter(mu) -> list[Signature]:
    return list(lower_neighbours(mu, len(mu) - 1))


# ---------------------------------------------------------------------------
# flip, symmetry, Markov projection


@dataclass
class FlipCheck:
    holds: bool
    lhs: object
    rhs: object


def check_flip(q: TransitionQuery, t=None) -> FlipCheck:
    t = var("t") if t is None else t
    if q.rho is None:
        raise ValueError("check_flip needs rho")
    if q.r is None:
        q.validate()
        U = transition_weight(q, t)
        num = phi(q.nu, q.lam) * psi(q.mu, q.lam)
        den = phi(q.rho, q.mu) * psi(q.rho, q.nu)
        if den == 0:
            if U != 0:
                raise ZeroDivisionError("flip denominator vanishes at a nonzero weight")
            lhs = ZERO
        else:
            lhs = U * num / den
        rhs = transition_weight(TransitionQuery(
            reversed_signature(q.rho), reversed_signature(q.nu),
            reversed_signature(q.mu), reversed_signature(q.lam)), t)
        return FlipCheck(lhs == rhs, lhs, rhs)
    # Young-diagram form with input r
    q.validate()
    indicator = (1 - t) if q.r >= 1 else ONE
    lhs = indicator * phi(q.nu, q.lam) * psi(q.mu, q.lam) * extended_weights("forward", q, t)
    rhs = phi(q.rho, q.mu) * psi(q.rho, q.nu) * extended_weights("inverse", q, t)
    return FlipCheck(lhs == rhs, lhs, rhs)


def column_marginal(dist: dict[Signature, object], k: int, floor: int | None = None) -> dict[tuple, object]:
    """Law of (rho'_a)_{a <= k}; for signatures a ranges over [floor, k]."""
    if floor is None:
        floor = min((min(s, default=0) for s in dist), default=0)
    out: dict[tuple, object] = {}
    for rho, w in dist.items():
        key = tuple(column(rho, a) for a in range(floor, k + 1))
        out[key] = out[key] + w if key in out else w
    return out


def symmetric_pair(q: TransitionQuery, t=None):
    """(U(mu -> rho | lam -> nu), U(nu -> rho | lam -> mu))."""
    a = transition_weight(q, t)
    b = transition_weight(TransitionQuery(q.lam, q.nu, q.mu, q.rho), t)
    return a, b


def valid_triples(N: int, lo: int, hi: int) -> Iterator[tuple[Signature, Signature, Signature]]:
    """All (lam, mu, nu) in Sig_N with parts in [lo, hi], lam < mu and lam < nu."""
    sigs = signatures(N, lo, hi)
    for lam in sigs:
        ups = [s for s in sigs if interlaces(lam, s)]
        for mu in ups:
            for nu in ups:
                yield lam, mu, nu
