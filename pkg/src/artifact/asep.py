"""One- and two-layer ASEP with step initial condition.

Sites are the half-integers; a window of 2L sites -L+1/2, ..., L-1/2 is
tracked, with everything to the left full and everything to the right empty.
Site content is a bit mask: bit 0 a layer-0 (black) particle, bit 1 a
layer-1 (red) particle.  h_s(m) is the number of layer-s particles strictly
to the right of the integer m, and k(m) = h_1(m) - h_0(m).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import ONE, ZERO, ExactScalar, var

CODES = {"": 0, "B": 1, "R": 2, "BR": 3}
NAMES = {v: k for k, v in CODES.items()}


# ---------------------------------------------------------------------------
# rate tables


def one_layer_table(t, k: int = 0) -> dict[tuple, object]:
    return {(("B", ""), ("", "B")): t ** 0, (("", "B"), ("B", "")): t}


def two_layer_table(t, k: int) -> dict[tuple, object]:
    from .vertex_models import printed_two_layer_table

    return printed_two_layer_table(t, k)


def printed_table(layers: int) -> Callable:
    if layers == 1:
        return one_layer_table
    if layers == 2:
        return two_layer_table
    raise ValueError("reference tables exist for one and two layers only")


def derived_table(layers: int, k_max: int = 6) -> Callable:
    """Rate table from the eps-expansion of the projected field kernel."""
    from .vertex_models import ProjectionKernel, kernel_epsilon_expansion

    K = ProjectionKernel(layers, representatives=2)
    entries = kernel_epsilon_expansion(K, k_max=k_max if layers > 1 else 0)
    by_k: dict[int, dict] = {}
    for e in entries:
        by_k.setdefault(e.k, {})[(e.before, e.after)] = e.rate

    def table(t, k: int):
        if layers == 1:
            k = 0
        if k > k_max:
            raise ValueError(f"derived rates only cover k <= {k_max}")
        out = {}
        for key, r in by_k.get(k, {}).items():
            out[key] = r if isinstance(t, ExactScalar) and t == var("t") else r.subs({"t": t})
        return out

    return table


def rate_arrays(table: Callable, t_value: float, k_max: int, layers: int):
    """Dense arrays new_left, new_right, rate of shape (4, 4, k_max + 1, 2)."""
    nl = np.zeros((4, 4, k_max + 1, 2), dtype=np.int8)
    nr = np.zeros((4, 4, k_max + 1, 2), dtype=np.int8)
    rate = np.zeros((4, 4, k_max + 1, 2))
    for k in range(k_max + 1):
        slots: dict = {}
        for ((bl, br), (al, ar)), v in table(Fraction(t_value), k).items():
            lc, rc = CODES[bl], CODES[br]
            s = slots.get((lc, rc), 0)
            if s >= 2:
                raise ValueError("more than two moves from one pair")
            slots[(lc, rc)] = s + 1
            nl[lc, rc, k, s], nr[lc, rc, k, s] = CODES[al], CODES[ar]
            rate[lc, rc, k, s] = float(v)
    return nl, nr, rate


# ---------------------------------------------------------------------------
# states


@dataclass
class AsepState:
    layers: int
    window: int
    occupancy: np.ndarray  # (2L,) codes, index p is site p - L + 1/2
    time: float = 0.0

    @staticmethod
    def step(layers: int, window: int) -> "AsepState":
        full = (1 << layers) - 1
        occ = np.zeros(2 * window, dtype=np.int8)
        occ[:window] = full
        return AsepState(layers, window, occ)

    def height(self, layer: int, m: int) -> int:
        """Particles of ``layer`` strictly right of the integer m."""
        if m <= -self.window:
            raise ValueError("point left of the window")
        first = max(m + self.window, 0)
        return int(((self.occupancy[first:] >> layer) & 1).sum())

    def k(self, m: int) -> int:
        return self.height(1, m) - self.height(0, m)

    def sites(self, layer: int) -> list[Fraction]:
        return [Fraction(2 * p - 2 * self.window + 1, 2)
                for p in range(2 * self.window) if (self.occupancy[p] >> layer) & 1]


def _heights_batch(occ: np.ndarray, layer: int) -> np.ndarray:
    """h at every point between sites: column b is the point between sites b and b+1."""
    bits = ((occ >> layer) & 1).astype(np.int32)
    right = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1]
    return right[:, 1:]


@dataclass
class Trajectory:
    final: AsepState
    events: list = field(default_factory=list)  # (time, site, layer, event)
    touched: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["time", "site", "layer", "event"])
        for row in self.events:
            w.writerow(row)
        return buf.getvalue()


def _default_window(tau: float) -> int:
    return int(math.ceil(4 * tau)) + 8


def _run_batch(layers, t_value, tau, window, runs, rng, table, record=False):
    full = (1 << layers) - 1
    L2 = 2 * window
    occ = np.zeros((runs, L2), dtype=np.int8)
    occ[:, :window] = full
    time = np.zeros(runs)
    alive = np.ones(runs, dtype=bool)
    touched = np.zeros(runs, dtype=bool)
    k_max = L2
    nl, nr, rate = rate_arrays(table, t_value, k_max, layers)
    events: list = []
    while alive.any():
        idx = np.nonzero(alive)[0]
        o = occ[idx]
        lc, rc = o[:, :-1], o[:, 1:]
        if layers > 1:
            kk = _heights_batch(o, 1) - _heights_batch(o, 0)
            if (kk < 0).any():
                raise AssertionError("negative k in a two-layer state")
        else:
            kk = np.zeros_like(lc, dtype=np.int32)
        r = rate[lc, rc, kk]  # (n, bonds, 2)
        flat = r.reshape(len(idx), -1)
        total = flat.sum(axis=1)
        u1 = rng.random(len(idx))
        u2 = rng.random(len(idx))
        with np.errstate(divide="ignore"):
            dt = np.where(total > 0, -np.log1p(-u1) / np.where(total > 0, total, 1), np.inf)
        finish = time[idx] + dt > tau
        alive[idx[finish]] = False
        go = ~finish
        if not go.any():
            break
        g = idx[go]
        time[g] += dt[go]
        cum = np.cumsum(flat[go], axis=1)
        choice = (cum < (u2[go] * total[go])[:, None]).sum(axis=1)
        choice = np.minimum(choice, flat.shape[1] - 1)
        bond, slot = choice // 2, choice % 2
        l0, r0 = occ[g, bond], occ[g, bond + 1]
        kk_g = kk[go, bond]
        new_l = nl[l0, r0, kk_g, slot]
        new_r = nr[l0, r0, kk_g, slot]
        if record:
            for q in range(len(g)):
                for layer in range(layers):
                    before = ((int(l0[q]) >> layer) & 1, (int(r0[q]) >> layer) & 1)
                    after = ((int(new_l[q]) >> layer) & 1, (int(new_r[q]) >> layer) & 1)
                    if before != after:
                        site = Fraction(2 * int(bond[q]) - L2 + 1, 2)
                        ev = "right" if before == (1, 0) else "left"
                        events.append((int(g[q]), float(time[g[q]]),
                                       str(site if ev == "right" else site + 1), layer, ev))
        occ[g, bond] = new_l
        occ[g, bond + 1] = new_r
        touched[g] |= (bond <= 1) | (bond >= L2 - 3)
    return occ, touched, events


def simulate_batch(layers: int, t_value, tau: float, runs: int, seed: int = 0,
                   window: int | None = None, table: Callable | None = None):
    """Final occupancies of ``runs`` independent trajectories, shape (runs, 2L).

    Exact in law (Gillespie on the finite window).  If any trajectory moves
    a particle next to the window edge, the whole batch is rerun with a
    doubled window.
    """
    t = float(t_value)
    if not (0 <= t < 1):
        raise ValueError("t must lie in [0, 1)")
    table = printed_table(layers) if table is None else table
    window = _default_window(tau) if window is None else window
    while True:
        rng = np.random.Generator(np.random.Philox(key=[seed, window]))
        occ, touched, _ = _run_batch(layers, t, tau, window, runs, rng, table)
        if not touched.any():
            return occ, window
        window *= 2


def simulate(layers: int, t_value, tau: float, window: int | None = None, seed: int = 0,
             table: Callable | None = None) -> Trajectory:
    """One trajectory with its event list; ``touched`` flags a boundary hit."""
    table = printed_table(layers) if table is None else table
    window = _default_window(tau) if window is None else window
    rng = np.random.Generator(np.random.Philox(key=[seed, window]))
    occ, touched, events = _run_batch(layers, float(t_value), tau, window, 1, rng, table,
                                      record=True)
    st = AsepState(layers, window, occ[0].copy(), tau)
    return Trajectory(st, [e[1:] for e in events], bool(touched[0]))


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class HeightObservable:
    """t^{sum_i k_i h_{s_i}(m_i)} as a tuple of (m_i, s_i, k_i)."""

    terms: tuple

    @staticmethod
    def of(*terms) -> "HeightObservable":
        return HeightObservable(tuple(tuple(x) for x in terms))

    def exponent_batch(self, occ: np.ndarray, window: int) -> np.ndarray:
        total = np.zeros(occ.shape[0], dtype=np.int64)
        for m, s, k in self.terms:
            first = max(m + window, 0)
            total += k * ((occ[:, first:] >> s) & 1).sum(axis=1)
        return total

    def exponent_state(self, occ: tuple, window: int) -> int:
        total = 0
        for m, s, k in self.terms:
            first = max(m + window, 0)
            total += k * sum((x >> s) & 1 for x in occ[first:])
        return total


def mc_moment(layers: int, observable: HeightObservable, tau: float, runs: int, seed: int = 0,
              t_value=0.5, table: Callable | None = None) -> tuple[float, float]:
    """Sample mean and standard error of the observable."""
    if tau == 0:
        st = AsepState.step(layers, _default_window(0))
        e = observable.exponent_state(tuple(st.occupancy), st.window)
        return float(t_value) ** e, 0.0
    chunk = 200_000
    s1 = s2 = 0.0
    done = 0
    part = 0
    while done < runs:
        n = min(chunk, runs - done)
        occ, window = simulate_batch(layers, t_value, tau, n, seed=seed * 1_000_003 + part,
                                     table=table)
        vals = float(t_value) ** observable.exponent_batch(occ, window)
        s1 += vals.sum()
        s2 += (vals * vals).sum()
        done += n
        part += 1
    mean = s1 / runs
    var_ = max(s2 / runs - mean * mean, 0.0)
    return mean, math.sqrt(var_ / max(runs - 1, 1))


# ---------------------------------------------------------------------------
# exact tau-series from the generator


MAX_ORDER = 4


def generator_tau_series(layers: int, observable: HeightObservable, order: int, t=None,
                         table: Callable | None = None) -> list:
    """Exact Taylor coefficients c_0..c_order of E observable(tau), in Q(t).

    Forward equation on the step state: mu_n = mu_0 G^n, and the
    coefficient of tau^n is <mu_n, f>/n!.  Within ``order`` jumps only sites
    in [-order-1, order+1] change, so a window of order + 2 is exact.
    """
    if order > MAX_ORDER:
        raise ValueError(f"order {order} exceeds the cap {MAX_ORDER}")
    t = var("t") if t is None else t
    table = printed_table(layers) if table is None else table
    for m, _, _ in observable.terms:
        if abs(m) > order + 1:
            raise ValueError("observable point outside the light cone window")
    window = order + 2
    full = (1 << layers) - 1
    start = tuple([full] * window + [0] * window)
    cache: dict = {}

    def moves(state):
        if state in cache:
            return cache[state]
        out = []
        for b in range(len(state) - 1):
            right = state[b + 1:]
            k = sum((x >> 1) & 1 for x in right) - sum(x & 1 for x in right) if layers > 1 else 0
            pair = (NAMES[state[b]], NAMES[state[b + 1]])
            for (before, after), r in table(t, k).items():
                if before == pair:
                    new = list(state)
                    new[b], new[b + 1] = CODES[after[0]], CODES[after[1]]
                    out.append((tuple(new), r))
        cache[state] = out
        return out

    mu = {start: ONE}
    coeffs = []
    fact = 1
    for n in range(order + 1):
        if n:
            fact *= n
        val = ZERO
        for s, w in mu.items():
            val = val + w * t ** observable.exponent_state(s, window)
        coeffs.append(val / fact)
        if n == order:
            break
        new: dict = {}
        for s, w in mu.items():
            out = ZERO
            for s2, r in moves(s):
                new[s2] = new[s2] + w * r if s2 in new else w * r
                out = out + r
            new[s] = new[s] - w * out if s in new else -(w * out)
        mu = {s: w for s, w in new.items() if not w.is_zero()}
    return coeffs


def evaluate_series(coeffs: Sequence, tau, t_value) -> Fraction:
    total = Fraction(0)
    for n, c in enumerate(coeffs):
        total += c.evaluate({"t": Fraction(t_value)}) * Fraction(tau) ** n
    return total


def feasible(before: tuple[str, str], k: int) -> bool:
    """k stays nonnegative on both neighbouring points of the pair."""
    left, right = before
    k_left = k + ("R" in left) - ("B" in left)
    k_right = k - ("R" in right) + ("B" in right)
    return k >= 0 and k_left >= 0 and k_right >= 0


def compare_rate_tables(a: Callable, b: Callable, k_values: Sequence[int], t=None,
                        layers: int = 2) -> list:
    """Exact differences between two rate tables over the given k (feasible pairs only)."""
    t = var("t") if t is None else t
    diffs = []
    for k in k_values:
        ta, tb = a(t, k), b(t, k)
        for key in set(ta) | set(tb):
            if layers > 1 and not feasible(key[0], k):
                continue
            x, y = ta.get(key, ZERO), tb.get(key, ZERO)
            if (x - y) != 0:
                diffs.append((k, key, x, y))
    return diffs


# ---------------------------------------------------------------------------
# black-particle marginal


def _merged_counts(a: np.ndarray, b: np.ndarray, min_count: int = 5) -> np.ndarray:
    """2 x K table of value counts with sparse tail bins merged."""
    top = int(max(a.max(), b.max()))
    ca = np.bincount(a, minlength=top + 1)
    cb = np.bincount(b, minlength=top + 1)
    rows_a, rows_b, acc_a, acc_b = [], [], 0, 0
    for x, y in zip(ca, cb):
        acc_a += int(x)
        acc_b += int(y)
        if acc_a + acc_b >= 2 * min_count:
            rows_a.append(acc_a)
            rows_b.append(acc_b)
            acc_a = acc_b = 0
    if acc_a or acc_b:
        if rows_a:
            rows_a[-1] += acc_a
            rows_b[-1] += acc_b
        else:
            rows_a.append(acc_a)
            rows_b.append(acc_b)
    return np.array([rows_a, rows_b])


def black_marginal_pvalue(t_value, tau: float, runs: int, seed: int = 0, m: int = 0) -> float:
    """Chi-square p-value comparing h_0(m) of the two-layer and one-layer simulators.

    h_0(m) is the net number of black jumps across m.  Both samples are
    independent; a single bin means both are degenerate and equal (p = 1).
    """
    from scipy.stats import chi2_contingency

    occ2, w2 = simulate_batch(2, t_value, tau, runs, seed=2 * seed + 1)
    occ1, w1 = simulate_batch(1, t_value, tau, runs, seed=2 * seed)
    h2 = HeightObservable.of((m, 0, 1)).exponent_batch(occ2, w2)
    h1 = HeightObservable.of((m, 0, 1)).exponent_batch(occ1, w1)
    table = _merged_counts(h1, h2)
    if table.shape[1] < 2:
        return 1.0
    return float(chi2_contingency(table)[1])
