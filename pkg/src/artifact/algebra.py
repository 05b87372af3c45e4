"""Exact scalars and truncated Laurent series.

Scalars are reduced fractions of integer polynomials over one fixed, ordered
set of indeterminates (graded lexicographic order).  Polynomial arithmetic is
delegated to python-flint's ``fmpz_mpoly``; the fraction layer (reduction,
sign normalisation, substitution) lives here.

Series follow the usual one-sided convention f/(1-g) = f(1 + g + g^2 + ...),
with the expansion direction carried by each :class:`FactorSpec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import flint

_GROUPS = {
    "x": 8, "y": 8, "a": 8, "b": 8, "w": 6, "z": 8, "v": 8,
}
VARIABLES: tuple[str, ...] = (
    "t", "q", "eps", "ab", "tau", "c", "u", "s",
) + tuple(f"{g}{i}" for g, n in _GROUPS.items() for i in range(1, n + 1))

_CTX = flint.fmpz_mpoly_ctx.get(VARIABLES, "deglex")
_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_NV = len(VARIABLES)
_ZERO = _CTX.from_dict({})
_ONE = _CTX.from_dict({(0,) * _NV: 1})


def _const_poly(n: int):
    if n == 0:
        return _ZERO
    return _CTX.from_dict({(0,) * _NV: int(n)})


def _gen(name: str):
    if name not in _INDEX:
        raise KeyError(f"unknown indeterminate {name!r}")
    e = [0] * _NV
    e[_INDEX[name]] = 1
    return _CTX.from_dict({tuple(e): 1})


class ExactScalar:
    """Canonical fraction num/den of integer polynomials.

    The pair is reduced (gcd is a unit) and the leading coefficient of the
    denominator is positive, so equality is structural.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=None, _reduced: bool = False):
        self._hash = None
        if isinstance(num, ExactScalar) and den is None:
            self.num, self.den = num.num, num.den
            return
        n, d1 = _coerce(num)
        if den is None:
            d = d1
        else:
            dn, dd = _coerce(den)
            n, d = n * dd, d1 * dn
        if d.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            n, d = _reduce(n, d)
        self.num, self.den = n, d

    # construction helpers
    @staticmethod
    def var(name: str) -> "ExactScalar":
        return ExactScalar(_gen(name), _ONE, _reduced=True)

    @staticmethod
    def _raw(n, d) -> "ExactScalar":
        s = ExactScalar.__new__(ExactScalar)
        s.num, s.den, s._hash = n, d, None
        return s

    # predicates
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def free_of(self, names: Iterable[str]) -> bool:
        idx = [_INDEX[n] for n in names]
        dn, dd = self.num.degrees(), self.den.degrees()
        return all(dn[i] <= 0 and dd[i] <= 0 for i in idx)

    def variables(self) -> set[str]:
        dn, dd = self.num.degrees(), self.den.degrees()
        return {VARIABLES[i] for i in range(_NV) if dn[i] > 0 or dd[i] > 0}

    # arithmetic
    def __add__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        if self.num.is_zero():
            return o
        if o.num.is_zero():
            return self
        if self.den.is_one() and o.den.is_one():
            return ExactScalar._raw(self.num + o.num, _ONE)
        if self.den == o.den:
            n, d = _reduce(self.num + o.num, self.den)
            return ExactScalar._raw(n, d)
        g = self.den.gcd(o.den)
        if g.is_one():
            n = self.num * o.den + o.num * self.den
            return ExactScalar._raw(*_reduce(n, self.den * o.den))
        sd, od = self.den / g, o.den / g
        n = self.num * od + o.num * sd
        return ExactScalar._raw(*_reduce(n, sd * o.den))

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._raw(-self.num, self.den)

    def __sub__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        if self.num.is_zero() or o.num.is_zero():
            return ZERO
        if self.den.is_one() and o.den.is_one():
            return ExactScalar._raw(self.num * o.num, _ONE)
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n = (self.num / g1) * (o.num / g2)
        d = (self.den / g2) * (o.den / g1)
        return ExactScalar._raw(*_sign(n, d))

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return ExactScalar._raw(*_sign(self.den, self.num))

    def __truediv__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return ONE
        return ExactScalar._raw(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = _as_scalar(other)
        if o is NotImplemented:
            return False
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((str(self.num), str(self.den)))
        return self._hash

    # conversions
    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        n = int(self.num.coefficient(0)) if not self.num.is_zero() else 0
        d = int(self.den.coefficient(0))
        return Fraction(n, d)

    def __float__(self):
        return float(self.to_fraction())

    def __str__(self):
        if self.den.is_one():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"ExactScalar({self})"

    def to_sympy(self):
        import sympy

        syms = {n: sympy.Symbol(n) for n in VARIABLES}
        return sympy.sympify(str(self.num), locals=syms) / sympy.sympify(
            str(self.den), locals=syms)

    # substitution
    def subs(self, values: Mapping[str, object]) -> "ExactScalar":
        """Substitute indeterminates by ints, Fractions or scalars."""
        n, d = self.num, self.den
        res_n, res_d = n, d
        scale_n, scale_d = _ONE, _ONE
        for name, val in values.items():
            i = _INDEX[name]
            vn, vd = _coerce(val)
            if vd.is_one() and vn.is_constant():
                c = int(vn.coefficient(0)) if not vn.is_zero() else 0
                res_n = res_n.subs({name: c})
                res_d = res_d.subs({name: c})
                continue
            dn, dd = res_n.degrees()[i], res_d.degrees()[i]
            res_n = _homog(res_n, i, vn, vd, dn)
            res_d = _homog(res_d, i, vn, vd, dd)
            if dd > dn:
                scale_n = scale_n * vd ** (dd - dn)
            elif dn > dd:
                scale_d = scale_d * vd ** (dn - dd)
        return ExactScalar(res_n * scale_n, res_d * scale_d)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        return self.subs(values).to_fraction()

    def derivative(self, name: str) -> "ExactScalar":
        i = _INDEX[name]
        dn = self.num.derivative(i)
        dd = self.den.derivative(i)
        return ExactScalar(dn * self.den - self.num * dd, self.den * self.den)

    # polynomial views (denominator must be free of the named variables)
    def graded_parts(self, names: Sequence[str]) -> dict[int, "ExactScalar"]:
        """Split by total degree in ``names``; denominator must be free of them."""
        if not ExactScalar._raw(self.den, _ONE).free_of(names):
            raise ValueError("denominator depends on the grading variables")
        idx = [_INDEX[n] for n in names]
        parts: dict[int, dict] = {}
        for exps, c in self.num.to_dict().items():
            deg = sum(exps[i] for i in idx)
            parts.setdefault(deg, {})[exps] = c
        return {k: ExactScalar(_CTX.from_dict(v), self.den)
                for k, v in parts.items()}

    def monomial_coefficients(self, names: Sequence[str]) -> dict[tuple, "ExactScalar"]:
        """Coefficients of monomials in ``names`` (denominator free of them)."""
        if not ExactScalar._raw(self.den, _ONE).free_of(names):
            raise ValueError("denominator depends on the extraction variables")
        idx = [_INDEX[n] for n in names]
        parts: dict[tuple, dict] = {}
        for exps, c in self.num.to_dict().items():
            key = tuple(exps[i] for i in idx)
            rest = list(exps)
            for i in idx:
                rest[i] = 0
            parts.setdefault(key, {})[tuple(rest)] = c
        return {k: ExactScalar(_CTX.from_dict(v), self.den)
                for k, v in parts.items()}


def _coerce(x):
    if isinstance(x, ExactScalar):
        return x.num, x.den
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return _const_poly(x), _ONE
    if isinstance(x, Fraction):
        return _const_poly(x.numerator), _const_poly(x.denominator)
    if isinstance(x, flint.fmpz_mpoly):
        return x, _ONE
    if isinstance(x, str):
        return _gen(x), _ONE
    raise TypeError(f"cannot convert {type(x).__name__} to ExactScalar")


def _as_scalar(x):
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        n, d = _coerce(x)
        return ExactScalar._raw(n, d)
    return NotImplemented


def _sign(n, d):
    if d.leading_coefficient() < 0:
        return -n, -d
    return n, d


def _reduce(n, d):
    if n.is_zero():
        return _ZERO, _ONE
    if d.is_one():
        return n, d
    g = n.gcd(d)
    if not g.is_one():
        n, d = n / g, d / g
    return _sign(n, d)


def _homog(poly, i, pn, pd, deg):
    """Return pd^deg * poly(x_i = pn/pd) as a polynomial."""
    if deg == 0:
        return poly
    groups: dict[int, dict] = {}
    for exps, c in poly.to_dict().items():
        e = exps[i]
        rest = list(exps)
        rest[i] = 0
        groups.setdefault(e, {})[tuple(rest)] = c
    total = _ZERO
    for e, terms in groups.items():
        total += _CTX.from_dict(terms) * pn ** e * pd ** (deg - e)
    return total


ZERO = ExactScalar._raw(_ZERO, _ONE)
ONE = ExactScalar._raw(_ONE, _ONE)


def var(name: str) -> ExactScalar:
    return ExactScalar.var(name)


def scalar(x) -> ExactScalar:
    return x if isinstance(x, ExactScalar) else ExactScalar(x)


def parse_scalar(text: str) -> ExactScalar:
    """Inverse of ``str`` for scalars (via sympy's parser)."""
    import sympy

    syms = {n: sympy.Symbol(n) for n in VARIABLES}
    expr = sympy.together(sympy.sympify(text, locals=syms))
    num, den = sympy.fraction(expr)
    return ExactScalar(_from_sympy_poly(num, syms), _from_sympy_poly(den, syms))


def _from_sympy_poly(expr, syms):
    import sympy

    gens = [syms[n] for n in VARIABLES]
    p = sympy.Poly(sympy.expand(expr), *gens)
    lcm = 1
    for c in p.coeffs():
        lcm = math.lcm(lcm, int(sympy.Rational(c).q))
    terms = {m: int(sympy.Rational(c) * lcm) for m, c in p.terms()}
    return ExactScalar(_CTX.from_dict(terms), lcm)


# ---------------------------------------------------------------------------
# Residues of rational functions in one indeterminate


def residue(f: ExactScalar, name: str, point) -> ExactScalar:
    """Residue of ``f`` (as a function of ``name``) at ``name = point``.

    ``point`` is any scalar free of ``name``; the other indeterminates are
    treated as parameters.
    """
    i = _INDEX[name]
    p = scalar(point)
    if not p.free_of([name]):
        raise ValueError("residue point depends on the variable")
    if "u" in f.variables() and name != "u":
        raise ValueError("'u' is reserved for residue computations")
    # linear factor (name - p) scaled to an integer polynomial
    lin = _gen(name) * p.den - p.num
    den = f.den
    order = 0
    while True:
        try:
            qt = den / lin
        except Exception:
            break
        den = qt
        order += 1
    if order == 0:
        return ZERO
    # f = num / (lin^order * den) with lin = p.den*(z - p)
    # expand around z = p + u up to u^(order-1)
    u = _gen("u")
    shifted_n = _shift(f.num, i, p, u)
    shifted_d = _shift(den, i, p, u)
    nc = _u_coeffs(shifted_n, order)
    dc = _u_coeffs(shifted_d, order)
    inv = _series_inverse(dc, order)
    coeff = ZERO
    k = order - 1
    for j in range(order):
        if nc[j].is_zero() or inv[k - j].is_zero():
            continue
        coeff = coeff + nc[j] * inv[k - j]
    return coeff / ExactScalar(p.den) ** order


def _shift(poly, i, p: ExactScalar, u):
    """poly(x_i = p + u) as an ExactScalar (denominator a power of p.den)."""
    deg = poly.degrees()[i]
    # p + u = (p.num + p.den*u)/p.den
    return ExactScalar(_homog(poly, i, p.num + p.den * u, p.den, deg),
                       p.den ** deg)


def _u_coeffs(s: ExactScalar, order: int) -> list[ExactScalar]:
    iu = _INDEX["u"]
    parts: list[dict] = [dict() for _ in range(order)]
    for exps, c in s.num.to_dict().items():
        e = exps[iu]
        if e < order:
            rest = list(exps)
            rest[iu] = 0
            parts[e][tuple(rest)] = c
    return [ExactScalar(_CTX.from_dict(d), s.den) for d in parts]


def _series_inverse(c: list[ExactScalar], order: int) -> list[ExactScalar]:
    if c[0].is_zero():
        raise ZeroDivisionError("pole order miscounted")
    inv0 = c[0].inverse()
    out = [inv0]
    for k in range(1, order):
        acc = ZERO
        for j in range(1, k + 1):
            if j < len(c) and not c[j].is_zero():
                acc = acc + c[j] * out[k - j]
        out.append(-acc * inv0)
    return out


def linear_roots(f_den: ExactScalar, name: str) -> list[ExactScalar]:
    """Roots in ``name`` of the irreducible factors of degree one."""
    i = _INDEX[name]
    roots = []
    _, facs = f_den.num.factor()
    for fac, _mult in facs:
        d = fac.degrees()[i]
        if d == 0:
            continue
        if d > 1:
            raise ValueError(f"non-linear denominator factor {fac} in {name}")
        parts = ExactScalar(fac).monomial_coefficients([name])
        c1 = parts.get((1,), ZERO)
        c0 = parts.get((0,), ZERO)
        roots.append(-c0 / c1)
    return roots


# ---------------------------------------------------------------------------
# Truncated Laurent series


class WindowOverflow(ValueError):
    """The requested coefficient lies outside what the blocks can produce."""


class DivergenceError(ValueError):
    """A geometric ratio has absolute value at least one."""


@dataclass(frozen=True)
class DegreeWindow:
    """Per-variable exponent bounds, inclusive on both ends."""

    names: tuple[str, ...]
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.names) == len(self.lo) == len(self.hi)):
            raise ValueError("window arity mismatch")
        for n, a, b in zip(self.names, self.lo, self.hi):
            if a > b:
                raise ValueError(f"empty window for {n}: [{a}, {b}]")

    @staticmethod
    def of(**bounds: tuple[int, int]) -> "DegreeWindow":
        names = tuple(bounds)
        return DegreeWindow(names, tuple(bounds[n][0] for n in names),
                            tuple(bounds[n][1] for n in names))

    @staticmethod
    def uniform(names: Sequence[str], lo: int, hi: int) -> "DegreeWindow":
        k = len(names)
        return DegreeWindow(tuple(names), (lo,) * k, (hi,) * k)

    def contains(self, exp: Sequence[int]) -> bool:
        return all(a <= e <= b for e, a, b in zip(exp, self.lo, self.hi))

    def bounds(self, name: str) -> tuple[int, int]:
        i = self.names.index(name)
        return self.lo[i], self.hi[i]


class LaurentBlock:
    """Finite set of Laurent monomials with scalar coefficients, inside a window."""

    __slots__ = ("window", "coeffs")

    def __init__(self, window: DegreeWindow, coeffs: Mapping[tuple, ExactScalar] | None = None):
        self.window = window
        self.coeffs: dict[tuple, ExactScalar] = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            if len(e) != len(window.names):
                raise ValueError("exponent arity mismatch")
            c = scalar(c)
            if not window.contains(e) or c.is_zero():
                continue
            self.coeffs[e] = c

    @property
    def names(self) -> tuple[str, ...]:
        return self.window.names

    @staticmethod
    def constant(window: DegreeWindow, c) -> "LaurentBlock":
        return LaurentBlock(window, {(0,) * len(window.names): scalar(c)})

    def coefficient(self, exp: Sequence[int]) -> ExactScalar:
        return self.coeffs.get(tuple(exp), ZERO)

    def exponent_range(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if not self.coeffs:
            z = (0,) * len(self.names)
            return z, z
        k = len(self.names)
        lo = tuple(min(e[i] for e in self.coeffs) for i in range(k))
        hi = tuple(max(e[i] for e in self.coeffs) for i in range(k))
        return lo, hi

    def clip(self, window: DegreeWindow) -> "LaurentBlock":
        return LaurentBlock(window, self.coeffs)

    def __add__(self, other: "LaurentBlock") -> "LaurentBlock":
        _same_names(self, other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return LaurentBlock(self.window, out)

    def scale(self, c) -> "LaurentBlock":
        c = scalar(c)
        return LaurentBlock(self.window, {e: v * c for e, v in self.coeffs.items()})

    def multiply(self, other: "LaurentBlock", target: DegreeWindow | None = None) -> "LaurentBlock":
        """Product, keeping only terms inside ``target`` (default: own window)."""
        _same_names(self, other)
        target = target or self.window
        out: dict[tuple, ExactScalar] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not target.contains(e):
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return LaurentBlock(target, out)

    def __eq__(self, other):
        if not isinstance(other, LaurentBlock) or self.names != other.names:
            return False
        return self.coeffs == other.coeffs

    def __repr__(self):
        return f"LaurentBlock({self.names}, {len(self.coeffs)} terms)"


def _same_names(a: LaurentBlock, b: LaurentBlock):
    if a.names != b.names:
        raise ValueError(f"variable mismatch {a.names} vs {b.names}")


FACTOR_KINDS = ("geometric-positive", "geometric-negative", "polynomial",
                "power-of-ratio", "exp-series")


@dataclass(frozen=True)
class FactorSpec:
    """One multiplicative factor and the direction of its expansion.

    geometric-positive / geometric-negative:
        (sum_i numer[i] * v^(s*i)) / (1 - ratio * v^s) with s = +1 / -1,
        expanded in nonnegative powers of ``ratio * v^s``.
    polynomial:
        sum_e terms[e] * v^e (Laurent polynomial, ``terms`` a mapping).
    power-of-ratio:
        ((numer[0] + numer[1] v) / (denom[0] + denom[1] v))^power; ``direction``
        "positive" expands around v = 0, "negative" around v = infinity.
    exp-series:
        exp(tau * coeff * prod(inner)) truncated at tau^order.
    """

    kind: str
    var: str
    numer: tuple = (1,)
    ratio: object = 0
    terms: tuple = ()
    denom: tuple = ()
    power: int = 1
    direction: str = "positive"
    coeff: object = 1
    inner: tuple = ()
    order: int = 0
    tau_name: str = "tau"

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.kind == "power-of-ratio":
            if len(self.numer) != 2 or len(self.denom) != 2:
                raise ValueError("power-of-ratio needs two numerator and two denominator coefficients")
            if self.direction not in ("positive", "negative"):
                raise ValueError("direction must be 'positive' or 'negative'")
            lead = self.denom[0] if self.direction == "positive" else self.denom[1]
            if scalar(lead).is_zero() and self.power > 0:
                raise ValueError("expansion point is a pole")
        if self.kind == "exp-series" and self.order < 0:
            raise ValueError("negative truncation order")


def geometric(var_name: str, ratio, numer=(1,), negative: bool = False) -> FactorSpec:
    kind = "geometric-negative" if negative else "geometric-positive"
    return FactorSpec(kind, var_name, numer=tuple(numer), ratio=ratio)


def polynomial(var_name: str, terms: Mapping[int, object]) -> FactorSpec:
    return FactorSpec("polynomial", var_name, terms=tuple(sorted(terms.items())))


def _one_var_window(window: DegreeWindow, name: str) -> tuple[int, int, int]:
    if name not in window.names:
        raise ValueError(f"variable {name} not in window")
    i = window.names.index(name)
    return i, window.lo[i], window.hi[i]


def _series_block(window: DegreeWindow, i: int, coeffs: Mapping[int, ExactScalar]) -> LaurentBlock:
    k = len(window.names)
    out = {}
    for e, c in coeffs.items():
        exp = [0] * k
        exp[i] = e
        out[tuple(exp)] = c
    return LaurentBlock(window, out)


def expand_factor(spec: FactorSpec, window: DegreeWindow) -> LaurentBlock:
    """Truncation to ``window`` of the unique expansion of ``spec``."""
    i, lo, hi = _one_var_window(window, spec.var)
    coeffs: dict[int, ExactScalar] = {}
    if spec.kind in ("geometric-positive", "geometric-negative"):
        s = 1 if spec.kind == "geometric-positive" else -1
        g = scalar(spec.ratio)
        numer = [scalar(c) for c in spec.numer]
        reach = hi if s > 0 else -lo
        gpow = [ONE]
        for _ in range(max(reach, 0)):
            gpow.append(gpow[-1] * g)
        for n in range(0, max(reach, -1) + 1):
            c = ZERO
            for j, f in enumerate(numer):
                if n - j >= 0 and not f.is_zero():
                    c = c + f * gpow[n - j]
            if not c.is_zero():
                coeffs[s * n] = c
    elif spec.kind == "polynomial":
        for e, c in spec.terms:
            coeffs[int(e)] = scalar(c)
    elif spec.kind == "power-of-ratio":
        coeffs = _power_of_ratio(spec, lo, hi)
    else:
        return _exp_series(spec, window)
    coeffs = {e: c for e, c in coeffs.items() if lo <= e <= hi}
    return _series_block(window, i, coeffs)


def _power_of_ratio(spec: FactorSpec, lo: int, hi: int) -> dict[int, ExactScalar]:
    n0, n1 = (scalar(c) for c in spec.numer)
    d0, d1 = (scalar(c) for c in spec.denom)
    k = spec.power
    if k < 0:
        n0, n1, d0, d1, k = d0, d1, n0, n1, -k
    if spec.direction == "positive":
        a, b, lead, other, sgn = n0, n1, d0, d1, 1
        reach = hi
    else:
        # both degree one in v: rewrite in y = 1/v, the v^k factors cancel
        a, b, lead, other, sgn = n1, n0, d1, d0, -1
        reach = -lo
    if lead.is_zero():
        raise ValueError("expansion point is a pole")
    r = other / lead
    reach = max(reach, 0)
    num = {j: ExactScalar(math.comb(k, j)) * a ** (k - j) * b ** j for j in range(k + 1)}
    den = {}
    rp = ONE
    for m in range(reach + 1):
        if k == 0:
            den[m] = ONE if m == 0 else ZERO
        else:
            den[m] = ExactScalar(math.comb(k + m - 1, m) * (-1) ** m) * rp
        rp = rp * r
    inv_lead = lead ** (-k)
    out: dict[int, ExactScalar] = {}
    for j, cn in num.items():
        if cn.is_zero():
            continue
        for m, cd in den.items():
            if j + m > reach:
                break
            if cd.is_zero():
                continue
            e = sgn * (j + m)
            c = cn * cd * inv_lead
            out[e] = out[e] + c if e in out else c
    return out


def _exp_series(spec: FactorSpec, window: DegreeWindow) -> LaurentBlock:
    inner = LaurentBlock.constant(window, scalar(spec.coeff) * ExactScalar.var(spec.tau_name))
    for f in spec.inner:
        inner = inner.multiply(expand_factor(f, window), window)
    total = LaurentBlock.constant(window, ONE)
    term = LaurentBlock.constant(window, ONE)
    for n in range(1, spec.order + 1):
        term = term.multiply(inner, window).scale(Fraction(1, n))
        total = total + term
    return total


def coefficient_of(blocks: Sequence[LaurentBlock], target: Sequence[int]) -> ExactScalar:
    """Exact coefficient of ``target`` in the product of ``blocks``.

    Partial products are pruned to exponents from which the remaining blocks
    can still reach the target, so no information is lost to clipping.
    """
    target = tuple(target)
    if not blocks:
        return ONE if all(e == 0 for e in target) else ZERO
    names = blocks[0].names
    for b in blocks:
        _same_names(blocks[0], b)
    k = len(names)
    ranges = [b.exponent_range() for b in blocks]
    wins = [(b.window.lo, b.window.hi) for b in blocks]
    tot_lo = [sum(w[0][i] for w in wins) for i in range(k)]
    tot_hi = [sum(w[1][i] for w in wins) for i in range(k)]
    if not all(a <= e <= b for e, a, b in zip(target, tot_lo, tot_hi)):
        raise WindowOverflow(f"target {target} outside product window {tot_lo}..{tot_hi}")
    order = sorted(range(len(blocks)), key=lambda j: len(blocks[j].coeffs))
    blocks = [blocks[j] for j in order]
    ranges = [ranges[j] for j in order]
    suf_lo = [[0] * k for _ in range(len(blocks) + 1)]
    suf_hi = [[0] * k for _ in range(len(blocks) + 1)]
    for j in range(len(blocks) - 1, -1, -1):
        lo, hi = ranges[j]
        suf_lo[j] = [suf_lo[j + 1][i] + lo[i] for i in range(k)]
        suf_hi[j] = [suf_hi[j + 1][i] + hi[i] for i in range(k)]
    cur: dict[tuple, ExactScalar] = {(0,) * k: ONE}
    for j, b in enumerate(blocks):
        nxt: dict[tuple, ExactScalar] = {}
        rlo, rhi = suf_lo[j + 1], suf_hi[j + 1]
        for e1, c1 in cur.items():
            for e2, c2 in b.coeffs.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                ok = True
                for i in range(k):
                    need = target[i] - e[i]
                    if need < rlo[i] or need > rhi[i]:
                        ok = False
                        break
                if not ok:
                    continue
                p = c1 * c2
                nxt[e] = nxt[e] + p if e in nxt else p
        cur = nxt
        if not cur:
            return ZERO
    return cur.get(target, ZERO)


# ---------------------------------------------------------------------------
# Numeric evaluation with certified tails


@dataclass
class Stabilized:
    value: Fraction
    bound: Fraction
    order: int


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return scalar(x).to_fraction()


def _numeric_series(spec: FactorSpec, T: int) -> tuple[dict[int, Fraction], Fraction, Fraction]:
    """Coefficients up to index T, total absolute mass bound, tail bound."""
    if spec.kind == "polynomial":
        cs = {int(e): _frac(c) for e, c in spec.terms}
        mass = sum((abs(c) for c in cs.values()), Fraction(0))
        return cs, mass, Fraction(0)
    if spec.kind in ("geometric-positive", "geometric-negative"):
        s = 1 if spec.kind == "geometric-positive" else -1
        g = _frac(spec.ratio)
        if abs(g) >= 1:
            raise DivergenceError(f"ratio {g} has modulus >= 1")
        numer = [_frac(c) for c in spec.numer]
        d = len(numer) - 1
        cs: dict[int, Fraction] = {}
        for n in range(T + 1):
            c = sum((f * g ** (n - j) for j, f in enumerate(numer) if n >= j), Fraction(0))
            if c:
                cs[s * n] = c
        nsum = sum((abs(f) for f in numer), Fraction(0))
        mass = nsum / (1 - abs(g))
        if T >= d:
            tail = nsum * abs(g) ** (T + 1 - d) / (1 - abs(g))
        else:
            tail = mass
        return cs, mass, tail
    if spec.kind == "power-of-ratio":
        n0, n1 = (_frac(c) for c in spec.numer)
        d0, d1 = (_frac(c) for c in spec.denom)
        k = spec.power
        if k < 0:
            n0, n1, d0, d1, k = d0, d1, n0, n1, -k
        lead, other = (d0, d1) if spec.direction == "positive" else (d1, d0)
        if lead == 0 or abs(other / lead) >= 1:
            raise DivergenceError("power-of-ratio expansion does not converge on |v| = 1")
        r = abs(other / lead)
        sp = FactorSpec("power-of-ratio", spec.var, numer=(n0, n1), denom=(d0, d1),
                        power=k, direction=spec.direction)
        w = DegreeWindow((spec.var,), (-T - k,), (T + k,))
        blk = expand_factor(sp, w)
        cs = {e[0]: c.to_fraction() for e, c in blk.coeffs.items()}
        nmass = (abs(n0) + abs(n1)) ** k / abs(lead) ** k
        mass = nmass / (1 - r) ** k
        # tail of (1 + r y)^-k beyond T: ratio of consecutive terms (k+m)/(m+1) r
        m = T + 1 - k
        if m < 1:
            return cs, mass, mass
        rho = Fraction(k + m, m + 1) * r
        if rho >= 1:
            return cs, mass, mass
        term = Fraction(math.comb(k + m - 1, m)) * r ** m
        tail = nmass * term / (1 - rho)
        return cs, mass, tail
    raise ValueError(f"{spec.kind} factors are not supported numerically")


def stabilized_coefficient(specs: Sequence[FactorSpec], target: Mapping[str, int] | Sequence[int],
                           tol, names: Sequence[str] | None = None,
                           start: int = 8, max_order: int = 4096) -> Stabilized:
    """Coefficient of ``target`` in the product of numeric factors.

    Each infinite factor is cut at order T (doubled until the certified tail
    bound falls below ``tol``).  The bound counts every dropped term at
    |v| = 1: sum over factors of tail_f times the masses of the others.
    """
    tol = Fraction(tol)
    if names is None:
        names = tuple(dict.fromkeys(s.var for s in specs))
    names = tuple(names)
    if isinstance(target, Mapping):
        tvec = tuple(target.get(n, 0) for n in names)
    else:
        tvec = tuple(target)
    if not specs:
        return Stabilized(Fraction(1) if all(e == 0 for e in tvec) else Fraction(0), Fraction(0), 0)
    T = start
    while True:
        series, masses, tails = [], [], []
        for s in specs:
            cs, m, tl = _numeric_series(s, T)
            series.append((names.index(s.var), cs))
            masses.append(m)
            tails.append(tl)
        bound = Fraction(0)
        for f in range(len(specs)):
            term = tails[f]
            for g in range(len(specs)):
                if g != f:
                    term *= masses[g]
            bound += term
        if bound <= tol or T >= max_order:
            value = _numeric_coefficient(series, tvec, len(names))
            if bound > tol:
                raise DivergenceError(f"tail bound {float(bound)} above tolerance at order {T}")
            return Stabilized(value, bound, T)
        T *= 2


def _numeric_coefficient(series, target, k) -> Fraction:
    # per-variable convolution; factors in different variables multiply independently
    per_var: dict[int, dict[int, Fraction]] = {}
    for i, cs in series:
        cur = per_var.get(i, {0: Fraction(1)})
        nxt: dict[int, Fraction] = {}
        for e1, c1 in cur.items():
            for e2, c2 in cs.items():
                nxt[e1 + e2] = nxt.get(e1 + e2, Fraction(0)) + c1 * c2
        per_var[i] = nxt
    value = Fraction(1)
    for i in range(k):
        value *= per_var.get(i, {0: Fraction(1)}).get(target[i], Fraction(0))
    return value
