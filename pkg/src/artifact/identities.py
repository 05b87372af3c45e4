"""Skew Cauchy identities, their termwise bijectivization, and HL operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algebra import ONE, ZERO, ExactScalar, var
from .rsk import TransitionQuery, extended_weights
from .signatures import (Signature, interlaces, lower_neighbours, phi, psi,
                         signatures, upper_neighbours)


@dataclass
class IdentityReport:
    name: str
    lhs: object
    rhs: object
    equal: bool
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.equal


def _lower_mixed(mu: Signature, nu: Signature, size: int) -> list[Signature]:
    """lam in Sig_{N-1} with lam < mu (mu one longer), lam < nu (equal length), |lam| = size."""
    out = []
    for lam in lower_neighbours(mu, len(mu) - 1):
        if sum(lam) == size and interlaces(lam, nu):
            out.append(lam)
    return out


def _upper_mixed(mu: Signature, nu: Signature, size: int) -> list[Signature]:
    """rho in Sig_N with mu < rho (equal length), nu < rho (nu one shorter), |rho| = size."""
    floor = mu[-1] if len(mu) else 0
    out = []
    for rho in upper_neighbours(nu, len(nu) + 1, size=size, floor=floor):
        if interlaces(mu, rho):
            out.append(rho)
    return out


def _lower_equal(mu, nu, size) -> list[Signature]:
    return [lam for lam in lower_neighbours(mu, len(mu), size=size) if interlaces(lam, nu)]


def _upper_equal(mu, nu, size) -> list[Signature]:
    return [rho for rho in upper_neighbours(mu, len(mu), size=size) if interlaces(nu, rho)]


def _aa_sides(mu, nu, k, l, t):
    lhs = ZERO
    for r in range(0, min(k, l) + 1):
        c = ONE if r == 0 else 1 - t
        for lam in _lower_mixed(mu, nu, sum(mu) - (k - r)):
            if sum(nu) - sum(lam) != l - r:
                continue
            lhs = lhs + c * phi(nu, lam, t) * psi(mu, lam, t)
    rhs = ZERO
    for rho in _upper_mixed(mu, nu, sum(nu) + k):
        if sum(rho) - sum(mu) != l:
            continue
        rhs = rhs + psi(rho, nu, t) * phi(rho, mu, t)
    return lhs, rhs


def verify_skew_cauchy(variant: str, mu: Sequence[int], nu: Sequence[int], k: int, l: int,
                       t=None) -> IdentityReport:
    """Both sides of the A, AA or BB identity at x^k y^l, exactly.

    A compares the whole truncated generating series (all degrees <= (k, l))
    including the (1 - t x y)/(1 - x y) prefactor; AA and BB compare the
    single coefficient.
    """
    t = var("t") if t is None else t
    mu, nu = Signature(mu), Signature(nu)
    if k < 0 or l < 0:
        raise ValueError("k, l must be nonnegative")
    if variant == "BB":
        if len(mu) != len(nu):
            raise ValueError("BB needs mu, nu of one length")
        lhs = ZERO
        for lam in _lower_equal(mu, nu, sum(mu) - k):
            if sum(nu) - sum(lam) == l:
                lhs = lhs + phi(nu, lam, t) * psi(mu, lam, t)
        rhs = ZERO
        for rho in _upper_equal(mu, nu, sum(nu) + k):
            if sum(rho) - sum(mu) == l:
                rhs = rhs + psi(rho, nu, t) * phi(rho, mu, t)
        return IdentityReport("BB", lhs, rhs, lhs == rhs)
    if len(mu) != len(nu) + 1:
        raise ValueError("A/AA need mu in Sig_N and nu in Sig_{N-1}")
    if variant == "AA":
        lhs, rhs = _aa_sides(mu, nu, k, l, t)
        return IdentityReport("AA", lhs, rhs, lhs == rhs)
    if variant == "A":
        # sum_lam P_{mu/lam}(x) Q_{nu/lam}(y) as {(a, b): coeff}
        inner: dict[tuple, ExactScalar] = {}
        for a in range(k + 1):
            for lam in _lower_mixed(mu, nu, sum(mu) - a):
                b = sum(nu) - sum(lam)
                if 0 <= b <= l:
                    inner[(a, b)] = inner.get((a, b), ZERO) + psi(mu, lam, t) * phi(nu, lam, t)
        lhs: dict[tuple, ExactScalar] = {}
        for (a, b), c in inner.items():
            for r in range(0, min(k - a, l - b) + 1):
                f = ONE if r == 0 else 1 - t
                key = (a + r, b + r)
                lhs[key] = lhs.get(key, ZERO) + f * c
        rhs: dict[tuple, ExactScalar] = {}
        for a in range(k + 1):
            for rho in _upper_mixed(mu, nu, sum(nu) + a):
                b = sum(rho) - sum(mu)
                if 0 <= b <= l:
                    rhs[(a, b)] = rhs.get((a, b), ZERO) + psi(rho, nu, t) * phi(rho, mu, t)
        lhs = {key: v for key, v in lhs.items() if not v.is_zero()}
        rhs = {key: v for key, v in rhs.items() if not v.is_zero()}
        return IdentityReport("A", lhs, rhs, lhs == rhs)
    raise ValueError(f"unknown variant {variant!r}")


def verify_bijectivization(mu: Sequence[int], nu: Sequence[int], k: int, l: int,
                           t=None) -> IdentityReport:
    """Termwise check behind the AA identity, one (lam, r, rho) at a time."""
    t = var("t") if t is None else t
    mu, nu = Signature(mu), Signature(nu)
    rhos = [rho for rho in _upper_mixed(mu, nu, sum(nu) + k) if sum(rho) - sum(mu) == l]
    mismatches = []
    checked = 0
    for r in range(0, min(k, l) + 1):
        for lam in _lower_mixed(mu, nu, sum(mu) - (k - r)):
            if sum(nu) - sum(lam) != l - r:
                continue
            for rho in rhos:
                q = TransitionQuery(lam, mu, nu, rho, r)
                c = ONE if r == 0 else 1 - t
                left = c * phi(nu, lam, t) * psi(mu, lam, t) * extended_weights("forward", q, t)
                right = phi(rho, mu, t) * psi(rho, nu, t) * extended_weights("inverse", q, t)
                checked += 1
                if left != right:
                    mismatches.append((lam, r, rho, left, right))
    return IdentityReport("bijectivization", checked, len(mismatches), not mismatches, mismatches)


# ---------------------------------------------------------------------------
# operators


class SignatureBasis:
    """All signatures of length N with parts in [0, P]."""

    def __init__(self, N: int, part_bound: int):
        self.N = N
        self.part_bound = part_bound
        self.basis = signatures(N, 0, part_bound)
        self.index = {s: i for i, s in enumerate(self.basis)}
        if len(self.index) != len(self.basis):
            raise AssertionError("duplicate basis vectors")

    def __len__(self):
        return len(self.basis)

    def __contains__(self, s):
        return Signature(s) in self.index

    def safe(self, max_degree: int) -> list[Signature]:
        """States whose matrix elements truncation cannot touch."""
        lo, hi = max_degree, self.part_bound - max_degree
        return [s for s in self.basis if all(lo <= p <= hi for p in s)]


@dataclass
class OperatorMatrix:
    """Sparse matrix: entries[target][source]."""

    kind: str
    degree: int
    basis: SignatureBasis
    entries: dict

    def entry(self, target, source) -> ExactScalar:
        return self.entries.get(Signature(target), {}).get(Signature(source), ZERO)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        out: dict = {}
        for tgt, row in self.entries.items():
            acc: dict = {}
            for mid, a in row.items():
                for src, b in other.entries.get(mid, {}).items():
                    acc[src] = acc[src] + a * b if src in acc else a * b
            acc = {s: v for s, v in acc.items() if not v.is_zero()}
            if acc:
                out[tgt] = acc
        return OperatorMatrix(f"{self.kind}{other.kind}", self.degree + other.degree,
                              self.basis, out)


def operator_matrix(kind: str, degree: int, basis: SignatureBasis, t=None) -> OperatorMatrix:
    """A_k: lam -> sum phi_{mu/lam} mu; B_l: mu -> sum psi_{mu/lam} lam (within the basis)."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    entries: dict = {}
    for src in basis.basis:
        if kind == "A":
            targets = upper_neighbours(src, basis.N, size=sum(src) + degree,
                                       ceiling=basis.part_bound) if basis.N else [src]
            for tgt in targets:
                if tgt in basis.index:
                    w = phi(tgt, src, t)
                    if not w.is_zero():
                        entries.setdefault(tgt, {})[src] = w
        elif kind == "B":
            targets = lower_neighbours(src, basis.N, size=sum(src) - degree,
                                       floor=0) if basis.N else [src]
            for tgt in targets:
                if tgt in basis.index:
                    w = psi(src, tgt, t)
                    if not w.is_zero():
                        entries.setdefault(tgt, {})[src] = w
        else:
            raise ValueError(f"unknown operator kind {kind!r}")
    return OperatorMatrix(kind, degree, basis, entries)


def _restricted_equal(X: OperatorMatrix, Y: OperatorMatrix, states: Iterable[Signature]):
    states = list(states)
    bad = []
    for tgt in states:
        for src in states:
            a, b = X.entry(tgt, src), Y.entry(tgt, src)
            if a != b:
                bad.append((tgt, src, a, b))
    return bad


def verify_commutation(basis: SignatureBasis, max_degree: int, t=None) -> IdentityReport:
    """A(x1)A(x2) = A(x2)A(x1), B(y1)B(y2) = B(y2)B(y1), A(x)B(y) = B(y)A(x).

    Compared coefficientwise up to degree ``max_degree`` in each variable and
    only between safe states (parts in [max_degree, P - max_degree]).
    """
    if 2 * max_degree > basis.part_bound:
        raise ValueError("unsafe region: need max_degree <= part_bound / 2")
    A = [operator_matrix("A", d, basis, t) for d in range(max_degree + 1)]
    B = [operator_matrix("B", d, basis, t) for d in range(max_degree + 1)]
    states = basis.safe(max_degree)
    failures = []
    for a in range(max_degree + 1):
        for b in range(max_degree + 1):
            for name, X, Y in (("AA", A[a] @ A[b], A[b] @ A[a]),
                               ("BB", B[a] @ B[b], B[b] @ B[a]),
                               ("AB", A[a] @ B[b], B[b] @ A[a])):
                bad = _restricted_equal(X, Y, states)
                if bad:
                    failures.append((name, a, b, bad[:3]))
    return IdentityReport("commutation", len(states), len(failures), not failures, failures)
