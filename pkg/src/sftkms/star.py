"""Formal sums of ``a S^n S*^m b`` and the functionals that read them.

``S`` is the isometry implementing the shift endomorphism: ``S a = alpha(a) S``
and ``S* a S = L(a)``.  Products of two terms always reduce to a single term,
so a :class:`StarElem` is just a list of :class:`StarTerm`.  No normal form for
sums is attempted; two elements are compared through the expectation ``G``
or a state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import endo
from .errors import NotPositive, NotUnitary, SftMismatch
from .shift import CylFn, Sft
from .tolerances import EPS_ALG
from .tower import SpanElem, SpanTerm


@dataclass(frozen=True, eq=False)
class StarTerm:
    """``a S^n S*^m b``; scalar multiples live in ``a``."""

    a: CylFn
    n: int
    m: int
    b: CylFn

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("exponents must be nonnegative")
        if self.a.sft != self.b.sft:
            raise SftMismatch("factors live on different shift spaces")

    @property
    def gauge_fixed(self) -> bool:
        return self.n == self.m

    def adjoint(self) -> "StarTerm":
        return StarTerm(self.b.conj(), self.m, self.n, self.a.conj())


def _same_function(f: CylFn, g: CylFn) -> bool:
    d = max(f.depth, g.depth)
    return np.array_equal(f.promote(d).values, g.promote(d).values)


def _merge(terms: Iterable[StarTerm]) -> list[StarTerm]:
    out: list[StarTerm] = []
    for t in terms:
        for i, u in enumerate(out):
            if u.n == t.n and u.m == t.m and _same_function(u.b, t.b):
                out[i] = StarTerm(u.a + t.a, u.n, u.m, u.b)
                break
        else:
            out.append(t)
    return out


class StarElem:
    """Finite formal sum of :class:`StarTerm`.

    Terms sharing ``(n, m, b)`` exactly are merged by adding their left
    factors; nothing else is simplified.
    """

    __slots__ = ("sft", "terms")

    def __init__(self, sft: Sft, terms: Iterable[StarTerm] = ()):
        terms = list(terms)
        for t in terms:
            if t.a.sft != sft:
                raise SftMismatch("term lives on a different shift space")
        object.__setattr__(self, "sft", sft)
        object.__setattr__(self, "terms", tuple(_merge(terms)))

    def __setattr__(self, name, value):
        raise AttributeError("StarElem is immutable")

    # -- constructors ----------------------------------------------------

    @classmethod
    def term(cls, a: CylFn, n: int, m: int, b: CylFn) -> "StarElem":
        return cls(a.sft, [StarTerm(a, n, m, b)])

    @classmethod
    def one(cls, s: Sft) -> "StarElem":
        return cls.of_function(CylFn.const(s, 1.0))

    @classmethod
    def zero(cls, s: Sft) -> "StarElem":
        return cls(s, [])

    @classmethod
    def of_function(cls, a: CylFn) -> "StarElem":
        return cls.term(a, 0, 0, CylFn.const(a.sft, 1.0))

    @classmethod
    def monomial(cls, s: Sft, n: int, m: int) -> "StarElem":
        one = CylFn.const(s, 1.0)
        return cls.term(one, n, m, one)

    @classmethod
    def isometry(cls, s: Sft) -> "StarElem":
        return cls.monomial(s, 1, 0)

    @classmethod
    def projection(cls, s: Sft, n: int) -> "StarElem":
        return cls.monomial(s, n, n)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "StarElem") -> "StarElem":
        if not isinstance(other, StarElem):
            return NotImplemented
        if other.sft != self.sft:
            raise SftMismatch("elements live on different shift spaces")
        return StarElem(self.sft, self.terms + other.terms)

    def __neg__(self) -> "StarElem":
        return self.scale(-1.0)

    def __sub__(self, other: "StarElem") -> "StarElem":
        return self + (-other)

    def scale(self, c) -> "StarElem":
        return StarElem(self.sft, [StarTerm(c * t.a, t.n, t.m, t.b) for t in self.terms])

    def __mul__(self, other):
        if isinstance(other, StarElem):
            return star_multiply(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def left(self, a: CylFn) -> "StarElem":
        return StarElem(self.sft, [StarTerm(a * t.a, t.n, t.m, t.b) for t in self.terms])

    def right(self, b: CylFn) -> "StarElem":
        return StarElem(self.sft, [StarTerm(t.a, t.n, t.m, t.b * b) for t in self.terms])

    def adjoint(self) -> "StarElem":
        return star_adjoint(self)

    @property
    def gauge_fixed(self) -> bool:
        return all(t.gauge_fixed for t in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"a·S^{t.n}·S*^{t.m}·b" for t in self.terms) or "0"
        return f"StarElem({body})"


def star_adjoint(x: StarElem) -> StarElem:
    return StarElem(x.sft, [t.adjoint() for t in reversed(x.terms)])


def term_product(p: StarTerm, q: StarTerm, rule: str | None = None) -> StarTerm:
    """Reduce ``(a S^n S*^m b)(c S^j S*^k d)`` to one term.

    With ``m <= j`` the inner ``S*^m bc S^j`` collapses to ``L^m(bc) S^{j-m}``
    which is pushed left; with ``m >= j`` it becomes ``S*^{m-j} L^j(bc)`` which
    is pushed right.  ``rule`` ("left" or "right") forces one branch when
    ``m == j``.
    """
    a, n, m, b = p.a, p.n, p.m, p.b
    c, j, k, d = q.a, q.n, q.m, q.b
    bc = b * c
    use_left = m < j or (m == j and rule != "right")
    if (rule == "left" and m > j) or (rule == "right" and m < j):
        raise ValueError(f"rule {rule!r} does not apply when m={m}, j={j}")
    if use_left:
        return StarTerm(a * endo.alpha_power(endo.transfer_power(bc, m), n), n - m + j, k, d)
    return StarTerm(a, n, m - j + k, endo.alpha_power(endo.transfer_power(bc, j), k) * d)


def star_multiply(x: StarElem, y: StarElem, rule: str | None = None) -> StarElem:
    if x.sft != y.sft:
        raise SftMismatch("elements live on different shift spaces")
    return StarElem(x.sft, [term_product(p, q, rule) for p in x.terms for q in y.terms])


def product(*elems: StarElem) -> StarElem:
    out = elems[0]
    for e in elems[1:]:
        out = star_multiply(out, e)
    return out


# -- gauge actions -----------------------------------------------------------------


def gauge_sigma_u(x: StarElem, u: CylFn, tol: float = EPS_ALG) -> StarElem:
    """Automorphism fixing functions and sending ``S`` to ``u S``."""
    if np.max(np.abs(np.abs(u.values) - 1.0)) > tol:
        raise NotUnitary("gauge function must have modulus one everywhere")
    uc = u.conj()
    return StarElem(x.sft, [
        StarTerm(t.a * endo.cocycle_power(u, t.n), t.n, t.m, endo.cocycle_power(uc, t.m) * t.b)
        for t in x.terms
    ])


def gauge_gamma(x: StarElem, z: complex) -> StarElem:
    """Scalar gauge: multiply each term by ``z^{n-m}``."""
    return StarElem(x.sft, [StarTerm(z ** (t.n - t.m) * t.a, t.n, t.m, t.b) for t in x.terms])


def _check_positive(h: CylFn, tol: float = EPS_ALG) -> None:
    v = h.values
    if np.any(np.abs(v.imag) > tol) or np.any(v.real <= 0):
        raise NotPositive("potential must be strictly positive")


def gauge_sigma_z(x: StarElem, z: complex, h: CylFn) -> StarElem:
    """Dynamics ``S -> h^{iz} S`` continued to complex ``z``."""
    _check_positive(h)
    up = h.iz_power(z)
    down = h.iz_power(-z)
    return StarElem(x.sft, [
        StarTerm(t.a * endo.cocycle_power(up, t.n), t.n, t.m, endo.cocycle_power(down, t.m) * t.b)
        for t in x.terms
    ])


def sigma_i_beta(x: StarElem, h: CylFn, beta: float) -> StarElem:
    """``gauge_sigma_z`` at ``z = i beta``, using real powers of ``h``."""
    _check_positive(h)
    down = h.power(-beta)
    up = h.power(beta)
    return StarElem(x.sft, [
        StarTerm(t.a * endo.cocycle_power(down, t.n), t.n, t.m, endo.cocycle_power(up, t.m) * t.b)
        for t in x.terms
    ])


# -- expectations and functionals ------------------------------------------------------


def fixed_point_project_P(x: StarElem) -> StarElem:
    """Keep the gauge-invariant terms (``n == m``)."""
    return StarElem(x.sft, [t for t in x.terms if t.gauge_fixed])


def expectation_G(x: StarElem) -> CylFn:
    """``sum over n == m terms of a I_n^{-1} b``."""
    total = CylFn.const(x.sft, 0.0)
    for t in x.terms:
        if t.gauge_fixed:
            total = total + t.a * endo.index_cocycle_In(x.sft, t.n).inv() * t.b
    return total


def ground_functional(x: StarElem, phi) -> complex:
    """State ``phi`` applied to the ``n = m = 0`` part of ``x``.

    ``phi`` is anything with an ``evaluate(f)`` method (a
    :class:`~sftkms.kms.CylMeasure` in practice).
    """
    total = CylFn.const(x.sft, 0.0)
    for t in x.terms:
        if t.n == 0 and t.m == 0:
            total = total + t.a * t.b
    return complex(phi.evaluate(total))


def redundancy_element_k(s: Sft) -> StarElem:
    """``sum_j u_j S S* u_j*`` over the quasi-basis; acts as the unit on ``b S``."""
    return StarElem(s, [StarTerm(u, 1, 1, u.conj()) for u in endo.quasi_basis(s)])


def star_to_span(x: StarElem) -> SpanElem:
    """Send a gauge-fixed element ``sum a S^n S*^n b`` to ``sum a e_n b``."""
    if not x.gauge_fixed:
        raise ValueError("only gauge-fixed elements have a projection picture")
    return SpanElem(x.sft, [SpanTerm(t.a, t.n, t.b) for t in x.terms])


def probe_distance(x: StarElem, y: StarElem, probes: Sequence[StarElem]) -> float:
    """``max |G(p (x - y) q)|`` over probe pairs, including ``p = q = 1``.

    Elements with no normal form are compared this way; a zero result on
    enough probes is strong evidence of equality in the algebra.
    """
    diff = x - y
    worst = expectation_G(diff).sup_norm()
    for p in probes:
        worst = max(worst, expectation_G(star_multiply(p, diff)).sup_norm(),
                    expectation_G(star_multiply(diff, p)).sup_norm())
        for q in probes:
            worst = max(worst, expectation_G(product(p, diff, q)).sup_norm())
    return worst
