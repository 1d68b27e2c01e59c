"""Dense matrix realizations of the module operators at a fixed truncation depth.

A :class:`LinOp` acts on depth-``D`` cylinder functions (as value vectors in
lexicographic order).  The maps here are built directly from word-index
tables so they can be checked against the function-level calculus in
:mod:`sftkms.endo`.

:class:`SpanElem` is a formal sum of triples ``(a, n, b)`` standing for
``a e_n b`` where ``e_n`` is the projection realizing the ``n``-th tower
expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import endo
from .errors import DepthMismatch, DepthTooSmall, DimensionCapExceeded, MixedIndices, SftMismatch
from .shift import CylFn, Sft
from .tolerances import DIM_CAP


def _check_cap(s: Sft, depth: int) -> int:
    n = s.count(depth)
    if n > DIM_CAP:
        raise DimensionCapExceeded(
            f"{n} admissible words at depth {depth} exceeds the cap of {DIM_CAP}"
        )
    return n


@dataclass(frozen=True, eq=False)
class LinOp:
    """Matrix from depth-``depth_in`` to depth-``depth_out`` value vectors."""

    sft: Sft
    depth_in: int
    depth_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        want = (self.sft.count(self.depth_out), self.sft.count(self.depth_in))
        if m.shape != want:
            raise DepthMismatch(f"matrix shape {m.shape} does not match word counts {want}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, s: Sft, depth: int) -> "LinOp":
        return cls(s, depth, depth, np.eye(_check_cap(s, depth)))

    @classmethod
    def from_map(cls, s: Sft, depth_in: int, fn) -> "LinOp":
        """Tabulate a linear map on CylFn by applying it to the indicator basis."""
        n = _check_cap(s, depth_in)
        eye = np.eye(n, dtype=complex)
        cols = [fn(CylFn(s, depth_in, eye[i])) for i in range(n)]
        d_out = max(c.depth for c in cols)
        mat = np.stack([c.promote(d_out).values for c in cols], axis=1)
        return cls(s, depth_in, d_out, mat)

    @property
    def square(self) -> bool:
        return self.depth_in == self.depth_out

    def _same(self, other: "LinOp") -> None:
        if other.sft != self.sft:
            raise SftMismatch("operators act on different shift spaces")
        if (other.depth_in, other.depth_out) != (self.depth_in, self.depth_out):
            raise DepthMismatch("operator depths differ")

    def __matmul__(self, other: "LinOp") -> "LinOp":
        if not isinstance(other, LinOp):
            return NotImplemented
        if other.sft != self.sft:
            raise SftMismatch("operators act on different shift spaces")
        if self.depth_in != other.depth_out:
            raise DepthMismatch(
                f"cannot compose depth {other.depth_out} output with depth {self.depth_in} input"
            )
        return LinOp(self.sft, other.depth_in, self.depth_out, self.matrix @ other.matrix)

    def __add__(self, other: "LinOp") -> "LinOp":
        self._same(other)
        return LinOp(self.sft, self.depth_in, self.depth_out, self.matrix + other.matrix)

    def __sub__(self, other: "LinOp") -> "LinOp":
        self._same(other)
        return LinOp(self.sft, self.depth_in, self.depth_out, self.matrix - other.matrix)

    def __mul__(self, c) -> "LinOp":
        return LinOp(self.sft, self.depth_in, self.depth_out, c * self.matrix)

    __rmul__ = __mul__

    def apply(self, f: CylFn) -> CylFn:
        if f.sft != self.sft:
            raise SftMismatch("function lives on a different shift space")
        if f.depth > self.depth_in:
            raise DepthMismatch(f"function of depth {f.depth} on operator of depth {self.depth_in}")
        return CylFn(self.sft, self.depth_out, self.matrix @ f.promote(self.depth_in).values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix))) if self.matrix.size else 0.0

    def distance(self, other: "LinOp") -> float:
        return (self - other).max_abs()


# -- elementary operators -------------------------------------------------------


def alpha_mat(s: Sft, D: int) -> LinOp:
    """Composition with the shift, depth ``D`` to ``D + 1``."""
    if D < 1:
        raise DepthTooSmall("truncation depth must be >= 1")

    def build():
        rows = _check_cap(s, D + 1)
        m = np.zeros((rows, s.count(D)))
        m[np.arange(rows), s.suffix_map(D)] = 1.0
        return LinOp(s, D, D + 1, m)
    return s._cached(("alpha_mat", D), build)


def promote_mat(s: Sft, d: int, D: int) -> LinOp:
    rows = _check_cap(s, D)
    m = np.zeros((rows, s.count(d)))
    m[np.arange(rows), s.prefix_map(d, D)] = 1.0
    return LinOp(s, d, D, m)


def L_mat(s: Sft, D: int) -> LinOp:
    """Preimage average, depth ``D`` to ``max(D - 1, 1)``."""
    if D < 1:
        raise DepthTooSmall("truncation depth must be >= 1")

    def build():
        e = max(D, 2)
        cols = _check_cap(s, e)
        target = s.suffix_map(e - 1)
        first = s.words(e - 1).words[:, 0]
        weight = 1.0 / s.matrix.sum(axis=0)[first]
        core = np.zeros((s.count(e - 1), cols))
        core[target, np.arange(cols)] = weight[target]
        op = LinOp(s, e, e - 1, core)
        if e != D:
            op = op @ promote_mat(s, D, e)
        return op
    return s._cached(("L_mat", D), build)


def mult_op(a: CylFn, D: int) -> LinOp:
    """Pointwise multiplication by ``a`` on depth-``D`` functions."""
    if a.depth > D:
        raise DepthTooSmall(f"multiplier of depth {a.depth} needs D >= {a.depth}")
    _check_cap(a.sft, D)
    return LinOp(a.sft, D, D, np.diag(a.promote(D).values))


def basic_projection_en(s: Sft, n: int, D: int) -> LinOp:
    """Matrix of the ``n``-th tower expectation on depth-``D`` functions."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if D < n + 1:
        raise DepthTooSmall(f"projection of index {n} needs D >= {n + 1}")

    def build():
        return LinOp.from_map(s, D, lambda f: endo.tower_expectation(f, n).promote(D))
    return s._cached(("e_mat", n, D), build)


def beta_on_operator(T: LinOp) -> LinOp:
    """``alpha_mat T L_mat``: lifts a depth-``D`` operator to depth ``D + 1``."""
    if not T.square:
        raise DepthMismatch("operator must map a depth to itself")
    D = T.depth_in
    return alpha_mat(T.sft, D) @ T @ L_mat(T.sft, D + 1)


def module_inner_product(xi: CylFn, eta: CylFn, n: int) -> CylFn:
    return endo.inner_product_n(xi, eta, n)


def module_adjoint_residual(T: LinOp, n: int, S: LinOp | None = None) -> float:
    """Largest entry of ``<T u, v>_n - <u, S v>_n`` over basis vectors ``u, v``.

    ``S`` defaults to ``T`` (self-adjointness).  The inner product is the
    module one, so this is not the Hermitian-transpose test.
    """
    if not T.square:
        raise DepthMismatch("operator must be square")
    S = T if S is None else S
    P = basic_projection_en(T.sft, n, T.depth_in).matrix if n > 0 else np.eye(len(T.matrix))
    t, sm = T.matrix, S.matrix
    # <T e_i, e_j>_n = conj(T[j, i]) P[:, j];  <e_i, S e_j>_n = S[i, j] P[:, i]
    lhs = np.conj(t.T)[:, :, None] * P.T[None, :, :]
    rhs = sm[:, :, None] * P.T[:, None, :]
    return float(np.max(np.abs(lhs - rhs)))


# -- formal spans of a e_n b --------------------------------------------------------


@dataclass(frozen=True)
class SpanTerm:
    a: CylFn
    n: int
    b: CylFn

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("projection index must be nonnegative")
        if self.a.sft != self.b.sft:
            raise SftMismatch("factors live on different shift spaces")


class SpanElem:
    """Finite formal sum of ``a e_n b``."""

    __slots__ = ("sft", "terms")

    def __init__(self, sft: Sft, terms: Iterable[SpanTerm] = ()):
        terms = tuple(terms)
        for t in terms:
            if t.a.sft != sft:
                raise SftMismatch("term lives on a different shift space")
        object.__setattr__(self, "sft", sft)
        object.__setattr__(self, "terms", terms)

    def __setattr__(self, name, value):
        raise AttributeError("SpanElem is immutable")

    @classmethod
    def term(cls, a: CylFn, n: int, b: CylFn) -> "SpanElem":
        return cls(a.sft, [SpanTerm(a, n, b)])

    @classmethod
    def projection(cls, s: Sft, n: int) -> "SpanElem":
        one = CylFn.const(s, 1.0)
        return cls(s, [SpanTerm(one, n, one)])

    @classmethod
    def of_function(cls, a: CylFn) -> "SpanElem":
        return cls(a.sft, [SpanTerm(a, 0, CylFn.const(a.sft, 1.0))])

    def __add__(self, other: "SpanElem") -> "SpanElem":
        if other.sft != self.sft:
            raise SftMismatch("elements live on different shift spaces")
        return SpanElem(self.sft, self.terms + other.terms)

    def __sub__(self, other: "SpanElem") -> "SpanElem":
        return self + other.scale(-1.0)

    def scale(self, c) -> "SpanElem":
        return SpanElem(self.sft, [SpanTerm(c * t.a, t.n, t.b) for t in self.terms])

    def __mul__(self, other: "SpanElem") -> "SpanElem":
        if isinstance(other, SpanElem):
            return span_product(self, other)
        return NotImplemented

    def left(self, a: CylFn) -> "SpanElem":
        return SpanElem(self.sft, [SpanTerm(a * t.a, t.n, t.b) for t in self.terms])

    def right(self, b: CylFn) -> "SpanElem":
        return SpanElem(self.sft, [SpanTerm(t.a, t.n, t.b * b) for t in self.terms])

    def adjoint(self) -> "SpanElem":
        return SpanElem(self.sft, [SpanTerm(t.b.conj(), t.n, t.a.conj()) for t in self.terms])

    @property
    def indices(self) -> set[int]:
        return {t.n for t in self.terms}

    @property
    def max_depth(self) -> int:
        return max([0] + [max(t.a.depth, t.b.depth) for t in self.terms])

    def min_depth(self) -> int:
        """Smallest truncation depth at which every term can be realized."""
        return max([1] + [max(t.a.depth, t.b.depth, t.n + 1) for t in self.terms])

    def to_linop(self, D: int) -> LinOp:
        """Realize as ``sum M_a e_n M_b`` acting on depth-``D`` functions."""
        if D < self.min_depth():
            raise DepthTooSmall(f"element needs truncation depth >= {self.min_depth()}")
        total = LinOp(self.sft, D, D, np.zeros((self.sft.count(D),) * 2))
        for t in self.terms:
            total = total + mult_op(t.a, D) @ basic_projection_en(self.sft, t.n, D) @ mult_op(t.b, D)
        return total

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return "SpanElem(" + " + ".join(f"a·e{t.n}·b" for t in self.terms) + ")"


def span_product(x: SpanElem, y: SpanElem) -> SpanElem:
    """Reduce ``(a e_n b)(c e_m d)`` to a single triple of index ``max(n, m)``."""
    if x.sft != y.sft:
        raise SftMismatch("elements live on different shift spaces")
    out = []
    for p in x.terms:
        for q in y.terms:
            mid = p.b * q.a
            if p.n <= q.n:
                out.append(SpanTerm(p.a * endo.tower_expectation(mid, p.n), q.n, q.b))
            else:
                out.append(SpanTerm(p.a, p.n, endo.tower_expectation(mid, q.n) * q.b))
    return SpanElem(x.sft, out)


def raise_index(x: SpanElem) -> SpanElem:
    """Rewrite each ``a e_n b`` as ``sum_i a alpha^n(u_i) e_{n+1} alpha^n(u_i*) b``."""
    qb = endo.quasi_basis(x.sft)
    out = []
    for t in x.terms:
        for u in qb:
            un = endo.alpha_power(u, t.n)
            out.append(SpanTerm(t.a * un, t.n + 1, un.conj() * t.b))
    return SpanElem(x.sft, out)


def expectation_Gn(x: SpanElem, n: int | None = None) -> CylFn:
    """``sum a I_n^{-1} b`` over an element whose terms all have index ``n``."""
    idx = x.indices
    if n is None:
        if len(idx) > 1:
            raise MixedIndices(f"terms have indices {sorted(idx)}")
        n = idx.pop() if idx else 0
    elif idx - {n}:
        raise MixedIndices(f"terms have indices {sorted(idx)}, expected only {n}")
    inv = endo.index_cocycle_In(x.sft, n).inv()
    total = CylFn.const(x.sft, 0.0)
    for t in x.terms:
        total = total + t.a * inv * t.b
    return total


def expectation_F_check(x: SpanElem) -> CylFn:
    """Termwise ``a I_n^{-1} b`` for elements with any mix of indices."""
    total = CylFn.const(x.sft, 0.0)
    for t in x.terms:
        total = total + t.a * endo.index_cocycle_In(x.sft, t.n).inv() * t.b
    return total


def quasi_basis_projection_identity(s: Sft, n: int, D: int) -> float:
    """Largest entry of ``e_n - sum_i alpha^n(u_i) e_{n+1} alpha^n(u_i*)``."""
    if D < n + 2:
        raise DepthTooSmall(f"index {n} expansion needs D >= {n + 2}")
    total = basic_projection_en(s, n, D)
    for u in endo.quasi_basis(s):
        un = endo.alpha_power(u, n)
        total = total - mult_op(un, D) @ basic_projection_en(s, n + 1, D) @ mult_op(un.conj(), D)
    return total.max_abs()


def projection_chain(s: Sft, ns: Sequence[int], D: int) -> LinOp:
    """Product ``e_{n_1} e_{n_2} ...`` at depth ``D``."""
    op = LinOp.identity(s, D)
    for n in ns:
        op = op @ basic_projection_en(s, n, D)
    return op
