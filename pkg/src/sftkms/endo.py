"""The shift endomorphism, its transfer operator, and the expectations they generate.

On a shift space with shift map ``theta``:

* ``alpha(f) = f o theta`` raises depth by one,
* ``raw_sum_T(f)(x) = sum of f(t) over the preimages t of x``,
* ``transfer_L = N^{-1} raw_sum_T`` where ``N(x)`` counts preimages,
* ``expectation_E = alpha o transfer_L`` is a conditional expectation onto
  the range of ``alpha``, with index ``mu = N o theta``.

Everything here acts exactly on :class:`~sftkms.shift.CylFn` values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInRange
from .shift import CylFn, Sft
from .tolerances import EPS_ALG


def alpha(f: CylFn) -> CylFn:
    """Compose with the shift: depth ``d`` becomes ``d + 1``."""
    return CylFn(f.sft, f.depth + 1, f.values[f.sft.suffix_map(f.depth)])


def alpha_power(f: CylFn, n: int) -> CylFn:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return f
    s = f.sft
    return CylFn(s, f.depth + n, f.values[s.shift_map(f.depth, n)])


def degree_N(s: Sft) -> CylFn:
    """Number of preimages of a point, which depends only on its first symbol."""
    return CylFn(s, 1, s.matrix.sum(axis=0))


def raw_sum_T(f: CylFn) -> CylFn:
    """Sum of ``f`` over the preimages of each point; depth ``max(d - 1, 1)``."""
    s = f.sft
    e = max(f.depth, 2)
    f = f.promote(e)
    target = s.suffix_map(e - 1)
    out = np.zeros(s.count(e - 1), dtype=complex)
    np.add.at(out, target, f.values)
    return CylFn(s, e - 1, out)


def transfer_L(f: CylFn) -> CylFn:
    """Average of ``f`` over preimages: ``N^{-1} raw_sum_T(f)``."""
    t = raw_sum_T(f)
    return CylFn(f.sft, t.depth, t.values / _degree_at(f.sft, t.depth))


def _degree_at(s: Sft, depth: int) -> np.ndarray:
    return degree_N(s).promote(depth).values.real


def transfer_power(f: CylFn, n: int) -> CylFn:
    if n < 0:
        raise ValueError("n must be nonnegative")
    for _ in range(n):
        f = transfer_L(f)
    return f


def expectation_E(f: CylFn) -> CylFn:
    return alpha(transfer_L(f))


def tower_expectation(f: CylFn, n: int) -> CylFn:
    """Expectation onto the range of ``alpha^n``, computed as ``alpha^n L^n``.

    Output depth is ``max(d, n + 1)`` for ``n >= 1``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return f
    return alpha_power(transfer_power(f, n), n)


def _fibre_split(f: CylFn, n: int) -> tuple[CylFn, np.ndarray]:
    """Collapse ``f`` along the n-fold shift; also return per-word deviation."""
    s = f.sft
    e = max(f.depth, n + 1)
    g = f.promote(e)
    tail = s.shift_map(e - n, n)
    m = s.count(e - n)
    counts = np.bincount(tail, minlength=m)
    mean = np.bincount(tail, weights=g.values.real, minlength=m) \
        + 1j * np.bincount(tail, weights=g.values.imag, minlength=m)
    mean = mean / counts
    dev = np.abs(g.values - mean[tail])
    return CylFn(s, e - n, mean), dev


def in_range(f: CylFn, n: int, tol: float = EPS_ALG) -> bool:
    """Whether ``f`` is constant on the fibres of ``theta^n``."""
    if n == 0:
        return True
    _, dev = _fibre_split(f, n)
    return bool(dev.max() <= tol * max(1.0, f.sup_norm()))


def alpha_inverse(f: CylFn, n: int = 1, tol: float = EPS_ALG) -> CylFn:
    """The unique ``g`` with ``alpha^n(g) = f``; depth ``max(d - n, 1)``.

    Raises :class:`NotInRange` when ``f`` varies over a fibre of ``theta^n``
    by more than ``tol`` (relative to ``max(1, sup|f|)``).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return f
    g, dev = _fibre_split(f, n)
    worst = float(dev.max())
    if worst > tol * max(1.0, f.sup_norm()):
        raise NotInRange(f"function varies by {worst:.3g} on fibres of the {n}-fold shift")
    return g


def level_expectation_En(f: CylFn, n: int) -> CylFn:
    """``alpha^n E alpha^{-n}``, defined on the range of ``alpha^n``."""
    return alpha_power(expectation_E(alpha_inverse(f, n)), n)


def inner_product_n(a: CylFn, b: CylFn, n: int) -> CylFn:
    """A-valued inner product ``E-tower_n(conj(a) b)``."""
    return tower_expectation(a.conj() * b, n)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexData:
    mu: CylFn
    lower_bound: float


@dataclass(frozen=True)
class QuasiBasis:
    """Depth-2 functions ``u_i`` with ``sum_i u_i E(conj(u_i) f) = f``."""

    elements: tuple

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def reconstruct(self, f: CylFn) -> CylFn:
        total = CylFn.const(f.sft, 0.0)
        for u in self.elements:
            total = total + u * expectation_E(u.conj() * f)
        return total


def watatani_index(s: Sft) -> IndexData:
    """Index of the expectation ``E``: the preimage count composed with the shift."""
    mu = alpha(degree_N(s))
    return IndexData(mu, float(mu.values.real.min()))


def quasi_basis(s: Sft) -> QuasiBasis:
    """``u_i = sqrt(mu * 1_[i])`` where ``1_[i]`` marks first symbol ``i``."""
    mu = watatani_index(s).mu
    elems = []
    for i in range(s.k):
        ind = CylFn.indicator(s, (i,)).promote(2)
        elems.append(CylFn(s, 2, np.sqrt((mu * ind).values.real)))
    return QuasiBasis(tuple(elems))


def cocycle_power(f: CylFn, n: int) -> CylFn:
    """``f alpha(f) ... alpha^{n-1}(f)``, with the empty product equal to 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return CylFn.const(f.sft, 1.0)
    out = f
    for j in range(1, n):
        out = out * alpha_power(f, j)
    return out


def index_cocycle_In(s: Sft, n: int) -> CylFn:
    """Cocycle power of the index; ``I_0`` is the unit at depth 1."""
    if n == 0:
        return CylFn(s, 1, np.ones(s.k))
    return cocycle_power(watatani_index(s).mu, n)
