"""Brute-force reference implementations used to derive frozen test values.

Everything here works on plain dicts ``{word tuple: value}`` built from
``itertools.product`` and never touches the package's index maps, so
agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def words(trans, d):
    k = len(trans)
    return [w for w in itertools.product(range(k), repeat=d)
            if all(trans[w[i]][w[i + 1]] for i in range(d - 1))]


def table(f):
    """Package CylFn -> dict, via its public ``at`` accessor per brute word."""
    trans = [list(r) for r in f.sft.trans]
    return {w: f.at(w) for w in words(trans, f.depth)}


def value(tab, w):
    d = len(next(iter(tab)))
    return tab[tuple(w[:d])]


def indeg(trans, x0):
    return sum(trans[s][x0] for s in range(len(trans)))


def alpha(trans, tab):
    d = len(next(iter(tab)))
    return {w: value(tab, w[1:]) for w in words(trans, d + 1)}


def raw_T(trans, tab):
    d = len(next(iter(tab)))
    out = {}
    for x in words(trans, max(d - 1, 1)):
        total = 0
        for s in range(len(trans)):
            if trans[s][x[0]]:
                total += value(tab, (s,) + x) if d >= 1 else tab[()]
        out[x] = total
    return out


def transfer_L(trans, tab):
    return {x: v / indeg(trans, x[0]) for x, v in raw_T(trans, tab).items()}


def tower(trans, tab, n):
    out = tab
    for _ in range(n):
        out = transfer_L(trans, out)
    for _ in range(n):
        out = alpha(trans, out)
    return out


def mu(trans):
    return {w: indeg(trans, w[1]) for w in words(trans, 2)}


def cocycle(trans, tab, n):
    d = len(next(iter(tab)))
    depth = max(d + n - 1, 1) if n else 1
    if n == 0:
        return {w: 1 for w in words(trans, 1)}
    return {w: math.prod(value(tab, w[j:]) for j in range(n)) for w in words(trans, depth)}


def index_In(trans, n):
    return cocycle(trans, mu(trans), n)


def ruelle(trans, h_tab, beta, d):
    """Matrix ``R[x][y]`` with ``(Rf)(x) = sum_s h(sx)^-beta f(sx)`` on depth-d functions."""
    W = words(trans, d)
    pos = {w: i for i, w in enumerate(W)}
    R = np.zeros((len(W), len(W)))
    for x in W:
        for s in range(len(trans)):
            if trans[s][x[0]]:
                sx = (s,) + x
                R[pos[x], pos[sx[:d]]] += complex(value(h_tab, sx)).real ** (-beta)
    return R


def spectral_radius_constant(trans, c, beta):
    return max(abs(np.linalg.eigvals(np.array(trans, float)))) * c ** (-beta)


def bowen_two_symbol_root(e0: float, e1: float) -> float:
    """Full 2-shift with h = (exp(e0), exp(e1)) on the first symbol.

    The transfer matrix has rows ``(u^e0, u^e1)`` with ``u = exp(-beta)``, a
    rank-one matrix with eigenvalue ``u^e0 + u^e1``; for integer exponents
    the root of ``u^e0 + u^e1 = 1`` is found from the polynomial.
    """
    coeffs = [0.0] * (max(e0, e1) + 1)
    coeffs[max(e0, e1) - e0] += 1
    coeffs[max(e0, e1) - e1] += 1
    coeffs[-1] -= 1
    roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12 and 0 < r.real < 1]
    return -math.log(roots[0])


def golden_measure():
    """Eigenmeasure of the golden-mean shift at critical temperature, h constant.

    The transfer matrix is ``[[1,1],[1,0]]/phi``; its right Perron vector is
    ``(phi, 1)`` and the kernel is ``Q[s][t] = trans[s][t] nu_t / (phi nu_s)``.
    """
    phi = (1 + math.sqrt(5)) / 2
    nu = np.array([phi, 1.0]) / (phi + 1)
    trans = np.array([[1, 1], [1, 0]])
    Q = trans * nu[None, :] / (phi * nu[:, None])
    return nu, Q


def markov_weight(nu, Q, w):
    p = nu[w[0]]
    for a, b in zip(w, w[1:]):
        p *= Q[a][b]
    return p


def exact_tower_full2():
    """E_1(1_[00]) on the full 2-shift with exact fractions."""
    trans = [[1, 1], [1, 1]]
    ind = {w: Fraction(int(w == (0, 0))) for w in words(trans, 2)}
    return tower(trans, ind, 1)
