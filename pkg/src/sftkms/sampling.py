"""Seeded random generators for cylinder functions and spanning terms."""

from __future__ import annotations

import numpy as np

from .shift import CylFn, Sft
from .star import StarElem, StarTerm


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``, so results do not depend on order."""
    return np.random.default_rng([int(seed), int(index)])


def random_complex(rng: np.random.Generator, size, bound: float = 10.0) -> np.ndarray:
    """Complex values uniform on the disc of radius ``bound``."""
    r = bound * np.sqrt(rng.random(size))
    theta = 2 * np.pi * rng.random(size)
    return r * np.exp(1j * theta)


def random_cylfn(rng: np.random.Generator, s: Sft, max_depth: int = 4, bound: float = 10.0,
                 depth: int | None = None, real: bool = False) -> CylFn:
    d = int(rng.integers(0, max_depth + 1)) if depth is None else depth
    n = s.count(d)
    vals = bound * (2 * rng.random(n) - 1) if real else random_complex(rng, n, bound)
    return CylFn(s, d, vals)


def random_positive(rng: np.random.Generator, s: Sft, depth: int, low: float = 0.5,
                    high: float = 2.0) -> CylFn:
    return CylFn(s, depth, low + (high - low) * rng.random(s.count(depth)))


def random_unitary(rng: np.random.Generator, s: Sft, depth: int) -> CylFn:
    return CylFn(s, depth, np.exp(2j * np.pi * rng.random(s.count(depth))))


def random_star_term(rng: np.random.Generator, s: Sft, max_exp: int = 4, max_depth: int = 4,
                     bound: float = 10.0, n: int | None = None, m: int | None = None) -> StarTerm:
    n = int(rng.integers(0, max_exp + 1)) if n is None else n
    m = int(rng.integers(0, max_exp + 1)) if m is None else m
    a = random_cylfn(rng, s, max_depth, bound)
    b = random_cylfn(rng, s, max_depth, bound)
    return StarTerm(a, n, m, b)


def random_star(rng: np.random.Generator, s: Sft, max_exp: int = 4, max_depth: int = 4,
                bound: float = 10.0, terms: int = 1, gauge_fixed: bool = False) -> StarElem:
    out = []
    for _ in range(terms):
        if gauge_fixed:
            n = int(rng.integers(0, max_exp + 1))
            out.append(random_star_term(rng, s, max_exp, max_depth, bound, n=n, m=n))
        else:
            out.append(random_star_term(rng, s, max_exp, max_depth, bound))
    return StarElem(s, out)
