"""One-sided subshifts of finite type and locally constant functions on them.

A point of the shift space is an infinite word ``x0 x1 x2 ...`` in which
every consecutive pair is allowed by the 0/1 transition matrix.  A
:class:`CylFn` of depth ``d`` is a function of the first ``d`` symbols; it
stores one complex value per admissible ``d``-word, in lexicographic order.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    BadShape,
    DepthDecrease,
    NonPositive,
    NotSurjective,
    RowDead,
    SftMismatch,
)
from .tolerances import EPS_ALG

Word = Union[str, Sequence[int]]
Scalar = Union[int, float, complex]


@dataclass(frozen=True, eq=False)
class WordIndex:
    """Admissible words of one length, in lexicographic order."""

    depth: int
    words: np.ndarray  # (count, depth) int
    codes: np.ndarray  # base-`base` integer code of each word, ascending
    base: int

    def __len__(self) -> int:
        return len(self.words)

    def encode(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        if words.shape[-1] == 0:
            return np.zeros(words.shape[:-1], dtype=np.int64)
        powers = self.base ** np.arange(words.shape[-1] - 1, -1, -1, dtype=np.int64)
        return words @ powers

    def lookup(self, words: np.ndarray) -> np.ndarray:
        """Indices of the given (admissible) words; raises KeyError otherwise."""
        codes = self.encode(words)
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, len(self.codes) - 1)
        if not np.array_equal(self.codes[idx], codes):
            raise KeyError("inadmissible word")
        return idx

    def index(self, word: Word) -> int:
        return int(self.lookup(np.asarray([_as_tuple(word)], dtype=np.int64).reshape(1, -1))[0])

    def labels(self) -> list[str]:
        return [format_word(w) for w in self.words]


def _as_tuple(word: Word) -> tuple[int, ...]:
    if isinstance(word, str):
        if "," in word:
            return tuple(int(c) for c in word.split(",") if c != "")
        return tuple(int(c) for c in word)
    return tuple(int(c) for c in word)


def format_word(word: Iterable[int]) -> str:
    word = [int(c) for c in word]
    if any(c > 9 for c in word):
        return ",".join(str(c) for c in word)
    return "".join(str(c) for c in word)


@dataclass(frozen=True)
class Sft:
    """A subshift of finite type given by its alphabet size and 0/1 matrix.

    Instances are immutable and hashable; derived index tables are memoised
    per instance behind a lock.
    """

    k: int
    trans: tuple

    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, init=False, repr=False,
                                  compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise BadShape(f"alphabet size must be a positive integer, got {self.k!r}")
        try:
            mat = np.array(self.trans, dtype=float)
        except (TypeError, ValueError) as exc:
            raise BadShape(f"transition matrix is not numeric: {exc}") from None
        if mat.shape != (self.k, self.k):
            raise BadShape(f"transition matrix must be {self.k}x{self.k}, got shape {mat.shape}")
        if not np.all((mat == 0) | (mat == 1)):
            raise BadShape("transition matrix entries must be 0 or 1")
        mat = mat.astype(np.int64)
        dead = np.flatnonzero(mat.sum(axis=1) == 0)
        if dead.size:
            raise RowDead(f"symbol(s) {dead.tolist()} have no admissible successor")
        orphan = np.flatnonzero(mat.sum(axis=0) == 0)
        if orphan.size:
            raise NotSurjective(f"symbol(s) {orphan.tolist()} have no admissible predecessor")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "trans", tuple(tuple(int(v) for v in row) for row in mat))

    def _cached(self, key, build: Callable):
        try:
            return self._memo[key]
        except KeyError:
            pass
        with self._lock:
            if key not in self._memo:
                self._memo[key] = build()
            return self._memo[key]

    # -- basic data -----------------------------------------------------

    @property
    def matrix(self) -> np.ndarray:
        def build():
            m = np.array(self.trans, dtype=np.int64)
            m.setflags(write=False)
            return m
        return self._cached("matrix", build)

    @property
    def primitive(self) -> bool:
        """Some power of the transition matrix is entrywise positive."""
        def build():
            a = self.matrix.astype(bool)
            p = a.copy()
            # Wielandt: primitive iff the power (k-1)^2 + 1 is positive
            for _ in range((self.k - 1) ** 2):
                if p.all():
                    return True
                p = (p.astype(np.int64) @ a.astype(np.int64)) > 0
            return bool(p.all())
        return self._cached("primitive", build)

    def words(self, depth: int) -> WordIndex:
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        return self._cached(("words", depth), lambda: self._build_words(depth))

    def count(self, depth: int) -> int:
        return len(self.words(depth))

    def _build_words(self, depth: int) -> WordIndex:
        base = max(self.k, 2)
        if depth > 0 and base ** depth >= 2 ** 62:
            raise OverflowError(f"depth {depth} too large to index over {self.k} symbols")
        if depth == 0:
            words = np.zeros((1, 0), dtype=np.int64)
        elif depth == 1:
            words = np.arange(self.k, dtype=np.int64).reshape(-1, 1)
        else:
            prev = self.words(depth - 1).words
            rows, cols = np.nonzero(self.matrix[prev[:, -1]])
            words = np.concatenate([prev[rows], cols.reshape(-1, 1)], axis=1)
        words.setflags(write=False)
        idx = WordIndex(depth, words, np.zeros(len(words), dtype=np.int64), base)
        codes = idx.encode(words)
        codes.setflags(write=False)
        return WordIndex(depth, words, codes, base)

    # -- index maps between depths ---------------------------------------

    def prefix_map(self, depth: int, target: int) -> np.ndarray:
        """For each ``target``-word, the index of its length-``depth`` prefix."""
        if target < depth:
            raise DepthDecrease(f"cannot restrict depth {depth} to {target}")

        def build():
            if target == depth:
                return np.arange(self.count(depth))
            up = self.prefix_map(depth, target - 1)
            words = self.words(target).words
            if target - 1 == 0:
                return np.zeros(len(words), dtype=np.int64)
            step = self.words(target - 1).lookup(words[:, :-1])
            return up[step]
        return self._cached(("prefix", depth, target), build)

    def suffix_map(self, depth: int) -> np.ndarray:
        """For each ``(depth+1)``-word ``s w``, the index of ``w`` among ``depth``-words."""
        def build():
            words = self.words(depth + 1).words
            return self.words(depth).lookup(words[:, 1:])
        return self._cached(("suffix", depth), build)

    def shift_map(self, depth: int, n: int) -> np.ndarray:
        """For each ``(depth+n)``-word, the index of the word with its first ``n`` symbols dropped."""
        def build():
            if n == 0:
                return np.arange(self.count(depth))
            return self.shift_map(depth, n - 1)[self.suffix_map(depth + n - 1)]
        return self._cached(("shift", depth, n), build)

    def __repr__(self) -> str:
        return f"Sft(k={self.k}, trans={[list(r) for r in self.trans]})"


def build_sft(k: int, trans) -> Sft:
    """Validate and build a subshift of finite type."""
    try:
        rows = tuple(tuple(row) for row in trans)
    except TypeError:
        raise BadShape("transition matrix must be a sequence of rows") from None
    return Sft(k, rows)


def admissible_words(s: Sft, depth: int) -> WordIndex:
    return s.words(depth)


def full_shift(k: int) -> Sft:
    return build_sft(k, [[1] * k for _ in range(k)])


def golden_mean() -> Sft:
    return build_sft(2, [[1, 1], [1, 0]])


# ---------------------------------------------------------------------------


class CylFn:
    """Locally constant complex function depending on the first ``depth`` symbols.

    Arithmetic promotes both operands to the larger depth and acts entrywise.
    Instances are immutable.
    """

    __slots__ = ("sft", "depth", "values")

    def __init__(self, sft: Sft, depth: int, values):
        values = np.array(values, dtype=complex).reshape(-1)
        if values.shape != (sft.count(depth),):
            raise BadShape(
                f"depth {depth} needs {sft.count(depth)} values, got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "sft", sft)
        object.__setattr__(self, "depth", int(depth))
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("CylFn is immutable")

    # -- constructors ----------------------------------------------------

    @classmethod
    def const(cls, sft: Sft, c: Scalar = 1.0) -> "CylFn":
        return cls(sft, 0, [c])

    @classmethod
    def indicator(cls, sft: Sft, word: Word) -> "CylFn":
        w = _as_tuple(word)
        idx = sft.words(len(w))
        try:
            i = idx.index(w)
        except KeyError:
            raise ValueError(f"word {format_word(w)!r} is not admissible") from None
        vals = np.zeros(len(idx), dtype=complex)
        vals[i] = 1.0
        return cls(sft, len(w), vals)

    @classmethod
    def from_mapping(cls, sft: Sft, depth: int, table: Mapping[str, Scalar]) -> "CylFn":
        """Build from ``{word: value}``; every admissible word must be present."""
        idx = sft.words(depth)
        vals = np.full(len(idx), np.nan, dtype=complex)
        for key, value in table.items():
            w = _as_tuple(key)
            if len(w) != depth:
                raise ValueError(f"word {key!r} does not have length {depth}")
            try:
                vals[idx.index(w)] = value
            except KeyError:
                raise ValueError(f"word {key!r} is not admissible") from None
        missing = [lab for lab, v in zip(idx.labels(), vals) if np.isnan(v)]
        if missing:
            raise ValueError(f"no value given for admissible words {missing}")
        return cls(sft, depth, vals)

    @classmethod
    def symbol_function(cls, sft: Sft, values: Sequence[Scalar]) -> "CylFn":
        return cls(sft, 1, values)

    # -- structure -------------------------------------------------------

    def promote(self, depth: int) -> "CylFn":
        if depth == self.depth:
            return self
        if depth < self.depth:
            raise DepthDecrease(f"cannot promote depth {self.depth} to {depth}")
        return CylFn(self.sft, depth, self.values[self.sft.prefix_map(self.depth, depth)])

    def at(self, word: Word) -> complex:
        """Value at any admissible word of length >= depth."""
        w = _as_tuple(word)
        if len(w) < self.depth:
            raise ValueError(f"word must have length >= {self.depth}")
        return complex(self.values[self.sft.words(self.depth).index(w[: self.depth])])

    def as_dict(self) -> dict[str, complex]:
        return dict(zip(self.sft.words(self.depth).labels(), self.values.tolist()))

    def _coerce(self, other) -> "CylFn":
        if isinstance(other, CylFn):
            if other.sft != self.sft:
                raise SftMismatch("operands live on different shift spaces")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return CylFn.const(self.sft, other)
        return NotImplemented

    def _binary(self, other, op) -> "CylFn":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = max(self.depth, other.depth)
        return CylFn(self.sft, d, op(self.promote(d).values, other.promote(d).values))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return self._binary(other, lambda x, y: y / x)

    def __neg__(self):
        return CylFn(self.sft, self.depth, -self.values)

    def conj(self) -> "CylFn":
        return CylFn(self.sft, self.depth, np.conj(self.values))

    def inv(self) -> "CylFn":
        if np.any(self.values == 0):
            raise ZeroDivisionError("function vanishes somewhere")
        return CylFn(self.sft, self.depth, 1.0 / self.values)

    # -- pointwise transforms --------------------------------------------

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> "CylFn":
        return CylFn(self.sft, self.depth, fn(self.values))

    def _positive_log(self) -> np.ndarray:
        v = self.values
        if np.any(np.abs(v.imag) > EPS_ALG) or np.any(v.real <= 0):
            raise NonPositive("function must be strictly positive")
        return np.log(v.real)

    def exp(self) -> "CylFn":
        return self.apply(np.exp)

    def log(self) -> "CylFn":
        return CylFn(self.sft, self.depth, self._positive_log())

    def power(self, p: Scalar) -> "CylFn":
        """``self ** p`` for strictly positive ``self`` and real or complex ``p``."""
        return CylFn(self.sft, self.depth, np.exp(p * self._positive_log()))

    def iz_power(self, z: Scalar) -> "CylFn":
        """``self ** (i z) = exp(i z ln self)``."""
        return self.power(1j * z)

    # -- norms and comparison --------------------------------------------

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def distance(self, other) -> float:
        return (self - other).sup_norm()

    def allclose(self, other, tol: float = EPS_ALG) -> bool:
        return self.distance(other) <= tol

    def is_real(self, tol: float = EPS_ALG) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def min_real(self) -> float:
        return float(np.min(self.values.real))

    def __repr__(self) -> str:
        vals = ", ".join(f"{k}: {_fmt(v)}" for k, v in self.as_dict().items())
        return f"CylFn(depth={self.depth}, {{{vals}}})"


def _fmt(v: complex) -> str:
    if v.imag == 0:
        return f"{v.real:.6g}"
    return f"{v:.6g}"


def promote(f: CylFn, depth: int) -> CylFn:
    return f.promote(depth)


def sup_norm(f: CylFn) -> float:
    return f.sup_norm()


def pointwise_transform(f: CylFn, fn: Union[str, Callable], arg: Scalar = None) -> CylFn:
    """Entrywise ``exp``, ``log``, real/complex ``power`` or ``iz_power``, or any ufunc."""
    if callable(fn):
        return f.apply(fn)
    if fn == "exp":
        return f.exp()
    if fn == "log":
        return f.log()
    if fn == "power":
        return f.power(arg)
    if fn == "iz_power":
        return f.iz_power(arg)
    raise ValueError(f"unknown transform {fn!r}")


def symbol_indicators(s: Sft) -> list[CylFn]:
    return [CylFn.indicator(s, (i,)) for i in range(s.k)]


def basis(s: Sft, depth: int) -> list[CylFn]:
    """Indicator functions of all admissible ``depth``-cylinders."""
    n = s.count(depth)
    eye = np.eye(n, dtype=complex)
    return [CylFn(s, depth, eye[i]) for i in range(n)]


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockCode:
    """Dictionary between a shift and its ``r``-block presentation.

    Block letters are the admissible ``(r-1)``-words of the original shift, so
    a depth-``r`` function upstairs becomes a depth-2 function on the block
    shift.
    """

    original: Sft
    block: Sft
    r: int
    letters: WordIndex

    @property
    def overlap(self) -> int:
        return self.r - 2

    def letter_word(self, letter: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.letters.words[letter])

    def _merged(self, block_words: np.ndarray) -> np.ndarray:
        """Original words spelled by the given block words."""
        letters = self.letters.words
        head = letters[block_words[:, 0]]
        tail = letters[block_words[:, 1:], -1] if block_words.shape[1] > 1 else np.zeros(
            (len(block_words), 0), dtype=np.int64)
        return np.concatenate([head, tail], axis=1)

    def lift(self, f: CylFn) -> CylFn:
        """Transport a function on the original shift to the block shift."""
        if f.sft != self.original:
            raise SftMismatch("function does not live on the original shift")
        m = max(f.depth - self.r + 2, 1)
        block_words = self.block.words(m).words
        merged = self._merged(block_words)
        idx = self.original.words(merged.shape[1]).lookup(merged)
        idx = self.original.prefix_map(f.depth, merged.shape[1])[idx]
        return CylFn(self.block, m, f.values[idx])

    def lower(self, g: CylFn) -> CylFn:
        """Transport a function on the block shift back to the original shift."""
        if g.sft != self.block:
            raise SftMismatch("function does not live on the block shift")
        m = max(g.depth, 1)
        g = g.promote(m)
        d = m + self.r - 2
        words = self.original.words(d).words
        windows = np.stack([self.letters.lookup(words[:, i:i + self.r - 1]) for i in range(m)],
                           axis=1)
        idx = self.block.words(m).lookup(windows)
        return CylFn(self.original, d, g.values[idx])


def higher_block_recode(s: Sft, r: int) -> tuple[Sft, BlockCode]:
    """Recode ``s`` on the alphabet of its admissible ``(r-1)``-words."""
    if r < 2:
        raise ValueError("block length r must be >= 2")
    letters = s.words(r - 1)
    words = letters.words
    n = len(words)
    trans = np.zeros((n, n), dtype=np.int64)
    for u in range(n):
        for v in range(n):
            if np.array_equal(words[u, 1:], words[v, :-1]) and s.matrix[words[u, -1], words[v, -1]]:
                trans[u, v] = 1
    block = build_sft(n, trans.tolist())
    return block, BlockCode(s, block, r, letters)
