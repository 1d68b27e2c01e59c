"""Registry of executable property suites.

Each suite takes a :class:`VerifyContext` and returns an :class:`Outcome`
(worst residual and sample count).  :func:`run_suites` turns those into
:class:`SuiteResult` records with a pass/fail/skipped status, sorted by label
so that reports are deterministic.

Algebraic residuals are ``sup|lhs - rhs| / max(1, sup|rhs|)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import endo, tower
from .errors import NoKmsState, NotPrimitive, PotentialNotAboveOne, SftKmsError
from .kms import (
    CylMeasure,
    KmsSolution,
    dominant_eigen,
    eigen_equation_residual,
    ground_verify,
    kms_measure,
    kms_solve,
    kms_verify,
    lift_measure,
    pressure_curve,
    ruelle_matrix,
    spectral_radius,
    transfer_matrix_C,
)
from .sampling import random_cylfn, random_positive, random_star, random_unitary, sample_rng
from .shift import CylFn, Sft, basis, higher_block_recode, symbol_indicators
from .star import (
    StarElem,
    StarTerm,
    expectation_G,
    fixed_point_project_P,
    gauge_gamma,
    gauge_sigma_u,
    gauge_sigma_z,
    ground_functional,
    probe_distance,
    product,
    redundancy_element_k,
    sigma_i_beta,
    star_multiply,
    star_to_span,
    term_product,
)
from .tolerances import EPS_ALG, EPS_NUM
from .tower import LinOp, SpanElem, SpanTerm


class Skip(Exception):
    """Raised by a suite that does not apply to the configured system."""

    def __init__(self, reason: str, cause: Exception | None = None):
        super().__init__(reason)
        self.cause = cause


@dataclass
class Outcome:
    residual: float
    samples: int
    passed: bool | None = None
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SuiteResult:
    label: str
    status: str  # "pass" | "fail" | "skipped"
    residual: float | None
    tolerance: float | None
    samples: int
    reason: str | None = None

    def as_dict(self) -> dict:
        out = {"status": self.status, "samples": self.samples}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class VerifyContext:
    sft: Sft
    potential: CylFn | None = None
    beta: float | None = None
    measure: CylMeasure | None = None
    depth_test: int = 4
    depth_ops: int = 5
    eps_alg: float = EPS_ALG
    eps_num: float = EPS_NUM
    seed: int = 0
    kms_samples: int = 1000
    ground_samples: int = 100
    algebra_samples: int = 200
    _solution: object = field(default=None, repr=False)

    def rng(self, label: str, i: int) -> np.random.Generator:
        # stable per-suite stream; crc-style hash so it does not depend on PYTHONHASHSEED
        tag = int.from_bytes(label.encode(), "little") % (2 ** 61 - 1)
        return np.random.default_rng([self.seed, tag, i])

    def samples(self, label: str):
        for i in range(self.algebra_samples):
            yield self.rng(label, i)

    def gauge_potential(self) -> CylFn:
        """Positive potential for gauge checks; the configured one when present."""
        if self.potential is not None:
            return self.potential
        return random_positive(self.rng("potential", 0), self.sft, 2, 1.5, 4.0)

    def solution(self) -> KmsSolution:
        if self._solution is None:
            self._solution = self._solve()
        if isinstance(self._solution, Skip):
            raise self._solution
        return self._solution

    @property
    def no_kms(self) -> bool:
        """True once solving has shown there is no KMS state at the requested beta."""
        if self.potential is not None and self._solution is None:
            self._solution = self._solve()
        return isinstance(self._solution, Skip) and isinstance(self._solution.cause, NoKmsState)

    def _solve(self):
        h = self.potential
        if h is None:
            return Skip("no potential configured")
        try:
            if self.measure is not None:
                return self._supplied(h)
            if self.beta is None:
                return kms_solve(self.sft, h, self.depth_test)
            return kms_measure(self.sft, h, self.beta, self.depth_test)
        except NotPrimitive:
            return Skip("transition matrix is not primitive")
        except PotentialNotAboveOne:
            return Skip("potential is not bounded below by a constant above one")
        except NoKmsState as exc:
            return Skip(f"no KMS state at beta={exc.beta:.12g} (spectral radius {exc.rho:.12g})",
                        exc)

    def _supplied(self, h: CylFn) -> KmsSolution:
        if not self.sft.primitive:
            raise NotPrimitive("transition matrix is not primitive")
        beta = self.beta
        if beta is None:
            from .kms import bowen_solve
            beta = bowen_solve(self.sft, h).beta
        measure, system, code, g = self.measure, self.sft, None, h
        if h.depth > 2:
            system, code = higher_block_recode(self.sft, h.depth)
            measure, g = lift_measure(code, measure), code.lift(h)
        eig = dominant_eigen(transfer_matrix_C(system, g, beta))
        resid = eigen_equation_residual(measure, g, beta, self.depth_test)
        return KmsSolution(beta, measure, abs(eig.rho - 1), eig.eigengap, resid,
                           self.sft, h, system, code, {"supplied": True})


@dataclass(frozen=True)
class Suite:
    label: str
    fn: Callable[[VerifyContext], Outcome]
    tolerance: Callable[[VerifyContext], float]
    description: str


REGISTRY: dict[str, Suite] = {}


def suite(label: str, tol: str | float = "alg"):
    def tol_fn(ctx: VerifyContext) -> float:
        if tol == "alg":
            return ctx.eps_alg
        if tol == "num":
            return ctx.eps_num
        return float(tol)

    def register(fn):
        doc = (fn.__doc__ or "").strip().splitlines()
        REGISTRY[label] = Suite(label, fn, tol_fn, doc[0] if doc else "")
        return fn
    return register


def run_suites(ctx: VerifyContext, labels=None) -> list[SuiteResult]:
    chosen = sorted(REGISTRY) if labels is None else sorted(labels)
    out = []
    for label in chosen:
        s = REGISTRY[label]
        tol = s.tolerance(ctx)
        try:
            o = s.fn(ctx)
        except Skip as exc:
            out.append(SuiteResult(label, "skipped", None, None, 0, str(exc)))
            continue
        except SftKmsError as exc:
            out.append(SuiteResult(label, "fail", None, tol, 0, f"{type(exc).__name__}: {exc}"))
            continue
        residual = float(o.residual)
        passed = o.passed if o.passed is not None else bool(residual <= tol)
        out.append(SuiteResult(label, "pass" if passed else "fail", residual, tol, o.samples))
    return out


# -- helpers -------------------------------------------------------------------------------


def _rel(x, y) -> float:
    """Scaled distance between two CylFn, LinOp, or scalars."""
    if isinstance(x, LinOp):
        return x.distance(y) / max(1.0, y.max_abs())
    if isinstance(x, CylFn):
        return x.distance(y) / max(1.0, y.sup_norm())
    return abs(x - y) / max(1.0, abs(y))


def _small(rng, s, max_depth=4):
    """Random function with values in the unit disc."""
    return random_cylfn(rng, s, max_depth, bound=1.0)


def _small_star(rng, s, max_exp=4, max_depth=4, terms=1, gauge_fixed=False):
    return random_star(rng, s, max_exp, max_depth, bound=1.0, terms=terms,
                       gauge_fixed=gauge_fixed)


def _probes(rng, s, count=2):
    return [_small_star(rng, s, 2, 2) for _ in range(count)]


def _functional_rel(x: StarElem, y: StarElem, probes) -> float:
    scale = max(1.0, probe_distance(y, StarElem.zero(y.sft), probes))
    return probe_distance(x, y, probes) / scale


def _canonical(t: StarTerm) -> StarTerm:
    """Slide functions across a one-sided monomial: ``a S^n b = a alpha^n(b) S^n``."""
    one = CylFn.const(t.a.sft, 1.0)
    if t.m == 0:
        return StarTerm(t.a * endo.alpha_power(t.b, t.n), t.n, 0, one)
    if t.n == 0:
        return StarTerm(one, 0, t.m, endo.alpha_power(t.a, t.m) * t.b)
    return t


def _terms_rel(x: StarElem, y: StarElem) -> float:
    """Termwise distance when both sides have the same exponent pattern."""
    if [(t.n, t.m) for t in x.terms] != [(t.n, t.m) for t in y.terms]:
        return float("inf")
    worst = 0.0
    for p, q in zip(map(_canonical, x.terms), map(_canonical, y.terms)):
        worst = max(worst, _rel(p.a, q.a), _rel(p.b, q.b))
    return worst


def _bases(s: Sft, max_depth: int):
    for d in range(max_depth + 1):
        yield from basis(s, d)


# -- shift-space core --------------------------------------------------------------------------


@suite("core.partition_of_unity")
def _partition(ctx):
    """Symbol indicators sum to one."""
    total = sum(symbol_indicators(ctx.sft), CylFn.const(ctx.sft, 0.0))
    return Outcome(total.distance(CylFn.const(ctx.sft, 1.0)), 1)


@suite("core.promotion_embedding")
def _promotion(ctx):
    """Promotion commutes with norms and pointwise operations."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("core.promotion_embedding"):
        f, g = _small(rng, s), _small(rng, s)
        d = max(f.depth, g.depth) + int(rng.integers(0, 3))
        worst = max(worst,
                    (f + g).promote(d).distance(f.promote(d) + g.promote(d)),
                    (f * g).promote(d).distance(f.promote(d) * g.promote(d)),
                    f.conj().promote(d).distance(f.promote(d).conj()),
                    abs(f.promote(d).sup_norm() - f.sup_norm()),
                    f.promote(d).promote(d + 1).distance(f.promote(d + 1)))
    return Outcome(worst, ctx.algebra_samples)


@suite("core.word_counts")
def _word_counts(ctx):
    """Admissible word counts agree with matrix powers and brute enumeration."""
    s, worst = ctx.sft, 0.0
    A = s.matrix
    for d in range(1, ctx.depth_ops + 2):
        worst = max(worst, abs(s.count(d) - int(np.linalg.matrix_power(A, d - 1).sum())))
        if s.k ** d <= 20000:
            brute = [w for w in itertools.product(range(s.k), repeat=d)
                     if all(A[w[i], w[i + 1]] for i in range(d - 1))]
            listed = [tuple(w) for w in s.words(d).words.tolist()]
            worst = max(worst, 0.0 if brute == listed else 1.0)
    return Outcome(float(worst), ctx.depth_ops + 1)


@suite("core.block_recoding")
def _block_recoding(ctx):
    """Block recoding transports cylinder functions faithfully."""
    s, worst = ctx.sft, 0.0
    for r in (2, 3, 4):
        block, code = higher_block_recode(s, r)
        for rng in itertools.islice(ctx.samples("core.block_recoding"), 40):
            f = _small(rng, s, 5)
            g = code.lift(f)
            worst = max(worst, code.lower(g).distance(f))
            words = s.words(max(f.depth, r)).words
            w = words[int(rng.integers(0, len(words)))]
            letters = [code.letters.index(w[i:i + r - 1]) for i in range(len(w) - r + 2)]
            worst = max(worst, abs(g.at(letters) - f.at(w)))
    return Outcome(worst, 120)


# -- endomorphism calculus -----------------------------------------------------------------------


@suite("endo.transfer_module_property")
def _transfer_module(ctx):
    """L(alpha(f) g) = f L(g) and L(1) = 1."""
    s = ctx.sft
    worst = endo.transfer_L(CylFn.const(s, 1.0)).distance(CylFn.const(s, 1.0))
    for rng in ctx.samples("endo.transfer_module_property"):
        f, g = _small(rng, s, 5), _small(rng, s, 5)
        worst = max(worst, _rel(endo.transfer_L(endo.alpha(f) * g), f * endo.transfer_L(g)))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.expectation_factorization")
def _expectation(ctx):
    """E = alpha L is an idempotent, faithful expectation onto the range of alpha."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.expectation_factorization"):
        f = _small(rng, s, 5)
        e = endo.expectation_E(f)
        worst = max(worst,
                    _rel(endo.expectation_E(e), e),
                    _rel(endo.transfer_L(f), endo.alpha_inverse(e)),
                    _rel(endo.expectation_E(endo.alpha(f)), endo.alpha(f)))
    faithful = 0.0
    for b in _bases(s, ctx.depth_test):
        if endo.expectation_E(b.conj() * b).sup_norm() <= 0:
            faithful = 1.0
    return Outcome(max(worst, faithful), ctx.algebra_samples)


@suite("endo.tower_recursion")
def _tower_recursion(ctx):
    """The next tower expectation equals E_n after E-tower_n, and alpha E-tower_n alpha^-1 E."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.tower_recursion"):
        f = _small(rng, s, 5)
        n = int(rng.integers(0, 5))
        nxt = endo.tower_expectation(f, n + 1)
        via_level = endo.level_expectation_En(endo.tower_expectation(f, n), n)
        via_conj = endo.alpha(endo.tower_expectation(
            endo.alpha_inverse(endo.expectation_E(f), 1), n))
        worst = max(worst, _rel(via_level, nxt), _rel(via_conj, nxt))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.tower_nesting")
def _tower_nesting(ctx):
    """Successive tower expectations absorb each other in either order."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.tower_nesting"):
        f = _small(rng, s, 5)
        n = int(rng.integers(0, 5))
        big = endo.tower_expectation(f, n + 1)
        worst = max(worst,
                    _rel(endo.tower_expectation(endo.tower_expectation(f, n), n + 1), big),
                    _rel(endo.tower_expectation(big, n), big),
                    _rel(endo.tower_expectation(endo.tower_expectation(f, n), n),
                         endo.tower_expectation(f, n)))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.cocycle_additivity")
def _cocycle_additivity(ctx):
    """f^[n+m] = f^[n] alpha^n(f^[m])."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.cocycle_additivity"):
        f = _small(rng, s, 3)
        n = int(rng.integers(0, 4))
        m = int(rng.integers(0, 7 - n))
        worst = max(worst, _rel(endo.cocycle_power(f, n) * endo.alpha_power(
            endo.cocycle_power(f, m), n), endo.cocycle_power(f, n + m)))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.cocycle_central")
def _cocycle_central(ctx):
    """Cocycle powers are multiplicative, commute with inversion, and respect bounds."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.cocycle_central"):
        f, g = _small(rng, s, 3), _small(rng, s, 3)
        n = int(rng.integers(0, 6))
        worst = max(worst, _rel(endo.cocycle_power(f, n) * endo.cocycle_power(g, n),
                                endo.cocycle_power(f * g, n)))
        lam = f + 2.0  # |f| <= 1 so this is invertible
        worst = max(worst, _rel(endo.cocycle_power(lam, n).inv(),
                                endo.cocycle_power(lam.inv(), n)))
        c = float(rng.uniform(0.5, 2.0))
        pos = CylFn(s, f.depth, c * rng.random(s.count(f.depth)))
        p = endo.cocycle_power(pos, n).values.real
        worst = max(worst, max(0.0, -p.min()), max(0.0, p.max() - c ** n) / max(1.0, c ** n))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.cocycle_transfer")
def _cocycle_transfer(ctx):
    """Weighted transfer identities for lambda^[n] in both left and right forms."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.cocycle_transfer"):
        lam = random_positive(rng, s, int(rng.integers(0, 3)), 0.5, 2.0) \
            * random_unitary(rng, s, 1)
        a = _small(rng, s, 3)
        n, m, p = (int(v) for v in rng.integers(0, 4, size=3))
        inv = lam.inv()

        def side(k, j, left):
            inner = endo.cocycle_power(lam, k)
            inner = inner * a if left else a * inner
            body = endo.alpha_power(endo.transfer_power(inner, n), m)
            return endo.cocycle_power(inv, j) * body

        worst = max(worst, _rel(side(n + p, m + p, True), side(n, m, True)),
                    _rel(side(n + p, m + p, False), side(n, m, False)))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.quasi_basis_reconstruction")
def _quasi_basis(ctx):
    """sum u_i E(u_i* f) = f on full bases and random samples."""
    s = ctx.sft
    qb = endo.quasi_basis(s)
    worst, count = 0.0, 0
    for b in _bases(s, ctx.depth_test):
        worst = max(worst, _rel(qb.reconstruct(b), b))
        count += 1
    for rng in ctx.samples("endo.quasi_basis_reconstruction"):
        f = _small(rng, s, 5)
        worst = max(worst, _rel(qb.reconstruct(f), f))
    mu = endo.watatani_index(s).mu
    worst = max(worst, _rel(sum((u * u.conj() for u in qb), CylFn.const(s, 0.0)), mu))
    return Outcome(worst, count + ctx.algebra_samples)


@suite("endo.index_cocycle")
def _index(ctx):
    """The index is at least one, I_n is its cocycle power, and I_0 = 1."""
    s = ctx.sft
    mu = endo.watatani_index(s).mu
    worst = max(0.0, 1.0 - mu.min_real())
    worst = max(worst, endo.index_cocycle_In(s, 0).distance(CylFn.const(s, 1.0)))
    for n in range(1, 5):
        direct = CylFn.const(s, 1.0)
        for j in range(n):
            direct = direct * endo.alpha_power(mu, j)
        worst = max(worst, _rel(endo.index_cocycle_In(s, n), direct))
    return Outcome(worst, 5)


@suite("endo.cauchy_schwarz")
def _cauchy_schwarz(ctx):
    """E(a)* E(a) <= E(a* a), also after a tower expectation."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.cauchy_schwarz"):
        a = _small(rng, s, 5)
        n = int(rng.integers(0, 4))
        ea = endo.expectation_E(a)
        lhs = endo.tower_expectation(ea.conj() * ea, n)
        rhs = endo.tower_expectation(endo.expectation_E(a.conj() * a), n)
        gap = (rhs - lhs).values
        worst = max(worst, float(np.max(np.abs(gap.imag))), max(0.0, -float(gap.real.min())))
    return Outcome(worst, ctx.algebra_samples)


@suite("endo.inner_product")
def _inner_product(ctx):
    """Module inner products are conjugate-symmetric and positive."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("endo.inner_product"):
        a, b = _small(rng, s, 4), _small(rng, s, 4)
        n = int(rng.integers(0, 5))
        worst = max(worst, _rel(endo.inner_product_n(a, b, n),
                                endo.inner_product_n(b, a, n).conj()))
        aa = endo.inner_product_n(a, a, n).values
        worst = max(worst, float(np.max(np.abs(aa.imag))), max(0.0, -float(aa.real.min())))
    return Outcome(worst, ctx.algebra_samples)


# -- module tower ---------------------------------------------------------------------------------


def _tower_depths(ctx, lo=1):
    return range(lo, ctx.depth_ops + 1)


@suite("tower.left_inverse")
def _left_inverse(ctx):
    """L_mat alpha_mat is the identity at every depth."""
    s, worst, count = ctx.sft, 0.0, 0
    for D in _tower_depths(ctx):
        worst = max(worst, (tower.L_mat(s, D + 1) @ tower.alpha_mat(s, D)).distance(
            LinOp.identity(s, D)))
        worst = max(worst, tower.L_mat(s, D).distance(LinOp.from_map(s, D, endo.transfer_L)))
        worst = max(worst, tower.alpha_mat(s, D).distance(LinOp.from_map(s, D, endo.alpha)))
        count += 1
    return Outcome(worst, count)


@suite("tower.lift_adjoint_relation")
def _lift_adjoint(ctx):
    """<alpha xi, eta>_{n+1} = alpha(<xi, L eta>_n) on basis vectors."""
    s, worst, count = ctx.sft, 0.0, 0
    for n in range(4):
        for D in range(max(n, 1), min(ctx.depth_ops, n + 2) + 1):
            if s.count(D) * s.count(D + 1) > 6000:
                continue
            L = tower.L_mat(s, D + 1)
            A = tower.alpha_mat(s, D)
            for xi in basis(s, D):
                ax = A.apply(xi)
                for eta in basis(s, D + 1):
                    lhs = endo.inner_product_n(ax, eta, n + 1)
                    rhs = endo.alpha(endo.inner_product_n(xi, L.apply(eta), n))
                    worst = max(worst, _rel(lhs, rhs))
                    count += 1
    return Outcome(worst, count)


@suite("tower.lifted_projection")
def _lifted_projection(ctx):
    """alpha_mat e_n L_mat = e_{n+1} as matrices."""
    s, worst, count = ctx.sft, 0.0, 0
    for n in range(4):
        for D in range(n + 1, ctx.depth_ops + 1):
            lifted = tower.alpha_mat(s, D) @ tower.basic_projection_en(s, n, D) @ tower.L_mat(s, D + 1)
            worst = max(worst, lifted.distance(tower.basic_projection_en(s, n + 1, D + 1)))
            count += 1
    return Outcome(worst, count)


@suite("tower.projection_self_adjoint")
def _projection(ctx):
    """e_n is idempotent and self-adjoint for the index-n module inner product."""
    s, worst, count = ctx.sft, 0.0, 0
    for n in range(4):
        for D in range(n + 1, ctx.depth_ops + 1):
            P = tower.basic_projection_en(s, n, D)
            worst = max(worst, (P @ P).distance(P))
            if s.count(D) <= 200:
                worst = max(worst, tower.module_adjoint_residual(P, n))
            count += 1
    return Outcome(worst, count)


@suite("tower.projection_order")
def _projection_order(ctx):
    """e_{n+1} e_n = e_n e_{n+1} = e_{n+1}."""
    s, worst, count = ctx.sft, 0.0, 0
    for n in range(4):
        for D in range(n + 2, ctx.depth_ops + 1):
            P, Q = tower.basic_projection_en(s, n, D), tower.basic_projection_en(s, n + 1, D)
            worst = max(worst, (Q @ P).distance(Q), (P @ Q).distance(Q))
            count += 1
    return Outcome(worst, count)


@suite("tower.projection_compression")
def _compression(ctx):
    """e_n a e_n = E-tower_n(a) e_n = e_n E-tower_n(a) as matrices."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.projection_compression"):
        n = int(rng.integers(0, 4))
        D = int(rng.integers(n + 1, ctx.depth_ops + 1))
        a = _small(rng, s, D)
        P = tower.basic_projection_en(s, n, D)
        ea = tower.mult_op(endo.tower_expectation(a, n), D)
        lhs = P @ tower.mult_op(a, D) @ P
        worst = max(worst, _rel(lhs, ea @ P), _rel(lhs, P @ ea))
    return Outcome(worst, ctx.algebra_samples)


@suite("tower.beta_endomorphism")
def _beta(ctx):
    """beta is multiplicative and injective, sends e_n to e_{n+1} and a to alpha(a) e_1."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.beta_endomorphism"):
        D = int(rng.integers(1, ctx.depth_ops))
        n = int(rng.integers(0, D))
        m = s.count(D)
        T = LinOp(s, D, D, rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
        U = LinOp(s, D, D, rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
        bT, bU = tower.beta_on_operator(T), tower.beta_on_operator(U)
        worst = max(worst, _rel(tower.beta_on_operator(T @ U), bT @ bU),
                    _rel(tower.L_mat(s, D + 1) @ bT @ tower.alpha_mat(s, D), T))
        worst = max(worst, tower.beta_on_operator(tower.basic_projection_en(s, n, D)).distance(
            tower.basic_projection_en(s, n + 1, D + 1)))
        a = _small(rng, s, D)
        e1 = tower.basic_projection_en(s, 1, D + 1)
        ma = tower.mult_op(endo.alpha(a), D + 1)
        ba = tower.beta_on_operator(tower.mult_op(a, D))
        worst = max(worst, _rel(ba, ma @ e1), _rel(ba, e1 @ ma))
    worst = max(worst, tower.beta_on_operator(LinOp.identity(s, 2)).distance(
        tower.basic_projection_en(s, 1, 3)))
    return Outcome(worst, ctx.algebra_samples)


@suite("tower.hereditary_corner")
def _hereditary(ctx):
    """e_1 (a e_n b) e_1 is the lift of L(a) e_{n-1} L(b), and beta(a e_n b) is a corner."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.hereditary_corner"):
        D = int(rng.integers(2, ctx.depth_ops))
        n = int(rng.integers(0, D))
        a, b = _small(rng, s, D), _small(rng, s, D)
        e1 = tower.basic_projection_en(s, 1, D + 1)
        x = SpanElem.term(a, n, b)
        lhs = e1 @ x.to_linop(D + 1) @ e1
        if n >= 1:
            inner = SpanElem.term(endo.transfer_L(a), n - 1, endo.transfer_L(b)).to_linop(D)
        else:
            inner = SpanElem.of_function(endo.transfer_L(a * b)).to_linop(D)
        worst = max(worst, _rel(lhs, tower.beta_on_operator(inner)))
        lifted = tower.beta_on_operator(x.to_linop(D))
        corner = e1 @ SpanElem.term(endo.alpha(a), n + 1, endo.alpha(b)).to_linop(D + 1) @ e1
        worst = max(worst, _rel(lifted, corner))
    return Outcome(worst, ctx.algebra_samples)


@suite("tower.quasi_basis_expansion")
def _qb_expansion(ctx):
    """e_n = sum alpha^n(u_i) e_{n+1} alpha^n(u_i*), and a e_n b expands accordingly."""
    s, worst, count = ctx.sft, 0.0, 0
    for n in range(4):
        for D in range(n + 2, ctx.depth_ops + 1):
            worst = max(worst, tower.quasi_basis_projection_identity(s, n, D))
            count += 1
    for rng in itertools.islice(ctx.samples("tower.quasi_basis_expansion"), 60):
        n = int(rng.integers(0, 3))
        D = int(rng.integers(n + 2, ctx.depth_ops + 1))
        x = SpanElem.term(_small(rng, s, D), n, _small(rng, s, D))
        worst = max(worst, _rel(tower.raise_index(x).to_linop(D), x.to_linop(D)))
        count += 1
    return Outcome(worst, count)


@suite("tower.span_product")
def _span_product(ctx):
    """Reduced products of a e_n b triples match the operator products."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.span_product"):
        D = int(rng.integers(1, ctx.depth_ops + 1))
        x = SpanElem.term(_small(rng, s, D), int(rng.integers(0, D)), _small(rng, s, D))
        y = SpanElem.term(_small(rng, s, D), int(rng.integers(0, D)), _small(rng, s, D))
        xy = tower.span_product(x, y)
        worst = max(worst, _rel(xy.to_linop(D), x.to_linop(D) @ y.to_linop(D)))
    return Outcome(worst, ctx.algebra_samples)


@suite("tower.expectation_compatibility")
def _gn_compat(ctx):
    """G_{n+1} restricted to index n is G_n; the termwise expectation is an A-bimodule map."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.expectation_compatibility"):
        n = int(rng.integers(0, 4))
        x = SpanElem(s, [SpanTerm(_small(rng, s), n, _small(rng, s)) for _ in range(2)])
        worst = max(worst, _rel(tower.expectation_Gn(tower.raise_index(x), n + 1),
                                tower.expectation_Gn(x, n)))
        mixed = x + SpanElem.term(_small(rng, s), int(rng.integers(0, 4)), _small(rng, s))
        a, b = _small(rng, s), _small(rng, s)
        worst = max(worst, _rel(tower.expectation_F_check(mixed.left(a).right(b)),
                                a * tower.expectation_F_check(mixed) * b))
    return Outcome(worst, ctx.algebra_samples)


@suite("tower.expectation_positive", tol=1e-10)
def _gn_positive(ctx):
    """G_n(x* x) is pointwise nonnegative."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("tower.expectation_positive"):
        n = int(rng.integers(0, 4))
        x = SpanElem(s, [SpanTerm(_small(rng, s), n, _small(rng, s)) for _ in range(2)])
        v = tower.expectation_Gn(tower.span_product(x.adjoint(), x), n).values
        worst = max(worst, float(np.max(np.abs(v.imag))), max(0.0, -float(v.real.min())))
    return Outcome(worst, ctx.algebra_samples)


# -- star calculus ----------------------------------------------------------------------------------


@suite("star.covariance_relations")
def _covariance(ctx):
    """S a = alpha(a) S, S* a S = L(a), and S* S = 1."""
    s = ctx.sft
    S, Ss = StarElem.isometry(s), StarElem.isometry(s).adjoint()
    one = CylFn.const(s, 1.0)
    worst = _terms_rel(Ss * S, StarElem.one(s))
    for rng in ctx.samples("star.covariance_relations"):
        a = _small(rng, s, 5)
        A = StarElem.of_function(a)
        worst = max(worst, _terms_rel(S * A, StarElem.term(endo.alpha(a), 1, 0, one)),
                    _terms_rel(Ss * A * S, StarElem.of_function(endo.transfer_L(a))))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.product_case_agreement")
def _case_agreement(ctx):
    """Both reduction rules give the same element when the inner exponents match."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.product_case_agreement"):
        m = int(rng.integers(0, 5))
        p = random_star(rng, s, 4, 4, 1.0).terms[0]
        p = StarTerm(p.a, p.n, m, p.b)
        q = random_star(rng, s, 4, 4, 1.0).terms[0]
        q = StarTerm(q.a, m, q.m, q.b)
        left = StarElem(s, [term_product(p, q, "left")])
        right = StarElem(s, [term_product(p, q, "right")])
        worst = max(worst, _functional_rel(left, right, _probes(rng, s)))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.associativity")
def _associativity(ctx):
    """(xy)z = x(yz) under the expectation with probes on both sides."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.associativity"):
        x, y, z = (_small_star(rng, s) for _ in range(3))
        worst = max(worst, _functional_rel((x * y) * z, x * (y * z), _probes(rng, s)))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.adjoint")
def _adjoint(ctx):
    """The formal adjoint is an involution reversing products."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.adjoint"):
        x, y = _small_star(rng, s, terms=2), _small_star(rng, s)
        worst = max(worst, _terms_rel(x.adjoint().adjoint(), x),
                    _functional_rel((x * y).adjoint(), y.adjoint() * x.adjoint(), _probes(rng, s)))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.projection_relations")
def _projection_relations(ctx):
    """Range projections are nested, compress functions, and intertwine with S and S*."""
    s, worst = ctx.sft, 0.0
    S = StarElem.isometry(s)
    Ss = S.adjoint()
    for rng in ctx.samples("star.projection_relations"):
        n = int(rng.integers(0, 4))
        m = n + int(rng.integers(0, 3))
        en, em = StarElem.projection(s, n), StarElem.projection(s, m)
        worst = max(worst, _terms_rel(em * en, em), _terms_rel(en * em, em))
        a, b = _small(rng, s), _small(rng, s)
        A = StarElem.of_function(a)
        ea = endo.tower_expectation(a, n)
        one = CylFn.const(s, 1.0)
        worst = max(worst, _terms_rel(en * A * en, StarElem.term(ea, n, n, one)),
                    _functional_rel(en * A * en, StarElem.term(one, n, n, ea), _probes(rng, s)))
        up = StarElem.term(a, n + 1, n + 1, b)
        worst = max(worst, _terms_rel(Ss * up * S, StarElem.term(
            endo.transfer_L(a), n, n, endo.transfer_L(b))))
        down = StarElem.term(a, n, n, b)
        worst = max(worst, _terms_rel(S * down, StarElem.term(
            endo.alpha(a), n + 1, n + 1, endo.alpha(b)) * S))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.gauge_actions")
def _gauge(ctx):
    """Gauge automorphisms compose as a group and preserve products."""
    s, worst = ctx.sft, 0.0
    h = ctx.gauge_potential()
    for rng in ctx.samples("star.gauge_actions"):
        x, y = _small_star(rng, s), _small_star(rng, s)
        u, v = random_unitary(rng, s, 2), random_unitary(rng, s, 1)
        pr = _probes(rng, s)
        worst = max(worst, _terms_rel(gauge_sigma_u(gauge_sigma_u(x, v), u), gauge_sigma_u(x, u * v)),
                    _functional_rel(gauge_sigma_u(x * y, u),
                                    gauge_sigma_u(x, u) * gauge_sigma_u(y, u), pr),
                    _terms_rel(gauge_sigma_u(gauge_sigma_u(x, u), u.conj()), x))
        zc = complex(np.exp(2j * np.pi * rng.random()))
        worst = max(worst, _functional_rel(gauge_gamma(x, zc),
                                           gauge_sigma_u(x, CylFn.const(s, zc)), pr))
        z, w = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        worst = max(worst, _terms_rel(gauge_sigma_z(gauge_sigma_z(x, w, h), z, h),
                                      gauge_sigma_z(x, z + w, h)))
        t = float(rng.normal())
        worst = max(worst, _terms_rel(gauge_sigma_z(x, t, h), gauge_sigma_u(x, h.iz_power(t))))
        beta = float(rng.uniform(0.1, 2.0))
        worst = max(worst, _terms_rel(gauge_sigma_z(x, 1j * beta, h), sigma_i_beta(x, h, beta)))
        a = StarElem.of_function(_small(rng, s))
        worst = max(worst, _terms_rel(gauge_sigma_z(a, z, h), a))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.fixed_point_projection")
def _fixed_point(ctx):
    """P keeps the n = m terms, is idempotent and an A-bimodule map."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.fixed_point_projection"):
        x = _small_star(rng, s, terms=3)
        a, b = _small(rng, s), _small(rng, s)
        px = fixed_point_project_P(x)
        worst = max(worst, _terms_rel(fixed_point_project_P(px), px),
                    _terms_rel(fixed_point_project_P(x.left(a).right(b)), px.left(a).right(b)),
                    _rel(expectation_G(px), expectation_G(x)))
        if not px.gauge_fixed:
            worst = max(worst, 1.0)
    worst = max(worst, float(len(fixed_point_project_P(StarElem.isometry(s)))))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.expectation_G")
def _expectation_g(ctx):
    """G is the identity on A, gauge invariant, an A-bimodule map, and given termwise."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.expectation_G"):
        a = _small(rng, s)
        worst = max(worst, _rel(expectation_G(StarElem.of_function(a)), a))
        x = _small_star(rng, s, terms=3)
        zc = complex(np.exp(2j * np.pi * rng.random()))
        worst = max(worst, _rel(expectation_G(gauge_gamma(x, zc)), expectation_G(x)))
        b = _small(rng, s)
        worst = max(worst, _rel(expectation_G(x.left(a).right(b)), a * expectation_G(x) * b))
        t = x.terms[0]
        expect = t.a * endo.index_cocycle_In(s, t.n).inv() * t.b if t.n == t.m \
            else CylFn.const(s, 0.0)
        worst = max(worst, _rel(expectation_G(StarElem(s, [t])), expect))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.expectation_positive", tol=1e-10)
def _g_positive(ctx):
    """G(x* x) is pointwise nonnegative."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.expectation_positive"):
        x = _small_star(rng, s, terms=2)
        v = expectation_G(x.adjoint() * x).values
        worst = max(worst, float(np.max(np.abs(v.imag))), max(0.0, -float(v.real.min())))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.redundancy")
def _redundancy(ctx):
    """The quasi-basis element k acts as the unit on b S and has G(k) = 1."""
    s = ctx.sft
    k = redundancy_element_k(s)
    worst = _rel(expectation_G(k), CylFn.const(s, 1.0))
    one = CylFn.const(s, 1.0)
    for rng in ctx.samples("star.redundancy"):
        bS = StarElem.term(_small(rng, s), 1, 0, one)
        worst = max(worst, _terms_rel(k * bS, bS))
    return Outcome(worst, ctx.algebra_samples)


@suite("star.span_agreement")
def _span_agreement(ctx):
    """On gauge-fixed elements the termwise tower expectation agrees with G."""
    s, worst = ctx.sft, 0.0
    for rng in ctx.samples("star.span_agreement"):
        x = _small_star(rng, s, terms=3, gauge_fixed=True)
        worst = max(worst, _rel(tower.expectation_F_check(star_to_span(x)), expectation_G(x)))
    return Outcome(worst, ctx.algebra_samples)


# -- KMS engine -------------------------------------------------------------------------------------


@suite("kms.critical_temperature", tol="num")
def _critical(ctx):
    """The transfer matrix has spectral radius one at the solved temperature."""
    sol = ctx.solution()
    return Outcome(sol.rho_residual, 1)


@suite("kms.measure_consistency")
def _consistency(ctx):
    """Cylinder weights are consistent under extension."""
    sol = ctx.solution()
    return Outcome(sol.measure.consistency_residual(ctx.depth_test + 1), ctx.depth_test)


@suite("kms.eigen_equation", tol="num")
def _eigen(ctx):
    """The measure is fixed by the Ruelle operator on every basis up to the test depth."""
    sol = ctx.solution()
    return Outcome(sol.eigen_residual, ctx.depth_test)


@suite("kms.cylinder_recursion", tol="num")
def _recursion(ctx):
    """Prepending a symbol multiplies cylinder weight by h^-beta."""
    sol = ctx.solution()
    phi, g = sol.measure, sol.code.lift(sol.potential) if sol.code else sol.potential
    sys = sol.system
    w = g.power(-sol.beta)
    worst = 0.0
    for d in range(max(g.depth - 1, 1), ctx.depth_test + 1):
        long = phi.weights(d + 1)
        tail = phi.weights(d)[sys.suffix_map(d)]
        factor = w.promote(d + 1).values.real
        worst = max(worst, float(np.max(np.abs(long - factor * tail))))
    return Outcome(worst, ctx.depth_test)


@suite("kms.ruelle_cross_check")
def _ruelle_cross(ctx):
    """The Ruelle matrix equals the transfer operator applied to h^-beta ind(E) f."""
    sol = ctx.solution()
    s, h, beta = ctx.sft, sol.potential, sol.beta
    lam = h.power(-beta) * endo.watatani_index(s).mu
    worst, count = 0.0, 0
    for d in range(max(h.depth - 1, 1), ctx.depth_test + 1):
        R = ruelle_matrix(s, h, beta, d)
        alt = LinOp.from_map(s, d, lambda f: endo.transfer_L(lam * f).promote(d))
        worst = max(worst, _rel(R, alt))
        count += 1
    return Outcome(worst, count)


def _kms_report(ctx):
    sol = ctx.solution()
    key = "_kms_report"
    cache = sol.extra
    if key not in cache:
        cache[key] = kms_verify(ctx.sft, sol.potential, sol, ctx.kms_samples, ctx.seed,
                                raise_on_fail=False)
    return cache[key]


@suite("kms.identity", tol="num")
def _kms_identity(ctx):
    """psi(x sigma_{i beta}(y)) = psi(y x) on random spanning pairs."""
    r = _kms_report(ctx)
    return Outcome(r.kms_residual, r.samples)


@suite("kms.trace_on_fixed_points", tol="num")
def _kms_trace(ctx):
    """psi(a z) = psi(z a) for functions a against gauge-fixed z."""
    r = _kms_report(ctx)
    return Outcome(r.trace_residual, r.samples)


@suite("kms.offdiagonal_vanishing")
def _kms_off(ctx):
    """psi kills every term with distinct exponents."""
    r = _kms_report(ctx)
    return Outcome(r.offdiag_max, r.samples)


@suite("kms.eigen_iterates", tol=1e-9)
def _kms_iterates(ctx):
    """psi(L^n a) = psi(Lambda^-[n] a) for n up to four."""
    r = _kms_report(ctx)
    return Outcome(max(r.eigen_residual, r.iterate_residual), r.samples)


@suite("kms.uniqueness", tol=1 - EPS_NUM)
def _uniqueness(ctx):
    """The Perron eigenvalue at the solved temperature is simple (eigengap below one)."""
    return Outcome(ctx.solution().eigengap, 1)


@suite("kms.off_critical_detection", tol=0.09)
def _off_critical(ctx):
    """Temperatures 0.1 away from the critical one admit no KMS state."""
    sol = ctx.solution()
    gaps = []
    for beta in (sol.beta - 0.1, sol.beta + 0.1):
        if beta <= 0:
            continue
        try:
            kms_measure(ctx.sft, sol.potential, beta, 1)
            gaps.append(0.0)
        except NoKmsState as exc:
            gaps.append(abs(exc.rho - 1.0))
    worst = min(gaps) if gaps else 0.0
    return Outcome(worst, len(gaps), passed=bool(gaps) and worst > ctx.eps_num)


@suite("kms.pressure_monotone")
def _pressure(ctx):
    """Log spectral radius is strictly decreasing in beta and vanishes at the root."""
    sol = ctx.solution()
    betas = np.linspace(0.0, 2 * sol.beta + 1.0, 9)
    rows = pressure_curve(ctx.sft, sol.potential, betas)
    logs = np.array([r[2] for r in rows])
    mono = bool(np.all(np.diff(logs) < 0))
    at_root = abs(np.log(spectral_radius(ctx.sft, sol.potential, sol.beta)))
    return Outcome(at_root, len(rows), passed=mono and at_root <= ctx.eps_num)


def _ground_report(ctx):
    sol = ctx.solution()
    cache = sol.extra
    if "_ground_report" not in cache:
        cache["_ground_report"] = ground_verify(ctx.sft, sol.potential, sol, ctx.ground_samples,
                                                ctx.seed)
    return cache["_ground_report"]


@suite("ground.offdiagonal_zero", tol=0.0)
def _ground_zero(ctx):
    """The ground functional is exactly zero off the (0, 0) exponents."""
    r = _ground_report(ctx)
    return Outcome(r.offdiag_max, r.samples)


@suite("ground.grid_bound")
def _ground_grid(ctx):
    """|psi_g(x sigma_z(y))| stays below the termwise bound on the upper half-plane grid."""
    r = _ground_report(ctx)
    excess = max(0.0, r.max_ratio - 1.0)
    return Outcome(excess, r.samples)


@suite("ground.divergence_probe")
def _ground_probe(ctx):
    """phi(h^b) >= c^b for b in {1, 5, 10}, with c the minimum of h."""
    r = _ground_report(ctx)
    c = float(ctx.solution().potential.min_real())
    worst = max(max(0.0, -margin) / c ** b for b, margin in r.probe.items())
    return Outcome(worst, len(r.probe))


@suite("ground.redundancy_contrast")
def _ground_contrast(ctx):
    """The ground functional separates 1 from the redundancy element k."""
    r = _ground_report(ctx)
    resid = max(abs(r.unit_value - 1.0), abs(r.redundancy_value))
    return Outcome(resid, 2)


def report_dict(results: list[SuiteResult]) -> dict:
    suites = {r.label: r.as_dict() for r in results}
    failed = sorted(r.label for r in results if r.status == "fail")
    skipped = sorted(r.label for r in results if r.status == "skipped")
    return {"suites": suites, "failed": failed, "skipped": skipped, "ok": not failed}
