"""Equilibrium (KMS) states for the dynamics ``S -> h^{it} S``.

A state on the crossed product of the form ``phi o G`` is KMS at inverse
temperature ``beta`` exactly when the measure ``phi`` is fixed by the Ruelle
operator ``f -> sum over preimages t of h(t)^{-beta} f(t)``.  For potentials
of depth at most two that operator restricted to first-symbol functions is
the matrix ``C[s][t] = trans[s][t] h(st)^{-beta}`` (transposed), so the
problem reduces to a Perron eigenvector with eigenvalue one.  Deeper
potentials are handled by recoding to a block shift first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import endo
from .errors import (
    ConvergenceFailure,
    DepthTooSmall,
    MultiplePerron,
    NoKmsState,
    NoRoot,
    NotNonnegative,
    NotPrimitive,
    PotentialNotAboveOne,
    ResidualExceeded,
    SftMismatch,
)
from .sampling import random_cylfn, random_star, sample_rng
from .shift import BlockCode, CylFn, Sft, higher_block_recode
from .star import (
    StarElem,
    StarTerm,
    expectation_G,
    gauge_sigma_z,
    ground_functional,
    sigma_i_beta,
    redundancy_element_k,
    star_multiply,
)
from .tolerances import BETA_XTOL, EPS_ALG, EPS_NUM
from .tower import LinOp


# -- measures ------------------------------------------------------------------------


class CylMeasure:
    """Markov measure: initial weights ``nu`` and transition kernel ``Q``.

    The weight of the cylinder ``[w]`` is ``nu[w0] Q[w0][w1] ... Q[w_{d-2}][w_{d-1}]``.
    With ``check=False`` a kernel that violates stochasticity is accepted so
    its defects can be measured by :meth:`consistency_residual`.
    """

    __slots__ = ("sft", "nu", "kernel", "_weights")

    def __init__(self, sft: Sft, nu, kernel, check: bool = True, tol: float = EPS_NUM):
        nu = np.array(nu, dtype=float).reshape(-1)
        q = np.array(kernel, dtype=float)
        if nu.shape != (sft.k,) or q.shape != (sft.k, sft.k):
            raise ValueError(f"measure data must have shapes ({sft.k},) and ({sft.k}, {sft.k})")
        if check:
            if np.any(nu < -tol) or abs(nu.sum() - 1.0) > tol:
                raise ValueError("initial weights must be a probability vector")
            if np.any(q < -tol) or np.any((sft.matrix == 0) & (np.abs(q) > tol)):
                raise ValueError("kernel must be nonnegative and supported on allowed transitions")
            live = nu > 0
            if np.any(np.abs(q[live].sum(axis=1) - 1.0) > tol):
                raise ValueError("kernel rows of charged symbols must sum to one")
        nu.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "sft", sft)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "kernel", q)
        object.__setattr__(self, "_weights", {})

    def __setattr__(self, name, value):
        raise AttributeError("CylMeasure is immutable")

    def weights(self, depth: int) -> np.ndarray:
        """Cylinder weights for every admissible word of the given length."""
        if depth in self._weights:
            return self._weights[depth]
        s = self.sft
        if depth == 0:
            w = np.array([self.nu.sum()])
        elif depth == 1:
            w = self.nu.copy()
        else:
            prev = self.weights(depth - 1)
            words = s.words(depth).words
            parent = s.prefix_map(depth - 1, depth)
            w = prev[parent] * self.kernel[words[:, -2], words[:, -1]]
        w.setflags(write=False)
        self._weights[depth] = w
        return w

    def probability(self, word) -> float:
        f = CylFn.indicator(self.sft, word)
        return float(self.evaluate(f).real)

    def evaluate(self, f: CylFn, depth: int | None = None) -> complex:
        if f.sft != self.sft:
            raise SftMismatch("function lives on a different shift space")
        d = f.depth if depth is None else depth
        return complex(np.dot(self.weights(d), f.promote(d).values))

    def consistency_residual(self, depth: int) -> float:
        """Largest ``|p_w - sum_t p_{wt}|`` over words shorter than ``depth``."""
        worst = abs(self.nu.sum() - 1.0)
        for d in range(1, depth):
            children = np.zeros(self.sft.count(d))
            np.add.at(children, self.sft.prefix_map(d, d + 1), self.weights(d + 1))
            worst = max(worst, float(np.max(np.abs(children - self.weights(d)))))
        return worst

    def to_dict(self) -> dict:
        return {"nu": self.nu.tolist(), "kernel": self.kernel.tolist()}

    @classmethod
    def from_dict(cls, sft: Sft, data: dict, check: bool = True) -> "CylMeasure":
        return cls(sft, data["nu"], data["kernel"], check=check)


def state_eval(phi: CylMeasure, f: CylFn) -> complex:
    return phi.evaluate(f)


def lift_measure(code: BlockCode, phi: CylMeasure) -> CylMeasure:
    """The same measure written on the block shift of ``code``."""
    letters = code.letters
    nu = phi.weights(letters.depth)
    last = letters.words[:, -1]
    q = phi.kernel[np.ix_(last, last)] * code.block.matrix
    return CylMeasure(code.block, nu, q, check=False)


# -- transfer matrices -----------------------------------------------------------------


def _check_potential(h: CylFn, tol: float = EPS_ALG) -> float:
    v = h.values
    if np.any(np.abs(v.imag) > tol) or np.any(v.real <= 1.0):
        raise PotentialNotAboveOne(
            f"potential must be real and > 1 everywhere (min {np.min(v.real):.6g})"
        )
    return float(np.min(v.real))


def ruelle_matrix(s: Sft, h: CylFn, beta: float, d: int) -> LinOp:
    """Matrix of ``f -> sum_{theta(t)=x} h(t)^{-beta} f(t)`` on depth-``d`` functions."""
    _check_potential(h)
    if d < max(h.depth - 1, 1):
        raise DepthTooSmall(f"potential of depth {h.depth} needs d >= {max(h.depth - 1, 1)}")
    weight = np.exp(-beta * np.log(h.values.real))
    rows = s.suffix_map(d)
    cols = s.prefix_map(d, d + 1)
    hidx = s.prefix_map(h.depth, d + 1)
    R = np.zeros((s.count(d), s.count(d)))
    np.add.at(R, (rows, cols), weight[hidx])
    return LinOp(s, d, d, R)


def transfer_matrix_C(s: Sft, h: CylFn, beta: float) -> np.ndarray:
    """``C[s][t] = trans[s][t] h(st)^{-beta}`` for ``depth(h) <= 2``."""
    _check_potential(h)
    if h.depth > 2:
        raise DepthTooSmall("potential deeper than two needs block recoding first")
    g = h.promote(2)
    words = s.words(2).words
    C = np.zeros((s.k, s.k))
    C[words[:, 0], words[:, 1]] = np.exp(-beta * np.log(g.values.real))
    return C


class EigenData(NamedTuple):
    rho: float
    right: np.ndarray
    left: np.ndarray
    eigengap: float
    degenerate: bool


def _perron_vector(vals: np.ndarray, vecs: np.ndarray, i: int) -> np.ndarray:
    v = np.real(vecs[:, i])
    if v.sum() < 0:
        v = -v
    v = np.where(np.abs(v) < 1e-300, 0.0, v)
    return v / v.sum()


def dominant_eigen(M) -> EigenData:
    """Spectral radius and Perron vectors of a nonnegative square matrix.

    Vectors are normalised to sum one.  ``eigengap`` is the ratio of the
    second-largest to the largest eigenvalue modulus; ``degenerate`` flags
    a ratio within ``EPS_NUM`` of one.
    """
    M = np.asarray(M.matrix if isinstance(M, LinOp) else M)
    if np.iscomplexobj(M):
        if np.any(np.abs(M.imag) > 0):
            raise NotNonnegative("matrix has complex entries")
        M = M.real
    M = M.astype(float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(M < 0):
        raise NotNonnegative("matrix has negative entries")
    try:
        vals, vecs = np.linalg.eig(M)
        lvals, lvecs = np.linalg.eig(M.T)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    mods = np.abs(vals)
    rho = float(mods.max())
    # among eigenvalues of top modulus, the Perron one is real and positive
    i = int(np.argmax(np.where(mods >= rho * (1 - EPS_NUM), vals.real, -np.inf)))
    li = int(np.argmin(np.abs(lvals - vals[i])))
    right = _perron_vector(vals, vecs, i)
    left = _perron_vector(lvals, lvecs, li)
    rest = np.delete(mods, i)
    gap = float(rest.max() / rho) if rest.size and rho > 0 else 0.0
    return EigenData(rho, right, left, gap, gap >= 1 - EPS_NUM)


def _system(s: Sft, h: CylFn) -> tuple[Sft, CylFn, BlockCode | None]:
    if h.sft != s:
        raise SftMismatch("potential lives on a different shift space")
    if h.depth <= 2:
        return s, h, None
    block, code = higher_block_recode(s, h.depth)
    return block, code.lift(h), code


def spectral_radius(s: Sft, h: CylFn, beta: float) -> float:
    system, g, _ = _system(s, h)
    return float(np.max(np.abs(np.linalg.eigvals(transfer_matrix_C(system, g, beta)))))


def pressure_curve(s: Sft, h: CylFn, betas: Sequence[float]) -> list[tuple[float, float, float]]:
    """Rows ``(beta, rho, ln rho)`` sorted by ``beta``."""
    _check_potential(h)
    rows = []
    for b in sorted(float(x) for x in betas):
        rho = spectral_radius(s, h, b)
        rows.append((b, rho, float(np.log(rho))))
    return rows


class BowenRoot(NamedTuple):
    beta: float
    width: float


def bowen_solve(s: Sft, h: CylFn, xtol: float = BETA_XTOL) -> BowenRoot:
    """The inverse temperature at which the transfer matrix has spectral radius one."""
    _check_potential(h)
    if not s.primitive:
        raise MultiplePerron("transition matrix is not primitive")
    if spectral_radius(s, h, 0.0) <= 1.0:
        raise NoRoot("spectral radius at beta=0 is not above one")
    lo, hi = 0.0, 1.0
    while spectral_radius(s, h, hi) >= 1.0:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise ConvergenceFailure("could not bracket the root")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if spectral_radius(s, h, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return BowenRoot(float(_newton_polish(s, h, lo, hi)), hi - lo)


def _newton_polish(s: Sft, h: CylFn, lo: float, hi: float, steps: int = 4) -> float:
    """Refine a bracketed root of ``rho(beta) = 1`` with Newton steps.

    The derivative comes from the Perron vectors:
    ``d rho / d beta = <l, (-ln h) C r> / <l, r>``.  Steps leaving the
    bracket are rejected, so the result is never worse than the midpoint.
    """
    system, g, _ = _system(s, h)
    logh = np.zeros((system.k, system.k))
    words = system.words(2).words
    logh[words[:, 0], words[:, 1]] = np.log(g.promote(2).values.real)
    beta = 0.5 * (lo + hi)
    for _ in range(steps):
        C = transfer_matrix_C(system, g, beta)
        eig = dominant_eigen(C)
        slope = -(eig.left @ (logh * C) @ eig.right) / (eig.left @ eig.right)
        if not np.isfinite(slope) or slope >= 0:
            break
        step = (eig.rho - 1.0) / slope
        nxt = beta - step
        if not lo <= nxt <= hi:
            break
        beta = nxt
        if abs(step) < 1e-16 * max(1.0, beta):
            break
    return beta


# -- KMS measures ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KmsSolution:
    """Eigenmeasure at ``beta`` together with the system it lives on.

    ``system`` is the original shift, or its block recoding when the
    potential is deeper than two (then ``code`` translates functions).
    """

    beta: float
    measure: CylMeasure
    rho_residual: float
    eigengap: float
    eigen_residual: float
    sft: Sft
    potential: CylFn
    system: Sft
    code: BlockCode | None = None
    extra: dict = field(default_factory=dict)

    def evaluate(self, f: CylFn) -> complex:
        """The state on functions of the original shift."""
        if self.code is not None:
            f = self.code.lift(f)
        return self.measure.evaluate(f)

    def psi(self, x: StarElem) -> complex:
        """The state ``phi o G`` on the crossed product."""
        return self.evaluate(expectation_G(x))


def kms_measure(s: Sft, h: CylFn, beta: float, depth_test: int = 4) -> KmsSolution:
    """Eigenmeasure of the Ruelle operator at ``beta``, if the eigenvalue is one.

    Raises :class:`NoKmsState` carrying the spectral radius otherwise.
    """
    _check_potential(h)
    if beta <= 0:
        raise ValueError("inverse temperature must be positive")
    if not s.primitive:
        raise NotPrimitive("transition matrix is not primitive; eigenmeasure is ambiguous")
    system, g, code = _system(s, h)
    C = transfer_matrix_C(system, g, beta)
    eig = dominant_eigen(C)
    if abs(eig.rho - 1.0) > EPS_NUM:
        raise NoKmsState(eig.rho, beta)
    nu = eig.right
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = C * nu[None, :] / (eig.rho * nu[:, None])
    Q = np.where(np.isfinite(Q), Q, 0.0)
    measure = CylMeasure(system, nu, Q)
    resid = eigen_equation_residual(measure, g, beta, depth_test)
    return KmsSolution(beta, measure, abs(eig.rho - 1.0), eig.eigengap, resid, s, h, system, code)


def eigen_equation_residual(phi: CylMeasure, h: CylFn, beta: float, depth: int) -> float:
    """Largest ``|phi(f) - phi(R f)|`` over indicator bases of depth ``1..depth``."""
    worst = 0.0
    for d in range(max(h.depth - 1, 1), depth + 1):
        R = ruelle_matrix(phi.sft, h, beta, d).matrix.real
        p = phi.weights(d)
        worst = max(worst, float(np.max(np.abs(p - R.T @ p))))
    return worst


def kms_solve(s: Sft, h: CylFn, depth_test: int = 4) -> KmsSolution:
    root = bowen_solve(s, h)
    sol = kms_measure(s, h, root.beta, depth_test)
    sol.extra["bracket_width"] = root.width
    return sol


def lambda_weight(s: Sft, h: CylFn, beta: float) -> CylFn:
    """``h^{-beta} ind(E)``."""
    return h.power(-beta) * endo.watatani_index(s).mu


# -- verification harnesses ----------------------------------------------------------------


@dataclass
class KmsReport:
    samples: int
    kms_residual: float
    trace_residual: float
    offdiag_max: float
    eigen_residual: float
    iterate_residual: float
    worst: tuple | None = None

    @property
    def max_residual(self) -> float:
        return max(self.kms_residual, self.trace_residual, self.offdiag_max,
                   self.eigen_residual, self.iterate_residual)

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "kms_residual": self.kms_residual,
            "trace_residual": self.trace_residual,
            "offdiagonal_max": self.offdiag_max,
            "eigen_residual": self.eigen_residual,
            "iterate_residual": self.iterate_residual,
        }


def _rel(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def kms_verify(s: Sft, h: CylFn, sol: KmsSolution, samples: int = 1000, seed: int = 0,
               tol: float = EPS_NUM, iterate_tol: float = 1e-9, max_exp: int = 4,
               max_depth: int = 4, raise_on_fail: bool = True) -> KmsReport:
    """Check ``psi(x sigma_{i beta}(y)) = psi(y x)`` on random spanning pairs.

    Also checks that ``psi`` kills off-diagonal terms, is tracial against
    functions, and satisfies the eigen equation and its iterates.  Every
    sample draws from its own stream keyed by ``(seed, index)``.
    """
    beta = sol.beta
    lam = lambda_weight(s, h, beta)
    constant = bool(np.all(h.values == h.values[0]))
    kms = trace = off = eig = it = 0.0
    worst = None
    for i in range(samples):
        rng = sample_rng(seed, i)
        x = random_star(rng, s, max_exp, max_depth)
        y = random_star(rng, s, max_exp, max_depth)
        lhs = sol.psi(star_multiply(x, sigma_i_beta(y, h, beta)))
        rhs = sol.psi(star_multiply(y, x))
        r = _rel(lhs, rhs)
        if r > kms:
            kms, worst = r, (x, y, lhs, rhs)
        t = x.terms[0]
        if t.n != t.m:
            off = max(off, abs(sol.psi(x)))
        # a function against a gauge-fixed element
        a = random_cylfn(rng, s, max_depth)
        z = random_star(rng, s, max_exp, max_depth, gauge_fixed=True)
        fa = StarElem.of_function(a)
        trace = max(trace, _rel(sol.psi(star_multiply(fa, z)), sol.psi(star_multiply(z, fa))))
        if constant:
            # constant potentials act as a scalar gauge, fixing every gauge-fixed element
            w = random_star(rng, s, max_exp, max_depth, gauge_fixed=True)
            trace = max(trace, _rel(sol.psi(star_multiply(w, z)), sol.psi(star_multiply(z, w))))
        if i < max(1, samples // 10):
            f = random_cylfn(rng, s, max_depth)
            eig = max(eig, abs(sol.evaluate(f) - sol.evaluate(endo.transfer_L(lam * f))))
            for n in range(1, 5):
                lhs_n = sol.evaluate(endo.transfer_power(f, n))
                rhs_n = sol.evaluate(endo.cocycle_power(lam.inv(), n) * f)
                it = max(it, abs(lhs_n - rhs_n))
    report = KmsReport(samples, kms, trace, off, eig, it, worst)
    if raise_on_fail:
        if max(kms, trace, off) > tol:
            raise ResidualExceeded(f"KMS residual {max(kms, trace, off):.3g} exceeds {tol:g}",
                                   max(kms, trace, off), worst)
        if max(eig, it) > iterate_tol:
            raise ResidualExceeded(f"eigen-equation residual {max(eig, it):.3g} exceeds "
                                   f"{iterate_tol:g}", max(eig, it))
    return report


@dataclass
class GroundReport:
    samples: int
    max_value: float
    max_ratio: float
    offdiag_max: float
    probe: dict
    unit_value: complex
    redundancy_value: complex

    @property
    def bounded(self) -> bool:
        return self.max_ratio <= 1.0 + EPS_NUM

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_value": self.max_value,
            "max_ratio_to_bound": self.max_ratio,
            "offdiagonal_max": self.offdiag_max,
            "probe": {str(k): v for k, v in self.probe.items()},
            "unit_value": [self.unit_value.real, self.unit_value.imag],
            "redundancy_value": [self.redundancy_value.real, self.redundancy_value.imag],
        }


def ground_bound(x: StarElem, y: StarElem) -> float:
    """Triangle-inequality bound on ``|psi_g(x sigma_z(y))|`` for ``Im z >= 0``.

    Only pairs with ``n_x = 0``, ``m_y = 0`` and ``m_x = n_y`` can land on
    the ``(0, 0)`` part, and there ``|h^{iz}| <= 1`` while the transfer
    operator is contractive.
    """
    total = 0.0
    for p in x.terms:
        for q in y.terms:
            if p.n == 0 and q.m == 0 and p.m == q.n:
                total += p.a.sup_norm() * p.b.sup_norm() * q.a.sup_norm() * q.b.sup_norm()
    return total


def ground_verify(s: Sft, h: CylFn, phi, samples: int = 100, seed: int = 0,
                  z_max: float = 10.0, grid: tuple[int, int] = (5, 11),
                  probe_betas: Sequence[float] = (1.0, 5.0, 10.0),
                  max_exp: int = 4, max_depth: int = 4) -> GroundReport:
    """Ground-state functional checks on random pairs over a grid in the upper half plane.

    ``phi`` is anything with an ``evaluate`` method on functions of ``s``.
    """
    c = _check_potential(h)
    re = np.linspace(-2.0, 2.0, grid[0])
    im = np.linspace(0.0, z_max, grid[1])
    zs = [complex(a, b) for b in im for a in re]
    max_val = max_ratio = off = 0.0
    for i in range(samples):
        rng = sample_rng(seed, i)
        if i % 2 == 0:
            # half the pairs land on the (0, 0) part
            m = int(rng.integers(0, max_exp + 1))
            x = StarElem(s, [StarTerm(random_cylfn(rng, s, max_depth), 0, m,
                                      random_cylfn(rng, s, max_depth))])
            y = StarElem(s, [StarTerm(random_cylfn(rng, s, max_depth), m, 0,
                                      random_cylfn(rng, s, max_depth))])
        else:
            x = random_star(rng, s, max_exp, max_depth)
            y = random_star(rng, s, max_exp, max_depth)
        bound = ground_bound(x, y)
        for z in zs:
            v = abs(ground_functional(star_multiply(x, gauge_sigma_z(y, z, h)), phi))
            max_val = max(max_val, v)
            if bound > 0:
                max_ratio = max(max_ratio, v / bound)
            elif v > 0:
                max_ratio = np.inf
        t = random_star(rng, s, max_exp, max_depth).terms[0]
        if (t.n, t.m) != (0, 0):
            off = max(off, abs(ground_functional(StarElem(s, [t]), phi)))
    probe = {b: float(phi.evaluate(h.power(b)).real) - c ** b for b in probe_betas}
    unit = ground_functional(StarElem.one(s), phi)
    red = ground_functional(redundancy_element_k(s), phi)
    return GroundReport(samples, max_val, float(max_ratio), off, probe, unit, red)
