"""Numerical Rapid Decay constants, the domination inequality and
Sobolev-algebra constants.

All constants here are statistical lower estimates of suprema: every value
reported is attained by an explicit pair (f, g).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .algebra import AlgebraElement, convolve, l2_norm, untwisted_abs_convolve
from .errors import DomainError
from .groups import FreeAbelianGroup, FreeGroup, GroupModel
from .multipliers import CoboundaryMultiplier, Multiplier, TrivialMultiplier

PAIR_BUDGET = 2_500_000
DOMINATION_TOL = 1e-12


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TWISTLAB_THREADS", "1")))
    except ValueError:
        return 1


def trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    """Per-trial seed sequences, independent of execution order."""
    return np.random.SeedSequence(int(seed)).spawn(int(trials))


# ---------------------------------------------------------------------------
class BilinearProblem:
    """The bilinear map (f, g) -> f * g restricted to two finite supports.

    ``idx[a, b]`` is the output index of ``x_a y_b`` and ``coef[a, b]`` its
    coefficient (the multiplier value, optionally reweighted).
    """

    def __init__(self, idx: np.ndarray, coef: np.ndarray, n_out: int):
        self.idx = idx
        self.coef = coef
        self.n_out = n_out
        self.nf, self.ng = idx.shape
        self._rows = idx.ravel()
        self._gcols = np.tile(np.arange(self.ng), self.nf)
        self._fcols = np.repeat(np.arange(self.nf), self.ng)

    def map_of_f(self, f: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix(
            ((f[:, None] * self.coef).ravel(), (self._rows, self._gcols)), shape=(self.n_out, self.ng)
        )

    def map_of_g(self, g: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix(
            ((self.coef * g[None, :]).ravel(), (self._rows, self._fcols)), shape=(self.n_out, self.nf)
        )

    def value(self, f: np.ndarray, g: np.ndarray) -> float:
        out = self.map_of_f(f) @ g
        return float(np.linalg.norm(out) / (np.linalg.norm(f) * np.linalg.norm(g)))

    @staticmethod
    def top(M: sp.csr_matrix, v0: np.ndarray | None = None) -> tuple[float, np.ndarray]:
        """Largest singular value and right singular vector."""
        n = M.shape[1]
        if n <= 400:
            G = (M.conj().T @ M).toarray()
            w, V = np.linalg.eigh(G)
            return float(np.sqrt(max(w[-1], 0.0))), V[:, -1]
        try:
            _, s, vt = svds(M, k=1, v0=v0, tol=1e-10, maxiter=5000)
            return float(s[0]), vt[0].conj()
        except Exception:  # ARPACK occasionally fails on tiny spectral gaps
            G = (M.conj().T @ M).toarray()
            w, V = np.linalg.eigh(G)
            return float(np.sqrt(max(w[-1], 0.0))), V[:, -1]

    def maximize(self, f0: np.ndarray, rounds: int = 5) -> tuple[float, np.ndarray, np.ndarray]:
        f = f0 / np.linalg.norm(f0)
        g = None
        best = 0.0
        for _ in range(rounds):
            _, g = self.top(self.map_of_f(f), g)
            best, f = self.top(self.map_of_g(g), f)
        return best, f, g


def _bilinear(model: GroupModel, sigma: Multiplier, xs, ys, s: float = 0.0) -> BilinearProblem:
    prods, idx = model.product_table(xs, ys)
    coef = sigma.outer(xs, ys)
    if s:
        wx = (1.0 + model.lengths(xs)) ** s
        wy = (1.0 + model.lengths(ys)) ** s
        wp = (1.0 + model.lengths(prods)) ** s
        coef = coef * wp[idx] / (wx[:, None] * wy[None, :])
    return BilinearProblem(idx, coef, len(prods))


def _is_untwisted(sigma: Multiplier) -> bool:
    if isinstance(sigma, TrivialMultiplier):
        return True
    return isinstance(sigma, CoboundaryMultiplier) and _is_untwisted(sigma.base)


def radial_free_constant(k: int, r: int, g_radius: int, rounds: int = 100) -> float:
    """Best ratio over radial f in B(r), g in B(g_radius) for F_k, sigma = 1.

    Uses the sphere recursion chi_1 * chi_n = chi_{n+1} + q chi_{n-1}
    (q = 2k - 1), so no group elements are enumerated.
    """
    q = 2 * k - 1
    N = r + g_radius + 1
    sizes = np.array([1.0] + [2.0 * k * q ** (n - 1) for n in range(1, N)])
    T = np.zeros((N, N))
    for n in range(N):
        if n + 1 < N:
            T[n + 1, n] += 1.0
        if n == 1:
            T[0, 1] += q + 1
        elif n >= 2:
            T[n - 1, n] += q
    P = [np.eye(N), T.copy()]
    for m in range(1, r):
        P.append(T @ P[m] - ((q + 1) if m == 1 else q) * P[m - 1])
    D = np.sqrt(sizes)
    # orthonormal sphere coordinates: u_m = f_m sqrt(#S_m)
    ten = np.stack([(D[:, None] * P[m][:, : g_radius + 1] / D[None, : g_radius + 1]) / D[m] for m in range(r + 1)])
    u = np.ones(r + 1) / np.sqrt(r + 1)
    val = 0.0
    for _ in range(rounds):
        A = np.einsum("m,mnj->nj", u, ten)
        v = np.linalg.svd(A)[2][0]
        B = np.einsum("mnj,j->nm", ten, v)
        _, sv, vt = np.linalg.svd(B)
        u = vt[0]
        if abs(sv[0] - val) < 1e-14 * sv[0]:
            val = sv[0]
            break
        val = sv[0]
    return float(val)


def exact_abelian_rd_constant(model: FreeAbelianGroup, r: int, n_angles: int = 16) -> float:
    """Best constant for untwisted Z^n, f in B(r), g unrestricted.

    By Fourier duality the constant is sup_t of the largest singular value of
    the character row (exp(i <t, x>))_{x in B(r)}, evaluated on a grid of t.
    """
    if not isinstance(model, FreeAbelianGroup):
        raise DomainError("Fourier duality needs Z^n")
    ball = model.coords(model.ball(r)).astype(float)
    rng = np.random.default_rng(0)
    ts = np.vstack([np.zeros(model.n), rng.uniform(-np.pi, np.pi, size=(n_angles - 1, model.n))])
    best = 0.0
    for t in ts:
        row = np.exp(1j * ball @ t)[None, :]
        best = max(best, float(np.linalg.svd(row, compute_uv=False)[0]))
    return best


@dataclass
class RDReport:
    radii: list[int]
    constants: list[float]
    g_radii: list[int]
    methods: list[str]
    fit_exponent: float
    fit_intercept: float
    fit_residual: float
    verdict: str
    trials: int
    seed: int
    witnesses: dict = field(default_factory=dict)

    def fitted(self, r: float) -> float:
        return float(np.exp(self.fit_intercept) * (1.0 + r) ** self.fit_exponent)

    def to_dict(self) -> dict:
        return {
            "radii": self.radii,
            "constants": self.constants,
            "g_radii": self.g_radii,
            "methods": self.methods,
            "fit_exponent": self.fit_exponent,
            "fit_intercept": self.fit_intercept,
            "fit_residual": self.fit_residual,
            "verdict": self.verdict,
            "trials": self.trials,
            "seed": self.seed,
        }

    def csv_rows(self) -> list[dict]:
        return [{"r": r, "C_r": c, "fit": self.fitted(r)} for r, c in zip(self.radii, self.constants)]


def fit_power_law(radii: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Least squares log C = e log(1 + r) + c; returns (e, c, rms residual)."""
    x = np.log1p(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 2:
        return 0.0, float(y[0]) if len(y) else 0.0, 0.0
    e, c = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (e * x + c)) ** 2)))
    return float(e), float(c), res


def _g_radius(model: GroupModel, r: int, pair_budget: int) -> int:
    nf = len(model.ball(r))
    best = 0
    for R in range(0, 2 * r + 1):
        if r + R > model.working_radius:
            break
        if nf * len(model.ball(R)) > pair_budget:
            break
        best = R
    return best


def _run_trials(fn, seeds, workers: int):
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, seeds))
    return [fn(s) for s in seeds]


def rd_constant_estimate(
    model: GroupModel,
    sigma: Multiplier,
    radii: Sequence[int],
    trials: int = 3,
    seed: int = 0,
    rounds: int = 5,
    pair_budget: int = PAIR_BUDGET,
    workers: int | None = None,
    nonnegative_start: bool = False,
) -> RDReport:
    """Estimate C(r) = sup ||f * g||_2 / (||f||_2 ||g||_2), f in B(r), g in B(2r).

    Each trial starts from a random complex f and alternates top singular
    vectors of g -> f*g and f -> f*g.  When the pair table of B(r) x B(2r)
    exceeds ``pair_budget`` the g-support is shrunk to the largest ball that
    fits.  For untwisted free groups the exact radial optimum over the full
    B(2r) is added as a further candidate.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    radii = [int(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly increasing")
    workers = thread_count() if workers is None else workers
    untwisted = _is_untwisted(sigma)
    constants, g_radii, methods = [], [], []
    for r in radii:
        Rg = _g_radius(model, r, pair_budget)
        xs, ys = model.ball(r), model.ball(Rg)
        prob = _bilinear(model, sigma, xs, ys)

        def one(ss: np.random.SeedSequence) -> float:
            rng = np.random.default_rng(ss)
            f0 = rng.normal(size=len(xs)) + 1j * rng.normal(size=len(xs))
            if nonnegative_start:
                f0 = np.abs(f0)
            return prob.maximize(f0, rounds)[0]

        vals = _run_trials(one, trial_seeds(seed * 1000003 + r, trials), workers)
        best, method = max(vals), "alternating"
        if isinstance(model, FreeGroup) and untwisted:
            rad = radial_free_constant(model.k, r, 2 * r)
            if rad > best:
                best, method, Rg = rad, "radial-exact", 2 * r
        constants.append(float(best))
        g_radii.append(Rg)
        methods.append(method)
    e, c, res = fit_power_law(radii, constants)
    verdict = "polynomial" if res < 0.15 else "inconclusive"
    return RDReport(radii, constants, g_radii, methods, e, c, res, verdict, int(trials), int(seed))


@dataclass
class DominationResult:
    lhs: float
    rhs: float
    passed: bool

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.passed


def twisted_domination_check(f: AlgebraElement, g: AlgebraElement, tol: float = DOMINATION_TOL) -> DominationResult:
    """||f *_sigma g||_2 <= || |f| * |g| ||_2."""
    lhs = l2_norm(convolve(f, g))
    rhs = l2_norm(untwisted_abs_convolve(f, g))
    return DominationResult(lhs, rhs, bool(lhs <= rhs + tol))


@dataclass
class BanachReport:
    s: float
    radii: list[int]
    K_by_radius: list[float]
    K_hat: float
    growth_ratio: float
    diverging: bool

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "radii": self.radii,
            "K_by_radius": self.K_by_radius,
            "K_hat": self.K_hat,
            "growth_ratio": self.growth_ratio,
            "diverging": self.diverging,
        }


def banach_constant_estimate(
    model: GroupModel,
    sigma: Multiplier,
    s: float,
    trials: int = 3,
    seed: int = 0,
    radii: Sequence[int] = (2, 4, 8),
    rounds: int = 5,
    growth_threshold: float = 1.2,
    workers: int | None = None,
) -> BanachReport:
    """Estimate K = sup ||f * g||_s / (||f||_s ||g||_s) over f, g in B(r).

    The estimate is flagged as diverging when the last two radii differ by
    more than ``growth_threshold`` (s too small for a Banach algebra).
    """
    if s < 0:
        raise DomainError("s must be nonnegative")
    workers = thread_count() if workers is None else workers
    Ks = []
    for r in radii:
        xs = model.ball(r)
        prob = _bilinear(model, sigma, xs, xs, s=float(s))

        def one(ss):
            rng = np.random.default_rng(ss)
            f0 = rng.normal(size=len(xs)) + 1j * rng.normal(size=len(xs))
            return prob.maximize(f0, rounds)[0]

        Ks.append(float(max(_run_trials(one, trial_seeds(seed * 1000003 + r, trials), workers))))
    ratio = Ks[-1] / Ks[-2] if len(Ks) >= 2 else 1.0
    return BanachReport(float(s), list(radii), Ks, float(max(Ks)), float(ratio), bool(ratio > growth_threshold))
