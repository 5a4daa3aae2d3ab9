"""Heat kernels of twisted graph Laplacians, decay certificates and
finite-dimensional index computations.

The Laplacian is left convolution by
``D = sum_{s in S+} w_s (2 delta_e - delta_s - star(delta_s))`` acting on
l2(Gamma), so ``exp(-t D)`` applied to ``delta_e`` is the heat element
``h_t`` of the twisted group algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.stats import poisson

from .algebra import AlgebraElement, compression_matrix, star
from .errors import CapacityError, DegenerateFitError, DomainError, ValidationError
from .groups import FreeAbelianGroup, GroupElement, GroupModel
from .multipliers import Multiplier

HEAT_TOL = 1e-12


# ---------------------------------------------------------------------------
def laplacian_element(sigma: Multiplier, weights: Mapping[int, float] | None = None) -> AlgebraElement:
    """sum_s w_s (2 - T_s - T_s^*) over the positive generators."""
    model = sigma.model
    one = AlgebraElement.unit(sigma)
    out = AlgebraElement.zero(sigma)
    for i, s in enumerate(model.generators, start=1):
        w = 1.0 if weights is None else float(weights.get(i, 0.0))
        if w == 0:
            continue
        d = AlgebraElement.delta(sigma, s)
        out = out + (one.scale(2.0) - d - star(d)).scale(w)
    return out


def total_weight(model: GroupModel, weights: Mapping[int, float] | None) -> float:
    if weights is None:
        return float(model.num_generators)
    return float(sum(abs(w) for w in weights.values()))


def required_pad(t: float, weight: float, radius: int, tol: float = HEAT_TOL) -> int:
    """Smallest pad with 2 P(Poisson(2 t W) >= R + 2 pad + 2) < tol.

    A coefficient at length <= R changes under truncation to the ball of
    radius R + pad only through walks that leave that ball and come back,
    which takes at least R + 2 pad + 2 steps of the adjacency part.
    """
    lam = 2.0 * t * weight
    pad = 0
    while 2.0 * poisson.sf(radius + 2 * pad + 1, lam) >= tol:
        pad += 1
        if pad > 10_000:
            raise CapacityError("no pad reaches the requested tolerance")
    return pad


@dataclass
class HeatCoefficients:
    t: float
    coefficients: dict
    model: GroupModel
    sigma: Multiplier
    radius: int
    pad: int
    error_bound: float
    weights: dict | None = None

    def element(self) -> AlgebraElement:
        return AlgebraElement(self.sigma, self.coefficients)

    def __getitem__(self, x: GroupElement) -> complex:
        return self.coefficients.get(x, 0j)

    def series(self) -> tuple[np.ndarray, np.ndarray]:
        """(lengths, |h|) over the stored coefficients in sorted order."""
        xs = sorted(self.coefficients, key=self.model.sort_key)
        return self.model.lengths(xs), np.abs(np.array([self.coefficients[x] for x in xs]))

    def csv_rows(self) -> list[dict]:
        lens, a = self.series()
        rows = []
        for n in np.unique(lens):
            m = a[lens == n].max()
            rows.append({"length": int(n), "log_abs_h": float(np.log(m)) if m > 0 else float("-inf")})
        return rows

    def to_dict(self) -> dict:
        xs = sorted(self.coefficients, key=self.model.sort_key)
        return {
            "t": self.t,
            "radius": self.radius,
            "pad": self.pad,
            "error_bound": self.error_bound,
            "coefficients": [
                {"word": list(x.word), "re": self.coefficients[x].real, "im": self.coefficients[x].imag}
                for x in xs
            ],
        }


def heat_coefficients(
    sigma: Multiplier,
    t: float,
    radius: int,
    weights: Mapping[int, float] | None = None,
    tol: float = HEAT_TOL,
) -> HeatCoefficients:
    """Coefficients of exp(-t Delta_sigma) delta_e on the ball of given radius."""
    if t <= 0:
        raise DomainError("t must be positive")
    model = sigma.model
    W = total_weight(model, weights)
    pad = required_pad(t, W, radius, tol)
    big = radius + pad
    if big + 1 > model.working_radius:
        raise CapacityError(
            f"radius {radius} with pad {pad} exceeds working radius {model.working_radius}",
            completed=max(0, model.working_radius - pad),
        )
    D = laplacian_element(sigma, weights)
    L = compression_matrix(D, big)
    ball = model.ball(big)
    e0 = np.zeros(len(ball), dtype=complex)
    e0[0] = 1.0
    col = expm_multiply(-t * L.tocsc(), e0)
    n_in = len(model.ball(radius))
    coeffs = {x: complex(v) for x, v in zip(ball[:n_in], col[:n_in])}
    err = 2.0 * float(poisson.sf(radius + 2 * pad + 1, 2.0 * t * W))
    return HeatCoefficients(float(t), coeffs, model, sigma, int(radius), int(pad), err,
                            dict(weights) if weights else None)


@dataclass
class DecayFit:
    C5_hat: float
    C6_hat: float
    residual: float
    passed: bool
    lengths: list[int]
    log_envelope: list[float]

    def __iter__(self):
        yield self.C5_hat
        yield self.C6_hat
        yield self.residual

    def to_dict(self) -> dict:
        return {
            "C5_hat": self.C5_hat,
            "C6_hat": self.C6_hat,
            "residual": self.residual,
            "passed": self.passed,
            "lengths": self.lengths,
            "log_envelope": self.log_envelope,
        }


def decay_fit(h: HeatCoefficients, floor: float = 1e-300) -> DecayFit:
    """Least squares fit log max_{l(g)=n} |h(g)| = log C5 - C6 n^2."""
    lens, a = h.series()
    ns, env = [], []
    for n in np.unique(lens):
        m = a[lens == n].max()
        if m > floor:
            ns.append(int(n))
            env.append(float(np.log(m)))
    if len(ns) < 2:
        raise DegenerateFitError("need nonzero coefficients on at least two spheres")
    x = np.asarray(ns, dtype=float) ** 2
    y = np.asarray(env)
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    C6 = float(-slope)
    return DecayFit(float(np.exp(icpt)), C6, res, bool(C6 > 0), ns, env)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GoodCompletionSpec:
    C1: float
    C2: float
    p: float
    name: str = "custom"

    def __post_init__(self):
        if not (1.0 <= self.p < 2.0):
            raise ValidationError(f"good completions need 1 <= p < 2, got p = {self.p}")
        if self.C1 <= 0 or self.C2 < 0:
            raise ValidationError("need C1 > 0 and C2 >= 0")


L1_SPEC = GoodCompletionSpec(1.0, 0.0, 1.0, "l1")


def growth_constants(model: GroupModel, radius: int) -> tuple[float, float]:
    """(C7, C8) with #B(n) <= C7 exp(C8 n) on 0 <= n <= radius.

    C8 is the least squares slope of log #B(n) over the outer half of the
    range; C7 is then the smallest constant that makes the bound hold.
    """
    _, counts = model.enumerate_ball(radius)
    cum = np.cumsum(counts).astype(float)
    n = np.arange(len(cum), dtype=float)
    lo = len(cum) // 2
    if len(cum) - lo >= 2:
        C8 = max(float(np.polyfit(n[lo:], np.log(cum[lo:]), 1)[0]), 0.0)
    else:
        C8 = float(np.log(cum[-1])) if len(cum) > 1 else 0.0
    C7 = float(np.max(cum * np.exp(-C8 * n)))
    return C7, C8


@dataclass
class CompletionCertificate:
    bound: float
    tail: float
    partial_sum: float
    N: int
    certified: bool
    constants: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.bound
        yield self.tail

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "tail": self.tail,
            "partial_sum": self.partial_sum,
            "N": self.N,
            "certified": self.certified,
            "constants": self.constants,
        }


def completion_certificate(
    decay,
    spec: GoodCompletionSpec,
    growth: tuple[float, float],
    N: int = 60,
) -> CompletionCertificate:
    """Majorant sum_n C7 e^{C8 n} C1 e^{C2 n^p} C5 e^{-C6 n^2} with a tail bound.

    ``decay`` is a :class:`DecayFit`, :class:`HeatCoefficients` (fitted on
    the fly) or a pair (C5, C6).  The tail beyond N is bounded by a geometric
    series once the ratio of consecutive terms is below one and decreasing.
    """
    if isinstance(decay, HeatCoefficients):
        decay = decay_fit(decay)
    if isinstance(decay, DecayFit):
        C5, C6 = decay.C5_hat, decay.C6_hat
    else:
        C5, C6 = (float(v) for v in decay)
    C7, C8 = (float(v) for v in growth)
    consts = {"C1": spec.C1, "C2": spec.C2, "p": spec.p, "C5": C5, "C6": C6, "C7": C7, "C8": C8}
    if C6 <= 0:
        return CompletionCertificate(float("inf"), float("inf"), float("inf"), N, False, consts)

    def log_term(n):
        n = np.asarray(n, dtype=float)
        return np.log(C7) + C8 * n + np.log(spec.C1) + spec.C2 * n**spec.p + np.log(C5) - C6 * n**2

    n = np.arange(N + 1)
    partial = float(np.sum(np.exp(log_term(n))))

    def log_ratio(m):
        # log(term(m+1)/term(m)) with (m+1)^p - m^p <= p (m+1)^(p-1)
        return C8 + spec.C2 * spec.p * (m + 1) ** (spec.p - 1) - C6 * (2 * m + 1)

    def decreasing_from(m):
        if spec.p == 1.0 or spec.C2 == 0:
            return True
        return spec.C2 * spec.p * (spec.p - 1) * (m + 1) ** (spec.p - 2) < 2 * C6

    start = N + 1
    q = np.exp(log_ratio(start))
    if q < 1 and decreasing_from(start):
        tail = float(np.exp(log_term(start)) / (1 - q))
    else:
        return CompletionCertificate(float("inf"), float("inf"), partial, N, False, consts)
    return CompletionCertificate(partial + tail, tail, partial, N, bool(np.isfinite(partial + tail)), consts)


# ---------------------------------------------------------------------------
@dataclass
class DiracSystem:
    """A graded pair D+ : H+ -> H-, D- : H- -> H+ of finite matrices."""

    D_plus: np.ndarray
    D_minus: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.D_plus = np.atleast_2d(np.asarray(self.D_plus, dtype=complex))
        if self.D_minus is None:
            self.D_minus = self.D_plus.conj().T
        else:
            self.D_minus = np.atleast_2d(np.asarray(self.D_minus, dtype=complex))
            if self.D_minus.shape != self.D_plus.shape[::-1]:
                raise ValidationError("D- must have the transposed shape of D+")
            err = float(np.max(np.abs(self.D_minus - self.D_plus.conj().T), initial=0.0))
            if err > 1e-12:
                raise ValidationError(f"D- is not the adjoint of D+ (error {err:.2e})")

    @property
    def grading(self) -> tuple[int, int]:
        m, n = self.D_plus.shape
        return n, m

    def kernel_dims(self, rtol: float = 1e-10) -> tuple[int, int]:
        m, n = self.D_plus.shape
        s = np.linalg.svd(self.D_plus, compute_uv=False)
        cutoff = rtol * max(1.0, s.max(initial=0.0))
        rank = int(np.sum(s > cutoff))
        return n - rank, m - rank


def _heat_parts(D: DiracSystem):
    m, n = D.D_plus.shape
    U, s, Vh = np.linalg.svd(D.D_plus, full_matrices=True)
    lam = np.zeros(n)
    mu = np.zeros(m)
    lam[: len(s)] = s**2
    mu[: len(s)] = s**2
    return U, Vh.conj().T, lam, mu


def _g(x: np.ndarray, t: float) -> np.ndarray:
    """(1 - exp(-t x)) / x with the removable singularity filled in."""
    out = np.empty_like(x)
    small = np.abs(x) < 1e-12
    out[small] = t - t * t * x[small] / 2
    xs = x[~small]
    out[~small] = -np.expm1(-t * xs) / xs
    return out


@dataclass
class WassermanResult:
    matrix: np.ndarray
    idempotency_residual: float
    trace_difference: float
    dims: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "idempotency_residual": self.idempotency_residual,
            "trace_difference": self.trace_difference,
            "dims": list(self.dims),
        }


def wasserman_idempotent(D: DiracSystem, t: float) -> WassermanResult:
    """The 2 x 2 heat-operator idempotent of a graded pair.

    Blocks: exp(-t D-D+), exp(-t/2 D-D+) g(D-D+) D-, exp(-t/2 D+D-) D+,
    1 - exp(-t D+D-), with g(x) = (1 - exp(-t x)) / x.  The off-diagonal
    entry carries D- so that the block matrix maps H+ + H- into itself.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    m, n = D.D_plus.shape
    U, V, lam, mu = _heat_parts(D)
    e11 = (V * np.exp(-t * lam)) @ V.conj().T
    e12 = (V * (np.exp(-0.5 * t * lam) * _g(lam, t))) @ V.conj().T @ D.D_minus
    e21 = (U * np.exp(-0.5 * t * mu)) @ U.conj().T @ D.D_plus
    e22 = np.eye(m) - (U * np.exp(-t * mu)) @ U.conj().T
    E = np.block([[e11, e12], [e21, e22]])
    resid = float(np.max(np.abs(E @ E - E)))
    E0_trace = m
    return WassermanResult(E, resid, float(np.trace(E).real - E0_trace), (n, m))


@dataclass
class IndexResult:
    t_values: list[float]
    values: list[float]
    kernel_index: int
    spread: float
    integer_verdict: bool

    def to_dict(self) -> dict:
        return {
            "t_values": self.t_values,
            "values": self.values,
            "kernel_index": self.kernel_index,
            "spread": self.spread,
            "integer_verdict": self.integer_verdict,
        }


def supertrace_index(D: DiracSystem, t_list: Sequence[float], tol: float = 1e-9) -> IndexResult:
    """Tr exp(-t D-D+) - Tr exp(-t D+D-) for each t, compared with the kernel index."""
    A = D.D_minus @ D.D_plus
    B = D.D_plus @ D.D_minus
    la = np.clip(np.linalg.eigvalsh((A + A.conj().T) / 2), 0.0, None)
    lb = np.clip(np.linalg.eigvalsh((B + B.conj().T) / 2), 0.0, None)
    vals = [float(np.sum(np.exp(-t * la)) - np.sum(np.exp(-t * lb))) for t in t_list]
    kp, km = D.kernel_dims()
    idx = kp - km
    spread = float(max(vals) - min(vals)) if vals else 0.0
    ok = bool(all(abs(v - idx) < tol for v in vals) and spread < tol)
    return IndexResult([float(t) for t in t_list], vals, idx, spread, ok)


def nonzero_spectrum_pairing(D: DiracSystem, tol: float = 1e-10) -> float:
    """Distance between the nonzero spectra of D-D+ and D+D-."""
    s = np.linalg.svd(D.D_plus, compute_uv=False)
    A = D.D_minus @ D.D_plus
    B = D.D_plus @ D.D_minus
    la = np.sort(np.linalg.eigvalsh((A + A.conj().T) / 2))[::-1][: len(s)]
    lb = np.sort(np.linalg.eigvalsh((B + B.conj().T) / 2))[::-1][: len(s)]
    keep = s**2 > tol
    return float(np.max(np.abs(la[keep] - lb[keep]), initial=0.0))


# ---------------------------------------------------------------------------
@dataclass
class MagneticTorus:
    """Z^2 / q Z^2 with the cocycle exp(-2 pi i p m n' / q).

    ``left[s]`` and ``right[s]`` are the left and right regular
    sigma-representations of the generators; right translations are the
    magnetic translations commuting with every left-built operator.
    """

    p: int
    q: int
    left: dict
    right: dict

    @property
    def theta(self) -> float:
        return 2.0 * np.pi * self.p / self.q

    def laplacian(self) -> np.ndarray:
        n = self.q * self.q
        L = np.zeros((n, n), dtype=complex)
        for s in ("x", "y"):
            T = self.left[s]
            L += 2 * np.eye(n) - T - T.conj().T
        return L

    def dirac(self) -> DiracSystem:
        n = self.q * self.q
        Dp = (self.left["x"] - np.eye(n)) + 1j * (self.left["y"] - np.eye(n))
        return DiracSystem(Dp, metadata={"flux": [self.p, self.q], "cells": n})

    def commutator_norm(self) -> float:
        L = self.laplacian()
        return float(max(np.max(np.abs(L @ R - R @ L)) for R in self.right.values()))


def magnetic_torus(p: int, q: int) -> MagneticTorus:
    if q < 1:
        raise DomainError("q must be positive")
    n = q * q
    theta = 2.0 * np.pi * p / q

    def idx(m, k):
        return (m % q) * q + (k % q)

    def sig(a, b):
        return np.exp(-1j * theta * a[0] * b[1])

    left, right = {}, {}
    for name, g in (("x", (1, 0)), ("y", (0, 1))):
        Lm = np.zeros((n, n), dtype=complex)
        Rm = np.zeros((n, n), dtype=complex)
        for m in range(q):
            for k in range(q):
                mu = (m, k)
                Lm[idx(m + g[0], k + g[1]), idx(m, k)] = sig(g, mu)
                Rm[idx(m + g[0], k + g[1]), idx(m, k)] = sig(mu, g)
        left[name], right[name] = Lm, Rm
    return MagneticTorus(int(p), int(q), left, right)


def magnetic_commutator_infinite(sigma: Multiplier, radius: int) -> float:
    """max |[Delta_sigma, R_g]| on deltas well inside the ball, for Z^n.

    R_g delta_mu = sigma(mu, g) delta_{mu g}.  Evaluated on the compressed
    operators restricted to columns whose neighbourhoods stay in the ball.
    """
    model = sigma.model
    if not isinstance(model, FreeAbelianGroup):
        raise DomainError("implemented for Z^n")
    ball = model.ball(radius)
    pos = {x: i for i, x in enumerate(ball)}
    L = compression_matrix(laplacian_element(sigma), radius).toarray()
    worst = 0.0
    for g in model.symmetric_generators:
        R = np.zeros_like(L)
        for mu in ball:
            mg = model.multiply(mu, g)
            if mg in pos:
                R[pos[mg], pos[mu]] = sigma(mu, g)
        inner = [pos[x] for x in ball if model.word_length(x) <= radius - 2]
        C = (L @ R - R @ L)[:, inner]
        worst = max(worst, float(np.max(np.abs(C))))
    return worst
