"""Spectral radii in weighted l2 algebras and the accompanying inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .algebra import AlgebraElement, convolve, l2_norm, sobolev_norm
from .errors import CapacityError, DomainError, UnsupportedModelError
from .groups import FreeAbelianGroup

SUPPORT_BUDGET = 200_000


@dataclass
class SpectralTrace:
    s: float
    powers: list[tuple[int, float]]
    estimates: list[float]
    extrapolated: float
    complete: bool = True
    fit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "powers": [[n, v] for n, v in self.powers],
            "estimates": self.estimates,
            "extrapolated": self.extrapolated,
            "complete": self.complete,
            "fit": self.fit,
        }


def extrapolate_root_sequence(ns: Sequence[int], estimates: Sequence[float]) -> tuple[float, dict]:
    """Limit of x_n = ||f^n||^(1/n) from a fit log x_n = a + b/n + c log(n)/n.

    The model matches the asymptotics ||f^n|| ~ C n^p rho^n.  With fewer than
    three usable points the last estimate is returned.
    """
    ns = np.asarray(ns, dtype=float)
    est = np.asarray(estimates, dtype=float)
    if len(est) == 0:
        return 0.0, {"method": "empty"}
    if np.any(est <= 0):
        return 0.0 if est[-1] == 0 else float(est[-1]), {"method": "last"}
    use = ns >= 2
    if use.sum() < 3:
        return float(est[-1]), {"method": "last"}
    n, y = ns[use][-5:], np.log(est[use][-5:])
    A = np.column_stack([np.ones_like(n), 1.0 / n, np.log(n) / n])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(np.exp(coef[0])), {"method": "log-fit", "a": float(coef[0]), "b": float(coef[1]),
                                    "c": float(coef[2]), "residual": resid}


def spectral_radius(
    f: AlgebraElement, s: float, max_doublings: int = 6, support_budget: int = SUPPORT_BUDGET
) -> SpectralTrace:
    """||f^(2^k)||_s^(1/2^k) for k = 0..max_doublings via repeated squaring."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    powers: list[tuple[int, float]] = []
    estimates: list[float] = []
    cur = f
    n = 1
    for k in range(max_doublings + 1):
        val = sobolev_norm(cur, s)
        powers.append((n, val))
        estimates.append(val ** (1.0 / n) if val > 0 else 0.0)
        if k == max_doublings or val == 0:
            break
        if len(cur) ** 2 > 50 * support_budget:
            ext, fit = extrapolate_root_sequence([p[0] for p in powers], estimates)
            raise CapacityError(
                f"support {len(cur)} too large to square",
                completed=k,
                partial=SpectralTrace(float(s), powers, estimates, ext, False, fit),
            )
        cur = convolve(cur, cur)
        if len(cur) > support_budget:
            ext, fit = extrapolate_root_sequence([p[0] for p in powers], estimates)
            raise CapacityError(
                f"support of f^{2 * n} exceeds budget",
                completed=k,
                partial=SpectralTrace(float(s), powers, estimates, ext, False, fit),
            )
        n *= 2
    ext, fit = extrapolate_root_sequence([p[0] for p in powers], estimates)
    return SpectralTrace(float(s), powers, estimates, ext, True, fit)


@dataclass
class HolderResult:
    lhs: float
    rhs: float
    passed: bool
    rhs_alt_exponent: float

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.passed


def holder_interpolation_check(f: AlgebraElement, s: float, t: float, rtol: float = 1e-12) -> HolderResult:
    """||f||_t <= ||f||_s^(t/s) ||f||_2^(1 - t/s).

    The alternative exponent (1 - t)/s on the l2 factor is evaluated as well
    and reported without affecting the verdict.
    """
    if not 0 < t < s:
        raise DomainError("need 0 < t < s")
    lhs = sobolev_norm(f, t)
    ns, n2 = sobolev_norm(f, s), l2_norm(f)
    rhs = ns ** (t / s) * n2 ** (1.0 - t / s)
    alt = ns ** (t / s) * n2 ** ((1.0 - t) / s)
    return HolderResult(lhs, rhs, bool(lhs <= rhs * (1.0 + rtol)), alt)


def weight_sum(model: FreeAbelianGroup, t: float) -> float:
    """sum over the group of (1 + l(g))^(-2t), for Z and Z^2."""
    if not isinstance(model, FreeAbelianGroup) or model.n > 2:
        raise UnsupportedModelError("closed-form weight sums exist for Z and Z^2 only")
    if model.n == 1:
        if 2 * t <= 1:
            return float("inf")
        return float(2 * zeta(2 * t) - 1)
    if 2 * t - 1 <= 1:
        return float("inf")
    # #S_m = 4m: 1 + 4 sum_{k>=2} (k - 1) k^(-2t)
    return float(1 + 4 * ((zeta(2 * t - 1) - 1) - (zeta(2 * t) - 1)))


def certified_algebra_constant(model: FreeAbelianGroup, t: float) -> float:
    """K(t) with ||a * b||_t <= K ||a||_t ||b||_t for all a, b (any multiplier).

    Weight splitting (1 + l(xy))^t <= 2^t ((1 + l(x))^t + (1 + l(y))^t) and
    ||b||_1 <= ||b||_t sqrt(sum (1 + l)^(-2t)) give K = 2^(t+1) sqrt(sum).
    """
    return float(2 ** (t + 1) * np.sqrt(weight_sum(model, t)))


@dataclass
class PowerBoundResult:
    s: float
    t: float
    K: float
    rows: list[dict]
    passed: bool

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "K": self.K, "rows": self.rows, "passed": self.passed}


def power_bound_check(
    f: AlgebraElement, s: float, t: float, n_list: Sequence[int] = (2, 4, 8), K: float | None = None
) -> PowerBoundResult:
    """||f^n||_s <= n^(s-t+1) K^(n-1) ||f||_s ||f||_t^(n-1)."""
    if not 0 <= t < s:
        raise DomainError("need 0 <= t < s")
    if K is None:
        K = certified_algebra_constant(f.model, t)  # type: ignore[arg-type]
    fs, ft = sobolev_norm(f, s), sobolev_norm(f, t)
    rows = []
    ok = True
    pw = f
    cur_n = 1
    for n in sorted(n_list):
        while cur_n < n:
            pw = convolve(pw, f)
            cur_n += 1
        lhs = sobolev_norm(pw, s)
        rhs = n ** (s - t + 1) * K ** (n - 1) * fs * ft ** (n - 1)
        rows.append({"n": n, "lhs": lhs, "rhs": rhs, "passed": bool(lhs <= rhs * (1 + 1e-12))})
        ok &= rows[-1]["passed"]
    return PowerBoundResult(float(s), float(t), float(K), rows, bool(ok))


def monotonicity_check(f: AlgebraElement, t: float, s: float, max_doublings: int = 5) -> dict:
    """rho_t(f) <= rho_s(f).

    The verdict uses the termwise comparison of ||f^n||_t^(1/n) and
    ||f^n||_s^(1/n), which holds for every n; the extrapolated limits are
    reported alongside but are advisory.
    """
    if not t < s:
        raise DomainError("need t < s")
    a = spectral_radius(f, t, max_doublings)
    b = spectral_radius(f, s, max_doublings)
    termwise = all(x <= y * (1 + 1e-12) for x, y in zip(a.estimates, b.estimates))
    return {
        "rho_t": a.extrapolated,
        "rho_s": b.extrapolated,
        "termwise": bool(termwise),
        "extrapolated_ordered": bool(a.extrapolated <= b.extrapolated * (1 + 1e-9)),
        "passed": bool(termwise),
    }
