"""The twisted group algebra C(Gamma, sigma) and its norms.

Elements are finitely supported coefficient maps ``f`` representing
``sum f(g) T_g`` with ``T_g T_h = sigma(g, h) T_{gh}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .errors import CapacityError, DomainError, UnsupportedModelError, ValidationError
from .groups import FreeAbelianGroup, GroupElement, GroupModel
from .multipliers import CoboundaryMultiplier, GaugeFunction, Multiplier, coboundary_gauge

PRUNE = 1e-300
CONVOLUTION_BUDGET = 20_000_000
DENSE_SVD_LIMIT = 1500


class AlgebraElement:
    """Immutable finitely supported element of C(Gamma, sigma)."""

    __slots__ = ("sigma", "_coeffs")

    def __init__(self, sigma: Multiplier, coefficients: Mapping[GroupElement, complex] | None = None):
        self.sigma = sigma
        coeffs = {}
        for x, v in (coefficients or {}).items():
            sigma.model.check(x)
            v = complex(v)
            if abs(v) > PRUNE:
                coeffs[x] = v
        self._coeffs = coeffs

    @property
    def model(self) -> GroupModel:
        return self.sigma.model

    @property
    def group_id(self) -> str:
        return self.model.group_id

    @property
    def coefficients(self) -> dict[GroupElement, complex]:
        return dict(self._coeffs)

    @classmethod
    def delta(cls, sigma: Multiplier, x: GroupElement, value: complex = 1.0) -> "AlgebraElement":
        return cls(sigma, {x: value})

    @classmethod
    def unit(cls, sigma: Multiplier) -> "AlgebraElement":
        return cls(sigma, {sigma.model.identity: 1.0})

    @classmethod
    def zero(cls, sigma: Multiplier) -> "AlgebraElement":
        return cls(sigma, {})

    @classmethod
    def from_arrays(cls, sigma: Multiplier, elements: Sequence[GroupElement], values) -> "AlgebraElement":
        acc: dict[GroupElement, complex] = {}
        for x, v in zip(elements, np.asarray(values, dtype=complex)):
            acc[x] = acc.get(x, 0j) + v
        return cls(sigma, acc)

    def support(self) -> list[GroupElement]:
        return sorted(self._coeffs, key=self.model.sort_key)

    def arrays(self) -> tuple[list[GroupElement], np.ndarray]:
        xs = self.support()
        return xs, np.array([self._coeffs[x] for x in xs], dtype=complex)

    def __getitem__(self, x: GroupElement) -> complex:
        return self._coeffs.get(x, 0j)

    def __len__(self) -> int:
        return len(self._coeffs)

    def _compatible(self, other: "AlgebraElement") -> None:
        if not same_algebra(self.sigma, other.sigma):
            raise DomainError("elements live in different twisted algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._compatible(other)
        out = dict(self._coeffs)
        for x, v in other._coeffs.items():
            out[x] = out.get(x, 0j) + v
        return AlgebraElement(self.sigma, out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.sigma, {x: -v for x, v in self._coeffs.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self.sigma, {x: c * v for x, v in self._coeffs.items()})

    __rmul__ = scale

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def max_abs_diff(self, other: "AlgebraElement") -> float:
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self[x] - other[x]) for x in keys), default=0.0)

    def l1_diff(self, other: "AlgebraElement") -> float:
        keys = set(self._coeffs) | set(other._coeffs)
        return float(sum(abs(self[x] - other[x]) for x in keys))

    def to_json(self) -> list[dict]:
        xs, v = self.arrays()
        return [{"word": list(x.word), "re": float(c.real), "im": float(c.imag)} for x, c in zip(xs, v)]

    @classmethod
    def from_json(cls, sigma: Multiplier, items: Iterable[dict]) -> "AlgebraElement":
        acc: dict[GroupElement, complex] = {}
        for it in items:
            x = sigma.model.element(it["word"])
            acc[x] = acc.get(x, 0j) + complex(it.get("re", 0.0), it.get("im", 0.0))
        return cls(sigma, acc)

    def __repr__(self) -> str:
        return f"<AlgebraElement {self.group_id} support={len(self)}>"


def same_algebra(s1: Multiplier, s2: Multiplier) -> bool:
    if s1 is s2:
        return True
    return s1.model is s2.model and type(s1) is type(s2) and s1.to_spec() == s2.to_spec()


def random_element(
    sigma: Multiplier, radius: int, rng: np.random.Generator, density: float = 1.0
) -> AlgebraElement:
    """Complex Gaussian coefficients on a random subset of the ball."""
    ball = sigma.model.ball(radius)
    keep = rng.random(len(ball)) < density
    if not keep.any():
        keep[rng.integers(len(ball))] = True
    vals = rng.normal(size=len(ball)) + 1j * rng.normal(size=len(ball))
    return AlgebraElement(sigma, {x: v for x, v, k in zip(ball, vals, keep) if k})


# ---------------------------------------------------------------------------
def convolve(f: AlgebraElement, g: AlgebraElement, budget: int = CONVOLUTION_BUDGET) -> AlgebraElement:
    """Twisted convolution, (f * g)(v) = sum_{ab = v} f(a) g(b) sigma(a, b)."""
    f._compatible(g)
    xs, fv = f.arrays()
    ys, gv = g.arrays()
    if not xs or not ys:
        return AlgebraElement.zero(f.sigma)
    if len(xs) * len(ys) > budget:
        raise CapacityError(f"convolution of supports {len(xs)} x {len(ys)} exceeds budget {budget}")
    prods, idx = f.model.product_table(xs, ys)
    terms = fv[:, None] * gv[None, :] * f.sigma.outer(xs, ys)
    flat = idx.ravel()
    re = np.bincount(flat, weights=terms.real.ravel(), minlength=len(prods))
    im = np.bincount(flat, weights=terms.imag.ravel(), minlength=len(prods))
    return AlgebraElement(f.sigma, dict(zip(prods, re + 1j * im)))


def untwisted_abs_convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """|f| * |g| in the untwisted group algebra."""
    from .multipliers import TrivialMultiplier

    triv = TrivialMultiplier(f.model)
    fa = AlgebraElement(triv, {x: abs(v) for x, v in f.coefficients.items()})
    ga = AlgebraElement(triv, {x: abs(v) for x, v in g.coefficients.items()})
    return convolve(fa, ga)


def power(f: AlgebraElement, n: int) -> AlgebraElement:
    if n < 1:
        raise DomainError("power needs n >= 1")
    result = None
    base = f
    while n:
        if n & 1:
            result = base if result is None else convolve(result, base)
        n >>= 1
        if n:
            base = convolve(base, base)
    return result  # type: ignore[return-value]


def star(f: AlgebraElement) -> AlgebraElement:
    """f*(g) = conj(f(g^-1)) conj(sigma(g^-1, g)); makes every T_g unitary."""
    xs, v = f.arrays()
    if not xs:
        return f
    model = f.model
    inv = [model.inverse(x) for x in xs]
    s = f.sigma.values(xs, inv)
    return AlgebraElement(f.sigma, dict(zip(inv, np.conj(v) * np.conj(s))))


def adjoint_matrix_check(f: AlgebraElement, radius: int) -> float:
    """Distance between the compression of star(f) and the adjoint compression of f."""
    A = compression_matrix(f, radius)
    B = compression_matrix(star(f), radius)
    return float(abs(A.conj().T - B).max()) if A.nnz or B.nnz else 0.0


# ---------------------------------------------------------------------------
@dataclass
class NormReport:
    l1: float
    l2: float
    sobolev: dict[float, float]
    sup_weighted: dict[float, float]
    op_lower: float | None = None
    op_upper: float | None = None
    op_converged: bool | None = None
    truncation_radius: int | None = None

    def to_dict(self) -> dict:
        return {
            "l1": self.l1,
            "l2": self.l2,
            "sobolev": {repr(float(k)): v for k, v in self.sobolev.items()},
            "sup_weighted": {repr(float(k)): v for k, v in self.sup_weighted.items()},
            "op_lower": self.op_lower,
            "op_upper": self.op_upper,
            "op_converged": self.op_converged,
            "truncation_radius": self.truncation_radius,
        }


def _abs_and_weights(f: AlgebraElement) -> tuple[np.ndarray, np.ndarray]:
    xs, v = f.arrays()
    return np.abs(v), 1.0 + f.model.lengths(xs).astype(float)


def l1_norm(f: AlgebraElement) -> float:
    return float(np.sum(np.abs(f.arrays()[1])))


def l2_norm(f: AlgebraElement) -> float:
    return float(np.sqrt(np.sum(np.abs(f.arrays()[1]) ** 2)))


def sobolev_norm(f: AlgebraElement, s: float) -> float:
    a, w = _abs_and_weights(f)
    return float(np.sqrt(np.sum(a**2 * w ** (2.0 * s))))


def sup_weighted_norm(f: AlgebraElement, s: float) -> float:
    a, w = _abs_and_weights(f)
    return float(np.max(a * w**s)) if len(a) else 0.0


def norms(
    f: AlgebraElement,
    s_list: Sequence[float],
    truncation_radius: int | None = None,
    rd_certificate: tuple[float, float] | None = None,
) -> NormReport:
    for s in s_list:
        if s < 0:
            raise DomainError("Sobolev exponents must be nonnegative")
    rep = NormReport(
        l1=l1_norm(f),
        l2=l2_norm(f),
        sobolev={float(s): sobolev_norm(f, s) for s in s_list},
        sup_weighted={float(s): sup_weighted_norm(f, s) for s in s_list},
    )
    if truncation_radius is not None:
        b = operator_norm_bounds(f, truncation_radius, rd_certificate)
        rep.op_lower, rep.op_upper, rep.op_converged = b.lower, b.upper, b.converged
        rep.truncation_radius = truncation_radius
    return rep


@dataclass
class OperatorBounds:
    lower: float
    upper: float
    converged: bool
    iterations: int
    method: str

    def __iter__(self):
        yield self.lower
        yield self.upper


def compression_matrix(f: AlgebraElement, radius: int) -> sp.csr_matrix:
    """Matrix of left twisted convolution by f on span{delta_g : l(g) <= radius}.

    Column mu holds f * delta_mu, i.e. entry (a mu, mu) = f(a) sigma(a, mu).
    """
    model = f.model
    ball = model.ball(radius)
    pos = {x: i for i, x in enumerate(ball)}
    xs, v = f.arrays()
    n = len(ball)
    if not xs:
        return sp.csr_matrix((n, n), dtype=complex)
    prods, idx = model.product_table(xs, ball)
    row_of = np.array([pos.get(p, -1) for p in prods], dtype=np.int64)[idx]
    vals = v[:, None] * f.sigma.outer(xs, ball)
    cols = np.broadcast_to(np.arange(n)[None, :], idx.shape)
    keep = row_of >= 0
    return sp.csr_matrix((vals[keep], (row_of[keep], cols[keep])), shape=(n, n))


def _largest_singular_value(M: sp.spmatrix, tol: float, max_iter: int) -> tuple[float, bool, int, str]:
    n = M.shape[1]
    if n == 0 or M.nnz == 0:
        return 0.0, True, 0, "empty"
    if n <= DENSE_SVD_LIMIT:
        s = np.linalg.svd(M.toarray(), compute_uv=False)
        return float(s[0]), True, 1, "dense-svd"
    rng = np.random.default_rng(12345)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    x /= np.linalg.norm(x)
    MH = M.conj().T.tocsr()
    est = 0.0
    for it in range(1, max_iter + 1):
        y = MH @ (M @ x)
        lam = np.linalg.norm(y)
        if lam == 0:
            return 0.0, True, it, "power"
        x = y / lam
        new = float(np.sqrt(lam))
        if abs(new - est) <= tol * max(new, 1.0):
            est = new
            break
        est = new
    else:
        return float(np.linalg.norm(M @ x)), False, max_iter, "power"
    # Rayleigh value of the final unit vector is a certified lower bound
    return float(np.linalg.norm(M @ x)), True, it, "power"


def operator_norm_bounds(
    f: AlgebraElement,
    truncation_radius: int,
    rd_certificate: tuple[float, float] | None = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> OperatorBounds:
    """Certified interval for the reduced operator norm of f.

    The lower bound is the norm of a compression of left convolution to a
    ball; the upper bound is the l1 norm, improved to C ||f||_s when an RD
    certificate ``(C, s)`` is given.
    """
    lower, converged, iters, method = _largest_singular_value(
        compression_matrix(f, truncation_radius), tol, max_iter
    )
    upper = l1_norm(f)
    if rd_certificate is not None:
        C, s = rd_certificate
        upper = min(upper, C * sobolev_norm(f, s))
    lower = min(lower, upper)
    return OperatorBounds(lower, upper, converged, iters, method)


def gauge_isomorphism(
    f: AlgebraElement, gauge: GaugeFunction, target: Multiplier | None = None
) -> AlgebraElement:
    """phi(T_g) = gauge(g) T'_g from C(Gamma, sigma) to C(Gamma, sigma d(gauge))."""
    if target is None:
        target = coboundary_gauge(f.sigma, gauge)
    elif isinstance(target, CoboundaryMultiplier) and target.base is not f.sigma:
        raise ValidationError("target multiplier is not a gauge of the source multiplier")
    xs, v = f.arrays()
    return AlgebraElement(target, dict(zip(xs, v * gauge.values(xs))))


@dataclass
class DecayReport:
    verdict: str
    s_values: list[int]
    sup_inner: list[float]
    sup_outer: list[float]
    sobolev_inner: list[float]
    sobolev_outer: list[float]
    tail_nonincreasing: list[bool]
    radius: int
    details: dict = field(default_factory=dict)

    @property
    def rapidly_decreasing(self) -> bool:
        return self.verdict == "rapidly decreasing"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "verdict", "s_values", "sup_inner", "sup_outer", "sobolev_inner",
            "sobolev_outer", "tail_nonincreasing", "radius",
        )}


def is_rapidly_decreasing(
    model: GroupModel,
    rule: Callable[[GroupElement], complex],
    s_max: int = 4,
    tail_radius: int = 40,
    rtol: float = 1e-12,
) -> DecayReport:
    """Numerical test of rapid decrease for a coefficient rule on Z^n.

    For each integer s <= s_max the weighted sup over the ball of radius R is
    compared with the one over radius R/2; a function is declared rapidly
    decreasing when no weighted sup increases on the outer half and the
    weighted shell sums in the outer half do not grow.
    """
    if not isinstance(model, FreeAbelianGroup):
        raise UnsupportedModelError("the sup-norm criterion needs polynomial growth (Z^n)")
    R = int(tail_radius)
    elems, counts = model.enumerate_ball(R)
    vals = np.abs(np.array([rule(x) for x in elems], dtype=complex))
    lens = model.lengths(elems)
    inner = lens <= R // 2
    s_values = list(range(int(s_max) + 1))
    sup_in, sup_out, sob_in, sob_out, tails = [], [], [], [], []
    ok = True
    for s in s_values:
        w = (1.0 + lens) ** s
        a = vals * w
        si, so = float(a[inner].max()), float(a.max())
        sup_in.append(si)
        sup_out.append(so)
        sob_in.append(float(np.sqrt(np.sum(a[inner] ** 2))))
        sob_out.append(float(np.sqrt(np.sum(a**2))))
        shells = np.bincount(lens, weights=a**2, minlength=R + 1)[R // 2 + 1 :]
        nonincreasing = bool(np.all(np.diff(shells) <= rtol * max(shells.max(initial=0.0), 1e-300)))
        tails.append(nonincreasing)
        if so > si * (1 + rtol) or not nonincreasing:
            ok = False
    verdict = "rapidly decreasing" if ok else "not rapidly decreasing"
    return DecayReport(verdict, s_values, sup_in, sup_out, sob_in, sob_out, tails, R)
