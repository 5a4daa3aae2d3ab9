"""Projections and idempotents in twisted algebras, and the canonical trace.

Two kinds of objects appear here.  :class:`AlgebraElement` lives in the
twisted group algebra itself; :class:`FunctionAlgebraElement` is a finitely
supported map from the group to grid functions on the model space, with the
crossed-product style product

    (a * b)(g, x) = sum_{h k = g} a(h, x) b(k, h^-1 x) sigma(h, k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraElement, convolve, l1_norm, star
from .errors import CapacityError, DomainError, ValidationError
from .groups import FreeAbelianGroup, GroupElement, SurfaceGroup
from .multipliers import Multiplier, Phase, area_cocycle, make_theta_cocycle, trivial_multiplier

PARTITION_TOL = 1e-10
RIEFFEL_TAIL = 1e-12


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L]^d with ``n`` points per unit length.

    Integer translations are index shifts by ``n`` per unit, so the group
    action of Z^d on the grid is exact.
    """

    dim: int
    n: int = 32
    half_width: int = 2

    @property
    def axis(self) -> np.ndarray:
        m = self.half_width * self.n
        return np.arange(-m, m + 1) / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (2 * self.half_width * self.n + 1,) * self.dim

    @property
    def cell_volume(self) -> float:
        return float(self.n) ** (-self.dim)

    def points(self) -> np.ndarray:
        """Grid points with shape ``shape + (dim,)``."""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def shift(self, arr: np.ndarray, g: Sequence[int]) -> np.ndarray:
        """out[x] = arr[x - g], zero where x - g leaves the window."""
        out = np.zeros_like(arr)
        src = []
        dst = []
        for gi in g:
            k = int(gi) * self.n
            size = arr.shape[len(src)]
            if abs(k) >= size:
                return out
            if k >= 0:
                dst.append(slice(k, size))
                src.append(slice(0, size - k))
            else:
                dst.append(slice(0, size + k))
                src.append(slice(-k, size))
        out[tuple(dst)] = arr[tuple(src)]
        return out


@dataclass
class FunctionAlgebraElement:
    coefficients: dict
    grid: Grid
    sigma: Multiplier

    @property
    def model(self):
        return self.sigma.model

    def support(self) -> list[GroupElement]:
        return sorted(self.coefficients, key=self.model.sort_key)

    def __getitem__(self, g: GroupElement) -> np.ndarray:
        return self.coefficients.get(g, np.zeros(self.grid.shape, dtype=complex))

    def __sub__(self, other: "FunctionAlgebraElement") -> "FunctionAlgebraElement":
        keys = set(self.coefficients) | set(other.coefficients)
        return FunctionAlgebraElement({k: self[k] - other[k] for k in keys}, self.grid, self.sigma)

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.coefficients.values()), default=0.0)

    def __mul__(self, other: "FunctionAlgebraElement") -> "FunctionAlgebraElement":
        return grid_convolve(self, other)


def grid_convolve(a: FunctionAlgebraElement, b: FunctionAlgebraElement) -> FunctionAlgebraElement:
    model = a.model
    out: dict = {}
    for h, ah in a.coefficients.items():
        for k, bk in b.coefficients.items():
            g = model.multiply(h, k)
            term = ah * a.grid.shift(bk, h.word) * a.sigma(h, k)
            out[g] = out[g] + term if g in out else term
    return FunctionAlgebraElement(out, a.grid, a.sigma)


# partition roots: h with sum_n h(x - n)^2 = 1 -----------------------------
def triangular_root(x: np.ndarray) -> np.ndarray:
    """h with h^2 = prod_i (1 - |x_i|)_+."""
    return np.sqrt(np.prod(np.clip(1.0 - np.abs(x), 0.0, None), axis=-1))


def cosine_root(x: np.ndarray) -> np.ndarray:
    """h with h^2 = prod_i cos^2(pi x_i / 2) on [-1, 1]^d."""
    inside = np.all(np.abs(x) <= 1.0, axis=-1)
    return np.where(inside, np.abs(np.prod(np.cos(np.pi * x / 2), axis=-1)), 0.0)


def indicator_root(x: np.ndarray) -> np.ndarray:
    """Indicator of the strict fundamental domain [0, 1)^d."""
    return np.all((x >= 0) & (x < 1), axis=-1).astype(float)


def check_partition(h: Callable, grid: Grid, tol: float = PARTITION_TOL) -> float:
    """max over the unit cell of |sum_n h(x - n)^2 - 1|; raises when above tol."""
    pts = np.stack(np.meshgrid(*([np.arange(grid.n) / grid.n] * grid.dim), indexing="ij"), axis=-1)
    total = np.zeros(pts.shape[:-1])
    rng = range(-2, 3)
    for shift in np.array(np.meshgrid(*([list(rng)] * grid.dim), indexing="ij")).reshape(grid.dim, -1).T:
        total += h(pts - shift) ** 2
    err = np.abs(total - 1.0)
    worst = float(err.max())
    if worst > tol:
        i = np.unravel_index(int(np.argmax(err)), err.shape)
        raise ValidationError(f"partition of unity fails at x = {pts[i].tolist()} (error {worst:.2e})")
    return worst


@dataclass
class IdempotentResult:
    element: FunctionAlgebraElement
    residual: float
    trace: float
    partition_error: float

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "trace": self.trace,
            "partition_error": self.partition_error,
            "support": [list(g.word) for g in self.element.support()],
        }


def canonical_idempotent(
    model: FreeAbelianGroup,
    h: Callable = triangular_root,
    phase: Phase | None = None,
    grid: Grid | None = None,
) -> IdempotentResult:
    """e(g, x) = h(x) h(g^-1 x) exp(+i phi_g(g^-1 x)), verified on the grid.

    ``h`` must be supported in [-1, 1]^d and satisfy sum_n h(x - n)^2 = 1.
    With sigma = exp(-i lambda) the compatibility of the phase makes the
    exponent of e * e collapse to phi_g(g^-1 x) when the sign is +.
    Without a phase the multiplier is trivial.
    """
    if not isinstance(model, FreeAbelianGroup):
        raise DomainError("gridded models are implemented for Z^d acting on R^d")
    d = model.n
    grid = grid or Grid(d, 32 if d == 1 else 16, 2)
    if grid.dim != d:
        raise ValidationError("grid dimension does not match the group")
    perr = check_partition(h, grid)
    sigma = phase.multiplier() if phase is not None else trivial_multiplier(model)
    pts = grid.points()
    flat = pts.reshape(-1, d)
    h0 = h(pts)
    coeffs = {}
    for g in model.ball(d):
        shift = np.asarray(g.word, dtype=float)
        if np.any(np.abs(shift) >= 2):
            continue
        hg = h(pts - shift)
        amp = h0 * hg
        if not np.any(amp):
            continue
        if phase is not None:
            ph = np.asarray(phase(g, flat - shift)).reshape(grid.shape)
            amp = amp * np.exp(1j * ph)
        coeffs[g] = amp.astype(complex)
    e = FunctionAlgebraElement(coeffs, grid, sigma)
    resid = (e * e - e).max_abs()
    tr = function_trace(e)
    return IdempotentResult(e, resid, tr, perr)


def function_trace(e: FunctionAlgebraElement) -> float:
    """integral over X of e(identity, x)."""
    vals = e[e.model.identity]
    return float(np.real(np.sum(vals)) * e.grid.cell_volume)


# ---------------------------------------------------------------------------
def _smoothstep(u: np.ndarray) -> np.ndarray:
    """C-infinity step from 0 to 1 on [0, 1] with psi(u) + psi(1 - u) = 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def rieffel_profiles(theta: float, eps: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(f, g) on the circle with g^2 = f - f^2 on the rising edge,
    f(t) + f(t + theta) = 1 there, and g(t) g(t + theta) = 0."""
    t = np.mod(t, 1.0)
    rise = (t < eps)
    fall = (t >= theta) & (t < theta + eps)
    psi_r = _smoothstep(t / eps)
    psi_f = _smoothstep((t - theta) / eps)
    f = np.where(rise, np.sin(0.5 * np.pi * psi_r) ** 2, 0.0)
    f = np.where((t >= eps) & (t < theta), 1.0, f)
    f = np.where(fall, np.cos(0.5 * np.pi * psi_f) ** 2, f)
    g = np.where(rise, 0.5 * np.sin(np.pi * psi_r), 0.0)
    return f, g


def _fourier_series(values: np.ndarray, tail: float) -> dict[int, complex]:
    M = len(values)
    c = np.fft.fft(values) / M
    k = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    order = np.argsort(np.abs(c))
    dropped = np.cumsum(np.abs(c[order]))
    n_drop = int(np.searchsorted(dropped, tail, side="right"))
    keep = order[n_drop:]
    kmax = int(np.max(np.abs(k[keep]))) if len(keep) else 0
    if kmax >= M // 4:
        raise CapacityError(f"Fourier tail does not reach {tail:g} within {M} samples")
    return {int(k[i]): complex(c[i]) for i in keep}


@dataclass
class RieffelResult:
    theta: float
    projection: AlgebraElement
    trace: float
    idempotency: float
    selfadjointness: float
    eps: float
    samples: int
    n_terms: int

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "tau": self.trace,
            "idempotency_l1": self.idempotency,
            "selfadjoint_l1": self.selfadjointness,
            "edge_width": self.eps,
            "samples": self.samples,
            "n_terms": self.n_terms,
        }


def rieffel_projection(
    theta: float,
    eps: float | None = None,
    samples: int = 1 << 14,
    tail: float = RIEFFEL_TAIL,
) -> RieffelResult:
    """Projection p = star(V) g(U) + f(U) + g(U) V with trace theta.

    U = T_(1,0), V = T_(0,1) in the algebra of Z^2 twisted by
    exp(-2 pi i theta m n').  Conjugation by V shifts functions of U by
    theta, which turns p^2 = p into the profile relations satisfied by
    :func:`rieffel_profiles`.  The edges use a C-infinity step so the
    Fourier tails are tiny; ``eps`` is the edge width.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if eps is None:
        eps = 0.9 * min(theta, 1.0 - theta)
    if not 0.0 < eps < min(theta, 1.0 - theta) + 1e-15:
        raise DomainError("edge width must be below min(theta, 1 - theta)")
    Z2 = FreeAbelianGroup(2)
    sigma = make_theta_cocycle(2 * np.pi * theta, Z2)
    t = np.arange(samples) / samples
    f, g = rieffel_profiles(theta, eps, t)
    fh = _fourier_series(f, tail / 3)
    gh = _fourier_series(g, tail / 3)
    F = AlgebraElement(sigma, {Z2.element((k, 0)): c for k, c in fh.items()})
    G = AlgebraElement(sigma, {Z2.element((k, 0)): c for k, c in gh.items()})
    V = AlgebraElement.delta(sigma, Z2.element((0, 1)))
    p = convolve(star(V), G) + F + convolve(G, V)
    idem = l1_norm(convolve(p, p) - p)
    sa = l1_norm(star(p) - p)
    tr = float(trace(p).real)
    return RieffelResult(float(theta), p, tr, idem, sa, float(eps), int(samples), len(p))


# ---------------------------------------------------------------------------
def trace(f) -> complex:
    """Canonical trace: the coefficient at the identity.

    Square arrays (nested lists) of elements sum the diagonal traces;
    grid-valued elements integrate their identity coefficient.
    """
    if isinstance(f, AlgebraElement):
        return complex(f[f.model.identity])
    if isinstance(f, FunctionAlgebraElement):
        return complex(function_trace(f))
    rows = list(f)
    return complex(sum(trace(rows[i][i]) for i in range(len(rows))))


@dataclass
class K1Generators:
    unitaries: list[AlgebraElement]
    unitarity: float
    commutators: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"count": len(self.unitaries), "unitarity": self.unitarity, "commutators": self.commutators}


def unitarity_residual(u: AlgebraElement) -> float:
    one = AlgebraElement.unit(u.sigma)
    us = star(u)
    return max(convolve(us, u).max_abs_diff(one), convolve(u, us).max_abs_diff(one))


def k1_generators(g: int, sigma: Multiplier | None = None, kappa: float = 1.0) -> K1Generators:
    """delta elements at the 2g standard generators with unitarity and commutator data.

    g = 1 uses Z^2 (trivial multiplier unless one is given); g >= 2 uses the
    surface group with the area cocycle of coupling ``kappa`` by default.
    """
    if g < 1:
        raise DomainError("genus must be at least 1")
    if sigma is None:
        sigma = trivial_multiplier(FreeAbelianGroup(2)) if g == 1 else area_cocycle(SurfaceGroup(g), kappa)
    model = sigma.model
    gens = model.generators
    us = [AlgebraElement.delta(sigma, x) for x in gens]
    resid = max(unitarity_residual(u) for u in us)
    comms = []
    for i in range(len(us)):
        for j in range(i + 1, len(us)):
            c = convolve(convolve(us[i], us[j]), convolve(star(us[i]), star(us[j])))
            xs, v = c.arrays()
            big = np.abs(v) > 1e-12
            comms.append({
                "pair": [i, j],
                "support": [list(x.word) for x, b in zip(xs, big) if b],
                "modulus": float(np.abs(v[big]).max()) if big.any() else 0.0,
                "is_scalar_delta": bool(big.sum() == 1 and abs(abs(v[big][0]) - 1) < 1e-9),
            })
    return K1Generators(us, resid, comms)
