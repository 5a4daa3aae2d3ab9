"""U(1)-valued 2-cocycles (multipliers), gauges and phases built from 2-forms.

A multiplier is stored through the cheapest faithful representation it
admits.  Bilinear cocycles on Z^n keep integer exponents so that the cocycle
identity can be checked by exact integer bookkeeping.  Geometric cocycles keep
their real logarithm ``lam`` with ``sigma = exp(-1j * lam)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import hyperbolic
from .errors import ConfigurationError, DiscretizationError, DomainError, ValidationError
from .groups import FreeAbelianGroup, GroupElement, GroupModel, SurfaceGroup

EXACT_TOL = 1e-12
AREA_TOL = 1e-9
GRID_TOL = 1e-8


class Multiplier:
    """Base class.  Subclasses implement :meth:`values` (pairwise evaluation)."""

    description = "custom"

    def __init__(self, model: GroupModel, tolerance: float = EXACT_TOL, params: dict | None = None):
        self.model = model
        self.tolerance = float(tolerance)
        self.params = dict(params or {})

    @property
    def exact(self) -> bool:
        return self.tolerance <= EXACT_TOL

    def values(self, xs: Sequence[GroupElement], ys: Sequence[GroupElement]) -> np.ndarray:
        raise NotImplementedError

    def log_values(self, xs, ys) -> np.ndarray | None:
        """Real ``lam`` with ``sigma = exp(-i lam)`` when available."""
        return None

    def int_exponents(self, xs, ys) -> np.ndarray | None:
        """Integer ``E`` with ``sigma = exp(-i * angle * E)`` when available."""
        return None

    angle: float = 0.0

    def __call__(self, a: GroupElement, b: GroupElement) -> complex:
        return complex(self.values([a], [b])[0])

    def outer(self, xs: Sequence[GroupElement], ys: Sequence[GroupElement]) -> np.ndarray:
        xs, ys = list(xs), list(ys)
        if not xs or not ys:
            return np.ones((len(xs), len(ys)), dtype=complex)
        X = [x for x in xs for _ in ys]
        Y = ys * len(xs)
        return self.values(X, Y).reshape(len(xs), len(ys))

    def to_spec(self) -> dict:
        return {"kind": self.description, **self.params}

    def __repr__(self) -> str:
        return f"<Multiplier {self.description} on {self.model.group_id}>"


class TrivialMultiplier(Multiplier):
    description = "trivial"

    def values(self, xs, ys):
        return np.ones(len(xs), dtype=complex)

    def int_exponents(self, xs, ys):
        return np.zeros(len(xs), dtype=np.int64)

    def outer(self, xs, ys):
        return np.ones((len(xs), len(ys)), dtype=complex)


class BilinearCocycle(Multiplier):
    """sigma(x, y) = exp(-i * angle * x^T M y) on Z^n with integer M."""

    description = "bilinear"

    def __init__(self, model: FreeAbelianGroup, matrix, angle: float, params: dict | None = None):
        if not isinstance(model, FreeAbelianGroup):
            raise DomainError("bilinear cocycles live on Z^n")
        super().__init__(model, EXACT_TOL, params)
        M = np.asarray(matrix)
        if M.shape != (model.n, model.n) or not np.all(M == np.round(M)):
            raise ValidationError("bilinear form must be an integer n x n matrix")
        self.matrix = M.astype(np.int64)
        self.angle = float(angle)

    def int_exponents(self, xs, ys):
        X, Y = self.model.coords(xs), self.model.coords(ys)
        return np.einsum("ai,ij,aj->a", X, self.matrix, Y)

    def log_values(self, xs, ys):
        return self.angle * self.int_exponents(xs, ys)

    def values(self, xs, ys):
        return np.exp(-1j * self.log_values(xs, ys))

    def outer(self, xs, ys):
        X, Y = self.model.coords(xs), self.model.coords(ys)
        return np.exp(-1j * self.angle * (X @ self.matrix @ Y.T))


class AreaCocycle(Multiplier):
    """kappa times the signed area of the geodesic triangle (0, g 0, g m 0)."""

    description = "area"

    def __init__(self, model: SurfaceGroup, kappa: float):
        super().__init__(model, AREA_TOL, {"g": model.g, "kappa": float(kappa)})
        self.kappa = float(kappa)

    def _entries(self, xs):
        M = self.model.matrices(xs)
        return M[:, 0, 0], M[:, 0, 1]

    def log_values(self, xs, ys):
        a1, b1 = self._entries(xs)
        a2, b2 = self._entries(ys)
        a12 = a1 * a2 + b1 * np.conj(b2)
        return self.kappa * hyperbolic.triangle_area_from_entries(a1, a2, a12)

    def values(self, xs, ys):
        return np.exp(-1j * self.log_values(xs, ys))

    def outer(self, xs, ys):
        a1, b1 = self._entries(list(xs))
        a2, b2 = self._entries(list(ys))
        a12 = a1[:, None] * a2[None, :] + b1[:, None] * np.conj(b2)[None, :]
        lam = hyperbolic.triangle_area_from_entries(a1[:, None], a2[None, :], a12)
        return np.exp(-1j * self.kappa * lam)


class TableMultiplier(Multiplier):
    """Explicit table of values; pairs not listed evaluate to 1."""

    description = "table"

    def __init__(self, model: GroupModel, table: dict, tolerance: float = EXACT_TOL):
        super().__init__(model, tolerance)
        self.table = {(a, b): complex(v) for (a, b), v in table.items()}
        for (a, b), v in self.table.items():
            model.check(a, b)
            if abs(abs(v) - 1.0) > 1e-12:
                raise ValidationError(f"table value at {(a, b)} is not unimodular")

    def values(self, xs, ys):
        return np.array([self.table.get((x, y), 1.0 + 0j) for x, y in zip(xs, ys)], dtype=complex)

    def to_spec(self) -> dict:
        entries = [
            [[list(a.word), list(b.word)], v.real, v.imag] for (a, b), v in sorted(
                self.table.items(), key=lambda kv: (self.model.sort_key(kv[0][0]), self.model.sort_key(kv[0][1]))
            )
        ]
        return {"kind": "table", "entries": entries}


@dataclass(frozen=True)
class GaugeFunction:
    """A unimodular function on the group with f(1) = 1."""

    evaluator: Callable[[GroupElement], complex]
    name: str = "custom"

    def __call__(self, x: GroupElement) -> complex:
        return complex(self.evaluator(x))

    def values(self, xs: Sequence[GroupElement]) -> np.ndarray:
        return np.array([self(x) for x in xs], dtype=complex)

    def __mul__(self, other: "GaugeFunction") -> "GaugeFunction":
        f, g = self.evaluator, other.evaluator
        return GaugeFunction(lambda x: f(x) * g(x), f"{self.name}*{other.name}")

    def validate(self, model: GroupModel, radius: int = 2) -> None:
        if abs(self(model.identity) - 1.0) > 1e-14:
            raise ValidationError("gauge must satisfy f(1) = 1")
        v = self.values(model.ball(min(radius, model.working_radius)))
        if np.max(np.abs(np.abs(v) - 1.0)) > 1e-12:
            raise ValidationError("gauge values must be unimodular")


def constant_gauge() -> GaugeFunction:
    return GaugeFunction(lambda x: 1.0 + 0j, "one")


def quadratic_gauge(theta: float) -> GaugeFunction:
    """f(m, n) = exp(i theta m n) on Z^2."""
    return GaugeFunction(lambda x: np.exp(1j * theta * x.word[0] * x.word[1]), f"quadratic({theta})")


def random_gauge(model: GroupModel, seed: int = 0) -> GaugeFunction:
    """Deterministic pseudo-random gauge keyed on the normal form."""
    cache: dict[GroupElement, complex] = {}

    def f(x: GroupElement) -> complex:
        if x == model.identity:
            return 1.0 + 0j
        if x not in cache:
            # tuple-of-int hashing is not salted, so this is reproducible
            h = hash((int(seed), x.word)) & 0xFFFFFFFF
            cache[x] = np.exp(2j * np.pi * np.random.default_rng(h).random())
        return cache[x]

    return GaugeFunction(f, f"random({seed})")


class CoboundaryMultiplier(Multiplier):
    """sigma'(x, y) = sigma(x, y) f(xy) / (f(x) f(y))."""

    description = "coboundary"

    def __init__(self, base: Multiplier, gauge: GaugeFunction):
        super().__init__(base.model, max(base.tolerance, EXACT_TOL), {"base": base.to_spec(), "gauge": gauge.name})
        self.base = base
        self.gauge = gauge

    def values(self, xs, ys):
        prods = [self.model.multiply(x, y) for x, y in zip(xs, ys)]
        f = self.gauge.values
        return self.base.values(xs, ys) * f(prods) * np.conj(f(xs)) * np.conj(f(ys))

    def outer(self, xs, ys):
        xs, ys = list(xs), list(ys)
        uniq, idx = self.model.product_table(xs, ys)
        fp = self.gauge.values(uniq)[idx]
        fx, fy = self.gauge.values(xs), self.gauge.values(ys)
        return self.base.outer(xs, ys) * fp * np.conj(fx)[:, None] * np.conj(fy)[None, :]


def trivial_multiplier(model: GroupModel) -> Multiplier:
    return TrivialMultiplier(model)


def make_theta_cocycle(theta: float, model: FreeAbelianGroup | None = None) -> Multiplier:
    """exp(-i theta m n') on Z^2."""
    model = model or FreeAbelianGroup(2)
    if not (isinstance(model, FreeAbelianGroup) and model.n == 2):
        raise DomainError("the theta cocycle lives on Z^2")
    sigma = BilinearCocycle(model, [[0, 1], [0, 0]], theta, {"theta": float(theta)})
    sigma.description = "theta"
    return sigma


def area_cocycle(g: int | SurfaceGroup, kappa: float) -> Multiplier:
    model = g if isinstance(g, SurfaceGroup) else SurfaceGroup(int(g))
    mats = model.generator_matrices
    rel = hyperbolic.word_matrix(hyperbolic.relator(model.g), mats)
    if min(np.abs(rel - np.eye(2)).max(), np.abs(rel + np.eye(2)).max()) > 1e-8:
        raise ConfigurationError("Fuchsian representation does not satisfy the relator")
    return AreaCocycle(model, kappa)


def coboundary_gauge(sigma: Multiplier, f: GaugeFunction) -> Multiplier:
    f.validate(sigma.model)
    return CoboundaryMultiplier(sigma, f)


def coboundary_multiplier(model: GroupModel, f: GaugeFunction) -> Multiplier:
    """The coboundary df of a gauge, i.e. the trivial cocycle gauged by f."""
    return coboundary_gauge(TrivialMultiplier(model), f)


# ---------------------------------------------------------------------------
@dataclass
class MultiplierReport:
    max_residual: float
    float_residual: float
    normalization_residual: float
    n_triples: int
    tolerance: float
    passed: bool
    bookkeeping: str
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "float_residual": self.float_residual,
            "normalization_residual": self.normalization_residual,
            "n_triples": self.n_triples,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "bookkeeping": self.bookkeeping,
            "witnesses": self.witnesses,
        }


def _sample_triples(model: GroupModel, samples, n_random: int | None, seed: int):
    if isinstance(samples, (list, tuple)):
        return [tuple(t) for t in samples]
    radius = int(samples)
    ball = model.ball(radius)
    if n_random is None:
        return [(a, b, c) for a in ball for b in ball for c in ball]
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(ball), size=(n_random, 3))
    return [(ball[i], ball[j], ball[k]) for i, j, k in idx]


def verify_multiplier(
    sigma: Multiplier,
    samples=2,
    n_random: int | None = None,
    seed: int = 0,
    tolerance: float | None = None,
    max_witnesses: int = 5,
) -> MultiplierReport:
    """Check normalization and the cocycle identity on sampled triples.

    ``samples`` is either a list of triples or a radius; with a radius the
    check is exhaustive over the ball unless ``n_random`` triples are asked
    for.  When the multiplier carries integer exponents (or a real logarithm)
    the residual is computed from the combined exponent, so algebraic errors
    are separated from floating-point rounding; ``float_residual`` always
    reports the direct evaluation.
    """
    model = sigma.model
    tol = sigma.tolerance if tolerance is None else float(tolerance)
    triples = _sample_triples(model, samples, n_random, seed)
    if not triples:
        return MultiplierReport(0.0, 0.0, 0.0, 0, tol, True, "none")
    G = [t[0] for t in triples]
    M = [t[1] for t in triples]
    D = [t[2] for t in triples]
    GM = [model.multiply(g, m) for g, m in zip(G, M)]
    MD = [model.multiply(m, d) for m, d in zip(M, D)]

    s1, s2 = sigma.values(G, M), sigma.values(GM, D)
    s3, s4 = sigma.values(G, MD), sigma.values(M, D)
    float_res = np.abs(s1 * s2 - s3 * s4)

    E = [sigma.int_exponents(*p) for p in ((G, M), (GM, D), (G, MD), (M, D))]
    if all(e is not None for e in E):
        K = E[0] + E[1] - E[2] - E[3]
        res = np.abs(np.exp(-1j * sigma.angle * K) - 1.0)
        bookkeeping = "integer-exponent"
    else:
        lam = [sigma.log_values(*p) for p in ((G, M), (GM, D), (G, MD), (M, D))]
        if all(v is not None for v in lam):
            res = np.abs(np.exp(-1j * (lam[0] + lam[1] - lam[2] - lam[3])) - 1.0)
            bookkeeping = "log-phase"
        else:
            res = float_res
            bookkeeping = "direct"

    elems = list({x for t in triples for x in t})
    ident = [model.identity] * len(elems)
    norm_res = max(
        float(np.max(np.abs(sigma.values(elems, ident) - 1.0))),
        float(np.max(np.abs(sigma.values(ident, elems) - 1.0))),
    )
    unit_res = float(np.max(np.abs(np.abs(s1) - 1.0)))
    norm_res = max(norm_res, unit_res)

    order = np.argsort(-res, kind="stable")[:max_witnesses]
    witnesses = [
        {
            "gamma": list(G[i].word),
            "mu": list(M[i].word),
            "delta": list(D[i].word),
            "residual": float(res[i]),
        }
        for i in order
        if res[i] > 0
    ]
    max_res = float(res.max())
    return MultiplierReport(
        max_residual=max_res,
        float_residual=float(float_res.max()),
        normalization_residual=norm_res,
        n_triples=len(triples),
        tolerance=tol,
        passed=bool(max_res < tol and norm_res < tol) if tol > 0 else bool(max_res == 0 and norm_res == 0),
        bookkeeping=bookkeeping,
        witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
def _gl(n: int):
    t, w = leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


class Phase:
    """A family of real functions phi_gamma on a Gamma-space X.

    ``space`` is ``"plane"`` (R^n with Z^n acting by translation) or
    ``"disk"`` (Poincare disk with a surface group acting by Moebius maps).
    ``phi_gamma(x)`` is the line integral of ``gamma^* Lambda - Lambda`` from
    the base point to ``x`` along a straight segment (plane) or a geodesic
    (disk), so ``phi_gamma(x0) = 0`` by construction.
    """

    def __init__(
        self,
        model: GroupModel,
        space: str,
        x0,
        primitive: Callable,
        nodes: int = 48,
        tol: float = 1e-11,
        omega=None,
    ):
        self.model = model
        self.space = space
        self.x0 = np.asarray(x0, dtype=complex if space == "disk" else float)
        self.primitive = primitive
        self.nodes = int(nodes)
        self.tol = float(tol)
        self.omega = omega

    # group action on X
    def act(self, gamma: GroupElement, x):
        if self.space == "plane":
            return np.asarray(x, dtype=float) + np.asarray(gamma.word, dtype=float)
        m = self.model.matrix(gamma)
        return hyperbolic.mobius(m, np.asarray(x, dtype=complex))

    def _integrate(self, gamma: GroupElement, pts, n: int) -> np.ndarray:
        t, w = _gl(n)
        if self.space == "plane":
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            v = np.asarray(gamma.word, dtype=float)
            d = pts - self.x0[None, :]
            path = self.x0[None, None, :] + t[None, :, None] * d[:, None, :]
            diff = self.primitive(path + v) - self.primitive(path)
            return np.einsum("k,pkj,pj->p", w, diff, d)
        pts = np.atleast_1d(np.asarray(pts, dtype=complex))
        m = self.model.matrix(gamma)
        x0 = complex(self.x0)
        wpt = (pts - x0) / (1 - np.conj(x0) * pts)
        r = np.abs(wpt)
        dist = 2 * np.arctanh(np.minimum(r, 1 - 1e-16))
        u = np.where(r > 0, wpt / np.where(r > 0, r, 1), 1.0)
        s = t[None, :] * dist[:, None]
        wp = np.tanh(s / 2) * u[:, None]
        dwdt = (dist[:, None] / 2) / np.cosh(s / 2) ** 2 * u[:, None]
        z = (wp + x0) / (1 + np.conj(x0) * wp)
        dz = dwdt * (1 - abs(x0) ** 2) / (1 + np.conj(x0) * wp) ** 2
        gz = hyperbolic.mobius(m, z)
        gp = hyperbolic.mobius_derivative(m, z)
        integrand = np.real((self.primitive(gz) * gp - self.primitive(z)) * dz)
        return integrand @ w

    def __call__(self, gamma: GroupElement, x) -> np.ndarray:
        self.model.check(gamma)
        a = self._integrate(gamma, x, self.nodes)
        b = self._integrate(gamma, x, 2 * self.nodes)
        err = float(np.max(np.abs(a - b))) if np.size(a) else 0.0
        if err > self.tol * max(1.0, float(np.max(np.abs(b))) if np.size(b) else 1.0):
            raise DiscretizationError(f"line integral not converged (difference {err:.2e})")
        return b

    def lam(self, gamma: GroupElement, mu: GroupElement) -> float:
        """lambda(gamma, mu) = phi_gamma(mu x0)."""
        y = self.act(mu, self.x0)
        return float(np.asarray(self(gamma, [y] if self.space == "disk" else y[None, :]))[0])

    def condition_i(self, gamma: GroupElement, mu: GroupElement, pts) -> np.ndarray:
        """phi_gamma(x) + phi_mu(gamma x) - phi_{mu gamma}(x) at the given points."""
        pts_arr = np.asarray(pts, dtype=complex if self.space == "disk" else float)
        gx = np.array([self.act(gamma, p) for p in pts_arr])
        mg = self.model.multiply(mu, gamma)
        return self(gamma, pts_arr) + self(mu, gx) - self(mg, pts_arr)

    def condition_report(self, gamma, mu, pts) -> dict:
        vals = self.condition_i(gamma, mu, pts)
        const = float(np.mean(vals))
        return {
            "constant": const,
            "spread": float(np.max(vals) - np.min(vals)),
            "lambda_gamma_mu": self.lam(gamma, mu),
            "lambda_mu_gamma": self.lam(mu, gamma),
        }

    def multiplier(self) -> Multiplier:
        return PhaseMultiplier(self)


class PhaseMultiplier(Multiplier):
    """sigma(gamma, mu) = exp(-i phi_gamma(mu x0))."""

    description = "phase"

    def __init__(self, phase: Phase):
        super().__init__(phase.model, GRID_TOL, {"space": phase.space})
        self.phase = phase
        self._cache: dict = {}

    def log_values(self, xs, ys):
        out = np.empty(len(xs))
        for i, (x, y) in enumerate(zip(xs, ys)):
            key = (x, y)
            if key not in self._cache:
                self._cache[key] = self.phase.lam(x, y)
            out[i] = self._cache[key]
        return out

    def values(self, xs, ys):
        return np.exp(-1j * self.log_values(xs, ys))


def _constant_form_matrix(omega, n: int) -> np.ndarray | None:
    if callable(omega):
        return None
    W = np.asarray(omega, dtype=float)
    if W.ndim == 0:
        if n != 2:
            raise ValidationError("a scalar 2-form needs a 2-dimensional space")
        return np.array([[0.0, float(W)], [-float(W), 0.0]])
    if W.shape != (n, n):
        raise ValidationError("2-form matrix has the wrong shape")
    if np.max(np.abs(W + W.T)) > 1e-14:
        raise ValidationError("2-form matrix must be antisymmetric")
    return W


def _check_closed(W: Callable, n: int, x0: np.ndarray, h: float = 1e-4, tol: float = 1e-6) -> None:
    """Numerical test of d omega = 0 for omega = 1/2 W_ij dx_i ^ dx_j."""
    if n < 3:
        return
    rng = np.random.default_rng(0)
    for p in x0 + rng.normal(size=(8, n)):
        dW = np.empty((n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dW[k] = (np.asarray(W(p + e)) - np.asarray(W(p - e))) / (2 * h)
        curl = dW + np.transpose(dW, (1, 2, 0)) + np.transpose(dW, (2, 0, 1))
        if np.max(np.abs(curl)) > tol:
            raise ValidationError(f"2-form is not closed near {p.tolist()}")


def phase_from_two_form(
    omega,
    x0=None,
    *,
    model: GroupModel | None = None,
    primitive: Callable | None = None,
    space: str | None = None,
    nodes: int = 48,
    tol: float = 1e-11,
) -> Phase:
    """Phase attached to a closed Gamma-invariant 2-form.

    Plane: ``omega`` is an antisymmetric n x n matrix (constant form), a
    scalar for n = 2, or a callable returning the matrix at a point;
    ``primitive`` maps points of shape (..., n) to 1-form components of shape
    (..., n).  Disk: ``omega`` is the coupling ``kappa`` of ``kappa`` times
    the hyperbolic area form, and ``primitive`` maps complex points to
    ``L = P - iQ`` for ``Lambda = P dx + Q dy``.  Without a primitive the
    radial (Poincare lemma) primitive centred at the base point is used.
    """
    if model is None:
        model = FreeAbelianGroup(2)
    if space is None:
        space = "disk" if isinstance(model, SurfaceGroup) else "plane"
    if space == "plane":
        if not isinstance(model, FreeAbelianGroup):
            raise DomainError("the planar model needs Z^n acting by translations")
        n = model.n
        x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
        Wc = _constant_form_matrix(omega, n)
        Wf = (lambda p: Wc) if Wc is not None else omega
        _check_closed(Wf, n, x0)
        if primitive is None:
            if Wc is not None:
                primitive = lambda p: 0.5 * np.einsum("...i,ij->...j", p - x0, Wc)
            else:
                tq, wq = _gl(24)

                def primitive(p):
                    p = np.asarray(p, dtype=float)
                    d = p - x0
                    out = np.zeros_like(d)
                    for tk, wk in zip(tq, wq):
                        Wv = np.asarray([[Wf(q) for q in row] for row in (x0 + tk * d).reshape(-1, 1, n)])
                        Wv = Wv.reshape(d.shape[:-1] + (n, n))
                        out += wk * tk * np.einsum("...i,...ij->...j", d, Wv)
                    return out

        return Phase(model, "plane", x0, primitive, nodes, tol, omega)

    if space == "disk":
        if not isinstance(model, SurfaceGroup):
            raise DomainError("the disk model needs a surface group")
        kappa = float(omega)
        x0 = 0j if x0 is None else complex(x0)
        if primitive is None:

            def primitive(z):
                # Lambda = 2 kappa (x dy - y dx) / (1 - |z|^2), radial about the origin
                return -2j * kappa * np.conj(z) / (1 - np.abs(z) ** 2)

        return Phase(model, "disk", x0, primitive, nodes, tol, kappa)
    raise DomainError(f"unknown model space {space!r}")


def make_multiplier(spec: dict, model: GroupModel) -> Multiplier:
    """Build a multiplier from a JSON-style spec."""
    kind = spec.get("kind", "trivial")
    if kind == "trivial":
        return TrivialMultiplier(model)
    if kind == "theta":
        theta = float(spec.get("theta", 0.0))
        if spec.get("scale") == "turns":
            theta *= 2 * np.pi
        return make_theta_cocycle(theta, model)  # type: ignore[arg-type]
    if kind == "bilinear":
        return BilinearCocycle(model, spec["matrix"], float(spec.get("angle", 1.0)))  # type: ignore[arg-type]
    if kind == "area":
        if not isinstance(model, SurfaceGroup):
            raise DomainError("area cocycles need a surface group")
        return area_cocycle(model, float(spec.get("kappa", 1.0)))
    if kind == "coboundary":
        base = make_multiplier(spec.get("base", {"kind": "trivial"}), model)
        gauge_spec = spec.get("gauge", {"kind": "random", "seed": 0})
        if gauge_spec.get("kind") == "quadratic":
            gauge = quadratic_gauge(float(gauge_spec["theta"]))
        else:
            gauge = random_gauge(model, int(gauge_spec.get("seed", 0)))
        return coboundary_gauge(base, gauge)
    if kind == "table":
        table = {}
        for (wa, wb), re, im in spec.get("entries", []):
            table[(model.element(wa), model.element(wb))] = complex(re, im)
        return TableMultiplier(model, table)
    raise ValidationError(f"unknown multiplier kind {kind!r}")
