"""Subgroups of R generated by trace values, and the range-of-trace calculator.

Cohomology on tori is handled with a small exterior algebra: a form is a
dict mapping strictly increasing index tuples to coefficients, and pairing a
top-degree class with the fundamental class reads off the coefficient of
dx_0 ^ ... ^ dx_{n-1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError, ConstantsRequiredError, DomainError, ValidationError

MEMBERSHIP_TOL = 1e-9
MAX_GENERATORS = 8
BOX_GENERATORS = 4


# exterior algebra on R^n ------------------------------------------------------
Form = dict


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting idx, or 0 on a repeated index."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def form(terms: Mapping[Sequence[int], float] | Sequence) -> Form:
    """Normalise {(i, j, ...): c} or [[i, j, ..., c], ...] into sorted form."""
    items = terms.items() if isinstance(terms, Mapping) else ((tuple(t[:-1]), t[-1]) for t in terms)
    out: Form = {}
    for idx, c in items:
        s, key = _sort_sign(tuple(int(i) for i in idx))
        if s:
            out[key] = out.get(key, 0.0) + s * float(c)
    return {k: v for k, v in out.items() if v != 0}


def wedge(a: Form, b: Form) -> Form:
    out: Form = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            s, key = _sort_sign(ia + ib)
            if s:
                out[key] = out.get(key, 0.0) + s * ca * cb
    return {k: v for k, v in out.items() if v != 0}


def wedge_power(a: Form, k: int) -> Form:
    out: Form = {(): 1.0}
    for _ in range(k):
        out = wedge(out, a)
    return out


def pair_top(a: Form, n: int) -> float:
    """<a, [T^n]>: the coefficient of dx_0 ^ ... ^ dx_{n-1}."""
    return float(a.get(tuple(range(n)), 0.0))


def coordinate_basis(n: int, degree: int) -> list[Form]:
    return [{idx: 1.0} for idx in itertools.combinations(range(n), degree)]


def torus_intersection_form(n: int = 4) -> np.ndarray:
    """Q(a_i, a_j) on the coordinate basis of H^2(T^4)."""
    if n != 4:
        raise DomainError("intersection forms on H^2 are defined for n = 4")
    basis = coordinate_basis(4, 2)
    return np.array([[pair_top(wedge(a, b), 4) for b in basis] for a in basis], dtype=int)


# subgroups ----------------------------------------------------------------------
@dataclass
class TraceSubgroup:
    generators: list[float]
    tolerance: float = MEMBERSHIP_TOL
    provenance: str = "custom"
    raw_generators: list[float] = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "generators": self.generators,
            "raw_generators": self.raw_generators,
            "tolerance": self.tolerance,
            "provenance": self.provenance,
            "constants": self.constants,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceSubgroup":
        return cls(list(d["generators"]), float(d.get("tolerance", MEMBERSHIP_TOL)),
                   d.get("provenance", "custom"), list(d.get("raw_generators", [])), dict(d.get("constants", {})))


@dataclass
class MembershipResult:
    member: bool
    coefficients: list[int] | None
    distance: float
    method: str

    def __bool__(self) -> bool:
        return self.member

    def to_dict(self) -> dict:
        return {"member": self.member, "coefficients": self.coefficients,
                "distance": self.distance, "method": self.method}


def _box_search(x: float, gens: np.ndarray, bound: int, tol: float) -> tuple[list[int], float]:
    """Exhaustive search; the last generator is solved for by rounding.

    Among representations within tol the one with the smallest l1 norm of
    coefficients is returned.
    """
    k = len(gens)
    best: tuple[list[int], float] = ([0] * k, abs(x))
    if k == 0:
        return best
    rng = np.arange(-bound, bound + 1)
    last = gens[-1]
    if k == 1:
        combos = np.zeros((1, 0))
    else:
        grids = np.meshgrid(*([rng] * (k - 1)), indexing="ij")
        combos = np.stack([g.ravel() for g in grids], axis=-1)
    partial = combos @ gens[:-1] if k > 1 else np.zeros(1)
    rest = x - partial
    if last != 0:
        n_last = np.clip(np.round(rest / last), -bound, bound)
    else:
        n_last = np.zeros_like(rest)
    dist = np.abs(rest - n_last * last)
    hits = np.flatnonzero(dist < tol)
    if len(hits):
        size = np.abs(combos[hits]).sum(axis=1) + np.abs(n_last[hits])
        i = int(hits[np.argmin(size)])
    else:
        i = int(np.argmin(dist))
    coeffs = [int(c) for c in combos[i]] + [int(n_last[i])]
    return coeffs, float(dist[i])


def _lll(B: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """Textbook LLL on the rows of B (float arithmetic, small dimensions)."""
    B = B.astype(float).copy()
    n = len(B)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            Bs[i] = B[i]
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                Bs[i] -= mu[i, j] * Bs[j]
        return Bs, mu

    Bs, mu = gso(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[k] -= q * B[j]
                Bs, mu = gso(B)
        if Bs[k] @ Bs[k] >= (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            Bs, mu = gso(B)
            k = max(k - 1, 1)
    return B


def _lattice_search(x: float, gens: np.ndarray, bound: int, tol: float) -> tuple[list[int], float]:
    """Integer relation x ~ sum n_i g_i via LLL on the embedded lattice.

    Rows (e_i, W g_i) together with (0, W x) span a lattice in which a short
    vector with last coefficient +-1 on the x row encodes a representation.
    Every candidate is verified against the bound and the tolerance.
    """
    k = len(gens)
    W = 1.0 / max(tol, 1e-15)
    B = np.zeros((k + 1, k + 2))
    for i, g in enumerate(gens):
        B[i, i] = 1.0
        B[i, -1] = W * g
    B[k, k] = 1.0
    B[k, -1] = -W * x
    R = _lll(B)
    best: tuple[list[int], float] = ([0] * k, abs(x))
    for row in R:
        t = int(round(row[k]))
        if abs(t) != 1:
            continue
        n = [int(round(t * c)) for c in row[:k]]
        if max((abs(c) for c in n), default=0) > bound:
            continue
        d = abs(x - float(np.dot(n, gens)))
        if d < best[1]:
            best = (n, d)
    return best


def subgroup_membership(x: float, S: TraceSubgroup | Sequence[float], coeff_bound: int = 10) -> MembershipResult:
    """Is |x - sum n_i gen_i| < tol for integers |n_i| <= coeff_bound?"""
    if coeff_bound < 1:
        raise DomainError("coeff_bound must be at least 1")
    if not isinstance(S, TraceSubgroup):
        S = TraceSubgroup(list(S))
    gens = np.asarray(S.generators, dtype=float)
    if len(gens) > MAX_GENERATORS:
        raise CapacityError(f"{len(gens)} generators exceed the limit of {MAX_GENERATORS}")
    if len(gens) == 0:
        return MembershipResult(abs(x) < S.tolerance, [], abs(float(x)), "empty")
    if len(gens) <= BOX_GENERATORS:
        coeffs, d = _box_search(float(x), gens, coeff_bound, S.tolerance)
        method = "box"
    else:
        coeffs, d = _lattice_search(float(x), gens, coeff_bound, S.tolerance)
        method = "lattice"
    ok = d < S.tolerance
    return MembershipResult(bool(ok), coeffs if ok else None, float(d), method)


def reduce_generators(raw: Sequence[float], tol: float = MEMBERSHIP_TOL, bound: int = 10) -> list[float]:
    """Drop zeros and generators already in the span of the kept ones."""
    kept: list[float] = []
    for g in raw:
        if abs(g) < tol:
            continue
        if kept and len(kept) <= MAX_GENERATORS and subgroup_membership(g, TraceSubgroup(kept, tol), bound):
            continue
        kept.append(float(g))
    return kept


# range of the trace --------------------------------------------------------------
def default_c0(n: int) -> float:
    return float((2 * np.pi) ** (-n / 2))


def _omega_form(omega, n: int) -> Form:
    if isinstance(omega, Mapping):
        return form({tuple(int(c) for c in str(k).replace(",", " ").split()) if isinstance(k, str) else k: v
                     for k, v in omega.items()})
    arr = np.asarray(omega, dtype=float)
    if arr.shape == (n, n):
        if np.max(np.abs(arr + arr.T)) > 1e-14:
            raise ValidationError("omega matrix must be antisymmetric")
        return form({(i, j): arr[i, j] for i in range(n) for j in range(i + 1, n) if arr[i, j] != 0})
    return form([list(t) for t in omega])


def trace_range(spec: Mapping) -> TraceSubgroup:
    """Generators of the range of the trace from cohomological data.

    Cases: ``surface`` (theta), ``3d`` (omega as a 2-form on T^3 or
    pairings ``theta_i`` directly), ``4d`` (integer intersection form ``Q``
    and ``omega`` coordinates, or a 2-form on T^4), ``general`` (dimension,
    pairings and caller-supplied constants).
    """
    case = spec.get("case")
    tol = float(spec.get("tolerance", MEMBERSHIP_TOL))
    bound = int(spec.get("coeff_bound", 10))
    if case == "surface":
        theta = float(spec["theta"])
        raw = [1.0, theta]
        return TraceSubgroup(reduce_generators(raw, tol, bound), tol, "surface", raw)
    if case == "3d":
        c0 = float(spec.get("c0", default_c0(3)))
        if "pairings" in spec:
            pairings = [float(v) for v in spec["pairings"]]
        else:
            w = _omega_form(spec["omega"], 3)
            etas = [form(e) for e in spec["eta"]] if "eta" in spec else coordinate_basis(3, 1)
            pairings = [pair_top(wedge(e, w), 3) for e in etas]
        raw = [1.0] + [c0 * p for p in pairings]
        return TraceSubgroup(reduce_generators(raw, tol, bound), tol, "3d", raw, {"c0": c0})
    if case == "4d":
        if "Q" in spec:
            Q = np.asarray(spec["Q"])
            if not np.all(np.asarray(Q, dtype=float) == np.round(np.asarray(Q, dtype=float))):
                raise ValidationError("intersection form must be integral")
            Q = np.asarray(np.round(np.asarray(Q, dtype=float)), dtype=int)
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or np.any(Q != Q.T):
                raise ValidationError("intersection form must be a symmetric square matrix")
            w = np.asarray(spec["omega"], dtype=float)
            if w.shape != (Q.shape[0],):
                raise ValidationError("omega coordinates do not match Q")
        else:
            Q = torus_intersection_form(4)
            wf = _omega_form(spec["omega"], 4)
            w = np.array([wf.get(idx, 0.0) for idx in itertools.combinations(range(4), 2)])
        qww = float(w @ Q @ w)
        theta = qww / (2 * (2 * np.pi) ** 2)
        raw = [1.0, theta] + [float(v) for v in Q @ w]
        return TraceSubgroup(reduce_generators(raw, tol, bound), tol, "4d", raw,
                             {"Q_omega_omega": qww, "normalisation": 2 * (2 * np.pi) ** 2})
    if case == "general":
        return _general_range(spec, tol, bound)
    raise ValidationError(f"unknown cohomology case {case!r}")


def _general_range(spec: Mapping, tol: float, bound: int) -> TraceSubgroup:
    dim = int(spec["dimension"])
    constants = spec.get("constants")
    if constants is None:
        raise ConstantsRequiredError("the general case needs caller-supplied universal constants")
    pairings = {int(j): [float(v) for v in vals] for j, vals in spec["pairings"].items()}
    constants = {int(j): [float(v) for v in vals] for j, vals in constants.items()}
    raw = [1.0]
    if dim % 2 == 0:
        n = dim // 2
        if "omega_power" not in spec:
            raise ValidationError("even dimensions need the pairing of omega^n")
        raw.append(float(spec["omega_power"]) / (2 * (2 * np.pi) ** n))
    else:
        n = (dim + 1) // 2
    for j in range(1, n):
        th = pairings.get(j, [])
        rs = constants.get(j)
        if rs is None or len(rs) != len(th):
            raise ConstantsRequiredError(f"constants for degree index j = {j} are missing or mismatched")
        raw.extend(r * t for r, t in zip(rs, th))
    return TraceSubgroup(reduce_generators(raw, tol, bound), tol, f"general-{dim}", raw)


def torus_pairings(omega: Form, n: int, degree_index: int, odd: bool = False) -> list[float]:
    """<omega^(m - j) ^ a_k(j), [T^n]> over the coordinate basis a_k(j).

    For n = 2m the classes a_k(j) have degree 2j; for n = 2m - 1 they have
    degree 2j - 1.
    """
    j = degree_index
    m = (n + 1) // 2 if odd else n // 2
    deg = 2 * j - 1 if odd else 2 * j
    wp = wedge_power(omega, m - j)
    return [pair_top(wedge(wp, a), n) for a in coordinate_basis(n, deg)]
