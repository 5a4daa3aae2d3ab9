"""Finitely generated groups with exact normal forms.

Three families are supported: free abelian groups Z^n, free groups F_k and
fundamental groups of closed orientable surfaces of genus g >= 2.  Elements
are immutable :class:`GroupElement` values that remember their owning model.
"""

from __future__ import annotations

import itertools
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import hyperbolic
from .errors import CapacityError, ConfigurationError, DomainError, ValidationError

DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True, slots=True)
class GroupElement:
    word: tuple[int, ...]
    group_id: str

    def __repr__(self) -> str:
        return f"{self.group_id}{list(self.word)}"


def letter_key(letter: int) -> int:
    """Position of a signed letter in the order 1 < -1 < 2 < -2 < ..."""
    return 2 * (abs(letter) - 1) + (1 if letter < 0 else 0)


def _letters_from_key(key: int) -> int:
    j = key // 2 + 1
    return -j if key % 2 else j


class GroupModel(ABC):
    kind: str
    group_id: str

    def __init__(self, working_radius: int, element_budget: int = DEFAULT_BUDGET):
        if working_radius < 0:
            raise DomainError("working_radius must be nonnegative")
        self.working_radius = int(working_radius)
        self.element_budget = int(element_budget)

    # basic structure -------------------------------------------------
    @property
    @abstractmethod
    def identity(self) -> GroupElement: ...

    @property
    @abstractmethod
    def num_generators(self) -> int: ...

    @property
    def generators(self) -> list[GroupElement]:
        return [self.from_letters([i]) for i in range(1, self.num_generators + 1)]

    @property
    def symmetric_generators(self) -> list[GroupElement]:
        out = []
        for i in range(1, self.num_generators + 1):
            out.append(self.from_letters([i]))
            out.append(self.from_letters([-i]))
        return out

    @property
    def letters(self) -> list[int]:
        out = []
        for i in range(1, self.num_generators + 1):
            out += [i, -i]
        return out

    @abstractmethod
    def element(self, word: Sequence[int]) -> GroupElement:
        """Canonical element for a normal-form word (or letter word)."""

    @abstractmethod
    def from_letters(self, letters: Sequence[int]) -> GroupElement:
        """Product of signed generator letters."""

    @abstractmethod
    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement: ...

    @abstractmethod
    def inverse(self, a: GroupElement) -> GroupElement: ...

    @abstractmethod
    def word_length(self, x: GroupElement) -> int: ...

    @abstractmethod
    def sort_key(self, x: GroupElement) -> tuple: ...

    @abstractmethod
    def _ball(self, r: int) -> tuple[list[GroupElement], list[int]]: ...

    @abstractmethod
    def product_table(
        self, xs: Sequence[GroupElement], ys: Sequence[GroupElement]
    ) -> tuple[list[GroupElement], np.ndarray]:
        """All products x*y as (unique elements, index array of shape (len xs, len ys))."""

    def to_spec(self) -> dict:
        raise NotImplementedError

    # shared helpers --------------------------------------------------
    def check(self, *xs: GroupElement) -> None:
        for x in xs:
            if not isinstance(x, GroupElement) or x.group_id != self.group_id:
                raise DomainError(f"element {x!r} does not belong to {self.group_id}")

    def group_op(self, a: GroupElement, b: GroupElement, mode: str = "multiply") -> GroupElement:
        self.check(a, b)
        if mode == "multiply":
            return self.multiply(a, b)
        if mode == "inverse-of-first":
            return self.inverse(a)
        raise DomainError(f"unknown mode {mode!r}")

    def enumerate_ball(self, r: int) -> tuple[list[GroupElement], list[int]]:
        """Elements of length <= r sorted by (length, word) and sphere sizes."""
        if r < 0:
            raise DomainError("radius must be nonnegative")
        if r > self.working_radius:
            raise CapacityError(
                f"radius {r} exceeds working radius {self.working_radius}",
                completed=self.working_radius,
            )
        return self._ball(r)

    def ball(self, r: int) -> list[GroupElement]:
        return self.enumerate_ball(r)[0]

    def sphere(self, r: int) -> list[GroupElement]:
        elems, counts = self.enumerate_ball(r)
        return elems[len(elems) - counts[-1] :]

    def lengths(self, xs: Iterable[GroupElement]) -> np.ndarray:
        return np.array([self.word_length(x) for x in xs], dtype=np.int64)

    def outer_multiply(self, xs, ys) -> tuple[list[GroupElement], np.ndarray]:
        return self.product_table(list(xs), list(ys))

    def try_multiply(self, a: GroupElement, b: GroupElement) -> GroupElement | None:
        try:
            return self.multiply(a, b)
        except CapacityError:
            return None

    def commutator(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return self.multiply(self.multiply(a, b), self.multiply(self.inverse(a), self.inverse(b)))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.group_id} R={self.working_radius}>"


# ---------------------------------------------------------------------------
class FreeAbelianGroup(GroupModel):
    """Z^n with the generating set of plus/minus standard basis vectors."""

    kind = "Z^n"

    def __init__(self, n: int, working_radius: int = 64, element_budget: int = DEFAULT_BUDGET):
        if n < 1:
            raise DomainError("rank must be >= 1")
        super().__init__(working_radius, element_budget)
        self.n = int(n)
        self.group_id = f"Z^{self.n}"
        self._ball_cache: dict[int, tuple[list[GroupElement], list[int]]] = {}
        self._lock = threading.Lock()

    @property
    def identity(self) -> GroupElement:
        return GroupElement((0,) * self.n, self.group_id)

    @property
    def num_generators(self) -> int:
        return self.n

    def element(self, word: Sequence[int]) -> GroupElement:
        word = tuple(int(v) for v in word)
        if len(word) != self.n:
            raise ValidationError(f"Z^{self.n} elements need {self.n} coordinates, got {word}")
        return GroupElement(word, self.group_id)

    def from_letters(self, letters: Sequence[int]) -> GroupElement:
        v = [0] * self.n
        for letter in letters:
            j = abs(int(letter)) - 1
            if not 0 <= j < self.n:
                raise ValidationError(f"letter {letter} out of range")
            v[j] += 1 if letter > 0 else -1
        return GroupElement(tuple(v), self.group_id)

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self.check(a, b)
        return GroupElement(tuple(x + y for x, y in zip(a.word, b.word)), self.group_id)

    def inverse(self, a: GroupElement) -> GroupElement:
        self.check(a)
        return GroupElement(tuple(-x for x in a.word), self.group_id)

    def word_length(self, x: GroupElement) -> int:
        self.check(x)
        return sum(abs(v) for v in x.word)

    def sort_key(self, x: GroupElement) -> tuple:
        return (sum(abs(v) for v in x.word), x.word)

    def ball_size(self, r: int) -> int:
        return sum(2**k * comb(self.n, k) * comb(r, k) for k in range(min(self.n, r) + 1))

    def _ball(self, r: int):
        with self._lock:
            if r in self._ball_cache:
                return self._ball_cache[r]
            if self.ball_size(r) > self.element_budget:
                done = 0
                while self.ball_size(done + 1) <= self.element_budget:
                    done += 1
                raise CapacityError(f"ball of radius {r} exceeds element budget", completed=done)
            pts = np.array(list(itertools.product(range(-r, r + 1), repeat=self.n)), dtype=np.int64)
            pts = pts[np.abs(pts).sum(axis=1) <= r]
            lens = np.abs(pts).sum(axis=1)
            order = np.lexsort(tuple(pts[:, j] for j in range(self.n - 1, -1, -1)) + (lens,))
            pts, lens = pts[order], lens[order]
            elems = [GroupElement(tuple(int(v) for v in p), self.group_id) for p in pts]
            counts = np.bincount(lens, minlength=r + 1).tolist()
            self._ball_cache[r] = (elems, counts)
            return elems, counts

    def coords(self, xs: Sequence[GroupElement]) -> np.ndarray:
        if len(xs) == 0:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.array([x.word for x in xs], dtype=np.int64).reshape(len(xs), self.n)

    def product_table(self, xs, ys):
        self.check(*xs)
        self.check(*ys)
        X, Y = self.coords(xs), self.coords(ys)
        S = (X[:, None, :] + Y[None, :, :]).reshape(-1, self.n)
        if S.shape[0] == 0:
            return [], np.zeros((len(xs), len(ys)), dtype=np.int64)
        uniq, inv = np.unique(S, axis=0, return_inverse=True)
        elems = [GroupElement(tuple(int(v) for v in row), self.group_id) for row in uniq]
        return elems, inv.reshape(len(xs), len(ys))

    def to_spec(self) -> dict:
        return {"kind": "Z^n", "n": self.n, "working_radius": self.working_radius}


# ---------------------------------------------------------------------------
class FreeGroup(GroupModel):
    """Free group on k letters; elements are freely reduced words."""

    kind = "free"

    def __init__(self, k: int, working_radius: int = 12, element_budget: int = DEFAULT_BUDGET):
        if k < 1:
            raise DomainError("rank must be >= 1")
        super().__init__(working_radius, element_budget)
        self.k = int(k)
        self.group_id = f"F_{self.k}"
        self._base = 2 * self.k + 1
        self._max_code_len = int(np.floor(62 * np.log(2) / np.log(self._base)))
        self._spheres: list[list[GroupElement]] = [[GroupElement((), self.group_id)]]
        self._lock = threading.Lock()

    @property
    def identity(self) -> GroupElement:
        return GroupElement((), self.group_id)

    @property
    def num_generators(self) -> int:
        return self.k

    def _validate(self, letters: Sequence[int]) -> tuple[int, ...]:
        out = tuple(int(v) for v in letters)
        for v in out:
            if v == 0 or abs(v) > self.k:
                raise ValidationError(f"letter {v} out of range for {self.group_id}")
        return out

    def element(self, word: Sequence[int]) -> GroupElement:
        return GroupElement(hyperbolic.free_reduce(self._validate(word)), self.group_id)

    from_letters = element

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self.check(a, b)
        return GroupElement(hyperbolic.free_reduce(a.word + b.word), self.group_id)

    def inverse(self, a: GroupElement) -> GroupElement:
        self.check(a)
        return GroupElement(tuple(-v for v in reversed(a.word)), self.group_id)

    def word_length(self, x: GroupElement) -> int:
        self.check(x)
        return len(x.word)

    def sort_key(self, x: GroupElement) -> tuple:
        return (len(x.word), tuple(letter_key(v) for v in x.word))

    def sphere_size(self, n: int) -> int:
        return 1 if n == 0 else 2 * self.k * (2 * self.k - 1) ** (n - 1)

    def _ball(self, r: int):
        total = sum(self.sphere_size(n) for n in range(r + 1))
        if total > self.element_budget:
            done = 0
            while sum(self.sphere_size(n) for n in range(done + 2)) <= self.element_budget:
                done += 1
            raise CapacityError(f"ball of radius {r} exceeds element budget", completed=done)
        with self._lock:
            letters = self.letters
            while len(self._spheres) <= r:
                nxt = []
                for x in self._spheres[-1]:
                    last = x.word[-1] if x.word else 0
                    for s in letters:
                        if s != -last:
                            nxt.append(GroupElement(x.word + (s,), self.group_id))
                self._spheres.append(nxt)
            elems = [x for sph in self._spheres[: r + 1] for x in sph]
            counts = [len(s) for s in self._spheres[: r + 1]]
        return elems, counts

    # integer codes: digits 1..2k, most significant digit first
    def _encode(self, xs: Sequence[GroupElement]) -> tuple[np.ndarray, np.ndarray]:
        codes = np.zeros(len(xs), dtype=np.int64)
        lens = np.zeros(len(xs), dtype=np.int64)
        for i, x in enumerate(xs):
            c = 0
            for v in x.word:
                c = c * self._base + letter_key(v) + 1
            codes[i] = c
            lens[i] = len(x.word)
        return codes, lens

    def _decode(self, code: int) -> GroupElement:
        word = []
        c = int(code)
        while c:
            c, d = divmod(c, self._base)
            word.append(_letters_from_key(d - 1))
        return GroupElement(tuple(reversed(word)), self.group_id)

    def product_codes(self, xs, ys) -> np.ndarray:
        """Integer codes of all products, shape (len xs, len ys)."""
        self.check(*xs)
        self.check(*ys)
        la_max = max((len(x.word) for x in xs), default=0)
        lb_max = max((len(y.word) for y in ys), default=0)
        if la_max + lb_max > self._max_code_len:
            raise CapacityError("words too long for integer encoding")
        ca, la = self._encode(xs)
        cb, lb = self._encode(ys)
        L = max(min(la_max, lb_max), 1)
        A = np.zeros((len(xs), L), dtype=np.int64)
        for i, x in enumerate(xs):
            rev = x.word[::-1][:L]
            A[i, : len(rev)] = rev
        B = np.zeros((len(ys), L), dtype=np.int64)
        for j, y in enumerate(ys):
            w = y.word[:L]
            B[j, : len(w)] = w
        P = self._base ** np.arange(la_max + lb_max + 1, dtype=np.int64)
        out = np.empty((len(xs), len(ys)), dtype=np.int64)
        chunk = max(1, 4_000_000 // max(1, len(ys) * L))
        for s in range(0, len(xs), chunk):
            a = A[s : s + chunk]
            eq = (a[:, None, :] == -B[None, :, :]) & (a[:, None, :] != 0)
            k = np.cumprod(eq, axis=2).sum(axis=2)
            k = np.minimum(k, np.minimum(la[s : s + chunk, None], lb[None, :]))
            rest = lb[None, :] - k
            out[s : s + chunk] = (ca[s : s + chunk, None] // P[k]) * P[rest] + cb[None, :] % P[rest]
        return out

    def product_table(self, xs, ys):
        if len(xs) == 0 or len(ys) == 0:
            return [], np.zeros((len(xs), len(ys)), dtype=np.int64)
        try:
            codes = self.product_codes(xs, ys)
        except CapacityError:
            prods = [[self.multiply(x, y) for y in ys] for x in xs]
            uniq = sorted({p for row in prods for p in row}, key=self.sort_key)
            pos = {p: i for i, p in enumerate(uniq)}
            return uniq, np.array([[pos[p] for p in row] for row in prods], dtype=np.int64)
        uniq, inv = np.unique(codes.ravel(), return_inverse=True)
        return [self._decode(c) for c in uniq], inv.reshape(codes.shape)

    def to_spec(self) -> dict:
        return {"kind": "free", "k": self.k, "working_radius": self.working_radius}


# ---------------------------------------------------------------------------
class SurfaceGroup(GroupModel):
    """Fundamental group of the closed orientable surface of genus g >= 2.

    Presentation <a_1, b_1, ..., a_g, b_g | [a_1, b_1]...[a_g, b_g]> with
    letters a_j = 2j-1 and b_j = 2j.  Normal forms are shortlex-minimal
    geodesic words.  They are produced breadth first: a word is new exactly
    when its image under a faithful Fuchsian representation moves the origin
    of the disk to an orbit point not seen before.  Orbit points of distinct
    elements are at least 2 sinh(rho) apart in hyperboloid coordinates, so
    numerical lookup is unambiguous.  Dehn's algorithm serves as the
    independent equality test in the test suite.
    """

    kind = "surface"
    _LOOKUP_RADIUS = 0.5

    def __init__(self, g: int, working_radius: int = 6, element_budget: int = DEFAULT_BUDGET):
        if g < 2:
            raise DomainError("surface groups need genus >= 2 (genus one is Z^2)")
        super().__init__(working_radius, element_budget)
        self.g = int(g)
        self.group_id = f"Gamma_{self.g}"
        self._gen_mats = hyperbolic.generator_matrices(self.g)
        rel = hyperbolic.word_matrix(hyperbolic.relator(self.g), self._gen_mats)
        err = min(np.abs(rel - np.eye(2)).max(), np.abs(rel + np.eye(2)).max())
        if err > 1e-8:
            raise ConfigurationError(f"relator image is {err:.2e} away from +-I")
        self._lock = threading.RLock()
        ident = GroupElement((), self.group_id)
        self._elements: list[GroupElement] = [ident]
        self._index: dict[GroupElement, int] = {ident: 0}
        self._mats = np.eye(2, dtype=complex)[None, :, :].copy()
        self._points = np.zeros((1, 2))
        self._counts: list[int] = [1]
        self._tree = cKDTree(self._points)

    @property
    def identity(self) -> GroupElement:
        return self._elements[0]

    @property
    def num_generators(self) -> int:
        return 2 * self.g

    @property
    def generator_matrices(self) -> dict[int, np.ndarray]:
        return dict(self._gen_mats)

    @property
    def radius_built(self) -> int:
        return len(self._counts) - 1

    def _grow_to(self, r: int) -> None:
        r = min(r, self.working_radius)
        with self._lock:
            letters = self.letters
            gm = np.stack([self._gen_mats[s] for s in letters])
            while self.radius_built < r:
                n = self.radius_built
                start = len(self._elements) - self._counts[-1]
                sph = np.arange(start, len(self._elements))
                cand = np.einsum("aij,bjk->abik", self._mats[sph], gm).reshape(-1, 2, 2)
                pts = hyperbolic.orbit_point(cand)
                dist, _ = self._tree.query(pts, distance_upper_bound=self._LOOKUP_RADIUS)
                fresh = np.flatnonzero(~np.isfinite(dist))
                if len(fresh) == 0:
                    raise ConfigurationError("sphere enumeration produced no new elements")
                sub = cKDTree(pts[fresh])
                kk = min(16, len(fresh))
                _, nb = sub.query(pts[fresh], k=kk, distance_upper_bound=self._LOOKUP_RADIUS)
                nb = np.atleast_2d(nb)
                nb = np.where(nb >= len(fresh), len(fresh), nb)
                rep = nb.min(axis=1)
                keep = fresh[np.unique(rep)]
                if len(self._elements) + len(keep) > self.element_budget:
                    raise CapacityError(
                        f"sphere {n + 1} of {self.group_id} exceeds element budget", completed=n
                    )
                nl = len(letters)
                new_elems = []
                for c in keep:
                    parent = self._elements[sph[c // nl]]
                    e = GroupElement(parent.word + (letters[c % nl],), self.group_id)
                    self._index[e] = len(self._elements) + len(new_elems)
                    new_elems.append(e)
                self._elements.extend(new_elems)
                self._mats = np.concatenate([self._mats, cand[keep]])
                self._points = np.concatenate([self._points, pts[keep]])
                self._counts.append(len(keep))
                self._tree = cKDTree(self._points)

    def _locate(self, mats: np.ndarray, need_radius: int) -> np.ndarray:
        self._grow_to(need_radius)
        pts = hyperbolic.orbit_point(mats)
        dist, idx = self._tree.query(pts.reshape(-1, 2), distance_upper_bound=self._LOOKUP_RADIUS)
        idx = np.where(np.isfinite(dist), idx, -1)
        return idx.reshape(pts.shape[:-1])

    def _idx(self, x: GroupElement) -> int:
        self.check(x)
        i = self._index.get(x)
        if i is None:
            self._grow_to(len(x.word))
            i = self._index.get(x)
            if i is None:
                raise ValidationError(f"{x!r} is not a canonical normal form")
        return i

    def matrix(self, x: GroupElement) -> np.ndarray:
        return self._mats[self._idx(x)].copy()

    def matrices(self, xs: Sequence[GroupElement]) -> np.ndarray:
        return self._mats[[self._idx(x) for x in xs]].reshape(len(xs), 2, 2)

    def _from_matrix(self, m: np.ndarray, need: int) -> GroupElement:
        i = int(self._locate(m[None], need)[0])
        if i < 0:
            raise CapacityError(
                f"element lies outside working radius {self.working_radius}",
                completed=self.working_radius,
            )
        return self._elements[i]

    def element(self, word: Sequence[int]) -> GroupElement:
        letters = tuple(int(v) for v in word)
        for v in letters:
            if v == 0 or abs(v) > 2 * self.g:
                raise ValidationError(f"letter {v} out of range for {self.group_id}")
        red = hyperbolic.dehn_reduce(letters, self.g)
        if not red:
            return self.identity
        m = hyperbolic.word_matrix(red, self._gen_mats)
        return self._from_matrix(m, len(red))

    from_letters = element

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        ia, ib = self._idx(a), self._idx(b)
        if ia == 0:
            return b
        if ib == 0:
            return a
        return self._from_matrix(self._mats[ia] @ self._mats[ib], len(a.word) + len(b.word))

    def inverse(self, a: GroupElement) -> GroupElement:
        m = hyperbolic.inverse_su11(self._mats[self._idx(a)])
        return self._from_matrix(m, len(a.word))

    def word_length(self, x: GroupElement) -> int:
        self._idx(x)
        return len(x.word)

    def sort_key(self, x: GroupElement) -> tuple:
        return (len(x.word), tuple(letter_key(v) for v in x.word))

    def _ball(self, r: int):
        self._grow_to(r)
        n = sum(self._counts[: r + 1])
        return list(self._elements[:n]), list(self._counts[: r + 1])

    def product_table(self, xs, ys):
        ix = np.array([self._idx(x) for x in xs], dtype=np.int64)
        iy = np.array([self._idx(y) for y in ys], dtype=np.int64)
        if len(ix) == 0 or len(iy) == 0:
            return [], np.zeros((len(ix), len(iy)), dtype=np.int64)
        need = max(len(x.word) for x in xs) + max(len(y.word) for y in ys)
        M = np.einsum("aij,bjk->abik", self._mats[ix], self._mats[iy])
        loc = self._locate(M, need)
        if (loc < 0).any():
            raise CapacityError(
                f"products leave working radius {self.working_radius}",
                completed=self.working_radius,
            )
        uniq, inv = np.unique(loc.ravel(), return_inverse=True)
        return [self._elements[i] for i in uniq], inv.reshape(loc.shape)

    def to_spec(self) -> dict:
        return {"kind": "surface", "g": self.g, "working_radius": self.working_radius}


def make_group(spec: dict) -> GroupModel:
    """Build a model from ``{"kind": "Z^n"|"free"|"surface", "n"|"k"|"g": int, ...}``."""
    kind = spec.get("kind")
    extra = {}
    if "working_radius" in spec:
        extra["working_radius"] = int(spec["working_radius"])
    if "element_budget" in spec:
        extra["element_budget"] = int(spec["element_budget"])
    if kind == "Z^n":
        return FreeAbelianGroup(int(spec["n"]), **extra)
    if kind == "free":
        return FreeGroup(int(spec["k"]), **extra)
    if kind == "surface":
        return SurfaceGroup(int(spec["g"]), **extra)
    raise ValidationError(f"unknown group kind {kind!r}")
