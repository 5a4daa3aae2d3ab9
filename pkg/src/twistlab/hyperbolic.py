"""Poincaré-disk geometry for closed surface groups.

Matrices live in SU(1,1): ``[[a, b], [conj(b), conj(a)]]`` acting on the unit
disk by ``z -> (a z + b) / (conj(b) z + conj(a))``.  Generators are the side
pairings of a regular 4g-gon centred at the origin with all vertex angles
equal to 2*pi/(4g).  Letters are signed integers: ``a_j = 2j-1``,
``b_j = 2j`` and negative letters denote inverses.
"""

from __future__ import annotations

import numpy as np


def _rot(phi: float) -> np.ndarray:
    return np.array([[np.exp(0.5j * phi), 0.0], [0.0, np.exp(-0.5j * phi)]], dtype=complex)


def _boost(d: float) -> np.ndarray:
    c, s = np.cosh(d / 2.0), np.sinh(d / 2.0)
    return np.array([[c, s], [s, c]], dtype=complex)


def inradius(genus: int) -> float:
    """Distance from the centre of the regular 4g-gon to a side midpoint."""
    return float(np.arccosh(1.0 / np.tan(np.pi / (4 * genus))))


def generator_matrices(genus: int) -> dict[int, np.ndarray]:
    """SU(1,1) matrices for all signed letters of the surface group."""
    if genus < 2:
        raise ValueError("the disk model needs genus >= 2")
    n_sides = 4 * genus
    rho = inradius(genus)
    phis = [2.0 * np.pi * i / n_sides for i in range(n_sides)]

    def pair(i: int, j: int) -> np.ndarray:
        # maps side j onto side i, carrying the polygon across side i
        return _rot(phis[i]) @ _boost(2.0 * rho) @ _rot(np.pi - phis[j])

    mats: dict[int, np.ndarray] = {}
    for k in range(genus):
        a = pair(4 * k, 4 * k + 2)
        b = pair(4 * k + 3, 4 * k + 1)
        mats[2 * k + 1] = a
        mats[2 * k + 2] = b
        mats[-(2 * k + 1)] = inverse_su11(a)
        mats[-(2 * k + 2)] = inverse_su11(b)
    return mats


def inverse_su11(m: np.ndarray) -> np.ndarray:
    a, b = m[..., 0, 0], m[..., 0, 1]
    out = np.empty_like(m)
    out[..., 0, 0] = np.conj(a)
    out[..., 0, 1] = -b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = a
    return out


def relator(genus: int) -> tuple[int, ...]:
    """The product of commutators [a_1, b_1] ... [a_g, b_g] as a letter word."""
    word: list[int] = []
    for k in range(genus):
        a, b = 2 * k + 1, 2 * k + 2
        word += [a, b, -a, -b]
    return tuple(word)


def word_matrix(word, mats: dict[int, np.ndarray]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for letter in word:
        m = m @ mats[letter]
    return m


def orbit_point(m: np.ndarray) -> np.ndarray:
    """Spatial hyperboloid coordinates of ``m(0)``; shape (..., 2)."""
    w = 2.0 * m[..., 0, 0] * m[..., 0, 1]
    return np.stack([w.real, w.imag], axis=-1)


def disk_point(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 1] / np.conj(m[..., 0, 0])


def mobius(m: np.ndarray, z):
    a, b = m[0, 0], m[0, 1]
    return (a * z + b) / (np.conj(b) * z + np.conj(a))


def mobius_derivative(m: np.ndarray, z):
    a, b = m[0, 0], m[0, 1]
    return 1.0 / (np.conj(b) * z + np.conj(a)) ** 2


def wrap_angle(x):
    """Reduce to the interval (-pi, pi]."""
    y = np.mod(np.asarray(x) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def triangle_area_from_entries(a1, a2, a12):
    """Signed area of the geodesic triangle (0, g(0), g m(0)).

    ``a1``, ``a2``, ``a12`` are the upper-left entries of g, m and g m.
    Counter-clockwise triangles have positive area.
    """
    return wrap_angle(2.0 * (np.angle(a1) + np.angle(a2) - np.angle(a12)))


def geodesic_triangle_area(z0: complex, z1: complex, z2: complex) -> float:
    """Signed area via Gauss-Bonnet (pi minus the angle sum)."""

    def angle_at(p, q, r):
        u = (q - p) / (1 - np.conj(p) * q)
        v = (r - p) / (1 - np.conj(p) * r)
        if abs(u) < 1e-300 or abs(v) < 1e-300:
            return 0.0
        return abs(np.angle(v / u))

    area = np.pi - angle_at(z0, z1, z2) - angle_at(z1, z2, z0) - angle_at(z2, z0, z1)
    # orientation after moving z0 to the origin
    u = (z1 - z0) / (1 - np.conj(z0) * z1)
    v = (z2 - z0) / (1 - np.conj(z0) * z2)
    orient = np.sign(np.imag(np.conj(u) * v))
    return float(orient * area)


def free_reduce(word) -> tuple[int, ...]:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _cyclic_conjugates(rel: tuple[int, ...]) -> list[tuple[int, ...]]:
    inv = tuple(-x for x in reversed(rel))
    out = []
    for r in (rel, inv):
        for i in range(len(r)):
            out.append(r[i:] + r[:i])
    return out


def dehn_reduce(word, genus: int) -> tuple[int, ...]:
    """Dehn's algorithm for the one-relator surface presentation.

    Repeatedly replaces a subword equal to more than half of a cyclic
    conjugate of the relator (or its inverse) by the inverse of the shorter
    remainder, then freely reduces.  The result is the empty word exactly
    when the input represents the identity.
    """
    rel = relator(genus)
    n = len(rel)
    half = n // 2
    conj = _cyclic_conjugates(rel)
    # index: first half+1 letters -> (full conjugate)
    table: dict[tuple[int, ...], tuple[int, ...]] = {}
    for c in conj:
        table.setdefault(c[: half + 1], c)
    w = list(free_reduce(word))
    changed = True
    while changed:
        changed = False
        i = 0
        while i + half + 1 <= len(w):
            c = table.get(tuple(w[i : i + half + 1]))
            if c is None:
                i += 1
                continue
            m = half + 1
            while m < n and i + m < len(w) and w[i + m] == c[m]:
                m += 1
            replacement = [-x for x in reversed(c[m:])]
            w = list(free_reduce(w[:i] + replacement + w[i + m :]))
            changed = True
            i = max(0, i - n)
        # loop again until no long relator piece is left
    return tuple(w)
