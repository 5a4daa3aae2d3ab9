"""Build a projection in the noncommutative torus and read off its trace.

The twisted algebra of Z^2 with the theta cocycle contains a projection
whose trace is theta itself.  We build it, check idempotency in l1, and
confirm that every value produced lies in the subgroup Z + theta Z.
"""

from __future__ import annotations

import numpy as np

from twistlab.algebra import AlgebraElement, convolve, l1_norm
from twistlab.projections import rieffel_projection, trace
from twistlab.trace_range import TraceSubgroup, subgroup_membership

theta = 1 / np.sqrt(5)
r = rieffel_projection(theta)
p = r.projection
print(f"theta = {theta:.12f}")
print(f"tau(p) = {r.trace.real:.12f}   ({r.n_terms} Fourier terms)")
print(f"|p*p - p|_1 = {r.idempotency:.2e}   |p* - p|_1 = {r.selfadjointness:.2e}")

# 1 - p is the complementary projection
q = AlgebraElement.unit(p.sigma) - p
print(f"tau(1 - p) = {trace(q).real:.12f}")
print(f"|p q|_1 = {l1_norm(convolve(p, q)):.2e}")

S = TraceSubgroup([1.0, theta])
for x in (0.0, theta, 1 - theta, 1.0, (2 * theta) % 1, 0.5):
    m = subgroup_membership(x, S)
    print(f"{x:.6f} in Z + theta Z: {m.member}  coefficients {m.coefficients}")
