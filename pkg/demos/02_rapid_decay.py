"""Polynomial growth of convolution constants on Z^2 and on a free group.

For f supported in the ball of radius r, ||f * g||_2 <= C(r) ||f||_2 ||g||_2.
On groups with rapid decay C(r) grows polynomially in r.  Twisting by a
cocycle only shrinks the left side, so the untwisted constant is an upper
bound for every multiplier.
"""

from __future__ import annotations

import numpy as np

from twistlab.algebra import random_element
from twistlab.groups import FreeAbelianGroup, FreeGroup
from twistlab.multipliers import make_theta_cocycle, trivial_multiplier
from twistlab.rapid_decay import exact_abelian_rd_constant, rd_constant_estimate, twisted_domination_check

Z, Z2, F2 = FreeAbelianGroup(1), FreeAbelianGroup(2), FreeGroup(2)

print(f"exact C(1) on Z: {exact_abelian_rd_constant(Z, 1):.12f}  (sqrt 3 = {np.sqrt(3):.12f})")

for name, model in (("Z^2", Z2), ("F_2", F2)):
    rep = rd_constant_estimate(model, trivial_multiplier(model), [2, 4, 6], trials=2)
    rows = ", ".join(f"C({r})={c:.3f}" for r, c in zip(rep.radii, rep.constants))
    print(f"{name}: {rows}; fitted exponent {rep.fit_exponent:.3f} ({rep.verdict})")

sigma = make_theta_cocycle(1.3, Z2)
rng = np.random.default_rng(0)
gaps = []
for _ in range(200):
    d = twisted_domination_check(random_element(sigma, 2, rng), random_element(sigma, 2, rng))
    gaps.append(d.rhs - d.lhs)
print(f"twisted vs untwisted-modulus product: min gap {min(gaps):.3e} over 200 pairs")
