"""Heat kernels on Cayley graphs and the supertrace index.

On Z the heat kernel of the graph Laplacian is a modified Bessel function.
On the twisted Z^2 its coefficients still decay like a Gaussian in word
length, which is what puts the heat operator into a good completion.  The
second half compares the supertrace of a finite graded operator with the
difference of kernel dimensions.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ive

from twistlab.groups import FreeAbelianGroup
from twistlab.heat import (
    L1_SPEC,
    DiracSystem,
    completion_certificate,
    decay_fit,
    growth_constants,
    heat_coefficients,
    magnetic_torus,
    supertrace_index,
    wasserman_idempotent,
)
from twistlab.multipliers import make_theta_cocycle, trivial_multiplier

Z, Z2 = FreeAbelianGroup(1), FreeAbelianGroup(2)

h = heat_coefficients(trivial_multiplier(Z), 1.0, 12)
err = max(abs(h[Z.element((n,))] - ive(n, 2.0)) for n in range(-12, 13))
print(f"Z, t=1: max deviation from exp(-2t) I_n(2t) = {err:.1e}")

ht = heat_coefficients(make_theta_cocycle(2 * np.pi * 0.3, Z2), 1.0, 10)
fit = decay_fit(ht)
print(f"twisted Z^2: log|h| ~ log C5 - C6 n^2 with C5={fit.C5_hat:.3f}, C6={fit.C6_hat:.3f}")
cert = completion_certificate(fit, L1_SPEC, growth_constants(Z2, 10))
print(f"l1 norm certificate: {cert.bound:.4f} (tail {cert.tail:.1e}, certified {cert.certified})")

rng = np.random.default_rng(3)
A = (rng.normal(size=(9, 3)) + 1j * rng.normal(size=(9, 3))) @ rng.normal(size=(3, 6))
D = DiracSystem(A)
res = supertrace_index(D, [0.01, 0.1, 1.0, 10.0])
print("supertrace at t = 0.01, 0.1, 1, 10:", np.round(res.values, 12))
print(f"kernel dimensions {D.kernel_dims()} -> index {res.kernel_index}")
w = wasserman_idempotent(D, 1.0)
print(f"Wasserman idempotent: |e^2 - e| = {w.idempotency_residual:.1e}, trace difference {w.trace_difference:.6f}")

mt = magnetic_torus(2, 7)
print(f"magnetic torus flux 2/7: |[Laplacian, translations]| = {mt.commutator_norm():.1e}")
