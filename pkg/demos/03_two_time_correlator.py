"""
Two-time correlation functions
===============================

Operators inserted at intermediate slots give multi-time quantities such as
<sz(t2) sz(t1)>.  The grid evaluation shares one forward pass per first time.
"""

import numpy as np

from ptnet import (
    BathSpec,
    SvdTruncation,
    SystemCoupling,
    SystemModel,
    build_finite,
    correlator_grid,
    eta_table,
    superop_left,
)

sx = np.array([[0, 1], [1, 0]], dtype=complex)
sz = np.diag([1.0, -1.0]).astype(complex)
rho0 = np.diag([1.0, 0.0]).astype(complex)

coupling = SystemCoupling([1.0, -1.0])
n = 40
eta = eta_table(BathSpec.continuum(0.05, 1.0, 5.0, "exponential", beta=1.0), 0.1, n)
pt = build_finite(coupling, eta, n, SvdTruncation(1e-9))
model = SystemModel(sx, coupling)

firsts = [0, 10, 20]
seconds = [10, 20, 30, 40]
grid = correlator_grid(pt, model, rho0, superop_left(sz), sz, firsts, seconds)
print("rows t1, columns t2 =", [s * 0.1 for s in seconds])
for a, row in zip(firsts, grid):
    print("t1 = %.1f " % (a * 0.1) + " ".join("%+.4f%+.4fj" % (z.real, z.imag) if np.isfinite(z) else "      ---      " for z in row))
