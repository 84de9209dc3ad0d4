"""
Checking against exact diagonalization
=======================================

Three discrete modes stand in for the continuum.  The system plus modes are
diagonalized in a truncated Fock space, and the process tensor built from the
same modes reproduces the reduced dynamics up to the splitting error.
"""

import numpy as np

from ptnet import (
    BathSpec,
    EdModel,
    SvdTruncation,
    SystemCoupling,
    SystemModel,
    build_finite,
    discretize_continuum,
    ed_evolve,
    eta_table,
    propagate,
)

sx = np.array([[0, 1], [1, 0]], dtype=complex)
rho0 = np.diag([1.0, 0.0]).astype(complex)

modes = discretize_continuum(BathSpec.continuum(0.01, 1.0, 3.0, "hard"), 3, 3.0)
print("frequencies", modes.frequencies, "couplings", np.round(modes.couplings.real, 4))
coupling = SystemCoupling([1.0, -1.0])
model = SystemModel(1.5 * sx, coupling)
edm = EdModel(model, modes, 5)

T = 2.0
for dt in (0.1, 0.05, 0.025):
    n = int(round(T / dt))
    pt = build_finite(coupling, eta_table(modes, dt, n), n, SvdTruncation(1e-10))
    ref = ed_evolve(edm, rho0, dt, n).states
    for order in ("first", "symmetric"):
        err = np.max(np.abs(propagate(pt, model, rho0, n, order).states - ref))
        print(f"dt = {dt:<6} {order:9s} max error {err:.2e}")
