"""
Transfer tensors from a translation-invariant process tensor
=============================================================

With a time-independent system Hamiltonian, the dynamical maps E_n obey
E_n = sum_m T_m E_{n-m}.  Once the T_m have decayed a short calculation
extends to arbitrary times.
"""

import numpy as np

from ptnet import (
    BathSpec,
    SvdTruncation,
    SystemCoupling,
    SystemModel,
    build_tti,
    eta_table,
    extract_maps,
    propagate,
    transfer_tensors,
    ttm_propagate,
)

sx = np.array([[0, 1], [1, 0]], dtype=complex)
sz = np.diag([1.0, -1.0]).astype(complex)
rho0 = np.diag([1.0, 0.0]).astype(complex)

coupling = SystemCoupling([1.0, -1.0])
eta = eta_table(BathSpec.continuum(0.05, 1.0, 5.0, "exponential", beta=1.0), 0.1, 10)
pt = build_tti(coupling, eta, SvdTruncation(1e-10))
model = SystemModel(sx, coupling)

K = 20
tensors = transfer_tensors(extract_maps(pt, model, K))
for m, norm in enumerate(tensors.norms(), start=1):
    if m in (1, 2, 5, 10, 15, 20):
        print(f"|T_{m}| = {norm:.2e}")

# %%
# Continue 10K steps from the first K states and compare with direct propagation
direct = propagate(pt, model, rho0, 10 * K).states
continued = ttm_propagate(tensors, direct[:K], 10 * K)
print("max deviation over %d steps: %.2e" % (10 * K, np.max(np.abs(continued - direct))))
