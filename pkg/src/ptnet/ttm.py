"""Dynamical maps and transfer tensors.

The dynamical map ``E_n`` takes ``vec(rho(0))`` to ``vec(rho(t_n))``.  For a
time-independent system Hamiltonian the maps decompose as

    E_n = sum_{m=1}^{n} T_m E_{n-m},      E_0 = identity,

which defines the transfer tensors ``T_m`` by forward substitution.  Once the
``T_m`` have decayed, the same sum continues a trajectory to arbitrary times
from its last ``K`` states.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import propagate_batch
from .errors import ArgumentError, DimensionError, ModelError

__all__ = [
    "DynamicalMapSet",
    "TransferTensorSet",
    "hermitian_basis",
    "extract_maps",
    "transfer_tensors",
    "ttm_propagate",
    "reconstruction_residual",
]


@dataclass
class DynamicalMapSet:
    """Maps ``maps[n - 1] = E_n`` for ``n = 1 .. K``, each ``D x D``."""

    dt: float
    maps: np.ndarray

    def __post_init__(self):
        self.maps = _stack(self.maps, "maps")

    @property
    def K(self):
        return self.maps.shape[0]


@dataclass
class TransferTensorSet:
    """Transfer tensors ``tensors[m - 1] = T_m`` for ``m = 1 .. K``."""

    dt: float
    tensors: np.ndarray

    def __post_init__(self):
        self.tensors = _stack(self.tensors, "tensors")

    @property
    def K(self):
        return self.tensors.shape[0]

    def norms(self):
        """Spectral norm of every ``T_m``; their decay diagnoses resolved memory."""
        return np.array([np.linalg.norm(t, 2) for t in self.tensors])


def _stack(mats, what):
    arr = np.asarray(mats, dtype=complex)
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] != arr.shape[2]:
        raise DimensionError(f"{what} must be a non-empty stack of square matrices, got shape {arr.shape}")
    return arr


def hermitian_basis(d):
    """Columns are Liouville vectors of ``d**2`` Hermitian matrices spanning all ``d x d`` matrices.

    The diagonal units ``|s><s|`` come first, then for each ``s < r`` the
    pair ``|s><r| + |r><s|`` and ``-i|s><r| + i|r><s|``.
    """
    D = d * d
    cols = []
    for s in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[s, s] = 1.0
        cols.append(m.reshape(-1))
    for s in range(d):
        for r in range(s + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[s, r] = x[r, s] = 1.0
            y = np.zeros((d, d), dtype=complex)
            y[s, r] = -1j
            y[r, s] = 1j
            cols.append(x.reshape(-1))
            cols.append(y.reshape(-1))
    basis = np.array(cols).T
    assert basis.shape == (D, D)
    return basis


def extract_maps(pt, model, K, order="first"):
    """Dynamical maps ``E_1 .. E_K`` from process-tensor propagation.

    Every Hermitian basis element is propagated (as one batch) and the maps
    are recovered by linearity.  A time-dependent ``H_S`` is rejected because
    the transfer-tensor decomposition assumes time-translation invariance.
    """
    if not model.time_independent:
        raise ModelError("transfer tensors need a time-independent system Hamiltonian")
    K = int(K)
    if K < 1:
        raise ArgumentError(f"K must be >= 1, got {K}")
    basis = hermitian_basis(pt.d)
    traj = propagate_batch(pt, model, basis.T, K, order)
    # traj.states[n] has rows E_n @ basis[:, b]
    outputs = np.transpose(traj.states[1:], (0, 2, 1))
    maps = outputs @ np.linalg.inv(basis)
    return DynamicalMapSet(pt.dt, maps)


def transfer_tensors(maps):
    """Transfer tensors by forward substitution, ``T_n = E_n - sum_{m<n} T_m E_{n-m}``."""
    E = maps.maps
    T = np.empty_like(E)
    for n in range(1, E.shape[0] + 1):
        acc = E[n - 1].copy()
        for m in range(1, n):
            acc -= T[m - 1] @ E[n - m - 1]
        T[n - 1] = acc
    return TransferTensorSet(maps.dt, T)


def reconstruction_residual(maps, tensors):
    """Largest entry of ``E_n - sum_m T_m E_{n-m}`` over ``n = 1 .. K``."""
    E = maps.maps
    T = tensors.tensors
    if T.shape[0] < E.shape[0]:
        raise ArgumentError("fewer transfer tensors than maps")
    D = E.shape[1]
    eye = np.eye(D)
    worst = 0.0
    for n in range(1, E.shape[0] + 1):
        acc = np.zeros((D, D), dtype=complex)
        for m in range(1, n + 1):
            acc += T[m - 1] @ (E[n - m - 1] if n - m > 0 else eye)
        worst = max(worst, float(np.max(np.abs(E[n - 1] - acc))))
    return worst


def ttm_propagate(tensors, seed_states, n_target):
    """Continue a trajectory with the transfer tensors.

    Parameters
    ----------
    tensors : TransferTensorSet
        ``T_1 .. T_K``.
    seed_states : array_like
        The ``K`` Liouville vectors ``rho(t_0) .. rho(t_{K-1})``.
    n_target : int
        Last time index to produce.

    Returns
    -------
    numpy.ndarray
        States ``rho(t_0) .. rho(t_{n_target})`` of shape ``(n_target + 1, D)``;
        the first ``K`` rows are the seeds.
    """
    T = tensors.tensors
    K = T.shape[0]
    seeds = np.asarray(seed_states, dtype=complex)
    if seeds.ndim != 2 or seeds.shape[0] != K:
        raise ArgumentError(f"need exactly K={K} seed states, got array of shape {seeds.shape}")
    if seeds.shape[1] != T.shape[1]:
        raise DimensionError("seed states do not match the transfer tensor dimension")
    n_target = int(n_target)
    if n_target < K - 1:
        raise ArgumentError(f"n_target must be at least K - 1 = {K - 1}")
    out = np.empty((n_target + 1, T.shape[1]), dtype=complex)
    out[:K] = seeds
    for n in range(K, n_target + 1):
        # sum_m T_m rho(t_{n-m}) with the history reversed to line up with m
        out[n] = np.einsum("mab,mb->a", T, out[n - K : n][::-1])
    return out
