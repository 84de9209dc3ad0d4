"""Reference engines used to validate the compressed pipeline.

``ed_evolve`` diagonalizes the full system-plus-modes Hamiltonian

    H = H_S + O_S (x) sum_k (g_k a_k^dagger + conj(g_k) a_k) + sum_k w_k a_k^dagger a_k

in a truncated Fock space and evolves exactly (no splitting).
``dense_contract`` evaluates the uncompressed pair-product process tensor and
sums over every path explicitly.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
import scipy.linalg

from .bath import BathSpec
from .dynamics import SystemModel, Trajectory, _as_state, make_propagator
from .errors import ArgumentError, DimensionError, ModelError, TailMassWarning
from .pt_build import dense_pt, DENSE_LIMIT

__all__ = ["EdModel", "ed_evolve", "ed_energy", "dense_contract", "occupancy_tail"]

ED_DIM_CAP = 20_000
TAIL_LIMIT = 1e-6


def occupancy_tail(beta, omega, n_max):
    """Thermal probability of finding more than ``n_max`` quanta in a mode.

    For the geometric distribution ``p_n = (1 - q) q**n`` with
    ``q = exp(-beta * omega)`` this is ``q**(n_max + 1)``.
    """
    if not omega > 0:
        raise ArgumentError(f"mode frequency must be positive, got {omega}")
    if int(n_max) != n_max or n_max < 0:
        raise ArgumentError(f"n_max must be a non-negative integer, got {n_max}")
    if math.isinf(beta):
        return 0.0
    return math.exp(-beta * omega * (n_max + 1))


@dataclass
class EdModel:
    """System plus a few discrete bosonic modes in a truncated Fock space."""

    system: SystemModel
    modes: BathSpec
    n_max: int

    def __post_init__(self):
        if self.modes.kind != "discrete":
            raise ArgumentError("exact diagonalization needs a discrete bath")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ArgumentError(f"n_max must be a non-negative integer, got {self.n_max}")
        self.n_max = int(self.n_max)
        if self.dim > ED_DIM_CAP:
            raise ArgumentError(f"total dimension {self.dim} exceeds the cap of {ED_DIM_CAP}")
        self.tail = 1.0 - math.prod(
            1.0 - occupancy_tail(self.modes.beta, w, self.n_max) for w in self.modes.frequencies
        )
        if self.tail > TAIL_LIMIT:
            warnings.warn(
                TailMassWarning(f"thermal occupancy beyond n_max={self.n_max} is {self.tail:.3e}", self.tail),
                stacklevel=2,
            )

    @property
    def n_modes(self):
        return len(self.modes.frequencies)

    @property
    def dim(self):
        return self.system.d * (self.n_max + 1) ** self.n_modes

    def hamiltonian(self):
        """Full Hamiltonian, system factor first, modes in order."""
        if not self.system.time_independent:
            raise ModelError("exact diagonalization needs a time-independent H_S")
        d = self.system.d
        nb = self.n_max + 1
        M = self.n_modes
        a = np.diag(np.sqrt(np.arange(1, nb)), 1).astype(complex)
        eye_b = np.eye(nb)

        def mode_op(op, k):
            out = np.ones((1, 1))
            for m in range(M):
                out = np.kron(out, op if m == k else eye_b)
            return out

        bath_dim = nb**M
        coupling_b = np.zeros((bath_dim, bath_dim), dtype=complex)
        free_b = np.zeros((bath_dim, bath_dim), dtype=complex)
        for k, (g, w) in enumerate(zip(self.modes.couplings, self.modes.frequencies)):
            ak = mode_op(a, k)
            coupling_b += g * ak.conj().T + np.conj(g) * ak
            free_b += w * (ak.conj().T @ ak)
        o_s = np.diag(self.system.coupling.lambdas).astype(complex)
        h = np.kron(self.system.hamiltonian(0.0), np.eye(bath_dim))
        h += np.kron(o_s, coupling_b) + np.kron(np.eye(d), free_b)
        return h

    def bath_populations(self):
        """Diagonal of the (truncated, renormalized) initial bath state."""
        nb = self.n_max + 1
        p = np.ones(1)
        for w in self.modes.frequencies:
            if math.isinf(self.modes.beta):
                pk = np.zeros(nb)
                pk[0] = 1.0
            else:
                pk = np.exp(-self.modes.beta * w * np.arange(nb))
                pk /= pk.sum()
            p = np.kron(p, pk)
        return p


def _initial_columns(edm, rho0):
    """Weighted pure states whose mixture is ``rho_S (x) rho_B``."""
    d = edm.system.d
    rho = _as_state(rho0, d).reshape(d, d)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ModelError("initial system state must be Hermitian")
    ws, vs = np.linalg.eigh(rho)
    pb = edm.bath_populations()
    cols, weights = [], []
    for i in range(d):
        if abs(ws[i]) < 1e-300:
            continue
        for m in np.nonzero(pb > 1e-18)[0]:
            psi = np.zeros(pb.size, dtype=complex)
            psi[m] = 1.0
            cols.append(np.kron(vs[:, i], psi))
            weights.append(ws[i] * pb[m])
    return np.array(cols).T, np.array(weights)


def _evolved(edm, rho0, dt, n_steps):
    h = edm.hamiltonian()
    energies, vecs = scipy.linalg.eigh(h)
    cols, weights = _initial_columns(edm, rho0)
    coeffs = vecs.conj().T @ cols
    for n in range(n_steps + 1):
        phase = np.exp(-1j * energies * (n * dt))
        yield h, vecs @ (phase[:, None] * coeffs), weights


def ed_evolve(edm, rho0, dt, n_steps):
    """Reduced system trajectory from exact evolution of system plus modes.

    The bath starts in its (truncated) Gibbs state, or in the vacuum at zero
    temperature, and is traced out at every step.
    """
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    d = edm.system.d
    nbath = edm.dim // d
    states = np.empty((n_steps + 1, d * d), dtype=complex)
    for n, (_, psi, w) in enumerate(_evolved(edm, rho0, dt, n_steps)):
        psi = psi.reshape(d, nbath, -1)
        rho = np.einsum("sbk,k,rbk->sr", psi, w, psi.conj())
        states[n] = rho.reshape(-1)
    return Trajectory(dt * np.arange(n_steps + 1), states)


def ed_energy(edm, rho0, dt, n_steps):
    """Total energy ``<H>`` along the exact evolution (a conservation check)."""
    out = np.empty(n_steps + 1)
    for n, (h, psi, w) in enumerate(_evolved(edm, rho0, dt, n_steps)):
        out[n] = np.real(np.einsum("ik,ij,jk,k->", psi.conj(), h, psi, w))
    return out


def dense_contract(coupling, eta, model, rho0, n_steps, interventions=(), final_obs=None, order="first"):
    """Uncompressed path sum of the process tensor with system propagators.

    The path tensor ``X[alpha_1, ..., alpha_n, beta]`` holds the system
    amplitude for each history of slot indices, and the dense process tensor
    of ``n`` slots weights it before every readout.  Without ``final_obs`` the
    whole trajectory is returned; otherwise the correlator
    ``Tr[final_obs rho(t_n)]`` with the interventions applied.
    """
    if model.d != coupling.d:
        raise DimensionError("model and coupling dimensions differ")
    D = coupling.D
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ArgumentError("n_steps must be >= 1")
    if D ** (n_steps + 1) > DENSE_LIMIT:
        raise ArgumentError(f"dense contraction over {n_steps} steps exceeds the size cap")
    ops = {}
    for iv in interventions:
        if iv.slot in ops or iv.slot >= n_steps:
            raise ArgumentError(f"invalid intervention slot {iv.slot}")
        ops[iv.slot] = iv.superop
    x = _as_state(rho0, coupling.d)
    if 0 in ops:
        x = ops[0] @ x
    states = np.empty((n_steps + 1, D), dtype=complex)
    states[0] = x
    dt = eta.dt
    for n in range(n_steps):
        props = make_propagator(model, n * dt, dt, order)
        before = props[0].g if order == "symmetric" else np.eye(D)
        after = props[1].g if order == "symmetric" else props.g
        x = x @ before.T
        # the current index becomes the slot index alpha_{n+1}
        x = x[..., :, None] * np.eye(D)
        x = x @ after.T
        if n + 1 in ops:
            x = x @ ops[n + 1].T
        F = dense_pt(coupling, eta, n + 1)
        states[n + 1] = np.tensordot(F, x, axes=(list(range(n + 1)), list(range(n + 1))))
    if final_obs is None:
        return Trajectory(dt * np.arange(n_steps + 1), states)
    obs = np.asarray(final_obs, dtype=complex)
    return complex(obs.T.reshape(-1) @ states[n_steps])
