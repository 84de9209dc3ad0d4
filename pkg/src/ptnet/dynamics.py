"""System dynamics driven by a process tensor.

A state is a length-``D`` Liouville vector ``v[s' * d + s] = rho[s', s]``.
Superoperators act on these vectors from the left, so with
``vec(A rho B) = (A kron B.T) vec(rho)``:

* left multiplication ``rho -> O rho`` is ``O kron 1``,
* right multiplication ``rho -> rho O`` is ``1 kron O.T``,
* unitary conjugation ``rho -> u rho u^dagger`` is ``u kron conj(u)``.

Each time step absorbs one process-tensor slot (the bath influence) and then
applies the system propagator for that step.  With the symmetric splitting
the system propagator is split into two half steps around the slot.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DimensionError, ModelError, NumericError
from .pt_build import ProcessTensorMPS, SystemCoupling

__all__ = [
    "SystemModel",
    "Propagator",
    "SlotIntervention",
    "Trajectory",
    "make_propagator",
    "propagate",
    "propagate_batch",
    "expectation",
    "correlator",
    "correlator_grid",
    "vectorize",
    "density_matrix",
    "superop_left",
    "superop_right",
    "superop_unitary",
    "trace_row",
]

ORDERS = ("first", "symmetric")
HERMITIAN_TOL = 1e-12


def vectorize(rho):
    """Liouville vector of a ``d x d`` density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def density_matrix(v):
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex)
    d = math.isqrt(v.size)
    if v.ndim != 1 or d * d != v.size:
        raise DimensionError(f"length {v.size} is not a square Liouville dimension")
    return v.reshape(d, d).copy()


def trace_row(d):
    """Row vector ``t`` with ``t @ v = Tr(rho)``."""
    row = np.zeros(d * d, dtype=complex)
    row[:: d + 1] = 1.0
    return row


def superop_left(op):
    """Superoperator of ``rho -> op @ rho``."""
    op = _square(op)
    return np.kron(op, np.eye(op.shape[0]))


def superop_right(op):
    """Superoperator of ``rho -> rho @ op``."""
    op = _square(op)
    return np.kron(np.eye(op.shape[0]), op.T)


def superop_unitary(u):
    """Superoperator of ``rho -> u @ rho @ u^dagger``."""
    u = _square(u)
    return np.kron(u, u.conj())


def _square(op):
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"operator must be square, got shape {op.shape}")
    return op


class SystemModel:
    """System Hamiltonian ``H_S(t)`` together with the bath coupling.

    Parameters
    ----------
    hamiltonian : array_like or callable
        Either a constant ``d x d`` Hermitian matrix or a function of time
        returning one.
    coupling : SystemCoupling or array_like
        Eigenvalues of the coupling operator in the system basis.
    time_independent : bool, optional
        Declares whether ``H_S`` is constant.  Inferred when ``hamiltonian``
        is an array; callables are treated as time dependent unless stated.
    """

    def __init__(self, hamiltonian, coupling, time_independent=None):
        if not isinstance(coupling, SystemCoupling):
            coupling = SystemCoupling(coupling)
        self.coupling = coupling
        self.d = coupling.d
        if callable(hamiltonian):
            self._h = hamiltonian
            self._const = None
            self.time_independent = bool(time_independent)
            self.hamiltonian(0.0)
        else:
            h = self._checked(hamiltonian, None)
            self._const = h
            self._h = None
            self.time_independent = True if time_independent is None else bool(time_independent)

    @classmethod
    def piecewise(cls, segments, dt, coupling):
        """Piecewise-constant ``H_S``: ``segments`` is a list of ``(n_steps, H)``.

        Segment boundaries fall on multiples of ``dt``; the last segment
        continues indefinitely.
        """
        if not segments:
            raise ArgumentError("piecewise schedule needs at least one segment")
        if not dt > 0:
            raise ArgumentError(f"dt must be positive, got {dt}")
        ends, mats = [], []
        total = 0
        for n, h in segments:
            if int(n) != n or n < 1:
                raise ArgumentError(f"segment length must be a positive integer, got {n}")
            total += int(n)
            ends.append(total)
            mats.append(np.asarray(h, dtype=complex))
        ends = np.array(ends)

        def hamiltonian(t):
            step = int(math.floor(t / dt + 1e-9))
            k = min(int(np.searchsorted(ends, step, side="right")), len(mats) - 1)
            return mats[k]

        return cls(hamiltonian, coupling, time_independent=len(mats) == 1)

    def _checked(self, h, t):
        h = np.asarray(h, dtype=complex)
        where = "" if t is None else f" at t={t:g}"
        if h.shape != (self.d, self.d):
            raise DimensionError(f"H_S{where} has shape {h.shape}, expected ({self.d}, {self.d})")
        if not np.all(np.isfinite(h)):
            raise ModelError(f"H_S{where} is not finite")
        if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.max(np.abs(h))):
            raise ModelError(f"H_S{where} is not Hermitian")
        return h

    def hamiltonian(self, t):
        """``H_S(t)`` as a checked ``d x d`` array."""
        if self._const is not None:
            return self._const
        return self._checked(self._h(float(t)), float(t))


@dataclass(frozen=True)
class Propagator:
    """System superoperator for one step (or half step) of length ``dt``."""

    g: np.ndarray
    t: float
    dt: float


def make_propagator(model, t, dt, order="first"):
    """System propagator for the step starting at time ``t``.

    ``order="first"`` returns one :class:`Propagator` for
    ``exp(-i H_S(t) dt)``.  ``order="symmetric"`` returns the pair of half
    steps that sandwich the slot, with ``H_S`` sampled at the midpoint of
    each half.
    """
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    if order == "first":
        return Propagator(_unitary_superop(model.hamiltonian(t), dt), float(t), float(dt))
    if order == "symmetric":
        half = 0.5 * dt
        before = Propagator(_unitary_superop(model.hamiltonian(t + 0.5 * half), half), float(t), half)
        after = Propagator(_unitary_superop(model.hamiltonian(t + 1.5 * half), half), float(t + half), half)
        return before, after
    raise ArgumentError(f"unknown splitting order {order!r}; use one of {ORDERS}")


def _unitary_superop(h, dt):
    u = scipy.linalg.expm(-1j * dt * h)
    return np.kron(u, u.conj())


@dataclass(frozen=True)
class SlotIntervention:
    """Superoperator applied to the state at time ``t_slot = slot * dt``."""

    slot: int
    superop: np.ndarray

    def __post_init__(self):
        if int(self.slot) != self.slot or self.slot < 0:
            raise ArgumentError(f"intervention slot must be a non-negative integer, got {self.slot}")
        op = np.asarray(self.superop, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionError(f"intervention superoperator must be square, got {op.shape}")
        object.__setattr__(self, "slot", int(self.slot))
        object.__setattr__(self, "superop", op)


@dataclass
class Trajectory:
    """Liouville states ``states[n]`` at times ``times[n] = n * dt``."""

    times: np.ndarray
    states: np.ndarray

    def expect(self, obs):
        """Expectation value of ``obs`` at every recorded time."""
        obs = _square(obs)
        return self.states @ obs.T.reshape(-1)

    def matrices(self):
        d = math.isqrt(self.states.shape[1])
        return self.states.reshape(-1, d, d)


def expectation(state, obs):
    """``Tr(rho @ obs)`` for a Liouville vector ``state``."""
    state = np.asarray(state, dtype=complex)
    obs = _square(obs)
    if state.shape != (obs.size,):
        raise DimensionError(f"state of shape {state.shape} does not match a {obs.shape} observable")
    return complex(obs.T.reshape(-1) @ state)


class _Contractor:
    """Sequential contraction of a process tensor with system propagators.

    The open state has shape ``(..., bond, D)``: every past slot has been
    absorbed and the physical index of the newest slot is the current
    Liouville index.
    """

    def __init__(self, pt, model, order):
        if not isinstance(pt, ProcessTensorMPS):
            raise ArgumentError("expected a ProcessTensorMPS")
        if pt.d != model.d:
            raise DimensionError(f"process tensor has d={pt.d} but the system model has d={model.d}")
        if order not in ORDERS:
            raise ArgumentError(f"unknown splitting order {order!r}; use one of {ORDERS}")
        self.pt = pt
        self.model = model
        self.order = order
        self.dt = pt.dt
        self._envs = None
        self._const = None
        if model.time_independent:
            self._const = make_propagator(model, 0.0, self.dt, order)

    def check_length(self, n_steps):
        if n_steps < 0:
            raise ArgumentError(f"n_steps must be >= 0, got {n_steps}")
        if self.pt.mode == "finite":
            if n_steps > self.pt.n_slots:
                raise ArgumentError(
                    f"{n_steps} steps requested but the process tensor has only {self.pt.n_slots} slots"
                )
            if self._envs is None or len(self._envs) < n_steps + 1:
                self._envs = self.pt.right_caps(self.pt.n_slots)
        else:
            self._envs = None

    def start(self, rho0):
        v = np.asarray(rho0, dtype=complex)
        if v.shape[-1] != self.pt.D:
            raise DimensionError(f"initial state has Liouville dimension {v.shape[-1]}, expected {self.pt.D}")
        return v[..., None, :] * self.pt.left[:, None]

    def _props(self, n):
        if self._const is not None:
            return self._const
        return make_propagator(self.model, n * self.dt, self.dt, self.order)

    def step(self, state, n):
        """Advance the open state from ``t_n`` to ``t_{n+1}``."""
        props = self._props(n)
        if self.order == "symmetric":
            state = state @ props[0].g.T
        state = np.einsum("...la,lar->...ra", state, self.pt.site(n), optimize=True)
        g = props[1].g if self.order == "symmetric" else props.g
        return state @ g.T

    def readout(self, state, n):
        """Reduced state at ``t_n`` with all later slots closed."""
        env = self.pt.right if self.pt.mode == "tti" else self._envs[n]
        out = np.einsum("...la,l->...a", state, env)
        if not np.all(np.isfinite(out)):
            raise NumericError(f"non-finite state at step {n}")
        return out


def propagate(pt, model, rho0, n_steps, order="first"):
    """Reduced-state trajectory over ``n_steps`` steps.

    Parameters
    ----------
    pt : ProcessTensorMPS
        Finite (at least ``n_steps`` slots) or translation-invariant.
    model : SystemModel
        System Hamiltonian; its dimension must match ``pt.d``.
    rho0 : array_like
        Initial state, either a ``d x d`` matrix or a Liouville vector.
    n_steps : int
        Number of time steps.
    order : {"first", "symmetric"}
        Splitting of system and bath propagation.

    Returns
    -------
    Trajectory
        ``n_steps + 1`` states including the initial one.
    """
    v0 = _as_state(rho0, pt.d)
    traj = propagate_batch(pt, model, v0[None, :], n_steps, order)
    return Trajectory(traj.times, traj.states[:, 0, :])


def propagate_batch(pt, model, states, n_steps, order="first"):
    """Propagate several initial Liouville vectors (rows of ``states``) at once.

    The returned trajectory has ``states`` of shape ``(n_steps + 1, batch, D)``.
    """
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2:
        raise DimensionError("initial states must be a 2-d array of Liouville vectors")
    n_steps = int(n_steps)
    c = _Contractor(pt, model, order)
    c.check_length(n_steps)
    out = np.empty((n_steps + 1,) + states.shape, dtype=complex)
    out[0] = states
    state = c.start(states)
    for n in range(n_steps):
        state = c.step(state, n)
        out[n + 1] = c.readout(state, n + 1)
    return Trajectory(pt.dt * np.arange(n_steps + 1), out)


def _as_state(rho0, d):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape == (d, d):
        return vectorize(rho0)
    if rho0.shape == (d * d,):
        return rho0.copy()
    raise DimensionError(f"initial state of shape {rho0.shape} does not match d={d}")


def _check_interventions(interventions, final_slot, D):
    slots = [iv.slot for iv in interventions]
    if any(b <= a for a, b in zip(slots, slots[1:])):
        raise ArgumentError(f"intervention slots must be strictly increasing, got {slots}")
    if slots and slots[-1] >= final_slot:
        raise ArgumentError(f"intervention slot {slots[-1]} is not before the readout slot {final_slot}")
    for iv in interventions:
        if iv.superop.shape != (D, D):
            raise DimensionError(f"intervention at slot {iv.slot} has shape {iv.superop.shape}, expected ({D}, {D})")


def correlator(pt, model, rho0, interventions, final_obs, final_slot, order="first"):
    """Time-ordered multi-time correlation function.

    The state is propagated as in :func:`propagate`; each intervention's
    superoperator is applied to the state at its slot time and
    ``final_obs`` is measured at ``t_final = final_slot * dt``.  For example
    ``<B(t2) A(t1)>`` is obtained with a single left-multiplication
    intervention ``superop_left(A)`` at ``t1`` and ``final_obs = B``.
    """
    D = pt.D
    final_slot = int(final_slot)
    interventions = list(interventions)
    _check_interventions(interventions, final_slot, D)
    c = _Contractor(pt, model, order)
    c.check_length(final_slot)
    state = c.start(_as_state(rho0, pt.d))
    pending = list(interventions)
    for n in range(final_slot + 1):
        if n > 0:
            state = c.step(state, n - 1)
        while pending and pending[0].slot == n:
            state = state @ pending.pop(0).superop.T
    return expectation(c.readout(state, final_slot), final_obs)


def correlator_grid(pt, model, rho0, superop, final_obs, first_slots, second_slots, order="first"):
    """Two-time correlators on a grid of slot pairs.

    Returns an array ``G[i, j]`` holding the correlator with ``superop``
    applied at ``first_slots[i]`` and ``final_obs`` read at
    ``second_slots[j]``; entries with ``second <= first`` are NaN.

    The unperturbed contraction is shared by every entry: its open state is
    checkpointed every ``ceil(N / 64)`` slots, so each row restarts from the
    nearest checkpoint and then runs forward once over all later readouts.
    """
    first_slots = [int(s) for s in first_slots]
    second_slots = [int(s) for s in second_slots]
    if not first_slots or not second_slots:
        raise ArgumentError("slot lists must be non-empty")
    if min(first_slots) < 0 or min(second_slots) < 0:
        raise ArgumentError("slots must be non-negative")
    superop = np.asarray(superop, dtype=complex)
    D = pt.D
    if superop.shape != (D, D):
        raise DimensionError(f"superoperator has shape {superop.shape}, expected ({D}, {D})")
    obs_row = _square(final_obs).T.reshape(-1)
    n_end = max(second_slots)
    c = _Contractor(pt, model, order)
    c.check_length(n_end)

    stride = max(1, math.ceil(n_end / 64))
    checkpoints = {}
    state = c.start(_as_state(rho0, pt.d))
    last_first = max(first_slots)
    for n in range(last_first + 1):
        if n > 0:
            state = c.step(state, n - 1)
        if n % stride == 0:
            checkpoints[n] = state

    out = np.full((len(first_slots), len(second_slots)), np.nan + 0j)
    targets = sorted(set(second_slots))
    column = {s: [j for j, t in enumerate(second_slots) if t == s] for s in targets}
    for i, t1 in enumerate(first_slots):
        later = [s for s in targets if s > t1]
        if not later:
            continue
        n = (t1 // stride) * stride
        state = checkpoints[n]
        while n < t1:
            state = c.step(state, n)
            n += 1
        state = state @ superop.T
        for s in later:
            while n < s:
                state = c.step(state, n)
                n += 1
            value = obs_row @ c.readout(state, s)
            for j in column[s]:
                out[i, j] = value
    return out
