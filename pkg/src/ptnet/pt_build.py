"""Process tensors of Gaussian bosonic baths in matrix-product form.

Conventions
-----------
The system density matrix ``rho[s', s]`` is flattened row-major into the
Liouville index ``alpha = s' * d + s``; ``s'`` is the ket (forward-path)
label and ``s`` the bra (backward-path) label.  The coupling operator is
diagonal in the system basis with eigenvalues ``lambdas``.

For time slots ``i >= j`` the pair factor is::

    b_{i-j}(alpha_i, alpha_j) = exp[-(l[s'_i] - l[s_i]) * (eta_{i-j} l[s'_j] - conj(eta_{i-j}) l[s_j])]

and the process tensor is the product of ``b`` over all ordered slot pairs.
The factor is exactly 1 whenever the later index is diagonal (``s' = s``),
which is what lets the future of a process tensor be capped by any diagonal
vector.  Only influence content lives here; system propagators are applied in
:mod:`ptnet.dynamics`.

Site tensors have axes ``(left bond, physical alpha, right bond)``.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DimensionError, NumericError
from .tensor_core import SvdTruncation, truncated_svd

log = logging.getLogger(__name__)

__all__ = [
    "SystemCoupling",
    "InfluenceGate",
    "ProcessTensorMPS",
    "b_factor",
    "influence_gate",
    "dense_pt",
    "build_finite",
    "build_tti",
    "bond_profile",
    "trace_cap",
]

DENSE_LIMIT = 10**6


@dataclass(frozen=True)
class SystemCoupling:
    """Eigenvalues of the (diagonal) system coupling operator."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        if lam.ndim != 1 or lam.size < 2:
            raise ArgumentError("need at least two coupling eigenvalues (d >= 2)")
        if not np.all(np.isfinite(lam)):
            raise ArgumentError("coupling eigenvalues must be finite")
        object.__setattr__(self, "lambdas", lam)

    @property
    def d(self):
        return self.lambdas.size

    @property
    def D(self):
        return self.lambdas.size**2

    @property
    def ket(self):
        """Eigenvalue on the ket label of every Liouville index."""
        return np.repeat(self.lambdas, self.d)

    @property
    def bra(self):
        """Eigenvalue on the bra label of every Liouville index."""
        return np.tile(self.lambdas, self.d)


def trace_cap(d):
    """Diagonal-trace vector ``u`` with ``u[(s, s)] = 1/d`` and zero elsewhere.

    Any diagonal vector closes the future of a process tensor exactly; the
    normalized average keeps the closure value equal to one.
    """
    u = np.zeros(d * d, dtype=complex)
    u[:: d + 1] = 1.0 / d
    return u


@dataclass(frozen=True)
class InfluenceGate:
    """Pair factors ``b_k(alpha, beta)`` for one time separation ``k``.

    ``b`` is indexed ``[later, earlier]``; the full four-leg gate is the
    diagonal embedding of this matrix.
    """

    k: int
    b: np.ndarray


def _pair_matrix(ket, bra, eta):
    diff = (ket - bra)[:, None]
    return np.exp(-diff * (eta * ket[None, :] - np.conj(eta) * bra[None, :]))


def influence_gate(coupling, eta, k):
    """:class:`InfluenceGate` for separation ``k`` (identity beyond memory)."""
    if k < 0:
        raise ArgumentError(f"separation must be >= 0, got {k}")
    if k > eta.n_mem:
        return InfluenceGate(k, np.ones((coupling.D, coupling.D), dtype=complex))
    return InfluenceGate(k, _pair_matrix(coupling.ket, coupling.bra, eta[k]))


def b_factor(coupling, eta, k, alpha, beta):
    """Single pair factor ``b_k(alpha, beta)``.

    ``alpha`` belongs to the later slot.  Separations beyond ``eta.n_mem``
    are rejected; truncating the memory is the caller's decision.
    """
    D = coupling.D
    if not 0 <= k <= eta.n_mem:
        raise ArgumentError(f"separation {k} outside the eta table (n_mem={eta.n_mem})")
    if not (0 <= alpha < D and 0 <= beta < D):
        raise ArgumentError(f"Liouville indices must lie in [0, {D})")
    d = coupling.d
    lam = coupling.lambdas
    sa, ra = divmod(int(alpha), d)
    sb, rb = divmod(int(beta), d)
    e = complex(eta[k])
    return complex(np.exp(-(lam[sa] - lam[ra]) * (e * lam[sb] - e.conjugate() * lam[rb])))


def dense_pt(coupling, eta, n_steps):
    """Process tensor as a dense array with ``n_steps`` axes of extent ``D``.

    Evaluates the pair-product formula directly.  Intended as a ground-truth
    oracle, so the size is capped at ``DENSE_LIMIT`` entries.
    """
    D = coupling.D
    if n_steps < 1:
        raise ArgumentError("n_steps must be >= 1")
    if D**n_steps > DENSE_LIMIT:
        raise ArgumentError(f"dense process tensor would have {D**n_steps} entries (> {DENSE_LIMIT})")
    F = np.ones((D,) * n_steps, dtype=complex)
    for i in range(n_steps):
        for j in range(i + 1):
            k = i - j
            if k > eta.n_mem:
                continue
            b = influence_gate(coupling, eta, k).b
            shape = [1] * n_steps
            if i == j:
                shape[i] = D
                F = F * np.diag(b).reshape(shape)
            else:
                shape[i] = D
                shape[j] = D
                # b is [later, earlier]; axis j < i comes first in the broadcast
                F = F * b.T.reshape(shape)
    return F


@dataclass
class ProcessTensorMPS:
    """Process tensor as a matrix-product state over time slots.

    ``mode == "finite"``: ``tensors`` holds one site per slot, with boundary
    bonds of extent 1.

    ``mode == "tti"``: ``tensors`` holds a single bulk site that repeats for
    every slot, and ``left``/``right`` are the boundary vectors.  The left
    vector encodes a factorized start at slot 1; the right vector closes an
    infinite future.  It represents the limit of infinitely many slots, so
    any number of steps can be propagated.
    """

    mode: str
    d: int
    dt: float
    n_mem: int
    tensors: list
    left: np.ndarray = None
    right: np.ndarray = None
    discarded_weight: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("finite", "tti"):
            raise ArgumentError(f"unknown process tensor mode {self.mode!r}")
        D = self.d * self.d
        if not self.tensors:
            raise ArgumentError("process tensor needs at least one site tensor")
        for n, t in enumerate(self.tensors):
            if t.ndim != 3 or t.shape[1] != D:
                raise DimensionError(f"site {n} has shape {t.shape}, expected (l, {D}, r)")
        for n in range(len(self.tensors) - 1):
            if self.tensors[n].shape[2] != self.tensors[n + 1].shape[0]:
                raise DimensionError(f"bond mismatch between sites {n} and {n + 1}")
        if self.mode == "finite":
            if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
                raise DimensionError("finite process tensor must have boundary bonds of extent 1")
            self.left = np.ones(1, dtype=complex)
            self.right = np.ones(1, dtype=complex)
        else:
            if len(self.tensors) != 1:
                raise ArgumentError("tti process tensor holds exactly one bulk tensor")
            chi = self.tensors[0].shape[0]
            if self.tensors[0].shape[2] != chi:
                raise DimensionError("tti bulk tensor must have equal left and right bonds")
            if self.left is None or self.right is None:
                raise ArgumentError("tti process tensor needs boundary vectors")
            self.left = np.asarray(self.left, dtype=complex)
            self.right = np.asarray(self.right, dtype=complex)
            if self.left.shape != (chi,) or self.right.shape != (chi,):
                raise DimensionError("boundary vectors must match the bulk bond")

    @property
    def D(self):
        return self.d * self.d

    @property
    def n_slots(self):
        """Number of slots, or ``None`` for a translation-invariant tensor."""
        return len(self.tensors) if self.mode == "finite" else None

    def site(self, n):
        """Site tensor of (zero-based) slot ``n``."""
        if self.mode == "tti":
            return self.tensors[0]
        if not 0 <= n < len(self.tensors):
            raise ArgumentError(f"slot {n} outside a process tensor of {len(self.tensors)} slots")
        return self.tensors[n]

    def capped(self, n):
        """Site ``n`` with its physical leg closed by the trace cap."""
        return np.tensordot(self.site(n), trace_cap(self.d), axes=([1], [0]))

    def right_caps(self, n_steps):
        """Right environments ``R_n`` closing the slots after ``n`` (n = 0..n_steps)."""
        if self.mode == "tti":
            return [self.right] * (n_steps + 1)
        if n_steps > len(self.tensors):
            raise ArgumentError(f"{n_steps} steps requested from a {len(self.tensors)}-slot process tensor")
        envs = [None] * (len(self.tensors) + 1)
        envs[-1] = self.right
        for n in range(len(self.tensors) - 1, -1, -1):
            envs[n] = self.capped(n) @ envs[n + 1]
        return envs[: n_steps + 1]

    def unrolled(self, n_slots):
        """Finite-mode copy with ``n_slots`` sites (tti mode only).

        The boundary vectors are folded into the first and last sites.
        """
        if self.mode != "tti":
            raise ArgumentError("only a tti process tensor can be unrolled")
        M = self.tensors[0]
        if n_slots == 1:
            sites = [np.einsum("l,lar,r->a", self.left, M, self.right)[None, :, None]]
        else:
            first = np.einsum("l,lar->ar", self.left, M)[None]
            last = np.einsum("lar,r->la", M, self.right)[:, :, None]
            sites = [first] + [M.copy() for _ in range(n_slots - 2)] + [last]
        return ProcessTensorMPS("finite", self.d, self.dt, self.n_mem, sites)

    def to_dense(self):
        """Contract a small finite process tensor into a dense array."""
        if self.mode != "finite":
            raise ArgumentError("to_dense needs a finite process tensor")
        if self.D ** len(self.tensors) > DENSE_LIMIT:
            raise ArgumentError("process tensor too large to densify")
        out = self.tensors[0][0]
        for t in self.tensors[1:]:
            out = np.tensordot(out, t, axes=([-1], [0]))
        return out[..., 0]


def bond_profile(pt):
    """Internal bond extents (a single entry for a tti process tensor)."""
    if pt.mode == "tti":
        return [int(pt.tensors[0].shape[0])]
    return [int(t.shape[2]) for t in pt.tensors[:-1]]


# ---------------------------------------------------------------------------
# Sequential finite builder


def _coupling_classes(coupling):
    """Group Liouville indices by ``l[s'] - l[s]``, the only way the later
    index of a pair factor enters."""
    delta = coupling.ket - coupling.bra
    classes, inverse = np.unique(np.round(delta, 12), return_inverse=True)
    return classes, inverse


def _mpo_weights(coupling, classes, eta_k):
    ket, bra = coupling.ket, coupling.bra
    return np.exp(-classes[:, None] * (eta_k * ket[None, :] - np.conj(eta_k) * bra[None, :]))


def _qr(mat):
    return scipy.linalg.qr(mat, mode="economic", overwrite_a=True, check_finite=False)


def _move_right_qr(sites, j):
    l, D, r = sites[j].shape
    q, rr = _qr(sites[j].reshape(l * D, r))
    sites[j] = q.reshape(l, D, -1)
    sites[j + 1] = np.tensordot(rr, sites[j + 1], axes=([1], [0]))


def _compress_window(window, trunc):
    """Truncating right-to-left sweep over a window whose left environment is orthonormal.

    Only the R factors of a left-to-right QR sweep are needed: ``R_{j-1} A_j``
    has the singular values of the canonical centre, and the kept subspace is
    pushed into ``A_{j-1}`` as the projection ``A_j Vh^dagger``.  Returns the
    window with the orthogonality centre on its first site.
    """
    n = len(window)
    rs = []
    r = None
    for j in range(n - 1):
        A = window[j] if r is None else np.tensordot(r, window[j], axes=([1], [0]))
        l, D, b = A.shape
        r = scipy.linalg.qr(A.reshape(l * D, b), mode="r", check_finite=False)[0][: min(l * D, b)]
        rs.append(r)
    out = list(window)
    B = window[-1]
    for j in range(n - 1, 0, -1):
        eff = np.tensordot(rs[j - 1], B, axes=([1], [0]))
        k, D, b = eff.shape
        _, _, vh, _ = truncated_svd(eff.reshape(k, D * b), trunc)
        A = vh.reshape(-1, D, b)
        carry = np.tensordot(B, A.conj(), axes=([1, 2], [1, 2]))
        out[j] = A
        B = np.tensordot(window[j - 1], carry, axes=([2], [0]))
    out[0] = B
    return out


def _normalized_trunc(trunc):
    """Per-call truncation policy so the builder can report its own total."""
    return SvdTruncation(trunc.rel_cutoff, trunc.max_rank)


def build_finite(coupling, eta, n_steps, trunc=None):
    """Finite process tensor built one time slot at a time.

    For slot ``i`` the factors ``b_k(alpha_i, alpha_{i-k})`` with
    ``k = 1 .. min(i, n_mem)`` are applied to the existing sites as a
    diagonal matrix-product operator that carries the new index back through
    the memory window; the new site gets the on-site ``b_0`` factor.  The
    window is then recompressed by one canonicalizing sweep and one truncating
    sweep (their directions alternate from slot to slot so the orthogonality
    centre never has to travel back).  Factors beyond ``eta.n_mem`` are 1.

    The result is rescaled so that closing every slot with the trace cap gives
    exactly one.  Finally each site gets a rank-1 correction that restores
    the exact causality identity (a diagonal index at slot ``n`` closes the
    slot like the trace cap); this makes trace preservation exact whatever
    the truncation.
    """
    if n_steps < 1:
        raise ArgumentError("n_steps must be >= 1")
    trunc = _normalized_trunc(trunc or SvdTruncation())
    D = coupling.D
    n_mem = int(eta.n_mem)
    classes, cls_of = _coupling_classes(coupling)
    C = classes.size
    weights = [_mpo_weights(coupling, classes, eta[k]) for k in range(1, min(n_mem, n_steps - 1) + 1)]
    onsite = np.diag(influence_gate(coupling, eta, 0).b).copy()
    new_tail = np.zeros((C, D, 1), dtype=complex)
    new_tail[cls_of, np.arange(D), 0] = onsite

    sites = [onsite.reshape(1, D, 1).copy()]
    center = 0
    for i in range(1, n_steps):
        j0 = max(0, i - n_mem)
        if j0 == i:
            # no memory at all: the process tensor is a product
            sites.append(onsite.reshape(1, D, 1).copy())
            continue
        at_end = center == i - 1
        if not at_end:
            for j in range(center, j0):
                _move_right_qr(sites, j)
            center = j0
        for j in range(j0, i):
            A = sites[j]
            w = weights[i - j - 1]
            l, _, r = A.shape
            if j == j0:
                sites[j] = (A[:, :, :, None] * w.T[None, :, None, :]).reshape(l, D, r * C)
            else:
                # block-diagonal in the class index carried along the bond
                out = np.zeros((l, C, D, r, C), dtype=complex)
                for a in range(C):
                    out[:, a, :, :, a] = A * w[a][None, :, None]
                sites[j] = out.reshape(l * C, D, r * C)
        sites.append(new_tail.copy())
        if at_end:
            sites[j0:] = _compress_window(sites[j0:], trunc)
            center = j0
        else:
            flipped = [np.transpose(A, (2, 1, 0)) for A in reversed(sites[j0:])]
            flipped = _compress_window(flipped, trunc)
            sites[j0:] = [np.transpose(A, (2, 1, 0)) for A in reversed(flipped)]
            center = i
        norm = np.linalg.norm(sites[center])
        if not np.isfinite(norm) or norm == 0.0:
            raise NumericError(f"process tensor collapsed while adding slot {i + 1}")
        sites[center] = sites[center] / norm

    _fix_phases(sites)
    _fix_scale(sites, coupling.d)
    _restore_causality(sites, coupling.d)
    pt = ProcessTensorMPS("finite", coupling.d, eta.dt, n_mem, [np.ascontiguousarray(s) for s in sites])
    pt.discarded_weight = trunc.discarded_weight
    return pt


def _fix_phases(sites):
    """Make the largest entry real positive on every site followed by an extent-1 bond."""
    for n in range(len(sites) - 1):
        A = sites[n]
        if A.shape[2] != 1:
            continue
        big = A.flat[int(np.argmax(np.abs(A)))]
        if big == 0:
            continue
        ph = big / abs(big)
        sites[n] = A / ph
        sites[n + 1] = sites[n + 1] * ph


def _causal_correction(A, env, d):
    """Rank-1 update so that ``A[:, (s, s), :] @ env`` equals the trace-capped value for every ``s``.

    The exact process tensor satisfies this because a diagonal later index
    makes every pair factor 1; compression breaks it at the level of the
    discarded weight.  Averaging over ``s`` is unchanged, so capped
    environments stay the same.
    """
    norm2 = float(np.real(np.vdot(env, env)))
    if norm2 == 0.0:
        return A
    A = A.copy()
    target = np.tensordot(A, trace_cap(d), axes=([1], [0])) @ env
    for s in range(d):
        a = s * d + s
        resid = A[:, a, :] @ env - target
        A[:, a, :] -= np.outer(resid, env.conj()) / norm2
    return A


def _restore_causality(sites, d):
    env = np.ones(1, dtype=complex)
    for n in range(len(sites) - 1, -1, -1):
        sites[n] = _causal_correction(sites[n], env, d)
        env = np.tensordot(sites[n], trace_cap(d), axes=([1], [0])) @ env


def _fix_scale(sites, d):
    """Rescale sites in place so the all-trace-cap contraction equals one."""
    u = trace_cap(d)
    v = np.ones(1, dtype=complex)
    log_z = 0.0 + 0.0j
    for A in sites:
        v = v @ np.tensordot(A, u, axes=([1], [0]))
        nv = np.linalg.norm(v)
        if nv == 0.0 or not np.isfinite(nv):
            raise NumericError("trace-capped contraction of the process tensor vanished")
        log_z += np.log(nv)
        v = v / nv
    log_z += np.log(complex(v[0]))
    factor = np.exp(-log_z / len(sites))
    for n in range(len(sites)):
        sites[n] = sites[n] * factor


# ---------------------------------------------------------------------------
# Translation-invariant builder


def _dominant_fixed_point(apply, x0, tol, maxiter, what):
    """Power iteration for the dominant fixed point of a positive map."""
    x = x0 / np.trace(x0)
    for it in range(1, maxiter + 1):
        y = apply(x)
        tr = np.trace(y)
        if tr == 0 or not np.isfinite(tr):
            raise NumericError(f"{what}: transfer map annihilated the iterate")
        y = y / tr
        y = 0.5 * (y + y.conj().T)
        if np.linalg.norm(y - x) <= tol * np.linalg.norm(y):
            return y, tr, it
        x = y
    raise NumericError(f"{what}: power iteration did not converge in {maxiter} iterations")


def _canonicalize(T, tol, maxiter, what, left_guess=None):
    """Bring a one-site infinite MPS into right-canonical form.

    Returns ``(gamma, lam)`` where ``gamma`` satisfies
    ``sum_p gamma_p gamma_p^dagger = 1`` and ``lam`` (normalized, descending)
    are the bond weights on its left.
    """
    chi = T.shape[0]
    Tm = T.reshape(chi, -1, chi)

    P = Tm.shape[1]
    T_rows = Tm.reshape(chi * P, chi)
    T_conj = Tm.conj().reshape(chi, P * chi)

    def right_map(x):
        # sum_{p,r,s} T[l,p,r] x[r,s] conj(T[m,p,s])
        return (T_rows @ x).reshape(chi, P * chi) @ T_conj.T

    R, eta, _ = _dominant_fixed_point(right_map, np.eye(chi, dtype=complex), tol, maxiter, what + " (right)")
    evals, evecs = np.linalg.eigh(R)
    if evals[-1] <= 0:
        raise NumericError(f"{what}: right fixed point is not positive; transfer map lost injectivity")
    keep = evals > evals[-1] * 1e-14
    X = evecs[:, keep] * np.sqrt(evals[keep])[None, :]
    Xinv = (evecs[:, keep] / np.sqrt(evals[keep])[None, :]).conj().T
    G = np.einsum("ij,jpk,kl->ipl", Xinv, Tm, X, optimize=True) / np.sqrt(eta)

    chi2 = G.shape[0]
    G_conj_rows = G.conj().reshape(chi2 * P, chi2)
    G_flat = G.reshape(chi2, P * chi2)

    def left_map(x):
        # sum_{l,m,p} x[l,m] conj(G[l,p,r]) G[m,p,s]
        return G_conj_rows.T @ (x @ G_flat).reshape(chi2 * P, chi2)
    if left_guess is not None and left_guess.shape == (chi2, chi2):
        guess = left_guess
    else:
        guess = np.eye(chi2, dtype=complex)
    L, _, _ = _dominant_fixed_point(left_map, guess, tol, maxiter, what + " (left)")
    lev, lvec = np.linalg.eigh(L)
    order = np.argsort(lev)[::-1]
    lev, lvec = lev[order], lvec[:, order]
    if lev[0] <= 0:
        raise NumericError(f"{what}: left fixed point is not positive; transfer map lost injectivity")
    lev = np.clip(lev, 0.0, None)
    lam = np.sqrt(lev / lev.sum())
    # rotate the bond so the left Gram matrix becomes diag(lam**2)
    G = np.einsum("ji,jpk,kl->ipl", lvec.conj(), G, lvec, optimize=True)
    return G.reshape((chi2,) + T.shape[1:-1] + (chi2,)), lam


def build_tti(coupling, eta, trunc=None, tol=1e-12, maxiter=10_000):
    """Translation-invariant process tensor from the infinite circuit view.

    With finite memory the pair factors form a shallow brickwork circuit on
    an infinite row of wires: layer ``k`` (``k = n_mem .. 1``) applies the
    gate ``swap * diag(b_k)`` to neighbouring wires, and a final layer merges
    each pair of wires that carry the same slot index with the on-site ``b_0``
    factor.  Starting from the all-ones product state, each layer is applied
    to a two-site unit cell, the cell is re-gauged to canonical form with the
    dominant fixed points of its transfer map (power iteration), and the
    middle bond is truncated.

    The physical index is temporarily extended by one "null" value with
    coupling eigenvalue 0 on both labels.  Its pair factors are identically 1,
    so capping every past slot with it removes the past exactly; the left
    boundary vector is the dominant left eigenvector of that capped transfer
    matrix.  The right boundary is the dominant right eigenvector of the
    trace-capped transfer matrix, normalized to eigenvalue one, and the bulk
    gets the same causality correction as the finite builder.
    """
    trunc = _normalized_trunc(trunc or SvdTruncation())
    D = coupling.D
    P = D + 1
    ket = np.append(coupling.ket, 0.0)
    bra = np.append(coupling.bra, 0.0)
    n_mem = int(eta.n_mem)

    A = np.ones((1, P, 1), dtype=complex)
    B = np.ones((1, P, 1), dtype=complex)
    left_guess = None
    for k in range(n_mem, 0, -1):
        w = _pair_matrix(ket, bra, eta[k])  # [later, earlier]
        theta = np.tensordot(A, B, axes=([2], [0]))  # l, later, earlier, r
        theta = np.transpose(theta * w[None, :, :, None], (0, 2, 1, 3))
        chi = theta.shape[0]
        gamma, lam = _canonicalize(theta, tol, maxiter, f"layer {k}", left_guess)
        chi = gamma.shape[0]
        psi = lam[:, None, None, None] * gamma
        u, s, vh, _ = truncated_svd(psi.reshape(chi * P, P * chi), trunc)
        m = s.size
        vh = vh.reshape(m, P, chi)
        A_new = np.tensordot(gamma, vh.conj(), axes=([2, 3], [1, 2]))  # chi, P, m
        A, B = vh, A_new
        left_guess = np.diag((s / np.linalg.norm(s)) ** 2).astype(complex)
        log.debug("layer %d: bond %d", k, m)

    theta = np.tensordot(A, B, axes=([2], [0]))
    onsite = np.diag(_pair_matrix(ket, bra, eta[0]))
    idx = np.arange(P)
    M = theta[:, idx, idx, :] * onsite[None, :, None]
    gamma, _ = _canonicalize(M, tol, maxiter, "merge layer")
    M = gamma

    u = trace_cap(coupling.d)
    E_u = np.tensordot(M[:, :D, :], u, axes=([1], [0]))
    E_null = M[:, D, :]
    mu_u, right = _dominant_eigvec(E_u)
    mu_null, left = _dominant_eigvec(E_null.T)
    norm = left @ right
    if abs(norm) < 1e-300:
        raise NumericError("boundary vectors of the tti process tensor are orthogonal")
    left = left / norm
    bulk = np.ascontiguousarray(_causal_correction(M[:, :D, :] / mu_u, right, coupling.d))
    pt = ProcessTensorMPS("tti", coupling.d, eta.dt, n_mem, [bulk], left=left, right=right)
    pt.discarded_weight = trunc.discarded_weight
    pt.info["null_eigenvalue_ratio"] = complex(mu_null / mu_u)
    return pt


def _dominant_eigvec(mat):
    evals, evecs = scipy.linalg.eig(mat)
    k = int(np.argmax(np.abs(evals)))
    return evals[k], evecs[:, k]
