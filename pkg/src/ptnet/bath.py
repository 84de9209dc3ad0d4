"""Gaussian bosonic environments.

A bath is either a finite set of modes ``(g_k, w_k)`` or a power-law spectral
density ``J(w) = A w**s`` with a hard or exponential cutoff.  From it we get
the thermal correlation function ``C(t)`` and the table of window-integrated
coefficients ``eta_k`` that is the only bath input to the process-tensor
builders.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special

from .errors import ArgumentError, NumericError

__all__ = [
    "BathSpec",
    "EtaTable",
    "spectral_density",
    "correlation",
    "eta_table",
    "discretize_continuum",
]

# Frequency range of an exponential cutoff, in units of the cutoff frequency.
EXP_CUTOFF_SPAN = 50.0


@dataclass(frozen=True)
class BathSpec:
    """Environment description.

    Use :meth:`discrete` or :meth:`continuum` rather than the raw
    constructor.  ``beta = math.inf`` selects zero temperature, for which the
    thermal factor ``coth(beta w / 2)`` is replaced by exactly 1.
    """

    kind: str
    beta: float = math.inf
    couplings: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    frequencies: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitude: float = 0.0
    exponent: float = 1.0
    cutoff: float = 1.0
    cutoff_form: str = "hard"

    def __post_init__(self):
        if self.kind not in ("discrete", "continuum"):
            raise ArgumentError(f"unknown bath kind {self.kind!r}")
        if not (self.beta > 0):
            raise ArgumentError(f"beta must be positive (or inf for zero temperature), got {self.beta}")
        if self.kind == "discrete":
            g = np.atleast_1d(np.asarray(self.couplings, dtype=complex))
            w = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
            if g.shape != w.shape or g.ndim != 1:
                raise ArgumentError("couplings and frequencies must be 1-d arrays of equal length")
            if np.any(w <= 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(g)):
                raise ArgumentError("mode frequencies must be finite and positive")
            object.__setattr__(self, "couplings", g)
            object.__setattr__(self, "frequencies", w)
        else:
            if self.amplitude < 0 or not math.isfinite(self.amplitude):
                raise ArgumentError(f"amplitude must be >= 0, got {self.amplitude}")
            if not self.exponent > 0:
                raise ArgumentError(f"exponent s must be > 0, got {self.exponent}")
            if not self.cutoff > 0:
                raise ArgumentError(f"cutoff frequency must be > 0, got {self.cutoff}")
            if self.cutoff_form not in ("hard", "exponential"):
                raise ArgumentError(f"cutoff_form must be 'hard' or 'exponential', got {self.cutoff_form!r}")

    @classmethod
    def discrete(cls, modes, beta=math.inf):
        """Bath of explicit modes given as ``[(g_k, w_k), ...]``."""
        modes = list(modes)
        g = np.array([m[0] for m in modes], dtype=complex)
        w = np.array([m[1] for m in modes], dtype=float)
        return cls("discrete", beta=beta, couplings=g, frequencies=w)

    @classmethod
    def continuum(cls, amplitude, exponent=1.0, cutoff=1.0, cutoff_form="hard", beta=math.inf):
        """Power-law spectral density ``A w**s`` with the given cutoff."""
        return cls(
            "continuum",
            beta=beta,
            amplitude=float(amplitude),
            exponent=float(exponent),
            cutoff=float(cutoff),
            cutoff_form=cutoff_form,
        )

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    @property
    def is_trivial(self):
        """True when the bath exerts no influence at all."""
        if self.kind == "discrete":
            return self.couplings.size == 0 or not np.any(self.couplings)
        return self.amplitude == 0.0

    @property
    def omega_max(self):
        """Upper end of the frequency support used for integrals."""
        if self.kind == "discrete":
            return float(self.frequencies.max()) if self.frequencies.size else 0.0
        if self.cutoff_form == "hard":
            return self.cutoff
        return EXP_CUTOFF_SPAN * self.cutoff

    def thermal_factor(self, w):
        w = np.asarray(w, dtype=float)
        if self.zero_temperature:
            return np.ones_like(w)
        return 1.0 / np.tanh(0.5 * self.beta * w)


@dataclass(frozen=True)
class EtaTable:
    """Window-integrated correlation coefficients ``eta_0 .. eta_{n_mem}``."""

    dt: float
    n_mem: int
    values: np.ndarray
    error_estimate: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.n_mem + 1,):
            raise ArgumentError(f"expected {self.n_mem + 1} eta values, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, k):
        return self.values[k]

    def truncated(self, n_mem):
        """Table with a shorter memory; beyond ``n_mem`` the factors are 1."""
        if not 0 <= n_mem <= self.n_mem:
            raise ArgumentError(f"cannot truncate memory {self.n_mem} to {n_mem}")
        return EtaTable(self.dt, n_mem, self.values[: n_mem + 1].copy(), self.error_estimate)

    @classmethod
    def zeros(cls, dt, n_mem):
        return cls(float(dt), int(n_mem), np.zeros(n_mem + 1, dtype=complex))


def spectral_density(bath, w):
    """``J(w)`` of a continuum bath (zero outside the cutoff for 'hard')."""
    if bath.kind != "continuum":
        raise ArgumentError("spectral_density needs a continuum bath")
    w = np.asarray(w, dtype=float)
    j = bath.amplitude * np.abs(w) ** bath.exponent
    if bath.cutoff_form == "hard":
        return np.where((w >= 0) & (w <= bath.cutoff), j, 0.0)
    return np.where(w >= 0, j * np.exp(-w / bath.cutoff), 0.0)


# ---------------------------------------------------------------------------
# Frequency quadrature for continuum baths


def _gauss_legendre(order, a, b):
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _frequency_grid(bath, tmax, order):
    """Composite Gauss-Legendre nodes over the support of ``J``.

    Panels are narrow enough that ``cos(w t)`` completes at most one period
    per panel at ``t = tmax``; for non-integer exponents the first panel
    is graded geometrically towards ``w = 0`` to tame the ``w**(s-1)`` endpoint.
    """
    top = bath.omega_max
    n_panels = max(4, int(math.ceil(top * tmax / (2.0 * math.pi))))
    if bath.cutoff_form == "exponential":
        n_panels = max(n_panels, 64)
    edges = np.linspace(0.0, top, n_panels + 1)
    pieces = []
    first = edges[1]
    if float(bath.exponent).is_integer():
        pieces.append((0.0, first))
    else:
        lo = first
        for _ in range(60):
            pieces.append((0.5 * lo, lo))
            lo *= 0.5
        pieces.append((0.0, lo))
    pieces.extend(zip(edges[1:-1], edges[2:]))
    nodes, weights = [], []
    for a, b in pieces:
        x, w = _gauss_legendre(order, a, b)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _continuum_correlation(bath, t, order):
    w, wts = _frequency_grid(bath, float(np.max(np.abs(t), initial=0.0)), order)
    jw = spectral_density(bath, w) * wts
    re_w = jw * bath.thermal_factor(w)
    out = np.empty(t.shape, dtype=complex)
    flat_t = t.ravel()
    flat_out = out.ravel()
    chunk = max(1, 2_000_000 // max(1, w.size))
    for start in range(0, flat_t.size, chunk):
        tt = flat_t[start : start + chunk]
        phase = np.outer(tt, w)
        flat_out[start : start + chunk] = np.cos(phase) @ re_w - 1j * (np.sin(phase) @ jw)
    return out


def correlation(bath, t, order=16, rtol=1e-10):
    """Thermal bath correlation function ``C(t)``.

    ``t`` may be a scalar or an array.  For a continuum bath the frequency
    integral is done by composite Gauss-Legendre quadrature at ``order`` and
    ``2*order`` nodes per panel; if the two disagree by more than
    ``rtol * C(0)`` the comparison is repeated one level finer and a
    :class:`NumericError` carrying the achieved estimate is raised if that
    still fails.
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ArgumentError("correlation times must be finite")
    if bath.is_trivial:
        out = np.zeros(t.shape, dtype=complex)
    elif bath.kind == "discrete":
        g2 = np.abs(bath.couplings) ** 2
        w = bath.frequencies
        phase = np.multiply.outer(t, w)
        out = (np.cos(phase) * (g2 * bath.thermal_factor(w))).sum(-1) - 1j * (np.sin(phase) * g2).sum(-1)
    else:
        out, _ = _converged(lambda n: _continuum_correlation(bath, t, n), bath, order, rtol)
    return complex(out) if scalar else out


def _converged(evaluate, bath, order, rtol):
    scale = abs(complex(_continuum_correlation(bath, np.zeros(1), 2 * order)[0]))
    estimate = math.inf
    for n in (order, 2 * order):
        coarse = evaluate(n)
        fine = evaluate(2 * n)
        estimate = float(np.max(np.abs(fine - coarse), initial=0.0))
        if estimate <= rtol * max(scale, 1e-300):
            return fine, estimate
    raise NumericError(
        f"frequency quadrature not converged: estimate {estimate:.3e} > {rtol:.1e} * C(0)",
        estimate=estimate,
    )


# ---------------------------------------------------------------------------
# Window integrals


def _eta_values(bath, dt, n_mem, order):
    """Tensor-product Gauss-Legendre evaluation of every ``eta_k``."""
    x, wx = _gauss_legendre(order, 0.0, dt)
    # off-diagonal windows: C(k dt + x - y) over the square [0, dt]^2
    diff = (x[:, None] - x[None, :]).ravel()
    wsq = (wx[:, None] * wx[None, :]).ravel()
    # diagonal window: y = x u with u in [0, 1] maps the triangle to a square
    u, wu = _gauss_legendre(order, 0.0, 1.0)
    tri_t = (x[:, None] * (1.0 - u[None, :])).ravel()
    tri_w = ((wx * x)[:, None] * wu[None, :]).ravel()

    ks = np.arange(1, n_mem + 1)
    times = np.concatenate([tri_t, (ks[:, None] * dt + diff[None, :]).ravel()])
    c = correlation(bath, times)
    vals = np.empty(n_mem + 1, dtype=complex)
    vals[0] = c[: tri_t.size] @ tri_w
    if n_mem:
        vals[1:] = c[tri_t.size :].reshape(n_mem, -1) @ wsq
    return vals


def eta_table(bath, dt, n_mem, order=16, rtol=1e-10):
    """Discretized influence coefficients for time step ``dt``.

    ``eta_k`` for ``k >= 1`` integrates ``C(t' - t'')`` over two windows of
    length ``dt`` that are ``k`` steps apart; ``eta_0`` integrates over the
    ordered triangle ``t'' < t'`` of a single window.  Each is computed with
    ``order`` and ``2*order`` Gauss-Legendre nodes per axis; the difference is
    the convergence estimate, which must stay below ``rtol`` times the largest
    ``|eta_k|`` (one further doubling is tried before giving up).
    """
    dt = float(dt)
    n_mem = int(n_mem)
    if not dt > 0 or not math.isfinite(dt):
        raise ArgumentError(f"dt must be positive, got {dt}")
    if n_mem < 0:
        raise ArgumentError(f"n_mem must be >= 0, got {n_mem}")
    if bath.is_trivial:
        return EtaTable.zeros(dt, n_mem)
    estimate = math.inf
    for n in (order, 2 * order):
        coarse = _eta_values(bath, dt, n_mem, n)
        fine = _eta_values(bath, dt, n_mem, 2 * n)
        scale = float(np.max(np.abs(fine)))
        estimate = float(np.max(np.abs(fine - coarse)))
        if estimate <= rtol * scale:
            return EtaTable(dt, n_mem, fine, estimate)
    raise NumericError(
        f"eta quadrature not converged: estimate {estimate:.3e} exceeds {rtol:.1e} relative",
        estimate=estimate,
    )


def discretize_continuum(bath, n_modes, omega_max):
    """Replace a continuum bath by ``n_modes`` equally spaced modes.

    Mode ``k`` sits at the centre of the ``k``-th frequency bin of
    ``[0, omega_max]`` and carries the spectral weight of that bin,
    ``|g_k|**2 = integral of J over the bin``.
    """
    if bath.kind != "continuum":
        raise ArgumentError("discretize_continuum needs a continuum bath")
    if int(n_modes) != n_modes or n_modes < 1:
        raise ArgumentError(f"n_modes must be a positive integer, got {n_modes}")
    if not omega_max > 0:
        raise ArgumentError(f"omega_max must be positive, got {omega_max}")
    edges = np.linspace(0.0, float(omega_max), int(n_modes) + 1)
    weights = _bin_weights(bath, edges)
    centres = 0.5 * (edges[1:] + edges[:-1])
    return BathSpec("discrete", beta=bath.beta, couplings=np.sqrt(weights).astype(complex), frequencies=centres)


def _bin_weights(bath, edges):
    s1 = bath.exponent + 1.0
    if bath.cutoff_form == "hard":
        e = np.minimum(edges, bath.cutoff)
        cumulative = bath.amplitude * e**s1 / s1
    else:
        wc = bath.cutoff
        cumulative = bath.amplitude * wc**s1 * special.gamma(s1) * special.gammainc(s1, edges / wc)
    return np.clip(np.diff(cumulative), 0.0, None)
