"""Dense complex tensor arithmetic.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored in
C (row-major) order: the last index varies fastest.  Every public function
returns a fresh array and never writes into its inputs.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DimensionError, NumericError

__all__ = [
    "SvdTruncation",
    "as_tensor",
    "contract",
    "permute",
    "svd_split",
    "truncated_svd",
]


@dataclass
class SvdTruncation:
    """Truncation policy for SVD compressions.

    Singular values below ``rel_cutoff * sigma_max`` are dropped and at most
    ``max_rank`` are kept.  ``discarded_weight`` accumulates the sum of
    squared discarded singular values over every split performed with this
    object, so a builder can report its total compression error.
    """

    rel_cutoff: float = 1e-12
    max_rank: int = 1024
    discarded_weight: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rel_cutoff < 1.0:
            raise ArgumentError(f"rel_cutoff must lie in [0, 1), got {self.rel_cutoff}")
        if int(self.max_rank) != self.max_rank or self.max_rank < 1:
            raise ArgumentError(f"max_rank must be a positive integer, got {self.max_rank}")
        self.max_rank = int(self.max_rank)

    def fresh(self):
        """Copy of the policy with the discarded-weight counter reset."""
        return SvdTruncation(self.rel_cutoff, self.max_rank)


def as_tensor(data, shape=None):
    """Return ``data`` as a C-ordered complex128 array, optionally reshaped."""
    arr = np.array(data, dtype=np.complex128, order="C", copy=True)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise ArgumentError(f"extents must be >= 1, got {shape}")
        if int(np.prod(shape)) != arr.size:
            raise DimensionError(f"cannot view {arr.size} values as shape {shape}")
        arr = arr.reshape(shape)
    _check_finite(arr)
    return arr


def _check_finite(arr, what="tensor"):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} of shape {arr.shape} contains NaN or Inf")


def _axis_list(axes, ndim, name):
    axes = [int(a) for a in axes]
    for a in axes:
        if not 0 <= a < ndim:
            raise ArgumentError(f"{name}: axis {a} out of range for rank {ndim}")
    if len(set(axes)) != len(axes):
        raise ArgumentError(f"{name}: duplicate axes in {axes}")
    return axes


def contract(a, a_axes, b, b_axes):
    """Sum over paired axes of two tensors.

    The result carries the free axes of ``a`` (in order) followed by the free
    axes of ``b``.  Contracting every axis gives a rank-0 array.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    a_axes = _axis_list(a_axes, a.ndim, "a_axes")
    b_axes = _axis_list(b_axes, b.ndim, "b_axes")
    if len(a_axes) != len(b_axes):
        raise ArgumentError("a_axes and b_axes must pair up one-to-one")
    for i, j in zip(a_axes, b_axes):
        if a.shape[i] != b.shape[j]:
            raise DimensionError(
                f"extent mismatch: axis {i} of a has {a.shape[i]}, axis {j} of b has {b.shape[j]}"
            )
    out = np.tensordot(a, b, axes=(a_axes, b_axes))
    out = np.ascontiguousarray(out)
    _check_finite(out, "contraction result")
    return out


def permute(a, order):
    """Reorder axes: result axis ``k`` is input axis ``order[k]``."""
    a = np.asarray(a, dtype=np.complex128)
    order = [int(o) for o in order]
    if sorted(order) != list(range(a.ndim)):
        raise ArgumentError(f"{order} is not a permutation of range({a.ndim})")
    return np.ascontiguousarray(np.transpose(a, order))


def truncated_svd(mat, trunc):
    """Thin SVD of a matrix truncated according to ``trunc``.

    Returns ``(u, s, vh, discarded)`` where ``discarded`` is the sum of the
    squared singular values that were dropped.  ``trunc.discarded_weight`` is
    incremented by the same amount.
    """
    try:
        u, s, vh = scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        try:
            u, s, vh = scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd", check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericError(f"SVD did not converge for matrix of shape {mat.shape}") from exc
    if s.size == 0 or s[0] == 0.0:
        keep = 1
    else:
        keep = int(np.count_nonzero(s >= trunc.rel_cutoff * s[0]))
        keep = max(1, min(keep, trunc.max_rank))
    discarded = float(np.sum(s[keep:] ** 2))
    trunc.discarded_weight += discarded
    return u[:, :keep], s[:keep], vh[:keep, :], discarded


def svd_split(m, left_axes, trunc, absorb="right"):
    """Split a tensor in two across an axis bipartition.

    Parameters
    ----------
    m : array_like
        Tensor to split.
    left_axes : sequence of int
        Axes that go to the left factor; the remaining axes (in their
        original order) go to the right factor.
    trunc : SvdTruncation
        Truncation policy; its ``discarded_weight`` is updated.
    absorb : {"right", "left", "none"}
        Where the singular values end up.

    Returns
    -------
    left, right, rank
        ``left`` has shape ``(*left_extents, rank)`` and ``right`` has shape
        ``(rank, *right_extents)``.  With ``absorb="none"`` the return value is
        ``(left, s, right, rank)`` with the singular values ``s`` separate.
    """
    m = np.asarray(m, dtype=np.complex128)
    left_axes = _axis_list(left_axes, m.ndim, "left_axes")
    right_axes = [a for a in range(m.ndim) if a not in left_axes]
    if not left_axes or not right_axes:
        raise ArgumentError("bipartition must leave at least one axis on each side")
    if absorb not in ("right", "left", "none"):
        raise ArgumentError(f"unknown absorb mode {absorb!r}")
    lshape = [m.shape[a] for a in left_axes]
    rshape = [m.shape[a] for a in right_axes]
    mat = np.transpose(m, left_axes + right_axes).reshape(int(np.prod(lshape)), -1)
    _check_finite(mat, "matrix to split")
    u, s, vh, _ = truncated_svd(mat, trunc)
    rank = s.size
    if absorb == "right":
        vh = s[:, None] * vh
    elif absorb == "left":
        u = u * s[None, :]
    left = np.ascontiguousarray(u.reshape(*lshape, rank))
    right = np.ascontiguousarray(vh.reshape(rank, *rshape))
    if absorb == "none":
        return left, s, right, rank
    return left, right, rank
