"""Binary process-tensor container (PTMP1) and CSV exports.

PTMP1 layout, all little-endian::

    magic     5 bytes   b"PTMP1"
    version   uint16    currently 1
    mode      uint8     0 finite, 1 tti, 2 dynamical maps, 3 transfer tensors
    d         uint32    Hilbert dimension
    dt        float64   time step
    n_mem     uint32    memory length (K for map and transfer-tensor sets)
    count     uint32    number of tensors
    then per tensor:
    rank      uint8
    extents   rank x uint64
    values    prod(extents) x (float64 real, float64 imag), row-major

A tti process tensor stores ``[left, bulk, right]``; map and
transfer-tensor sets store one rank-2 tensor per element.

CSV files start with a ``# ptnet <version>`` line, followed by a header row
and data rows with every number written as ``%.17g``.  Everything after the
first line depends only on the inputs.
"""

import csv
import io
import math
import struct

import numpy as np

from .errors import ArgumentError, FormatError
from .pt_build import ProcessTensorMPS
from .ttm import DynamicalMapSet, TransferTensorSet

__all__ = [
    "save_ptmp1",
    "load_ptmp1",
    "dumps_ptmp1",
    "loads_ptmp1",
    "write_csv",
    "trajectory_rows",
    "matrix_set_rows",
]

MAGIC = b"PTMP1"
VERSION = 1
MODES = {"finite": 0, "tti": 1, "maps": 2, "transfer": 3}
_HEADER = struct.Struct("<5sHBIdII")
_DTYPE = np.dtype("<c16")


def _payload(obj):
    if isinstance(obj, ProcessTensorMPS):
        if obj.mode == "finite":
            return "finite", obj.d, obj.dt, obj.n_mem, list(obj.tensors)
        return "tti", obj.d, obj.dt, obj.n_mem, [obj.left, obj.tensors[0], obj.right]
    if isinstance(obj, DynamicalMapSet):
        return "maps", _dim(obj.maps), obj.dt, obj.K, list(obj.maps)
    if isinstance(obj, TransferTensorSet):
        return "transfer", _dim(obj.tensors), obj.dt, obj.K, list(obj.tensors)
    raise ArgumentError(f"cannot serialize object of type {type(obj).__name__}")


def _dim(stack):
    return math.isqrt(stack.shape[1])


def dumps_ptmp1(obj):
    """Serialize a process tensor, map set or transfer-tensor set to bytes."""
    mode, d, dt, n_mem, tensors = _payload(obj)
    buf = io.BytesIO()
    buf.write(_HEADER.pack(MAGIC, VERSION, MODES[mode], int(d), float(dt), int(n_mem), len(tensors)))
    for t in tensors:
        t = np.asarray(t)
        buf.write(struct.pack("<B", t.ndim))
        buf.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        buf.write(np.ascontiguousarray(t, dtype=_DTYPE).tobytes())
    return buf.getvalue()


def loads_ptmp1(data):
    """Inverse of :func:`dumps_ptmp1`."""
    data = memoryview(bytes(data))
    if len(data) < _HEADER.size:
        raise FormatError("file too short for a PTMP1 header")
    magic, version, mode, d, dt, n_mem, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {bytes(magic)!r}; not a PTMP1 file")
    if version != VERSION:
        raise FormatError(f"unsupported PTMP1 version {version}")
    names = {v: k for k, v in MODES.items()}
    if mode not in names:
        raise FormatError(f"unknown PTMP1 mode flag {mode}")
    pos = _HEADER.size
    tensors = []
    for n in range(count):
        if pos + 1 > len(data):
            raise FormatError(f"truncated file in tensor {n}")
        (rank,) = struct.unpack_from("<B", data, pos)
        pos += 1
        if pos + 8 * rank > len(data):
            raise FormatError(f"truncated extents in tensor {n}")
        shape = struct.unpack_from(f"<{rank}Q", data, pos)
        pos += 8 * rank
        size = int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize
        if pos + size > len(data):
            raise FormatError(f"truncated values in tensor {n}")
        arr = np.frombuffer(data[pos : pos + size], dtype=_DTYPE).reshape(shape)
        tensors.append(arr.astype(np.complex128))
        pos += size
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes after the last tensor")
    kind = names[mode]
    try:
        if kind == "finite":
            return ProcessTensorMPS("finite", d, dt, n_mem, tensors)
        if kind == "tti":
            if len(tensors) != 3:
                raise FormatError("tti process tensor must hold left, bulk and right tensors")
            left, bulk, right = tensors
            return ProcessTensorMPS("tti", d, dt, n_mem, [bulk], left=left, right=right)
        if kind == "maps":
            return DynamicalMapSet(dt, np.array(tensors))
        return TransferTensorSet(dt, np.array(tensors))
    except ValueError as exc:
        raise FormatError(f"inconsistent PTMP1 content: {exc}") from exc


def save_ptmp1(path, obj):
    """Write ``obj`` to ``path`` in PTMP1 format."""
    blob = dumps_ptmp1(obj)
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def load_ptmp1(path):
    """Read a PTMP1 file written by :func:`save_ptmp1`."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_ptmp1(blob)


def _fmt(x):
    return "%.17g" % x


def write_csv(path, header, rows, version):
    """Write a versioned CSV file; ``rows`` hold numbers or strings."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(f"# ptnet {version}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def trajectory_rows(traj, observables):
    """Header and rows ``t, re_<name>, im_<name>, ...`` for a trajectory.

    ``observables`` maps names to ``d x d`` matrices; columns follow its
    iteration order.
    """
    header = ["t"]
    columns = []
    for name, obs in observables.items():
        header += [f"re_{name}", f"im_{name}"]
        columns.append(traj.expect(obs))
    rows = []
    for n, t in enumerate(traj.times):
        row = [float(t)]
        for col in columns:
            row += [float(col[n].real), float(col[n].imag)]
        rows.append(row)
    return header, rows


def matrix_set_rows(stack):
    """Long-format rows ``n, row, col, re, im`` for a stack of matrices (n from 1)."""
    header = ["n", "row", "col", "re", "im"]
    rows = []
    for n, m in enumerate(np.asarray(stack), start=1):
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                rows.append([n, i, j, float(m[i, j].real), float(m[i, j].imag)])
    return header, rows
