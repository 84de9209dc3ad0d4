"""Configuration-driven command line front end.

Usage::

    ptnet <build-pt|propagate|correlate|ttm|verify> --config run.json
          [--pt file.ptmp1] [--out DIR] [--threads N]

The configuration is a JSON document with five blocks; see
``demos/configs`` and the README for complete examples.  Operators are given
as ``{"pauli": {"x": 0.5}}`` (two-level systems), ``{"diag": [...]}`` or
``{"matrix": [[...], ...]}`` where complex entries are ``[re, im]`` pairs.

Exit codes: 0 success, 1 verification failed, 2 invalid configuration or
arguments, 3 numerical failure, 4 file input/output error.  Every failure
prints one line ``ptnet: <category>: <reason>`` on stderr.  The log level is
read from the ``PTNET_LOG_LEVEL`` environment variable.
"""

import argparse
from dataclasses import dataclass, field
import json
import logging
import math
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .bath import BathSpec, eta_table
from .dynamics import (
    SystemModel,
    Trajectory,
    correlator_grid,
    make_propagator,
    propagate,
    superop_left,
    superop_right,
    vectorize,
)
from .errors import ArgumentError, ConfigError, DimensionError, FormatError, ModelError, NumericError, PTError
from .fileio import load_ptmp1, matrix_set_rows, save_ptmp1, trajectory_rows, write_csv
from .oracle import EdModel, dense_contract, ed_evolve
from .pt_build import SystemCoupling, bond_profile, build_finite, build_tti
from .tensor_core import SvdTruncation
from .ttm import extract_maps, reconstruction_residual, transfer_tensors, ttm_propagate

log = logging.getLogger("ptnet")

TASKS = ("build-pt", "propagate", "correlate", "ttm", "verify")
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class RunConfig:
    """Validated contents of a run configuration."""

    d: int
    lambdas: list
    hamiltonian: np.ndarray
    pulses: list
    rho0: np.ndarray
    bath: BathSpec
    dt: float
    n_steps: int
    n_mem: int
    rel_cutoff: float
    max_rank: int
    task: str
    options: dict = field(default_factory=dict)

    def coupling(self):
        return SystemCoupling(self.lambdas)

    def model(self):
        if not self.pulses:
            return SystemModel(self.hamiltonian, self.coupling())
        segments = list(self.pulses) + [(1, self.hamiltonian)]
        return SystemModel.piecewise(segments, self.dt, self.coupling())

    def truncation(self):
        return SvdTruncation(self.rel_cutoff, self.max_rank)


# ---------------------------------------------------------------------------
# Parsing


class _Problems(list):
    def need(self, block, key, kind, where):
        if key not in block:
            self.append(f"{where}.{key}: missing")
            return None
        return self.typed(block[key], kind, f"{where}.{key}")

    def typed(self, value, kind, where):
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                self.append(f"{where}: expected an integer, got {value!r}")
                return None
        elif kind == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                self.append(f"{where}: expected a finite number, got {value!r}")
                return None
            value = float(value)
        elif kind == "str":
            if not isinstance(value, str):
                self.append(f"{where}: expected a string, got {value!r}")
                return None
        elif kind == "list":
            if not isinstance(value, list):
                self.append(f"{where}: expected a list, got {value!r}")
                return None
        elif kind == "dict":
            if not isinstance(value, dict):
                self.append(f"{where}: expected an object, got {value!r}")
                return None
        return value


def _scalar(x, where, problems):
    if isinstance(x, bool):
        problems.append(f"{where}: expected a number")
        return None
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    problems.append(f"{where}: expected a number or [re, im] pair, got {x!r}")
    return None


def _operator(value, d, where, problems):
    """Parse an operator literal into a ``d x d`` complex matrix."""
    if not isinstance(value, dict) or len(value) != 1:
        problems.append(f"{where}: operator must be an object with one of 'pauli', 'diag', 'matrix'")
        return None
    (kind, body), = value.items()
    if kind == "pauli":
        if d != 2:
            problems.append(f"{where}: Pauli operators need d = 2, got d = {d}")
            return None
        if not isinstance(body, dict) or not body:
            problems.append(f"{where}.pauli: expected an object of coefficients")
            return None
        out = np.zeros((2, 2), dtype=complex)
        for name, coef in body.items():
            if name not in PAULI:
                problems.append(f"{where}.pauli: unknown Pauli label {name!r}")
                continue
            c = _scalar(coef, f"{where}.pauli.{name}", problems)
            if c is not None:
                out += c * PAULI[name]
        return out
    if kind == "diag":
        if not isinstance(body, list) or len(body) != d:
            problems.append(f"{where}.diag: expected a list of {d} entries")
            return None
        vals = [_scalar(x, f"{where}.diag[{i}]", problems) for i, x in enumerate(body)]
        if any(v is None for v in vals):
            return None
        return np.diag(vals).astype(complex)
    if kind == "matrix":
        if not isinstance(body, list) or len(body) != d or any(not isinstance(r, list) or len(r) != d for r in body):
            problems.append(f"{where}.matrix: expected {d} rows of {d} entries")
            return None
        vals = [[_scalar(x, f"{where}.matrix[{i}][{j}]", problems) for j, x in enumerate(r)] for i, r in enumerate(body)]
        if any(v is None for r in vals for v in r):
            return None
        return np.array(vals, dtype=complex)
    problems.append(f"{where}: unknown operator form {kind!r}")
    return None


def _hermitian(op, where, problems):
    if op is not None and np.max(np.abs(op - op.conj().T)) > 1e-12:
        problems.append(f"{where}: operator is not Hermitian")
        return None
    return op


def _beta(value, where, problems):
    if value is None or value == "inf":
        return math.inf
    b = problems.typed(value, "number", where)
    if b is not None and not b > 0:
        problems.append(f"{where}: must be positive (use \"inf\" for zero temperature)")
        return None
    return b


def _bath(block, problems):
    where = "bath"
    kind = problems.need(block, "kind", "str", where)
    beta = _beta(block.get("beta"), f"{where}.beta", problems)
    if kind == "continuum":
        amp = problems.need(block, "amplitude", "number", where)
        s = problems.typed(block.get("exponent", 1.0), "number", f"{where}.exponent")
        wc = problems.need(block, "cutoff", "number", where)
        form = problems.typed(block.get("cutoff_form", "hard"), "str", f"{where}.cutoff_form")
        if None in (amp, s, wc, form, beta):
            return None
        try:
            return BathSpec.continuum(amp, s, wc, form, beta=beta)
        except PTError as exc:
            problems.append(f"{where}: {exc}")
            return None
    if kind == "discrete":
        w = problems.need(block, "frequencies", "list", where)
        g = problems.need(block, "couplings", "list", where)
        if w is None or g is None or beta is None:
            return None
        if len(w) != len(g):
            problems.append(f"{where}: {len(w)} frequencies but {len(g)} couplings")
            return None
        ws = [problems.typed(x, "number", f"{where}.frequencies[{i}]") for i, x in enumerate(w)]
        gs = [_scalar(x, f"{where}.couplings[{i}]", problems) for i, x in enumerate(g)]
        if None in ws or None in gs:
            return None
        try:
            return BathSpec.discrete(list(zip(gs, ws)), beta=beta)
        except PTError as exc:
            problems.append(f"{where}: {exc}")
            return None
    if kind is not None:
        problems.append(f"{where}.kind: expected 'continuum' or 'discrete', got {kind!r}")
    return None


def _slot_list(value, where, problems, lo, hi):
    if not isinstance(value, list) or not value:
        problems.append(f"{where}: expected a non-empty list of slot indices")
        return None
    out = []
    for i, x in enumerate(value):
        x = problems.typed(x, "int", f"{where}[{i}]")
        if x is None:
            return None
        if not lo <= x <= hi:
            problems.append(f"{where}[{i}]: slot {x} outside [{lo}, {hi}]")
            return None
        out.append(x)
    return out


def _task(block, d, n_steps, problems):
    where = "task"
    kind = problems.need(block, "kind", "str", where)
    if kind is None:
        return None, {}
    if kind not in TASKS:
        problems.append(f"{where}.kind: unknown task {kind!r}; expected one of {', '.join(TASKS)}")
        return None, {}
    opts = {}
    mode = block.get("mode", "finite")
    if mode not in ("finite", "tti"):
        problems.append(f"{where}.mode: expected 'finite' or 'tti', got {mode!r}")
    opts["mode"] = mode
    order = block.get("order", "first")
    if order not in ("first", "symmetric"):
        problems.append(f"{where}.order: expected 'first' or 'symmetric', got {order!r}")
    opts["order"] = order
    obs_block = block.get("observables")
    if obs_block is None:
        if d == 2:
            opts["observables"] = {k: PAULI[k] for k in ("x", "y", "z")}
        else:
            opts["observables"] = {f"p{s}": np.diag(np.eye(d)[s]).astype(complex) for s in range(d)}
    elif problems.typed(obs_block, "dict", f"{where}.observables") is not None:
        opts["observables"] = {}
        for name, lit in obs_block.items():
            op = _operator(lit, d, f"{where}.observables.{name}", problems)
            if op is not None:
                opts["observables"][name] = op
    if kind == "correlate":
        opts["operator"] = _operator(block.get("operator"), d, f"{where}.operator", problems)
        opts["observable"] = _operator(block.get("observable"), d, f"{where}.observable", problems)
        side = block.get("side", "left")
        if side not in ("left", "right"):
            problems.append(f"{where}.side: expected 'left' or 'right', got {side!r}")
        opts["side"] = side
        opts["first_slots"] = _slot_list(block.get("first_slots"), f"{where}.first_slots", problems, 0, n_steps - 1)
        opts["second_slots"] = _slot_list(block.get("second_slots"), f"{where}.second_slots", problems, 1, n_steps)
    if kind == "ttm":
        K = problems.need(block, "K", "int", where)
        if K is not None and not 1 <= K <= n_steps:
            problems.append(f"{where}.K: must lie in [1, grid.n_steps = {n_steps}]")
        opts["K"] = K
        target = problems.typed(block.get("n_target", 2 * (K or 1)), "int", f"{where}.n_target")
        if target is not None and K is not None and target < K:
            problems.append(f"{where}.n_target: must be at least K")
        opts["n_target"] = target
    if kind == "verify":
        tol = problems.typed(block.get("tolerance", 5e-3), "number", f"{where}.tolerance")
        if tol is not None and not tol > 0:
            problems.append(f"{where}.tolerance: must be positive")
        opts["tolerance"] = tol
        n_max = problems.typed(block.get("n_max", 5), "int", f"{where}.n_max")
        if n_max is not None and n_max < 0:
            problems.append(f"{where}.n_max: must be >= 0")
        opts["n_max"] = n_max
        opts["dense_steps"] = problems.typed(block.get("dense_steps", 4), "int", f"{where}.dense_steps")
    return kind, opts


def parse_config(text):
    """Parse and validate a JSON run configuration.

    Raises
    ------
    ConfigError
        With every problem found: a syntax error (with line and column) or
        the complete list of semantic violations.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    problems = _Problems()
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    for key in raw:
        if key not in ("system", "bath", "grid", "truncation", "task"):
            problems.append(f"{key}: unknown block")
    blocks = {}
    for key in ("system", "bath", "grid", "task"):
        blocks[key] = problems.typed(raw.get(key), "dict", key) if key in raw else None
        if key not in raw:
            problems.append(f"{key}: missing block")
    trunc_block = raw.get("truncation", {})
    if problems.typed(trunc_block, "dict", "truncation") is None:
        trunc_block = {}

    d = lambdas = ham = rho0 = None
    pulses = []
    sysb = blocks["system"]
    if sysb is not None:
        d = problems.need(sysb, "d", "int", "system")
        if d is not None and d < 2:
            problems.append("system.d: must be >= 2")
            d = None
        lam = problems.need(sysb, "lambdas", "list", "system")
        if lam is not None:
            lambdas = [problems.typed(x, "number", f"system.lambdas[{i}]") for i, x in enumerate(lam)]
            if None in lambdas:
                lambdas = None
            elif d is not None and len(lambdas) != d:
                problems.append(f"system.lambdas: has {len(lambdas)} entries but system.d = {d}")
        if d is not None:
            if "hamiltonian" in sysb:
                ham = _hermitian(_operator(sysb["hamiltonian"], d, "system.hamiltonian", problems), "system.hamiltonian", problems)
            else:
                problems.append("system.hamiltonian: missing")
            for i, p in enumerate(sysb.get("pulses", []) or []):
                w = f"system.pulses[{i}]"
                if problems.typed(p, "dict", w) is None:
                    continue
                steps = problems.need(p, "steps", "int", w)
                if steps is not None and steps < 1:
                    problems.append(f"{w}.steps: must be >= 1")
                    steps = None
                h = _hermitian(_operator(p.get("hamiltonian"), d, f"{w}.hamiltonian", problems), f"{w}.hamiltonian", problems)
                if steps is not None and h is not None:
                    pulses.append((steps, h))
            if "rho0" in sysb:
                rho0 = _operator(sysb["rho0"], d, "system.rho0", problems)
                rho0 = _hermitian(rho0, "system.rho0", problems)
                if rho0 is not None and abs(np.trace(rho0) - 1) > 1e-10:
                    problems.append("system.rho0: trace must be 1")
            else:
                rho0 = np.zeros((d, d), dtype=complex)
                rho0[0, 0] = 1.0

    bath = _bath(blocks["bath"], problems) if blocks["bath"] is not None else None

    dt = n_steps = n_mem = None
    grid = blocks["grid"]
    if grid is not None:
        dt = problems.need(grid, "dt", "number", "grid")
        if dt is not None and not dt > 0:
            problems.append("grid.dt: must be positive")
        n_steps = problems.need(grid, "n_steps", "int", "grid")
        if n_steps is not None and n_steps < 1:
            problems.append("grid.n_steps: must be >= 1")
            n_steps = None
        n_mem = problems.typed(grid.get("n_mem", n_steps), "int", "grid.n_mem")
        if n_mem is not None and n_mem < 0:
            problems.append("grid.n_mem: must be >= 0")

    rel_cutoff = problems.typed(trunc_block.get("rel_cutoff", 1e-10), "number", "truncation.rel_cutoff")
    if rel_cutoff is not None and not 0 <= rel_cutoff < 1:
        problems.append("truncation.rel_cutoff: must lie in [0, 1)")
    max_rank = problems.typed(trunc_block.get("max_rank", 1024), "int", "truncation.max_rank")
    if max_rank is not None and max_rank < 1:
        problems.append("truncation.max_rank: must be >= 1")

    kind, opts = (None, {})
    if blocks["task"] is not None and d is not None and n_steps is not None:
        kind, opts = _task(blocks["task"], d, n_steps, problems)
        if kind == "build-pt" and opts.get("mode") == "tti" and n_mem is not None and n_mem < 1:
            problems.append("grid.n_mem: a tti process tensor needs n_mem >= 1")
    if problems:
        raise ConfigError(list(problems))
    return RunConfig(d, lambdas, ham, pulses, rho0, bath, dt, n_steps, n_mem, rel_cutoff, max_rank, kind, opts)


def _op_literal(op):
    return {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(op)]}


def dump_config(cfg):
    """Canonical JSON text for a :class:`RunConfig` (parses back to the same config)."""
    bath = cfg.bath
    beta = "inf" if math.isinf(bath.beta) else bath.beta
    if bath.kind == "continuum":
        bath_block = {
            "kind": "continuum",
            "amplitude": bath.amplitude,
            "exponent": bath.exponent,
            "cutoff": bath.cutoff,
            "cutoff_form": bath.cutoff_form,
            "beta": beta,
        }
    else:
        bath_block = {
            "kind": "discrete",
            "frequencies": [float(w) for w in bath.frequencies],
            "couplings": [[float(g.real), float(g.imag)] for g in bath.couplings],
            "beta": beta,
        }
    task = {"kind": cfg.task}
    opts = cfg.options
    for key in ("mode", "order", "side", "first_slots", "second_slots", "K", "n_target", "tolerance", "n_max", "dense_steps"):
        if key in opts:
            task[key] = opts[key]
    if "observables" in opts:
        task["observables"] = {k: _op_literal(v) for k, v in opts["observables"].items()}
    for key in ("operator", "observable"):
        if key in opts:
            task[key] = _op_literal(opts[key])
    doc = {
        "system": {
            "d": cfg.d,
            "lambdas": list(cfg.lambdas),
            "hamiltonian": _op_literal(cfg.hamiltonian),
            "pulses": [{"steps": n, "hamiltonian": _op_literal(h)} for n, h in cfg.pulses],
            "rho0": _op_literal(cfg.rho0),
        },
        "bath": bath_block,
        "grid": {"dt": cfg.dt, "n_steps": cfg.n_steps, "n_mem": cfg.n_mem},
        "truncation": {"rel_cutoff": cfg.rel_cutoff, "max_rank": cfg.max_rank},
        "task": task,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Commands


def _eta(cfg, dt=None, n_mem=None):
    return eta_table(cfg.bath, cfg.dt if dt is None else dt, cfg.n_mem if n_mem is None else n_mem)


def _build(cfg, mode):
    eta = _eta(cfg)
    if mode == "tti":
        if cfg.n_mem < 1:
            raise ArgumentError("a tti process tensor needs n_mem >= 1")
        return build_tti(cfg.coupling(), eta, cfg.truncation())
    return build_finite(cfg.coupling(), eta, cfg.n_steps, cfg.truncation())


def _obtain_pt(cfg, pt_path):
    if pt_path is None:
        return _build(cfg, cfg.options.get("mode", "finite"))
    pt = load_ptmp1(pt_path)
    if not hasattr(pt, "mode"):
        raise FormatError(f"{pt_path} does not hold a process tensor")
    if pt.d != cfg.d or abs(pt.dt - cfg.dt) > 1e-12 * cfg.dt:
        raise ArgumentError(f"process tensor in {pt_path} (d={pt.d}, dt={pt.dt}) does not match the configuration")
    return pt


def _out(out_dir, name):
    return os.path.join(out_dir, name)


def cmd_build_pt(cfg, out_dir):
    """Build the process tensor; writes ``pt.ptmp1`` and ``bonds.csv``."""
    pt = _build(cfg, cfg.options.get("mode", "finite"))
    save_ptmp1(_out(out_dir, "pt.ptmp1"), pt)
    rows = [[i, b] for i, b in enumerate(bond_profile(pt))]
    write_csv(_out(out_dir, "bonds.csv"), ["bond", "extent"], rows, __version__)
    return {"bonds": bond_profile(pt), "discarded_weight": pt.discarded_weight}


def cmd_propagate(cfg, out_dir, pt_path=None):
    """Trajectory of the configured observables; writes ``trajectory.csv``."""
    pt = _obtain_pt(cfg, pt_path)
    traj = propagate(pt, cfg.model(), cfg.rho0, cfg.n_steps, cfg.options["order"])
    header, rows = trajectory_rows(traj, cfg.options["observables"])
    write_csv(_out(out_dir, "trajectory.csv"), header, rows, __version__)
    return {"steps": cfg.n_steps}


def cmd_correlate(cfg, out_dir, pt_path=None):
    """Two-time correlator grid; writes ``correlator.csv``."""
    pt = _obtain_pt(cfg, pt_path)
    o = cfg.options
    sup = superop_left(o["operator"]) if o["side"] == "left" else superop_right(o["operator"])
    grid = correlator_grid(pt, cfg.model(), cfg.rho0, sup, o["observable"], o["first_slots"], o["second_slots"], o["order"])
    rows = []
    for i, t1 in enumerate(o["first_slots"]):
        for j, t2 in enumerate(o["second_slots"]):
            if t2 > t1:
                v = grid[i, j]
                rows.append([float(t1 * cfg.dt), float(t2 * cfg.dt), float(v.real), float(v.imag)])
    write_csv(_out(out_dir, "correlator.csv"), ["t1", "t2", "re", "im"], rows, __version__)
    return {"entries": len(rows)}


def cmd_ttm(cfg, out_dir, pt_path=None):
    """Dynamical maps, transfer tensors and a continued trajectory."""
    pt = _obtain_pt(cfg, pt_path)
    o = cfg.options
    model = cfg.model()
    maps = extract_maps(pt, model, o["K"], o["order"])
    tts = transfer_tensors(maps)
    seeds = propagate(pt, model, cfg.rho0, o["K"] - 1, o["order"]).states
    cont = ttm_propagate(tts, seeds, o["n_target"])
    save_ptmp1(_out(out_dir, "maps.ptmp1"), maps)
    save_ptmp1(_out(out_dir, "transfer.ptmp1"), tts)
    write_csv(_out(out_dir, "maps.csv"), *matrix_set_rows(maps.maps), __version__)
    write_csv(_out(out_dir, "transfer.csv"), *matrix_set_rows(tts.tensors), __version__)
    traj = Trajectory(cfg.dt * np.arange(cont.shape[0]), cont)
    header, rows = trajectory_rows(traj, o["observables"])
    write_csv(_out(out_dir, "continuation.csv"), header, rows, __version__)
    return {"residual": reconstruction_residual(maps, tts), "transfer_norms": tts.norms().tolist()}


def _max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def cmd_verify(cfg, out_dir):
    """Oracle cross-checks for the configured instance; writes ``verify.json``.

    Checks: the uncompressed pipeline against the dense path sum, trace and
    Hermiticity of the compressed trajectory, and (for a discrete bath, or no
    bath at all) the error against an exact reference, with the error at
    half the time step reported as a splitting-order diagnostic.
    """
    o = cfg.options
    order = o["order"]
    model = cfg.model()
    coupling = cfg.coupling()
    checks = []

    n_dense = max(1, min(o["dense_steps"], cfg.n_steps, 5))
    eta_small = _eta(cfg, n_mem=min(cfg.n_mem, n_dense))
    exact_pt = build_finite(coupling, eta_small, n_dense, SvdTruncation(0.0))
    pipe = propagate(exact_pt, model, cfg.rho0, n_dense, order)
    dense = dense_contract(coupling, eta_small, model, cfg.rho0, n_dense, order=order)
    err = _max_abs(pipe.states, dense.states)
    checks.append({"name": "dense", "error": err, "tolerance": 1e-10, "passed": err <= 1e-10})

    pt = build_finite(coupling, _eta(cfg), cfg.n_steps, cfg.truncation())
    traj = propagate(pt, model, cfg.rho0, cfg.n_steps, order)
    mats = traj.matrices()
    tr_err = float(np.max(np.abs(np.trace(mats, axis1=1, axis2=2) - 1)))
    herm_err = float(np.max(np.abs(mats - np.conj(np.transpose(mats, (0, 2, 1))))))
    checks.append({"name": "trace", "error": tr_err, "tolerance": 1e-6, "passed": tr_err <= 1e-6})
    checks.append({"name": "hermiticity", "error": herm_err, "tolerance": 1e-6, "passed": herm_err <= 1e-6})

    reference = _reference(cfg, o["n_max"])
    if reference is not None:
        err = _max_abs(traj.states, reference(cfg.dt, cfg.n_steps).states)
        half = build_finite(coupling, _eta(cfg, dt=cfg.dt / 2, n_mem=2 * cfg.n_mem), 2 * cfg.n_steps, cfg.truncation())
        half_traj = propagate(half, model, cfg.rho0, 2 * cfg.n_steps, order)
        err_half = _max_abs(half_traj.states, reference(cfg.dt / 2, 2 * cfg.n_steps).states)
        observed = math.log2(err / err_half) if err > 0 and err_half > 0 else float("nan")
        checks.append(
            {
                "name": "reference",
                "error": err,
                "tolerance": o["tolerance"],
                "passed": err <= o["tolerance"],
                "error_half_step": err_half,
                "observed_order": observed,
                "nominal_order": 1 if order == "first" else 2,
            }
        )
    report = {"version": __version__, "passed": all(c["passed"] for c in checks), "checks": checks}
    with open(_out(out_dir, "verify.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def _reference(cfg, n_max):
    """Exact trajectory generator for discrete or empty baths, else ``None``."""
    if cfg.pulses:
        return None
    if cfg.bath.is_trivial:
        def closed(dt, n):
            g = make_propagator(SystemModel(cfg.hamiltonian, cfg.coupling()), 0.0, dt).g
            v = vectorize(cfg.rho0)
            out = [v]
            for _ in range(n):
                v = g @ v
                out.append(v)
            return Trajectory(dt * np.arange(n + 1), np.array(out))

        return closed
    if cfg.bath.kind == "discrete":
        edm = EdModel(cfg.model(), cfg.bath, n_max)
        return lambda dt, n: ed_evolve(edm, cfg.rho0, dt, n)
    return None


# ---------------------------------------------------------------------------
# Entry point


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parser():
    p = _Parser(prog="ptnet", description="Process-tensor open-system dynamics.")
    p.add_argument("command", choices=TASKS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--pt", default=None, help="PTMP1 process tensor to reuse")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--threads", type=int, default=1, help="BLAS threads (default 1)")
    p.add_argument("--version", action="version", version=f"ptnet {__version__}")
    return p


def _fail(category, message, code):
    text = " ".join(str(message).split())
    print(f"ptnet: {category}: {text}", file=sys.stderr)
    return code


def main(argv=None):
    """Run the command line interface; returns the process exit code."""
    logging.basicConfig(
        level=os.environ.get("PTNET_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", exc, EXIT_CONFIG)
    if args.threads < 1:
        return _fail("usage", "--threads must be >= 1", EXIT_CONFIG)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        return _fail("io-error", f"cannot read config {args.config}: {exc}", EXIT_IO)
    try:
        cfg = parse_config(text)
        if cfg.task != args.command:
            raise ConfigError([f"task.kind: config is for {cfg.task!r} but the command is {args.command!r}"])
        os.makedirs(args.out, exist_ok=True)
        with threadpool_limits(limits=args.threads):
            if args.command == "build-pt":
                cmd_build_pt(cfg, args.out)
            elif args.command == "propagate":
                cmd_propagate(cfg, args.out, args.pt)
            elif args.command == "correlate":
                cmd_correlate(cfg, args.out, args.pt)
            elif args.command == "ttm":
                cmd_ttm(cfg, args.out, args.pt)
            else:
                report = cmd_verify(cfg, args.out)
                print(json.dumps({"passed": report["passed"], "checks": {c["name"]: c["passed"] for c in report["checks"]}}, sort_keys=True))
                if not report["passed"]:
                    failed = [c["name"] for c in report["checks"] if not c["passed"]]
                    return _fail("verify-failed", f"checks failed: {', '.join(failed)}", EXIT_VERIFY)
    except ConfigError as exc:
        return _fail("config-error", "; ".join(exc.problems), EXIT_CONFIG)
    except (ArgumentError, DimensionError, ModelError) as exc:
        return _fail("config-error", exc, EXIT_CONFIG)
    except NumericError as exc:
        return _fail("numeric-error", exc, EXIT_NUMERIC)
    except (FormatError, OSError) as exc:
        return _fail("io-error", exc, EXIT_IO)
    return EXIT_OK


def run():
    sys.exit(main())
