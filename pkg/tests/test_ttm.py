import numpy as np
import pytest
import scipy.linalg

from ptnet import (
    ArgumentError,
    BathSpec,
    DynamicalMapSet,
    EdModel,
    EtaTable,
    ModelError,
    SvdTruncation,
    SystemModel,
    build_finite,
    build_tti,
    discretize_continuum,
    ed_evolve,
    eta_table,
    extract_maps,
    hermitian_basis,
    make_propagator,
    propagate,
    reconstruction_residual,
    transfer_tensors,
    ttm_propagate,
    vectorize,
)
from ptnet.dynamics import density_matrix, trace_row

from conftest import SX, SZ, random_state

RHO_UP = np.diag([1.0, 0.0]).astype(complex)


@pytest.fixture(scope="module")
def memory_pt(request):
    from ptnet import SystemCoupling

    spin = SystemCoupling([1.0, -1.0])
    eta = eta_table(BathSpec.continuum(0.05, 1.0, 5.0, "exponential", beta=1.0), 0.1, 4)
    return build_tti(spin, eta, SvdTruncation(1e-10))


def _markov_set(rng, K):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    M = scipy.linalg.expm(0.1 * (a - a.conj().T) - 0.05 * np.eye(4))
    return M, DynamicalMapSet(0.1, [np.linalg.matrix_power(M, n) for n in range(1, K + 1)])


def test_hermitian_basis():
    for d in (2, 3):
        B = hermitian_basis(d)
        assert np.linalg.matrix_rank(B) == d * d
        for col in B.T:
            m = density_matrix(col)
            assert np.allclose(m, m.conj().T)


def test_markovian_tensors(rng):
    M, maps = _markov_set(rng, 6)
    T = transfer_tensors(maps)
    assert np.max(np.abs(T.tensors[0] - M)) <= 1e-12
    assert np.max(np.abs(T.tensors[1:])) <= 1e-12


def test_single_tensor(rng):
    _, maps = _markov_set(rng, 1)
    assert np.array_equal(transfer_tensors(maps).tensors[0], maps.maps[0])


def test_markovian_continuation(rng):
    M, maps = _markov_set(rng, 3)
    T = transfer_tensors(maps)
    v0 = vectorize(random_state(rng, 2))
    seeds = np.array([np.linalg.matrix_power(M, n) @ v0 for n in range(3)])
    out = ttm_propagate(T, seeds, 20)
    for n in (5, 13, 20):
        assert np.max(np.abs(out[n] - np.linalg.matrix_power(M, n) @ v0)) <= 1e-12


def test_zero_coupling_maps(spin):
    model = SystemModel(0.8 * SX + 0.3 * SZ, spin)
    pt = build_finite(spin, EtaTable.zeros(0.1, 2), 6)
    maps = extract_maps(pt, model, 6)
    g = make_propagator(model, 0.0, 0.1).g
    for n in range(1, 7):
        assert np.max(np.abs(maps.maps[n - 1] - np.linalg.matrix_power(g, n))) <= 1e-12


def test_maps_reproduce_propagation(memory_pt, spin, rng):
    model = SystemModel(SX, spin)
    maps = extract_maps(memory_pt, model, 8, "symmetric")
    rho = random_state(rng, 2)
    traj = propagate(memory_pt, model, rho, 8, "symmetric")
    for n in range(1, 9):
        assert np.max(np.abs(maps.maps[n - 1] @ vectorize(rho) - traj.states[n])) <= 1e-12


def test_reconstruction_and_trace(memory_pt, spin):
    model = SystemModel(SX, spin)
    maps = extract_maps(memory_pt, model, 12)
    T = transfer_tensors(maps)
    assert reconstruction_residual(maps, T) <= 1e-10
    # the trace functional is a left fixed point of sum_m T_m
    tr = trace_row(2)
    assert np.max(np.abs(tr @ T.tensors.sum(axis=0) - tr)) <= 1e-10
    norms = T.norms()
    assert norms[6:].max() < norms[:6].max()


def test_under_resolved_memory(spin):
    eta = eta_table(BathSpec.continuum(0.05, 1.0, 5.0, "exponential", beta=1.0), 0.1, 10)
    pt = build_tti(spin, eta, SvdTruncation(1e-8))
    model = SystemModel(SX, spin)
    direct = propagate(pt, model, RHO_UP, 30).states
    errors, tails = [], []
    for K in (5, 20):
        T = transfer_tensors(extract_maps(pt, model, K))
        errors.append(np.max(np.abs(ttm_propagate(T, direct[:K], 30) - direct)))
        tails.append(T.norms()[-1])
    assert errors[0] > 100 * errors[1]
    assert tails[0] > 1e-3 > 1e-5 > tails[1]


def test_maps_against_ed():
    from ptnet import SystemCoupling

    bath = discretize_continuum(BathSpec.continuum(0.01, 1.0, 3.0, "hard"), 3, 3.0)
    spin = SystemCoupling([1.0, -1.0])
    model = SystemModel(1.5 * SX, spin)
    dt, K = 0.05, 20
    pt = build_finite(spin, eta_table(bath, dt, K), K, SvdTruncation(1e-10))
    maps = extract_maps(pt, model, K, "symmetric")
    edm = EdModel(model, bath, 5)
    B = hermitian_basis(2)
    for b in range(4):
        ref = ed_evolve(edm, density_matrix(B[:, b]), dt, K).states[1:]
        got = np.einsum("nij,j->ni", maps.maps, B[:, b])
        assert np.max(np.abs(got - ref)) <= 5e-3


def test_errors(spin, memory_pt):
    drive = SystemModel(lambda t: np.cos(t) * SX, spin)
    with pytest.raises(ModelError):
        extract_maps(memory_pt, drive, 3)
    T = transfer_tensors(extract_maps(memory_pt, SystemModel(SX, spin), 3))
    with pytest.raises(ArgumentError):
        ttm_propagate(T, np.zeros((2, 4)), 10)
    with pytest.raises(ArgumentError):
        extract_maps(memory_pt, SystemModel(SX, spin), 0)
