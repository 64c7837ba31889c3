import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xygme import gme, states
from xygme.qstate import DensityMatrix, PureState, bipartitions, density_of, partial_transpose

from conftest import random_density, random_state, random_unitary

seeds = st.integers(0, 2**31 - 1)


def local_unitary(rng, n):
    u = random_unitary(rng, 2)
    for _ in range(n - 1):
        u = np.kron(u, random_unitary(rng, 2))
    return u


@pytest.mark.parametrize("name,value,tol", [
    ("ghz3", 0.5, 5e-4), ("w3", 0.4428, 5e-4), ("g3p", 0.3448, 5e-4), ("chi3", 0.5, 5e-4),
])
def test_three_qubit_values(name, value, tol):
    assert abs(gme.genuine_negativity(states.named(name)).value - value) < tol


def test_product_state_zero():
    assert gme.genuine_negativity(PureState.basis("000")).value < 1e-6


def test_bell_equals_half():
    assert abs(gme.genuine_negativity(states.from_kets({"01": 1, "10": 1})).value - 0.5) < 1e-6


def test_result_invariants():
    s = states.w(3)
    res = gme.genuine_negativity(s)
    rho = density_of(s).matrix
    assert 0 <= res.value <= 0.5 + 1e-6
    assert abs(-np.trace(res.witness @ rho).real - res.value) < 1e-6
    assert len(res.decompositions) == 3
    for part, (p, q) in res.decompositions.items():
        assert np.abs(res.witness - p - partial_transpose(q, part)).max() < 1e-6
        for m in (p, q):
            evl = np.linalg.eigvalsh(m)
            assert evl[0] > -1e-7 and evl[-1] < 1 + 1e-7


def test_gauged_solution_maps_back():
    # a pure state with complex amplitudes removable by local z phases
    phases = np.array([0.3, -1.1, 2.0])
    s = states.g_state(3, +1)
    bits = np.array([[i >> 2 & 1, i >> 1 & 1, i & 1] for i in range(8)])
    moved = PureState(s.amplitudes * np.exp(1j * bits @ phases))
    res = gme.genuine_negativity(moved)
    assert res.solver_stats["real_gauge"]
    assert abs(res.value - 0.3448) < 5e-4
    rho = density_of(moved).matrix
    assert abs(-np.trace(res.witness @ rho).real - res.value) < 1e-6
    for part, (p, q) in res.decompositions.items():
        assert np.abs(res.witness - p - partial_transpose(q, part)).max() < 1e-6
        assert np.linalg.eigvalsh(p)[0] > -1e-7 and np.linalg.eigvalsh(q)[0] > -1e-7


def test_real_gauge():
    assert gme.real_gauge(states.w(3)) is not None
    # |0011> evolution populates amplitudes no z phases can make real
    from xygme import dynamics
    s = dynamics.evolve(dynamics.complete_graph(4), PureState.basis("0011"), 0.6)
    assert gme.real_gauge(s) is None


def test_bipartite_negativity_examples():
    bell = states.from_kets({"00": 1, "11": 1})
    part = bipartitions(2)[0]
    assert abs(gme.bipartite_negativity(bell, part) - 0.5) < 1e-12
    assert abs(gme.bipartite_negativity(PureState.basis("01"), part)) < 1e-12
    a_bc = [p for p in bipartitions(3) if p.subset == 0b001][0]
    assert abs(gme.bipartite_negativity(states.w(3), a_bc) - np.sqrt(2) / 3) < 1e-12


def test_is_ppt_examples():
    for part in bipartitions(3):
        assert not gme.is_ppt(states.ghz(3), part)
        assert gme.is_ppt(DensityMatrix(np.eye(8) / 8), part)
    sep = DensityMatrix(0.5 * np.diag([1, 0, 0, 0]) + 0.5 * np.diag([0, 0, 0, 1]))
    assert gme.is_ppt(sep, bipartitions(2)[0])


def test_random_biseparable_contract():
    a = gme.random_biseparable(3, 7)
    b = gme.random_biseparable(3, 7)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, gme.random_biseparable(3, 8).matrix)
    with pytest.raises(ValueError):
        gme.random_biseparable(2, 0)


@pytest.mark.parametrize("seed", range(3))
def test_biseparable_three_qubit_zero(seed):
    assert gme.genuine_negativity(gme.random_biseparable(3, seed)).value < 1e-5


@settings(max_examples=10)
@given(seeds)
def test_two_qubit_equivalence(seed):
    rho = DensityMatrix(random_density(np.random.default_rng(seed), 2, rank=2))
    neg = gme.bipartite_negativity(rho, bipartitions(2)[0])
    assert abs(gme.genuine_negativity(rho).value - neg) < 1e-5


@settings(max_examples=8)
@given(seeds)
def test_bounded_by_min_bipartite_negativity(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, 3, rank=int(rng.integers(1, 4))))
    e = gme.genuine_negativity(rho).value
    assert 0 <= e <= 0.5 + 1e-6
    assert e <= min(gme.bipartite_negativity(rho, m) for m in bipartitions(3)) + 1e-6


@settings(max_examples=6)
@given(seeds)
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, 3)
    u = local_unitary(rng, 3)
    a = gme.genuine_negativity(PureState(psi)).value
    b = gme.genuine_negativity(PureState(u @ psi)).value
    assert abs(a - b) < 1e-5


def test_solver_failure_raises():
    with pytest.raises(gme.GmeSolverError) as err:
        gme.genuine_negativity(states.w(3), max_iter=2)
    assert err.value.status == "max-iterations"


def test_rejects_single_qubit():
    with pytest.raises(ValueError):
        gme.genuine_negativity(PureState.basis("0"))
