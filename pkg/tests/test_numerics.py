import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xygme.numerics import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Z,
    NotHermitianError,
    expm_unitary,
    herm_eig,
    kron,
    trace_norm,
)

from conftest import random_unitary


def test_kron_examples():
    assert np.allclose(kron(SIGMA_I, SIGMA_I), np.eye(4))
    assert np.allclose(kron(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))
    ket00 = np.array([1, 0, 0, 0])
    assert np.allclose(kron(SIGMA_X, SIGMA_X) @ ket00, [0, 0, 0, 1])


def test_kron_many_factors():
    assert kron(SIGMA_X, SIGMA_I, SIGMA_Z).shape == (8, 8)


def test_herm_eig_pauli():
    lam, _ = herm_eig(SIGMA_Z)
    assert np.allclose(lam, [-1, 1])
    lam, u = herm_eig(SIGMA_X)
    assert np.allclose(lam, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert abs(abs(np.vdot(u[:, 0], minus)) - 1) < 1e-12
    assert abs(abs(np.vdot(u[:, 1], plus)) - 1) < 1e-12


def test_herm_eig_all_ones_block():
    g = 0.7
    lam, _ = herm_eig(g * (np.ones((4, 4)) - np.eye(4)))
    assert np.allclose(lam, [-g, -g, -g, 3 * g], atol=1e-12)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        herm_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("d", [2, 5, 16, 32])
def test_herm_eig_reconstruction(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = a + a.conj().T
    lam, u = herm_eig(h)
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm(u @ np.diag(lam) @ u.conj().T - h) < 1e-10
    assert np.linalg.norm(u.conj().T @ u - np.eye(d)) < 1e-10


def test_expm_unitary_examples(rng):
    assert np.allclose(expm_unitary(SIGMA_X, np.pi / 2), -1j * SIGMA_X, atol=1e-12)
    a = rng.normal(size=(6, 6))
    h = a + a.T
    assert np.allclose(expm_unitary(h, 0.0), np.eye(6), atol=1e-12)
    assert np.allclose(expm_unitary(h, 0.3) @ expm_unitary(h, 0.5), expm_unitary(h, 0.8), atol=1e-10)


@given(st.floats(-10, 10), st.integers(0, 2**31 - 1))
def test_expm_unitary_is_unitary(t, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    u = expm_unitary(a + a.conj().T, t)
    assert np.linalg.norm(u.conj().T @ u - np.eye(8)) < 1e-10


def test_trace_norm_examples():
    assert abs(trace_norm(np.eye(4)) - 4) < 1e-12
    assert abs(trace_norm(np.diag([1.0, -1.0])) - 2) < 1e-12
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(bell, bell).reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)
    assert abs(trace_norm(rho) - 2) < 1e-12


def test_trace_norm_rejects_non_square():
    with pytest.raises(ValueError):
        trace_norm(np.zeros((2, 3)))


@given(st.integers(0, 2**31 - 1))
def test_trace_norm_bounds_trace(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert trace_norm(m) >= abs(np.trace(m)) - 1e-12
    u = random_unitary(rng, 5)
    assert abs(trace_norm(u @ m) - trace_norm(m)) < 1e-10
